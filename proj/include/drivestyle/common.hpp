// Copyright 2026 The drivestyle Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <numbers>
#include <stdexcept>
#include <string>
#include <string_view>

namespace drivestyle
{

/// Base of every error raised by the library. `exit_code()` follows the CLI
/// contract: 1 usage/config, 2 data, 3 internal.
class Error : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
  virtual int exit_code() const noexcept { return 3; }
};

class ConfigError : public Error
{
public:
  using Error::Error;
  int exit_code() const noexcept override { return 1; }
};

class DataError : public Error
{
public:
  using Error::Error;
  int exit_code() const noexcept override { return 2; }
};

/// Document does not match the expected schema (missing field, wrong type).
class SchemaError : public DataError
{
public:
  using DataError::DataError;
};

/// A value violates a documented invariant.
class InvariantError : public DataError
{
public:
  using DataError::DataError;
};

/// Input lies outside the domain where an operation is defined.
class DomainError : public DataError
{
public:
  using DataError::DataError;
};

/// Statistical fit impossible on the given data.
class DegenerateDataError : public DataError
{
public:
  using DataError::DataError;
};

class IoError : public DataError
{
public:
  using DataError::DataError;
};

inline constexpr double kPi = std::numbers::pi;

/// Wraps an angle into (-pi, pi].
inline double normalize_angle(double a)
{
  if (!std::isfinite(a)) {
    return a;
  }
  a = std::fmod(a, 2.0 * kPi);
  if (a <= -kPi) {
    a += 2.0 * kPi;
  } else if (a > kPi) {
    a -= 2.0 * kPi;
  }
  return a;
}

/// Fixed-point formatting that never prints a negative zero.
inline std::string fixed(double value, int decimals)
{
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", decimals, value);
  std::string out(buf);
  if (out.front() == '-' && out.find_first_not_of("-0.") == std::string::npos) {
    out.erase(out.begin());
  }
  return out;
}

/// 64-bit FNV-1a, used for config provenance hashes.
inline std::uint64_t fnv1a(std::string_view bytes)
{
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

inline std::string hex64(std::uint64_t v)
{
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace drivestyle
