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

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "drivestyle/common.hpp"

namespace drivestyle
{

using Json = nlohmann::ordered_json;

/// Schema accessors that report the path of the offending field.
namespace schema
{

inline const Json &field(const Json &obj, const std::string &key, const std::string &path)
{
  if (!obj.is_object()) {
    throw SchemaError(path + ": expected an object");
  }
  auto it = obj.find(key);
  if (it == obj.end()) {
    throw SchemaError((path.empty() ? key : path + "." + key) + ": field missing");
  }
  return *it;
}

inline std::string join(const std::string &path, const std::string &key)
{
  return path.empty() ? key : path + "." + key;
}

inline double number(const Json &obj, const std::string &key, const std::string &path)
{
  const Json &v = field(obj, key, path);
  if (!v.is_number()) {
    throw SchemaError(join(path, key) + ": expected a number");
  }
  return v.get<double>();
}

inline double number_at(const Json &arr, std::size_t i, const std::string &path)
{
  if (!arr.is_array() || i >= arr.size() || !arr[i].is_number()) {
    throw SchemaError(path + "[" + std::to_string(i) + "]: expected a number");
  }
  return arr[i].get<double>();
}

inline std::string string(const Json &obj, const std::string &key, const std::string &path)
{
  const Json &v = field(obj, key, path);
  if (!v.is_string()) {
    throw SchemaError(join(path, key) + ": expected a string");
  }
  return v.get<std::string>();
}

inline const Json &array(const Json &obj, const std::string &key, const std::string &path)
{
  const Json &v = field(obj, key, path);
  if (!v.is_array()) {
    throw SchemaError(join(path, key) + ": expected an array");
  }
  return v;
}

}  // namespace schema

inline Json parse_json(const std::string &text, const std::string &what)
{
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::parse_error &e) {
    throw SchemaError(what + ": invalid JSON (" + e.what() + ")");
  }
}

inline std::string read_file(const std::filesystem::path &path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot read " + path.string());
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Writes via a temporary sibling and renames, so readers never observe a
/// partial file.
inline void write_file(const std::filesystem::path &path, const std::string &bytes)
{
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path());
  }
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) {
      throw IoError("cannot write " + path.string());
    }
    out << bytes;
    if (!out) {
      throw IoError("write failed for " + path.string());
    }
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace drivestyle
