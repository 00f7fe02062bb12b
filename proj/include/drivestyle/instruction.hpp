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

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "drivestyle/common.hpp"
#include "drivestyle/json_util.hpp"
#include "drivestyle/loss.hpp"
#include "drivestyle/scenario.hpp"
#include "drivestyle/style_cost.hpp"

namespace drivestyle
{

enum class Domain { bev, fpv };

inline std::string_view to_string(Domain d) { return d == Domain::bev ? "bev" : "fpv"; }

inline Domain domain_from_string(std::string_view s)
{
  if (s == "bev" || s == "BEV") {
    return Domain::bev;
  }
  if (s == "fpv" || s == "FPV") {
    return Domain::fpv;
  }
  throw ConfigError("unknown domain '" + std::string(s) + "'");
}

/// Response horizon: 3 s (standard) or 5 s (extended), both at 2 Hz.
enum class Horizon { standard = 3, extended = 5 };

inline double seconds(Horizon h) { return static_cast<double>(static_cast<int>(h)); }

inline Horizon horizon_from_seconds(double s)
{
  if (std::abs(s - 3.0) < 1e-9) {
    return Horizon::standard;
  }
  if (std::abs(s - 5.0) < 1e-9) {
    return Horizon::extended;
  }
  throw ConfigError("horizon must be 3 or 5 s, got " + fixed(s, 3));
}

inline constexpr double kResponseDt = 0.5;
inline constexpr double kBevRadius = 30.0;
inline constexpr std::size_t kMaxAgents = 10;
inline constexpr std::string_view kTemplateVersion = "prompt-v1";
inline constexpr std::string_view kResponseFrame = "ego-centric at the t=0 ego pose, x forward, y left";

struct Turn
{
  std::string from;
  std::string value;
  bool operator==(const Turn &) const = default;
};

struct VqaSample
{
  std::string id;
  std::string image;
  std::vector<Turn> conversations;
  Domain domain = Domain::bev;
  Style style = Style::Default;
  Horizon horizon = Horizon::standard;

  bool operator==(const VqaSample &) const = default;
};

/// Rigid transform into the frame of an anchor pose.
struct EgoFrame
{
  Vec2 origin = Vec2::Zero();
  double heading = 0.0;

  explicit EgoFrame(const TrajState &anchor) : origin(anchor.position()), heading(anchor.theta) {}

  Vec2 to_local(const Vec2 &p) const
  {
    const Vec2 r = p - origin;
    const double c = std::cos(heading), s = std::sin(heading);
    return {c * r.x() + s * r.y(), -s * r.x() + c * r.y()};
  }

  double angle(double theta) const { return normalize_angle(theta - heading); }
};

struct AgentState
{
  std::string id;
  double x = 0.0;
  double y = 0.0;
  double theta = 0.0;
  double v = 0.0;
  double length = 0.0;
  double width = 0.0;
  double distance = 0.0;
};

namespace detail
{

/// Numeric ids compare by value, others lexicographically after them.
inline bool id_less(const std::string &a, const std::string &b)
{
  auto numeric = [](const std::string &s) {
    return !s.empty() && s.size() < 19 &&
           std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
  };
  const bool na = numeric(a), nb = numeric(b);
  if (na && nb) {
    return std::stoll(a) < std::stoll(b);
  }
  if (na != nb) {
    return na;
  }
  return a < b;
}

}  // namespace detail

/// Agents whose centre lies within `radius` of the ego at the ego time,
/// nearest first (ties by id), at most `k`.
inline std::vector<AgentState> nearest_agents(const Scenario &scenario, const TrajState &ego,
                                              std::size_t k = kMaxAgents,
                                              double radius = kBevRadius)
{
  std::vector<AgentState> out;
  for (const auto &ob : scenario.obstacles) {
    const ObstacleState st = ob.state_at(ego.t);
    const double dist = std::hypot(st.x - ego.x, st.y - ego.y);
    if (dist > radius) {
      continue;
    }
    out.push_back({ob.id, st.x, st.y, st.theta, st.v, ob.length, ob.width, dist});
  }
  std::sort(out.begin(), out.end(), [](const AgentState &a, const AgentState &b) {
    if (a.distance != b.distance) {
      return a.distance < b.distance;
    }
    return detail::id_less(a.id, b.id);
  });
  if (out.size() > k) {
    out.resize(k);
  }
  return out;
}

namespace detail
{

inline std::string svg_num(double v) { return fixed(v, 2); }

inline std::string svg_points(const std::vector<Vec2> &pts)
{
  std::string out;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    out += (i ? " " : "") + svg_num(pts[i].x()) + "," + svg_num(pts[i].y());
  }
  return out;
}

}  // namespace detail

inline constexpr double kRoadHalfWidth = 1.75;

/// Ego-centred bird's-eye view as an SVG document. The ego points up; the
/// view is clipped to a disc of `radius` metres and obstacles whose centre
/// lies outside it are not drawn.
inline std::string render_bev(const Scenario &scenario, const TrajState &ego,
                              double radius = kBevRadius)
{
  constexpr double size = 512.0;
  const double scale = 0.5 * size / radius;
  const EgoFrame frame(ego);
  // Ego frame (x forward, y left) to image (right, down): forward is up.
  auto px = [&](const Vec2 &world) {
    const Vec2 l = frame.to_local(world);
    return Vec2(0.5 * size - l.y() * scale, 0.5 * size - l.x() * scale);
  };

  std::string svg;
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"512\" height=\"512\" "
         "viewBox=\"0 0 512 512\">\n";
  svg += "<defs><clipPath id=\"view\"><circle cx=\"256\" cy=\"256\" r=\"256\"/></clipPath></defs>\n";
  svg += "<rect width=\"512\" height=\"512\" fill=\"#202020\"/>\n";
  svg += "<g clip-path=\"url(#view)\">\n";
  svg += "<circle cx=\"256\" cy=\"256\" r=\"256\" fill=\"#3a3a3a\"/>\n";

  // Road strokes: the part of the path near the view.
  const auto &ref = scenario.reference;
  std::vector<std::vector<Vec2>> lines(3);
  const std::array<double, 3> offsets = {-kRoadHalfWidth, 0.0, kRoadHalfWidth};
  const auto &pts = ref.points();
  const auto &hd = ref.headings();
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if ((pts[i] - ego.position()).norm() > radius + 10.0) {
      continue;
    }
    const Vec2 n(-std::sin(hd[i]), std::cos(hd[i]));
    for (std::size_t k = 0; k < 3; ++k) {
      lines[k].push_back(px(pts[i] + offsets[k] * n));
    }
  }
  if (!lines[1].empty()) {
    svg += "<polyline class=\"boundary\" fill=\"none\" stroke=\"#e0e0e0\" stroke-width=\"2\" points=\"" +
           detail::svg_points(lines[0]) + "\"/>\n";
    svg += "<polyline class=\"boundary\" fill=\"none\" stroke=\"#e0e0e0\" stroke-width=\"2\" points=\"" +
           detail::svg_points(lines[2]) + "\"/>\n";
    svg += "<polyline class=\"reference\" fill=\"none\" stroke=\"#6fa8dc\" stroke-width=\"1\" "
           "stroke-dasharray=\"6 4\" points=\"" + detail::svg_points(lines[1]) + "\"/>\n";
  }

  const Vec2 goal = px(Vec2(scenario.goal.x, scenario.goal.y));
  if ((Vec2(scenario.goal.x, scenario.goal.y) - ego.position()).norm() <=
      radius + scenario.goal.radius) {
    svg += "<circle class=\"goal\" cx=\"" + detail::svg_num(goal.x()) + "\" cy=\"" +
           detail::svg_num(goal.y()) + "\" r=\"" + detail::svg_num(scenario.goal.radius * scale) +
           "\" fill=\"#38761d\" fill-opacity=\"0.5\"/>\n";
  }

  for (const auto &agent : nearest_agents(scenario, ego, scenario.obstacles.size(), radius)) {
    const OrientedBox box{Vec2(agent.x, agent.y), agent.theta, agent.length, agent.width};
    std::vector<Vec2> corners;
    for (const auto &c : box.corners()) {
      corners.push_back(px(c));
    }
    const bool moving = agent.v > 0.1;
    svg += std::string("<polygon class=\"") + (moving ? "dynamic" : "static") + "\" fill=\"" +
           (moving ? "#e06666" : "#999999") + "\" points=\"" + detail::svg_points(corners) +
           "\"/>\n";
  }

  // Ego: a triangle pointing up at the centre.
  const double hl = 0.5 * kEgoLength * scale, hw = 0.5 * kEgoWidth * scale;
  svg += "<polygon class=\"ego\" fill=\"#3c78d8\" points=\"" +
         detail::svg_points({Vec2(256.0, 256.0 - hl), Vec2(256.0 + hw, 256.0 + hl),
                             Vec2(256.0 - hw, 256.0 + hl)}) +
         "\"/>\n";
  svg += "</g>\n</svg>\n";
  return svg;
}

namespace detail
{

inline std::string state_line(const EgoFrame &frame, const TrajState &s, double t_ref)
{
  const Vec2 p = frame.to_local(s.position());
  return "  t=" + fixed(s.t - t_ref, 2) + " s: x=" + fixed(p.x(), 2) + " m, y=" + fixed(p.y(), 2) +
         " m, v=" + fixed(s.v, 2) + " m/s, a=" + fixed(s.a, 2) + " m/s^2, theta=" +
         fixed(frame.angle(s.theta), 2) + " rad\n";
}

inline std::string style_command(Style style, Horizon horizon)
{
  return "Plan a trajectory with " + std::string(to_string(style)) +
         " driving style for the next " + fixed(seconds(horizon), 0) +
         " s. Answer with a JSON object holding horizon_s, dt_s and states sampled every " +
         fixed(kResponseDt, 1) + " s, each with t, x, y, v, a and theta in the ego frame.\n";
}

}  // namespace detail

/// Ground-truth response: the trajectory at 2 Hz over the horizon, in the
/// frame of its first state.
inline std::string format_response(const Trajectory &traj, Horizon horizon)
{
  const double h = seconds(horizon);
  const auto stride = static_cast<std::size_t>(std::llround(kResponseDt / traj.dt));
  const auto count = static_cast<std::size_t>(std::llround(h / kResponseDt)) + 1;
  if (stride == 0 || std::abs(static_cast<double>(stride) * traj.dt - kResponseDt) > 1e-9) {
    throw DomainError("trajectory step does not divide the 0.5 s response step");
  }
  if (traj.states.empty() || (count - 1) * stride >= traj.states.size()) {
    throw DomainError("ground truth shorter than the " + fixed(h, 0) + " s horizon");
  }
  const EgoFrame frame(traj.states.front());
  std::string out = "{\"horizon_s\": " + fixed(h, 1) + ", \"dt_s\": " + fixed(kResponseDt, 1) +
                    ", \"states\": [";
  for (std::size_t i = 0; i < count; ++i) {
    const TrajState &s = traj.states[i * stride];
    const Vec2 p = frame.to_local(s.position());
    out += (i ? ", " : "");
    out += "{\"t\": " + fixed(static_cast<double>(i) * kResponseDt, 4) + ", \"x\": " + fixed(p.x(), 4) +
           ", \"y\": " + fixed(p.y(), 4) + ", \"v\": " + fixed(s.v, 4) + ", \"a\": " + fixed(s.a, 4) +
           ", \"theta\": " + fixed(frame.angle(s.theta), 4) + "}";
  }
  out += "]}";
  return out;
}

/// Parses a response into a sequence; positions-only responses yield a
/// non-kinematic sequence.
inline PredictedSequence parse_response(const Json &doc)
{
  using namespace schema;
  const std::string path = "response";
  PredictedSequence seq;
  seq.dt = doc.contains("dt_s") ? number(doc, "dt_s", path) : kResponseDt;
  const Json &states = array(doc, "states", path);
  seq.states.resize(static_cast<Eigen::Index>(states.size()), kChannels);
  seq.states.setZero();
  bool kinematic = true;
  for (std::size_t i = 0; i < states.size(); ++i) {
    const std::string p = path + ".states[" + std::to_string(i) + "]";
    const Json &s = states[i];
    if (!s.is_object()) {
      throw SchemaError(p + ": expected an object");
    }
    const auto row = static_cast<Eigen::Index>(i);
    seq.states(row, kX) = number(s, "x", p);
    seq.states(row, kY) = number(s, "y", p);
    if (s.contains("v") && s.contains("a") && s.contains("theta")) {
      seq.states(row, kV) = number(s, "v", p);
      seq.states(row, kA) = number(s, "a", p);
      seq.states(row, kTheta) = number(s, "theta", p);
    } else {
      kinematic = false;
    }
  }
  seq.kinematic = kinematic;
  seq.validate();
  return seq;
}

inline PredictedSequence parse_response(const std::string &text)
{
  return parse_response(parse_json(text, "response"));
}

inline std::string sample_id(const PlanningInstance &inst, Domain domain, Horizon horizon)
{
  char step[16];
  std::snprintf(step, sizeof step, "%03zu", inst.step);
  return inst.scenario_id + "__" + std::string(to_string(inst.style)) + "__t" + step + "__" +
         std::string(to_string(domain)) + "__" + std::to_string(static_cast<int>(horizon)) + "s";
}

/// Image shared by the BEV samples of one planning instance (all horizons).
inline std::string bev_image_ref(const PlanningInstance &inst)
{
  char step[16];
  std::snprintf(step, sizeof step, "%03zu", inst.step);
  return "images/bev/" + inst.scenario_id + "__" + std::string(to_string(inst.style)) + "__t" +
         step + ".svg";
}

namespace detail
{

inline std::string history_section(const std::string &title, const PlanningInstance &inst,
                                   const EgoFrame &frame)
{
  std::string out = title + " (6 states at 10 Hz, ego frame: x forward, y left):\n";
  for (const auto &s : inst.history) {
    out += state_line(frame, s, inst.ego.t);
  }
  return out;
}

inline void check_instance(const PlanningInstance &inst)
{
  if (inst.history.size() != 6) {
    throw InvariantError("ego history must hold exactly 6 states");
  }
  for (std::size_t i = 1; i < inst.history.size(); ++i) {
    if (std::abs(inst.history[i].t - inst.history[i - 1].t - 0.1) > 1e-9) {
      throw InvariantError("ego history must be spaced 0.1 s apart");
    }
  }
}

}  // namespace detail

inline VqaSample build_bev_sample(const PlanningInstance &inst, const Scenario &scenario,
                                  Horizon horizon)
{
  detail::check_instance(inst);
  const EgoFrame frame(inst.ego);
  VqaSample s;
  s.domain = Domain::bev;
  s.style = inst.style;
  s.horizon = horizon;
  s.id = sample_id(inst, Domain::bev, horizon);
  s.image = bev_image_ref(inst);

  std::string human = "<image>\nYou are the motion planner of the ego vehicle shown in the "
                      "bird's-eye view.\n";
  human += detail::history_section("Ego Vehicle History", inst, frame);
  const auto agents = nearest_agents(scenario, inst.ego);
  human += "Traffic Agents States (nearest " + std::to_string(kMaxAgents) + " within " +
           fixed(kBevRadius, 0) + " m, ego frame):\n";
  if (agents.empty()) {
    human += "  none\n";
  }
  for (const auto &a : agents) {
    const Vec2 p = frame.to_local(Vec2(a.x, a.y));
    human += "  agent " + a.id + ": x=" + fixed(p.x(), 2) + " m, y=" + fixed(p.y(), 2) +
             " m, v=" + fixed(a.v, 2) + " m/s, theta=" + fixed(frame.angle(a.theta), 2) +
             " rad, size=" + fixed(a.length, 2) + "x" + fixed(a.width, 2) + " m\n";
  }
  const Vec2 goal = frame.to_local(Vec2(scenario.goal.x, scenario.goal.y));
  human += "Goal Region: x=" + fixed(goal.x(), 2) + " m, y=" + fixed(goal.y(), 2) +
           " m, radius=" + fixed(scenario.goal.radius, 2) + " m\n";
  human += "Style Command: " + detail::style_command(inst.style, horizon);

  s.conversations = {{"human", human}, {"gpt", format_response(inst.trajectory, horizon)}};
  return s;
}

inline VqaSample build_fpv_sample(const PlanningInstance &inst, const Scenario &scenario,
                                  const std::string &image_ref, Horizon horizon)
{
  if (image_ref.empty()) {
    throw ConfigError("FPV sample " + sample_id(inst, Domain::fpv, horizon) +
                      " needs an image reference");
  }
  detail::check_instance(inst);
  const EgoFrame frame(inst.ego);
  VqaSample s;
  s.domain = Domain::fpv;
  s.style = inst.style;
  s.horizon = horizon;
  s.id = sample_id(inst, Domain::fpv, horizon);
  s.image = image_ref;

  std::string human = "<image>\nYou are the motion planner of the ego vehicle whose front "
                      "camera view is shown.\n";
  human += detail::history_section("Ego-Vehicle History", inst, frame);
  const Vec2 goal = frame.to_local(Vec2(scenario.goal.x, scenario.goal.y));
  human += "Goal Point: x=" + fixed(goal.x(), 2) + " m, y=" + fixed(goal.y(), 2) + " m\n";
  human += "Style Command: " + detail::style_command(inst.style, horizon);

  s.conversations = {{"human", human}, {"gpt", format_response(inst.trajectory, horizon)}};
  return s;
}

inline Json sample_to_json(const VqaSample &s)
{
  Json j = Json::object();
  j["id"] = s.id;
  j["image"] = s.image;
  Json conv = Json::array();
  for (const auto &t : s.conversations) {
    Json turn = Json::object();
    turn["from"] = t.from;
    turn["value"] = t.value;
    conv.push_back(std::move(turn));
  }
  j["conversations"] = std::move(conv);
  return j;
}

struct SampleKey
{
  std::string scenario_id;
  Style style = Style::Default;
  std::size_t step = 0;
  Domain domain = Domain::bev;
  Horizon horizon = Horizon::standard;
};

/// Inverse of sample_id.
inline SampleKey parse_sample_id(const std::string &id)
{
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = id.find("__", start);
    parts.push_back(id.substr(start, pos == std::string::npos ? std::string::npos : pos - start));
    if (pos == std::string::npos) {
      break;
    }
    start = pos + 2;
  }
  if (parts.size() != 5 || parts[2].size() < 2 || parts[2][0] != 't' || parts[4].size() != 2) {
    throw SchemaError("id '" + id + "': expected scenario__style__tNNN__domain__Hs");
  }
  SampleKey k;
  k.scenario_id = parts[0];
  try {
    k.style = style_from_string(parts[1]);
    k.domain = domain_from_string(parts[3]);
    k.horizon = horizon_from_seconds(std::stod(parts[4].substr(0, 1)));
    k.step = static_cast<std::size_t>(std::stoul(parts[2].substr(1)));
  } catch (const std::exception &e) {
    throw SchemaError("id '" + id + "': " + e.what());
  }
  return k;
}

inline VqaSample sample_from_json(const Json &j, const std::string &path)
{
  using namespace schema;
  if (!j.is_object()) {
    throw SchemaError(path + ": expected an object");
  }
  VqaSample s;
  s.id = string(j, "id", path);
  s.image = string(j, "image", path);
  const Json &conv = array(j, "conversations", path);
  for (std::size_t i = 0; i < conv.size(); ++i) {
    const std::string p = path + ".conversations[" + std::to_string(i) + "]";
    s.conversations.push_back({string(conv[i], "from", p), string(conv[i], "value", p)});
  }
  if (s.conversations.size() != 2 || s.conversations[0].from != "human" ||
      s.conversations[1].from != "gpt") {
    throw SchemaError(path + ".conversations: expected one human turn then one gpt turn");
  }
  const SampleKey key = parse_sample_id(s.id);
  s.domain = key.domain;
  s.style = key.style;
  s.horizon = key.horizon;
  return s;
}

/// Dataset text: a JSON array with one record per line, or JSON lines.
inline std::string serialize_dataset(const std::vector<VqaSample> &samples, bool json_lines = false)
{
  std::string out = json_lines ? "" : "[";
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const std::string rec = sample_to_json(samples[i]).dump();
    if (json_lines) {
      out += rec + "\n";
    } else {
      out += (i ? ",\n" : "\n") + rec;
    }
  }
  if (!json_lines) {
    out += samples.empty() ? "]\n" : "\n]\n";
  }
  return out;
}

inline std::vector<VqaSample> parse_dataset(const std::string &text)
{
  std::vector<VqaSample> out;
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) {
    return out;
  }
  if (text[first] == '[') {
    const Json doc = parse_json(text, "dataset");
    for (std::size_t i = 0; i < doc.size(); ++i) {
      out.push_back(sample_from_json(doc[i], "dataset[" + std::to_string(i) + "]"));
    }
    return out;
  }
  std::size_t line_no = 0, pos = 0;
  while (pos < text.size()) {
    const std::size_t end = std::min(text.find('\n', pos), text.size());
    const std::string line = text.substr(pos, end - pos);
    ++line_no;
    if (line.find_first_not_of(" \t\r") != std::string::npos) {
      out.push_back(sample_from_json(parse_json(line, "dataset line " + std::to_string(line_no)),
                                     "dataset line " + std::to_string(line_no)));
    }
    pos = end + 1;
  }
  return out;
}

inline Json dataset_manifest(const std::vector<VqaSample> &samples)
{
  Json per_style = Json::object();
  for (Style st : kAllStyles) {
    per_style[std::string(to_string(st))] = 0;
  }
  Json per_domain = Json::object({{"bev", 0}, {"fpv", 0}});
  Json per_horizon = Json::object({{"3s", 0}, {"5s", 0}});
  for (const auto &s : samples) {
    per_style[std::string(to_string(s.style))] = per_style[std::string(to_string(s.style))].get<int>() + 1;
    per_domain[std::string(to_string(s.domain))] =
      per_domain[std::string(to_string(s.domain))].get<int>() + 1;
    const std::string h = std::to_string(static_cast<int>(s.horizon)) + "s";
    per_horizon[h] = per_horizon[h].get<int>() + 1;
  }
  Json m = Json::object();
  m["count"] = samples.size();
  m["per_style"] = per_style;
  m["per_domain"] = per_domain;
  m["per_horizon"] = per_horizon;
  m["response_frame"] = kResponseFrame;
  m["template_version"] = kTemplateVersion;
  return m;
}

}  // namespace drivestyle
