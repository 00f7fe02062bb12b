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

#include <string>
#include <vector>

#include "drivestyle/json_util.hpp"
#include "drivestyle/scenario.hpp"

namespace drivestyle
{

inline Json trajectory_to_json(const Trajectory &traj)
{
  Json states = Json::array();
  for (const auto &s : traj.states) {
    states.push_back(Json::array({s.t, s.x, s.y, s.v, s.a, s.theta}));
  }
  return Json{{"dt", traj.dt}, {"states", std::move(states)}};
}

inline Trajectory trajectory_from_json(const Json &doc, const std::string &path)
{
  Trajectory traj;
  traj.dt = schema::number(doc, "dt", path);
  const Json &states = schema::array(doc, "states", path);
  for (std::size_t i = 0; i < states.size(); ++i) {
    const std::string p = schema::join(path, "states") + "[" + std::to_string(i) + "]";
    if (!states[i].is_array() || states[i].size() != 6) {
      throw SchemaError(p + ": expected [t, x, y, v, a, theta]");
    }
    traj.states.push_back({schema::number_at(states[i], 0, p), schema::number_at(states[i], 1, p),
                           schema::number_at(states[i], 2, p), schema::number_at(states[i], 3, p),
                           schema::number_at(states[i], 4, p), schema::number_at(states[i], 5, p)});
  }
  return traj;
}

inline Json state_to_json(const TrajState &s)
{
  return Json{{"t", s.t}, {"x", s.x}, {"y", s.y}, {"v", s.v}, {"a", s.a}, {"theta", s.theta}};
}

inline TrajState state_from_json(const Json &doc, const std::string &path)
{
  TrajState s;
  s.t = schema::number(doc, "t", path);
  s.x = schema::number(doc, "x", path);
  s.y = schema::number(doc, "y", path);
  s.v = schema::number(doc, "v", path);
  s.a = schema::number(doc, "a", path);
  s.theta = schema::number(doc, "theta", path);
  return s;
}

inline Json scenario_to_json(const Scenario &sc)
{
  Json points = Json::array();
  for (const auto &p : sc.reference.raw_points()) {
    points.push_back(Json::array({p.x(), p.y()}));
  }
  Json obstacles = Json::array();
  for (const auto &ob : sc.obstacles) {
    Json states = Json::array();
    for (const auto &s : ob.states) {
      states.push_back(Json::array({s.t, s.x, s.y, s.theta, s.v}));
    }
    obstacles.push_back(Json{{"id", ob.id},
                             {"length", ob.length},
                             {"width", ob.width},
                             {"states", std::move(states)}});
  }
  Json doc{{"id", sc.id},
           {"reference", Json{{"points", std::move(points)}}},
           {"obstacles", std::move(obstacles)},
           {"ego_init", state_to_json(sc.ego_init)},
           {"goal", Json{{"x", sc.goal.x}, {"y", sc.goal.y}, {"radius", sc.goal.radius}}},
           {"duration", sc.duration},
           {"dt_sim", sc.dt_sim}};
  if (sc.v_desired) {
    doc["v_desired"] = *sc.v_desired;
  }
  return doc;
}

/// Parses and validates a scenario document. Errors name the offending
/// field path.
inline Scenario scenario_from_json(const Json &doc)
{
  Scenario sc;
  sc.id = schema::string(doc, "id", "");
  const Json &ref = schema::field(doc, "reference", "");
  const Json &pts = schema::array(ref, "points", "reference");
  std::vector<Vec2> raw;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const std::string p = "reference.points[" + std::to_string(i) + "]";
    if (!pts[i].is_array() || pts[i].size() != 2) {
      throw SchemaError(p + ": expected [x, y]");
    }
    raw.emplace_back(schema::number_at(pts[i], 0, p), schema::number_at(pts[i], 1, p));
  }
  try {
    sc.reference = ReferencePath(std::move(raw));
  } catch (const InvariantError &e) {
    throw InvariantError(std::string("reference.points: ") + e.what());
  }

  const Json &obs = schema::array(doc, "obstacles", "");
  for (std::size_t i = 0; i < obs.size(); ++i) {
    const std::string p = "obstacles[" + std::to_string(i) + "]";
    Obstacle ob;
    const Json &id = schema::field(obs[i], "id", p);
    if (id.is_string()) {
      ob.id = id.get<std::string>();
    } else if (id.is_number_integer()) {
      ob.id = std::to_string(id.get<long long>());
    } else {
      throw SchemaError(p + ".id: expected a string or integer");
    }
    ob.length = schema::number(obs[i], "length", p);
    ob.width = schema::number(obs[i], "width", p);
    const Json &states = schema::array(obs[i], "states", p);
    for (std::size_t k = 0; k < states.size(); ++k) {
      const std::string sp = p + ".states[" + std::to_string(k) + "]";
      if (!states[k].is_array() || states[k].size() != 5) {
        throw SchemaError(sp + ": expected [t, x, y, theta, v]");
      }
      ob.states.push_back({schema::number_at(states[k], 0, sp), schema::number_at(states[k], 1, sp),
                           schema::number_at(states[k], 2, sp), schema::number_at(states[k], 3, sp),
                           schema::number_at(states[k], 4, sp)});
    }
    sc.obstacles.push_back(std::move(ob));
  }
  sc.ego_init = state_from_json(schema::field(doc, "ego_init", ""), "ego_init");
  const Json &goal = schema::field(doc, "goal", "");
  sc.goal.x = schema::number(goal, "x", "goal");
  sc.goal.y = schema::number(goal, "y", "goal");
  sc.goal.radius = schema::number(goal, "radius", "goal");
  sc.duration = schema::number(doc, "duration", "");
  sc.dt_sim = schema::number(doc, "dt_sim", "");
  if (doc.contains("v_desired")) {
    sc.v_desired = schema::number(doc, "v_desired", "");
  }
  sc.validate();
  return sc;
}

inline Scenario load_scenario(const std::string &document)
{
  return scenario_from_json(parse_json(document, "scenario"));
}

inline std::string serialize_scenario(const Scenario &sc) { return scenario_to_json(sc).dump(1); }

}  // namespace drivestyle
