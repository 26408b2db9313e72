#pragma once

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "clothbench/error.hpp"
#include "clothbench/geom.hpp"

namespace clothbench {

enum class ActionTag { Init, PreGrasp, Grasp, Move, FoldArc, Hold, Release, Slide };

inline const char* to_string(ActionTag t) {
  switch (t) {
    case ActionTag::Init: return "init";
    case ActionTag::PreGrasp: return "pre_grasp";
    case ActionTag::Grasp: return "grasp";
    case ActionTag::Move: return "move";
    case ActionTag::FoldArc: return "fold_arc";
    case ActionTag::Hold: return "hold";
    case ActionTag::Release: return "release";
    case ActionTag::Slide: return "slide";
  }
  return "?";
}

inline ActionTag tag_from_string(const std::string& s) {
  for (ActionTag t : {ActionTag::Init, ActionTag::PreGrasp, ActionTag::Grasp,
                      ActionTag::Move, ActionTag::FoldArc, ActionTag::Hold,
                      ActionTag::Release, ActionTag::Slide})
    if (s == to_string(t)) return t;
  throw ParseError("unknown action tag '" + s + "'");
}

struct Waypoint {
  double t = 0.0;
  Pose pose;
  double width_cmd = 0.0;
  double torque_cmd[2] = {0.0, 0.0};  // left, right
  ActionTag tag = ActionTag::Init;
};

// Interpolated command at one instant.
struct Setpoint {
  Pose pose;
  double width_cmd = 0.0;
  double torque_cmd[2] = {0.0, 0.0};
  ActionTag tag = ActionTag::Init;
  int segment = 0;  // index of the waypoint the motion is heading to
};

struct Trajectory {
  std::vector<Waypoint> waypoints;
  std::vector<std::string> warnings;

  double duration() const { return waypoints.empty() ? 0.0 : waypoints.back().t; }

  void validate() const {
    if (waypoints.empty()) throw ValidationError("trajectory: no waypoints");
    for (size_t k = 1; k < waypoints.size(); ++k)
      if (!(waypoints[k].t > waypoints[k - 1].t))
        throw ValidationError("trajectory: waypoint times must strictly increase");
  }

  // Linear interpolation between waypoints; the segment's action is the tag
  // of the waypoint being approached.
  Setpoint sample(double t) const {
    Setpoint sp;
    const auto& w = waypoints;
    if (t <= w.front().t) {
      sp.pose = w.front().pose;
      sp.width_cmd = w.front().width_cmd;
      sp.torque_cmd[0] = w.front().torque_cmd[0];
      sp.torque_cmd[1] = w.front().torque_cmd[1];
      sp.tag = w.front().tag;
      sp.segment = 0;
      return sp;
    }
    if (t >= w.back().t) {
      const auto& b = w.back();
      sp.pose = b.pose;
      sp.width_cmd = b.width_cmd;
      sp.torque_cmd[0] = b.torque_cmd[0];
      sp.torque_cmd[1] = b.torque_cmd[1];
      sp.tag = b.tag;
      sp.segment = static_cast<int>(w.size()) - 1;
      return sp;
    }
    size_t k = 1;
    while (w[k].t < t) ++k;
    const Waypoint& a = w[k - 1];
    const Waypoint& b = w[k];
    double u = (t - a.t) / (b.t - a.t);
    sp.pose.pos = lerp(a.pose.pos, b.pose.pos, u);
    sp.pose.roll = lerp(a.pose.roll, b.pose.roll, u);
    sp.pose.pitch = lerp(a.pose.pitch, b.pose.pitch, u);
    sp.pose.yaw = lerp(a.pose.yaw, b.pose.yaw, u);
    sp.width_cmd = lerp(a.width_cmd, b.width_cmd, u);
    sp.torque_cmd[0] = lerp(a.torque_cmd[0], b.torque_cmd[0], u);
    sp.torque_cmd[1] = lerp(a.torque_cmd[1], b.torque_cmd[1], u);
    sp.tag = b.tag;
    sp.segment = static_cast<int>(k);
    return sp;
  }
};

// One waypoint per line:
//   t x y z roll pitch yaw width torque_left torque_right tag
inline std::string to_text(const Trajectory& traj) {
  std::ostringstream os;
  os << "# clothbench-trajectory v1\n";
  os << "# t x y z roll pitch yaw width torque_left torque_right tag\n";
  for (const auto& w : traj.waypoints) {
    os << fmt_exact(w.t) << ' ' << fmt_exact(w.pose.pos.x) << ' ' << fmt_exact(w.pose.pos.y)
       << ' ' << fmt_exact(w.pose.pos.z) << ' ' << fmt_exact(w.pose.roll) << ' '
       << fmt_exact(w.pose.pitch) << ' ' << fmt_exact(w.pose.yaw) << ' '
       << fmt_exact(w.width_cmd) << ' ' << fmt_exact(w.torque_cmd[0]) << ' '
       << fmt_exact(w.torque_cmd[1]) << ' ' << to_string(w.tag) << '\n';
  }
  return os.str();
}

inline Trajectory trajectory_from_text(const std::string& text,
                                       const std::string& where = "<string>") {
  Trajectory traj;
  std::istringstream is(text);
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    Waypoint w;
    std::string tag;
    if (!(ls >> w.t)) continue;  // blank
    if (!(ls >> w.pose.pos.x >> w.pose.pos.y >> w.pose.pos.z >> w.pose.roll >>
          w.pose.pitch >> w.pose.yaw >> w.width_cmd >> w.torque_cmd[0] >>
          w.torque_cmd[1] >> tag))
      throw ParseError(where + ":" + std::to_string(lineno) + ": malformed waypoint");
    w.tag = tag_from_string(tag);
    traj.waypoints.push_back(w);
  }
  traj.validate();
  return traj;
}

inline void save_trajectory(const std::string& path, const Trajectory& traj) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot open for write: " + path);
  f << to_text(traj);
}

inline Trajectory load_trajectory(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ParseError("cannot open " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return trajectory_from_text(ss.str(), path);
}

}  // namespace clothbench
