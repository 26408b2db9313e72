#pragma once

#include <cstdint>
#include <cstring>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "clothbench/cloth.hpp"
#include "clothbench/constraints.hpp"
#include "clothbench/geom.hpp"
#include "clothbench/mask.hpp"

namespace clothbench {

inline uint64_t fnv1a(const void* data, size_t len, uint64_t h = 0xcbf29ce484222325ULL) {
  const unsigned char* p = static_cast<const unsigned char*>(data);
  for (size_t i = 0; i < len; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline uint64_t hash_positions(const ClothState& s) {
  return s.positions.empty()
             ? fnv1a(nullptr, 0)
             : fnv1a(s.positions.data(), s.positions.size() * sizeof(Vec3));
}

struct FingerFrame {
  FrictionMode mode = FrictionMode::LowFriction;
  double grip_force = 0.0;
  int grasped_count = 0;
  double constraint_force = 0.0;
};

struct FrameRecord {
  double t = 0.0;
  Pose tool_pose;
  double width = 0.0;
  FingerFrame fingers[2];
  uint64_t cloth_hash = 0;   // snapshot reference
  int snapshot_index = -1;   // into EpisodeReport::snapshots when retained
};

struct EventRecord {
  double t = 0.0;
  std::string type;    // grasp | mode | slip | slide | release | clamp | hold_end
  std::string finger;  // "left", "right" or ""
  std::string detail;
};

struct EpisodeReport {
  std::string task;
  bool failed = false;
  std::string failure_reason;

  std::vector<FrameRecord> frames;
  std::vector<EventRecord> events;

  BinaryMask pre_mask, post_mask;
  Line2 fold_line;  // meaningful for fold episodes
  ClothState final_cloth;
  std::vector<ClothState> snapshots;  // per recorded frame when retained

  std::map<std::string, double> metrics;  // attached after evaluation
  std::string lift_class;                 // attached after evaluation

  bool has_event(const std::string& type, const std::string& finger) const {
    for (const auto& e : events)
      if (e.type == type && (finger.empty() || e.finger == finger)) return true;
    return false;
  }
};

// Canonical text form: everything except raw snapshots (frames carry the
// snapshot hash). Identical runs serialize to identical bytes.
inline std::string to_text(const EpisodeReport& r) {
  std::ostringstream os;
  os << "# clothbench-episode v1\n";
  os << "task " << r.task << '\n';
  os << "status " << (r.failed ? ("failed " + r.failure_reason) : "ok") << '\n';
  for (const auto& e : r.events) {
    os << "event " << fmt_double(e.t) << ' ' << e.type;
    if (!e.finger.empty()) os << ' ' << e.finger;
    if (!e.detail.empty()) os << ' ' << e.detail;
    os << '\n';
  }
  char hashbuf[17];
  for (const auto& f : r.frames) {
    std::snprintf(hashbuf, sizeof(hashbuf), "%016llx",
                  static_cast<unsigned long long>(f.cloth_hash));
    os << "frame " << fmt_double(f.t) << " pos " << fmt_double(f.tool_pose.pos.x) << ' '
       << fmt_double(f.tool_pose.pos.y) << ' ' << fmt_double(f.tool_pose.pos.z)
       << " yaw " << fmt_double(f.tool_pose.yaw) << " width " << fmt_double(f.width);
    for (int k = 0; k < 2; ++k) {
      const auto& fg = f.fingers[k];
      os << (k == 0 ? " L " : " R ") << to_string(fg.mode) << ' '
         << fmt_double(fg.grip_force) << ' ' << fg.grasped_count << ' '
         << fmt_double(fg.constraint_force);
    }
    os << " cloth " << hashbuf << '\n';
  }
  for (const auto& [k, v] : r.metrics) os << "metric " << k << ' ' << fmt_double(v) << '\n';
  if (!r.lift_class.empty()) os << "metric lift_class " << r.lift_class << '\n';
  return os.str();
}

}  // namespace clothbench
