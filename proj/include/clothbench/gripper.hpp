#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <utility>
#include <vector>

#include "clothbench/cloth.hpp"
#include "clothbench/constraints.hpp"
#include "clothbench/error.hpp"
#include "clothbench/geom.hpp"

namespace clothbench {

struct GripperParams {
  double width_min = 0.0;
  double width_max = 0.5;        // m, full span cap
  double width_speed = 0.2;      // m/s, rate limit while executing
  double f_switch = 5.0;         // N, high-friction threshold
  double k_transmission = 50.0;  // N of grip force per N*m of motor torque
  double mu_lf = 0.1;            // roller friction coefficient
  double f_hold_max = 40.0;      // N, high-friction break force per finger
  double capture_box_x = 0.045;  // m, jaw footprint along slide axis
  double capture_box_y = 0.045;  // m, jaw footprint across slide axis
  double capture_height = 0.01;  // m, capture window depth below the jaw face
  double capture_above = 0.0;    // m, capture window reach above the jaw face
  int min_grasp_particles = 2;
  double layer_epsilon = 0.0005;   // m, z slack when picking the bottom layer
  double capture_cell = 0.005;     // m, x-y cell used for layer disambiguation
  double jaw_half_length = 0.0225; // m, cloth slides out of the roller past this
  double pinch_half_gap = 0.002;   // m, captured particles ride at most this far
                                   // above/below the jaw face
};

struct Grasp {
  int particle = -1;
  Vec3 offset;  // jaw-frame position at capture (or after roller slide)
};

struct FingerState {
  double torque_cmd = 0.0;  // N*m
  double grip_force = 0.0;  // N
  FrictionMode mode = FrictionMode::LowFriction;
  std::vector<Grasp> grasped;
};

struct GripperState {
  Pose tool_pose;
  double width = 0.0;
  FingerState fingers[2];
  GripperParams params;

  const FingerState& finger(Finger f) const { return fingers[static_cast<int>(f)]; }
  FingerState& finger(Finger f) { return fingers[static_cast<int>(f)]; }

  // Jaws sit symmetrically about the tool axis along the tool's y-axis;
  // the slide axis of both rollers is the tool's x-axis.
  Pose jaw_pose(Finger f) const {
    double sign = (f == Finger::Left) ? 1.0 : -1.0;
    Pose jaw = tool_pose;
    jaw.pos = tool_pose.to_world({0.0, sign * width * 0.5, 0.0});
    return jaw;
  }

  Vec3 slide_axis_world() const { return tool_pose.rotation()[0]; }
};

inline GripperState set_width(const GripperState& g, double w) {
  GripperState out = g;
  out.width = clamp(w, g.params.width_min, g.params.width_max);
  return out;
}

inline GripperState command_torque(const GripperState& g, Finger f, double torque) {
  if (torque < 0.0) throw ValidationError("command_torque: torque must be >= 0");
  GripperState out = g;
  FingerState& fs = out.finger(f);
  fs.torque_cmd = torque;
  fs.grip_force = g.params.k_transmission * torque;
  fs.mode = fs.grip_force >= g.params.f_switch ? FrictionMode::HighFriction
                                               : FrictionMode::LowFriction;
  if (fs.grip_force == 0.0) fs.grasped.clear();
  return out;
}

inline GripperState release(const GripperState& g, Finger f) {
  GripperState out = g;
  FingerState& fs = out.finger(f);
  fs.torque_cmd = 0.0;
  fs.grip_force = 0.0;
  fs.mode = FrictionMode::LowFriction;
  fs.grasped.clear();
  return out;
}

namespace detail {

// Candidates inside the jaw capture box, thinned to the bottom layer of any
// vertically stacked group: a particle survives only if no other candidate
// in its x-y cell sits more than layer_epsilon below it.
inline std::vector<int> capture_candidates(const GripperState& g, Finger f,
                                           const ClothState& cloth,
                                           const std::vector<char>& excluded) {
  const GripperParams& p = g.params;
  Pose jaw = g.jaw_pose(f);
  struct Cand {
    int particle;
    long cx, cy;
    double z;
  };
  std::vector<Cand> cands;
  for (int i = 0; i < cloth.particle_count(); ++i) {
    if (excluded[i]) continue;
    Vec3 local = jaw.to_local(cloth.positions[i]);
    if (std::abs(local.x) > p.capture_box_x * 0.5) continue;
    if (std::abs(local.y) > p.capture_box_y * 0.5) continue;
    if (local.z > p.capture_above || local.z < -p.capture_height) continue;
    cands.push_back({i, static_cast<long>(std::floor(local.x / p.capture_cell)),
                     static_cast<long>(std::floor(local.y / p.capture_cell)),
                     cloth.positions[i].z});
  }
  std::map<std::pair<long, long>, double> cell_min;
  for (const auto& c : cands) {
    auto key = std::make_pair(c.cx, c.cy);
    auto it = cell_min.find(key);
    if (it == cell_min.end() || c.z < it->second) cell_min[key] = c.z;
  }
  std::vector<int> out;
  for (const auto& c : cands)
    if (c.z <= cell_min[{c.cx, c.cy}] + p.layer_epsilon) out.push_back(c.particle);
  std::sort(out.begin(), out.end());
  return out;
}

inline std::vector<char> grasped_elsewhere(const GripperState& g, Finger f,
                                           int particle_count) {
  std::vector<char> excluded(particle_count, 0);
  Finger other = (f == Finger::Left) ? Finger::Right : Finger::Left;
  for (const auto& gr : g.finger(other).grasped)
    if (gr.particle >= 0 && gr.particle < particle_count) excluded[gr.particle] = 1;
  return excluded;
}

}  // namespace detail

struct SlidingGraspResult {
  GripperState gripper;
  bool grasp_ok = false;
};

// Slide-under capture: the thin plate goes beneath the fabric, so only the
// bottom layer of any stack ends up between the pads.
inline SlidingGraspResult attempt_sliding_grasp(const GripperState& g, Finger f,
                                                const ClothState& cloth) {
  SlidingGraspResult r{g, false};
  auto excluded = detail::grasped_elsewhere(g, f, cloth.particle_count());
  auto captured = detail::capture_candidates(g, f, cloth, excluded);
  Pose jaw = g.jaw_pose(f);
  FingerState& fs = r.gripper.finger(f);
  fs.grasped.clear();
  double gap = g.params.pinch_half_gap;
  for (int p : captured) {
    Vec3 off = jaw.to_local(cloth.positions[p]);
    off.z = clamp(off.z, -gap, gap);
    fs.grasped.push_back({p, off});
  }
  r.grasp_ok = static_cast<int>(captured.size()) >= g.params.min_grasp_particles;
  return r;
}

// Roller feed during a slide stage: particles entering the capture box are
// taken up, particles that ran past the jaw are let go.
inline GripperState refresh_roller_contact(const GripperState& g, Finger f,
                                           const ClothState& cloth) {
  GripperState out = g;
  FingerState& fs = out.finger(f);
  Pose jaw = g.jaw_pose(f);

  std::vector<Grasp> kept;
  std::vector<char> held(cloth.particle_count(), 0);
  for (const auto& gr : fs.grasped) {
    if (std::abs(gr.offset.x) <= g.params.jaw_half_length) {
      kept.push_back(gr);
      held[gr.particle] = 1;
    }
  }
  auto excluded = detail::grasped_elsewhere(out, f, cloth.particle_count());
  for (int i = 0; i < cloth.particle_count(); ++i)
    if (held[i]) excluded[i] = 1;
  double gap = g.params.pinch_half_gap;
  for (int p : detail::capture_candidates(out, f, cloth, excluded)) {
    Vec3 off = jaw.to_local(cloth.positions[p]);
    off.z = clamp(off.z, -gap, gap);
    kept.push_back({p, off});
  }
  fs.grasped = std::move(kept);
  return out;
}

inline GraspConstraintSet emit_constraints(const GripperState& g, const ClothState&) {
  GraspConstraintSet set;
  for (int fi = 0; fi < 2; ++fi) {
    Finger f = static_cast<Finger>(fi);
    const FingerState& fs = g.finger(f);
    if (fs.grip_force <= 0.0 || fs.grasped.empty()) continue;
    Pose jaw = g.jaw_pose(f);
    double cap = fs.mode == FrictionMode::HighFriction
                     ? g.params.f_hold_max
                     : g.params.mu_lf * fs.grip_force;
    for (const auto& gr : fs.grasped) {
      GraspConstraint c;
      c.particle = gr.particle;
      c.target = jaw.to_world(gr.offset);
      c.mode = fs.mode;
      c.slide_axis = g.slide_axis_world();
      c.friction_force_cap = cap;
      c.finger = f;
      set.entries.push_back(c);
    }
  }
  return set;
}

// Fold the integrator's constraint report back into gripper state: a broken
// high-friction hold empties the finger; roller slides refresh offsets.
inline GripperState apply_step_log(const GripperState& g, const ConstraintStepLog& log,
                                   const ClothState& cloth_after) {
  GripperState out = g;
  for (int fi = 0; fi < 2; ++fi) {
    if (log.hf_break[fi]) out.fingers[fi].grasped.clear();
  }
  if (!log.slid_positions.empty()) {
    for (int fi = 0; fi < 2; ++fi) {
      if (!log.lf_slide[fi]) continue;
      Pose jaw = out.jaw_pose(static_cast<Finger>(fi));
      for (auto& gr : out.fingers[fi].grasped) {
        for (const auto& sp : log.slid_positions) {
          if (sp.first == gr.particle) {
            gr.offset = jaw.to_local(sp.second);
            break;
          }
        }
      }
      (void)cloth_after;
    }
  }
  return out;
}

}  // namespace clothbench
