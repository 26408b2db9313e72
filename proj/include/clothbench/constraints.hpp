#pragma once

#include <string>
#include <vector>

#include "clothbench/geom.hpp"

namespace clothbench {

enum class FrictionMode { LowFriction, HighFriction };

inline const char* to_string(FrictionMode m) {
  return m == FrictionMode::HighFriction ? "HF" : "LF";
}

enum class Finger { Left = 0, Right = 1 };

inline const char* to_string(Finger f) { return f == Finger::Left ? "left" : "right"; }

// One grasped particle, expressed as a servo target for the integrator.
struct GraspConstraint {
  int particle = -1;
  Vec3 target;            // world position the jaw wants the particle at
  FrictionMode mode = FrictionMode::LowFriction;
  Vec3 slide_axis;        // world unit vector; roller lets cloth run along it
  double friction_force_cap = 0.0;  // N; finger-level cap, see GraspConstraintSet
  Finger finger = Finger::Left;
};

// Per finger the cap is enforced jointly over that finger's particles:
// the pad either holds its whole contact patch or lets it go. Entries all
// carry the finger cap (HF: f_hold_max, LF: mu_lf * grip_force).
// Anchors are unconditional pins (test rigs, the payload protocol's fixed
// edge); they are not force-capped and not logged.
struct GraspConstraintSet {
  std::vector<GraspConstraint> entries;
  std::vector<std::pair<int, Vec3>> anchors;

  bool empty() const { return entries.empty() && anchors.empty(); }
};

// What the integrator reports back about constraint handling in one step.
struct ConstraintStepLog {
  // Net constraint force magnitude per finger (N).
  double finger_force[2] = {0.0, 0.0};
  // True if the finger's high-friction hold broke this step (force > cap).
  bool hf_break[2] = {false, false};
  // True if the finger's low-friction contact slid along its axis.
  bool lf_slide[2] = {false, false};
  // Updated world positions of slid particles (particle index order matches
  // the input set); gripper code refreshes its stored jaw offsets from these.
  std::vector<std::pair<int, Vec3>> slid_positions;
};

}  // namespace clothbench
