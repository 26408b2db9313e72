#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "clothbench/cloth.hpp"
#include "clothbench/episode.hpp"
#include "clothbench/error.hpp"
#include "clothbench/geom.hpp"
#include "clothbench/gripper.hpp"
#include "clothbench/percept.hpp"
#include "clothbench/trajectory.hpp"

namespace clothbench {

struct PlannerParams {
  double tool_speed = 0.5;      // m/s linear cap
  double hover_height = 0.03;   // m above the grasp height
  double grasp_z = 0.006;       // m, jaw height during capture
  double descend_speed = 0.05;  // m/s
  double grasp_dwell = 0.2;     // s
  double torque_ramp = 0.1;     // s per torque change
  double arc_apex_factor = 0.6;
  int arc_samples = 24;
  double torque_slide = 0.04;   // N*m -> below the friction switch
  double torque_firm = 0.2;     // N*m -> above the friction switch
  double workspace_radius = 0.8;  // m from the arm base at the origin
  double lift_clearance = 0.02;   // m, drag lift-off
  double retract_height = 0.05;   // m after release
  double min_segment = 0.05;      // s
};

namespace detail {

// Yaw that points the tool's y-axis (finger span) along `lateral`.
inline double yaw_for_lateral(const Vec2& lateral) {
  return std::atan2(-lateral.x, lateral.y);
}

// Yaw that points the tool's x-axis (roller slide axis) along `dir`.
inline double yaw_for_slide(const Vec2& dir) { return std::atan2(dir.y, dir.x); }

inline double unwrap_near(double angle, double reference) {
  while (angle - reference > kPi) angle -= 2.0 * kPi;
  while (angle - reference < -kPi) angle += 2.0 * kPi;
  return angle;
}

class PlanBuilder {
public:
  PlanBuilder(const GripperParams& gp, const PlannerParams& pp) : gp_(gp), pp_(pp) {}

  void start(const Pose& pose) {
    Waypoint w;
    w.t = 0.0;
    w.pose = pose;
    w.width_cmd = gp_.width_min;
    w.tag = ActionTag::Init;
    traj_.waypoints.push_back(w);
  }

  void move_to(const Vec3& pos, ActionTag tag, double speed = 0.0) {
    Waypoint w = last();
    double dist = (pos - w.pose.pos).norm();
    double v = speed > 0.0 ? speed : pp_.tool_speed;
    w.t += std::max(dist / v, pp_.min_segment);
    w.pose.pos = pos;
    w.tag = tag;
    traj_.waypoints.push_back(w);
  }

  void move_pose(const Pose& pose, ActionTag tag, double min_duration = 0.0) {
    Waypoint w = last();
    double dist = (pose.pos - w.pose.pos).norm();
    w.t += std::max({dist / pp_.tool_speed, min_duration, pp_.min_segment});
    w.pose = pose;
    w.tag = tag;
    traj_.waypoints.push_back(w);
  }

  void open_width(double width, ActionTag tag) {
    Waypoint w = last();
    w.t += std::max(std::abs(width - w.width_cmd) / gp_.width_speed, pp_.min_segment);
    w.width_cmd = width;
    w.tag = tag;
    traj_.waypoints.push_back(w);
  }

  void set_torque(double left, double right, ActionTag tag) {
    Waypoint w = last();
    w.t += std::max(pp_.torque_ramp, pp_.min_segment);
    w.torque_cmd[0] = left;
    w.torque_cmd[1] = right;
    w.tag = tag;
    traj_.waypoints.push_back(w);
  }

  void dwell(double seconds, ActionTag tag) {
    Waypoint w = last();
    w.t += std::max(seconds, 1e-3);
    w.tag = tag;
    traj_.waypoints.push_back(w);
  }

  void warn(const std::string& msg) { traj_.warnings.push_back(msg); }

  const Waypoint& last() const { return traj_.waypoints.back(); }

  Trajectory finish() {
    traj_.validate();
    return std::move(traj_);
  }

private:
  GripperParams gp_;
  PlannerParams pp_;
  Trajectory traj_;
};

inline void check_workspace(const Vec2& p, double radius, const char* what) {
  if (p.norm() > radius)
    throw PlanningError(std::string(what) + " (" + fmt_double(p.x) + ", " +
                        fmt_double(p.y) + ") outside workspace radius " +
                        fmt_double(radius) + " m");
}

}  // namespace detail

// Staged fold: open to corner width, hover, descend, sliding grasp at low
// torque, firm up, carry both corners to their mirror images across the
// fold line on a vertical arc, then release and retract.
inline Trajectory plan_fold(const Vec2& p1, const Vec2& p2, const Line2& fold_line,
                            const GripperParams& gp = {}, const PlannerParams& pp = {}) {
  if ((p2 - p1).norm() < 1e-9) throw PlanningError("plan_fold: grasp corners coincide");
  double d1 = fold_line.signed_distance(p1);
  double d2 = fold_line.signed_distance(p2);
  if (std::abs(d1) < 1e-9 && std::abs(d2) < 1e-9)
    throw PlanningError("plan_fold: fold line passes through both grasp corners");

  Vec2 r1 = fold_line.reflect(p1);
  Vec2 r2 = fold_line.reflect(p2);
  Vec2 mid = (p1 + p2) * 0.5;
  Vec2 rmid = (r1 + r2) * 0.5;
  detail::check_workspace(mid, pp.workspace_radius, "plan_fold: grasp midpoint");
  detail::check_workspace(rmid, pp.workspace_radius, "plan_fold: mirror target");

  detail::PlanBuilder b(gp, pp);
  double span = (p1 - p2).norm();
  double width = clamp(span, gp.width_min, gp.width_max);
  if (span > gp.width_max)
    b.warn("grasp width " + fmt_double(span) + " m clamped to gripper span " +
           fmt_double(gp.width_max) + " m");

  double yaw0 = detail::yaw_for_lateral((p1 - p2).normalized());
  double yaw1 = detail::unwrap_near(detail::yaw_for_lateral((r1 - r2).normalized()), yaw0);

  Pose hover{{mid.x, mid.y, pp.grasp_z + pp.hover_height}, 0.0, 0.0, yaw0};
  b.start(hover);
  b.open_width(width, ActionTag::PreGrasp);
  b.move_to({mid.x, mid.y, pp.grasp_z}, ActionTag::PreGrasp, pp.descend_speed);
  b.set_torque(pp.torque_slide, pp.torque_slide, ActionTag::Grasp);
  b.dwell(pp.grasp_dwell, ActionTag::Grasp);
  b.set_torque(pp.torque_firm, pp.torque_firm, ActionTag::Grasp);

  double travel = (rmid - mid).norm();
  double apex = pp.arc_apex_factor * travel;
  int n = std::max(2, pp.arc_samples);
  for (int i = 1; i <= n; ++i) {
    double theta = kPi * i / n;
    double u = 0.5 * (1.0 - std::cos(theta));
    Vec2 xy = mid + (rmid - mid) * u;
    Pose p{{xy.x, xy.y, pp.grasp_z + apex * std::sin(theta)}, 0.0, 0.0,
           lerp(yaw0, yaw1, static_cast<double>(i) / n)};
    b.move_pose(p, ActionTag::FoldArc);
  }
  b.set_torque(0.0, 0.0, ActionTag::Release);
  b.move_to({rmid.x, rmid.y, pp.grasp_z + pp.retract_height}, ActionTag::Release);
  return b.finish();
}

// Drag with the opening width kept at the minimum: sliding grasp at the
// edge, firm up, lift clear, translate, set down, release.
inline Trajectory plan_drag(const Vec2& edge_midpoint, Vec2 direction, double distance,
                            const GripperParams& gp = {}, const PlannerParams& pp = {}) {
  if (distance < 0.0) throw ValidationError("plan_drag: distance must be >= 0");
  Vec2 dir = direction.normalized();
  if (dir.norm() < 0.5) throw ValidationError("plan_drag: direction must be nonzero");
  Vec2 target = edge_midpoint + dir * distance;
  detail::check_workspace(target, pp.workspace_radius, "plan_drag: drag target");

  double yaw = detail::yaw_for_slide(dir);
  detail::PlanBuilder b(gp, pp);
  Pose hover{{edge_midpoint.x, edge_midpoint.y, pp.grasp_z + pp.hover_height}, 0.0, 0.0, yaw};
  b.start(hover);
  b.move_to({edge_midpoint.x, edge_midpoint.y, pp.grasp_z}, ActionTag::PreGrasp,
            pp.descend_speed);
  b.set_torque(pp.torque_slide, pp.torque_slide, ActionTag::Grasp);
  b.dwell(pp.grasp_dwell, ActionTag::Grasp);
  b.set_torque(pp.torque_firm, pp.torque_firm, ActionTag::Grasp);
  b.move_to({edge_midpoint.x, edge_midpoint.y, pp.grasp_z + pp.lift_clearance},
            ActionTag::Move, pp.descend_speed);
  if (distance > 0.0)
    b.move_to({target.x, target.y, pp.grasp_z + pp.lift_clearance}, ActionTag::Move);
  b.move_to({target.x, target.y, pp.grasp_z}, ActionTag::Move, pp.descend_speed);
  b.set_torque(0.0, 0.0, ActionTag::Release);
  b.move_to({target.x, target.y, pp.grasp_z + pp.retract_height}, ActionTag::Release);
  return b.finish();
}

// Dual sliding grasp at the corners, firm up, vertical lift, timed hold.
inline Trajectory plan_lift(const Vec2& p1, const Vec2& p2, double height, double hold,
                            const GripperParams& gp = {}, const PlannerParams& pp = {}) {
  if (!(height > 0.0)) throw ValidationError("plan_lift: height must be > 0");
  if (hold < 0.0) throw ValidationError("plan_lift: hold must be >= 0");
  if ((p2 - p1).norm() < 1e-9) throw PlanningError("plan_lift: grasp corners coincide");
  Vec2 mid = (p1 + p2) * 0.5;
  detail::check_workspace(mid, pp.workspace_radius, "plan_lift: grasp midpoint");

  detail::PlanBuilder b(gp, pp);
  double span = (p1 - p2).norm();
  double width = clamp(span, gp.width_min, gp.width_max);
  if (span > gp.width_max)
    b.warn("grasp width " + fmt_double(span) + " m clamped to gripper span " +
           fmt_double(gp.width_max) + " m");
  double yaw = detail::yaw_for_lateral((p1 - p2).normalized());

  Pose hover{{mid.x, mid.y, pp.grasp_z + pp.hover_height}, 0.0, 0.0, yaw};
  b.start(hover);
  b.open_width(width, ActionTag::PreGrasp);
  b.move_to({mid.x, mid.y, pp.grasp_z}, ActionTag::PreGrasp, pp.descend_speed);
  b.set_torque(pp.torque_slide, pp.torque_slide, ActionTag::Grasp);
  b.dwell(pp.grasp_dwell, ActionTag::Grasp);
  b.set_torque(pp.torque_firm, pp.torque_firm, ActionTag::Grasp);
  b.move_to({mid.x, mid.y, pp.grasp_z + height}, ActionTag::Move);
  if (hold > 0.0) b.dwell(hold, ActionTag::Hold);
  b.set_torque(0.0, 0.0, ActionTag::Release);
  b.dwell(0.2, ActionTag::Release);
  return b.finish();
}

// Firm grasp at the wrinkle, torque dropped so the roller takes over, then
// a straight slide that feeds the cloth through the low-friction contact.
inline Trajectory plan_flatten(const Vec2& grasp_point, Vec2 slide_direction,
                               double slide_length, const GripperParams& gp = {},
                               const PlannerParams& pp = {}) {
  if (slide_length < 0.0)
    throw ValidationError("plan_flatten: slide_length must be >= 0");
  Vec2 dir = slide_direction.normalized();
  if (dir.norm() < 0.5) throw ValidationError("plan_flatten: direction must be nonzero");
  Vec2 target = grasp_point + dir * slide_length;
  detail::check_workspace(target, pp.workspace_radius, "plan_flatten: slide target");

  double yaw = detail::yaw_for_slide(dir);
  detail::PlanBuilder b(gp, pp);
  Pose hover{{grasp_point.x, grasp_point.y, pp.grasp_z + pp.hover_height}, 0.0, 0.0, yaw};
  b.start(hover);
  b.move_to({grasp_point.x, grasp_point.y, pp.grasp_z}, ActionTag::PreGrasp,
            pp.descend_speed);
  b.set_torque(pp.torque_firm, pp.torque_firm, ActionTag::Grasp);
  b.dwell(pp.grasp_dwell, ActionTag::Grasp);
  b.set_torque(pp.torque_slide, pp.torque_slide, ActionTag::Slide);
  if (slide_length > 0.0)
    b.move_to({target.x, target.y, pp.grasp_z}, ActionTag::Slide);
  b.set_torque(0.0, 0.0, ActionTag::Release);
  b.move_to({target.x, target.y, pp.grasp_z + pp.retract_height}, ActionTag::Release);
  return b.finish();
}

struct ExecuteOptions {
  double sim_dt = 1e-3;
  double report_rate = 50.0;  // Hz frame sampling
  bool keep_snapshots = false;
  double mask_scale = 0.002;  // m/px for the pre/post masks
  std::string task = "episode";
  double settle_time = 2.0;   // used by pipelines that settle after executing
  double settle_tol = 1e-7;   // J
};

// Drive the gripper through the trajectory at the physics step, capture at
// grasp waypoints, feed constraints to the integrator, and log everything.
inline EpisodeReport execute(const Trajectory& traj, const ClothState& cloth,
                             const GripperState& gripper, const ExecuteOptions& opts = {}) {
  traj.validate();
  EpisodeReport rep;
  rep.task = opts.task;

  ClothState state = cloth;
  GripperState grip = gripper;

  const auto& wps = traj.waypoints;
  const Waypoint& w0 = wps.front();
  grip.tool_pose = w0.pose;
  grip = set_width(grip, w0.width_cmd);
  grip = command_torque(grip, Finger::Left, w0.torque_cmd[0]);
  grip = command_torque(grip, Finger::Right, w0.torque_cmd[1]);

  for (const auto& warning : traj.warnings) rep.events.push_back({0.0, "clamp", "", warning});

  rep.pre_mask = rasterize_mask(state, opts.mask_scale);

  int last_hold_wp = -1;
  for (size_t k = 0; k < wps.size(); ++k)
    if (wps[k].tag == ActionTag::Hold) last_hold_wp = static_cast<int>(k);

  const double dt = opts.sim_dt;
  const int steps_per_frame =
      std::max(1, static_cast<int>(std::llround(1.0 / (opts.report_rate * dt))));

  FrictionMode prev_mode[2] = {grip.fingers[0].mode, grip.fingers[1].mode};
  bool was_sliding[2] = {false, false};
  double t = w0.t;
  const double t_end = traj.duration();
  size_t next_wp = 1;
  int step_idx = 0;

  auto record_frame = [&](const ConstraintStepLog* log) {
    FrameRecord fr;
    fr.t = t;
    fr.tool_pose = grip.tool_pose;
    fr.width = grip.width;
    for (int f = 0; f < 2; ++f) {
      fr.fingers[f].mode = grip.fingers[f].mode;
      fr.fingers[f].grip_force = grip.fingers[f].grip_force;
      fr.fingers[f].grasped_count = static_cast<int>(grip.fingers[f].grasped.size());
      fr.fingers[f].constraint_force = log ? log->finger_force[f] : 0.0;
    }
    fr.cloth_hash = hash_positions(state);
    if (opts.keep_snapshots) {
      fr.snapshot_index = static_cast<int>(rep.snapshots.size());
      rep.snapshots.push_back(state);
    }
    rep.frames.push_back(fr);
  };

  auto handle_waypoint = [&](size_t idx) {
    const Waypoint& wp = wps[idx];
    bool first_grasp = wp.tag == ActionTag::Grasp &&
                       (idx == 0 || wps[idx - 1].tag != ActionTag::Grasp);
    if (first_grasp) {
      for (Finger f : {Finger::Left, Finger::Right}) {
        auto res = attempt_sliding_grasp(grip, f, state);
        grip = res.gripper;
        rep.events.push_back(
            {wp.t, "grasp", to_string(f),
             std::string(res.grasp_ok ? "ok" : "fail") + " n=" +
                 std::to_string(grip.finger(f).grasped.size())});
      }
    }
    if (last_hold_wp >= 0 && idx == static_cast<size_t>(last_hold_wp)) {
      for (Finger f : {Finger::Left, Finger::Right}) {
        size_t n = grip.finger(f).grasped.size();
        rep.events.push_back({wp.t, "hold_end", to_string(f),
                              std::string(n > 0 ? "retained" : "lost") +
                                  " n=" + std::to_string(n)});
      }
    }
  };

  handle_waypoint(0);
  record_frame(nullptr);

  try {
    while (t < t_end - 1e-12) {
      double t_next = std::min(t + dt, t_end);
      double dtp = t_next - t;
      Setpoint sp = traj.sample(t_next);

      double dw = clamp(sp.width_cmd - grip.width, -grip.params.width_speed * dtp,
                        grip.params.width_speed * dtp);
      grip = set_width(grip, grip.width + dw);
      grip.tool_pose = sp.pose;
      for (int f = 0; f < 2; ++f) {
        grip = command_torque(grip, static_cast<Finger>(f), sp.torque_cmd[f]);
        FrictionMode m = grip.fingers[f].mode;
        if (m != prev_mode[f]) {
          rep.events.push_back({t_next, "mode", to_string(static_cast<Finger>(f)),
                                std::string(to_string(prev_mode[f])) + "->" +
                                    to_string(m)});
          prev_mode[f] = m;
        }
      }

      while (next_wp < wps.size() && wps[next_wp].t <= t_next + 1e-9) {
        handle_waypoint(next_wp);
        ++next_wp;
      }

      if (sp.tag == ActionTag::Slide) {
        for (Finger f : {Finger::Left, Finger::Right})
          if (grip.finger(f).grip_force > 0.0)
            grip = refresh_roller_contact(grip, f, state);
      }

      GraspConstraintSet constraints = emit_constraints(grip, state);
      ConstraintStepLog log;
      state = step(state, dtp, constraints, &log);

      for (int f = 0; f < 2; ++f) {
        if (log.hf_break[f])
          rep.events.push_back({t_next, "slip", to_string(static_cast<Finger>(f)),
                                "hf_break force=" + fmt_double(log.finger_force[f])});
        if (log.lf_slide[f] && !was_sliding[f])
          rep.events.push_back({t_next, "slide", to_string(static_cast<Finger>(f)),
                                "lf cap=" + fmt_double(log.finger_force[f])});
        was_sliding[f] = log.lf_slide[f];
      }
      grip = apply_step_log(grip, log, state);

      t = t_next;
      ++step_idx;
      if (step_idx % steps_per_frame == 0 || t >= t_end - 1e-12) record_frame(&log);
    }
  } catch (const SimulationDiverged& e) {
    rep.failed = true;
    rep.failure_reason = e.what();
  }

  rep.final_cloth = state;
  if (!rep.failed) rep.post_mask = rasterize_mask(state, opts.mask_scale);
  return rep;
}

inline Vec2 rotate_cw(const Vec2& v) { return {v.y, -v.x}; }

// Occupied-pixel centroid of a mask.
inline Vec2 mask_centroid(const BinaryMask& m) {
  double sx = 0.0, sy = 0.0;
  size_t n = 0;
  for (int j = 0; j < m.height_px; ++j)
    for (int i = 0; i < m.width_px; ++i)
      if (m.at(i, j)) {
        Vec2 c = m.pixel_center(i, j);
        sx += c.x;
        sy += c.y;
        ++n;
      }
  if (n == 0) throw Error("mask_centroid: empty mask");
  return {sx / n, sy / n};
}

// Perception -> plan -> execute -> settle, one half-fold per pass; the
// second fold runs perpendicular to the first. The fold line is the
// perpendicular bisector through the mask's area centroid.
inline std::vector<EpisodeReport> auto_fold(const ClothState& cloth, Vec2 direction,
                                            int n_folds, const GripperParams& gp = {},
                                            const PlannerParams& pp = {},
                                            ExecuteOptions opts = {},
                                            double corner_epsilon = 0.008,
                                            double corner_min_turn_deg = 30.0) {
  if (n_folds < 1 || n_folds > 2)
    throw ValidationError("auto_fold: n_folds must be 1 or 2");
  opts.task = "fold";

  std::vector<EpisodeReport> reports;
  ClothState state = cloth;
  for (int i = 0; i < n_folds; ++i) {
    Vec2 dir = (i == 0) ? direction.normalized() : rotate_cw(direction.normalized());
    BinaryMask mask = rasterize_mask(state, opts.mask_scale);
    Line2 fold_line{mask_centroid(mask), dir};
    try {
      Polygon contour = extract_contour(mask);
      CornerSet corners = detect_corners(contour, corner_epsilon, corner_min_turn_deg);
      GraspSelection sel =
          select_grasp_corners(corners, dir, gp.width_min, gp.width_max);
      Trajectory traj = plan_fold(sel.p1, sel.p2, fold_line, gp, pp);

      GripperState grip;
      grip.params = gp;
      EpisodeReport rep = execute(traj, state, grip, opts);
      rep.pre_mask = mask;
      rep.fold_line = fold_line;
      if (!rep.failed) {
        SettleResult settled =
            settle(rep.final_cloth, opts.settle_time, opts.settle_tol, opts.sim_dt);
        rep.final_cloth = settled.state;
        rep.post_mask = rasterize_mask(settled.state, opts.mask_scale);
      }
      bool failed = rep.failed;
      reports.push_back(std::move(rep));
      if (failed) break;
      state = reports.back().final_cloth;
    } catch (const Error& e) {
      EpisodeReport rep;
      rep.task = "fold";
      rep.failed = true;
      rep.failure_reason = e.what();
      rep.pre_mask = mask;
      rep.fold_line = fold_line;
      reports.push_back(std::move(rep));
      break;
    }
  }
  return reports;
}

}  // namespace clothbench
