#pragma once

#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "clothbench/cloth.hpp"
#include "clothbench/error.hpp"
#include "clothbench/geom.hpp"
#include "clothbench/gripper.hpp"
#include "clothbench/planner.hpp"

namespace clothbench {

enum class TaskType { Fold, Drag, Lift, Flatten, Payload };

inline const char* to_string(TaskType t) {
  switch (t) {
    case TaskType::Fold: return "fold";
    case TaskType::Drag: return "drag";
    case TaskType::Lift: return "lift";
    case TaskType::Flatten: return "flatten";
    case TaskType::Payload: return "payload";
  }
  return "?";
}

struct PoseConfig {
  double x = 0.0, y = 0.0, yaw = 0.0;     // base placement (yaw in radians)
  double jitter_xy = 0.05;                // m, per-trial uniform jitter
  double jitter_yaw_deg = 45.0;           // degrees
  double wrinkle_amplitude = 0.0;         // m, seeded sinusoidal ripple
  int wrinkle_waves = 3;
  double ridge_amplitude = 0.0;           // m, deterministic raised ridge
  double ridge_half_width = 0.06;         // m
  double ridge_offset = 0.0;              // m along the axis across the crest
  std::string ridge_axis = "y";           // crest runs along this cloth axis
};

struct SimParams {
  double dt = 1e-3;
  double settle_time = 2.0;
  double settle_tol = 1e-7;
  double report_rate = 50.0;
  double mask_scale = 0.002;
  double corner_epsilon = 0.008;
  double corner_min_turn_deg = 30.0;
};

struct TaskParams {
  int n_folds = 0;                 // fold (required)
  Vec2 fold_direction{0.0, 1.0};
  double drag_distance = 0.0;      // drag (required)
  Vec2 drag_direction{1.0, 0.0};
  double lift_height = 0.0;        // lift (required)
  double lift_hold = 0.0;          // lift (required)
  Vec2 lift_direction{0.0, 1.0};
  double slide_length = 0.0;       // flatten (required)
  Vec2 slide_direction{1.0, 0.0};
  double max_force = 30.0;         // payload
  double pull_speed = 0.05;
  double grasp_torque = 0.2;
};

struct Scenario {
  std::string name = "scenario";
  TaskType task = TaskType::Fold;
  int trials = 1;
  ClothSpec cloth;
  PoseConfig pose;
  GripperParams gripper;
  PlannerParams planner;
  SimParams sim;
  TaskParams params;
};

namespace config_detail {

struct Entry {
  std::string value;
  int line = 0;
  bool used = false;
};

struct Parsed {
  std::map<std::string, Entry> entries;
  std::string where;

  bool has(const std::string& key) const { return entries.count(key) != 0; }

  std::string raw(const std::string& key) {
    auto it = entries.find(key);
    it->second.used = true;
    return it->second.value;
  }

  double get_double(const std::string& key, double fallback) {
    if (!has(key)) return fallback;
    auto it = entries.find(key);
    it->second.used = true;
    try {
      size_t pos = 0;
      double v = std::stod(it->second.value, &pos);
      if (pos != it->second.value.size()) throw std::invalid_argument("trailing");
      return v;
    } catch (...) {
      throw ParseError(where + ":" + std::to_string(it->second.line) + ": key '" + key +
                       "' expects a number, got '" + it->second.value + "'");
    }
  }

  int get_int(const std::string& key, int fallback) {
    double v = get_double(key, fallback);
    int i = static_cast<int>(std::llround(v));
    if (std::abs(v - i) > 1e-12) {
      auto it = entries.find(key);
      throw ParseError(where + ":" + std::to_string(it->second.line) + ": key '" + key +
                       "' expects an integer");
    }
    return i;
  }

  std::string get_string(const std::string& key, const std::string& fallback) {
    if (!has(key)) return fallback;
    return raw(key);
  }

  Vec2 get_vec2(const std::string& key, Vec2 fallback) {
    if (!has(key)) return fallback;
    auto it = entries.find(key);
    it->second.used = true;
    std::istringstream ss(it->second.value);
    Vec2 v;
    if (!(ss >> v.x >> v.y))
      throw ParseError(where + ":" + std::to_string(it->second.line) + ": key '" + key +
                       "' expects two numbers");
    std::string rest;
    if (ss >> rest)
      throw ParseError(where + ":" + std::to_string(it->second.line) + ": key '" + key +
                       "' expects exactly two numbers");
    return v;
  }

  void require(const std::string& key, const char* why) const {
    if (!has(key))
      throw ParseError(where + ": missing required key '" + key + "' (" + why + ")");
  }
};

inline std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

inline Parsed parse_entries(const std::string& text, const std::string& where) {
  Parsed p;
  p.where = where;
  std::istringstream is(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ParseError(where + ":" + std::to_string(lineno) + ": malformed section header");
      section = trim(line.substr(1, line.size() - 2));
      if (section.empty())
        throw ParseError(where + ":" + std::to_string(lineno) + ": empty section name");
      continue;
    }
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ParseError(where + ":" + std::to_string(lineno) + ": expected 'key = value'");
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty())
      throw ParseError(where + ":" + std::to_string(lineno) + ": empty key");
    std::string full = section.empty() ? key : section + "." + key;
    auto [it, inserted] = p.entries.insert({full, {value, lineno, false}});
    if (!inserted)
      throw ParseError(where + ":" + std::to_string(lineno) + ": duplicate key '" + full +
                       "' (first defined at line " + std::to_string(it->second.line) + ")");
  }
  return p;
}

}  // namespace config_detail

inline Scenario parse_scenario(const std::string& text,
                               const std::string& where = "<string>") {
  using config_detail::parse_entries;
  auto p = parse_entries(text, where);

  Scenario sc;
  p.require("task", "one of fold, drag, lift, flatten, payload");
  std::string task = p.raw("task");
  if (task == "fold") sc.task = TaskType::Fold;
  else if (task == "drag") sc.task = TaskType::Drag;
  else if (task == "lift") sc.task = TaskType::Lift;
  else if (task == "flatten") sc.task = TaskType::Flatten;
  else if (task == "payload") sc.task = TaskType::Payload;
  else
    throw ParseError(where + ": unknown task '" + task + "'");

  sc.name = p.get_string("name", "scenario");
  sc.trials = p.get_int("trials", 1);
  if (sc.trials < 1) throw ParseError(where + ": trials must be >= 1");

  sc.cloth.width_m = p.get_double("cloth.width", sc.cloth.width_m);
  sc.cloth.height_m = p.get_double("cloth.height", sc.cloth.height_m);
  sc.cloth.nx = p.get_int("cloth.nx", sc.cloth.nx);
  sc.cloth.ny = p.get_int("cloth.ny", sc.cloth.ny);
  sc.cloth.mass_per_area = p.get_double("cloth.mass_per_area", sc.cloth.mass_per_area);
  sc.cloth.stiffness_structural =
      p.get_double("cloth.stiffness_structural", sc.cloth.stiffness_structural);
  sc.cloth.stiffness_shear = p.get_double("cloth.stiffness_shear", sc.cloth.stiffness_shear);
  sc.cloth.stiffness_bend = p.get_double("cloth.stiffness_bend", sc.cloth.stiffness_bend);
  sc.cloth.damping = p.get_double("cloth.damping", sc.cloth.damping);
  sc.cloth.table_friction_mu =
      p.get_double("cloth.table_friction_mu", sc.cloth.table_friction_mu);
  sc.cloth.rest_thickness = p.get_double("cloth.rest_thickness", sc.cloth.rest_thickness);
  sc.cloth.validate();

  sc.pose.x = p.get_double("pose.x", sc.pose.x);
  sc.pose.y = p.get_double("pose.y", sc.pose.y);
  sc.pose.yaw = p.get_double("pose.yaw_deg", 0.0) * kPi / 180.0;
  sc.pose.jitter_xy = p.get_double("pose.jitter_xy", sc.pose.jitter_xy);
  sc.pose.jitter_yaw_deg = p.get_double("pose.jitter_yaw_deg", sc.pose.jitter_yaw_deg);
  sc.pose.wrinkle_amplitude =
      p.get_double("pose.wrinkle_amplitude", sc.pose.wrinkle_amplitude);
  sc.pose.wrinkle_waves = p.get_int("pose.wrinkle_waves", sc.pose.wrinkle_waves);
  sc.pose.ridge_amplitude = p.get_double("pose.ridge_amplitude", sc.pose.ridge_amplitude);
  sc.pose.ridge_half_width =
      p.get_double("pose.ridge_half_width", sc.pose.ridge_half_width);
  sc.pose.ridge_offset = p.get_double("pose.ridge_offset", sc.pose.ridge_offset);
  sc.pose.ridge_axis = p.get_string("pose.ridge_axis", sc.pose.ridge_axis);
  if (sc.pose.ridge_axis != "x" && sc.pose.ridge_axis != "y")
    throw ParseError(where + ": pose.ridge_axis must be 'x' or 'y'");

  GripperParams& g = sc.gripper;
  g.width_max = p.get_double("gripper.width_max", g.width_max);
  g.width_speed = p.get_double("gripper.width_speed", g.width_speed);
  g.f_switch = p.get_double("gripper.f_switch", g.f_switch);
  g.k_transmission = p.get_double("gripper.k_transmission", g.k_transmission);
  g.mu_lf = p.get_double("gripper.mu_lf", g.mu_lf);
  g.f_hold_max = p.get_double("gripper.f_hold_max", g.f_hold_max);
  if (p.has("gripper.capture_box")) {
    auto it = p.entries.find("gripper.capture_box");
    std::istringstream ss(p.raw("gripper.capture_box"));
    if (!(ss >> g.capture_box_x >> g.capture_box_y >> g.capture_height))
      throw ParseError(where + ":" + std::to_string(it->second.line) +
                       ": gripper.capture_box expects 'x y height'");
  }
  g.capture_above = p.get_double("gripper.capture_above", g.capture_above);
  g.min_grasp_particles = p.get_int("gripper.min_grasp_particles", g.min_grasp_particles);
  g.layer_epsilon = p.get_double("gripper.layer_epsilon", g.layer_epsilon);
  g.jaw_half_length = p.get_double("gripper.jaw_half_length", g.jaw_half_length);
  g.pinch_half_gap = p.get_double("gripper.pinch_half_gap", g.pinch_half_gap);

  PlannerParams& pl = sc.planner;
  pl.tool_speed = p.get_double("planner.tool_speed", pl.tool_speed);
  pl.hover_height = p.get_double("planner.hover_height", pl.hover_height);
  pl.grasp_z = p.get_double("planner.grasp_z", pl.grasp_z);
  pl.descend_speed = p.get_double("planner.descend_speed", pl.descend_speed);
  pl.grasp_dwell = p.get_double("planner.grasp_dwell", pl.grasp_dwell);
  pl.torque_ramp = p.get_double("planner.torque_ramp", pl.torque_ramp);
  pl.arc_apex_factor = p.get_double("planner.arc_apex_factor", pl.arc_apex_factor);
  pl.arc_samples = p.get_int("planner.arc_samples", pl.arc_samples);
  pl.torque_slide = p.get_double("planner.torque_slide", pl.torque_slide);
  pl.torque_firm = p.get_double("planner.torque_firm", pl.torque_firm);
  pl.workspace_radius = p.get_double("planner.workspace_radius", pl.workspace_radius);
  pl.lift_clearance = p.get_double("planner.lift_clearance", pl.lift_clearance);
  pl.retract_height = p.get_double("planner.retract_height", pl.retract_height);

  SimParams& sim = sc.sim;
  sim.dt = p.get_double("sim.dt", sim.dt);
  sim.settle_time = p.get_double("sim.settle_time", sim.settle_time);
  sim.settle_tol = p.get_double("sim.settle_tol", sim.settle_tol);
  sim.report_rate = p.get_double("sim.report_rate", sim.report_rate);
  sim.mask_scale = p.get_double("sim.mask_scale", sim.mask_scale);
  sim.corner_epsilon = p.get_double("sim.corner_epsilon", sim.corner_epsilon);
  sim.corner_min_turn_deg =
      p.get_double("sim.corner_min_turn_deg", sim.corner_min_turn_deg);

  TaskParams& tp = sc.params;
  switch (sc.task) {
    case TaskType::Fold:
      p.require("fold.n_folds", "number of half-folds, 1 or 2");
      tp.n_folds = p.get_int("fold.n_folds", 0);
      if (tp.n_folds < 1 || tp.n_folds > 2)
        throw ParseError(where + ": fold.n_folds must be 1 or 2");
      tp.fold_direction = p.get_vec2("fold.direction", tp.fold_direction);
      break;
    case TaskType::Drag:
      p.require("drag.distance", "horizontal translation in meters");
      tp.drag_distance = p.get_double("drag.distance", 0.0);
      tp.drag_direction = p.get_vec2("drag.direction", tp.drag_direction);
      break;
    case TaskType::Lift:
      p.require("lift.height", "lift height in meters");
      p.require("lift.hold", "hold duration in seconds");
      tp.lift_height = p.get_double("lift.height", 0.0);
      tp.lift_hold = p.get_double("lift.hold", 0.0);
      tp.lift_direction = p.get_vec2("lift.direction", tp.lift_direction);
      break;
    case TaskType::Flatten:
      p.require("flatten.slide_length", "slide length in meters");
      tp.slide_length = p.get_double("flatten.slide_length", 0.0);
      tp.slide_direction = p.get_vec2("flatten.direction", tp.slide_direction);
      break;
    case TaskType::Payload:
      tp.max_force = p.get_double("payload.max_force", tp.max_force);
      tp.pull_speed = p.get_double("payload.pull_speed", tp.pull_speed);
      tp.grasp_torque = p.get_double("payload.grasp_torque", tp.grasp_torque);
      break;
  }

  for (const auto& [key, entry] : p.entries)
    if (!entry.used)
      throw ParseError(where + ":" + std::to_string(entry.line) + ": unknown key '" + key +
                       "'" + (key.find('.') == std::string::npos
                                  ? ""
                                  : " (or it does not apply to task '" + task + "')"));
  return sc;
}

inline Scenario load_scenario(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ParseError("cannot open scenario file " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return parse_scenario(ss.str(), path);
}

// Canonical full-config text: every effective value, defaults included.
// Also the payload hashed into run metadata.
inline std::string emit_config(const Scenario& sc) {
  std::ostringstream os;
  auto d = [](double v) { return fmt_double(v, 12); };
  os << "name = " << sc.name << '\n';
  os << "task = " << to_string(sc.task) << '\n';
  os << "trials = " << sc.trials << '\n';
  os << "\n[cloth]\n";
  os << "width = " << d(sc.cloth.width_m) << '\n';
  os << "height = " << d(sc.cloth.height_m) << '\n';
  os << "nx = " << sc.cloth.nx << '\n';
  os << "ny = " << sc.cloth.ny << '\n';
  os << "mass_per_area = " << d(sc.cloth.mass_per_area) << '\n';
  os << "stiffness_structural = " << d(sc.cloth.stiffness_structural) << '\n';
  os << "stiffness_shear = " << d(sc.cloth.stiffness_shear) << '\n';
  os << "stiffness_bend = " << d(sc.cloth.stiffness_bend) << '\n';
  os << "damping = " << d(sc.cloth.damping) << '\n';
  os << "table_friction_mu = " << d(sc.cloth.table_friction_mu) << '\n';
  os << "rest_thickness = " << d(sc.cloth.rest_thickness) << '\n';
  os << "\n[pose]\n";
  os << "x = " << d(sc.pose.x) << '\n';
  os << "y = " << d(sc.pose.y) << '\n';
  os << "yaw_deg = " << d(sc.pose.yaw * 180.0 / kPi) << '\n';
  os << "jitter_xy = " << d(sc.pose.jitter_xy) << '\n';
  os << "jitter_yaw_deg = " << d(sc.pose.jitter_yaw_deg) << '\n';
  os << "wrinkle_amplitude = " << d(sc.pose.wrinkle_amplitude) << '\n';
  os << "wrinkle_waves = " << sc.pose.wrinkle_waves << '\n';
  os << "ridge_amplitude = " << d(sc.pose.ridge_amplitude) << '\n';
  os << "ridge_half_width = " << d(sc.pose.ridge_half_width) << '\n';
  os << "ridge_offset = " << d(sc.pose.ridge_offset) << '\n';
  os << "ridge_axis = " << sc.pose.ridge_axis << '\n';
  os << "\n[gripper]\n";
  os << "width_max = " << d(sc.gripper.width_max) << '\n';
  os << "width_speed = " << d(sc.gripper.width_speed) << '\n';
  os << "f_switch = " << d(sc.gripper.f_switch) << '\n';
  os << "k_transmission = " << d(sc.gripper.k_transmission) << '\n';
  os << "mu_lf = " << d(sc.gripper.mu_lf) << '\n';
  os << "f_hold_max = " << d(sc.gripper.f_hold_max) << '\n';
  os << "capture_box = " << d(sc.gripper.capture_box_x) << ' '
     << d(sc.gripper.capture_box_y) << ' ' << d(sc.gripper.capture_height) << '\n';
  os << "capture_above = " << d(sc.gripper.capture_above) << '\n';
  os << "min_grasp_particles = " << sc.gripper.min_grasp_particles << '\n';
  os << "layer_epsilon = " << d(sc.gripper.layer_epsilon) << '\n';
  os << "jaw_half_length = " << d(sc.gripper.jaw_half_length) << '\n';
  os << "pinch_half_gap = " << d(sc.gripper.pinch_half_gap) << '\n';
  os << "\n[planner]\n";
  os << "tool_speed = " << d(sc.planner.tool_speed) << '\n';
  os << "hover_height = " << d(sc.planner.hover_height) << '\n';
  os << "grasp_z = " << d(sc.planner.grasp_z) << '\n';
  os << "descend_speed = " << d(sc.planner.descend_speed) << '\n';
  os << "grasp_dwell = " << d(sc.planner.grasp_dwell) << '\n';
  os << "torque_ramp = " << d(sc.planner.torque_ramp) << '\n';
  os << "arc_apex_factor = " << d(sc.planner.arc_apex_factor) << '\n';
  os << "arc_samples = " << sc.planner.arc_samples << '\n';
  os << "torque_slide = " << d(sc.planner.torque_slide) << '\n';
  os << "torque_firm = " << d(sc.planner.torque_firm) << '\n';
  os << "workspace_radius = " << d(sc.planner.workspace_radius) << '\n';
  os << "lift_clearance = " << d(sc.planner.lift_clearance) << '\n';
  os << "retract_height = " << d(sc.planner.retract_height) << '\n';
  os << "\n[sim]\n";
  os << "dt = " << d(sc.sim.dt) << '\n';
  os << "settle_time = " << d(sc.sim.settle_time) << '\n';
  os << "settle_tol = " << d(sc.sim.settle_tol) << '\n';
  os << "report_rate = " << d(sc.sim.report_rate) << '\n';
  os << "mask_scale = " << d(sc.sim.mask_scale) << '\n';
  os << "corner_epsilon = " << d(sc.sim.corner_epsilon) << '\n';
  os << "corner_min_turn_deg = " << d(sc.sim.corner_min_turn_deg) << '\n';
  switch (sc.task) {
    case TaskType::Fold:
      os << "\n[fold]\n";
      os << "n_folds = " << sc.params.n_folds << '\n';
      os << "direction = " << d(sc.params.fold_direction.x) << ' '
         << d(sc.params.fold_direction.y) << '\n';
      break;
    case TaskType::Drag:
      os << "\n[drag]\n";
      os << "distance = " << d(sc.params.drag_distance) << '\n';
      os << "direction = " << d(sc.params.drag_direction.x) << ' '
         << d(sc.params.drag_direction.y) << '\n';
      break;
    case TaskType::Lift:
      os << "\n[lift]\n";
      os << "height = " << d(sc.params.lift_height) << '\n';
      os << "hold = " << d(sc.params.lift_hold) << '\n';
      os << "direction = " << d(sc.params.lift_direction.x) << ' '
         << d(sc.params.lift_direction.y) << '\n';
      break;
    case TaskType::Flatten:
      os << "\n[flatten]\n";
      os << "slide_length = " << d(sc.params.slide_length) << '\n';
      os << "direction = " << d(sc.params.slide_direction.x) << ' '
         << d(sc.params.slide_direction.y) << '\n';
      break;
    case TaskType::Payload:
      os << "\n[payload]\n";
      os << "max_force = " << d(sc.params.max_force) << '\n';
      os << "pull_speed = " << d(sc.params.pull_speed) << '\n';
      os << "grasp_torque = " << d(sc.params.grasp_torque) << '\n';
      break;
  }
  return os.str();
}

// The `config --defaults` payload: a default fold scenario, annotated.
inline std::string default_config_text() {
  Scenario sc;
  sc.task = TaskType::Fold;
  sc.params.n_folds = 1;
  std::ostringstream os;
  os << "# clothbench scenario defaults\n";
  os << "# Units: meters, seconds, newtons, radians unless the key says _deg.\n";
  os << "# Tasks: fold (needs fold.n_folds), drag (drag.distance),\n";
  os << "#        lift (lift.height, lift.hold), flatten (flatten.slide_length),\n";
  os << "#        payload (all keys optional).\n";
  os << emit_config(sc);
  return os.str();
}

}  // namespace clothbench
