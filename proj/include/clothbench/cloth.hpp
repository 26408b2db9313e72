#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "clothbench/constraints.hpp"
#include "clothbench/error.hpp"
#include "clothbench/geom.hpp"

namespace clothbench {

// Largest step the integrator accepts. The default scenario step is 1 ms;
// anything above 10 ms is outside the tuned stability envelope.
constexpr double kMaxStepSeconds = 0.01;

// Servo speed bound for low-friction pins (m/s).
constexpr double kPinServoSpeed = 2.0;

struct ClothSpec {
  double width_m = 0.3;
  double height_m = 0.3;
  int nx = 16;
  int ny = 16;
  double mass_per_area = 0.2;          // kg/m^2
  double stiffness_structural = 20.0;  // N/m
  double stiffness_shear = 6.0;        // N/m
  double stiffness_bend = 0.05;        // N/m
  double damping = 0.005;              // N*s/m, acts on relative velocity along each spring
  double table_friction_mu = 0.4;
  double rest_thickness = 0.001;       // m, build height and layer offset

  void validate() const {
    if (nx < 2 || ny < 2)
      throw ValidationError("cloth spec: nx and ny must be >= 2 (got nx=" +
                            std::to_string(nx) + ", ny=" + std::to_string(ny) + ")");
    auto positive = [](double v, const char* name) {
      if (!(v > 0.0))
        throw ValidationError(std::string("cloth spec: ") + name + " must be > 0");
    };
    positive(width_m, "width_m");
    positive(height_m, "height_m");
    positive(mass_per_area, "mass_per_area");
    positive(stiffness_structural, "stiffness_structural");
    positive(stiffness_shear, "stiffness_shear");
    positive(stiffness_bend, "stiffness_bend");
    positive(damping, "damping");
    positive(table_friction_mu, "table_friction_mu");
    positive(rest_thickness, "rest_thickness");
  }
};

// Planar placement of the grid: cloth center plus yaw about +z.
struct ClothPlacement {
  Vec2 origin;
  double yaw = 0.0;
};

struct Spring {
  int i = 0, j = 0;
  double rest_length = 0.0;
  double stiffness = 0.0;
};

struct ClothState {
  int nx = 0, ny = 0;
  std::vector<Vec3> positions;
  std::vector<Vec3> velocities;
  std::vector<Spring> springs;
  double time = 0.0;

  // Material carried along so stepping needs no side channel.
  double particle_mass = 0.0;
  double table_mu = 0.4;
  double damping = 0.005;
  double rest_thickness = 0.001;

  int particle_count() const { return static_cast<int>(positions.size()); }
  int index(int ix, int iy) const { return iy * nx + ix; }
};

inline ClothState build_cloth(const ClothSpec& spec, const ClothPlacement& place = {}) {
  spec.validate();

  ClothState st;
  st.nx = spec.nx;
  st.ny = spec.ny;
  st.particle_mass = spec.width_m * spec.height_m * spec.mass_per_area /
                     (static_cast<double>(spec.nx) * spec.ny);
  st.table_mu = spec.table_friction_mu;
  st.damping = spec.damping;
  st.rest_thickness = spec.rest_thickness;

  const double sx = spec.width_m / (spec.nx - 1);
  const double sy = spec.height_m / (spec.ny - 1);
  const double cy = std::cos(place.yaw), sy_ = std::sin(place.yaw);

  st.positions.resize(static_cast<size_t>(spec.nx) * spec.ny);
  st.velocities.assign(st.positions.size(), Vec3{});
  for (int iy = 0; iy < spec.ny; ++iy) {
    for (int ix = 0; ix < spec.nx; ++ix) {
      double lx = ix * sx - spec.width_m * 0.5;
      double ly = iy * sy - spec.height_m * 0.5;
      st.positions[st.index(ix, iy)] = {place.origin.x + lx * cy - ly * sy_,
                                        place.origin.y + lx * sy_ + ly * cy,
                                        spec.rest_thickness};
    }
  }

  // Rest lengths come from the grid spacing directly so a 0.3 m / 15-cell
  // row is exactly 0.02 m regardless of placement rounding.
  auto add = [&st](int i, int j, double rest, double k) {
    st.springs.push_back({i, j, rest, k});
  };
  const double s_diag = std::sqrt(sx * sx + sy * sy);
  for (int iy = 0; iy < spec.ny; ++iy) {
    for (int ix = 0; ix < spec.nx; ++ix) {
      int p = st.index(ix, iy);
      if (ix + 1 < spec.nx) add(p, st.index(ix + 1, iy), sx, spec.stiffness_structural);
      if (iy + 1 < spec.ny) add(p, st.index(ix, iy + 1), sy, spec.stiffness_structural);
      if (ix + 1 < spec.nx && iy + 1 < spec.ny) {
        add(p, st.index(ix + 1, iy + 1), s_diag, spec.stiffness_shear);
        add(st.index(ix + 1, iy), st.index(ix, iy + 1), s_diag, spec.stiffness_shear);
      }
      if (ix + 2 < spec.nx) add(p, st.index(ix + 2, iy), 2.0 * sx, spec.stiffness_bend);
      if (iy + 2 < spec.ny) add(p, st.index(ix, iy + 2), 2.0 * sy, spec.stiffness_bend);
    }
  }
  return st;
}

namespace detail {

// Coulomb clamp: remove up to mu*g*dt of tangential speed, sticking below it.
inline void table_friction(Vec3& v, double mu, double dt) {
  double vt = std::sqrt(v.x * v.x + v.y * v.y);
  double dvmax = mu * kGravity * dt;
  if (vt <= dvmax) {
    v.x = 0.0;
    v.y = 0.0;
  } else {
    double f = (vt - dvmax) / vt;
    v.x *= f;
    v.y *= f;
  }
}

}  // namespace detail

// One fixed-dt semi-implicit Euler step. Pure function of its inputs:
// identical (state, dt, constraints) give bitwise identical results.
inline ClothState step(const ClothState& state, double dt,
                       const GraspConstraintSet& constraints = {},
                       ConstraintStepLog* log = nullptr) {
  if (!(dt > 0.0) || dt > kMaxStepSeconds)
    throw ValidationError("step: dt must be in (0, " + fmt_double(kMaxStepSeconds) +
                          "], got " + fmt_double(dt));
  const int n = state.particle_count();
  for (const auto& c : constraints.entries)
    if (c.particle < 0 || c.particle >= n)
      throw ValidationError("step: constraint references invalid particle " +
                            std::to_string(c.particle));
  for (const auto& a : constraints.anchors)
    if (a.first < 0 || a.first >= n)
      throw ValidationError("step: anchor references invalid particle " +
                            std::to_string(a.first));

  ClothState next = state;
  const double m = state.particle_mass;
  const double inv_m = 1.0 / m;

  std::vector<Vec3> force(n, Vec3{0.0, 0.0, -m * kGravity});
  for (const auto& s : state.springs) {
    Vec3 d = state.positions[s.j] - state.positions[s.i];
    double len = d.norm();
    if (len <= 1e-12) continue;
    Vec3 dir = d * (1.0 / len);
    double fs = s.stiffness * (len - s.rest_length);
    double rel = (state.velocities[s.j] - state.velocities[s.i]).dot(dir);
    double f = fs + state.damping * rel;
    force[s.i] += dir * f;
    force[s.j] -= dir * f;
  }

  for (int i = 0; i < n; ++i)
    next.velocities[i] = state.velocities[i] + force[i] * (dt * inv_m);

  // Resting contact at velocity level: particles already on the table never
  // penetrate and never pick up spurious potential energy.
  for (int i = 0; i < n; ++i) {
    if (state.positions[i].z <= 1e-9 && next.velocities[i].z < 0.0) {
      next.velocities[i].z = 0.0;
      detail::table_friction(next.velocities[i], state.table_mu, dt);
    }
  }

  // Grasp constraints, enforced jointly per finger.
  std::vector<char> pinned(n, 0);
  std::vector<Vec3> pin_target(n);
  for (const auto& a : constraints.anchors) {
    next.velocities[a.first] = (a.second - state.positions[a.first]) * (1.0 / dt);
    pinned[a.first] = 1;
    pin_target[a.first] = a.second;
  }
  if (!constraints.entries.empty()) {
    for (int f = 0; f < 2; ++f) {
      Finger finger = static_cast<Finger>(f);
      double cap = 0.0;
      std::vector<const GraspConstraint*> entries;
      for (const auto& c : constraints.entries)
        if (c.finger == finger) {
          entries.push_back(&c);
          cap = c.friction_force_cap;
        }
      if (entries.empty()) continue;

      if (entries[0]->mode == FrictionMode::HighFriction) {
        // Firm grasp: the pad always takes the cloth at its current spot,
        // so the servo never needs to cover distance.
        std::vector<Vec3> v_pin(entries.size());
        Vec3 f_sum{};
        for (size_t k = 0; k < entries.size(); ++k) {
          const auto& c = *entries[k];
          v_pin[k] = (c.target - state.positions[c.particle]) * (1.0 / dt);
          f_sum += (v_pin[k] - next.velocities[c.particle]) * (m / dt);
        }
        double fmag = f_sum.norm();
        if (log) log->finger_force[f] = fmag;
        if (fmag <= cap) {
          for (size_t k = 0; k < entries.size(); ++k) {
            const auto& c = *entries[k];
            next.velocities[c.particle] = v_pin[k];
            pinned[c.particle] = 1;
            pin_target[c.particle] = c.target;
          }
        } else if (log) {
          log->hf_break[f] = true;  // pad let go; particles fly free this step
        }
      } else {
        // Low friction: rigid across the roller axis, force-capped along
        // it. The roller feed can pick up particles a pinch-gap away from
        // their target, so the servo speed is bounded to avoid kicks.
        Vec3 axis = entries[0]->slide_axis.normalized();
        std::vector<Vec3> v_pin(entries.size());
        Vec3 f_sum{};
        for (size_t k = 0; k < entries.size(); ++k) {
          const auto& c = *entries[k];
          Vec3 vp = (c.target - state.positions[c.particle]) * (1.0 / dt);
          double sp = vp.norm();
          if (sp > kPinServoSpeed) vp = vp * (kPinServoSpeed / sp);
          v_pin[k] = vp;
          f_sum += (vp - next.velocities[c.particle]) * (m / dt);
        }
        double tan_sum = f_sum.dot(axis);
        Vec3 perp_sum = f_sum - axis * tan_sum;
        if (std::abs(tan_sum) <= cap) {
          if (log) log->finger_force[f] = f_sum.norm();
          for (size_t k = 0; k < entries.size(); ++k)
            next.velocities[entries[k]->particle] = v_pin[k];
        } else {
          if (log) {
            log->lf_slide[f] = true;
            Vec3 applied = perp_sum + axis * (cap * (tan_sum > 0 ? 1.0 : -1.0));
            log->finger_force[f] = applied.norm();
          }
          double share = cap / static_cast<double>(entries.size());
          double sign = tan_sum > 0 ? 1.0 : -1.0;
          for (size_t k = 0; k < entries.size(); ++k) {
            const auto& c = *entries[k];
            Vec3 v_free = next.velocities[c.particle];
            double v_tan = v_free.dot(axis);
            Vec3 v_perp_pin = v_pin[k] - axis * v_pin[k].dot(axis);
            double v_tan_new = v_tan + dt * inv_m * share * sign;
            // Friction must not push the particle past the servo velocity.
            double v_tan_pin = v_pin[k].dot(axis);
            if (sign > 0 ? v_tan_new > v_tan_pin : v_tan_new < v_tan_pin)
              v_tan_new = v_tan_pin;
            next.velocities[c.particle] = v_perp_pin + axis * v_tan_new;
          }
        }
      }
    }
  }

  for (int i = 0; i < n; ++i) {
    if (pinned[i])
      next.positions[i] = pin_target[i];
    else
      next.positions[i] = state.positions[i] + next.velocities[i] * dt;
  }

  // Particles that crossed the plane mid-flight: project and kill impact.
  for (int i = 0; i < n; ++i) {
    if (next.positions[i].z < 0.0) {
      next.positions[i].z = 0.0;
      if (next.velocities[i].z < 0.0) next.velocities[i].z = 0.0;
      detail::table_friction(next.velocities[i], state.table_mu, dt);
    }
  }

  if (!constraints.empty() && log) {
    for (const auto& c : constraints.entries) {
      int f = static_cast<int>(c.finger);
      if (log->lf_slide[f])
        log->slid_positions.emplace_back(c.particle, next.positions[c.particle]);
    }
  }

  for (int i = 0; i < n; ++i) {
    const Vec3& p = next.positions[i];
    if (!std::isfinite(p.x) || !std::isfinite(p.y) || !std::isfinite(p.z))
      throw SimulationDiverged(
          "simulation diverged: non-finite position at particle " + std::to_string(i) +
          " (t=" + fmt_double(state.time) + " s)", i);
  }

  next.time = state.time + dt;
  return next;
}

struct Energy {
  double kinetic = 0.0;
  double elastic = 0.0;
};

inline Energy total_energy(const ClothState& state) {
  Energy e;
  for (const auto& v : state.velocities) e.kinetic += 0.5 * state.particle_mass * v.norm2();
  for (const auto& s : state.springs) {
    double len = (state.positions[s.j] - state.positions[s.i]).norm();
    double x = len - s.rest_length;
    e.elastic += 0.5 * s.stiffness * x * x;
  }
  return e;
}

inline double gravitational_energy(const ClothState& state) {
  double e = 0.0;
  for (const auto& p : state.positions) e += state.particle_mass * kGravity * p.z;
  return e;
}

struct SettleResult {
  ClothState state;
  bool reached_tolerance = false;
  double elapsed = 0.0;
};

// Step until total kinetic energy drops below kinetic_tol or max_time runs
// out. Always takes at least one step.
inline SettleResult settle(const ClothState& state, double max_time, double kinetic_tol,
                           double dt = 1e-3) {
  if (!(kinetic_tol > 0.0)) throw ValidationError("settle: kinetic_tol must be > 0");
  SettleResult r{state, false, 0.0};
  do {
    r.state = step(r.state, dt);
    r.elapsed += dt;
    if (total_energy(r.state).kinetic < kinetic_tol) {
      r.reached_tolerance = true;
      return r;
    }
  } while (r.elapsed < max_time);
  return r;
}

}  // namespace clothbench
