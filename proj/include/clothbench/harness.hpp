#pragma once

#include <atomic>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "clothbench/cloth.hpp"
#include "clothbench/episode.hpp"
#include "clothbench/error.hpp"
#include "clothbench/image_io.hpp"
#include "clothbench/metrics.hpp"
#include "clothbench/planner.hpp"
#include "clothbench/rng.hpp"
#include "clothbench/scenario.hpp"

namespace clothbench {

constexpr const char* kVersion = "0.1.0";

// ---------------------------------------------------------------------------
// Trial construction

namespace harness_detail {

// Raised ridge with arc-length compensation across the crest, so the
// structural springs stay near rest and only friction holds the ruck.
inline void apply_ridge(std::vector<double>& u, std::vector<double>& z, double spacing,
                        double amplitude, double half_width, double offset) {
  size_t n = u.size();
  for (size_t i = 0; i < n; ++i) {
    double d = u[i] - offset;
    z[i] = (std::abs(d) < half_width)
               ? amplitude * 0.5 * (1.0 + std::cos(kPi * d / half_width))
               : 0.0;
  }
  std::vector<double> u2(n);
  u2[0] = u[0];
  for (size_t i = 1; i < n; ++i) {
    double dz = z[i] - z[i - 1];
    double run2 = spacing * spacing - dz * dz;
    u2[i] = u2[i - 1] + std::sqrt(std::max(run2, 0.01 * spacing * spacing));
  }
  // Keep the crest where it was asked for.
  size_t crest = 0;
  for (size_t i = 1; i < n; ++i)
    if (z[i] > z[crest]) crest = i;
  double shift = u[crest] - u2[crest];
  for (size_t i = 0; i < n; ++i) u[i] = u2[i] + shift;
}

}  // namespace harness_detail

// Deterministic per-trial cloth: jittered placement, optional wrinkle
// ripple or ridge (built in cloth-local coordinates), then settled.
inline ClothState build_trial_cloth(const Scenario& sc, uint64_t seed, int trial) {
  Rng rng(derive_seed(seed, fnv1a(sc.name.data(), sc.name.size()), trial));
  double dx = rng.uniform(-sc.pose.jitter_xy, sc.pose.jitter_xy);
  double dy = rng.uniform(-sc.pose.jitter_xy, sc.pose.jitter_xy);
  double dyaw = deg2rad(rng.uniform(-sc.pose.jitter_yaw_deg, sc.pose.jitter_yaw_deg));

  const ClothSpec& spec = sc.cloth;
  ClothPlacement place{{sc.pose.x + dx, sc.pose.y + dy}, sc.pose.yaw + dyaw};
  ClothState st = build_cloth(spec, ClothPlacement{{0.0, 0.0}, 0.0});

  // Local-frame perturbations before the rigid placement.
  if (sc.pose.ridge_amplitude > 0.0) {
    bool crest_along_y = sc.pose.ridge_axis == "y";
    int n_across = crest_along_y ? spec.nx : spec.ny;
    double spacing = crest_along_y ? spec.width_m / (spec.nx - 1)
                                   : spec.height_m / (spec.ny - 1);
    double extent = crest_along_y ? spec.width_m : spec.height_m;
    std::vector<double> u(n_across), z(n_across);
    for (int k = 0; k < n_across; ++k) u[k] = k * spacing - extent * 0.5;
    harness_detail::apply_ridge(u, z, spacing, sc.pose.ridge_amplitude,
                                sc.pose.ridge_half_width, sc.pose.ridge_offset);
    for (int iy = 0; iy < spec.ny; ++iy)
      for (int ix = 0; ix < spec.nx; ++ix) {
        int k = crest_along_y ? ix : iy;
        Vec3& p = st.positions[st.index(ix, iy)];
        if (crest_along_y) p.x = u[k];
        else p.y = u[k];
        p.z = z[k] + spec.rest_thickness;
      }
  }
  if (sc.pose.wrinkle_amplitude > 0.0) {
    Rng wr(derive_seed(seed, fnv1a(sc.name.data(), sc.name.size()), 1000 + trial));
    double phase1 = wr.uniform(0.0, 2.0 * kPi);
    double phase2 = wr.uniform(0.0, 2.0 * kPi);
    for (int iy = 0; iy < spec.ny; ++iy)
      for (int ix = 0; ix < spec.nx; ++ix) {
        Vec3& p = st.positions[st.index(ix, iy)];
        double u = static_cast<double>(ix) / (spec.nx - 1);
        double v = static_cast<double>(iy) / (spec.ny - 1);
        p.z += sc.pose.wrinkle_amplitude *
               std::sin(2.0 * kPi * sc.pose.wrinkle_waves * u + phase1) *
               std::cos(2.0 * kPi * sc.pose.wrinkle_waves * v + phase2);
      }
  }

  // Rigid placement.
  double cy = std::cos(place.yaw), sy = std::sin(place.yaw);
  for (auto& p : st.positions) {
    double x = p.x * cy - p.y * sy + place.origin.x;
    double y = p.x * sy + p.y * cy + place.origin.y;
    p.x = x;
    p.y = y;
  }

  return settle(st, sc.sim.settle_time, sc.sim.settle_tol, sc.sim.dt).state;
}

// ---------------------------------------------------------------------------
// Rows and aggregates

struct TrialRow {
  std::string scenario;
  int trial = 0;
  std::string task;
  std::string status = "ok";  // "ok" or "failed: reason"
  std::map<std::string, double> metrics;
  std::string lift_class;

  bool ok() const { return status == "ok"; }
};

inline const std::vector<std::string>& csv_metric_columns() {
  static const std::vector<std::string> cols = {
      "iou_1",          "wr_1",     "iou_2",       "wr_2",
      "drag_offset_m",  "peak_force_n", "max_z_pre", "max_z_post"};
  return cols;
}

struct ScenarioAggregate {
  int trials = 0;
  int valid = 0;
  std::map<std::string, double> means;  // mean_<metric> over valid rows carrying it
  std::map<std::string, int> lift_counts;  // perfect/half/fail
};

struct SuiteReport {
  std::vector<TrialRow> rows;
  std::map<std::string, ScenarioAggregate> aggregates;  // by scenario name
  uint64_t seed = 0;
  uint64_t config_hash = 0;
  std::string version = kVersion;
};

// Aggregates are computed from the 9-digit formatted row values so that
// recomputation from an emitted CSV reproduces them bit for bit.
inline void compute_aggregates(SuiteReport& report) {
  report.aggregates.clear();
  for (const auto& row : report.rows) {
    auto& agg = report.aggregates[row.scenario];
    agg.trials += 1;
    if (!row.ok()) continue;
    agg.valid += 1;
    if (!row.lift_class.empty()) agg.lift_counts[row.lift_class] += 1;
  }
  std::map<std::string, std::map<std::string, std::pair<double, int>>> acc;
  for (const auto& row : report.rows) {
    if (!row.ok()) continue;
    for (const auto& [k, v] : row.metrics) {
      double rounded = std::strtod(fmt_double(v).c_str(), nullptr);
      auto& slot = acc[row.scenario][k];
      slot.first += rounded;
      slot.second += 1;
    }
  }
  for (auto& [scen, metrics] : acc)
    for (auto& [k, sv] : metrics)
      report.aggregates[scen].means["mean_" + k] = sv.first / sv.second;
}

inline std::string suite_csv(const SuiteReport& report) {
  std::ostringstream os;
  os << "scenario,trial,task,status,lift_class";
  for (const auto& c : csv_metric_columns()) os << ',' << c;
  os << '\n';
  for (const auto& row : report.rows) {
    std::string status = row.status;
    for (char& ch : status)
      if (ch == ',' || ch == '\n') ch = ';';
    os << row.scenario << ',' << row.trial << ',' << row.task << ',' << status << ','
       << row.lift_class;
    for (const auto& c : csv_metric_columns()) {
      os << ',';
      auto it = row.metrics.find(c);
      if (it != row.metrics.end()) os << fmt_double(it->second);
    }
    os << '\n';
  }
  return os.str();
}

inline std::string suite_json(const SuiteReport& report) {
  char hashbuf[17];
  std::snprintf(hashbuf, sizeof(hashbuf), "%016llx",
                static_cast<unsigned long long>(report.config_hash));
  std::ostringstream os;
  os << "{\n";
  os << "  \"version\": \"" << report.version << "\",\n";
  os << "  \"seed\": " << report.seed << ",\n";
  os << "  \"config_hash\": \"" << hashbuf << "\",\n";
  os << "  \"scenarios\": [\n";
  bool first = true;
  for (const auto& [name, agg] : report.aggregates) {
    if (!first) os << ",\n";
    first = false;
    os << "    {\"name\": \"" << name << "\", \"trials\": " << agg.trials
       << ", \"valid\": " << agg.valid;
    for (const auto& [k, v] : agg.means) os << ", \"" << k << "\": " << fmt_double(v);
    for (const char* cls : {"perfect", "half", "fail"}) {
      auto it = agg.lift_counts.find(cls);
      if (it != agg.lift_counts.end())
        os << ", \"lift_" << cls << "\": " << it->second;
    }
    os << "}";
  }
  os << "\n  ]\n}\n";
  return os.str();
}

// ---------------------------------------------------------------------------
// Task pipelines

namespace harness_detail {

inline ExecuteOptions exec_options(const Scenario& sc, bool keep_snapshots) {
  ExecuteOptions opts;
  opts.sim_dt = sc.sim.dt;
  opts.report_rate = sc.sim.report_rate;
  opts.keep_snapshots = keep_snapshots;
  opts.mask_scale = sc.sim.mask_scale;
  opts.settle_time = sc.sim.settle_time;
  opts.settle_tol = sc.sim.settle_tol;
  return opts;
}

// Mean position of the particles forming the leading edge along `dir`.
inline Vec2 leading_edge_midpoint(const ClothState& cloth, const Vec2& dir) {
  double maxp = -1e30;
  for (const auto& p : cloth.positions) maxp = std::max(maxp, p.xy().dot(dir));
  Vec2 sum{};
  int n = 0;
  for (const auto& p : cloth.positions)
    if (p.xy().dot(dir) >= maxp - 0.02) {
      sum = sum + p.xy();
      ++n;
    }
  return sum * (1.0 / n);
}

struct TrialArtifacts {
  std::vector<std::pair<std::string, BinaryMask>> masks;  // name suffix -> mask
  std::vector<EpisodeReport> episodes;
};

inline TrialRow run_trial(const Scenario& sc, uint64_t seed, int trial,
                          bool keep_snapshots, TrialArtifacts* artifacts) {
  TrialRow row;
  row.scenario = sc.name;
  row.trial = trial;
  row.task = to_string(sc.task);

  try {
    ClothState cloth = build_trial_cloth(sc, seed, trial);
    ExecuteOptions opts = exec_options(sc, keep_snapshots);

    switch (sc.task) {
      case TaskType::Fold: {
        auto reports =
            auto_fold(cloth, sc.params.fold_direction, sc.params.n_folds, sc.gripper,
                      sc.planner, opts, sc.sim.corner_epsilon, sc.sim.corner_min_turn_deg);
        for (size_t k = 0; k < reports.size(); ++k) {
          EpisodeReport& rep = reports[k];
          std::string idx = std::to_string(k + 1);
          if (rep.failed) {
            row.status = "failed: fold " + idx + ": " + rep.failure_reason;
            break;
          }
          BinaryMask gt = generate_fold_ground_truth(rep.pre_mask, rep.fold_line);
          double fold_iou = iou(gt, rep.post_mask);
          GrayImage shaded = render_shaded(rep.final_cloth, opts.mask_scale);
          double wr = wrinkle_penalty(shaded, rep.post_mask);
          rep.metrics["iou"] = fold_iou;
          rep.metrics["wr"] = wr;
          row.metrics["iou_" + idx] = fold_iou;
          row.metrics["wr_" + idx] = wr;
          if (artifacts) {
            artifacts->masks.push_back({"fold" + idx + "_pre", rep.pre_mask});
            artifacts->masks.push_back({"fold" + idx + "_post", rep.post_mask});
            artifacts->masks.push_back({"fold" + idx + "_gt", gt});
          }
        }
        if (row.ok() && static_cast<int>(reports.size()) < sc.params.n_folds)
          row.status = "failed: fold pipeline stopped early";
        if (artifacts)
          for (auto& rep : reports) artifacts->episodes.push_back(std::move(rep));
        break;
      }
      case TaskType::Drag: {
        Vec2 dir = sc.params.drag_direction.normalized();
        Vec2 edge = leading_edge_midpoint(cloth, dir);
        BinaryMask pre = rasterize_mask(cloth, opts.mask_scale);
        double pre_offset = drag_offset(pre, {edge, dir});
        Line2 alignment{edge + dir * (pre_offset + sc.params.drag_distance), dir};

        Trajectory traj = plan_drag(edge, dir, sc.params.drag_distance, sc.gripper,
                                    sc.planner);
        GripperState grip;
        grip.params = sc.gripper;
        opts.task = "drag";
        EpisodeReport rep = execute(traj, cloth, grip, opts);
        if (rep.failed) {
          row.status = "failed: " + rep.failure_reason;
        } else {
          auto settled = settle(rep.final_cloth, sc.sim.settle_time, sc.sim.settle_tol,
                                sc.sim.dt);
          rep.final_cloth = settled.state;
          rep.post_mask = rasterize_mask(settled.state, opts.mask_scale);
          double off = drag_offset(rep.post_mask, alignment);
          rep.metrics["drag_offset_m"] = off;
          row.metrics["drag_offset_m"] = off;
          if (artifacts) {
            artifacts->masks.push_back({"pre", rep.pre_mask});
            artifacts->masks.push_back({"post", rep.post_mask});
          }
        }
        if (artifacts) artifacts->episodes.push_back(std::move(rep));
        break;
      }
      case TaskType::Lift: {
        BinaryMask mask = rasterize_mask(cloth, opts.mask_scale);
        Polygon contour = extract_contour(mask);
        CornerSet corners =
            detect_corners(contour, sc.sim.corner_epsilon, sc.sim.corner_min_turn_deg);
        GraspSelection sel = select_grasp_corners(
            corners, sc.params.lift_direction, sc.gripper.width_min, sc.gripper.width_max);
        Trajectory traj = plan_lift(sel.p1, sel.p2, sc.params.lift_height,
                                    sc.params.lift_hold, sc.gripper, sc.planner);
        GripperState grip;
        grip.params = sc.gripper;
        opts.task = "lift";
        EpisodeReport rep = execute(traj, cloth, grip, opts);
        if (rep.failed) {
          row.status = "failed: " + rep.failure_reason;
        } else {
          LiftClass cls = classify_lift(rep);
          rep.lift_class = to_string(cls);
          row.lift_class = to_string(cls);
        }
        if (artifacts) artifacts->episodes.push_back(std::move(rep));
        break;
      }
      case TaskType::Flatten: {
        Vec2 dir = sc.params.slide_direction.normalized();
        double max_z_pre = 0.0;
        Vec2 crest{};
        for (const auto& p : cloth.positions)
          if (p.z > max_z_pre) {
            max_z_pre = p.z;
            crest = p.xy();
          }
        Vec2 grasp_point = crest - dir * (sc.params.slide_length * 0.5);
        Trajectory traj = plan_flatten(grasp_point, dir, sc.params.slide_length,
                                       sc.gripper, sc.planner);
        GripperState grip;
        grip.params = sc.gripper;
        opts.task = "flatten";
        EpisodeReport rep = execute(traj, cloth, grip, opts);
        if (rep.failed) {
          row.status = "failed: " + rep.failure_reason;
        } else {
          auto settled = settle(rep.final_cloth, sc.sim.settle_time, sc.sim.settle_tol,
                                sc.sim.dt);
          rep.final_cloth = settled.state;
          rep.post_mask = rasterize_mask(settled.state, opts.mask_scale);
          double max_z_post = 0.0;
          for (const auto& p : rep.final_cloth.positions)
            max_z_post = std::max(max_z_post, p.z);
          rep.metrics["max_z_pre"] = max_z_pre;
          rep.metrics["max_z_post"] = max_z_post;
          row.metrics["max_z_pre"] = max_z_pre;
          row.metrics["max_z_post"] = max_z_post;
        }
        if (artifacts) artifacts->episodes.push_back(std::move(rep));
        break;
      }
      case TaskType::Payload: {
        Vec2 dir{1.0, 0.0};  // pull along the cloth's local +x, rotated by pose
        double cy = std::cos(sc.pose.yaw), sy = std::sin(sc.pose.yaw);
        dir = Vec2{cy, sy};
        // Anchor the trailing edge (local -x column).
        std::vector<int> anchors;
        for (int iy = 0; iy < cloth.ny; ++iy) anchors.push_back(cloth.index(0, iy));
        Vec2 edge = leading_edge_midpoint(cloth, dir);

        GripperState grip;
        grip.params = sc.gripper;
        grip.tool_pose =
            Pose{{edge.x, edge.y, sc.planner.grasp_z}, 0.0, 0.0, detail::yaw_for_slide(dir)};
        grip.width = sc.gripper.width_min;
        grip = command_torque(grip, Finger::Left, sc.params.grasp_torque);
        grip = command_torque(grip, Finger::Right, sc.params.grasp_torque);
        grip = attempt_sliding_grasp(grip, Finger::Left, cloth).gripper;
        grip = attempt_sliding_grasp(grip, Finger::Right, cloth).gripper;

        PayloadOptions popts;
        popts.pull_direction = {dir.x, dir.y, 0.0};
        popts.speed = sc.params.pull_speed;
        popts.dt = sc.sim.dt;
        double peak = payload_pull(cloth, grip, anchors, sc.params.max_force, popts);
        row.metrics["peak_force_n"] = peak;
        break;
      }
    }
  } catch (const Error& e) {
    row.status = std::string("failed: ") + e.what();
  }
  return row;
}

}  // namespace harness_detail

// ---------------------------------------------------------------------------
// Frame rendering

// Shaded top-down images of the retained snapshots with a jaw overlay;
// filenames zero-padded by frame index. A stride beyond the frame count
// still yields the first frame.
inline std::vector<std::string> render_frames(const EpisodeReport& report, int stride,
                                              const std::string& out_dir,
                                              const GripperParams& gp, double scale) {
  namespace fs = std::filesystem;
  if (report.snapshots.empty()) return {};
  if (stride < 1) stride = 1;
  fs::create_directories(out_dir);

  std::vector<std::string> written;
  for (size_t fi = 0; fi < report.frames.size(); fi += stride) {
    const FrameRecord& fr = report.frames[fi];
    if (fr.snapshot_index < 0 ||
        fr.snapshot_index >= static_cast<int>(report.snapshots.size()))
      continue;
    GrayImage img = render_shaded(report.snapshots[fr.snapshot_index], scale);

    // Jaw overlay: capture-box outline per finger, drawn bright.
    GripperState g;
    g.params = gp;
    g.tool_pose = fr.tool_pose;
    g.width = fr.width;
    for (Finger f : {Finger::Left, Finger::Right}) {
      Pose jaw = g.jaw_pose(f);
      double hx = gp.capture_box_x * 0.5, hy = gp.capture_box_y * 0.5;
      Vec3 cs[4] = {{-hx, -hy, 0.0}, {hx, -hy, 0.0}, {hx, hy, 0.0}, {-hx, hy, 0.0}};
      for (int e = 0; e < 4; ++e) {
        Vec3 a = jaw.to_world(cs[e]);
        Vec3 b = jaw.to_world(cs[(e + 1) % 4]);
        int n = std::max(2, static_cast<int>((b - a).norm() / (scale * 0.5)));
        for (int s = 0; s <= n; ++s) {
          Vec3 p = lerp(a, b, static_cast<double>(s) / n);
          auto [i, j] = BinaryMask{img.width_px, img.height_px, img.scale, img.origin}
                            .world_to_pixel(p.xy());
          if (i >= 0 && i < img.width_px && j >= 0 && j < img.height_px)
            img.ref(i, j) = 1.0;
        }
      }
    }

    char name[64];
    std::snprintf(name, sizeof(name), "frame_%06zu.pgm", fi);
    std::string path = (fs::path(out_dir) / name).string();
    write_pgm(path, img);
    written.push_back(path);
  }
  return written;
}

// ---------------------------------------------------------------------------
// Suite runner

struct SuiteOptions {
  std::string out_dir;
  uint64_t seed = 0;
  bool frames = false;
  int frame_stride = 10;
  int jobs = 1;
};

inline SuiteReport run_suite(const std::vector<Scenario>& scenarios,
                             const SuiteOptions& opts) {
  namespace fs = std::filesystem;
  if (scenarios.empty()) throw ValidationError("run_suite: no scenarios");
  bool write_files = !opts.out_dir.empty();
  if (write_files) {
    fs::create_directories(opts.out_dir);
    fs::create_directories(fs::path(opts.out_dir) / "masks");
    fs::create_directories(fs::path(opts.out_dir) / "episodes");
  }

  struct Job {
    const Scenario* scenario;
    int trial;
  };
  std::vector<Job> jobs;
  for (const auto& sc : scenarios)
    for (int t = 0; t < sc.trials; ++t) jobs.push_back({&sc, t});

  SuiteReport report;
  report.seed = opts.seed;
  report.version = kVersion;
  uint64_t h = fnv1a(nullptr, 0);
  for (const auto& sc : scenarios) {
    std::string cfg = emit_config(sc);
    h = fnv1a(cfg.data(), cfg.size(), h);
  }
  report.config_hash = h;
  report.rows.resize(jobs.size());

  auto run_job = [&](size_t idx) {
    const Job& job = jobs[idx];
    const Scenario& sc = *job.scenario;
    harness_detail::TrialArtifacts artifacts;
    TrialRow row = harness_detail::run_trial(sc, opts.seed, job.trial, opts.frames,
                                             write_files ? &artifacts : nullptr);
    if (write_files) {
      std::string stem = sc.name + "_t" + std::to_string(job.trial);
      for (const auto& [suffix, mask] : artifacts.masks) {
        write_pgm((fs::path(opts.out_dir) / "masks" / (stem + "_" + suffix + ".pgm")).string(),
                  mask);
        write_png((fs::path(opts.out_dir) / "masks" / (stem + "_" + suffix + ".png")).string(),
                  mask);
      }
      for (size_t e = 0; e < artifacts.episodes.size(); ++e) {
        const EpisodeReport& rep = artifacts.episodes[e];
        std::string name = stem + "_e" + std::to_string(e) + ".txt";
        std::ofstream f(fs::path(opts.out_dir) / "episodes" / name, std::ios::binary);
        f << to_text(rep);
        if (opts.frames && !rep.snapshots.empty()) {
          std::string frame_dir =
              (fs::path(opts.out_dir) / "frames" / (stem + "_e" + std::to_string(e)))
                  .string();
          render_frames(rep, opts.frame_stride, frame_dir, sc.gripper, sc.sim.mask_scale);
        }
      }
    }
    report.rows[idx] = std::move(row);
  };

  int nthreads = std::max(1, opts.jobs);
  if (nthreads == 1) {
    for (size_t i = 0; i < jobs.size(); ++i) run_job(i);
  } else {
    std::atomic<size_t> cursor{0};
    std::vector<std::thread> pool;
    for (int w = 0; w < nthreads; ++w)
      pool.emplace_back([&] {
        for (;;) {
          size_t i = cursor.fetch_add(1);
          if (i >= jobs.size()) return;
          run_job(i);
        }
      });
    for (auto& th : pool) th.join();
  }

  compute_aggregates(report);

  if (write_files) {
    {
      std::ofstream f(fs::path(opts.out_dir) / "rows.csv", std::ios::binary);
      f << suite_csv(report);
    }
    {
      std::ofstream f(fs::path(opts.out_dir) / "report.json", std::ios::binary);
      f << suite_json(report);
    }
  }
  return report;
}

// Reload an emitted CSV and verify the emitted aggregates match a
// recomputation from the rows.
inline SuiteReport load_suite_report(const std::string& out_dir) {
  namespace fs = std::filesystem;
  std::ifstream f(fs::path(out_dir) / "rows.csv", std::ios::binary);
  if (!f) throw ParseError("cannot open " + out_dir + "/rows.csv");
  SuiteReport report;
  std::string line;
  if (!std::getline(f, line)) throw ParseError("rows.csv: empty");
  std::vector<std::string> header;
  {
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) header.push_back(cell);
  }
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::vector<std::string> cells;
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    cells.resize(header.size());
    TrialRow row;
    for (size_t k = 0; k < header.size(); ++k) {
      const std::string& col = header[k];
      const std::string& v = cells[k];
      if (col == "scenario") row.scenario = v;
      else if (col == "trial") row.trial = v.empty() ? 0 : std::stoi(v);
      else if (col == "task") row.task = v;
      else if (col == "status") row.status = v;
      else if (col == "lift_class") row.lift_class = v;
      else if (!v.empty()) row.metrics[col] = std::strtod(v.c_str(), nullptr);
    }
    report.rows.push_back(std::move(row));
  }

  compute_aggregates(report);

  // Cross-check against the emitted aggregate report.
  std::ifstream jf(fs::path(out_dir) / "report.json", std::ios::binary);
  if (jf) {
    std::ostringstream ss;
    ss << jf.rdbuf();
    std::string emitted = ss.str();
    for (const auto& [name, agg] : report.aggregates) {
      for (const auto& [k, v] : agg.means) {
        std::string expect = "\"" + k + "\": " + fmt_double(v);
        if (emitted.find(expect) == std::string::npos)
          throw Error("suite report aggregate mismatch for " + name + "." + k +
                      " (expected " + expect + ")");
      }
    }
  }
  return report;
}

}  // namespace clothbench
