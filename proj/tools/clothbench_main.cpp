// clothbench command line: run benchmark suites, score masks, replay
// recorded trajectories, and print the config schema defaults.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "clothbench/harness.hpp"
#include "clothbench/image_io.hpp"
#include "clothbench/metrics.hpp"
#include "clothbench/scenario.hpp"

namespace fs = std::filesystem;
using namespace clothbench;

namespace {

bool looks_like_scenario(const std::string& text) {
  std::istringstream is(text);
  std::string line;
  while (std::getline(is, line)) {
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    std::string key = config_detail::trim(line.substr(0, eq));
    if (key == "task") return true;
  }
  return false;
}

// A suite file lists scenario paths (one per line, relative to itself);
// a file containing `task = ...` is taken as a single scenario.
std::vector<Scenario> load_suite(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ParseError("cannot open " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  std::string text = ss.str();

  std::vector<Scenario> scenarios;
  if (looks_like_scenario(text)) {
    scenarios.push_back(parse_scenario(text, path));
    return scenarios;
  }
  std::istringstream is(text);
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = config_detail::trim(line);
    if (line.empty()) continue;
    fs::path p = fs::path(path).parent_path() / line;
    if (!fs::exists(p))
      throw ParseError(path + ":" + std::to_string(lineno) + ": scenario file not found: " +
                       p.string());
    scenarios.push_back(load_scenario(p.string()));
  }
  if (scenarios.empty()) throw ParseError(path + ": no scenarios listed");
  return scenarios;
}

Line2 parse_line_arg(const std::string& arg) {
  std::istringstream ss(arg);
  Line2 line;
  if (!(ss >> line.point.x >> line.point.y >> line.normal.x >> line.normal.y))
    throw ParseError("--fold-line expects 'px py nx ny'");
  line.normal = line.normal.normalized();
  if (line.normal.norm() < 0.5) throw ParseError("--fold-line normal must be nonzero");
  return line;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"clothbench: deterministic cloth-manipulation benchmark"};
  app.require_subcommand(1);

  // run
  auto* run = app.add_subcommand("run", "run a suite or scenario file");
  std::string run_file, run_out;
  uint64_t run_seed = 0;
  bool run_frames = false;
  int run_jobs = 1;
  run->add_option("suite", run_file, "suite file or scenario config")->required();
  run->add_option("--out", run_out, "output directory");
  run->add_option("--seed", run_seed, "master seed (default 0)");
  run->add_flag("--frames", run_frames, "render per-frame images");
  run->add_option("--jobs", run_jobs, "parallel trials (default 1)");

  // score
  auto* score = app.add_subcommand("score", "score a fold from mask images");
  std::string score_pre, score_post, score_line;
  double score_scale = 0.002;
  score->add_option("pre", score_pre, "pre-fold mask (P5 graymap)")->required();
  score->add_option("post", score_post, "post-fold mask (P5 graymap)")->required();
  score->add_option("--fold-line", score_line,
                    "fold line 'px py nx ny' in meters (normal at the moving half)")
      ->required();
  score->add_option("--scale", score_scale, "meters per pixel (default 0.002)");

  // replay
  auto* replay = app.add_subcommand("replay", "replay a recorded trajectory");
  std::string replay_file, replay_scenario, replay_out;
  replay->add_option("trajectory", replay_file, "trajectory text file")->required();
  replay->add_option("--scenario", replay_scenario, "scenario config for the cloth");
  replay->add_option("--out", replay_out, "write the episode report here");

  // config
  auto* config = app.add_subcommand("config", "config schema utilities");
  bool config_defaults = false;
  config->add_flag("--defaults", config_defaults, "print all default values");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      auto scenarios = load_suite(run_file);
      SuiteOptions opts;
      opts.out_dir = run_out;
      opts.seed = run_seed;
      opts.frames = run_frames;
      opts.jobs = run_jobs;
      SuiteReport report = run_suite(scenarios, opts);
      std::cout << suite_csv(report);
      bool all_ok = true;
      for (const auto& row : report.rows) all_ok = all_ok && row.ok();
      if (!run_out.empty())
        std::cout << "# wrote " << run_out << "/rows.csv and report.json\n";
      return all_ok ? 0 : 1;
    }
    if (score->parsed()) {
      GrayImage pre_img = read_pgm(score_pre);
      GrayImage post_img = read_pgm(score_post);
      BinaryMask pre = mask_from_gray(pre_img, score_scale);
      BinaryMask post = mask_from_gray(post_img, score_scale);
      Line2 line = parse_line_arg(score_line);
      BinaryMask gt = generate_fold_ground_truth(pre, line);
      std::cout << "iou_vs_ground_truth " << fmt_double(iou(gt, post)) << "\n";
      std::cout << "iou_pre_post " << fmt_double(iou(pre, post)) << "\n";
      std::cout << "pre_area_m2 " << fmt_double(pre.occupied_area()) << "\n";
      std::cout << "post_area_m2 " << fmt_double(post.occupied_area()) << "\n";
      return 0;
    }
    if (replay->parsed()) {
      Trajectory traj = load_trajectory(replay_file);
      Scenario sc;
      if (!replay_scenario.empty()) {
        sc = load_scenario(replay_scenario);
      } else {
        sc.task = TaskType::Fold;
        sc.params.n_folds = 1;
      }
      ClothState cloth = build_trial_cloth(sc, 0, 0);
      GripperState grip;
      grip.params = sc.gripper;
      ExecuteOptions opts;
      opts.sim_dt = sc.sim.dt;
      opts.report_rate = sc.sim.report_rate;
      opts.mask_scale = sc.sim.mask_scale;
      opts.task = "replay";
      EpisodeReport rep = execute(traj, cloth, grip, opts);
      std::string text = to_text(rep);
      if (replay_out.empty()) {
        std::cout << text;
      } else {
        std::ofstream f(replay_out, std::ios::binary);
        f << text;
      }
      return rep.failed ? 1 : 0;
    }
    if (config->parsed()) {
      if (config_defaults) {
        std::cout << default_config_text();
      } else {
        std::cout << "use --defaults to print the full default config\n";
      }
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
