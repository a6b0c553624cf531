// Batch driver around the header-only library: synthesizes datasets, runs
// the filter over a dataset bundle, and scores trajectories against ground
// truth. See --help of each subcommand for the file formats involved.
#include <chrono>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "linevio/eval/metrics.hpp"
#include "linevio/io/config.hpp"
#include "linevio/io/formats.hpp"
#include "linevio/pipeline/runner.hpp"
#include "linevio/sim/scenario.hpp"

namespace linevio {
namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitDiverged = 2;

// ---------------------------------------------------------------------------
// Scenario spec file (JSON). Schema:
//   {
//     "scenario": "circle" | "sinusoid-3d" | "hover",   required
//     "duration_s": 60.0,                               required, > 0
//     "seed": 1,                                        optional
//     "imu_rate_hz": 200,                               optional
//     "cam_rate_hz": 20,                                optional
//     "sigma_px": 1.5,                                  optional, >= 0
//     "noise.sigma_g": 1.7e-4, "noise.sigma_a": 2e-3,   optional, >= 0
//     "noise.sigma_bg": 0.0,   "noise.sigma_ba": 0.0,   optional, >= 0
//     "lines": [[x1,y1,z1,x2,y2,z2], ...]               optional; default map
//   }

ScenarioSpec parseScenarioSpec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path, 0, "cannot open file for reading");
  nlohmann::json js;
  try {
    js = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(path, 0, std::string("invalid JSON: ") + e.what());
  }
  if (!js.is_object()) throw ParseError(path, 0, "spec must be an object");

  const nlohmann::json& kind = detail::requireKey(path, js, "scenario");
  if (!kind.is_string()) {
    throw ParseError(path, 0, "key 'scenario' must be a string");
  }
  ScenarioSpec spec;
  try {
    spec.kind = parseScenarioKind(kind.get<std::string>());
  } catch (const std::invalid_argument& e) {
    throw ParseError(path, 0, e.what());
  }
  spec.duration_s = detail::configNumber(path, js, "duration_s");
  if (!(spec.duration_s > 0)) {
    throw ParseError(path, 0, "key 'duration_s' must be positive");
  }
  if (js.contains("seed")) {
    const nlohmann::json& s = js.at("seed");
    if (!s.is_number_unsigned()) {
      throw ParseError(path, 0, "key 'seed' must be a non-negative integer");
    }
    spec.seed = s.get<std::uint64_t>();
  }
  if (js.contains("imu_rate_hz")) {
    spec.imu_rate_hz = detail::configInt(path, js, "imu_rate_hz");
  }
  if (js.contains("cam_rate_hz")) {
    spec.cam_rate_hz = detail::configInt(path, js, "cam_rate_hz");
  }
  if (spec.imu_rate_hz < 1 || spec.cam_rate_hz < 1 ||
      spec.imu_rate_hz % spec.cam_rate_hz != 0) {
    throw ParseError(path, 0,
                     "rates must be positive and imu_rate_hz a multiple of "
                     "cam_rate_hz");
  }
  if (js.contains("sigma_px")) {
    spec.sigma_px = detail::configNumber(path, js, "sigma_px");
  }
  for (auto [key, target] :
       {std::pair<const char*, double*>{"noise.sigma_g", &spec.noise.sigma_g},
        {"noise.sigma_a", &spec.noise.sigma_a},
        {"noise.sigma_bg", &spec.noise.sigma_bg},
        {"noise.sigma_ba", &spec.noise.sigma_ba}}) {
    if (js.contains(key)) *target = detail::configNumber(path, js, key);
  }
  if (spec.sigma_px < 0 || spec.noise.sigma_g < 0 || spec.noise.sigma_a < 0 ||
      spec.noise.sigma_bg < 0 || spec.noise.sigma_ba < 0) {
    throw ParseError(path, 0, "noise values must be non-negative");
  }
  if (js.contains("lines")) {
    const nlohmann::json& arr = js.at("lines");
    if (!arr.is_array() || arr.empty()) {
      throw ParseError(path, 0, "key 'lines' must be a non-empty array");
    }
    spec.lines.clear();
    for (const nlohmann::json& row : arr) {
      if (!row.is_array() || row.size() != 6) {
        throw ParseError(path, 0,
                         "each entry of 'lines' must be an array of 6 "
                         "numbers [x1,y1,z1,x2,y2,z2]");
      }
      Vec3 a, b;
      for (int i = 0; i < 3; ++i) {
        if (!row.at(i).is_number() || !row.at(i + 3).is_number()) {
          throw ParseError(path, 0, "'lines' entries must contain numbers");
        }
        a(i) = row.at(i).get<double>();
        b(i) = row.at(i + 3).get<double>();
      }
      if ((a - b).norm() < 1e-9) {
        throw ParseError(path, 0, "'lines' entry has identical endpoints");
      }
      spec.lines.push_back(LineEndpoints{a, b});
    }
  }
  return spec;
}

// ---------------------------------------------------------------------------

int cmdSimulate(const std::string& spec_path, const std::string& out_dir,
                std::int64_t seed_override) {
  ScenarioSpec spec = parseScenarioSpec(spec_path);
  if (seed_override >= 0) spec.seed = (std::uint64_t)seed_override;

  const auto imu = synthesizeImu(spec);
  const auto tracks = synthesizeTracks(spec);
  const auto gt = groundTruth(spec);

  PipelineConfig cfg;
  cfg.camera = spec.camera;
  cfg.noise = spec.noise;
  cfg.sigma_px = spec.sigma_px;

  writeImuCsv(out_dir + "/imu.csv", imu);
  writeLineTracks(out_dir + "/tracks.csv", tracks);
  writeTrajectoryCsv(out_dir + "/groundtruth.csv", gt);
  writeConfig(out_dir + "/config.json", cfg);
  std::cout << "wrote " << imu.size() << " IMU samples, " << tracks.size()
            << " track rows to " << out_dir << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------

void writeDiagnosticsCsv(const std::string& path,
                         const std::vector<FrameDiagnostic>& frames) {
  std::ofstream out = detail::openForWrite(path);
  out << "#t_ns,active_lines,lines_used,lines_gated,augmented,removed,"
         "had_batch,update_applied,trace_P,nees\n";
  for (const FrameDiagnostic& d : frames) {
    out << d.t << ',' << d.active_lines << ',' << d.lines_used << ','
        << d.lines_gated << ',' << d.augmented << ',' << d.removed << ','
        << (d.had_batch ? 1 : 0) << ',' << (d.update_applied ? 1 : 0) << ','
        << detail::numberToString(d.trace_P) << ',' << detail::numberToString(d.nees) << '\n';
  }
  if (!out) throw ParseError(path, 0, "write failed");
}

int cmdRun(const std::string& dataset_dir, const std::string& out_dir,
           int max_lines, double sigma_px, double gate_chi2, bool no_update) {
  PipelineConfig cfg = parseConfig(dataset_dir + "/config.json");
  // command-line overrides shadow the config file
  if (max_lines > 0) cfg.filter.max_lines = max_lines;
  if (sigma_px > 0) cfg.sigma_px = sigma_px;
  if (gate_chi2 >= 0) cfg.filter.gate_chi2 = gate_chi2;

  const auto imu = parseImuCsv(dataset_dir + "/imu.csv");
  const auto tracks = parseLineTracks(dataset_dir + "/tracks.csv",
                                      cfg.camera.width, cfg.camera.height);
  std::vector<TrajectoryRecord> gt;
  {
    std::ifstream probe(dataset_dir + "/groundtruth.csv");
    if (probe.good()) {
      gt = parseTrajectoryCsv(dataset_dir + "/groundtruth.csv");
    }
  }

  const auto t0 = std::chrono::steady_clock::now();
  const RunResult run = runPipeline(imu, tracks, cfg, gt, !no_update);
  const double runtime_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();

  writeTrajectoryCsv(out_dir + "/trajectory.csv", run.trajectory);
  writeDiagnosticsCsv(out_dir + "/diagnostics.csv", run.frames);
  if (!gt.empty()) {
    RunMetrics m;
    m.rmse_pos_m = positionRmse(run.trajectory, gt);
    m.rmse_att_rad = attitudeRmse(run.trajectory, gt);
    m.nees_mean = run.stats.nees_mean;
    m.runtime_s = runtime_s;
    writeMetrics(out_dir + "/metrics.json", m);
  }

  if (run.diverged) {
    std::cerr << "filter diverged: " << run.note
              << " (wrote last good state up to that point)\n";
    return kExitDiverged;
  }
  for (const TrajectoryRecord& r : run.trajectory) {
    if (!r.p.allFinite() || !r.v.allFinite() || !r.R.allFinite()) {
      std::cerr << "non-finite state in output trajectory\n";
      return kExitDiverged;
    }
  }
  // Divergence guard, not a consistency test: the per-line gate is a 95%
  // chi-square test, so a healthy filter already rejects ~5% of single-line
  // batches outright. Only a collapse well below that false-rejection floor
  // indicates the filter has lost the measurements.
  if (!no_update && run.stats.frames_with_batch > 0) {
    const double applied = (double)run.stats.updates_applied /
                           (double)run.stats.frames_with_batch;
    if (applied < 0.80) {
      std::cerr << "only " << 100.0 * applied
                << "% of measurement batches were applied (gating rejected "
                   "the rest); treating the run as unhealthy\n";
      return kExitDiverged;
    }
  }
  std::cout << "processed " << run.stats.frames << " frames, applied "
            << run.stats.updates_applied << " updates in " << runtime_s
            << " s\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------

int cmdEval(const std::string& est_path, const std::string& gt_path,
            const std::string& out_path) {
  const auto est = parseTrajectoryCsv(est_path);
  const auto gt = parseTrajectoryCsv(gt_path);
  const auto pairs = alignByTimestamp(est, gt);
  if (pairs.empty()) {
    throw ParseError(est_path, 0,
                     "no timestamps overlap with " + gt_path);
  }

  RunMetrics m;
  m.rmse_pos_m = positionRmse(est, gt);
  m.rmse_att_rad = attitudeRmse(est, gt);
  m.nees_mean = 0.0;   // not computable from trajectories alone
  m.runtime_s = 0.0;   // evaluation is offline
  writeMetrics(out_path, m);

  // per-timestamp errors for external plotting, next to the metrics file
  std::string err_path = out_path;
  const size_t dot = err_path.rfind('.');
  err_path = err_path.substr(0, dot == std::string::npos ? err_path.size()
                                                         : dot) +
             "_errors.csv";
  std::ofstream out = detail::openForWrite(err_path);
  out << "#t_ns,pos_err_m,att_err_rad\n";
  for (const auto& [ei, gi] : pairs) {
    const double pe = (est[ei].p - gt[gi].p).norm();
    const Mat3 dR = est[ei].R.transpose() * gt[gi].R;
    const double ae = so3Log(orthonormalized(dR)).norm();
    out << est[ei].t << ',' << detail::numberToString(pe) << ','
        << detail::numberToString(ae) << '\n';
  }
  if (!out) throw ParseError(err_path, 0, "write failed");

  std::cout << "rmse_pos_m " << m.rmse_pos_m << "  rmse_att_rad "
            << m.rmse_att_rad << "  over " << pairs.size() << " stamps\n";
  return kExitOk;
}

}  // namespace
}  // namespace linevio

int main(int argc, char** argv) {
  CLI::App app{
      "Visual-inertial line odometry: dataset synthesis, filtering, and "
      "trajectory evaluation"};
  app.require_subcommand(1);

  std::string spec_path, sim_out;
  std::int64_t seed_override = -1;
  CLI::App* sim = app.add_subcommand(
      "simulate", "Synthesize a dataset bundle from a scenario spec");
  sim->add_option("spec", spec_path, "scenario spec JSON")->required();
  sim->add_option("out_dir", sim_out, "output directory (must exist)")
      ->required();
  sim->add_option("--seed", seed_override,
                  "override the seed in the spec file");

  std::string dataset_dir, run_out;
  int max_lines = -1;
  double sigma_px = -1.0, gate_chi2 = -1.0;
  bool no_update = false;
  CLI::App* run = app.add_subcommand(
      "run", "Run the filter over a dataset bundle");
  run->add_option("dataset_dir", dataset_dir,
                  "directory with config.json, imu.csv, tracks.csv and "
                  "optionally groundtruth.csv")
      ->required();
  run->add_option("out_dir", run_out, "output directory (must exist)")
      ->required();
  run->add_option("--max-lines", max_lines, "override filter.max_lines");
  run->add_option("--sigma-px", sigma_px, "override noise.sigma_px");
  run->add_option("--gate-chi2", gate_chi2, "override filter.gate_chi2");
  run->add_flag("--no-update", no_update,
                "disable measurement updates (pure IMU dead reckoning)");

  std::string est_path, gt_path, metrics_out;
  CLI::App* ev = app.add_subcommand(
      "eval", "Score an estimated trajectory against ground truth");
  ev->add_option("estimate", est_path, "estimated trajectory CSV")
      ->required();
  ev->add_option("groundtruth", gt_path, "ground-truth trajectory CSV")
      ->required();
  ev->add_option("out", metrics_out, "metrics JSON to write "
                 "(a *_errors.csv lands next to it)")
      ->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (sim->parsed()) {
      return linevio::cmdSimulate(spec_path, sim_out, seed_override);
    }
    if (run->parsed()) {
      return linevio::cmdRun(dataset_dir, run_out, max_lines, sigma_px,
                             gate_chi2, no_update);
    }
    return linevio::cmdEval(est_path, gt_path, metrics_out);
  } catch (const linevio::ParseError& e) {
    std::cerr << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
