#pragma once

#include <fstream>
#include <string>

#include <json.hpp>

#include "linevio/geom/camera.hpp"
#include "linevio/imu/model.hpp"
#include "linevio/io/formats.hpp"
#include "linevio/lie/so3.hpp"

namespace linevio {

/// Filter behaviour knobs exposed through the config file.
struct FilterTunables {
  int max_lines = 20;
  double init_sigma_line = 0.15;
  double init_sigma_line_max = 0.40;
  double gate_chi2 = 5.991;
  double min_baseline_m = 0.5;
  int miss_frames_drop = 10000;
};

/// Everything a pipeline run needs besides the data files themselves.
struct PipelineConfig {
  CameraModel camera;
  NoiseParams noise;
  double sigma_px = 1.5;
  FilterTunables filter;
};

/// Summary metrics of one evaluated run.
struct RunMetrics {
  double rmse_pos_m = 0.0;
  double rmse_att_rad = 0.0;
  double nees_mean = 0.0;
  double runtime_s = 0.0;
};

namespace detail {

inline const nlohmann::json& requireKey(const std::string& path,
                                        const nlohmann::json& js,
                                        const std::string& key) {
  if (!js.contains(key)) {
    throw ParseError(path, 0, "missing required key '" + key + "'");
  }
  return js.at(key);
}

inline double configNumber(const std::string& path, const nlohmann::json& js,
                           const std::string& key) {
  const nlohmann::json& v = requireKey(path, js, key);
  if (!v.is_number()) {
    throw ParseError(path, 0, "key '" + key + "' must be a number");
  }
  return v.get<double>();
}

inline int configInt(const std::string& path, const nlohmann::json& js,
                     const std::string& key) {
  const nlohmann::json& v = requireKey(path, js, key);
  if (!v.is_number_integer()) {
    throw ParseError(path, 0, "key '" + key + "' must be an integer");
  }
  return v.get<int>();
}

inline Pose configExtrinsic(const std::string& path, const nlohmann::json& js,
                            const std::string& key) {
  const nlohmann::json& v = requireKey(path, js, key);
  if (!v.is_array() || v.size() != 16) {
    throw ParseError(path, 0,
                     "key '" + key + "' must be an array of 16 numbers "
                     "(row-major 4x4 transform)");
  }
  Mat4 T;
  for (int r = 0; r < 4; ++r) {
    for (int c = 0; c < 4; ++c) {
      const nlohmann::json& e = v.at(4 * r + c);
      if (!e.is_number()) {
        throw ParseError(path, 0, "key '" + key + "' must contain numbers");
      }
      T(r, c) = e.get<double>();
    }
  }
  if ((T.row(3) - Eigen::RowVector4d(0, 0, 0, 1)).norm() > 1e-9) {
    throw ParseError(path, 0,
                     "key '" + key + "' must have bottom row (0,0,0,1)");
  }
  const Mat3 R = T.topLeftCorner<3, 3>();
  if ((R * R.transpose() - Mat3::Identity()).norm() > 1e-6 ||
      R.determinant() < 0) {
    throw ParseError(path, 0,
                     "key '" + key + "' rotation block is not a proper "
                     "rotation (orthonormal, det +1)");
  }
  return Pose{orthonormalized(R), T.topRightCorner<3, 1>()};
}

}  // namespace detail

/// Reads a flat JSON config (dotted keys). All keys are required except
/// "gravity" (defaults to (0, 0, -9.81)) and "filter.init_sigma_line_max"
/// (defaults to the FilterTunables value). Violations raise ParseError
/// naming the offending key.
inline PipelineConfig parseConfig(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path, 0, "cannot open file for reading");
  nlohmann::json js;
  try {
    js = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(path, 0, std::string("invalid JSON: ") + e.what());
  }
  if (!js.is_object()) throw ParseError(path, 0, "config must be an object");

  PipelineConfig cfg;
  cfg.camera.fu = detail::configNumber(path, js, "camera.fu");
  cfg.camera.fv = detail::configNumber(path, js, "camera.fv");
  cfg.camera.cu = detail::configNumber(path, js, "camera.cu");
  cfg.camera.cv = detail::configNumber(path, js, "camera.cv");
  cfg.camera.width = detail::configInt(path, js, "camera.width");
  cfg.camera.height = detail::configInt(path, js, "camera.height");
  if (cfg.camera.fu <= 0 || cfg.camera.fv <= 0 || cfg.camera.width <= 0 ||
      cfg.camera.height <= 0) {
    throw ParseError(path, 0,
                     "camera focal lengths and image size must be positive");
  }
  cfg.camera.T_IC = detail::configExtrinsic(path, js, "extrinsic");

  cfg.noise.sigma_g = detail::configNumber(path, js, "noise.sigma_g");
  cfg.noise.sigma_a = detail::configNumber(path, js, "noise.sigma_a");
  cfg.noise.sigma_bg = detail::configNumber(path, js, "noise.sigma_bg");
  cfg.noise.sigma_ba = detail::configNumber(path, js, "noise.sigma_ba");
  cfg.sigma_px = detail::configNumber(path, js, "noise.sigma_px");
  if (cfg.noise.sigma_g < 0 || cfg.noise.sigma_a < 0 ||
      cfg.noise.sigma_bg < 0 || cfg.noise.sigma_ba < 0 || cfg.sigma_px < 0) {
    throw ParseError(path, 0, "noise densities must be non-negative");
  }

  if (js.contains("gravity")) {
    const nlohmann::json& g = js.at("gravity");
    if (!g.is_array() || g.size() != 3 || !g.at(0).is_number() ||
        !g.at(1).is_number() || !g.at(2).is_number()) {
      throw ParseError(path, 0,
                       "key 'gravity' must be an array of 3 numbers");
    }
    cfg.noise.gravity =
        Vec3(g.at(0).get<double>(), g.at(1).get<double>(),
             g.at(2).get<double>());
  }

  cfg.filter.max_lines = detail::configInt(path, js, "filter.max_lines");
  cfg.filter.init_sigma_line =
      detail::configNumber(path, js, "filter.init_sigma_line");
  if (js.contains("filter.init_sigma_line_max")) {
    cfg.filter.init_sigma_line_max =
        detail::configNumber(path, js, "filter.init_sigma_line_max");
  }
  cfg.filter.gate_chi2 = detail::configNumber(path, js, "filter.gate_chi2");
  cfg.filter.min_baseline_m =
      detail::configNumber(path, js, "filter.min_baseline_m");
  cfg.filter.miss_frames_drop =
      detail::configInt(path, js, "filter.miss_frames_drop");
  if (cfg.filter.max_lines < 1 || cfg.filter.init_sigma_line <= 0 ||
      cfg.filter.init_sigma_line_max < cfg.filter.init_sigma_line ||
      cfg.filter.gate_chi2 < 0 || cfg.filter.min_baseline_m < 0 ||
      cfg.filter.miss_frames_drop < 1) {
    throw ParseError(path, 0, "filter.* values out of range");
  }
  return cfg;
}

inline void writeConfig(const std::string& path, const PipelineConfig& cfg) {
  nlohmann::json js;
  js["camera.fu"] = cfg.camera.fu;
  js["camera.fv"] = cfg.camera.fv;
  js["camera.cu"] = cfg.camera.cu;
  js["camera.cv"] = cfg.camera.cv;
  js["camera.width"] = cfg.camera.width;
  js["camera.height"] = cfg.camera.height;
  nlohmann::json ext = nlohmann::json::array();
  Mat4 T = Mat4::Identity();
  T.topLeftCorner<3, 3>() = cfg.camera.T_IC.R;
  T.topRightCorner<3, 1>() = cfg.camera.T_IC.t;
  for (int r = 0; r < 4; ++r) {
    for (int c = 0; c < 4; ++c) ext.push_back(T(r, c));
  }
  js["extrinsic"] = ext;
  js["noise.sigma_g"] = cfg.noise.sigma_g;
  js["noise.sigma_a"] = cfg.noise.sigma_a;
  js["noise.sigma_bg"] = cfg.noise.sigma_bg;
  js["noise.sigma_ba"] = cfg.noise.sigma_ba;
  js["noise.sigma_px"] = cfg.sigma_px;
  js["gravity"] = {cfg.noise.gravity.x(), cfg.noise.gravity.y(),
                   cfg.noise.gravity.z()};
  js["filter.max_lines"] = cfg.filter.max_lines;
  js["filter.init_sigma_line"] = cfg.filter.init_sigma_line;
  js["filter.init_sigma_line_max"] = cfg.filter.init_sigma_line_max;
  js["filter.gate_chi2"] = cfg.filter.gate_chi2;
  js["filter.min_baseline_m"] = cfg.filter.min_baseline_m;
  js["filter.miss_frames_drop"] = cfg.filter.miss_frames_drop;
  std::ofstream out(path);
  if (!out) throw ParseError(path, 0, "cannot open file for writing");
  out << js.dump(2) << '\n';
  if (!out) throw ParseError(path, 0, "write failed");
}

inline void writeMetrics(const std::string& path, const RunMetrics& m) {
  nlohmann::json js;
  js["rmse_pos_m"] = m.rmse_pos_m;
  js["rmse_att_rad"] = m.rmse_att_rad;
  js["nees_mean"] = m.nees_mean;
  js["runtime_s"] = m.runtime_s;
  std::ofstream out(path);
  if (!out) throw ParseError(path, 0, "cannot open file for writing");
  out << js.dump(2) << '\n';
  if (!out) throw ParseError(path, 0, "write failed");
}

inline RunMetrics parseMetrics(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path, 0, "cannot open file for reading");
  nlohmann::json js;
  try {
    js = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(path, 0, std::string("invalid JSON: ") + e.what());
  }
  RunMetrics m;
  m.rmse_pos_m = detail::configNumber(path, js, "rmse_pos_m");
  m.rmse_att_rad = detail::configNumber(path, js, "rmse_att_rad");
  m.nees_mean = detail::configNumber(path, js, "nees_mean");
  m.runtime_s = detail::configNumber(path, js, "runtime_s");
  return m;
}

}  // namespace linevio
