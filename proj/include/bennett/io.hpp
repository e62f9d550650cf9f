#pragma once

// Line-delimited JSON dataset records, prediction records, manifests and the
// per-sample CSV export. Doubles are written in shortest round-trip form.

#include "bennett/dataset.hpp"
#include "bennett/metrics.hpp"
#include "bennett/normalization.hpp"

#include "json.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <system_error>
#include <vector>

namespace bennett::io {

using Json = nlohmann::ordered_json;

/// Malformed file content, as opposed to a bad command line.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Shortest decimal that round-trips to the same double.
inline std::string format_double(double x) {
  if (!std::isfinite(x)) throw std::invalid_argument("format_double: non-finite value");
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  if (res.ec != std::errc{}) throw std::runtime_error("format_double: conversion failed");
  return std::string(buf, res.ptr);
}

inline double number_at(const Json& j, const char* what) {
  if (!j.is_number()) throw FormatError(std::string("expected a number for ") + what);
  return j.get<double>();
}

inline Points points_from_json(const Json& j, const char* what, std::size_t expected = 0) {
  if (!j.is_array()) throw FormatError(std::string(what) + ": expected an array");
  if (expected != 0 && j.size() != expected) {
    throw FormatError(std::string(what) + ": expected " + std::to_string(expected) + " rows");
  }
  Points out;
  out.reserve(j.size());
  for (const auto& row : j) {
    if (!row.is_array() || row.size() != 3) throw FormatError(std::string(what) + ": rows must have 3 entries");
    out.emplace_back(number_at(row[0], what), number_at(row[1], what), number_at(row[2], what));
  }
  return out;
}

inline Json waypoints_to_json(const Waypoints& w) {
  Json arr = Json::array();
  for (const auto& wp : w) {
    Json row = Json::array();
    for (double x : wp.as_array()) row.push_back(x);
    arr.push_back(std::move(row));
  }
  return arr;
}

inline Waypoints waypoints_from_json(const Json& j) {
  if (!j.is_array() || j.size() != 3) throw FormatError("waypoints: expected a 3x7 array");
  Waypoints w;
  for (std::size_t i = 0; i < 3; ++i) {
    if (!j[i].is_array() || j[i].size() != 7) throw FormatError("waypoints: expected a 3x7 array");
    std::array<double, 7> a{};
    for (std::size_t c = 0; c < 7; ++c) {
      a[c] = number_at(j[i][c], "waypoints");
      if (!std::isfinite(a[c])) throw FormatError("waypoints: non-finite entry");
    }
    w[i] = Waypoint::from_array(a);
  }
  return w;
}

inline Sample sample_from_json(const Json& j) {
  if (!j.is_object()) throw FormatError("sample record: expected an object");
  for (const char* key : {"grid_index", "a12", "alpha12", "a23", "alpha23", "converged_fraction", "positions",
                          "velocities", "waypoints"}) {
    if (!j.contains(key)) throw FormatError(std::string("sample record: missing field ") + key);
  }
  Sample s;
  const auto& gi = j["grid_index"];
  if (!gi.is_array() || gi.size() != 2 || !gi[0].is_number_integer() || !gi[1].is_number_integer()) {
    throw FormatError("sample record: grid_index must be [i, j]");
  }
  s.grid_index = {gi[0].get<int>(), gi[1].get<int>()};
  s.a12 = number_at(j["a12"], "a12");
  s.alpha12 = number_at(j["alpha12"], "alpha12");
  s.a23 = number_at(j["a23"], "a23");
  s.alpha23 = number_at(j["alpha23"], "alpha23");
  s.converged_fraction = number_at(j["converged_fraction"], "converged_fraction");
  s.positions = points_from_json(j["positions"], "positions", kSubsampleFrames);
  s.velocities = points_from_json(j["velocities"], "velocities", kSubsampleFrames);
  s.waypoints = waypoints_from_json(j["waypoints"]);
  return s;
}

inline Json parse_line(const std::string& line) {
  try {
    return Json::parse(line);
  } catch (const Json::parse_error& e) {
    throw FormatError(std::string("invalid JSON: ") + e.what());
  }
}

namespace detail {

inline void append_points(std::string& out, const Points& pts) {
  out += '[';
  for (std::size_t k = 0; k < pts.size(); ++k) {
    if (k) out += ',';
    out += '[';
    for (int c = 0; c < 3; ++c) {
      if (c) out += ',';
      out += format_double(pts[k](c));
    }
    out += ']';
  }
  out += ']';
}

}  // namespace detail

/// One JSONL line (without the newline). Hand-written so that every double
/// uses format_double.
inline std::string sample_to_line(const Sample& s) {
  std::string out;
  out.reserve(8192);
  out += "{\"grid_index\":[" + std::to_string(s.grid_index.i) + "," + std::to_string(s.grid_index.j) + "]";
  out += ",\"a12\":" + format_double(s.a12);
  out += ",\"alpha12\":" + format_double(s.alpha12);
  out += ",\"a23\":" + format_double(s.a23);
  out += ",\"alpha23\":" + format_double(s.alpha23);
  out += ",\"converged_fraction\":" + format_double(s.converged_fraction);
  out += ",\"positions\":";
  detail::append_points(out, s.positions);
  out += ",\"velocities\":";
  detail::append_points(out, s.velocities);
  out += ",\"waypoints\":[";
  for (std::size_t i = 0; i < s.waypoints.size(); ++i) {
    if (i) out += ',';
    out += '[';
    const auto a = s.waypoints[i].as_array();
    for (std::size_t c = 0; c < a.size(); ++c) {
      if (c) out += ',';
      out += format_double(a[c]);
    }
    out += ']';
  }
  out += "]}";
  return out;
}

inline void write_samples(std::ostream& os, const std::vector<Sample>& samples) {
  for (const auto& s : samples) os << sample_to_line(s) << '\n';
}

inline std::vector<Sample> read_samples(std::istream& is) {
  std::vector<Sample> out;
  std::string line;
  std::size_t lineno = 0;
  for (; std::getline(is, line); ++lineno) {
    if (line.empty()) continue;
    try {
      out.push_back(sample_from_json(parse_line(line)));
    } catch (const FormatError& e) {
      throw FormatError("line " + std::to_string(lineno + 1) + ": " + e.what());
    }
  }
  return out;
}

inline std::ifstream open_in(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::ios_base::failure("cannot open " + path);
  return f;
}

inline std::ofstream open_out(const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::ios_base::failure("cannot write " + path);
  return f;
}

inline std::vector<Sample> read_samples_file(const std::string& path) {
  auto f = open_in(path);
  return read_samples(f);
}

inline void write_samples_file(const std::string& path, const std::vector<Sample>& samples) {
  auto f = open_out(path);
  write_samples(f, samples);
  if (!f) throw std::ios_base::failure("write failed: " + path);
}

inline Json read_json_file(const std::string& path) {
  auto f = open_in(path);
  try {
    return Json::parse(f);
  } catch (const Json::parse_error& e) {
    throw FormatError(path + ": " + e.what());
  }
}

inline void write_json_file(const std::string& path, const Json& j) {
  auto f = open_out(path);
  f << j.dump(2) << '\n';
  if (!f) throw std::ios_base::failure("write failed: " + path);
}

inline std::string manifest_path(const std::string& dataset_path) { return dataset_path + ".manifest.json"; }
inline std::string gate_report_path(const std::string& dataset_path) { return dataset_path + ".gates.json"; }

// ---------------------------------------------------------------------------
// Manifest pieces

inline Json intervals_to_json(const std::array<Interval, 2>& ivs) {
  return Json::array({Json::array({ivs[0].lo, ivs[0].hi}), Json::array({ivs[1].lo, ivs[1].hi})});
}

inline Json gate_report_to_json(const GateReport& r) {
  Json j;
  j["candidates"] = r.candidates;
  j["gate1_rejects"] = r.gate1_rejects;
  j["gate2_rejects"] = r.gate2_rejects;
  j["gate3_rejects"] = r.gate3_rejects;
  j["accepted"] = r.accepted;
  j["pass_rate"] = r.pass_rate();
  return j;
}

inline Json pipeline_to_json(const PipelineConfig& p) {
  Json j;
  j["frames"] = p.frames;
  j["fc"] = p.fc;
  j["eps"] = p.solver.eps;
  j["max_iter"] = p.solver.max_iter;
  j["lambda0"] = p.solver.lambda0;
  j["multistart_grid"] = p.solver.multistart_grid;
  j["gate2"] = p.gate2;
  j["gate3_sigmas"] = p.gate3.sigmas;
  j["gate3_rel_floor"] = p.gate3.rel_floor;
  return j;
}

inline Json conventions_json() {
  Json j;
  j["angles"] = "radians";
  j["velocity_step"] = "2*pi/64";
  j["velocity_step_value"] = kTwoPi / kSubsampleFrames;
  j["velocity_domain"] = "64-frame subsample";
  j["subsample_indices"] = "floor(k*frames/64)";
  j["waypoint_indices"] = kWaypointIndices;
  j["gate3_rule"] = "max step > mean step + sigmas*std and > rel_floor*mean step";
  j["sample_id"] = "0-based line index in the dataset file";
  return j;
}

inline Json generation_manifest(const GridConfig& grid, const PipelineConfig& pipe, const GateReport& report,
                                std::size_t samples) {
  Json j;
  j["format"] = "bennett-dataset/1";
  j["stage"] = "raw";
  Json g;
  g["n_a"] = grid.n_a;
  g["n_alpha"] = grid.n_alpha;
  g["a12_intervals"] = intervals_to_json(grid.a12_intervals);
  g["alpha12_intervals"] = intervals_to_json(grid.alpha12_intervals);
  g["pipeline"] = pipeline_to_json(pipe);
  j["generation"] = std::move(g);
  j["gate_report"] = gate_report_to_json(report);
  j["conventions"] = conventions_json();
  j["samples"] = samples;
  return j;
}

inline Json normalization_manifest(const Json& source_manifest, const NormalizedDataset& nd) {
  Json j;
  j["format"] = "bennett-dataset/1";
  j["stage"] = "normalized";
  j["generation"] = source_manifest.contains("generation") ? source_manifest["generation"] : Json(nullptr);
  j["gate_report"] = source_manifest.contains("gate_report") ? source_manifest["gate_report"] : Json(nullptr);
  j["conventions"] = conventions_json();
  Json n;
  n["stage1"] = true;
  n["stage2"] = true;
  n["c99"] = nd.c99;
  n["c99_mode"] = nd.c99_forced ? "forced" : "auto";
  n["c99_statistic"] = "nearest-rank 99th percentile of per-point euclidean norms, training split";
  n["a23_after_stage2"] = 1.0;
  n["split_seed"] = nd.seed;
  n["split_ratio"] = {8, 2};
  n["train_ids"] = nd.split.train;
  n["val_ids"] = nd.split.val;
  j["normalization"] = std::move(n);
  j["samples"] = nd.samples.size();
  return j;
}

/// c99 recorded in a normalized manifest.
inline double manifest_c99(const Json& manifest) {
  if (!manifest.contains("normalization") || !manifest["normalization"].contains("c99")) {
    throw FormatError("manifest has no normalization.c99");
  }
  return number_at(manifest["normalization"]["c99"], "c99");
}

// ---------------------------------------------------------------------------
// Predictions

struct PredictionRecord {
  std::size_t id = 0;
  double a12_hat = 0.0;
  double alpha12_hat = 0.0;
  std::optional<Points> trajectory;
  std::optional<Points> velocities;
};

inline std::string prediction_to_line(const PredictionRecord& p) {
  std::string out = "{\"id\":" + std::to_string(p.id);
  out += ",\"a12_hat\":" + format_double(p.a12_hat);
  out += ",\"alpha12_hat\":" + format_double(p.alpha12_hat);
  if (p.trajectory) {
    out += ",\"trajectory\":";
    detail::append_points(out, *p.trajectory);
  }
  if (p.velocities) {
    out += ",\"velocities\":";
    detail::append_points(out, *p.velocities);
  }
  out += '}';
  return out;
}

/// Reads prediction records. A dataset file is also accepted, each line then
/// predicting itself with id = line index.
inline std::vector<PredictionRecord> read_predictions(std::istream& is) {
  std::vector<PredictionRecord> out;
  std::string line;
  std::size_t lineno = 0, record = 0;
  for (; std::getline(is, line); ++lineno) {
    if (line.empty()) continue;
    PredictionRecord p;
    try {
      const Json j = parse_line(line);
      if (j.contains("a12_hat")) {
        if (!j.contains("id") || !j["id"].is_number_unsigned()) throw FormatError("missing or invalid id");
        if (!j.contains("alpha12_hat")) throw FormatError("missing alpha12_hat");
        p.id = j["id"].get<std::size_t>();
        p.a12_hat = number_at(j["a12_hat"], "a12_hat");
        p.alpha12_hat = number_at(j["alpha12_hat"], "alpha12_hat");
        if (j.contains("trajectory")) p.trajectory = points_from_json(j["trajectory"], "trajectory");
        if (j.contains("velocities")) p.velocities = points_from_json(j["velocities"], "velocities");
      } else {
        const Sample s = sample_from_json(j);
        p.id = record;
        p.a12_hat = s.a12;
        p.alpha12_hat = s.alpha12;
        p.trajectory = s.positions;
        p.velocities = s.velocities;
      }
    } catch (const FormatError& e) {
      throw FormatError("line " + std::to_string(lineno + 1) + ": " + e.what());
    }
    out.push_back(std::move(p));
    ++record;
  }
  return out;
}

/// Flat report document; values printed with 17 significant digits.
inline std::string metrics_report_json(const MetricsReport& r) {
  auto num = [](double x) {
    std::ostringstream os;
    os.precision(17);
    os << x;
    return os.str();
  };
  auto opt = [&](const std::optional<double>& x) { return x ? num(*x) : std::string("null"); };
  std::ostringstream os;
  os << "{\"a12_mae\": " << num(r.a12_mae) << ", \"alpha12_mae\": " << num(r.alpha12_mae)
     << ", \"param_mae\": " << num(r.param_mae) << ", \"traj_mae\": " << opt(r.traj_mae)
     << ", \"vel_mae\": " << opt(r.vel_mae) << ", \"n\": " << r.n << "}";
  return os.str();
}

// ---------------------------------------------------------------------------
// CSV export

inline void write_sample_csv(std::ostream& os, const Sample& s) {
  os << "frame,px,py,pz,vx,vy,vz\n";
  for (std::size_t k = 0; k < s.positions.size(); ++k) {
    os << k;
    for (int c = 0; c < 3; ++c) os << ',' << format_double(s.positions[k](c));
    for (int c = 0; c < 3; ++c) os << ',' << format_double(s.velocities[k](c));
    os << '\n';
  }
}

}  // namespace bennett::io
