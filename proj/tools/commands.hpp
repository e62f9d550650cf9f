#pragma once

// Subcommand implementations for the `bennett` tool. Each returns the process
// exit code: 0 success, 1 usage, 2 I/O or malformed input, 3 no solution.

#include "bennett/dataset.hpp"
#include "bennett/inverse.hpp"
#include "bennett/io.hpp"
#include "bennett/metrics.hpp"
#include "bennett/normalization.hpp"

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <string>

namespace bennett::cli {

enum ExitCode : int { kOk = 0, kUsage = 1, kIo = 2, kNoSolution = 3 };

struct GenOptions {
  int na = 263;
  int nalpha = 263;
  int frames = kDefaultFrames;
  int fc = kDefaultCutoff;
  double eps = 1e-6;
  double gate2 = kGate2Threshold;
  std::string out;
  int workers = 1;
};

struct NormalizeOptions {
  std::string in;
  std::string out;
  std::uint64_t split_seed = 0;
  std::string c99 = "auto";
};

struct ForwardOptions {
  double a12 = 0.0;
  double alpha12 = 0.0;
  bool degrees = false;
  std::string out;  // empty: stdout
};

struct InverseOptions {
  std::string waypoints;
  std::string config;
  std::string manifest;
  std::optional<double> c99;
  std::string out;  // empty: stdout
  int workers = 1;
};

struct EvalOptions {
  std::string pred;
  std::string gt;
  std::string out;  // empty: stdout
};

struct ExportOptions {
  std::string in;
  std::size_t sample = 0;
  std::string out;  // empty: stdout
};

namespace detail {

/// Runs `body`, mapping exceptions onto exit codes.
template <typename Body>
int guarded(std::ostream& err, Body&& body) {
  try {
    return body();
  } catch (const io::FormatError& e) {
    err << "error: " << e.what() << '\n';
    return kIo;
  } catch (const std::ios_base::failure& e) {
    err << "error: " << e.what() << '\n';
    return kIo;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  }
}

template <typename Fn>
void with_output(const std::string& path, Fn&& fn) {
  if (path.empty() || path == "-") {
    fn(std::cout);
    std::cout.flush();
    return;
  }
  auto f = io::open_out(path);
  fn(f);
  if (!f) throw std::ios_base::failure("write failed: " + path);
}

inline io::Json double_or_null(double x) { return std::isfinite(x) ? io::Json(x) : io::Json(nullptr); }

}  // namespace detail

inline PipelineConfig pipeline_from(const GenOptions& o) {
  PipelineConfig p;
  p.frames = o.frames;
  p.fc = o.fc;
  p.solver.eps = o.eps;
  p.gate2 = o.gate2;
  return p;
}

inline int cmd_gen(const GenOptions& o, std::ostream& log = std::cerr) {
  return detail::guarded(log, [&] {
    if (o.out.empty()) throw std::invalid_argument("gen: --out is required");
    if (o.frames < kSubsampleFrames) throw std::invalid_argument("gen: --frames must be >= 64");
    if (o.fc < 0 || 2 * o.fc >= o.frames) throw std::invalid_argument("gen: require 0 <= fc < frames/2");
    if (!(o.gate2 >= 0.0 && o.gate2 <= 1.0)) throw std::invalid_argument("gen: --gate2 must lie in [0, 1]");
    if (o.workers < 1) throw std::invalid_argument("gen: --workers must be >= 1");
    GridConfig grid;
    grid.n_a = o.na;
    grid.n_alpha = o.nalpha;
    const PipelineConfig pipe = pipeline_from(o);
    pipe.solver.validate();
    grid.validate();

    const GenerationResult res = generate(grid, pipe, o.workers);
    io::write_samples_file(o.out, res.samples);
    io::write_json_file(io::manifest_path(o.out),
                        io::generation_manifest(grid, pipe, res.report, res.samples.size()));
    io::write_json_file(io::gate_report_path(o.out), io::gate_report_to_json(res.report));
    log << "candidates " << res.report.candidates << ", accepted " << res.report.accepted << " (pass rate "
        << res.report.pass_rate() << ")\n";
    return kOk;
  });
}

inline int cmd_normalize(const NormalizeOptions& o, std::ostream& log = std::cerr) {
  return detail::guarded(log, [&] {
    if (o.in.empty() || o.out.empty()) throw std::invalid_argument("normalize: --in and --out are required");
    std::optional<double> forced;
    if (o.c99 != "auto") {
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(o.c99, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != o.c99.size() || !(v > 0.0)) throw std::invalid_argument("normalize: --c99 must be 'auto' or a positive number");
      forced = v;
    }
    auto raw = io::read_samples_file(o.in);
    if (raw.empty()) throw io::FormatError("normalize: input dataset is empty");
    io::Json source = io::Json::object();
    if (std::ifstream probe(io::manifest_path(o.in)); probe) source = io::read_json_file(io::manifest_path(o.in));
    if (source.contains("stage") && source["stage"] == "normalized") {
      throw io::FormatError("normalize: input dataset is already normalized");
    }
    const NormalizedDataset nd = normalize_dataset(std::move(raw), o.split_seed, forced);
    io::write_samples_file(o.out, nd.samples);
    io::write_json_file(io::manifest_path(o.out), io::normalization_manifest(source, nd));
    log << "c99 " << nd.c99 << (nd.c99_forced ? " (forced)" : " (auto)") << ", train " << nd.split.train.size()
        << ", val " << nd.split.val.size() << '\n';
    return kOk;
  });
}

inline int cmd_forward(const ForwardOptions& o, std::ostream& log = std::cerr) {
  return detail::guarded(log, [&] {
    const double alpha12 = o.degrees ? o.alpha12 * kDeg : o.alpha12;
    const auto derived = derive_dependents(o.a12, alpha12);
    std::string line;
    if (const auto* rej = std::get_if<Gate1Rejection>(&derived)) {
      io::Json j;
      j["rejected"] = "gate1";
      j["a12"] = o.a12;
      j["alpha12"] = alpha12;
      j["sin_alpha23"] = rej->sin_alpha23;
      line = j.dump();
    } else {
      const ForwardOutcome f = run_candidate(o.a12, alpha12);
      if (f.verdict == Verdict::kAccepted) {
        line = io::sample_to_line(*f.sample);
      } else {
        io::Json j;
        j["rejected"] = f.verdict == Verdict::kGate2 ? "gate2" : "gate3";
        j["a12"] = o.a12;
        j["alpha12"] = alpha12;
        j["converged_fraction"] = f.converged_fraction;
        if (f.gate3) {
          j["max_jump"] = f.gate3->max_jump;
          j["tau"] = f.gate3->tau;
        }
        line = j.dump();
      }
    }
    detail::with_output(o.out, [&](std::ostream& os) { os << line << '\n'; });
    return kOk;
  });
}

/// [[lo, hi], [lo, hi]] with lo < hi.
inline std::array<Interval, 2> intervals_from_json(const io::Json& j) {
  if (!j.is_array() || j.size() != 2) throw std::invalid_argument("intervals must be [[lo, hi], [lo, hi]]");
  std::array<Interval, 2> out;
  for (std::size_t s = 0; s < 2; ++s) {
    if (!j[s].is_array() || j[s].size() != 2) throw std::invalid_argument("intervals must be [[lo, hi], [lo, hi]]");
    out[s] = {j[s][0].get<double>(), j[s][1].get<double>()};
    if (!(out[s].lo < out[s].hi)) throw std::invalid_argument("interval bounds must satisfy lo < hi");
  }
  return out;
}

/// Applies a JSON object of InverseConfig overrides; unknown keys are errors.
inline void apply_inverse_config(const io::Json& j, InverseConfig& cfg) {
  if (!j.is_object()) throw std::invalid_argument("inverse config must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (key == "coarse_na") cfg.coarse_na = value.get<int>();
    else if (key == "coarse_nalpha") cfg.coarse_nalpha = value.get<int>();
    else if (key == "phase_steps") cfg.phase_steps = value.get<int>();
    else if (key == "refine_iters") cfg.refine_iters = value.get<int>();
    else if (key == "use_velocity") cfg.use_velocity = value.get<bool>();
    else if (key == "top_k") cfg.top_k = value.get<int>();
    else if (key == "c99") cfg.c99 = value.get<double>();
    else if (key == "workers") cfg.workers = value.get<int>();
    else if (key == "a12_intervals") cfg.search_region.a12_intervals = intervals_from_json(value);
    else if (key == "alpha12_intervals") cfg.search_region.alpha12_intervals = intervals_from_json(value);
    else throw std::invalid_argument("inverse config: unknown key " + key);
  }
}

inline io::Json inverse_result_json(const InverseResult& r) {
  io::Json j;
  j["found"] = r.found;
  j["a12_hat"] = r.found ? io::Json(r.a12_hat) : io::Json(nullptr);
  j["alpha12_hat"] = r.found ? io::Json(r.alpha12_hat) : io::Json(nullptr);
  j["objective"] = detail::double_or_null(r.objective);
  j["phase_hat"] = r.found ? io::Json(r.phase_hat) : io::Json(nullptr);
  j["candidates_evaluated"] = r.candidates_evaluated;
  io::Json fin = io::Json::array();
  for (const auto& c : r.finalists) {
    io::Json f;
    f["a12_hat"] = c.a12_hat;
    f["alpha12_hat"] = c.alpha12_hat;
    f["phase_hat"] = c.phase_hat;
    f["objective"] = detail::double_or_null(c.objective);
    f["seed_objective"] = detail::double_or_null(c.seed_objective);
    f["seed_grid_index"] = {c.seed_index.i, c.seed_index.j};
    fin.push_back(std::move(f));
  }
  j["finalists"] = std::move(fin);
  return j;
}

inline int cmd_inverse(const InverseOptions& o, std::ostream& log = std::cerr) {
  return detail::guarded(log, [&] {
    if (o.waypoints.empty()) throw std::invalid_argument("inverse: --waypoints is required");
    const Waypoints wps = io::waypoints_from_json(io::read_json_file(o.waypoints));
    InverseConfig cfg;
    cfg.workers = o.workers;
    // precedence: --c99, then the config file, then the manifest, then the default
    if (!o.manifest.empty()) cfg.c99 = io::manifest_c99(io::read_json_file(o.manifest));
    if (!o.config.empty()) {
      try {
        apply_inverse_config(io::read_json_file(o.config), cfg);
      } catch (const io::Json::exception& e) {
        throw std::invalid_argument(std::string("inverse config: ") + e.what());
      }
    }
    if (o.c99) cfg.c99 = *o.c99;
    const InverseResult r = solve_inverse(wps, cfg);
    detail::with_output(o.out, [&](std::ostream& os) { os << inverse_result_json(r).dump(2) << '\n'; });
    if (!r.found) {
      log << "no feasible candidate matches the waypoints\n";
      return kNoSolution;
    }
    return kOk;
  });
}

inline int cmd_eval(const EvalOptions& o, std::ostream& log = std::cerr) {
  return detail::guarded(log, [&] {
    if (o.pred.empty() || o.gt.empty()) throw std::invalid_argument("eval: --pred and --gt are required");
    auto pf = io::open_in(o.pred);
    const auto preds = io::read_predictions(pf);
    const auto gts = io::read_samples_file(o.gt);

    std::vector<MetricRecord> p, g;
    std::set<std::size_t> seen;
    for (const auto& pr : preds) {
      if (pr.id >= gts.size()) throw io::FormatError("eval: prediction id " + std::to_string(pr.id) + " not in dataset");
      if (!seen.insert(pr.id).second) throw io::FormatError("eval: duplicate prediction id " + std::to_string(pr.id));
      const Sample& s = gts[pr.id];
      p.push_back({pr.a12_hat, pr.alpha12_hat, pr.trajectory, pr.velocities});
      g.push_back({s.a12, s.alpha12, s.positions, s.velocities});
    }
    MetricsReport rep;
    try {
      rep = evaluate(p, g);
    } catch (const std::invalid_argument& e) {
      throw io::FormatError(e.what());
    }
    detail::with_output(o.out, [&](std::ostream& os) { os << io::metrics_report_json(rep) << '\n'; });
    return kOk;
  });
}

inline int cmd_export(const ExportOptions& o, std::ostream& log = std::cerr) {
  return detail::guarded(log, [&] {
    if (o.in.empty()) throw std::invalid_argument("export: --in is required");
    const auto samples = io::read_samples_file(o.in);
    if (o.sample >= samples.size()) {
      throw std::invalid_argument("export: sample id " + std::to_string(o.sample) + " out of range");
    }
    detail::with_output(o.out, [&](std::ostream& os) { io::write_sample_csv(os, samples[o.sample]); });
    return kOk;
  });
}

}  // namespace bennett::cli
