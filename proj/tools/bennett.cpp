#include "commands.hpp"

#include "CLI11.hpp"

#include <iostream>

int main(int argc, char** argv) {
  using namespace bennett::cli;

  CLI::App app{"Bennett 4R linkage synthesis: dataset generation, normalization, inverse design and metrics"};
  app.require_subcommand(1);

  GenOptions gen;
  auto* gen_cmd = app.add_subcommand("gen", "Generate the gated dataset (JSONL + manifest + gate report)");
  gen_cmd->add_option("--na", gen.na, "Grid count along a12")->capture_default_str();
  gen_cmd->add_option("--nalpha", gen.nalpha, "Grid count along alpha12")->capture_default_str();
  gen_cmd->add_option("--frames", gen.frames, "Frames per revolution")->capture_default_str();
  gen_cmd->add_option("--fc", gen.fc, "Highest retained harmonic")->capture_default_str();
  gen_cmd->add_option("--eps", gen.eps, "Closure tolerance (residual inf-norm)")->capture_default_str();
  gen_cmd->add_option("--gate2", gen.gate2, "Minimum converged fraction")->capture_default_str();
  gen_cmd->add_option("--out", gen.out, "Output dataset path")->required();
  gen_cmd->add_option("--workers", gen.workers, "Worker threads")->capture_default_str();

  NormalizeOptions norm;
  auto* norm_cmd = app.add_subcommand("normalize", "Two-stage normalization with a seeded 8:2 split");
  norm_cmd->add_option("--in", norm.in, "Raw dataset")->required();
  norm_cmd->add_option("--out", norm.out, "Normalized dataset")->required();
  norm_cmd->add_option("--split-seed", norm.split_seed, "Split shuffle seed")->capture_default_str();
  norm_cmd->add_option("--c99", norm.c99, "'auto' or a positive divisor")->capture_default_str();

  ForwardOptions fwd;
  auto* fwd_cmd = app.add_subcommand("forward", "Run one candidate through the pipeline");
  fwd_cmd->add_option("--a12", fwd.a12, "Link length in (0, 1)")->required();
  fwd_cmd->add_option("--alpha12", fwd.alpha12, "Twist angle (radians unless --degrees)")->required();
  fwd_cmd->add_flag("--degrees", fwd.degrees, "Read --alpha12 in degrees");
  fwd_cmd->add_option("--out", fwd.out, "Output path (default stdout)");

  InverseOptions inv;
  auto* inv_cmd = app.add_subcommand("inverse", "Recover (a12, alpha12) from three waypoints");
  inv_cmd->add_option("--waypoints", inv.waypoints, "3x7 JSON array file")->required();
  inv_cmd->add_option("--config", inv.config, "JSON object of search settings");
  inv_cmd->add_option("--manifest", inv.manifest, "Normalized manifest supplying c99");
  inv_cmd->add_option("--c99", inv.c99, "Normalization divisor (overrides manifest/config)");
  inv_cmd->add_option("--out", inv.out, "Output path (default stdout)");
  inv_cmd->add_option("--workers", inv.workers, "Worker threads")->capture_default_str();

  EvalOptions ev;
  auto* eval_cmd = app.add_subcommand("eval", "Compute the five MAE metrics");
  eval_cmd->add_option("--pred", ev.pred, "Prediction JSONL")->required();
  eval_cmd->add_option("--gt", ev.gt, "Ground-truth dataset JSONL")->required();
  eval_cmd->add_option("--out", ev.out, "Output path (default stdout)");

  ExportOptions ex;
  auto* export_cmd = app.add_subcommand("export", "Write one sample's positions and velocities as CSV");
  export_cmd->add_option("--in", ex.in, "Dataset JSONL")->required();
  export_cmd->add_option("--sample", ex.sample, "Sample id (0-based line index)")->required();
  export_cmd->add_option("--out", ex.out, "Output path (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }

  if (*gen_cmd) return cmd_gen(gen);
  if (*norm_cmd) return cmd_normalize(norm);
  if (*fwd_cmd) return cmd_forward(fwd);
  if (*inv_cmd) return cmd_inverse(inv);
  if (*eval_cmd) return cmd_eval(ev);
  if (*export_cmd) return cmd_export(ex);
  return kUsage;
}
