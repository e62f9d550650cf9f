#include "commands.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <cstdlib>
#include <numbers>
#include <sstream>
#include <sys/wait.h>

using namespace bennett;
using namespace bennett::cli;
namespace fs = std::filesystem;
namespace ts = testing_support;

namespace {

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override { dir_ = ts::scratch_dir("cli"); }
  void TearDown() override { fs::remove_all(dir_); }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  std::string make_raw(int n = 8, int workers = 1) {
    GenOptions g;
    g.na = n;
    g.nalpha = n;
    g.out = path("raw_" + std::to_string(n) + "_" + std::to_string(workers) + ".jsonl");
    g.workers = workers;
    EXPECT_EQ(cmd_gen(g, log_), kOk);
    return g.out;
  }

  void write(const std::string& p, const std::string& content) {
    std::ofstream f(p, std::ios::binary);
    f << content;
  }

  fs::path dir_;
  std::ostringstream log_;
};

int run_binary(const std::string& args) {
  const std::string cmd = std::string(BENNETT_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_F(CliTest, GenWritesDatasetManifestAndGateReport) {
  const auto out = make_raw(8);
  const auto samples = io::read_samples_file(out);
  const auto man = io::read_json_file(io::manifest_path(out));
  const auto gates = io::read_json_file(io::gate_report_path(out));
  EXPECT_EQ(man["stage"], "raw");
  EXPECT_EQ(man["samples"], samples.size());
  EXPECT_EQ(gates["candidates"], 64);
  EXPECT_EQ(gates["accepted"], samples.size());
  EXPECT_EQ(man["gate_report"], gates);
}

TEST_F(CliTest, GenIsByteIdenticalAcrossRunsAndWorkers) {
  const auto a = make_raw(7, 1);
  const auto b = make_raw(7, 3);
  const auto first = ts::slurp(a);
  make_raw(7, 1);
  EXPECT_EQ(ts::slurp(a), first);
  EXPECT_EQ(ts::slurp(b), first);
  EXPECT_EQ(ts::slurp(io::manifest_path(a)), ts::slurp(io::manifest_path(b)));
  EXPECT_EQ(ts::slurp(io::gate_report_path(a)), ts::slurp(io::gate_report_path(b)));
}

TEST_F(CliTest, GenFlagErrors) {
  GenOptions g;
  g.na = g.nalpha = 4;
  g.out = path("x.jsonl");
  g.fc = 180;
  EXPECT_EQ(cmd_gen(g, log_), kUsage);
  g.fc = 72;
  g.na = 1;
  EXPECT_EQ(cmd_gen(g, log_), kUsage);
  g.na = 4;
  g.out = path("missing/dir/x.jsonl");
  EXPECT_EQ(cmd_gen(g, log_), kIo);
}

TEST_F(CliTest, GenZeroCutoffStillWellDefined) {
  GenOptions g;
  g.na = g.nalpha = 5;
  g.fc = 0;
  g.out = path("fc0.jsonl");
  ASSERT_EQ(cmd_gen(g, log_), kOk);
  for (const auto& s : io::read_samples_file(g.out))
    for (const auto& p : s.positions) EXPECT_LT((p - s.positions[0]).norm(), 1e-12);
}

TEST_F(CliTest, NormalizeAutoAndForced) {
  const auto raw = make_raw(8);
  NormalizeOptions n{raw, path("auto.jsonl"), 5, "auto"};
  ASSERT_EQ(cmd_normalize(n, log_), kOk);
  const auto man = io::read_json_file(io::manifest_path(n.out));
  EXPECT_EQ(man["stage"], "normalized");
  EXPECT_EQ(man["normalization"]["stage1"], true);
  EXPECT_EQ(man["normalization"]["stage2"], true);
  EXPECT_EQ(man["normalization"]["split_seed"], 5);
  EXPECT_EQ(man["normalization"]["c99_mode"], "auto");
  EXPECT_EQ(man["generation"]["n_a"], 8);
  EXPECT_GT(io::manifest_c99(man), 0.0);

  NormalizeOptions f{raw, path("forced.jsonl"), 5, "29.44"};
  ASSERT_EQ(cmd_normalize(f, log_), kOk);
  EXPECT_EQ(io::manifest_c99(io::read_json_file(io::manifest_path(f.out))), 29.44);
  const auto rs = io::read_samples_file(raw), fs_ = io::read_samples_file(f.out);
  for (std::size_t k = 0; k < rs.size(); ++k) {
    EXPECT_EQ(fs_[k].a23, 1.0);
    EXPECT_NEAR(fs_[k].a12, normalized_a12(rs[k].a12, 29.44), 1e-14);
  }
}

TEST_F(CliTest, NormalizeErrors) {
  const auto raw = make_raw(6);
  EXPECT_EQ(cmd_normalize({raw, path("o.jsonl"), 0, "abc"}, log_), kUsage);
  EXPECT_EQ(cmd_normalize({raw, path("o.jsonl"), 0, "-3"}, log_), kUsage);
  EXPECT_EQ(cmd_normalize({path("none.jsonl"), path("o.jsonl"), 0, "auto"}, log_), kIo);
  ASSERT_EQ(cmd_normalize({raw, path("n.jsonl"), 0, "auto"}, log_), kOk);
  EXPECT_EQ(cmd_normalize({path("n.jsonl"), path("nn.jsonl"), 0, "auto"}, log_), kIo);
  write(path("empty.jsonl"), "");
  EXPECT_EQ(cmd_normalize({path("empty.jsonl"), path("o.jsonl"), 0, "auto"}, log_), kIo);
}

TEST_F(CliTest, ForwardGateOneReport) {
  ForwardOptions o{0.3, 1.0472, false, path("f.json")};
  ASSERT_EQ(cmd_forward(o, log_), kOk);
  const auto j = io::read_json_file(o.out);
  EXPECT_EQ(j["rejected"], "gate1");
  EXPECT_GT(j["sin_alpha23"].get<double>(), 1.0);
}

TEST_F(CliTest, ForwardFullRecordAndDegrees) {
  ForwardOptions o{0.6, 1.2, false, path("f.jsonl")};
  ASSERT_EQ(cmd_forward(o, log_), kOk);
  const auto s = io::read_samples_file(o.out);
  ASSERT_EQ(s.size(), 1u);
  EXPECT_EQ(s[0].positions.size(), 64u);
  ForwardOptions d{0.6, 1.2 / kDeg, true, path("d.jsonl")};
  ASSERT_EQ(cmd_forward(d, log_), kOk);
  EXPECT_NEAR(io::read_samples_file(d.out)[0].alpha12, 1.2, 1e-15);
  EXPECT_EQ(cmd_forward({1.5, 1.0, false, path("bad.json")}, log_), kUsage);
}

TEST_F(CliTest, ForwardGateThreeReport) {
  // 0.6 / 30 deg: the largest step sits just over 3 sigma above the mean
  ForwardOptions o{0.6, 30.0, true, path("g3.json")};
  ASSERT_EQ(cmd_forward(o, log_), kOk);
  const auto j = io::read_json_file(o.out);
  EXPECT_EQ(j["rejected"], "gate3");
}

TEST_F(CliTest, InverseRecoversFromFileAndManifest) {
  const auto raw = make_raw(8);
  NormalizeOptions n{raw, path("n.jsonl"), 0, "29.44"};
  ASSERT_EQ(cmd_normalize(n, log_), kOk);
  const auto s = ts::normalized_sample(0.63, 1.9, 29.44);
  io::write_json_file(path("wp.json"), io::waypoints_to_json(s.waypoints));
  write(path("cfg.json"), R"({"coarse_na": 24, "coarse_nalpha": 48, "top_k": 3})");
  InverseOptions o;
  o.waypoints = path("wp.json");
  o.config = path("cfg.json");
  o.manifest = io::manifest_path(n.out);
  o.out = path("inv.json");
  ASSERT_EQ(cmd_inverse(o, log_), kOk);
  const auto j = io::read_json_file(o.out);
  EXPECT_EQ(j["found"], true);
  EXPECT_NEAR(j["a12_hat"].get<double>(), s.a12, 0.01);
  EXPECT_LT(std::abs(wrap(j["alpha12_hat"].get<double>() - s.alpha12)), 0.05);
  EXPECT_EQ(j["finalists"].size(), 3u);
}

TEST_F(CliTest, InverseNoSolutionAndErrors) {
  const auto s = ts::normalized_sample(0.63, 1.9, 29.44);
  io::write_json_file(path("wp.json"), io::waypoints_to_json(s.waypoints));
  write(path("empty_region.json"),
        R"({"coarse_na": 3, "coarse_nalpha": 3, "a12_intervals": [[0.02, 0.03], [0.04, 0.05]],
            "alpha12_intervals": [[1.4, 1.5], [1.6, 1.7]]})");
  InverseOptions o;
  o.waypoints = path("wp.json");
  o.config = path("empty_region.json");
  o.out = path("inv.json");
  EXPECT_EQ(cmd_inverse(o, log_), kNoSolution);
  EXPECT_EQ(io::read_json_file(o.out)["found"], false);

  write(path("bad_key.json"), R"({"coarse": 3})");
  o.config = path("bad_key.json");
  EXPECT_EQ(cmd_inverse(o, log_), kUsage);
  write(path("bad_type.json"), R"({"top_k": "five"})");
  o.config = path("bad_type.json");
  EXPECT_EQ(cmd_inverse(o, log_), kUsage);

  write(path("wp_bad.json"), "[[1,2,3]]");
  o.config.clear();
  o.waypoints = path("wp_bad.json");
  EXPECT_EQ(cmd_inverse(o, log_), kIo);
  o.waypoints = path("nope.json");
  EXPECT_EQ(cmd_inverse(o, log_), kIo);
}

TEST_F(CliTest, InverseDegenerateWaypointsNeverCrash) {
  write(path("zero.json"), "[[0,0,0,0,0,0,0],[0,0,0,0,0,0,0],[0,0,0,0,0,0,0]]");
  write(path("cfg.json"), R"({"coarse_na": 12, "coarse_nalpha": 16})");
  InverseOptions o;
  o.waypoints = path("zero.json");
  o.config = path("cfg.json");
  o.c99 = 29.44;
  o.out = path("inv.json");
  const int rc = cmd_inverse(o, log_);
  EXPECT_TRUE(rc == kOk || rc == kNoSolution);
}

TEST_F(CliTest, EvalIdentityAndHandFixture) {
  const auto raw = make_raw(8);
  const auto samples = io::read_samples_file(raw);
  ASSERT_GE(samples.size(), 2u);
  EvalOptions e{raw, raw, path("same.json")};
  ASSERT_EQ(cmd_eval(e, log_), kOk);
  const auto z = io::read_json_file(e.out);
  for (const char* k : {"a12_mae", "alpha12_mae", "param_mae", "traj_mae", "vel_mae"}) EXPECT_EQ(z[k], 0.0) << k;

  // sample 0: a12 +0.02, α wrapped by 2π − 0.1, trajectory +0.3 on every coordinate
  // sample 1: exact
  io::PredictionRecord p0{0, samples[0].a12 + 0.02, samples[0].alpha12 + kTwoPi - 0.1, samples[0].positions,
                          samples[0].velocities};
  for (auto& x : *p0.trajectory) x += Vec3::Constant(0.3);
  io::PredictionRecord p1{1, samples[1].a12, samples[1].alpha12, samples[1].positions, samples[1].velocities};
  write(path("pred.jsonl"), io::prediction_to_line(p1) + "\n" + io::prediction_to_line(p0) + "\n");
  EvalOptions h{path("pred.jsonl"), raw, path("hand.json")};
  ASSERT_EQ(cmd_eval(h, log_), kOk);
  const auto r = io::read_json_file(h.out);
  EXPECT_NEAR(r["a12_mae"].get<double>(), 0.01, 1e-12);
  EXPECT_NEAR(r["alpha12_mae"].get<double>(), 0.05, 1e-12);
  EXPECT_NEAR(r["param_mae"].get<double>(), 0.03, 1e-12);
  EXPECT_NEAR(r["traj_mae"].get<double>(), 0.15, 1e-12);
  EXPECT_EQ(r["vel_mae"].get<double>(), 0.0);
  EXPECT_EQ(r["n"], 2);
}

TEST_F(CliTest, EvalIdErrors) {
  const auto raw = make_raw(6);
  io::PredictionRecord p{0, 0.1, 0.2, std::nullopt, std::nullopt};
  write(path("dup.jsonl"), io::prediction_to_line(p) + "\n" + io::prediction_to_line(p) + "\n");
  EXPECT_EQ(cmd_eval({path("dup.jsonl"), raw, path("o.json")}, log_), kIo);
  p.id = 100000;
  write(path("unknown.jsonl"), io::prediction_to_line(p) + "\n");
  EXPECT_EQ(cmd_eval({path("unknown.jsonl"), raw, path("o.json")}, log_), kIo);
  p.id = 0;
  write(path("ok.jsonl"), io::prediction_to_line(p) + "\n");
  ASSERT_EQ(cmd_eval({path("ok.jsonl"), raw, path("o.json")}, log_), kOk);
  EXPECT_TRUE(io::read_json_file(path("o.json"))["traj_mae"].is_null());
  write(path("garbage.jsonl"), "{]\n");
  EXPECT_EQ(cmd_eval({path("garbage.jsonl"), raw, path("o.json")}, log_), kIo);
}

TEST_F(CliTest, ExportCsv) {
  const auto raw = make_raw(6);
  const auto samples = io::read_samples_file(raw);
  ExportOptions x{raw, 1, path("s.csv")};
  ASSERT_EQ(cmd_export(x, log_), kOk);
  std::ifstream f(x.out);
  std::string line;
  std::getline(f, line);
  EXPECT_EQ(line, "frame,px,py,pz,vx,vy,vz");
  int rows = 0;
  while (std::getline(f, line)) {
    if (rows == 10) {
      const auto c1 = line.find(',');
      const auto c2 = line.find(',', c1 + 1);
      EXPECT_EQ(std::stod(line.substr(c1 + 1, c2 - c1 - 1)), samples[1].positions[10].x());
    }
    ++rows;
  }
  EXPECT_EQ(rows, 64);
  EXPECT_EQ(cmd_export({raw, 100000, path("s.csv")}, log_), kUsage);
}

TEST(CliBinary, ExitCodes) {
  EXPECT_EQ(run_binary("--help"), 0);
  EXPECT_EQ(run_binary(""), 1);
  EXPECT_EQ(run_binary("gen --na"), 1);
  EXPECT_EQ(run_binary("gen --na abc --out /tmp/x"), 1);
  EXPECT_EQ(run_binary("frobnicate"), 1);
  EXPECT_EQ(run_binary("forward --a12 0.3"), 1);
  EXPECT_EQ(run_binary("export --in /nonexistent/file.jsonl --sample 0"), 2);
  EXPECT_EQ(run_binary("forward --a12 0.3 --alpha12 1.0472"), 0);
}
