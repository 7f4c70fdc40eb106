#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "nhk/commands.hpp"

namespace {

using namespace nhk;
namespace fs = std::filesystem;

RunConfig load(const std::string& name) {
  return parse_config(std::string_view(io::read_file(std::string(NHK_SOURCE_DIR) + "/configs/" + name)));
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("nhk_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  int run(const std::string& command, const RunConfig& cfg, const fs::path& sub = "a") {
    cli::Context ctx{cfg, dir_ / sub, &out_, nullptr};
    return cli::execute(command, ctx, err_);
  }

  std::string file(const std::string& name, const fs::path& sub = "a") const {
    return io::read_file(dir_ / sub / name);
  }

  static std::vector<std::string> data_lines(const std::string& csv) {
    std::vector<std::string> out;
    std::istringstream in(csv);
    for (std::string line; std::getline(in, line);) {
      if (!line.empty() && line[0] != '#') out.push_back(line);
    }
    return out;
  }

  fs::path dir_;
  std::ostringstream out_, err_;
};

TEST_F(CliTest, SpectrumFirstRows) {
  ASSERT_EQ(run("spectrum", load("hemisphere.json")), cli::kSuccess) << err_.str();
  const auto rows = data_lines(file("spectrum_sorted.csv"));
  ASSERT_GT(rows.size(), 11u);
  EXPECT_EQ(rows[0], "k,lambda,l,j");
  const double expect[10] = {0, 2, 2, 6, 6, 6, 12, 12, 12, 12};
  for (int k = 0; k < 10; ++k) {
    std::istringstream row(rows[k + 1]);
    std::string idx, lambda;
    std::getline(row, idx, ',');
    std::getline(row, lambda, ',');
    EXPECT_EQ(std::stoi(idx), k);
    EXPECT_NEAR(std::stod(lambda), expect[k], 1e-4 * std::max(1.0, expect[k]));
  }
  EXPECT_EQ(data_lines(file("spectrum.csv"))[0], "l,j,lambda,multiplicity");
  EXPECT_NE(file("spectrum.csv").find("# lambda_cut: 1681"), std::string::npos);
  EXPECT_TRUE(fs::exists(dir_ / "a" / "run_meta.json"));
}

TEST_F(CliTest, BoundsRowAtUnitTime) {
  RunConfig cfg = load("hemisphere_bounds.json");
  ASSERT_EQ(run("bounds", cfg), cli::kSuccess) << err_.str();
  const auto rows = data_lines(file("bounds_t.csv"));
  EXPECT_EQ(rows[0], "t,ondiag_lower,ondiag_upper,trace_lower,trace_upper,refined_upper,refined_branch,liyau_a,liyau_b");
  const std::string* unit = nullptr;
  for (const auto& r : rows) {
    if (r.rfind("1.00000,", 0) == 0) unit = &r;
  }
  ASSERT_NE(unit, nullptr);
  for (const char* v : {"0.109029", "0.327087", "0.685049", "2.05515", "0.654747"}) {
    EXPECT_NE(unit->find(v), std::string::npos) << v << " in " << *unit;
  }
  const auto k = data_lines(file("bounds_k.csv"));
  EXPECT_EQ(k[0], "k,bound1,bound2,lb1_asym,lb2_asym,lb2_leading,weyl");
  EXPECT_EQ(k[2].rfind("1,0.507642,,", 0), 0u) << k[2];
}

TEST_F(CliTest, OutputsAreByteIdenticalAcrossRuns) {
  RunConfig cfg = load("hemisphere.json");
  cfg.solver.mesh_points = 400;
  cfg.solver.l_max = 12;
  for (const char* cmd : {"spectrum", "trace", "bounds", "verify"}) {
    ASSERT_NE(run(cmd, cfg, "a"), cli::kConfigError) << cmd << err_.str();
    ASSERT_NE(run(cmd, cfg, "b"), cli::kConfigError) << cmd << err_.str();
  }
  for (const char* f : {"spectrum.csv", "spectrum_sorted.csv", "trace.csv", "bounds_t.csv", "bounds_k.csv",
                        "report.json", "report.csv"}) {
    EXPECT_EQ(file(f, "a"), file(f, "b")) << f;
  }
}

TEST_F(CliTest, JsonFormat) {
  RunConfig cfg = load("hemisphere.json");
  cfg.output.format = "json";
  cfg.grids.t = TimeGrid{0.5, 1.0, 2, false};
  ASSERT_EQ(run("trace", cfg), cli::kSuccess);
  const json j = json::parse(file("trace.json"));
  EXPECT_EQ(j["columns"][1], "trace");
  EXPECT_EQ(j["rows"].size(), 2u);
  EXPECT_NEAR(j["rows"][1][1].get<double>(), 1.278131, 1e-5);
}

TEST_F(CliTest, ReportWritesPlotDataAndSummary) {
  RunConfig cfg = load("hemisphere.json");
  cfg.solver.mesh_points = 600;
  cfg.solver.l_max = 20;
  ASSERT_EQ(run("report", cfg), cli::kSuccess) << err_.str();
  EXPECT_NE(file("report.dat").find("# t trace trace_lower"), std::string::npos);
  EXPECT_NE(out_.str().find("verdict: pass"), std::string::npos);
}

TEST_F(CliTest, ExitCodes) {
  RunConfig cfg = load("hemisphere.json");
  cfg.checks = {CheckId::C7};
  EXPECT_EQ(run("verify", cfg), cli::kSuccess);

  RunConfig broken = cfg;
  broken.model.cap_fraction = 1.2;
  EXPECT_EQ(run("verify", broken), cli::kConfigError);
  EXPECT_NE(err_.str().find("convex boundary"), std::string::npos);
  EXPECT_EQ(run("nonsense", cfg), cli::kConfigError);

  RunConfig truncated = cfg;
  truncated.solver.l_max = 0;
  EXPECT_EQ(run("spectrum", truncated), cli::kSolverError);
}

}  // namespace
