#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>

#include "cli.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const fs::path kData = METRIC_FORGE_TEST_DATA;

struct Run {
  int code;
  json report;
  std::string raw;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = metric_forge::cli::run(args, out, err);
  Run r{code, json(), out.str()};
  if (!r.raw.empty() && r.raw.front() == '{') r.report = json::parse(r.raw);
  return r;
}

std::string cfg(const std::string& name) { return (kData / name).string(); }

fs::path scratch_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("metric_forge_cli_test_" + name);
  fs::remove_all(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

TEST(CliCheckNdk, SquaredDifferencePasses) {
  const auto r = run({"check-ndk", "--config", cfg("check_sqdiff.json")});
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(r.report["status"], "pass");
  EXPECT_EQ(r.report["parameters"]["trials"], 1000);
  EXPECT_EQ(r.report["result"]["check"]["trials"], 1000);
}

TEST(CliCheckNdk, ProductKernelFailsWithWitness) {
  const auto r = run({"check-ndk", "--config", cfg("check_product.json")});
  EXPECT_EQ(r.code, 2);
  EXPECT_EQ(r.report["status"], "fail");
  EXPECT_TRUE(r.report["result"]["check"]["witness"].is_object());
  EXPECT_GT(r.report["result"]["check"]["worst_value"].get<double>(), 1e-10);
}

TEST(CliCheckNdk, EmptyPointsIsValidationError) {
  const auto r = run({"check-ndk", "--config", cfg("check_empty.json")});
  EXPECT_EQ(r.code, 1);
  EXPECT_EQ(r.report["status"], "error");
  EXPECT_EQ(r.report["error"]["kind"], "validation");
}

TEST(CliCheckNdk, RepeatedPointIsDegenerate) {
  const fs::path dir = scratch_dir("degenerate");
  fs::create_directories(dir);
  std::ofstream(dir / "pts.csv") << "2\n2\n2\n";
  const auto r = run({"check-ndk", "--config", cfg("check_sqdiff.json"), "--points",
                      (dir / "pts.csv").string(), "--trials", "50"});
  EXPECT_EQ(r.code, 3);
  EXPECT_EQ(r.report["status"], "degenerate");
  EXPECT_EQ(r.report["parameters"]["trials"], 50);
}

TEST(CliCheckNdk, FlagsOverrideConfigAndSeedIsRequired) {
  const auto a = run({"check-ndk", "--config", cfg("check_sqdiff.json"), "--seed", "5"});
  EXPECT_EQ(a.report["parameters"]["seed"], 5);
  const fs::path dir = scratch_dir("noseed");
  fs::create_directories(dir);
  std::ofstream(dir / "c.json")
      << R"({"version": 1, "kernel": "squared_difference", "points": [1, 2, 3]})";
  const auto b = run({"check-ndk", "--config", (dir / "c.json").string()});
  EXPECT_EQ(b.code, 1);
  EXPECT_NE(b.report["error"]["message"].get<std::string>().find("seed"), std::string::npos);
}

TEST(CliCheckNdk, UnknownConfigFieldRejected) {
  const fs::path dir = scratch_dir("unknown");
  fs::create_directories(dir);
  std::ofstream(dir / "c.json")
      << R"({"version": 1, "seed": 1, "kernel": "squared_difference", "points": [1, 2], "trails": 5})";
  const auto r = run({"check-ndk", "--config", (dir / "c.json").string()});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.report["error"]["message"].get<std::string>().find("trails"), std::string::npos);
  std::ofstream(dir / "v.json") << R"({"seed": 1, "kernel": "squared_difference", "points": [1, 2]})";
  EXPECT_EQ(run({"check-ndk", "--config", (dir / "v.json").string()}).code, 1);
}

TEST(CliCheckM, PairingPassesWithStrongCheck) {
  const auto r = run({"check-m", "--config", cfg("check_m_pairing.json"), "--m", "4"});
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(r.report["result"]["engine"], "m_forms");
  EXPECT_TRUE(r.report["result"]["strong_check"].is_object());
}

TEST(CliCheckM, NegatedPairingFails) {
  EXPECT_EQ(run({"check-m", "--config", cfg("check_m_neg_pairing.json")}).code, 2);
}

TEST(CliCheckM, OrderMismatchAndOddOrder) {
  EXPECT_EQ(run({"check-m", "--config", cfg("check_m_pairing.json"), "--m", "6"}).code, 1);
  EXPECT_EQ(run({"check-ndk", "--config", cfg("check_sqdiff.json"), "--m", "3"}).code, 1);
}

TEST(CliCheckM, MEqualsTwoMatchesKernelCore) {
  const auto a = run({"check-ndk", "--config", cfg("check_sqdiff.json")});
  const auto b = run({"check-m", "--config", cfg("check_sqdiff.json"), "--m", "2"});
  EXPECT_EQ(a.code, b.code);
  EXPECT_EQ(a.report["result"]["check"]["worst_value"].get<double>(),
            -b.report["result"]["check"]["worst_value"].get<double>());
}

TEST(CliCheckM, BudgetFromEnvironment) {
  setenv("METRIC_FORGE_BUDGET", "10", 1);
  const auto r = run({"check-m", "--config", cfg("check_m_pairing.json")});
  unsetenv("METRIC_FORGE_BUDGET");
  EXPECT_EQ(r.code, 1);
  EXPECT_EQ(r.report["error"]["kind"], "resource");
  setenv("METRIC_FORGE_BUDGET", "ten", 1);
  const auto bad = run({"check-m", "--config", cfg("check_m_pairing.json")});
  unsetenv("METRIC_FORGE_BUDGET");
  EXPECT_EQ(bad.code, 1);
}

TEST(CliInduce, TwoProjectionPasses) {
  const fs::path dir = scratch_dir("induce");
  const auto r = run({"induce", "--config", cfg("induce_two_projection.json"), "--out", dir.string()});
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(r.report["result"]["separation"]["verdict"], "pass");
  EXPECT_EQ(r.report["result"]["axioms"]["verdict"], "pass");
  const auto& entries = r.report["result"]["distance_matrix"]["entries"];
  ASSERT_EQ(entries.size(), 4u);
  EXPECT_NEAR(entries[0][3].get<double>(), 1.0, 1e-12);
  EXPECT_TRUE(fs::exists(dir / "distances.csv"));
  EXPECT_EQ(slurp(dir / "report.json"), r.raw);
  const std::string csv = slurp(dir / "distances.csv");
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "p0,p1,p2,p3");
}

TEST(CliInduce, SingleProjectionRequireMetric) {
  const auto plain = run({"induce", "--config", cfg("induce_single_projection.json")});
  EXPECT_EQ(plain.code, 0);
  EXPECT_EQ(plain.report["result"]["metric_kind"], "pseudometric");
  const auto strict =
      run({"induce", "--config", cfg("induce_single_projection.json"), "--require-metric"});
  EXPECT_EQ(strict.code, 2);
  EXPECT_TRUE(strict.report["result"]["separation"]["witness"].is_object());
}

TEST(CliInduce, SamplerWithoutSeedIsRejected) {
  const auto r = run({"induce", "--config", cfg("induce_sampler_noseed.json")});
  EXPECT_EQ(r.code, 1);
  const auto seeded = run({"induce", "--config", cfg("induce_sampler_noseed.json"), "--seed", "3"});
  EXPECT_EQ(seeded.code, 0);
  EXPECT_TRUE(seeded.report["parameters"]["measure"].contains("seed"));
  EXPECT_GT(seeded.report["result"]["max_stderr"].get<double>(), 0.0);
}

TEST(CliEmbed, LineMetric) {
  const fs::path dir = scratch_dir("embed");
  const auto r = run({"embed", "--matrix", cfg("line_metric.csv"), "--out", dir.string()});
  EXPECT_EQ(r.code, 0);
  const auto& e = r.report["result"]["embedding"];
  EXPECT_NEAR(e["eigenvalues"][0].get<double>(), 2.0, 1e-10);
  EXPECT_NEAR(e["eigenvalues"][1].get<double>(), 0.0, 1e-10);
  EXPECT_NEAR(e["eigenvalues"][2].get<double>(), 0.0, 1e-10);
  EXPECT_LE(e["residual"].get<double>(), 1e-10);
  EXPECT_TRUE(fs::exists(dir / "coordinates.csv"));
}

TEST(CliEmbed, StarMetricNotEmbeddable) {
  const auto r = run({"embed", "--matrix", cfg("star_metric.csv")});
  EXPECT_EQ(r.code, 2);
  EXPECT_LT(r.report["result"]["embedding"]["min_eigenvalue"].get<double>(), -1e-3);
  EXPECT_FALSE(r.report["result"]["embedding"]["coordinates"].empty());
}

TEST(CliEmbed, MalformedInputs) {
  EXPECT_EQ(run({"embed", "--matrix", cfg("single.csv")}).code, 1);
  const fs::path dir = scratch_dir("malformed");
  fs::create_directories(dir);
  std::ofstream(dir / "neg.csv") << "a,b\n0,-1\n-1,0\n";
  std::ofstream(dir / "asym.csv") << "a,b\n0,1\n1.001,0\n";
  std::ofstream(dir / "diag.csv") << "a,b\n1,1\n1,0\n";
  for (const char* f : {"neg.csv", "asym.csv", "diag.csv"}) {
    const auto r = run({"embed", "--matrix", (dir / f).string()});
    EXPECT_EQ(r.code, 1) << f;
    EXPECT_EQ(r.report["error"]["kind"], "validation") << f;
  }
  EXPECT_EQ(run({"embed", "--matrix", (dir / "missing.csv").string()}).report["error"]["kind"], "io");
}

TEST(CliEmbed, InducedSubConfig) {
  const auto r = run({"embed", "--config", cfg("embed_induced.json")});
  EXPECT_EQ(r.code, 0);
  EXPECT_TRUE(r.report["parameters"].contains("induce"));
}

TEST(CliDemo, CoordinateFunctionalsEmbeddable) {
  const auto r = run({"demo-example1", "--config", cfg("demo_coordinates.json")});
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(r.report["result"]["embedding"]["verdict"], "embeddable");
  EXPECT_EQ(r.report["result"]["inner_product_gram"].size(), 6u);
  const auto& probe = r.report["result"]["inner_product_probes"][0];
  EXPECT_NEAR(probe["value"].get<double>(), 0.0, 1e-12);
  EXPECT_LE(r.report["result"]["polarization_residual"].get<double>(), 1e-10);
}

TEST(CliDemo, ConstantFamilyFailsSeparation) {
  const auto r = run({"demo-example1", "--config", cfg("demo_constant.json")});
  EXPECT_EQ(r.code, 2);
  bool separation_failed = false;
  for (const auto& item : r.report["result"]["chain"]) {
    if (item["name"] == "separation") separation_failed = !item["holds"].get<bool>();
  }
  EXPECT_TRUE(separation_failed);
}

TEST(CliDriver, UsageErrorsAndDeterminismFlag) {
  EXPECT_EQ(run({}).code, 1);
  EXPECT_EQ(run({"frobnicate"}).code, 1);
  EXPECT_EQ(run({"embed", "--trials", "many"}).code, 1);
  EXPECT_EQ(run({"embed", "--help"}).code, 0);
  const auto a = run({"embed", "--matrix", cfg("line_metric.csv")});
  const auto b = run({"embed", "--matrix", cfg("line_metric.csv")});
  EXPECT_EQ(a.raw, b.raw);
  EXPECT_FALSE(a.report.contains("generated_at"));
  const auto c = run({"embed", "--matrix", cfg("line_metric.csv"), "--no-deterministic"});
  EXPECT_TRUE(c.report.contains("generated_at"));
}
