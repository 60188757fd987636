#include <gtest/gtest.h>
#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "json.hpp"

namespace {

namespace fs = std::filesystem;
const fs::path kData = MINDIAG_TEST_DATA;

struct CliRun {
  int code = -1;
  std::string out;
};

CliRun run(const std::string& args, bool merge_stderr = false) {
  const std::string cmd = std::string(MINDIAG_CLI) + " " + args + (merge_stderr ? " 2>&1" : " 2>/dev/null");
  CliRun r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return r;
  std::array<char, 4096> buf{};
  std::size_t got = 0;
  while ((got = fread(buf.data(), 1, buf.size(), pipe)) > 0) r.out.append(buf.data(), got);
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("mindiag_cli_" + std::to_string(::getpid()));
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string write(const std::string& name, const std::string& text) {
    const fs::path p = dir_ / name;
    std::ofstream(p) << text;
    return p.string();
  }
  fs::path dir_;
};

nlohmann::json parse(const CliRun& r) { return nlohmann::json::parse(r.out); }

}  // namespace

TEST_F(Cli, MinimizeSwapMatrix) {
  const CliRun r = run("minimize --json " + write("swap.json", R"({"n": 2, "real": [[0, 1], [1, 0]]})"));
  ASSERT_EQ(r.code, 0) << r.out;
  const auto j = parse(r);
  EXPECT_NEAR(j["phi_star"].get<double>(), 1.0, 1e-9);
  EXPECT_EQ(j["verdict"], "minimal");
  for (const char* key : {"gap_tol", "cluster_tol", "tie_tol", "eps_min"}) EXPECT_TRUE(j["tolerances"].contains(key));
  EXPECT_EQ(j["input_sha256"].get<std::string>().size(), 64u);
}

TEST_F(Cli, MinimizeDiagonalMatrix) {
  const CliRun r = run("minimize --json " + write("d.json", R"({"n": 2, "real": [[3, 0], [0, 1]]})"));
  ASSERT_EQ(r.code, 0);
  EXPECT_LE(parse(r)["phi_star"].get<double>(), 1e-12);
}

TEST_F(Cli, MinimizeGenericInputAndFlags) {
  const CliRun r = run("minimize --json --seed 5 --starts 3 --max-iters 500 --gap-tol 1e-8 " +
                    (kData / "golden_3x3.json").string());
  ASSERT_EQ(r.code, 0);
  const auto j = parse(r);
  EXPECT_EQ(j["starts"], 3);
  EXPECT_EQ(j["seed"], 5);
  EXPECT_EQ(j["max_iters"], 500);
  EXPECT_EQ(j["tolerances"]["gap_tol"], 1e-8);
  EXPECT_EQ(j["method"], "quasi_newton");
  EXPECT_FALSE(j["trace"].empty());
}

TEST_F(Cli, MalformedInputExitsTwoAndNamesTheField) {
  CliRun r = run("minimize " + write("bad.json", R"({"n": 2, "real": [[0, 1], [1, "x"]]})"), true);
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.out.find("real[1][1]"), std::string::npos) << r.out;
  r = run("minimize " + write("trunc.json", R"({"n": 2, "real": )"), true);
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.out.find("invalid JSON"), std::string::npos);
  EXPECT_EQ(run("minimize " + (dir_ / "missing.json").string()).code, 2);
  EXPECT_EQ(run("certify --x 1,2,3 " + write("s.json", R"({"n": 2, "real": [[0, 1], [1, 0]]})")).code, 2);
  EXPECT_EQ(run("minimize --step-rule nope " + write("s2.json", R"({"n": 1, "real": [[1]]})")).code, 2);
}

TEST_F(Cli, UsageErrorsExitTwo) {
  EXPECT_EQ(run("").code, 2);
  EXPECT_EQ(run("frobnicate").code, 2);
  EXPECT_EQ(run("minimize").code, 2);
  EXPECT_EQ(run("minimize --starts 0 x.json").code, 2);
  EXPECT_EQ(run("--help").code, 0);
}

TEST_F(Cli, CertifyExitCodes) {
  const std::string swap = write("swap.json", R"({"n": 2, "real": [[0, 1], [1, 0]]})");
  EXPECT_EQ(run("certify " + swap).code, 0);
  EXPECT_EQ(run("certify --x 0,0 " + swap).code, 0);

  const CliRun r = run("certify --json " + write("d.json", R"({"n": 2, "real": [[1, 0], [0, -1]]})"));
  EXPECT_EQ(r.code, 1);
  const auto j = parse(r);
  EXPECT_EQ(j["verdict"], "not_minimal");
  EXPECT_EQ(j["certificate"]["descent_direction"].size(), 2u);

  // lambda_max + lambda_min = 1e-9: the tie is inside clustering but a
  // shift by the identity would still lower the norm.
  const std::string near =
      write("near.json", R"({"n": 2, "real": [[0.5e-9, 1], [1, 0.5e-9]]})");
  EXPECT_EQ(run("certify " + near).code, 3);
}

TEST_F(Cli, ReportsAreByteIdenticalAcrossRuns) {
  const std::string in = (kData / "golden_3x3.json").string();
  const CliRun a = run("minimize --json --seed 17 --starts 4 " + in);
  const CliRun b = run("minimize --json --seed 17 --starts 4 " + in);
  ASSERT_EQ(a.code, 0);
  EXPECT_EQ(a.out, b.out);
  const CliRun c = run("certify --json --x 1,2,3 " + in);
  EXPECT_EQ(c.out, run("certify --json --x 1,2,3 " + in).out);
}

TEST_F(Cli, ExportSdpaMatchesGolden) {
  const fs::path out = dir_ / "g.dat-s";
  ASSERT_EQ(run("export-sdpa " + (kData / "golden_3x3.json").string() + " " + out.string()).code, 0);
  std::ifstream a(out, std::ios::binary), b(kData / "golden_3x3.dat-s", std::ios::binary);
  const std::string sa((std::istreambuf_iterator<char>(a)), {}), sb((std::istreambuf_iterator<char>(b)), {});
  EXPECT_EQ(sa, sb);
  EXPECT_EQ(run("export-sdpa " + (kData / "golden_3x3.json").string() + " " + (dir_ / "no/such/dir.dat-s").string())
                .code,
            2);
}

TEST_F(Cli, RankOneCases) {
  CliRun r = run("rank1 --json --h 0.8944271909999159,0.4472135954999579");
  ASSERT_EQ(r.code, 0);
  auto j = parse(r);
  EXPECT_EQ(j["case"], "big_coordinate");
  EXPECT_NEAR(j["minimal_norm"].get<double>(), 0.4, 1e-12);

  r = run("rank1 --json --h 0.7071067811865476,0.7071067811865476");
  ASSERT_EQ(r.code, 0);
  j = parse(r);
  EXPECT_NE(j["case"], "big_coordinate");
  for (const auto& d : j["diagonal"]) EXPECT_NEAR(d.get<double>(), -0.5, 1e-12);

  r = run("rank1 --json --h 0.6,0,0.64,0.48");
  ASSERT_EQ(r.code, 0);
  j = parse(r);
  EXPECT_EQ(j["case"], "spread");
  EXPECT_FALSE(j["unique"].get<bool>());
  ASSERT_EQ(j["zero_coordinate_witnesses"].size(), 1u);
  const auto& w = j["zero_coordinate_witnesses"][0];
  EXPECT_EQ(w["index"], 1);
  EXPECT_NEAR(w["plus"][1].get<double>(), 0.5, 1e-12);
  EXPECT_NEAR(w["minus"][1].get<double>(), -0.5, 1e-12);
  EXPECT_EQ(j["polygon_angles"].size(), 4u);

  const std::string file = write("h.json", R"({"real": [0.6, 0.8], "imag": [0, 0]})");
  EXPECT_EQ(run("rank1 " + file).code, 0);
  EXPECT_EQ(run("rank1 --h 0.5,0.5").code, 2);
  EXPECT_EQ(run("rank1 --h 0.6,abc").code, 2);
  EXPECT_EQ(run("rank1").code, 2);
}
