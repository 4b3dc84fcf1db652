#include <gtest/gtest.h>
#include <sys/wait.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "collage/image.hpp"
#include "collage/ppm.hpp"

namespace fs = std::filesystem;

namespace {

const std::string kCli = COLLAGE_CLI;
const fs::path kFixtures = COLLAGE_FIXTURE_DIR;
const fs::path kGolden = COLLAGE_GOLDEN_DIR;
const fs::path kConfigs = COLLAGE_CONFIG_DIR;

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string fixture_path(const std::string& name) { return (kFixtures / name).string(); }

struct CliRun {
  int code = -1;
  std::string out;
  std::string err;
};

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("collage_cli_" + std::to_string(::getpid()) + "_" +
            ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  CliRun run(const std::string& args) {
    const std::string cmd = kCli + " " + args + " >" + (dir_ / "stdout").string() + " 2>" + (dir_ / "stderr").string();
    const int status = std::system(cmd.c_str());
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, slurp(dir_ / "stdout"), slurp(dir_ / "stderr")};
  }

  fs::path path(const std::string& name) const { return dir_ / name; }

  void write(const std::string& name, const std::string& text) { std::ofstream(path(name), std::ios::binary) << text; }

  static std::string fixture(const std::string& name) { return fixture_path(name); }

 private:
  fs::path dir_;
};

std::string colours() {
  return fixture_path("red.ppm") + " " + fixture_path("green.ppm") + " " + fixture_path("blue.ppm") + " " +
         fixture_path("white.ppm");
}

}  // namespace

TEST_F(CliTest, EncodeMatchesGolden) {
  const CliRun r = run("encode --grid 2 --cell 4x4 --out " + path("c.ppm").string() + " " + colours());
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(slurp(path("c.ppm")), slurp(kGolden / "collage_2x2.ppm"));
}

TEST_F(CliTest, EncodeSingleCellIsPlainResize) {
  const CliRun r = run("encode --grid 1 --cell 9x5 --out " + path("c.ppm").string() + " " + fixture("gradient.ppm"));
  ASSERT_EQ(r.code, 0) << r.err;
  const auto src = collage::load_ppm(fixture("gradient.ppm"));
  EXPECT_EQ(collage::load_ppm(path("c.ppm")), collage::resize_bilinear(src, 9, 5));
}

TEST_F(CliTest, EncodeWrongImageCountIsUsageError) {
  const CliRun r = run("encode --grid 2 --out " + path("c.ppm").string() + " " + fixture("red.ppm") + " " +
                    fixture("green.ppm") + " " + fixture("blue.ppm"));
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("needs 4 images"), std::string::npos);
  EXPECT_FALSE(fs::exists(path("c.ppm")));
}

TEST_F(CliTest, EncodeBadPpmIsDataError) {
  write("bad.ppm", "P3\n1 1\n255\n0 0 0\n");
  const CliRun r = run("encode --grid 1 --out " + path("c.ppm").string() + " " + path("bad.ppm").string());
  EXPECT_EQ(r.code, 2);
}

TEST_F(CliTest, DecodeEmptyBoxesAllMissing) {
  const CliRun r = run("decode --grid 2 " + fixture("boxes_empty.json"));
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out, "cell,class_id,confidence\n0,MISSING,MISSING\n1,MISSING,MISSING\n2,MISSING,MISSING\n3,MISSING,MISSING\n");
}

TEST_F(CliTest, DecodeOneBoxPerCell) {
  const CliRun r = run("decode --grid 2 " + fixture("boxes_2x2.json"));
  ASSERT_EQ(r.code, 0) << r.err;
  std::istringstream lines(r.out);
  std::string line;
  std::getline(lines, line);
  EXPECT_EQ(line, "cell,class_id,confidence");
  const int expected[] = {7, 3, 9, 1};
  for (int i = 0; i < 4; ++i) {
    ASSERT_TRUE(std::getline(lines, line));
    EXPECT_EQ(line.substr(0, line.rfind(',')), std::to_string(i) + "," + std::to_string(expected[i]));
  }
}

TEST_F(CliTest, DecodeOverlapKeepsMostConfident) {
  const CliRun r = run("decode --grid 2 " + fixture("boxes_overlap.json"));
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("\n0,5,"), std::string::npos);
  const CliRun hi = run("decode --grid 2 --min-confidence 0.9 " + fixture("boxes_overlap.json"));
  EXPECT_NE(hi.out.find("\n0,MISSING,MISSING"), std::string::npos);
}

TEST_F(CliTest, DecodeErrorsNameTheLine) {
  CliRun r = run("decode --grid 2 " + fixture("boxes_malformed.json"));
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("boxes_malformed.json:3:"), std::string::npos) << r.err;
  r = run("decode --grid 2 " + fixture("boxes_bad_extent.json"));
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("boxes_bad_extent.json:3:"), std::string::npos) << r.err;
}

TEST_F(CliTest, SimulateIsDeterministicAndMatchesGolden) {
  const std::string cfg = (kConfigs / "default.json").string();
  const CliRun a = run("simulate --quiet --seed 42 --config " + cfg);
  ASSERT_EQ(a.code, 0) << a.err;
  const CliRun b = run("simulate --quiet --seed 42 --config " + cfg);
  EXPECT_EQ(a.out, b.out);
  EXPECT_EQ(a.out, slurp(kGolden / "default_seed42.csv"));
  EXPECT_NE(run("simulate --quiet --seed 1 --config " + cfg).out, run("simulate --quiet --seed 2 --config " + cfg).out);
}

TEST_F(CliTest, SimulateOutWritesCsvAndPrintsTable) {
  const CliRun r = run("simulate --seed 42 --config " + (kConfigs / "default.json").string() + " --out " +
                    path("r.csv").string());
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(slurp(path("r.csv")), slurp(kGolden / "default_seed42.csv"));
  EXPECT_NE(r.out.find("COLLAGE_3x3"), std::string::npos);
}

TEST_F(CliTest, SimulateBadConfigNamesField) {
  write("bad.json", R"({"num_batches": 5, "grid_s": 2, "single_model": {"mu": 1},
    "collage_model": {"mu": 1}, "protocol": {"straggler_deadline_ms": 9, "reissue_deadline_ms": 3},
    "schemes": [{"type": "collage"}]})");
  const CliRun r = run("simulate --config " + path("bad.json").string());
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("protocol.reissue_deadline_ms"), std::string::npos) << r.err;
  EXPECT_TRUE(r.out.empty());
}

TEST_F(CliTest, ReportAggregatesAndOrders) {
  const std::string cfg = (kConfigs / "default.json").string();
  ASSERT_EQ(run("simulate --quiet --seed 1 --config " + cfg + " --out " + path("a.csv").string()).code, 0);
  ASSERT_EQ(run("simulate --quiet --seed 2 --config " + cfg + " --out " + path("b.csv").string()).code, 0);
  const CliRun r = run("report --in " + path("a.csv").string() + " --in " + path("b.csv").string());
  ASSERT_EQ(r.code, 0) << r.err;
  std::istringstream lines(r.out);
  std::string line;
  std::vector<std::string> ids;
  std::getline(lines, line);
  while (std::getline(lines, line)) ids.push_back(line.substr(0, line.find(',')));
  EXPECT_EQ(ids, (std::vector<std::string>{"NO_REDUNDANCY", "REPLICATION_2", "COLLAGE_3x3"}));

  const CliRun svg = run("report --format svg --in " + path("a.csv").string());
  ASSERT_EQ(svg.code, 0);
  EXPECT_NE(svg.out.find("<svg"), std::string::npos);
  EXPECT_NE(svg.out.find("data-scheme=\"COLLAGE_3x3\""), std::string::npos);
}

TEST_F(CliTest, ReportRejectsForeignCsv) {
  write("x.csv", "name,value\nfoo,1\n");
  const CliRun r = run("report --in " + path("x.csv").string());
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("x.csv:1:"), std::string::npos) << r.err;
}

TEST_F(CliTest, UnknownFlagIsUsageError) {
  EXPECT_EQ(run("simulate --frobnicate").code, 1);
  EXPECT_EQ(run("").code, 1);
  EXPECT_EQ(run("--help").code, 0);
}

TEST_F(CliTest, ServeAgainstFakeBackends) {
  const std::string fake = COLLAGE_FAKE_BACKEND;
  write("serve.json", R"({"grid_s": 2, "single_backends": [")" + fake + R"( --class 4", ")" + fake +
                          R"( --class 4 --stall /single/1"], "collage_backend": ")" + fake +
                          R"( --class 8", "protocol": {"straggler_deadline_ms": 150, "reissue_deadline_ms": 400},
      "reissue_timeout_ms": 300, "cell": [4, 4]})");
  const CliRun r = run("serve --config " + path("serve.json").string() + " --events " + path("ev.jsonl").string() + " " +
                    colours());
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(fs::exists(path("batch.collage.ppm")));
  std::istringstream lines(r.out);
  std::string line;
  std::getline(lines, line);
  EXPECT_EQ(line, "request,status,source,class_id,time_ms,wall_ms");
  std::vector<std::string> rows;
  while (std::getline(lines, line)) rows.push_back(line);
  ASSERT_EQ(rows.size(), 4u);
  EXPECT_TRUE(rows[0].starts_with("0,OK,SINGLE,4,"));
  EXPECT_TRUE(rows[1].starts_with("1,OK,COLLAGE,8,"));

  // The recorded log replays offline to the same answers.
  write("replay.json", R"({"num_batches": 1, "grid_s": 2, "single_model": {"mu": 1}, "collage_model": {"mu": 1},
    "protocol": {"straggler_deadline_ms": 150, "reissue_deadline_ms": 400}, "schemes": [{"type": "collage"}]})");
  const CliRun rep = run("simulate --config " + path("replay.json").string() + " --replay " + path("ev.jsonl").string());
  ASSERT_EQ(rep.code, 0) << rep.err;
  EXPECT_NE(rep.out.find("\n1,OK,COLLAGE,8,"), std::string::npos) << rep.out;
  EXPECT_NE(rep.out.find("\n0,OK,SINGLE,4,"), std::string::npos) << rep.out;
}

TEST_F(CliTest, ServeReportsFailedRequests) {
  const std::string fake = COLLAGE_FAKE_BACKEND;
  write("serve.json", R"({"grid_s": 1, "single_backends": [")" + fake + R"( --stall '*'"], "collage_backend": ")" +
                          fake + R"( --stall '*'", "protocol": {"straggler_deadline_ms": 50, "reissue_deadline_ms": 100},
      "reissue_timeout_ms": 100, "compose_collage": false})");
  const CliRun r = run("serve --config " + path("serve.json").string() + " " + fixture("red.ppm"));
  EXPECT_EQ(r.code, 2);
  EXPECT_TRUE(r.out.find("0,FAILED,") != std::string::npos) << r.out;
}
