#include <gtest/gtest.h>
#include <sys/wait.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "wiplus/io/json.hpp"

namespace fs = std::filesystem;

namespace {

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("wiplus_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  int run(const std::string& args) {
    const std::string cmd = "cd '" + dir_.string() + "' && '" WIPLUS_CLI_PATH "' " + args + " >out.txt 2>err.txt";
    const int rc = std::system(cmd.c_str());
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
  }
  std::string file(const std::string& name) { return wiplus::io::read_text_file((dir_ / name).string()); }
  void write(const std::string& name, const std::string& text) { std::ofstream(dir_ / name) << text; }

  fs::path dir_;
};

}  // namespace

TEST_F(Cli, SynthWritesTraceTruthAndManifest) {
  ASSERT_EQ(run("synth --preset exp1-csat80-duty33 --duration 2 --out t.csv --truth truth.json"), 0);
  EXPECT_TRUE(fs::exists(dir_ / "t.csv"));
  const auto truth = wiplus::io::Json::parse(file("truth.json"));
  EXPECT_NEAR(truth["links"][0]["airtime"].get<double>(), 0.67, 1e-9);
  EXPECT_DOUBLE_EQ(truth["lteu"]["csat_period_s"].get<double>(), 0.08);
  const auto m = wiplus::io::read_manifest((dir_ / "t.csv.manifest.json").string());
  EXPECT_EQ(m.command, "synth");
  EXPECT_EQ(m.outputs.size(), 2u);
  EXPECT_EQ(m.outputs.at("t.csv"), wiplus::io::sha256_file((dir_ / "t.csv").string()));
}

TEST_F(Cli, Experiment2PresetIs160ms) {
  ASSERT_EQ(run("synth --preset exp2-csat160-var --duration 2 --out t.csv --truth truth.json"), 0);
  const auto truth = wiplus::io::Json::parse(file("truth.json"));
  EXPECT_DOUBLE_EQ(truth["lteu"]["csat_period_s"].get<double>(), 0.16);
  EXPECT_EQ(truth["lteu"]["on_load"]["model"], "uniform");
}

TEST_F(Cli, MissingConfigFails) {
  EXPECT_EQ(run("synth --config missing.cfg --out t.csv"), 1);
  EXPECT_NE(file("err.txt").find("missing.cfg"), std::string::npos);
}

TEST_F(Cli, ConfigErrorsNameTheLine) {
  write("bad.cfg", "duration_s = 2\nlteu.duty_cycle = lots\n");
  EXPECT_EQ(run("synth --config bad.cfg --out t.csv"), 1);
  EXPECT_NE(file("err.txt").find("bad.cfg:2"), std::string::npos);
}

TEST_F(Cli, DetectStrongTraceExitsZero) {
  ASSERT_EQ(run("synth --preset exp1-csat80-duty33 --duration 3 --out t.csv"), 0);
  ASSERT_EQ(run("detect --trace t.csv --json r.ndjson"), 0);
  std::istringstream lines(file("r.ndjson"));
  std::string line;
  int n = 0;
  while (std::getline(lines, line)) {
    const auto j = wiplus::io::Json::parse(line);
    EXPECT_EQ(j["status"], "detected");
    EXPECT_NEAR(j["airtime"].get<double>(), 0.67, 0.03);
    ++n;
  }
  EXPECT_EQ(n, 3);
}

TEST_F(Cli, DetectWeakTraceExitsTwo) {
  write("weak.cfg", "preset = exp1-csat80-duty33\nduration_s = 2\nwifi.regime = weak\n");
  ASSERT_EQ(run("synth --config weak.cfg --out t.csv"), 0);
  EXPECT_EQ(run("detect --trace t.csv"), 2);
}

TEST_F(Cli, DetectCorruptCsvExitsOne) {
  write("bad.csv", "ticks,tx,rx,ed,idle,ack_fail\n1,2,3\n");
  EXPECT_EQ(run("detect --trace bad.csv"), 1);
}

TEST_F(Cli, DetectPerLink) {
  write("slot.cfg",
        "preset = exp1-csat80-duty33\nduration_s = 1\nwifi.regime = medium\n"
        "slots.len_s = 0.05\nslots.assignment = A,B\nlink.B.regime = weak\n");
  ASSERT_EQ(run("synth --config slot.cfg --out t.csv"), 0);
  ASSERT_EQ(run("detect --trace t.csv --slot-len 0.05 --assignment A,B --json r.ndjson"), 0);
  std::istringstream lines(file("r.ndjson"));
  std::string a, b;
  std::getline(lines, a);
  std::getline(lines, b);
  EXPECT_EQ(wiplus::io::Json::parse(a)["link"], "A");
  EXPECT_EQ(wiplus::io::Json::parse(a)["status"], "detected");
  EXPECT_EQ(wiplus::io::Json::parse(b)["link"], "B");
  EXPECT_NE(wiplus::io::Json::parse(b)["status"], "detected");
}

TEST_F(Cli, SweepShowsRegimePlateaus) {
  ASSERT_EQ(run("sweep --powers 15..-33 --step 8 --seeds 1 --duration 2 --out s.csv"), 0);
  std::istringstream lines(file("s.csv"));
  std::string line;
  std::getline(lines, line);
  EXPECT_EQ(line, "power_dbm,regime,mean_airtime,std_airtime,truth,windows,detected");
  int strong = 0, weak = 0;
  while (std::getline(lines, line)) {
    std::istringstream f(line);
    std::string power, regime, mean;
    std::getline(f, power, ',');
    std::getline(f, regime, ',');
    std::getline(f, mean, ',');
    const double c = std::stod(mean);
    if (regime == "weak") {
      EXPECT_DOUBLE_EQ(c, 1.0);
      ++weak;
    } else {
      EXPECT_NEAR(c, 0.67, 0.03) << line;
      strong += regime == "strong";
    }
  }
  EXPECT_GT(strong, 0);
  EXPECT_GT(weak, 0);
}

TEST_F(Cli, SweepSinglePointAndUnknownPreset) {
  ASSERT_EQ(run("sweep --powers -10 --seeds 1 --duration 1 --out s.csv"), 0);
  const std::string csv = file("s.csv");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 2);
  EXPECT_EQ(run("sweep --preset fig99"), 1);
}

TEST_F(Cli, SimMatchedBeatsBase) {
  ASSERT_EQ(run("sim --drops 500 --ack base --seed 4 --summary base.json"), 0);
  ASSERT_EQ(run("sim --drops 500 --ack matched --seed 4 --summary matched.json"), 0);
  const double base = wiplus::io::Json::parse(file("base.json"))["rmse_pp"];
  const double matched = wiplus::io::Json::parse(file("matched.json"))["rmse_pp"];
  EXPECT_LT(matched, base);
}

TEST_F(Cli, SimOneDropAndBadFlag) {
  ASSERT_EQ(run("sim --drops 1 --stas 1 --csv rows.csv --summary s.json"), 0);
  const std::string rows = file("rows.csv");
  EXPECT_EQ(std::count(rows.begin(), rows.end(), '\n'), 2);
  EXPECT_EQ(run("sim --ack fastest"), 1);
}

TEST_F(Cli, ReplayDetectsTampering) {
  ASSERT_EQ(run("sim --drops 20 --summary s.json --csv rows.csv"), 0);
  EXPECT_EQ(run("replay s.json.manifest.json"), 0);
  write("rows.csv", "edited\n");
  EXPECT_EQ(run("replay s.json.manifest.json"), 0);  // regenerated by the replay
  auto m = wiplus::io::read_manifest((dir_ / "s.json.manifest.json").string());
  m.outputs["s.json"] = std::string(64, '0');
  wiplus::io::write_manifest((dir_ / "s.json.manifest.json").string(), m);
  EXPECT_EQ(run("replay s.json.manifest.json"), 1);
}
