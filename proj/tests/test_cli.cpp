#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

namespace fs = std::filesystem;

namespace {

const fs::path& scratch() {
  static const fs::path dir = [] {
    const fs::path d = fs::temp_directory_path() / "mrid_cli_test";
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

int run(const std::string& args) {
  const std::string cmd = std::string("\"") + MRID_CLI + "\" " + args + " > \"" +
                          (scratch() / "last.log").string() + "\" 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string last_log() {
  std::ifstream in(scratch() / "last.log");
  return {std::istreambuf_iterator<char>(in), {}};
}

std::string config(const char* name) { return std::string("--config \"") + MRID_CONFIG_DIR + "/" + name + "\""; }

std::string out(const char* sub) { return "--out \"" + (scratch() / sub).string() + "\""; }

void write(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

}  // namespace

TEST(Cli, SimulateIdentifyVerifyRoundTrip) {
  ASSERT_EQ(run("simulate " + config("fast_slow.json") + " " + out("a")), 0) << last_log();
  EXPECT_TRUE(fs::exists(scratch() / "a" / "signals.csv"));
  const std::string signals = "--signals \"" + (scratch() / "a" / "signals.csv").string() + "\"";
  ASSERT_EQ(run("identify " + config("fast_slow.json") + " " + signals + " " + out("a")), 0) << last_log();
  EXPECT_NE(last_log().find("PASSED"), std::string::npos);
  EXPECT_TRUE(fs::exists(scratch() / "a" / "report.json"));
  const std::string model = "--model \"" + (scratch() / "a" / "model.json").string() + "\"";
  EXPECT_EQ(run("verify " + config("fast_slow.json") + " " + model + " " + out("a")), 0) << last_log();
  EXPECT_TRUE(fs::exists(scratch() / "a" / "verify_report.json"));
}

TEST(Cli, UsageErrorsExitTwo) {
  EXPECT_EQ(run(""), 2);
  EXPECT_EQ(run("identify"), 2);
  EXPECT_EQ(run("identify " + config("fast_slow.json") + " --convention best"), 2);
  EXPECT_EQ(run("identify --config \"" + (scratch() / "nope.json").string() + "\""), 2);
}

TEST(Cli, MalformedConfigExitsTwoWithPosition) {
  const auto p = scratch() / "broken.json";
  write(p, "{\n  \"rates\": [1,\n}");
  EXPECT_EQ(run("identify --config \"" + p.string() + "\""), 2);
  EXPECT_NE(last_log().find("broken.json:3:"), std::string::npos) << last_log();

  const auto q = scratch() / "noplant.json";
  write(q, "{\"rates\": [1, 3]}");
  EXPECT_EQ(run("identify --config \"" + q.string() + "\""), 2);
  EXPECT_NE(last_log().find("missing field 'plant'"), std::string::npos) << last_log();
}

TEST(Cli, DataErrorsExitThree) {
  EXPECT_EQ(run("identify " + config("two_three.json") + " --n 50 " + out("b")), 3) << last_log();
  EXPECT_NE(last_log().find("InsufficientData"), std::string::npos);
}

TEST(Cli, FailedChecksExitFour) {
  EXPECT_EQ(run("identify " + config("two_three.json") + " --noise 0.05 " + out("c")), 4) << last_log();
  EXPECT_TRUE(fs::exists(scratch() / "c" / "report.json"));

  const auto p = scratch() / "blind.json";
  write(p, R"({"plant": {"A": [[0.5]], "B": [[1]], "C": [[0]], "D": [[0]]}, "rates": [2]})");
  EXPECT_EQ(run("identify --config \"" + p.string() + "\" " + out("d")), 4) << last_log();
  EXPECT_NE(last_log().find("AssumptionFailed"), std::string::npos);
}

TEST(Cli, DemoPaperPasses) {
  EXPECT_EQ(run("demo-paper " + out("demo")), 0) << last_log();
  EXPECT_NE(last_log().find("all checks passed"), std::string::npos);
  EXPECT_TRUE(fs::exists(scratch() / "demo"));
}
