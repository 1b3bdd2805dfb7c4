#include <gtest/gtest.h>

#include <csignal>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include <httplib.h>
#include <json.hpp>

namespace fs = std::filesystem;
using nlohmann::json;

extern char** environ;

namespace {

std::string scenario_path(const std::string& name) { return std::string(LGNAV_SCENARIO_DIR) + "/" + name; }

struct Result {
  int exit_code = -1;
  std::string out, err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    char tmpl[] = "/tmp/lgnav_cli_XXXXXX";
    ASSERT_NE(mkdtemp(tmpl), nullptr);
    dir_ = tmpl;
  }
  void TearDown() override { fs::remove_all(dir_); }

  Result lgnav(const std::string& args) {
    const fs::path out = dir_ / "stdout", err = dir_ / "stderr";
    const std::string cmd = std::string(LGNAV_CLI) + " " + args + " >" + out.string() + " 2>" + err.string();
    const int status = std::system(cmd.c_str());
    Result r;
    r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = slurp(out);
    r.err = slurp(err);
    return r;
  }

  fs::path dir_;
};

}  // namespace

TEST_F(Cli, NoChangeScenarioReaches) {
  const fs::path report = dir_ / "r.json";
  const Result r = lgnav("run --scenario " + scenario_path("corridor_clear.json") + " --out " + report.string());
  EXPECT_EQ(r.exit_code, 0) << r.err;
  const json doc = json::parse(slurp(report));
  EXPECT_TRUE(doc["reached"].get<bool>());
  EXPECT_TRUE(doc["queries"].empty());
  EXPECT_NE(r.err.find("corridor_clear"), std::string::npos);  // summary goes to stderr
}

TEST_F(Cli, ReportToStdoutIsDeterministic) {
  const std::string args = "run --scenario " + scenario_path("small_house.json") + " --feedback " +
                           scenario_path("small_house.feedback.json") + " --out -";
  const Result a = lgnav(args), b = lgnav(args);
  EXPECT_EQ(a.exit_code, 0) << a.err;
  EXPECT_EQ(a.out, b.out);
  EXPECT_EQ(json::parse(a.out)["metrics"]["spliced_waypoints"], 2);
}

TEST_F(Cli, BlockedWithEmptyFeedbackExitsTwo) {
  const fs::path report = dir_ / "r.json";
  const Result r = lgnav("run --scenario " + scenario_path("small_house.json") + " --out " + report.string());
  EXPECT_EQ(r.exit_code, 2);
  EXPECT_EQ(json::parse(slurp(report))["outcome"], "stalled");
}

TEST_F(Cli, MalformedScenarioExitsOne) {
  const fs::path bad = dir_ / "bad.json";
  std::ofstream(bad) << "{\n  \"name\": \"x\",\n  oops\n}\n";
  const Result r = lgnav("run --scenario " + bad.string());
  EXPECT_EQ(r.exit_code, 1);
  EXPECT_NE(r.err.find(bad.string() + ":3"), std::string::npos) << r.err;
}

TEST_F(Cli, MissingFileAndBadArgs) {
  EXPECT_EQ(lgnav("run --scenario " + (dir_ / "none.json").string()).exit_code, 1);
  EXPECT_EQ(lgnav("run").exit_code, 1);
  EXPECT_EQ(lgnav("fly").exit_code, 1);
  EXPECT_EQ(lgnav("serve --scenario " + scenario_path("corridor_clear.json") + " --bind nocolon").exit_code, 1);
}

TEST_F(Cli, TauOverrideChangesTrigger) {
  // 30% detour: queries at the default threshold, not at 0.35.
  const std::string base = "run --scenario " + scenario_path("corridor_detour_30.json") + " --out -";
  const Result strict = lgnav(base + " --feedback " + scenario_path("corridor_detour_30.feedback.json"));
  EXPECT_EQ(json::parse(strict.out)["queries"].size(), 1u);
  const Result loose = lgnav(base + " --tau 0.35");
  EXPECT_EQ(loose.exit_code, 0);
  EXPECT_EQ(json::parse(loose.out)["queries"].size(), 0u);
}

TEST_F(Cli, SummarizeTabulatesReports) {
  for (const char* name : {"corridor_detour_30", "corridor_detour_20", "small_house"}) {
    const std::string fb = scenario_path(std::string(name) + ".feedback.json");
    lgnav("run --scenario " + scenario_path(std::string(name) + ".json") + " --feedback " + fb + " --out " +
          (dir_ / (std::string(name) + ".json")).string());
  }
  const Result r = lgnav("summarize " + (dir_ / "corridor_detour_30.json").string() + " " +
                         (dir_ / "corridor_detour_20.json").string() + " " + (dir_ / "small_house.json").string());
  EXPECT_EQ(r.exit_code, 0) << r.err;
  EXPECT_NE(r.out.find("small_house"), std::string::npos);
  EXPECT_NE(r.out.find("corridor_detour_20"), std::string::npos);
  std::ofstream(dir_ / "junk.json") << "[]";
  EXPECT_EQ(lgnav("summarize " + (dir_ / "junk.json").string()).exit_code, 1);
}

TEST_F(Cli, ServeAnswersAndStopsOnSigterm) {
  int pipefd[2];
  ASSERT_EQ(pipe(pipefd), 0);
  posix_spawn_file_actions_t fa;
  posix_spawn_file_actions_init(&fa);
  posix_spawn_file_actions_adddup2(&fa, pipefd[1], STDOUT_FILENO);
  posix_spawn_file_actions_addclose(&fa, pipefd[0]);
  const std::string scen = scenario_path("corridor_clear.json");
  std::vector<std::string> args = {LGNAV_CLI, "serve", "--scenario", scen, "--bind", "127.0.0.1:0"};
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  argv.push_back(nullptr);
  pid_t pid = 0;
  ASSERT_EQ(posix_spawn(&pid, LGNAV_CLI, &fa, nullptr, argv.data(), environ), 0);
  posix_spawn_file_actions_destroy(&fa);
  close(pipefd[1]);

  FILE* f = fdopen(pipefd[0], "r");
  char line[256] = {};
  ASSERT_NE(fgets(line, sizeof line, f), nullptr);
  fclose(f);
  const std::string text(line);
  const auto colon = text.rfind(':');
  ASSERT_EQ(text.rfind("listening on 127.0.0.1:", 0), 0u) << text;
  const int port = std::stoi(text.substr(colon + 1));

  httplib::Client c("127.0.0.1", port);
  auto r = c.Get("/state");
  ASSERT_TRUE(r);
  EXPECT_EQ(json::parse(r->body)["scenario"], "corridor_clear");

  kill(pid, SIGTERM);
  int status = 0;
  waitpid(pid, &status, 0);
  ASSERT_TRUE(WIFEXITED(status));
  EXPECT_EQ(WEXITSTATUS(status), 0);
}
