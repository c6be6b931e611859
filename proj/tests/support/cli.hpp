#pragma once

// Runs the planspace binary through the shell and holds the golden and
// exit-code tables shared by the unit and acceptance suites.

#include "support/fixtures.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <unistd.h>
#include <vector>

namespace testsupport {

namespace fs = std::filesystem;

struct Run {
  int exit = -1;
  std::string out, err;
};

inline std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline fs::path scratch() {
  fs::path d = fs::temp_directory_path() / ("planspace-cli-" + std::to_string(::getpid()));
  fs::create_directories(d);
  return d;
}

inline Run run_cli(const std::string& args, const std::string& input = "",
                   const std::string& env = "") {
  const fs::path d = scratch();
  const fs::path in = d / "stdin", out = d / "stdout", err = d / "stderr";
  std::ofstream(in) << input;
  const std::string cmd = env + " '" + std::string(PLANSPACE_CLI) + "' " + args + " <'" +
                          in.string() + "' >'" + out.string() + "' 2>'" + err.string() + "'";
  const int st = std::system(cmd.c_str());
  return {WIFEXITED(st) ? WEXITSTATUS(st) : -1, slurp(out), slurp(err)};
}

inline std::string pi1_arg() { return "--task '" + fixture_path("pi1.json") + "' "; }

struct GoldenCase {
  std::string name, args;
  int exit = 0;
  std::string input;
};

inline fs::path golden_file(const std::string& name) {
  return fs::path(PLANSPACE_GOLDEN) / (name + ".out");
}

inline std::vector<GoldenCase> golden_cases() {
  const std::string p = pi1_arg();
  const std::string j = p + "--length 4 --format json";
  return {
      {"count", "count " + j, 0, ""},
      {"count_human", "count " + p + "--length 4", 0, ""},
      {"count_factor", "count " + p + "--factor 1.5 --base 2 --format json", 0, ""},
      {"count_l2", "count " + p + "--length 2 --format json", 0, ""},
      {"exists", "exists " + j, 0, ""},
      {"topk_2", "topk 2 " + j, 0, ""},
      {"topk_3", "topk 3 " + j, 0, ""},
      {"brave", "brave " + j, 0, ""},
      {"cautious", "cautious " + j, 0, ""},
      {"cautious_l2", "cautious " + p + "--length 2 --format json", 0, ""},
      {"facets", "facets " + j, 0, ""},
      {"facets_human", "facets " + p + "--length 4", 0, ""},
      {"significance", "significance " + j, 0, ""},
      {"significance_one", "significance '!get-ready' " + j, 0, ""},
      {"prob_get_ready", "prob op:get-ready " + j, 0, ""},
      {"prob_wake_up", "prob op:wake-up " + j, 0, ""},
      {"prob_sleep", "prob op:sleep " + j, 0, ""},
      {"prob_and", "prob 'op:wake-up ; op:sleep' " + j, 0, ""},
      {"prob_or", "prob 'op:wake-up | op:sleep' " + j, 0, ""},
      {"prob_human", "prob op:get-ready " + p + "--length 4", 0, ""},
      {"enum", "enum " + j, 0, ""},
      {"enum_limit", "enum --limit 1 " + j, 0, ""},
      {"enum_human", "enum " + p + "--length 4", 0, ""},
      {"sample", "sample 3 --seed 7 " + j, 0, ""},
      {"oracle", "oracle " + j, 0, ""},
      {"validate_ddnnf", "validate-ddnnf " + j, 0, ""},
      {"navigate", "navigate " + j, 0,
       "show\nenforce get-ready\nforbid get-ready\nundo\nundo\nprefix sleep\nprefix 0 wake-up\nquit\n"},
      {"navigate_human", "navigate " + p + "--length 4", 0,
       "enforce get-ready\nundo\nenforce sleep\n"},
  };
}

struct ExitCase {
  std::string args;
  int exit;
  std::string env;
};

inline std::vector<ExitCase> exit_cases() {
  const std::string p = pi1_arg();
  return {
      {"count " + p, 1, ""},  // no bound
      {"count " + p + "--length 4 --factor 1.0 --base 4", 1, ""},
      {"count " + p + "--factor 1.0", 1, ""},
      {"count --length 4", 1, ""},  // no task
      {"count --task /nonexistent.json --length 4", 1, ""},
      {"frobnicate " + p + "--length 4", 1, ""},
      {"", 1, ""},
      {"count " + p + "--length 4 --format yaml", 1, ""},
      {"prob 'op:nope' " + p + "--length 4", 1, ""},
      {"count " + p + "--length 1000", 1, ""},  // over the cap
      {"--help", 0, ""},
      {"count " + p + "--length 6", 2, "PLANSPACE_MAX_NODES=10"},
      {"count " + p + "--length 6", 1, "PLANSPACE_MAX_NODES=oops"},
      {"oracle --time-budget-ms 0 " + p + "--length 12", 2, ""},
      {"sample 1 " + p + "--length 2", 3, ""},
      {"navigate " + p + "--length 2", 3, ""},
      {"significance " + p + "--length 2", 3, ""},
      {"significance get-ready " + p + "--length 3", 3, ""},  // no facets
      {"exists " + p + "--length 2 --format json", 0, ""},
  };
}

}  // namespace testsupport
