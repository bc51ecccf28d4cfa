#include <cstdlib>
#include <fstream>
#include <string>

#include "doctest.h"

// Exit-code contract of the command line tool, exercised through the real
// binary: 0 success, 1 validation failure, 64 usage error.

#ifndef TASSIM_CLI_PATH
#define TASSIM_CLI_PATH "tassim"
#endif
#ifndef TASSIM_SCENARIO_DIR
#define TASSIM_SCENARIO_DIR "scenarios"
#endif

namespace {

int run_cli(const std::string& args) {
  const std::string cmd = std::string(TASSIM_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

}  // namespace

TEST_CASE("validate exits zero on a good scenario, without output") {
  const std::string cmd = std::string(TASSIM_CLI_PATH) + " validate " + TASSIM_SCENARIO_DIR +
                          "/control_delay.scenario > /tmp/tassim_validate_out 2>&1";
  CHECK(WEXITSTATUS(std::system(cmd.c_str())) == 0);
  std::ifstream out("/tmp/tassim_validate_out");
  std::string content((std::istreambuf_iterator<char>(out)), std::istreambuf_iterator<char>());
  CHECK(content.empty());
}

TEST_CASE("validate exits one on a broken scenario") {
  std::ofstream bad("/tmp/tassim_bad.scenario");
  bad << R"({"schedule": {"period_ns": 999, "entries": [{"duration_ns": 100, "queue": 0}]},
             "sim": {"duration_ns": 1000}})";
  bad.close();
  CHECK(run_cli("validate /tmp/tassim_bad.scenario") == 1);
}

TEST_CASE("unknown subcommands exit with the usage code") {
  CHECK(run_cli("frobnicate") == 64);
  CHECK(run_cli("") == 64);
}

TEST_CASE("compile writes the table csv and a count line") {
  CHECK(run_cli(std::string("compile ") + TASSIM_SCENARIO_DIR +
                "/control_delay.scenario -o /tmp/tassim_compile") == 0);
  std::ifstream mat("/tmp/tassim_compile/tgcl_mat.csv");
  REQUIRE(mat.good());
  std::string header;
  std::getline(mat, header);
  CHECK(header == "value_hex,mask_hex,port,queue_or_gate,action");
}

TEST_CASE("simulate writes a trace and report recomputes metrics from it") {
  {
    std::ofstream sc("/tmp/tassim_small.scenario");
    sc << R"({
      "schedule": {"period_ns": 8000, "entries": [
        {"duration_ns": 1000, "queue": 0}, {"duration_ns": 1000, "queue": 1},
        {"duration_ns": 1000, "queue": 2}, {"duration_ns": 1000, "queue": 3},
        {"duration_ns": 1000, "queue": 4}, {"duration_ns": 1000, "queue": 5},
        {"duration_ns": 1000, "queue": 6}, {"duration_ns": 1000, "queue": 7}],
        "gsi": {"duration_ns": 9, "mode": "shrink-entries"}},
      "delays": {"tg": {"kind": "constant", "ns": 0},
                 "queue": {"kind": "default", "hold_ns": 1000},
                 "control": {"kind": "constant", "ns": 9}},
      "traffic": [{"rate_pps": 100000000, "priority": "uniform"}],
      "sim": {"seed": 3, "duration_ns": 1000000}
    })";
  }
  CHECK(run_cli("simulate /tmp/tassim_small.scenario --seed 3 -o /tmp/tassim_sim") == 0);
  std::ifstream trace("/tmp/tassim_sim/trace.csv");
  REQUIRE(trace.good());
  std::string header;
  std::getline(trace, header);
  CHECK(header == "time_ns,event,port,queue,priority,stream,frame_id,aux");

  CHECK(run_cli("report /tmp/tassim_sim/trace.csv /tmp/tassim_small.scenario "
                "-o /tmp/tassim_report") == 0);
  std::ifstream summary("/tmp/tassim_report/summary.txt");
  REQUIRE(summary.good());
  std::string content((std::istreambuf_iterator<char>(summary)),
                      std::istreambuf_iterator<char>());
  CHECK(content.find("slice") != std::string::npos);
  CHECK(content.find("tg:") != std::string::npos);
}

TEST_CASE("repro rejects unknown experiments with the usage code") {
  CHECK(run_cli("repro not-an-experiment") == 64);
}

TEST_CASE("unsupported output formats exit with the usage code") {
  CHECK(run_cli(std::string("simulate ") + TASSIM_SCENARIO_DIR +
                "/control_delay.scenario --format xml -o /tmp/tassim_fmt") == 64);
}

TEST_CASE("compile emits one csv per stream gate") {
  {
    std::ofstream sc("/tmp/tassim_sgcl.scenario");
    sc << R"({
      "schedule": {"period_ns": 2000, "entries": [
        {"duration_ns": 1000, "queue": 0}, {"duration_ns": 1000, "queue": 1}]},
      "sgcls": [{"gate_id": 7, "period_ns": 2000,
                 "entries": [{"duration_ns": 1024, "open": true},
                              {"duration_ns": 976, "open": false}]}],
      "sim": {"duration_ns": 10000}
    })";
  }
  CHECK(run_cli("compile /tmp/tassim_sgcl.scenario -o /tmp/tassim_sgcl_out") == 0);
  std::ifstream mat("/tmp/tassim_sgcl_out/sgcl_7_mat.csv");
  REQUIRE(mat.good());
  std::string content((std::istreambuf_iterator<char>(mat)), std::istreambuf_iterator<char>());
  CHECK(content.find("pass") != std::string::npos);
  CHECK(content.find("drop") != std::string::npos);
}
