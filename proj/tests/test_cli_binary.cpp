#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <string>

#include "pvsc/config.hpp"
#include "pvsc/presets.hpp"
#include "support.hpp"

#ifndef PVSC_BINARY_PATH
#define PVSC_BINARY_PATH "pvsc"
#endif

namespace {

int run(const std::string& args) {
  const std::string cmd = std::string(PVSC_BINARY_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

}  // namespace

TEST_CASE("pvsc binary: help, flag parsing and exit codes") {
  using pvsc::testing::TempDir;
  TempDir dir("cli_binary");

  CHECK(run("--help") == 0);
  CHECK(run("solve") != 0);        // missing required --config
  CHECK(run("frobnicate") != 0);   // unknown subcommand

  pvsc::ConfigMap map = pvsc::model_config_to_map(pvsc::presets::it2023_two_battery());
  map["grid.time_step_hours"] = "0.24";
  map["grid.p_step"] = "0.12";
  map["grid.s_step"] = "0.01";
  const std::string config = dir.file("run.conf");
  std::ofstream(config) << pvsc::serialize_flat_config(map);

  CHECK(run("solve --config " + config + " --out " + dir.file("out") +
            " --slice-times 12:00 --dense-controls 9 --paper-verbatim-stencil "
            "--threads 1") == 0);
  CHECK(run("simulate --config " + config + " --checkpoint " + dir.file("out") +
            "/checkpoint.bin --out " + dir.file("sim") +
            " --paths 50 --seed 3 --s0 0.06") == 0);
  CHECK(run("policy --config " + config + " --checkpoint " + dir.file("out") +
            "/checkpoint.bin --t 19:01 --p 0 --s 0.03") == 0);
  CHECK(run("report " + dir.file("sim")) == 0);
  CHECK(run("report " + dir.file("nonexistent")) == 1);
}
