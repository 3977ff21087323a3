#pragma once
// Scenario configuration, the end-to-end pipeline, and the command-line front end.
#include <iosfwd>
#include <string>

#include "tcar/csv.hpp"

namespace tcar {

struct KernelConfig {
  int N = 201;
  double tol = 1e-8;
  int maxIter = 200;
  bool operator==(const KernelConfig&) const = default;
};

enum class RunMode { Open, Closed, Target, Both };

struct Scenario {
  std::string name = "scenario";
  ModelParams params;
  double rho1 = 0, rho2 = 0;  // equilibrium densities
  SimConfig sim;              // sim.mode is ignored; `mode` below selects the runs
  KernelConfig kernel;
  RunMode mode = RunMode::Both;
  std::string outputDir = "out";
};

bool operator==(const Scenario& a, const Scenario& b);

// Parses and validates a scenario INI; origin names the source in errors.
// A [results] section (as written into manifests) is ignored.
Scenario parse_scenario(const std::string& text, const std::string& origin = "<config>");
std::string scenario_to_ini(const Scenario& s);

struct RunOptions {
  std::string outDir;       // overrides Scenario::outputDir when non-empty
  std::string modeName;     // open|closed|target|both overrides Scenario::mode
  bool dumpKernels = false;
  int refine = 0;           // extra levels with doubled sim and kernel resolution
};

// Runs the configured modes, writes CSVs and a manifest into the output
// directory, and prints a summary to `out`.  Throws on failure.
void run_scenario(const Scenario& s, const RunOptions& opt, std::ostream& out);

// Full command line; returns the process exit code (0 ok, 2 bad config, 3
// numerical failure).
int run_cli(int argc, const char* const* argv);

}  // namespace tcar
