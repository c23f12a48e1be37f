#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "ep3/linalg.hpp"

namespace ep3 {

enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 1,
  kExitComputation = 2,
  kExitEPOnPath = 3,
};

struct RunConfig {
  std::string subcommand;
  std::string family = "waveguide-ab-equal";
  Complex center = 0.0;
  double radius = 0.1;
  int steps = 512;
  int cycles = 1;
  std::array<int, 2> grid{41, 41};
  std::array<double, 4> bounds{-0.2, 0.2, -0.2, 0.2};
  std::vector<double> radii{1e-3, 1e-4, 1e-5, 1e-6};
  int fit_steps = 64;
  std::vector<Complex> guess;
  std::optional<Complex> lambda_guess;
  std::optional<int> order;
  std::optional<std::string> out_prefix;
  std::optional<double> tol;  // classify: vanishing threshold; find-ep: ||F|| target
  std::uint64_t seed = 0;
};

/// Parses "re" or "re:im"; "re,im" pairs use parse_complex_pair.
Complex parse_complex_token(const std::string& token);
Complex parse_complex_pair(const std::string& text);
std::vector<double> parse_double_list(const std::string& text);

/// Full command line (argv[0] is the program name). Results go to `out`
/// unless --out is given; diagnostics go to `err`. Returns an ExitCode.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// Executes a validated configuration.
int run_config(const RunConfig& config, std::ostream& out, std::ostream& err);

}  // namespace ep3
