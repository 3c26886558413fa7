#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "cmc/io.hpp"

namespace cmc {

struct RunConfig {
  std::string command;
  std::string hplus, curve, family, config;
  std::optional<cplx> q, nu0, q1, q2;
  std::vector<int> m;
  std::optional<double> scale;
  int nx = 64, ny = 64;
  double extent = 2.0;
  int N = 32;
  double r = 0.5;
  double H = -2.0;
  std::vector<cplx> lambdas;  // from --lambda and --theta
  std::string out, report, obj, hplus_out;
  double tol = 1e-6, int_tol = 1e-4, zero_tol = 1e-6;
  std::vector<int> Ns;
  std::vector<double> rs;
  double phi = 0.0;
  bool with_frames = false;

  ZGrid grid() const { return ZGrid::square(nx, ny, extent); }
  json to_json() const;
};

// Exit codes
inline constexpr int kExitOk = 0, kExitVerdict = 1, kExitUsage = 2, kExitNumeric = 3;

// Throws Error("UsageError", ...) on invalid flags or values.
RunConfig parse_config(const std::vector<std::string>& args);
// Runs one command; JSON results go to out (or the --out file), JSON errors to err.
int dispatch(const RunConfig& cfg, std::ostream& out, std::ostream& err);
// parse_config + dispatch with exit-code mapping; args exclude the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace cmc
