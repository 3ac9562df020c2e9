#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "common/error.hpp"
#include "io/model_file.hpp"
#include "io/report.hpp"
#include "mc/ensemble.hpp"

namespace stochsym::app {

struct GlobalOptions {
  std::uint64_t seed = 42;
  double tol = 1e-8;
  int points = 200;
  int threads = 0;
};

// Exit codes: 0 pass, 1 fail, 2 usage or I/O error.
struct Outcome {
  io::Report report;
  int exit_code = 0;
  std::optional<io::ModelFile> model;      // written with --out
  std::optional<mc::PathEnsemble> ensemble;  // written with --export
};

int exit_code_for(ErrorCode code);

Outcome check(const io::ModelFile& mf, const std::string& symmetry, const GlobalOptions& g);
// Each basis element lists the n coefficients of a field, separated by ';'.
Outcome search(const io::ModelFile& mf, const std::vector<std::string>& basis, bool random, const GlobalOptions& g);
Outcome compat(const io::ModelFile& mf, const std::string& symmetry, const GlobalOptions& g);
Outcome transform(const io::ModelFile& mf, const std::string& map, bool backward, const GlobalOptions& g);
// Phi from the symmetry plus the additive term set by the [beta] section.
Outcome build_map(const io::ModelFile& mf, const std::string& symmetry, const std::string& name,
                  const GlobalOptions& g);
Outcome reduce(const io::ModelFile& mf, const std::vector<std::string>& chain, const std::vector<std::string>& maps,
               const GlobalOptions& g);
Outcome integrate(const io::ModelFile& mf, const std::string& symmetry, const GlobalOptions& g);

struct ValidateOptions {
  std::string map;
  std::optional<io::ModelFile> reduced;  // else the transform of the model by `map`
  std::vector<double> dts{1e-2, 5e-3, 2.5e-3, 1.25e-3};
  double T = 1.0;
  double t0 = 0.0;
  int paths = 1000;
  std::vector<double> y0;  // default: centre of the x box
  bool law = false;        // KS test of the reduced scalar equation
  int law_paths = 10000;
  double law_dt = 1e-3;
  bool export_paths = false;  // original system at the finest dt
};
Outcome validate(const io::ModelFile& mf, const ValidateOptions& v, const GlobalOptions& g);

// Runs the cases of <dir>/manifest.json (all when `names` is empty).
Outcome fixtures(const std::string& dir, const std::vector<std::string>& names, const GlobalOptions& g);

}  // namespace stochsym::app
