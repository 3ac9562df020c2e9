#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "model/system.hpp"
#include "transform/change_of_variables.hpp"
#include "transform/construct.hpp"

namespace stochsym::io {

template <typename T>
using Named = std::pair<std::string, T>;

// Contents of a model file. Grammar (line oriented, '#' starts a comment):
//
//   [space] n=<int> m=<int> [kind=ito|generalized]
//   [domain]             x1=<lo>,<hi>  t=<lo>,<hi>  w1=<lo>,<hi>
//   [drift]              f1=<expr> ...
//   [diffusion]          s11=<expr> ... (s<i>_<k> when an index exceeds 9)
//   [symmetry <name>]    phi1=<expr> ...
//   [map <name>]         Phi1=<expr> ... then optionally a line "inverse"
//                        and F1=<expr> ...
//   [beta]               b=<expr>  c=<number>
//
// key=value pairs may also follow a section header on the same line when the
// value has no spaces. Missing drift/diffusion entries are 0. Domain
// intervals left out default to [-2, 2] for x (moved to [0.1, 2.1] when some
// expression is singular on x_i <= 0), [0.1, 2] for t and [-2, 2] for w.
struct ModelFile {
  model::System system;
  std::vector<Named<model::VectorField>> symmetries;
  std::vector<Named<transform::ChangeOfVariables>> maps;
  std::optional<transform::BetaOptions> beta;
  std::vector<std::string> notes;

  // Throw Error(Usage) naming the available entries.
  const model::VectorField& symmetry(std::string_view name) const;
  const transform::ChangeOfVariables& map(std::string_view name) const;
};

// Throws Error(Parse) with "<source>:<line> [<section>]: ..." and
// Error(Invariant) / Error(Dimension) for invalid contents.
ModelFile parse_model(std::string_view text, const std::string& source = "<input>");
// Error(Io) when the file cannot be read.
ModelFile load_model(const std::string& path);

// Exact for the expressions: parse(render(m)) gives the same trees.
std::string render_model(const ModelFile& m);
void save_model(const ModelFile& m, const std::string& path);

}  // namespace stochsym::io
