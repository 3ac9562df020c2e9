#include "model/sampler.hpp"

#include <cmath>
#include <set>

#include "common/halton.hpp"
#include "expr/compiled.hpp"

namespace stochsym::model {

namespace {

void collect_loci(const Expression& e, std::vector<Expression>& out, std::set<const expr::Node*>& seen) {
  if (!seen.insert(e.id()).second) return;
  switch (e.op()) {
    case expr::Op::Const:
    case expr::Op::Var: return;
    case expr::Op::Div:
      if (!e.rhs().is_constant()) out.push_back(e.rhs());
      break;
    case expr::Op::Pow:
      if (!e.lhs().is_constant() && !(e.rhs().is_constant() && e.rhs().value() >= 1.0)) {
        out.push_back(e.lhs());
      }
      break;
    case expr::Op::Log:
    case expr::Op::Sqrt:
      if (!e.arg().is_constant()) out.push_back(e.arg());
      break;
    default: break;
  }
  collect_loci(e.lhs(), out, seen);
  if (expr::is_binary(e.op())) collect_loci(e.rhs(), out, seen);
}

}  // namespace

std::vector<Expression> singular_loci(const Expression& e) {
  std::vector<Expression> out;
  std::set<const expr::Node*> seen;
  collect_loci(e, out, seen);
  return out;
}

Sampler::Sampler(VariableSpace space, Domain domain, double guard)
    : space_(space), domain_(std::move(domain)), guard_(guard) {}

std::vector<std::vector<double>> Sampler::sample(const std::vector<Expression>& watch, int count) const {
  std::vector<Expression> all(watch);
  const std::size_t n_watch = watch.size();
  std::set<const expr::Node*> seen;
  for (const auto& e : watch) collect_loci(e, all, seen);
  const expr::CompiledBundle bundle(all, space_);

  const std::vector<Variable> vars = space_.variables();
  const int dims = static_cast<int>(vars.size());
  std::vector<double> values(all.size());
  std::vector<double> scratch;
  std::vector<std::vector<double>> points;
  const long max_candidates = 50L * std::max(count, 1);
  for (long i = 0; i < max_candidates && static_cast<int>(points.size()) < count; ++i) {
    std::vector<double> slots(dims);
    for (int k = 0; k < dims; ++k) {
      const Interval box = domain_.of(vars[k]);
      slots[k] = box.lo + (box.hi - box.lo) * halton(static_cast<std::uint64_t>(i), k);
    }
    bundle.evaluate(slots, values, scratch);
    bool ok = true;
    for (std::size_t j = 0; j < values.size() && ok; ++j) {
      if (!std::isfinite(values[j])) ok = false;
      if (j >= n_watch && std::abs(values[j]) < guard_) ok = false;
    }
    if (ok) points.push_back(std::move(slots));
  }
  return points;
}

}  // namespace stochsym::model
