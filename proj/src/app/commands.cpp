#include "app/commands.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "common/error.hpp"
#include "expr/compiled.hpp"
#include "expr/parser.hpp"
#include "expr/simplify.hpp"
#include "mc/checks.hpp"
#include "model/coefficients.hpp"
#include "model/sampler.hpp"
#include "reduce/reduce.hpp"
#include "symcheck/compat.hpp"
#include "symcheck/residuals.hpp"
#include "symcheck/search.hpp"
#include "transform/construct.hpp"
#include "transform/transform.hpp"

namespace stochsym::app {

namespace {

using io::Json;
using io::Report;

symcheck::CheckOptions check_options(const GlobalOptions& g) { return {g.tol, g.points}; }

Outcome guarded(const std::string& command, const std::function<Outcome()>& body) {
  try {
    return body();
  } catch (const Error& e) {
    Outcome o;
    o.report.command = command;
    o.report.pass = false;
    o.report.body["error"] = to_string(e.code());
    o.report.body["message"] = e.what();
    o.exit_code = exit_code_for(e.code());
    return o;
  }
}

Outcome finish(Report r) {
  Outcome o;
  o.exit_code = r.pass ? 0 : 1;
  o.report = std::move(r);
  return o;
}

symcheck::ResidualReport residuals(const model::System& sys, const model::VectorField& X, const GlobalOptions& g) {
  return X.random() ? symcheck::random_residuals(sys, X, check_options(g))
                    : symcheck::deterministic_residuals(sys, X, check_options(g));
}

// Largest |got - want| / (1 + |want|) over sample points of the system's domain.
double sampled_gap(const expr::Expression& got, const std::string& want, const model::System& on) {
  const expr::Expression w = expr::parse(want, on.space());
  const auto pts = model::Sampler(on.space(), on.domain()).sample({got, w}, 200);
  if (pts.empty()) throw Error(ErrorCode::DegenerateSampling, "no usable sample points for " + want);
  const expr::CompiledBundle b({got, w}, on.space());
  std::vector<double> v(2), scratch;
  double worst = 0.0;
  for (const auto& p : pts) {
    b.evaluate(p, v, scratch);
    worst = std::max(worst, std::abs(v[0] - v[1]) / (1.0 + std::abs(v[1])));
  }
  return worst;
}

std::vector<double> centre(const model::Domain& d) {
  std::vector<double> y;
  for (const auto& i : d.x) y.push_back(0.5 * (i.lo + i.hi));
  return y;
}

// Coefficient written with x or w that is constant in them on the domain
// (sampled), frozen at the box centre and w = 0.
expr::Expression t_only(const expr::Expression& e, const model::System& on, std::vector<std::string>& notes) {
  if (!expr::depends_on_kind(e, expr::VarKind::State) && !expr::depends_on_kind(e, expr::VarKind::Noise)) return e;
  std::map<expr::Variable, expr::Expression> at;
  for (int i = 0; i < on.n(); ++i) {
    at[expr::Variable::x(i + 1)] = expr::constant(0.5 * (on.domain().x[i].lo + on.domain().x[i].hi));
  }
  for (int k = 0; k < on.m(); ++k) at[expr::Variable::w(k + 1)] = expr::constant(0.0);
  const expr::Expression frozen = expr::simplify(expr::substitute(e, at));
  const auto pts = model::Sampler(on.space(), on.domain()).sample({e, frozen}, 200);
  const expr::CompiledBundle b({e, frozen}, on.space());
  std::vector<double> v(2), scratch;
  double worst = 0.0;
  for (const auto& p : pts) {
    b.evaluate(p, v, scratch);
    worst = std::max(worst, std::abs(v[0] - v[1]) / (1.0 + std::abs(v[1])));
  }
  if (pts.size() < 20 || worst > 1e-8) {
    throw Error(ErrorCode::Unsupported, "--law needs coefficients of t only; " + expr::to_string(e) +
                                            " varies with the state (sampled gap " + std::to_string(worst) + ")");
  }
  notes.push_back("coefficient constant in x and w at " + std::to_string(pts.size()) +
                  " sampled points; frozen at the box centre");
  return frozen;
}

io::ModelFile model_of(const model::System& sys) { return io::ModelFile{sys, {}, {}, std::nullopt, {}}; }

transform::TransformResult run_transform(const model::System& sys, const transform::ChangeOfVariables& cov,
                                         bool backward) {
  if (sys.n() == 1 && sys.m() == 1) {
    return transform::transform_scalar(sys, cov, backward ? transform::Direction::Backward : transform::Direction::Forward);
  }
  return transform::transform_system(sys, cov);
}

reduce::ReduceOptions reduce_options(const io::ModelFile& mf, const GlobalOptions& g) {
  reduce::ReduceOptions o;
  o.check = check_options(g);
  if (mf.beta) o.beta = *mf.beta;
  return o;
}

// Golden comparison of a system against expected coefficient strings.
Json compare_system(const model::System& got, const Json& drift, const Json& diffusion, double tol, bool& pass) {
  Json out = Json::array();
  auto one = [&](const expr::Expression& e, const std::string& want, const std::string& label) {
    const double gap = sampled_gap(e, want, got);
    Json c;
    c["coefficient"] = label;
    c["expected"] = want;
    c["got"] = expr::to_string(e);
    c["gap"] = gap;
    c["pass"] = gap < tol;
    pass = pass && gap < tol;
    out.push_back(c);
  };
  for (int i = 0; i < got.n() && i < static_cast<int>(drift.size()); ++i) {
    one(got.drift(i), drift[i].get<std::string>(), "f" + std::to_string(i + 1));
  }
  for (int i = 0; i < got.n() && i < static_cast<int>(diffusion.size()); ++i) {
    for (int k = 0; k < got.m() && k < static_cast<int>(diffusion[i].size()); ++k) {
      one(got.diffusion(i, k), diffusion[i][k].get<std::string>(), "s" + std::to_string(i + 1) + std::to_string(k + 1));
    }
  }
  if (static_cast<int>(drift.size()) != got.n() || static_cast<int>(diffusion.size()) != got.n()) pass = false;
  return out;
}

Json run_case(const std::filesystem::path& dir, const Json& c, const GlobalOptions& g, bool& pass) {
  Json out;
  const std::string name = c.at("name").get<std::string>();
  out["name"] = name;
  pass = true;
  Json checks = Json::array();
  auto record = [&](Json j) {
    pass = pass && j["pass"].get<bool>();
    checks.push_back(std::move(j));
  };
  try {
    const auto mf = io::load_model((dir / c.at("model").get<std::string>()).string());
    const auto& sys = mf.system;
    for (const auto& s : c.value("symmetries", Json::array())) {
      const std::string sname = s.at("name").get<std::string>();
      const bool want = s.at("expect").get<bool>();
      const auto r = residuals(sys, mf.symmetry(sname), g);
      Json j;
      j["check"] = "symmetry " + sname;
      j["expected"] = want;
      j["got"] = r.pass;
      j["max_residual"] = r.max_residual;
      j["scale"] = r.scale;
      j["pass"] = r.pass == want;
      record(j);
    }
    if (c.contains("compatibility")) {
      const auto& s = c["compatibility"];
      const bool want = s.at("expect").get<bool>();
      const auto r = symcheck::compatibility_check(sys, mf.symmetry(s.at("symmetry").get<std::string>()).coeffs[0],
                                                   check_options(g));
      Json j;
      j["check"] = "compatibility";
      j["expected"] = want;
      j["got"] = r.pass;
      j["max_residual"] = r.max_residual;
      bool ok = r.pass == want;
      if (s.contains("min_residual")) {
        j["min_residual"] = s["min_residual"];
        ok = ok && r.max_residual > s["min_residual"].get<double>();
      }
      j["pass"] = ok;
      record(j);
    }
    const double tol = c.value("tol", 1e-7);
    if (c.contains("integrate")) {
      const auto& s = c["integrate"];
      Json j;
      j["check"] = "integrate " + s.at("symmetry").get<std::string>();
      try {
        const auto r =
            reduce::integrate_scalar(sys, mf.symmetry(s.at("symmetry").get<std::string>()), reduce_options(mf, g));
        if (s.contains("error")) {
          j["expected"] = s["error"];
          j["got"] = "success";
          j["pass"] = false;
        } else if (!r.full) {
          j["got"] = "numeric only";
          j["pass"] = false;
        } else {
          bool ok = true;
          j["coefficients"] = compare_system(*r.full, Json::array({s.at("f")}), Json::array({Json::array({s.at("sigma")})}),
                                             tol, ok);
          j["pass"] = ok;
        }
      } catch (const Error& e) {
        j["got"] = to_string(e.code());
        j["message"] = e.what();
        j["expected"] = s.value("error", "success");
        j["pass"] = s.contains("error") && s["error"].get<std::string>() == to_string(e.code());
      }
      record(j);
    }
    if (c.contains("transform")) {
      const auto& s = c["transform"];
      Json j;
      j["check"] = "transform " + s.at("map").get<std::string>();
      const auto r = run_transform(sys, mf.map(s.at("map").get<std::string>()), s.value("backward", false));
      bool ok = r.symbolic();
      if (r.symbolic()) j["coefficients"] = compare_system(*r.system, s.at("drift"), s.at("diffusion"), tol, ok);
      j["pass"] = ok;
      record(j);
    }
    if (c.contains("reduce")) {
      const auto& s = c["reduce"];
      Json j;
      j["check"] = "reduce";
      model::SolvableChain chain;
      std::vector<transform::ChangeOfVariables> covs;
      for (const auto& n : s.at("chain")) {
        chain.names.push_back(n.get<std::string>());
        chain.fields.push_back(mf.symmetry(n.get<std::string>()));
      }
      for (const auto& n : s.at("maps")) covs.push_back(mf.map(n.get<std::string>()));
      const auto r = chain.fields.size() == 1 ? reduce::reduce_once(sys, chain.fields[0], covs[0], reduce_options(mf, g))
                                              : reduce::reduce_chain(sys, chain, covs, reduce_options(mf, g));
      bool ok = r.full.has_value() && r.reduced_dimension() == s.value("reduced_dimension", r.reduced_dimension());
      j["reduced_dimension"] = r.reduced_dimension();
      j["stages"] = r.stages.size();
      if (r.full) j["coefficients"] = compare_system(*r.full, s.at("drift"), s.at("diffusion"), tol, ok);
      j["pass"] = ok;
      record(j);
    }
  } catch (const Error& e) {
    Json j;
    j["check"] = "run";
    j["error"] = to_string(e.code());
    j["message"] = e.what();
    j["pass"] = false;
    record(j);
  }
  out["pass"] = pass;
  out["checks"] = checks;
  return out;
}

}  // namespace

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::Parse:
    case ErrorCode::UnknownVariable:
    case ErrorCode::Io:
    case ErrorCode::Usage:
      return 2;
    default:
      return 1;
  }
}

Outcome check(const io::ModelFile& mf, const std::string& symmetry, const GlobalOptions& g) {
  return guarded("check", [&] {
    Report r;
    r.command = "check";
    const auto& X = mf.symmetry(symmetry);
    const auto res = residuals(mf.system, X, g);
    r.body["symmetry"] = symmetry;
    r.body["field"] = io::to_json(X);
    r.body["random"] = X.random();
    r.body["residuals"] = io::to_json(res);
    r.pass = res.pass;
    return finish(r);
  });
}

Outcome search(const io::ModelFile& mf, const std::vector<std::string>& basis, bool random, const GlobalOptions& g) {
  return guarded("search", [&] {
    const auto& sys = mf.system;
    if (basis.empty()) throw Error(ErrorCode::Usage, "search needs at least one basis field");
    std::vector<model::VectorField> fields;
    for (const auto& b : basis) {
      model::VectorField X;
      std::stringstream ss(b);
      std::string part;
      while (std::getline(ss, part, ';')) X.coeffs.push_back(expr::parse(part, sys.space()));
      if (X.n() != sys.n()) {
        throw Error(ErrorCode::Usage, "basis field '" + b + "' needs " + std::to_string(sys.n()) + " components");
      }
      fields.push_back(X);
    }
    const auto res = symcheck::search_symmetry_ansatz(sys, fields, random);
    Report r;
    r.command = "search";
    r.body["random"] = random;
    Json jb = Json::array();
    for (const auto& X : fields) jb.push_back(io::to_json(X));
    r.body["basis"] = jb;
    r.body["result"] = io::to_json(res);
    Json found = Json::array();
    for (const auto& c : res.null_space) {
      model::VectorField X;
      for (int i = 0; i < sys.n(); ++i) {
        expr::Expression s = expr::constant(0.0);
        for (std::size_t k = 0; k < fields.size(); ++k) {
          if (std::abs(c[k]) > 1e-12) s = s + expr::constant(c[k]) * fields[k].coeffs[i];
        }
        X.coeffs.push_back(expr::simplify(s));
      }
      // recheck each combination with the usual residual test
      Json f;
      f["field"] = io::to_json(X);
      f["verified"] = residuals(sys, X, g).pass;
      found.push_back(f);
    }
    r.body["symmetries"] = found;
    r.pass = !res.null_space.empty();
    return finish(r);
  });
}

Outcome compat(const io::ModelFile& mf, const std::string& symmetry, const GlobalOptions& g) {
  return guarded("compat", [&] {
    const auto& X = mf.symmetry(symmetry);
    const auto res = symcheck::compatibility_check(mf.system, X.coeffs.at(0), check_options(g));
    Report r;
    r.command = "compat";
    r.body["symmetry"] = symmetry;
    r.body["compatibility"] = io::to_json(res);
    r.pass = res.pass;
    return finish(r);
  });
}

Outcome transform(const io::ModelFile& mf, const std::string& map, bool backward, const GlobalOptions&) {
  return guarded("transform", [&] {
    const auto& cov = mf.map(map);
    const auto res = run_transform(mf.system, cov, backward);
    Report r;
    r.command = "transform";
    r.body["map"] = map;
    r.body["direction"] = backward ? "backward" : "forward";
    r.body["result"] = io::to_json(res);
    r.pass = true;
    auto o = finish(r);
    if (res.symbolic()) {
      o.model = model_of(*res.system);
    } else {
      o.report.notes.push_back("numeric coefficients only; no model file written");
    }
    return o;
  });
}

Outcome build_map(const io::ModelFile& mf, const std::string& symmetry, const std::string& name,
                  const GlobalOptions&) {
  return guarded("build-map", [&] {
    const auto& sys = mf.system;
    const auto& X = mf.symmetry(symmetry);
    if (X.n() != 1) throw Error(ErrorCode::Unsupported, "maps are built automatically for scalar equations only");
    const auto xi = transform::build_phi_from_symmetry(sys, X.coeffs[0]);
    const auto beta = transform::solve_beta(sys, xi, mf.beta.value_or(transform::BetaOptions{}));
    const auto cov = transform::with_beta(xi, beta, sys.domain().x[0]);
    Report r;
    r.command = "build-map";
    r.body["symmetry"] = symmetry;
    r.body["map"] = io::to_json(cov);
    Json b;
    b["symbolic"] = beta.symbolic();
    if (beta.B) b["B"] = expr::to_string(*beta.B);
    if (beta.beta) b["beta"] = expr::to_string(*beta.beta);
    r.body["additive"] = b;
    r.notes = beta.notes;
    if (cov.symbolic()) {
      const auto rt = transform::check_round_trip(cov, sys.space(), sys.domain(), 200, 1e-7);
      Json j;
      j["max_error"] = rt.max_error;
      j["points"] = rt.points;
      j["pass"] = rt.pass;
      r.body["round_trip"] = j;
      r.pass = rt.pass;
    } else {
      r.pass = true;
      r.notes.push_back("numeric map; the model file keeps the symbolic parts only");
    }
    auto o = finish(r);
    io::ModelFile out = mf;
    if (cov.symbolic()) out.maps.emplace_back(name, cov);
    o.model = out;
    return o;
  });
}

Outcome reduce(const io::ModelFile& mf, const std::vector<std::string>& chain_names,
               const std::vector<std::string>& map_names, const GlobalOptions& g) {
  return guarded("reduce", [&] {
    if (chain_names.empty() || chain_names.size() != map_names.size()) {
      throw Error(ErrorCode::Usage, "reduce needs as many --maps as --chain entries");
    }
    model::SolvableChain chain;
    std::vector<transform::ChangeOfVariables> covs;
    for (const auto& n : chain_names) {
      chain.names.push_back(n);
      chain.fields.push_back(mf.symmetry(n));
    }
    for (const auto& n : map_names) covs.push_back(mf.map(n));
    const auto opts = reduce_options(mf, g);
    const auto res = chain.fields.size() == 1 ? reduce::reduce_once(mf.system, chain.fields[0], covs[0], opts)
                                              : reduce::reduce_chain(mf.system, chain, covs, opts);
    Report r;
    r.command = "reduce";
    Json c = Json::array();
    for (const auto& n : chain_names) c.push_back(n);
    r.body["chain"] = c;
    r.body["result"] = io::to_json(res);
    r.pass = true;
    auto o = finish(r);
    if (res.full) {
      io::ModelFile out = model_of(*res.full);
      if (res.total.has_forward() || res.total.has_inverse()) out.maps.emplace_back("total", res.total);
      o.model = out;
    }
    return o;
  });
}

Outcome integrate(const io::ModelFile& mf, const std::string& symmetry, const GlobalOptions& g) {
  return guarded("integrate", [&] {
    const auto res = reduce::integrate_scalar(mf.system, mf.symmetry(symmetry), reduce_options(mf, g));
    Report r;
    r.command = "integrate";
    r.body["symmetry"] = symmetry;
    r.body["result"] = io::to_json(res);
    r.pass = res.integrable;
    auto o = finish(r);
    if (res.full) {
      io::ModelFile out = model_of(*res.full);
      if (res.total.symbolic()) out.maps.emplace_back("Phi", res.total);
      o.model = out;
    }
    return o;
  });
}

Outcome validate(const io::ModelFile& mf, const ValidateOptions& v, const GlobalOptions& g) {
  return guarded("validate", [&] {
    const auto& sys = mf.system;
    const auto& cov = mf.map(v.map);
    std::shared_ptr<const model::CoefficientModel> reduced;
    std::optional<model::System> reduced_sys;
    if (v.reduced) {
      reduced_sys = v.reduced->system;
      reduced = std::make_shared<model::CompiledSystem>(*reduced_sys);
    } else {
      const auto tr = run_transform(sys, cov, false);
      reduced = tr.coefficients;
      reduced_sys = tr.system;
    }
    const model::CompiledSystem original(sys);
    mc::PathwiseOptions po;
    po.dts = v.dts;
    po.T = v.T;
    po.t0 = v.t0;
    po.paths = v.paths;
    po.seed = g.seed;
    po.sim.threads = g.threads;
    const std::vector<double> y0 = v.y0.empty() ? centre(sys.domain()) : v.y0;
    if (static_cast<int>(y0.size()) != sys.n()) throw Error(ErrorCode::Usage, "--y0 needs n values");
    const auto pw = mc::pathwise_check(original, cov, *reduced, y0, po);

    Report r;
    r.command = "validate";
    r.body["map"] = v.map;
    r.body["seed"] = g.seed;
    r.body["paths"] = v.paths;
    r.body["T"] = v.T;
    Json jy = Json::array();
    for (double y : y0) jy.push_back(y);
    r.body["y0"] = jy;
    r.body["pathwise"] = io::to_json(pw);
    r.pass = pw.pass;

    if (v.law) {
      if (!reduced_sys || reduced_sys->n() != 1 || reduced_sys->m() != 1) {
        throw Error(ErrorCode::Unsupported, "--law needs a scalar reduced equation in closed form");
      }
      const transform::MapEvaluator me(cov, sys.space());
      std::vector<double> slots{y0[0], v.t0, 0.0}, x0(1);
      me.forward(slots, x0);
      const auto f = t_only(reduced_sys->drift(0), *reduced_sys, r.notes);
      const auto s = t_only(reduced_sys->diffusion(0, 0), *reduced_sys, r.notes);
      const mc::ExactLaw law(f, s, x0[0], v.t0);
      // simulate the frozen form; the unsimplified one may be undefined off the image of the map
      const model::CompiledSystem frozen(
          model::System::ito(reduced_sys->space(), {f}, {{s}}, reduced_sys->domain()));
      mc::SimOptions so;
      so.threads = g.threads;
      const auto ens = mc::simulate(frozen, x0, mc::Grid::until(v.T, v.law_dt, v.t0), g.seed, v.law_paths, so);
      const auto lr = mc::law_check(ens, law, std::min(1000, v.law_paths));
      r.body["law"] = io::to_json(lr);
      r.pass = r.pass && lr.pass;
    }
    auto o = finish(r);
    if (v.export_paths) {
      mc::SimOptions so;
      so.threads = g.threads;
      o.ensemble = mc::simulate(original, y0, mc::Grid::until(v.T, v.dts.back(), v.t0), g.seed, v.paths, so);
    }
    return o;
  });
}

Outcome fixtures(const std::string& dir, const std::vector<std::string>& names, const GlobalOptions& g) {
  return guarded("fixtures", [&] {
    const std::filesystem::path root(dir);
    std::ifstream in(root / "manifest.json");
    if (!in) throw Error(ErrorCode::Io, "cannot read " + (root / "manifest.json").string());
    Json manifest;
    try {
      manifest = Json::parse(in);
    } catch (const std::exception& e) {
      throw Error(ErrorCode::Parse, std::string("manifest.json: ") + e.what());
    }
    Report r;
    r.command = "fixtures";
    Json cases = Json::array();
    int run = 0, passed = 0;
    for (const auto& c : manifest.at("cases")) {
      const std::string name = c.at("name").get<std::string>();
      if (!names.empty() && std::find(names.begin(), names.end(), name) == names.end()) continue;
      bool ok = false;
      cases.push_back(run_case(root, c, g, ok));
      ++run;
      passed += ok ? 1 : 0;
    }
    for (const auto& n : names) {
      bool known = false;
      for (const auto& c : manifest.at("cases")) known = known || c.at("name").get<std::string>() == n;
      if (!known) throw Error(ErrorCode::Usage, "no fixture named '" + n + "'");
    }
    r.body["run"] = run;
    r.body["passed"] = passed;
    r.body["cases"] = cases;
    r.pass = run > 0 && passed == run;
    return finish(r);
  });
}

}  // namespace stochsym::app
