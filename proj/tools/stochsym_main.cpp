// stochsym command-line tool. Links only the C interface.
#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include "stochsym/stochsym.h"

namespace {

const char* kGrammar = R"(model file grammar ('#' starts a comment):
  [space] n=<int> m=<int> [kind=ito|generalized]
  [domain]            x1=<lo>,<hi>  t=<lo>,<hi>  w1=<lo>,<hi>
  [drift]             f1=<expr> ...
  [diffusion]         s11=<expr> ...   (s<i>_<k> when an index exceeds 9)
  [symmetry <name>]   phi1=<expr> ...
  [map <name>]        Phi1=<expr> ...  then "inverse" and F1=<expr> ...
  [beta]              b=<expr in t>  c=<number>
expressions: + - * / ^, exp log sqrt sin cos, variables x<i> t w<k>
)";

struct ModelDeleter {
  void operator()(ss_model* m) const { ss_model_free(m); }
};
struct ReportDeleter {
  void operator()(ss_report* r) const { ss_report_free(r); }
};
using Model = std::unique_ptr<ss_model, ModelDeleter>;
using Report = std::unique_ptr<ss_report, ReportDeleter>;

int api_error(ss_status s, const std::string& context) {
  std::cerr << "error: " << ss_status_name(s) << ": " << ss_last_error() << "\n";
  if (!context.empty()) std::cerr << "while " << context << "\n";
  if (s == SS_ERR_PARSE || s == SS_ERR_UNKNOWN_VARIABLE) std::cerr << "\n" << kGrammar;
  return ss_status_exit_code(s);
}

std::vector<const char*> c_strings(const std::vector<std::string>& v) {
  std::vector<const char*> out;
  for (const auto& s : v) out.push_back(s.c_str());
  return out;
}

std::string default_fixtures_dir() {
  if (const char* env = std::getenv("STOCHSYM_FIXTURES")) return env;
#ifdef STOCHSYM_FIXTURES_DIR
  return STOCHSYM_FIXTURES_DIR;
#else
  return "fixtures";
#endif
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Symmetry-based reduction and integration of Ito stochastic differential equations"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_version_flag("--version", std::string(ss_version()));
  app.footer(kGrammar);

  ss_options opts;
  ss_options_default(&opts);
  std::string format = "text";
  app.add_option("--seed", opts.seed, "random seed")->capture_default_str();
  app.add_option("--tol", opts.tol, "relative residual tolerance")->capture_default_str();
  app.add_option("--points", opts.points, "sample points for residual checks")->capture_default_str();
  app.add_option("--threads", opts.threads, "worker threads, 0 for all cores")->capture_default_str();
  app.add_option("--format", format, "report format")->check(CLI::IsMember({"text", "json"}))->capture_default_str();

  std::string model_path, symmetry, map, out_path, name = "Phi", reduced_path, export_path;
  std::vector<std::string> basis, chain, maps;
  bool random = false, backward = false, law = false, binary = false;
  std::string fixtures_dir = default_fixtures_dir();
  std::string run = "all";
  ss_validate_options vopts;
  ss_validate_options_default(&vopts);
  std::vector<double> y0, dts;

  auto model_opt = [&](CLI::App* sub) { sub->add_option("--model", model_path, "model file")->required(); };
  auto out_opt = [&](CLI::App* sub) { sub->add_option("--out", out_path, "write the output model here"); };

  auto* check = app.add_subcommand("check", "verify a symmetry by sampled residuals");
  model_opt(check);
  check->add_option("--symmetry", symmetry, "symmetry name")->required();

  auto* search = app.add_subcommand("search", "find symmetries in the span of a basis");
  model_opt(search);
  search->add_option("--basis", basis, "basis field, components separated by ';' (repeat)")->required();
  search->add_flag("--random", random, "allow w-dependent coefficients");

  auto* compat = app.add_subcommand("compat", "compatibility condition of a random symmetry");
  model_opt(compat);
  compat->add_option("--symmetry", symmetry, "symmetry name")->required();

  auto* transform = app.add_subcommand("transform", "apply a named change of variables");
  model_opt(transform);
  transform->add_option("--map", map, "map name")->required();
  transform->add_flag("--backward", backward, "scalar only: recover the original equation");
  out_opt(transform);

  auto* build = app.add_subcommand("build-map", "construct the integrating map of a scalar symmetry");
  model_opt(build);
  build->add_option("--symmetry", symmetry, "symmetry name")->required();
  build->add_option("--name", name, "name of the new map")->capture_default_str();
  out_opt(build);

  auto* reduce = app.add_subcommand("reduce", "reduce by a chain of symmetries");
  model_opt(reduce);
  reduce->add_option("--chain", chain, "symmetry names, outermost first")->required()->delimiter(',');
  reduce->add_option("--maps", maps, "one straightening map per stage")->required()->delimiter(',');
  out_opt(reduce);

  auto* integrate = app.add_subcommand("integrate", "integrate a scalar equation by a symmetry");
  model_opt(integrate);
  integrate->add_option("--symmetry", symmetry, "symmetry name")->required();
  out_opt(integrate);

  auto* validate = app.add_subcommand("validate", "Monte Carlo check of a map against the transformed equation");
  model_opt(validate);
  validate->add_option("--map", map, "map name")->required();
  validate->add_option("--reduced", reduced_path, "model file of the reduced equation");
  validate->add_option("--T", vopts.T, "horizon")->capture_default_str();
  validate->add_option("--t0", vopts.t0, "start time")->capture_default_str();
  validate->add_option("--paths", vopts.paths, "paths per step size")->capture_default_str();
  validate->add_option("--y0", y0, "initial state")->delimiter(',');
  validate->add_option("--dts", dts, "step sizes, coarsest first")->delimiter(',');
  validate->add_flag("--law", law, "KS test of the reduced scalar equation");
  validate->add_option("--law-paths", vopts.law_paths, "paths for the KS test")->capture_default_str();
  validate->add_option("--law-dt", vopts.law_dt, "step for the KS test")->capture_default_str();
  validate->add_option("--export", export_path, "write the original-system paths here");
  validate->add_flag("--binary", binary, "binary instead of columnar text export");

  auto* fixtures = app.add_subcommand("fixtures", "run the example fixture suite");
  fixtures->add_option("--dir", fixtures_dir, "fixture directory")->capture_default_str();
  fixtures->add_option("--run", run, "'all' or comma-separated case names")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    if (code == 0) return 0;
    // usage excerpt of the subcommand that failed to parse
    CLI::App* where = &app;
    for (auto* sub : app.get_subcommands()) where = sub;
    std::cerr << "\n" << where->help("", CLI::AppFormatMode::Normal);
    return 2;
  }

  Model model;
  if (!fixtures->parsed()) {
    ss_model* m = nullptr;
    const ss_status s = ss_model_load(model_path.c_str(), &m);
    if (s != SS_OK) return api_error(s, "loading " + model_path);
    model.reset(m);
  }

  ss_report* raw = nullptr;
  ss_status s = SS_OK;
  Model reduced;
  if (check->parsed()) {
    s = ss_check(model.get(), symmetry.c_str(), &opts, &raw);
  } else if (search->parsed()) {
    const auto b = c_strings(basis);
    s = ss_search(model.get(), b.data(), b.size(), random ? 1 : 0, &opts, &raw);
  } else if (compat->parsed()) {
    s = ss_compat(model.get(), symmetry.c_str(), &opts, &raw);
  } else if (transform->parsed()) {
    s = ss_transform(model.get(), map.c_str(), backward ? 1 : 0, &opts, &raw);
  } else if (build->parsed()) {
    s = ss_build_map(model.get(), symmetry.c_str(), name.c_str(), &opts, &raw);
  } else if (reduce->parsed()) {
    const auto c = c_strings(chain), mp = c_strings(maps);
    s = ss_reduce(model.get(), c.data(), c.size(), mp.data(), mp.size(), &opts, &raw);
  } else if (integrate->parsed()) {
    s = ss_integrate(model.get(), symmetry.c_str(), &opts, &raw);
  } else if (validate->parsed()) {
    if (!reduced_path.empty()) {
      ss_model* m = nullptr;
      const ss_status rs = ss_model_load(reduced_path.c_str(), &m);
      if (rs != SS_OK) return api_error(rs, "loading " + reduced_path);
      reduced.reset(m);
    }
    vopts.map = map.c_str();
    vopts.reduced = reduced.get();
    vopts.y0 = y0.empty() ? nullptr : y0.data();
    vopts.n_y0 = y0.size();
    vopts.dts = dts.empty() ? nullptr : dts.data();
    vopts.n_dts = dts.size();
    vopts.law = law ? 1 : 0;
    vopts.export_paths = export_path.empty() ? 0 : 1;
    s = ss_validate(model.get(), &vopts, &opts, &raw);
  } else if (fixtures->parsed()) {
    std::vector<std::string> names;
    if (run != "all") {
      std::string cur;
      for (char c : run + ",") {
        if (c == ',') {
          if (!cur.empty()) names.push_back(cur);
          cur.clear();
        } else {
          cur += c;
        }
      }
    }
    const auto n = c_strings(names);
    s = ss_fixtures(fixtures_dir.c_str(), n.data(), n.size(), &opts, &raw);
  }
  if (s != SS_OK) return api_error(s, "");
  Report report(raw);

  char* text = nullptr;
  s = ss_report_render(report.get(), format == "json" ? SS_FORMAT_JSON : SS_FORMAT_TEXT, &text);
  if (s != SS_OK) return api_error(s, "rendering the report");
  std::fputs(text, stdout);
  ss_string_free(text);

  int code = ss_report_exit_code(report.get());
  if (!out_path.empty()) {
    if (ss_report_has_model(report.get())) {
      s = ss_report_save_model(report.get(), out_path.c_str());
      if (s != SS_OK) return api_error(s, "writing " + out_path);
    } else {
      std::cerr << "note: no output model to write to " << out_path << "\n";
    }
  }
  if (!export_path.empty() && ss_report_has_ensemble(report.get())) {
    s = ss_report_save_ensemble(report.get(), export_path.c_str(), binary ? 1 : 0);
    if (s != SS_OK) return api_error(s, "writing " + export_path);
  }
  return code;
}
