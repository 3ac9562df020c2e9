#include "stochsym/stochsym.h"

#include <cstdlib>
#include <cstring>
#include <fstream>
#include <new>
#include <string>

#include "app/commands.hpp"
#include "common/error.hpp"
#include "io/model_file.hpp"
#include "io/report.hpp"
#include "mc/ensemble.hpp"

using namespace stochsym;

struct ss_model {
  io::ModelFile file;
};

struct ss_report {
  app::Outcome outcome;
};

static_assert(SS_ERR_PARSE == static_cast<int>(ErrorCode::Parse) + 1);
static_assert(SS_ERR_BETA_Y_DEPENDENCE == static_cast<int>(ErrorCode::BetaYDependence) + 1);
static_assert(SS_ERR_INTERNAL == static_cast<int>(ErrorCode::Internal) + 1);

namespace {

thread_local std::string last_error;

ss_status status_of(ErrorCode c) { return static_cast<ss_status>(static_cast<int>(c) + 1); }

ss_status fail(ss_status s, std::string msg) {
  last_error = std::move(msg);
  return s;
}

template <typename F>
ss_status wrap(F&& f) {
  try {
    last_error.clear();
    return f();
  } catch (const Error& e) {
    return fail(status_of(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return fail(SS_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(SS_ERR_INTERNAL, e.what());
  }
}

char* dup(const std::string& s) {
  char* p = static_cast<char*>(std::malloc(s.size() + 1));
  if (!p) throw std::bad_alloc();
  std::memcpy(p, s.c_str(), s.size() + 1);
  return p;
}

app::GlobalOptions global(const ss_options* o) {
  app::GlobalOptions g;
  if (o) {
    g.seed = o->seed;
    g.tol = o->tol;
    g.points = o->points;
    g.threads = o->threads;
  }
  return g;
}

std::vector<std::string> strings(const char* const* v, size_t n) {
  std::vector<std::string> out;
  for (size_t i = 0; i < n; ++i) {
    if (!v[i]) throw Error(ErrorCode::Usage, "null string in list");
    out.emplace_back(v[i]);
  }
  return out;
}

#define SS_REQUIRE(cond, what) \
  if (!(cond)) return fail(SS_ERR_USAGE, what)

ss_status deliver(app::Outcome o, ss_report** out) {
  *out = new ss_report{std::move(o)};
  return SS_OK;
}

}  // namespace

extern "C" {

const char* ss_version(void) { return "0.1.0"; }

const char* ss_last_error(void) { return last_error.c_str(); }

const char* ss_status_name(ss_status status) {
  if (status == SS_OK) return "ok";
  if (status < SS_OK || status > SS_ERR_INTERNAL) return "unknown";
  return to_string(static_cast<ErrorCode>(static_cast<int>(status) - 1));
}

int ss_status_exit_code(ss_status status) {
  if (status == SS_OK) return 0;
  if (status < SS_OK || status > SS_ERR_INTERNAL) return 2;
  return app::exit_code_for(static_cast<ErrorCode>(static_cast<int>(status) - 1));
}

void ss_string_free(char* s) { std::free(s); }

void ss_options_default(ss_options* opts) {
  if (!opts) return;
  const app::GlobalOptions g;
  opts->seed = g.seed;
  opts->tol = g.tol;
  opts->points = g.points;
  opts->threads = g.threads;
}

void ss_validate_options_default(ss_validate_options* opts) {
  if (!opts) return;
  const app::ValidateOptions v;
  std::memset(opts, 0, sizeof *opts);
  opts->T = v.T;
  opts->t0 = v.t0;
  opts->paths = v.paths;
  opts->law_paths = v.law_paths;
  opts->law_dt = v.law_dt;
}

ss_status ss_model_load(const char* path, ss_model** out) {
  SS_REQUIRE(path && out, "path and out are required");
  return wrap([&] {
    *out = new ss_model{io::load_model(path)};
    return SS_OK;
  });
}

ss_status ss_model_parse(const char* text, const char* source, ss_model** out) {
  SS_REQUIRE(text && out, "text and out are required");
  return wrap([&] {
    *out = new ss_model{io::parse_model(text, source ? source : "<input>")};
    return SS_OK;
  });
}

ss_status ss_model_render(const ss_model* model, char** out) {
  SS_REQUIRE(model && out, "model and out are required");
  return wrap([&] {
    *out = dup(io::render_model(model->file));
    return SS_OK;
  });
}

ss_status ss_model_save(const ss_model* model, const char* path) {
  SS_REQUIRE(model && path, "model and path are required");
  return wrap([&] {
    io::save_model(model->file, path);
    return SS_OK;
  });
}

ss_status ss_model_dims(const ss_model* model, int* n, int* m) {
  SS_REQUIRE(model, "model is required");
  if (n) *n = model->file.system.n();
  if (m) *m = model->file.system.m();
  return SS_OK;
}

void ss_model_free(ss_model* model) { delete model; }

ss_status ss_check(const ss_model* model, const char* symmetry, const ss_options* opts, ss_report** out) {
  SS_REQUIRE(model && symmetry && out, "model, symmetry and out are required");
  return wrap([&] { return deliver(app::check(model->file, symmetry, global(opts)), out); });
}

ss_status ss_search(const ss_model* model, const char* const* basis, size_t n_basis, int random,
                    const ss_options* opts, ss_report** out) {
  SS_REQUIRE(model && out && (basis || n_basis == 0), "model, basis and out are required");
  return wrap([&] {
    return deliver(app::search(model->file, strings(basis, n_basis), random != 0, global(opts)), out);
  });
}

ss_status ss_compat(const ss_model* model, const char* symmetry, const ss_options* opts, ss_report** out) {
  SS_REQUIRE(model && symmetry && out, "model, symmetry and out are required");
  return wrap([&] { return deliver(app::compat(model->file, symmetry, global(opts)), out); });
}

ss_status ss_transform(const ss_model* model, const char* map, int backward, const ss_options* opts,
                       ss_report** out) {
  SS_REQUIRE(model && map && out, "model, map and out are required");
  return wrap([&] { return deliver(app::transform(model->file, map, backward != 0, global(opts)), out); });
}

ss_status ss_build_map(const ss_model* model, const char* symmetry, const char* name, const ss_options* opts,
                       ss_report** out) {
  SS_REQUIRE(model && symmetry && out, "model, symmetry and out are required");
  return wrap([&] {
    return deliver(app::build_map(model->file, symmetry, name ? name : "Phi", global(opts)), out);
  });
}

ss_status ss_reduce(const ss_model* model, const char* const* chain, size_t n_chain, const char* const* maps,
                    size_t n_maps, const ss_options* opts, ss_report** out) {
  SS_REQUIRE(model && out && (chain || n_chain == 0) && (maps || n_maps == 0), "model, chain, maps and out are required");
  return wrap([&] {
    return deliver(app::reduce(model->file, strings(chain, n_chain), strings(maps, n_maps), global(opts)), out);
  });
}

ss_status ss_integrate(const ss_model* model, const char* symmetry, const ss_options* opts, ss_report** out) {
  SS_REQUIRE(model && symmetry && out, "model, symmetry and out are required");
  return wrap([&] { return deliver(app::integrate(model->file, symmetry, global(opts)), out); });
}

ss_status ss_validate(const ss_model* model, const ss_validate_options* v, const ss_options* opts, ss_report** out) {
  SS_REQUIRE(model && v && v->map && out, "model, options with a map, and out are required");
  SS_REQUIRE(v->paths > 0 && v->T > 0.0, "paths and T must be positive");
  return wrap([&] {
    app::ValidateOptions o;
    o.map = v->map;
    if (v->reduced) o.reduced = v->reduced->file;
    if (v->dts && v->n_dts > 0) o.dts.assign(v->dts, v->dts + v->n_dts);
    o.T = v->T;
    o.t0 = v->t0;
    o.paths = v->paths;
    if (v->y0 && v->n_y0 > 0) o.y0.assign(v->y0, v->y0 + v->n_y0);
    o.law = v->law != 0;
    if (v->law_paths > 0) o.law_paths = v->law_paths;
    if (v->law_dt > 0.0) o.law_dt = v->law_dt;
    o.export_paths = v->export_paths != 0;
    return deliver(app::validate(model->file, o, global(opts)), out);
  });
}

ss_status ss_fixtures(const char* dir, const char* const* names, size_t n_names, const ss_options* opts,
                      ss_report** out) {
  SS_REQUIRE(dir && out && (names || n_names == 0), "dir and out are required");
  return wrap([&] { return deliver(app::fixtures(dir, strings(names, n_names), global(opts)), out); });
}

int ss_report_pass(const ss_report* report) { return report && report->outcome.report.pass ? 1 : 0; }

int ss_report_exit_code(const ss_report* report) { return report ? report->outcome.exit_code : 2; }

ss_status ss_report_render(const ss_report* report, ss_format format, char** out) {
  SS_REQUIRE(report && out, "report and out are required");
  return wrap([&] {
    const auto& r = report->outcome.report;
    *out = dup(format == SS_FORMAT_JSON ? io::render_json(r) : io::render_text(r));
    return SS_OK;
  });
}

int ss_report_has_model(const ss_report* report) { return report && report->outcome.model ? 1 : 0; }

ss_status ss_report_save_model(const ss_report* report, const char* path) {
  SS_REQUIRE(report && path, "report and path are required");
  if (!report->outcome.model) return fail(SS_ERR_USAGE, "this report has no output model");
  return wrap([&] {
    io::save_model(*report->outcome.model, path);
    return SS_OK;
  });
}

int ss_report_has_ensemble(const ss_report* report) { return report && report->outcome.ensemble ? 1 : 0; }

ss_status ss_report_save_ensemble(const ss_report* report, const char* path, int binary) {
  SS_REQUIRE(report && path, "report and path are required");
  if (!report->outcome.ensemble) return fail(SS_ERR_USAGE, "this report has no path ensemble");
  return wrap([&] {
    std::ofstream f(path, binary ? std::ios::binary : std::ios::out);
    if (!f) throw Error(ErrorCode::Io, std::string("cannot write ") + path);
    if (binary) {
      mc::write_binary(*report->outcome.ensemble, f);
    } else {
      mc::write_text(*report->outcome.ensemble, f);
    }
    if (!f) throw Error(ErrorCode::Io, std::string("write failed: ") + path);
    return SS_OK;
  });
}

void ss_report_free(ss_report* report) { delete report; }

}  // extern "C"
