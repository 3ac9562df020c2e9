#include "io/report.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "common/error.hpp"

namespace stochsym::io {

namespace {

Json number(double v) {
  if (!std::isfinite(v)) return Json(nullptr);
  return Json(v);
}

Json strings(const std::vector<expr::Expression>& v) {
  Json a = Json::array();
  for (const auto& e : v) a.push_back(expr::to_string(e));
  return a;
}

Json notes(const std::vector<std::string>& v) {
  Json a = Json::array();
  for (const auto& s : v) a.push_back(s);
  return a;
}

std::string scalar_text(const Json& j) {
  if (j.is_string()) return j.get<std::string>();
  if (j.is_null()) return "-";
  if (j.is_number_float()) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.6g", j.get<double>());
    return buf;
  }
  return j.dump();
}

void text(const Json& j, int indent, std::ostringstream& out) {
  const std::string pad(indent, ' ');
  if (j.is_object()) {
    for (const auto& [k, v] : j.items()) {
      if (v.is_structured() && !v.empty()) {
        out << pad << k << ":\n";
        text(v, indent + 2, out);
      } else {
        out << pad << k << ": " << (v.is_structured() ? (v.is_array() ? "[]" : "{}") : scalar_text(v)) << "\n";
      }
    }
  } else if (j.is_array()) {
    bool flat = true;
    for (const auto& v : j) flat = flat && !v.is_structured();
    if (flat) {
      for (const auto& v : j) out << pad << "- " << scalar_text(v) << "\n";
      return;
    }
    for (const auto& v : j) {
      out << pad << "-\n";
      text(v, indent + 2, out);
    }
  } else {
    out << pad << scalar_text(j) << "\n";
  }
}

}  // namespace

Json to_json(const symcheck::ResidualReport& r) {
  Json j;
  j["check"] = r.check;
  j["pass"] = r.pass;
  j["max_residual"] = number(r.max_residual);
  j["scale"] = number(r.scale);
  j["tol"] = r.tol;
  j["points"] = r.points;
  Json entries = Json::array();
  for (const auto& e : r.entries) {
    Json x;
    x["label"] = e.label;
    x["max_abs"] = number(e.max_abs);
    x["residual"] = expr::to_string(e.residual);
    entries.push_back(x);
  }
  j["entries"] = entries;
  if (!r.values.empty()) {
    Json v;
    for (const auto& [k, x] : r.values) v[k] = number(x);
    j["values"] = v;
  }
  if (!r.notes.empty()) j["notes"] = notes(r.notes);
  return j;
}

Json to_json(const model::System& s) {
  Json j;
  j["kind"] = s.kind() == model::System::Kind::Ito ? "ito" : "generalized";
  j["n"] = s.n();
  j["m"] = s.m();
  j["drift"] = strings(s.drift());
  Json d = Json::array();
  for (const auto& row : s.diffusion()) d.push_back(strings(row));
  j["diffusion"] = d;
  Json box;
  for (int i = 0; i < s.n(); ++i) box["x" + std::to_string(i + 1)] = {s.domain().x[i].lo, s.domain().x[i].hi};
  box["t"] = {s.domain().t.lo, s.domain().t.hi};
  for (int k = 0; k < s.m(); ++k) box["w" + std::to_string(k + 1)] = {s.domain().w[k].lo, s.domain().w[k].hi};
  j["domain"] = box;
  return j;
}

Json to_json(const model::VectorField& X) { return strings(X.coeffs); }

Json to_json(const transform::ChangeOfVariables& c) {
  Json j;
  j["forward"] = strings(c.forward);
  j["inverse"] = strings(c.inverse);
  j["random"] = c.random();
  if (c.numeric) j["numeric"] = c.numeric->describe();
  if (!c.notes.empty()) j["notes"] = notes(c.notes);
  return j;
}

Json to_json(const transform::TransformResult& r) {
  Json j;
  j["symbolic"] = r.symbolic();
  if (r.system) {
    j["system"] = to_json(*r.system);
  } else {
    j["coefficients"] = r.coefficients ? r.coefficients->describe() : "none";
  }
  if (!r.notes.empty()) j["notes"] = notes(r.notes);
  return j;
}

Json to_json(const symcheck::SearchResult& r) {
  Json j;
  j["rows"] = r.rows;
  j["points"] = r.points;
  Json sv = Json::array();
  for (double v : r.singular_values) sv.push_back(number(v));
  j["singular_values"] = sv;
  Json ns = Json::array();
  for (const auto& v : r.null_space) {
    Json a = Json::array();
    for (double x : v) a.push_back(number(x));
    ns.push_back(a);
  }
  j["null_space"] = ns;
  return j;
}

Json to_json(const reduce::ReductionResult& r) {
  Json j;
  j["n"] = r.n;
  j["m"] = r.m;
  j["reduced_dimension"] = r.reduced_dimension();
  j["integrable"] = r.integrable;
  Json stages = Json::array();
  for (const auto& s : r.stages) {
    Json st;
    st["generator"] = s.generator;
    st["map"] = to_json(s.cov);
    if (s.system) st["system"] = to_json(*s.system);
    Json checks = Json::array();
    for (const auto& c : s.checks) checks.push_back(to_json(c));
    st["checks"] = checks;
    stages.push_back(st);
  }
  j["stages"] = stages;
  if (r.reduced) j["reduced"] = to_json(*r.reduced);
  Json recs = Json::array();
  for (const auto& rec : r.reconstruction) {
    Json x;
    x["index"] = rec.index;
    x["drift"] = expr::to_string(rec.drift);
    x["diffusion"] = strings(rec.diffusion);
    recs.push_back(x);
  }
  j["reconstruction"] = recs;
  if (r.form) {
    Json f;
    f["f"] = expr::to_string(r.form->f);
    f["sigma"] = expr::to_string(r.form->sigma);
    f["drift_integral"] = r.form->drift_integral ? Json(expr::to_string(*r.form->drift_integral)) : Json(nullptr);
    f["variance_integral"] =
        r.form->variance_integral ? Json(expr::to_string(*r.form->variance_integral)) : Json(nullptr);
    j["integrable_form"] = f;
  }
  j["total_map"] = to_json(r.total);
  if (!r.notes.empty()) j["notes"] = notes(r.notes);
  return j;
}

Json to_json(const mc::PathwiseReport& r) {
  Json j;
  Json levels = Json::array();
  for (const auto& l : r.levels) {
    Json x;
    x["dt"] = l.dt;
    x["median"] = number(l.median);
    x["p95"] = number(l.p95);
    x["used"] = l.used;
    levels.push_back(x);
  }
  j["levels"] = levels;
  j["min_factor"] = number(r.min_factor);
  j["monotone"] = r.monotone;
  j["pass"] = r.pass;
  if (!r.notes.empty()) j["notes"] = notes(r.notes);
  return j;
}

Json to_json(const mc::LawReport& r) {
  Json j;
  j["mean"] = number(r.mean);
  j["variance"] = number(r.variance);
  j["sample_mean"] = number(r.sample_mean);
  j["sample_variance"] = number(r.sample_variance);
  j["ks_statistic"] = number(r.ks.statistic);
  j["p_value"] = number(r.ks.p_value);
  j["samples"] = r.ks.samples;
  j["alpha"] = r.alpha;
  j["pass"] = r.pass;
  return j;
}

std::string render_json(const Report& r) {
  Json j;
  j["command"] = r.command;
  j["pass"] = r.pass;
  for (const auto& [k, v] : r.body.items()) j[k] = v;
  j["notes"] = notes(r.notes);
  return j.dump(2) + "\n";
}

std::string render_text(const Report& r) {
  std::ostringstream out;
  out << r.command << ": " << (r.pass ? "PASS" : "FAIL") << "\n";
  text(r.body, 2, out);
  for (const auto& n : r.notes) out << "  note: " << n << "\n";
  return out.str();
}

Report parse_report(const std::string& json) {
  Json j;
  try {
    j = Json::parse(json);
  } catch (const std::exception& e) {
    throw Error(ErrorCode::Parse, std::string("report: ") + e.what());
  }
  if (!j.is_object() || !j.contains("command") || !j.contains("pass")) {
    throw Error(ErrorCode::Parse, "report: missing command or pass");
  }
  Report r;
  r.command = j["command"].get<std::string>();
  r.pass = j["pass"].get<bool>();
  for (const auto& [k, v] : j.items()) {
    if (k == "command" || k == "pass") continue;
    if (k == "notes") {
      for (const auto& n : v) r.notes.push_back(n.get<std::string>());
      continue;
    }
    r.body[k] = v;
  }
  return r;
}

}  // namespace stochsym::io
