#include "io/model_file.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>

#include "common/error.hpp"
#include "expr/compiled.hpp"
#include "expr/parser.hpp"
#include "model/sampler.hpp"

namespace stochsym::io {

namespace {

using expr::Expression;
using expr::Variable;

struct Entry {
  std::string key;
  std::string value;
  int line = 0;
  int column = 1;  // of the value
};

struct Section {
  std::string kind;
  std::string name;
  int line = 0;
  std::vector<Entry> entries;
  int inverse_marker = -1;  // index in entries where "inverse" appeared
};

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

class Parser {
 public:
  Parser(std::string_view text, std::string source) : source_(std::move(source)) { split(text); }

  ModelFile build();

 private:
  [[noreturn]] void fail(int line, const Section* s, const std::string& msg) const {
    std::string where = source_ + ":" + std::to_string(line);
    if (s) where += " [" + s->kind + (s->name.empty() ? "" : " " + s->name) + "]";
    throw Error(ErrorCode::Parse, where + ": " + msg);
  }

  void split(std::string_view text);
  void add_pair(Section& s, std::string_view token, int line, int column);
  Expression expression(const Section& s, const Entry& e, const expr::VariableSpace& space) const;
  double number(const Section& s, const Entry& e) const;
  model::Interval interval(const Section& s, const Entry& e) const;

  std::string source_;
  std::vector<Section> sections_;
};

void Parser::add_pair(Section& s, std::string_view token, int line, int column) {
  const auto eq = token.find('=');
  if (eq == std::string_view::npos) fail(line, &s, "expected key=value, got '" + std::string(token) + "'");
  const std::string key = trim(token.substr(0, eq));
  const std::string value = trim(token.substr(eq + 1));
  if (key.empty()) fail(line, &s, "missing key");
  if (value.empty()) fail(line, &s, "missing value for " + key);
  const auto lead = token.substr(eq + 1).find_first_not_of(" \t");
  s.entries.push_back({key, value, line, column + static_cast<int>(eq + 1 + (lead == std::string_view::npos ? 0 : lead))});
}

void Parser::split(std::string_view text) {
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    std::string_view raw = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    const auto hash = raw.find('#');
    if (hash != std::string_view::npos) raw = raw.substr(0, hash);
    const std::string line = trim(raw);
    if (line.empty()) continue;
    const int indent = static_cast<int>(raw.find_first_not_of(" \t")) + 1;
    if (line.front() == '[') {
      const auto close = line.find(']');
      if (close == std::string::npos) fail(line_no, nullptr, "unterminated section header");
      Section s;
      s.line = line_no;
      std::istringstream head(line.substr(1, close - 1));
      head >> s.kind;
      std::string rest;
      std::getline(head, rest);
      s.name = trim(rest);
      sections_.push_back(s);
      // Header-line pairs: whitespace separated.
      std::size_t p = close + 1;
      while (p < line.size()) {
        while (p < line.size() && (line[p] == ' ' || line[p] == '\t')) ++p;
        if (p >= line.size()) break;
        const auto q = line.find_first_of(" \t", p);
        const std::string tok = line.substr(p, q == std::string::npos ? std::string::npos : q - p);
        add_pair(sections_.back(), tok, line_no, indent + static_cast<int>(p));
        p = q == std::string::npos ? line.size() : q;
      }
      continue;
    }
    if (sections_.empty()) fail(line_no, nullptr, "content before the first section");
    Section& s = sections_.back();
    if (line == "inverse") {
      if (s.kind != "map") fail(line_no, &s, "'inverse' is only valid in a map section");
      s.inverse_marker = static_cast<int>(s.entries.size());
      continue;
    }
    add_pair(s, line, line_no, indent);
  }
}

Expression Parser::expression(const Section& s, const Entry& e, const expr::VariableSpace& space) const {
  try {
    return expr::parse(e.value, space, e.line, e.column);
  } catch (const Error& err) {
    fail(e.line, &s, err.what());
  }
}

double Parser::number(const Section& s, const Entry& e) const {
  try {
    std::size_t used = 0;
    const double v = std::stod(e.value, &used);
    if (used != e.value.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    fail(e.line, &s, "expected a number for " + e.key + ", got '" + e.value + "'");
  }
}

model::Interval Parser::interval(const Section& s, const Entry& e) const {
  const auto comma = e.value.find(',');
  if (comma == std::string::npos) fail(e.line, &s, "expected <lo>,<hi> for " + e.key);
  Entry lo = e, hi = e;
  lo.value = trim(e.value.substr(0, comma));
  hi.value = trim(e.value.substr(comma + 1));
  const model::Interval out{number(s, lo), number(s, hi)};
  if (!(out.lo < out.hi)) fail(e.line, &s, "empty interval for " + e.key);
  return out;
}

// "f3" -> 3 with the given prefix; 0 when the key does not match.
int index_of(const std::string& key, const std::string& prefix) {
  if (key.rfind(prefix, 0) != 0 || key.size() == prefix.size()) return 0;
  const std::string digits = key.substr(prefix.size());
  if (!std::all_of(digits.begin(), digits.end(), ::isdigit) || digits[0] == '0') return 0;
  return std::stoi(digits);
}

// s<i><k>, s<i>_<k> or s<i>,<k>.
std::pair<int, int> diffusion_index(const std::string& key, int n, int m) {
  if (key.size() < 2 || key[0] != 's') return {0, 0};
  const std::string rest = key.substr(1);
  const auto sep = rest.find_first_of("_,");
  if (sep != std::string::npos) {
    const std::string a = rest.substr(0, sep), b = rest.substr(sep + 1);
    if (a.empty() || b.empty() || !std::all_of(a.begin(), a.end(), ::isdigit) ||
        !std::all_of(b.begin(), b.end(), ::isdigit)) {
      return {0, 0};
    }
    return {std::stoi(a), std::stoi(b)};
  }
  if (rest.size() == 2 && n <= 9 && m <= 9 && std::isdigit(rest[0]) && std::isdigit(rest[1])) {
    return {rest[0] - '0', rest[1] - '0'};
  }
  return {0, 0};
}

// Default x box, moved off the non-positive axis when something is singular there.
model::Interval default_x(int i, const std::vector<Expression>& exprs, const expr::VariableSpace& space) {
  const int n = space.n();
  std::vector<double> slots(space.size(), 1.0);
  slots[n] = 1.0;
  for (int k = 0; k < space.m(); ++k) slots[n + 1 + k] = 0.5;
  for (const auto& e : exprs) {
    if (!expr::depends_on(e, Variable::x(i))) continue;
    const expr::CompiledExpression c(e, space);
    for (int j = 0; j <= 8; ++j) {
      slots[i - 1] = -2.0 + 0.25 * j;
      if (!std::isfinite(c(slots))) return {0.1, 2.1};
    }
  }
  return {-2.0, 2.0};
}

ModelFile Parser::build() {
  const Section* space_sec = nullptr;
  for (const auto& s : sections_) {
    if (s.kind == "space") {
      if (space_sec) fail(s.line, &s, "duplicate section");
      space_sec = &s;
    }
  }
  if (!space_sec) fail(1, nullptr, "missing [space] section");
  int n = 0, m = 0;
  bool ito = true;
  for (const auto& e : space_sec->entries) {
    if (e.key == "n" || e.key == "m") {
      const double v = number(*space_sec, e);
      if (v != std::floor(v) || v < 1 || v > 64) fail(e.line, space_sec, e.key + " must be an integer in [1, 64]");
      (e.key == "n" ? n : m) = static_cast<int>(v);
    } else if (e.key == "kind") {
      if (e.value != "ito" && e.value != "generalized") fail(e.line, space_sec, "kind must be ito or generalized");
      ito = e.value == "ito";
    } else {
      fail(e.line, space_sec, "unknown key " + e.key);
    }
  }
  if (n == 0 || m == 0) fail(space_sec->line, space_sec, "n and m are required");
  const expr::VariableSpace space(n, m);

  std::vector<Expression> drift(n, expr::constant(0.0));
  std::vector<std::vector<Expression>> diffusion(n, std::vector<Expression>(m, expr::constant(0.0)));
  std::map<std::string, model::Interval> box;
  ModelFile out{model::System::ito(expr::VariableSpace(1, 1), {expr::constant(0.0)}, {{expr::constant(0.0)}},
                                   model::Domain::defaults(1, 1)),
                {}, {}, std::nullopt, {}};
  std::vector<Expression> all;
  bool seen_drift = false, seen_diff = false, seen_domain = false;

  auto once = [&](bool& seen, const Section& s) {
    if (seen) fail(s.line, &s, "duplicate section");
    seen = true;
  };
  auto vector_of = [&](const Section& s, const std::vector<Entry>& entries, const std::string& prefix) {
    std::vector<Expression> v(n, expr::constant(0.0));
    std::vector<bool> set(n, false);
    for (const auto& e : entries) {
      const int i = index_of(e.key, prefix);
      if (i < 1 || i > n) fail(e.line, &s, "unknown key " + e.key + " (expected " + prefix + "1.." + prefix + std::to_string(n) + ")");
      if (set[i - 1]) fail(e.line, &s, "duplicate key " + e.key);
      set[i - 1] = true;
      v[i - 1] = expression(s, e, space);
    }
    if (!entries.empty() && std::find(set.begin(), set.end(), false) != set.end()) {
      fail(s.line, &s, "needs all of " + prefix + "1.." + prefix + std::to_string(n));
    }
    return v;
  };

  auto leading_of = [&](const Section& s, const std::vector<Entry>& entries, const std::string& prefix) {
    int k = 0;
    for (const auto& e : entries) k = std::max(k, index_of(e.key, prefix));
    if (k < 1 || k > n) fail(s.line, &s, "needs " + prefix + "1.." + prefix + "k with k <= " + std::to_string(n));
    std::vector<Expression> v(k, expr::constant(0.0));
    std::vector<bool> set(k, false);
    for (const auto& e : entries) {
      const int i = index_of(e.key, prefix);
      if (i < 1) fail(e.line, &s, "unknown key " + e.key);
      if (set[i - 1]) fail(e.line, &s, "duplicate key " + e.key);
      set[i - 1] = true;
      v[i - 1] = expression(s, e, space);
    }
    if (std::find(set.begin(), set.end(), false) != set.end()) {
      fail(s.line, &s, "needs all of " + prefix + "1.." + prefix + std::to_string(k));
    }
    return v;
  };

  for (const auto& s : sections_) {
    if (s.kind == "space") continue;
    if (s.kind == "domain") {
      once(seen_domain, s);
      for (const auto& e : s.entries) {
        const bool ok = e.key == "t" || (index_of(e.key, "x") >= 1 && index_of(e.key, "x") <= n) ||
                        (index_of(e.key, "w") >= 1 && index_of(e.key, "w") <= m);
        if (!ok) fail(e.line, &s, "unknown variable " + e.key);
        if (box.count(e.key)) fail(e.line, &s, "duplicate key " + e.key);
        box[e.key] = interval(s, e);
      }
    } else if (s.kind == "drift") {
      once(seen_drift, s);
      std::vector<bool> set(n, false);
      for (const auto& e : s.entries) {
        const int i = index_of(e.key, "f");
        if (i < 1 || i > n) fail(e.line, &s, "unknown key " + e.key);
        if (set[i - 1]) fail(e.line, &s, "duplicate key " + e.key);
        set[i - 1] = true;
        drift[i - 1] = expression(s, e, space);
      }
    } else if (s.kind == "diffusion") {
      once(seen_diff, s);
      std::set<std::pair<int, int>> set;
      for (const auto& e : s.entries) {
        const auto [i, k] = diffusion_index(e.key, n, m);
        if (i < 1 || i > n || k < 1 || k > m) fail(e.line, &s, "unknown key " + e.key);
        if (!set.insert({i, k}).second) fail(e.line, &s, "duplicate key " + e.key);
        diffusion[i - 1][k - 1] = expression(s, e, space);
      }
    } else if (s.kind == "symmetry") {
      if (s.name.empty()) fail(s.line, &s, "symmetry needs a name");
      for (const auto& [name, f] : out.symmetries) {
        if (name == s.name) fail(s.line, &s, "duplicate symmetry name");
      }
      if (s.entries.empty()) fail(s.line, &s, "symmetry has no coefficients");
      model::VectorField X;
      X.coeffs = vector_of(s, s.entries, "phi");
      out.symmetries.emplace_back(s.name, X);
    } else if (s.kind == "map") {
      if (s.name.empty()) fail(s.line, &s, "map needs a name");
      for (const auto& [name, c] : out.maps) {
        if (name == s.name) fail(s.line, &s, "duplicate map name");
      }
      std::vector<Entry> fwd, inv;
      for (int k = 0; k < static_cast<int>(s.entries.size()); ++k) {
        const Entry& e = s.entries[k];
        if (index_of(e.key, "Phi")) {
          if (s.inverse_marker >= 0 && k >= s.inverse_marker) fail(e.line, &s, "Phi entries go before 'inverse'");
          fwd.push_back(e);
        } else if (index_of(e.key, "F")) {
          inv.push_back(e);
        } else {
          fail(e.line, &s, "unknown key " + e.key + " (expected Phi<i> or F<i>)");
        }
      }
      if (fwd.empty() && inv.empty()) fail(s.line, &s, "map has no components");
      transform::ChangeOfVariables c;
      // a map may act on the leading k < n states only (later stages of a chain)
      if (!fwd.empty()) c.forward = leading_of(s, fwd, "Phi");
      if (!inv.empty()) c.inverse = leading_of(s, inv, "F");
      if (!fwd.empty() && !inv.empty() && c.forward.size() != c.inverse.size()) {
        fail(s.line, &s, "Phi and F have different lengths");
      }
      c.beta = expr::constant(0.0);
      out.maps.emplace_back(s.name, c);
      all.insert(all.end(), c.forward.begin(), c.forward.end());
    } else if (s.kind == "beta") {
      if (out.beta) fail(s.line, &s, "duplicate section");
      transform::BetaOptions b;
      for (const auto& e : s.entries) {
        if (e.key == "b") {
          b.b = expression(s, e, expr::VariableSpace(n, m));
          if (expr::depends_on_kind(b.b, expr::VarKind::State) || expr::depends_on_kind(b.b, expr::VarKind::Noise)) {
            fail(e.line, &s, "b may depend on t only");
          }
        } else if (e.key == "c") {
          b.c = number(s, e);
        } else {
          fail(e.line, &s, "unknown key " + e.key);
        }
      }
      out.beta = b;
    } else {
      fail(s.line, &s, "unknown section");
    }
  }

  all.insert(all.end(), drift.begin(), drift.end());
  for (const auto& row : diffusion) all.insert(all.end(), row.begin(), row.end());
  for (const auto& [name, X] : out.symmetries) all.insert(all.end(), X.coeffs.begin(), X.coeffs.end());

  model::Domain d = model::Domain::defaults(n, m);
  for (int i = 1; i <= n; ++i) {
    const std::string key = "x" + std::to_string(i);
    if (box.count(key)) {
      d.x[i - 1] = box[key];
    } else {
      d.x[i - 1] = default_x(i, all, space);
      if (d.x[i - 1].lo > 0) out.notes.push_back("domain of " + key + " moved to [0.1, 2.1]");
    }
  }
  if (box.count("t")) d.t = box["t"];
  for (int k = 1; k <= m; ++k) {
    const std::string key = "w" + std::to_string(k);
    if (box.count(key)) d.w[k - 1] = box[key];
  }

  try {
    out.system = model::System(ito ? model::System::Kind::Ito : model::System::Kind::Generalized, space, drift,
                               diffusion, d);
  } catch (const Error& e) {
    throw Error(e.code(), source_ + ": " + e.what());
  }

  if (n == m) {
    // Full rank condition on the diffusion matrix, sampled.
    const auto coeffs = out.system.coefficients();
    const std::vector<Expression> s(coeffs.begin() + n, coeffs.end());
    const auto pts = model::Sampler(space, d).sample(s, 50);
    const expr::CompiledBundle bundle(s, space);
    std::vector<double> v(s.size()), scratch;
    double min_det = std::numeric_limits<double>::infinity();
    for (const auto& p : pts) {
      bundle.evaluate(p, v, scratch);
      Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> M(v.data(), n, m);
      min_det = std::min(min_det, std::abs(M.determinant()));
    }
    if (!pts.empty()) {
      out.notes.push_back(min_det > 1e-12 ? "diffusion has full rank at " + std::to_string(pts.size()) + " sampled points"
                                          : "diffusion matrix is singular at some sampled points");
    }
  }
  return out;
}

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

const model::VectorField& ModelFile::symmetry(std::string_view name) const {
  std::string known;
  for (const auto& [n, X] : symmetries) {
    if (n == name) return X;
    known += (known.empty() ? "" : ", ") + n;
  }
  throw Error(ErrorCode::Usage, "no symmetry named '" + std::string(name) + "' (available: " +
                                    (known.empty() ? "none" : known) + ")");
}

const transform::ChangeOfVariables& ModelFile::map(std::string_view name) const {
  std::string known;
  for (const auto& [n, c] : maps) {
    if (n == name) return c;
    known += (known.empty() ? "" : ", ") + n;
  }
  throw Error(ErrorCode::Usage, "no map named '" + std::string(name) + "' (available: " +
                                    (known.empty() ? "none" : known) + ")");
}

ModelFile parse_model(std::string_view text, const std::string& source) { return Parser(text, source).build(); }

ModelFile load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_model(ss.str(), path);
}

std::string render_model(const ModelFile& mf) {
  const auto& sys = mf.system;
  const int n = sys.n(), m = sys.m();
  const bool wide = n > 9 || m > 9;
  std::ostringstream out;
  out << "[space] n=" << n << " m=" << m << " kind=" << (sys.kind() == model::System::Kind::Ito ? "ito" : "generalized")
      << "\n\n[domain]\n";
  for (int i = 0; i < n; ++i) out << "x" << i + 1 << " = " << num(sys.domain().x[i].lo) << "," << num(sys.domain().x[i].hi) << "\n";
  out << "t = " << num(sys.domain().t.lo) << "," << num(sys.domain().t.hi) << "\n";
  for (int k = 0; k < m; ++k) out << "w" << k + 1 << " = " << num(sys.domain().w[k].lo) << "," << num(sys.domain().w[k].hi) << "\n";
  out << "\n[drift]\n";
  for (int i = 0; i < n; ++i) out << "f" << i + 1 << " = " << expr::to_string(sys.drift(i)) << "\n";
  out << "\n[diffusion]\n";
  for (int i = 0; i < n; ++i) {
    for (int k = 0; k < m; ++k) {
      out << "s" << i + 1 << (wide ? "_" : "") << k + 1 << " = " << expr::to_string(sys.diffusion(i, k)) << "\n";
    }
  }
  for (const auto& [name, X] : mf.symmetries) {
    out << "\n[symmetry " << name << "]\n";
    for (int i = 0; i < X.n(); ++i) out << "phi" << i + 1 << " = " << expr::to_string(X.coeffs[i]) << "\n";
  }
  for (const auto& [name, c] : mf.maps) {
    out << "\n[map " << name << "]\n";
    for (std::size_t i = 0; i < c.forward.size(); ++i) out << "Phi" << i + 1 << " = " << expr::to_string(c.forward[i]) << "\n";
    if (c.has_inverse()) {
      out << "inverse\n";
      for (std::size_t i = 0; i < c.inverse.size(); ++i) out << "F" << i + 1 << " = " << expr::to_string(c.inverse[i]) << "\n";
    }
  }
  if (mf.beta) {
    out << "\n[beta]\nb = " << expr::to_string(mf.beta->b) << "\nc = " << num(mf.beta->c) << "\n";
  }
  return out.str();
}

void save_model(const ModelFile& m, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path);
  out << render_model(m);
  if (!out) throw Error(ErrorCode::Io, "write failed for " + path);
}

}  // namespace stochsym::io
