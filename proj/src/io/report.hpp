#pragma once

#include <json.hpp>
#include <string>
#include <vector>

#include "mc/checks.hpp"
#include "model/system.hpp"
#include "reduce/reduce.hpp"
#include "symcheck/report.hpp"
#include "symcheck/search.hpp"
#include "transform/change_of_variables.hpp"
#include "transform/transform.hpp"

namespace stochsym::io {

using Json = nlohmann::ordered_json;

// Stage log of one command. `body` keeps insertion order so the rendering is
// reproducible byte for byte.
struct Report {
  std::string command;
  bool pass = false;
  Json body = Json::object();
  std::vector<std::string> notes;
};

Json to_json(const symcheck::ResidualReport& r);
Json to_json(const model::System& s);
Json to_json(const model::VectorField& X);
Json to_json(const transform::ChangeOfVariables& c);
Json to_json(const transform::TransformResult& r);
Json to_json(const symcheck::SearchResult& r);
Json to_json(const reduce::ReductionResult& r);
Json to_json(const mc::PathwiseReport& r);
Json to_json(const mc::LawReport& r);

// {"command", "pass", ...body, "notes"}; two-space indentation.
std::string render_json(const Report& r);
// Indented "key: value" lines of the same content.
std::string render_text(const Report& r);
// Inverse of render_json. Throws Error(Parse).
Report parse_report(const std::string& json);

}  // namespace stochsym::io
