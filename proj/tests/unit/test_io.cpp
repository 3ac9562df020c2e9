#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "common/error.hpp"
#include "io/model_file.hpp"
#include "io/report.hpp"
#include "sym_helpers.hpp"
#include "test_support.hpp"

using namespace stochsym;
using namespace stochsym::testing;

namespace {

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::Internal;
}

std::string message_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.what();
  }
  return "";
}

std::string fixture(const std::string& name) { return std::string(STOCHSYM_FIXTURES_DIR) + "/" + name; }

}  // namespace

TEST(ModelFile, LoadsExample1) {
  const auto mf = io::load_model(fixture("ex1.sde"));
  EXPECT_EQ(mf.system.n(), 1);
  EXPECT_EQ(mf.system.m(), 1);
  EXPECT_EQ(mf.symmetries.size(), 2u);
  EXPECT_EQ(mf.maps.size(), 1u);
  EXPECT_NO_THROW(mf.symmetry("X"));
  EXPECT_EQ(code_of([&] { mf.symmetry("nope"); }), ErrorCode::Usage);
  EXPECT_NE(message_of([&] { mf.map("nope"); }).find("Phi"), std::string::npos);
}

TEST(ModelFile, Example4FullRank) {
  const auto mf = io::load_model(fixture("ex4.sde"));
  bool noted = false;
  for (const auto& n : mf.notes) noted = noted || n.find("full rank") != std::string::npos;
  EXPECT_TRUE(noted);
  EXPECT_EQ(mf.map("id").forward.size(), 1u);
}

TEST(ModelFile, AllFixturesRoundTrip) {
  for (const auto& entry : std::filesystem::directory_iterator(STOCHSYM_FIXTURES_DIR)) {
    if (entry.path().extension() != ".sde") continue;
    const auto a = io::load_model(entry.path().string());
    const auto text = io::render_model(a);
    const auto b = io::parse_model(text, "rendered");
    const auto ca = a.system.coefficients(), cb = b.system.coefficients();
    ASSERT_EQ(ca.size(), cb.size()) << entry.path();
    for (std::size_t i = 0; i < ca.size(); ++i) {
      EXPECT_TRUE(expr::structurally_equal(ca[i], cb[i])) << entry.path() << " coefficient " << i;
      EXPECT_EQ(diff_on(ca[i], cb[i], a.system.space(), a.system.domain()), 0.0);
    }
    ASSERT_EQ(a.symmetries.size(), b.symmetries.size());
    ASSERT_EQ(a.maps.size(), b.maps.size());
    for (std::size_t k = 0; k < a.maps.size(); ++k) {
      ASSERT_EQ(a.maps[k].second.forward.size(), b.maps[k].second.forward.size());
      for (std::size_t i = 0; i < a.maps[k].second.forward.size(); ++i) {
        EXPECT_TRUE(expr::structurally_equal(a.maps[k].second.forward[i], b.maps[k].second.forward[i]))
            << entry.path() << ": " << expr::to_string(a.maps[k].second.forward[i]) << " vs "
            << expr::to_string(b.maps[k].second.forward[i]);
      }
    }
    EXPECT_EQ(a.system.domain().x[0].lo, b.system.domain().x[0].lo);
    EXPECT_EQ(a.beta.has_value(), b.beta.has_value());
    // stable after one more pass
    EXPECT_EQ(io::render_model(b), text) << entry.path();
  }
}

TEST(ModelFile, ParseErrorsNameLineAndSection) {
  const std::string bad = "[space] n=1 m=1\n[drift]\nf1=exp(\n";
  EXPECT_EQ(code_of([&] { io::parse_model(bad, "bad.sde"); }), ErrorCode::Parse);
  const auto msg = message_of([&] { io::parse_model(bad, "bad.sde"); });
  EXPECT_NE(msg.find("bad.sde:3"), std::string::npos) << msg;
  EXPECT_NE(msg.find("[drift]"), std::string::npos) << msg;

  EXPECT_EQ(code_of([] { io::parse_model("[space] n=1 m=1\n[drift]\nf2=1\n"); }), ErrorCode::Parse);
  EXPECT_EQ(code_of([] { io::parse_model("[drift]\nf1=1\n"); }), ErrorCode::Parse);
  EXPECT_EQ(code_of([] { io::parse_model("[space] n=1 m=1\n[weird]\n"); }), ErrorCode::Parse);
  EXPECT_EQ(code_of([] { io::parse_model("[space] n=2 m=1\n[symmetry X]\nphi1=1\n"); }), ErrorCode::Parse);
  EXPECT_EQ(code_of([] { io::parse_model("[space] n=1 m=1\n[beta]\nb=x1\n"); }), ErrorCode::Parse);
}

TEST(ModelFile, ItoWithNoiseIsInvariantViolation) {
  EXPECT_EQ(code_of([] { io::parse_model("[space] n=1 m=1 kind=ito\n[diffusion]\ns11=x1*w1\n"); }),
            ErrorCode::Invariant);
  EXPECT_NO_THROW(io::parse_model("[space] n=1 m=1 kind=generalized\n[diffusion]\ns11=x1*w1\n"));
}

TEST(ModelFile, SingularDefaultDomainMoves) {
  const auto mf = io::parse_model("[space] n=1 m=1\n[drift]\nf1=log(x1)\n[diffusion]\ns11=1\n");
  EXPECT_GT(mf.system.domain().x[0].lo, 0.0);
  EXPECT_FALSE(mf.notes.empty());
}

TEST(ModelFile, MissingFileIsIo) {
  EXPECT_EQ(code_of([] { io::load_model("/nonexistent/model.sde"); }), ErrorCode::Io);
}

TEST(Report, JsonRoundTrip) {
  io::Report r;
  r.command = "check";
  r.pass = true;
  r.body["symmetry"] = "X";
  r.body["max_residual"] = 1.5e-13;
  r.body["levels"] = io::Json::array({1, 2, 3});
  r.body["nested"]["a"] = nullptr;
  r.notes = {"one", "two"};
  const auto text = io::render_json(r);
  const auto back = io::parse_report(text);
  EXPECT_EQ(back.command, "check");
  EXPECT_TRUE(back.pass);
  EXPECT_EQ(back.notes, r.notes);
  EXPECT_EQ(io::render_json(back), text);
  EXPECT_EQ(code_of([] { io::parse_report("{"); }), ErrorCode::Parse);
}

TEST(Report, NonFiniteBecomesNull) {
  symcheck::ResidualReport rr;
  rr.check = "x";
  rr.max_residual = std::numeric_limits<double>::infinity();
  const auto j = io::to_json(rr);
  EXPECT_TRUE(j["max_residual"].is_null());
}

TEST(Report, TextRendering) {
  io::Report r;
  r.command = "compat";
  r.pass = false;
  r.body["value"] = 0.125;
  const auto t = io::render_text(r);
  EXPECT_NE(t.find("compat: FAIL"), std::string::npos);
  EXPECT_NE(t.find("value: 0.125"), std::string::npos);
}
