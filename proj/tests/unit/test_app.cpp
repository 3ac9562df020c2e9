#include <gtest/gtest.h>

#include "app/commands.hpp"
#include "io/model_file.hpp"

using namespace stochsym;

namespace {

std::string fixture(const std::string& name) { return std::string(STOCHSYM_FIXTURES_DIR) + "/" + name; }

app::GlobalOptions defaults() { return {}; }

}  // namespace

TEST(Commands, CheckPassesAndFails) {
  const auto mf = io::load_model(fixture("ex1.sde"));
  EXPECT_EQ(app::check(mf, "X", defaults()).exit_code, 0);
  const auto bad = app::check(mf, "wrong", defaults());
  EXPECT_EQ(bad.exit_code, 1);
  EXPECT_GT(bad.report.body["residuals"]["max_residual"].get<double>(), 1e-3);
  EXPECT_EQ(app::check(mf, "missing", defaults()).exit_code, 2);
}

TEST(Commands, FixturesAllPass) {
  const auto o = app::fixtures(STOCHSYM_FIXTURES_DIR, {}, defaults());
  EXPECT_EQ(o.exit_code, 0) << io::render_json(o.report);
  EXPECT_EQ(o.report.body["run"].get<int>(), 8);
  EXPECT_EQ(o.report.body["passed"].get<int>(), 8);
}

TEST(Commands, FixturesUnknownName) {
  EXPECT_EQ(app::fixtures(STOCHSYM_FIXTURES_DIR, {"ex99"}, defaults()).exit_code, 2);
}

TEST(Commands, IntegrateWritesModel) {
  const auto mf = io::load_model(fixture("ex6.sde"));
  const auto o = app::integrate(mf, "X", defaults());
  ASSERT_EQ(o.exit_code, 0) << io::render_json(o.report);
  ASSERT_TRUE(o.model.has_value());
  const auto back = io::parse_model(io::render_model(*o.model), "out");
  EXPECT_EQ(back.system.n(), 1);
}

TEST(Commands, Example8IntegrateFails) {
  const auto mf = io::load_model(fixture("ex8.sde"));
  const auto o = app::integrate(mf, "X", defaults());
  EXPECT_EQ(o.exit_code, 1);
  EXPECT_EQ(o.report.body["error"].get<std::string>(), "compatibility-failed");
  EXPECT_EQ(app::compat(mf, "X", defaults()).exit_code, 1);
}

TEST(Commands, BuildMapRoundTrips) {
  const auto mf = io::load_model(fixture("ex5.sde"));
  const auto o = app::build_map(mf, "X", "built", defaults());
  ASSERT_EQ(o.exit_code, 0) << io::render_json(o.report);
  ASSERT_TRUE(o.model.has_value());
  EXPECT_NO_THROW(o.model->map("built"));
  // the built map reproduces the integrate route
  const auto t = app::transform(*o.model, "built", false, defaults());
  EXPECT_EQ(t.exit_code, 0);
}

TEST(Commands, SearchFindsExample1Symmetry) {
  const auto mf = io::load_model(fixture("ex1.sde"));
  const auto o = app::search(mf, {"exp(-x1)", "x1", "1"}, false, defaults());
  ASSERT_EQ(o.exit_code, 0) << io::render_json(o.report);
  EXPECT_EQ(o.report.body["symmetries"].size(), 1u);
  EXPECT_TRUE(o.report.body["symmetries"][0]["verified"].get<bool>());
  EXPECT_EQ(app::search(mf, {"1;2"}, false, defaults()).exit_code, 2);
}

TEST(Commands, ReduceExample4) {
  const auto mf = io::load_model(fixture("ex4.sde"));
  const auto o = app::reduce(mf, {"X1", "X2"}, {"P", "id"}, defaults());
  ASSERT_EQ(o.exit_code, 0) << io::render_json(o.report);
  EXPECT_EQ(o.report.body["result"]["reduced_dimension"].get<int>(), 0);
  EXPECT_EQ(app::reduce(mf, {"X1"}, {}, defaults()).exit_code, 2);
}

TEST(Commands, ValidateExample1Deterministic) {
  const auto mf = io::load_model(fixture("ex1.sde"));
  app::ValidateOptions v;
  v.map = "Phi";
  v.y0 = {1.0986122886681098};  // log 3
  v.paths = 200;
  v.T = 1.0;
  const auto a = app::validate(mf, v, defaults());
  const auto b = app::validate(mf, v, defaults());
  EXPECT_EQ(io::render_json(a.report), io::render_json(b.report));
  EXPECT_EQ(a.exit_code, 0) << io::render_json(a.report);
}
