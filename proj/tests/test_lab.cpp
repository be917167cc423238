#include "fracvar/lab.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

using namespace fracvar;
using namespace fracvar::lab;

namespace {

ExperimentConfig parse(const std::string& text) {
  std::istringstream is(text);
  return parse_config(is);
}

std::string csv(const ConvergenceTable& t) {
  std::ostringstream os;
  write_csv(os, t);
  return os.str();
}

}  // namespace

TEST(Config, ParsesSectionsAndLists) {
  const ExperimentConfig c = parse(R"(
[experiment]
kind = gamma
seed = 7
workers = 2

[grid]
cells = 128
lo = -0.25
hi = 1.25

[density]
type = laminate
low = 1
high = 3
period = 0.5

[labels]
values = 0, 1, 2.5

[schedule]
k = 2 4 8
policy = naive

[cell]
pair = 2,0
t = 2, 4, 8

[output]
svg = no
)");
  EXPECT_EQ(c.kind, "gamma");
  EXPECT_EQ(c.seed, 7u);
  EXPECT_EQ(c.workers, 2);
  EXPECT_EQ(c.cells, 128);
  EXPECT_DOUBLE_EQ(c.lo, -0.25);
  EXPECT_EQ(c.density.type, "laminate");
  EXPECT_DOUBLE_EQ(c.density.high, 3.0);
  EXPECT_EQ(c.labels, (std::vector<double>{0.0, 1.0, 2.5}));
  EXPECT_EQ(c.k_schedule, (std::vector<int>{2, 4, 8}));
  EXPECT_EQ(c.policy, "naive");
  EXPECT_EQ(c.pair_i, 2);
  EXPECT_EQ(c.pair_j, 0);
  EXPECT_FALSE(c.svg);
  EXPECT_DOUBLE_EQ(c.density.build()->weight({0.3, 0.0}), 3.0);
}

TEST(Config, DefaultsAreValid) {
  const ExperimentConfig c = parse("");
  EXPECT_EQ(c.kind, "verify");
  EXPECT_NO_THROW(c.validate());
}

TEST(Config, RejectsUnknownOrMalformedInput) {
  EXPECT_THROW(parse("[grid]\nsize = 4\n"), ConfigError);
  EXPECT_THROW(parse("[gird]\ncells = 4\n"), ConfigError);
  EXPECT_THROW(parse("[grid]\ncells = many\n"), ConfigError);
  EXPECT_THROW(parse("[grid]\ncells = 64x\n"), ConfigError);
  EXPECT_THROW(parse("[labels]\nvalues = 1, 0\n"), ConfigError);
  EXPECT_THROW(parse("[schedule]\ns = 0.5, 1.0\n"), ConfigError);
  EXPECT_THROW(parse("[density]\ntype = swirl\n"), ConfigError);
  EXPECT_THROW(parse("[density]\ntype = ellipse\na = -1\n"), ConfigError);
  EXPECT_THROW(parse("[cell]\npair = 1\n"), ConfigError);
  EXPECT_THROW(parse("[cell]\nstencil = 6\n"), ConfigError);
  EXPECT_THROW(parse("[output]\nsvg = maybe\n"), ConfigError);
  EXPECT_THROW(parse("[experiment]\nkind = everything\n"), ConfigError);
  EXPECT_THROW(parse("[grid\ncells = 4\n"), ConfigError);
  EXPECT_THROW(load_config("/nonexistent/fracvar.ini"), ConfigError);
}

TEST(Output, CsvLayout) {
  ConvergenceTable t;
  t.experiment = "demo";
  t.param_names = {"s", "note,with comma"};
  t.metadata.push_back({"seed", "3"});
  t.references.push_back({"target", 2.0, Provenance::Trivial, "exact"});
  t.add_row({0, "a", {0.5, 1.0}, 2.5, 2.0, 0.0});
  t.add_row({1, "b", {std::numeric_limits<double>::quiet_NaN()}, 1.0 / 3.0, 0.0, 0.0});
  t.flags.push_back("something odd");
  t.passed = false;
  EXPECT_EQ(csv(t),
            "# experiment: demo\n"
            "# seed: 3\n"
            "# reference target = 2 [TRIVIAL] exact\n"
            "# flag: something odd\n"
            "# status: fail\n"
            "index,label,s,\"note,with comma\",measured,reference,relative_error\n"
            "0,a,0.5,1,2.5,2,0.25\n"
            "1,b,nan,nan,0.3333333333,0,0.3333333333\n");
  EXPECT_EQ(tag(Provenance::Paper), "[PAPER]");
  EXPECT_EQ(tag(Provenance::Derived), "[DERIVED]");

  std::ostringstream svg;
  write_svg(svg, t, "s");
  EXPECT_NE(svg.str().find("<svg"), std::string::npos);
  EXPECT_NE(svg.str().find("</svg>"), std::string::npos);
}

TEST(Output, ExperimentsAreDeterministic) {
  ExperimentConfig c;
  c.kind = "schedule";
  const std::string first = csv(run_schedule(c));
  EXPECT_EQ(first, csv(run_schedule(c)));
  EXPECT_NE(first.find("# status: pass"), std::string::npos);
  c.policy = "naive";
  const ConvergenceTable naive = run_schedule(c);
  EXPECT_FALSE(naive.passed);
  EXPECT_NE(csv(naive).find("# status: fail"), std::string::npos);
}

TEST(Output, ConstantsExperimentPasses) {
  const ConvergenceTable t = run_constants(ExperimentConfig{});
  EXPECT_TRUE(t.passed);
  EXPECT_FALSE(t.rows.empty());
}

TEST(Workers, ResultsDoNotDependOnThreadCount) {
  const auto f = [](std::size_t i) { return std::sqrt(static_cast<double>(i)) * 3.0; };
  const auto one = run_indexed<double>(100, 1, f);
  const auto four = run_indexed<double>(100, 4, f);
  EXPECT_EQ(one, four);
  EXPECT_THROW(run_indexed<int>(10, 3,
                                [](std::size_t i) -> int {
                                  if (i == 6) throw std::runtime_error("six");
                                  return 0;
                                }),
               std::runtime_error);
}

TEST(Workers, VerificationSuiteIsReproducible) {
  ExperimentConfig c;
  c.cells = 32;
  c.samples = 1;
  c.s_schedule = {0.5};
  const VerificationReport a = run_verification_suite(c);
  c.workers = 2;
  const VerificationReport b = run_verification_suite(c);
  ASSERT_EQ(a.checks.size(), b.checks.size());
  for (std::size_t i = 0; i < a.checks.size(); ++i) {
    EXPECT_EQ(a.checks[i].name, b.checks[i].name);
    EXPECT_EQ(a.checks[i].worst, b.checks[i].worst);
  }
}

TEST(RandomFields, SeededAndCompact) {
  const Grid g = Grid::box(2, 64, -1.0, 1.0);
  const ScalarField a = random_bump_field(g, 5), b = random_bump_field(g, 5), c = random_bump_field(g, 6);
  EXPECT_EQ(a.values, b.values);
  EXPECT_NE(a.values, c.values);
  // Bumps live inside [-0.95, 0.95]^2: the outer ring of cells is zero.
  for (int i = 0; i < 64; ++i) {
    EXPECT_EQ(a.at(i, 0), 0.0);
    EXPECT_EQ(a.at(0, i), 0.0);
  }
}
