#include <gtest/gtest.h>

#include "oracles.hpp"

using namespace qmlab;

namespace {

Element diag(std::initializer_list<double> v) {
  const auto d = static_cast<Eigen::Index>(v.size());
  Block b = Block::Zero(d, d);
  Eigen::Index k = 0;
  for (double x : v) b(k, k) = x, ++k;
  return Element(BlockShape({static_cast<int>(d)}), {b});
}

bool has_failure(const ValidationReport& r, const std::string& name) {
  for (const auto& c : r.checks)
    if (c.name == name && !c.passed) return true;
  return false;
}

std::vector<TowerSpec> all_fixtures() {
  return {fixtures::car(), fixtures::t2(), fixtures::t2_extended(), fixtures::lineage()};
}

}  // namespace

TEST(ValidateTower, CarPasses) {
  const auto r = validate_tower(fixtures::car());
  EXPECT_TRUE(r.ok()) << r.failures();
  for (const auto& t : all_fixtures()) EXPECT_TRUE(validate_tower(t).ok());
}

TEST(ValidateTower, LevelZeroMustBeScalars) {
  TowerSpec t{{{2}, {4}}, {{{2}}}, {0.25}};
  const auto r = validate_tower(t);
  EXPECT_FALSE(r.ok());
  EXPECT_TRUE(has_failure(r, "level0_scalars"));
  EXPECT_NE(r.failures().find("A_0 must be scalars"), std::string::npos);
}

TEST(ValidateTower, UnitalityMismatch) {
  TowerSpec t{{{1}, {3}}, {{{2}}}, {1.0 / 3.0}};
  const auto r = validate_tower(t);
  EXPECT_TRUE(has_failure(r, "unitality"));
  EXPECT_THROW(Tower{t}, InputError);
}

TEST(ValidateTower, OtherInvariants) {
  TowerSpec zero_col{{{1}, {1, 1}, {2}}, {{{1}, {1}}, {{2, 0}}}, {0.5}};
  EXPECT_TRUE(has_failure(validate_tower(zero_col), "no_zero_column"));
  TowerSpec negative{{{1}, {1}}, {{{-1}}}, {1.0}};
  EXPECT_TRUE(has_failure(validate_tower(negative), "mults_nonnegative"));
  TowerSpec bad_trace{{{1}, {2}}, {{{2}}}, {0.4}};
  EXPECT_TRUE(has_failure(validate_tower(bad_trace), "top_trace_normalized"));
  TowerSpec nonpositive{{{1}, {1, 1}}, {{{1}, {1}}}, {1.0, 0.0}};
  EXPECT_TRUE(has_failure(validate_tower(nonpositive), "top_trace_positive"));
  EXPECT_FALSE(validate_tower(TowerSpec{}).ok());
}

TEST(Embed, Examples) {
  const Tower t(fixtures::car());
  EXPECT_TRUE(approx_equal(t.embed(1, Element::identity(t.shape(1))), Element::identity(t.shape(2)), 0.0));
  EXPECT_TRUE(approx_equal(t.embed(1, diag({1, -1})), diag({1, -1, 1, -1}), 0.0));
  EXPECT_THROW(t.embed(1, diag({1, 2, 3})), InputError);
}

TEST(Embed, IsometricAndMatchesOracle) {
  for (const auto& spec : all_fixtures()) {
    const Tower t(spec);
    for (int n = 0; n < t.top(); ++n)
      for (int s = 0; s < 20; ++s) {
        Rng rng = make_stream(11, "tower/embed", static_cast<std::uint64_t>(100 * n + s));
        const Element a = random_element(t.shape(n), rng);
        const Element e = t.embed(n, a);
        EXPECT_NEAR(op_norm(e), oracle::eig_norm(a), 1e-10);
        EXPECT_TRUE(approx_equal(e, oracle::embed_once(spec, n, a), 0.0));
        EXPECT_TRUE(approx_equal(t.lift_to_top(n, a), oracle::embed_to(spec, n, a, t.top()), 0.0));
      }
  }
}

TEST(InducedTraces, Car) {
  const auto w = induced_traces(Tower(fixtures::car()));
  ASSERT_EQ(w.size(), 4u);
  EXPECT_DOUBLE_EQ(w[3].weight(0), 0.125);
  EXPECT_DOUBLE_EQ(w[2].weight(0), 0.25);
  EXPECT_DOUBLE_EQ(w[1].weight(0), 0.5);
  EXPECT_DOUBLE_EQ(w[0].weight(0), 1.0);
}

TEST(InducedTraces, T2) {
  const auto w = induced_traces(Tower(fixtures::t2()));
  EXPECT_NEAR(w[1].weight(0), 1.0 / 3.0, 1e-15);
  EXPECT_NEAR(w[1].weight(1), 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(w[0].weight(0), 1.0, 1e-15);
}

TEST(InducedTraces, MatchOracleEverywhere) {
  for (const auto& spec : all_fixtures()) {
    const Tower t(spec);
    EXPECT_NEAR(t.trace(0).weight(0), 1.0, 1e-12);
    for (int n = 0; n <= t.top(); ++n) {
      const auto w = oracle::level_weights(spec, n);
      for (int i = 0; i < t.shape(n).block_count(); ++i) EXPECT_NEAR(t.trace(n).weight(i), w[static_cast<std::size_t>(i)], 1e-15);
    }
  }
}

TEST(ConditionalExpectation, Examples) {
  TowerSpec car3{{{1}, {2}, {4}}, {{{2}}, {{2}}}, {0.25}};
  const Tower t(car3);
  const Element x = diag({1, 2, 3, 4});
  EXPECT_TRUE(approx_equal(conditional_expectation(t, 1, x), diag({2, 3}), 1e-12));
  EXPECT_TRUE(approx_equal(oracle::expectation_lsq(car3, 1, x), diag({2, 3}), 1e-12));

  const Tower car(fixtures::car());
  Rng rng = make_stream(12, "tower/e0", 0);
  const Element y = random_element(car.top_shape(), rng);
  EXPECT_TRUE(approx_equal(car.expectation(0, y),
                           Element::scalar(car.shape(0), trace_state(car.top_trace(), y)), 1e-12));
  const Element z = car.lift_to_top(1, random_element(car.shape(1), rng));
  EXPECT_TRUE(approx_equal(car.expectation_top(1, z), z, 1e-12));
  EXPECT_TRUE(approx_equal(car.expectation(car.top(), y), y, 0.0));
  EXPECT_THROW(car.expectation(4, y), InputError);
  EXPECT_THROW(car.expectation(-1, y), InputError);
}

TEST(ConditionalExpectation, MatchesLeastSquaresOracle) {
  for (const auto& spec : all_fixtures()) {
    const Tower t(spec);
    for (int n = 0; n <= t.top(); ++n)
      for (int s = 0; s < 10; ++s) {
        Rng rng = make_stream(13, "tower/lsq", static_cast<std::uint64_t>(100 * n + s));
        const Element x = random_element(t.top_shape(), rng);
        EXPECT_TRUE(approx_equal(t.expectation(n, x), oracle::expectation_lsq(spec, n, x), 1e-10));
      }
  }
}

TEST(ConditionalExpectation, Axioms) {
  for (const auto& spec : all_fixtures()) {
    const Tower t(spec);
    const int M = t.top();
    for (int s = 0; s < 40; ++s) {
      Rng rng = make_stream(14, "tower/axioms", static_cast<std::uint64_t>(s));
      const Element x = random_element(t.top_shape(), rng);
      for (int n = 0; n <= M; ++n) {
        const Element e = t.expectation_top(n, x);
        EXPECT_LE(distance(t.expectation_top(n, e), e), 1e-10);
        EXPECT_LE(std::abs(trace_state(t.top_trace(), e) - trace_state(t.top_trace(), x)), 1e-10);
        EXPECT_LE(distance(t.expectation_top(n, x.adjoint()), e.adjoint()), 1e-12);
        EXPECT_LE(op_norm(e), op_norm(x) + 1e-10);
        EXPECT_GE(oracle::min_eigenvalue(t.expectation(n, x.adjoint() * x)), -1e-9);
        const Element y = t.lift_to_top(n, random_element(t.shape(n), rng));
        const Element z = t.lift_to_top(n, random_element(t.shape(n), rng));
        EXPECT_LE(distance(t.expectation_top(n, y * x * z), y * e * z), 1e-9);
        for (int m = 0; m <= M; ++m)
          EXPECT_LE(distance(t.expectation_top(m, e), t.expectation_top(std::min(m, n), x)), 1e-10);
      }
    }
  }
}

TEST(ConditionalExpectation, ConcurrentFirstUse) {
  const Tower t(fixtures::lineage());
  Rng rng = make_stream(15, "tower/concurrent", 0);
  const Element x = random_element(t.top_shape(), rng);
  std::vector<Element> out(16);
  parallel_for(out.size(), [&](std::size_t k) { out[k] = t.expectation(static_cast<int>(k % 5), x); });
  for (std::size_t k = 0; k < out.size(); ++k)
    EXPECT_TRUE(approx_equal(out[k], out[k % 5], 0.0));
}

TEST(BetaSequence, FactorialAndRatios) {
  const auto b = BetaSequence::factorial(6);
  EXPECT_EQ(b(0), 1.0);
  EXPECT_EQ(b(1), 1.0);
  EXPECT_EQ(b(2), 0.5);
  EXPECT_NEAR(b(5), 1.0 / 120.0, 1e-18);
  const auto r = b.ratio_report();
  ASSERT_EQ(r.ratios.size(), 5u);
  EXPECT_FALSE(r.all_below_one);  // beta(1)/beta(0) = 1
  EXPECT_TRUE(r.nonincreasing);
  EXPECT_THROW(BetaSequence({1.0, 0.0}), InputError);
  EXPECT_THROW(BetaSequence(std::vector<double>{}), InputError);
  EXPECT_THROW(b(6), InputError);
}

TEST(TowerJson, RoundTrip) {
  for (const auto& spec : all_fixtures()) EXPECT_EQ(tower_spec_from_json(tower_to_json(spec)), spec);
  const std::string dir = QMLAB_FIXTURE_DIR;
  EXPECT_EQ(tower_spec_from_json(read_json_file(dir + "/towers/car.json")), fixtures::car());
  EXPECT_EQ(tower_spec_from_json(read_json_file(dir + "/towers/lineage.json")), fixtures::lineage());
  EXPECT_EQ(tower_spec_from_json(read_json_file(dir + "/towers/t2_extended.json")), fixtures::t2_extended());
  EXPECT_FALSE(validate_tower(tower_spec_from_json(read_json_file(dir + "/towers/bad_level0.json"))).ok());
}
