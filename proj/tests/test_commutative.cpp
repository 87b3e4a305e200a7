#include <gtest/gtest.h>

#include "oracles.hpp"

using namespace qmlab;

namespace {

double brute_lip(const FiniteMetricSpace& X, const std::vector<double>& f) {
  double L = 0.0;
  for (int x = 0; x < X.size(); ++x)
    for (int y = 0; y < X.size(); ++y)
      if (x != y) L = std::max(L, std::abs(f[static_cast<std::size_t>(x)] - f[static_cast<std::size_t>(y)]) / X.d(x, y));
  return L;
}

}  // namespace

TEST(FiniteMetricSpace, Validation) {
  EXPECT_THROW(FiniteMetricSpace({}, {}), InputError);
  EXPECT_THROW(FiniteMetricSpace({"a", "b"}, {{0, 1}, {2, 0}}), InputError);
  EXPECT_THROW(FiniteMetricSpace({"a", "b"}, {{0, 0}, {0, 0}}), InputError);
  EXPECT_THROW(FiniteMetricSpace({"a", "b"}, {{1, 1}, {1, 0}}), InputError);
  EXPECT_THROW(FiniteMetricSpace({"a", "b", "c"}, {{0, 1, 3}, {1, 0, 1}, {3, 1, 0}}), InputError);
  const auto X = fixtures::line3();
  EXPECT_EQ(X.size(), 3);
  EXPECT_NEAR(X.diameter(), 1.0, 1e-15);
  EXPECT_EQ(X.index_of("p1"), 1);
  EXPECT_THROW(X.index_of("nope"), InputError);
}

TEST(LipschitzSeminorm, Examples) {
  const auto X = fixtures::two_point();
  EXPECT_EQ(lipschitz_seminorm(X, std::vector<double>{3.0, 3.0}), 0.0);
  EXPECT_EQ(lipschitz_seminorm(X, std::vector<double>{0.0, 1.0}), 1.0);
}

TEST(LipschitzSeminorm, DistanceFunctionsAndSeminormLaws) {
  for (int s = 0; s < 100; ++s) {
    Rng rng = make_stream(40, "lip", static_cast<std::uint64_t>(s));
    const auto X = random_space(rng, 12);
    const int p = uniform_int(rng, 0, X.size() - 1);
    std::vector<double> dp(static_cast<std::size_t>(X.size()));
    for (int x = 0; x < X.size(); ++x) dp[static_cast<std::size_t>(x)] = X.d(x, p);
    const double L = lipschitz_seminorm(X, dp);
    EXPECT_NEAR(L, 1.0, 1e-12);  // any q != p gives |d(q,p) - d(p,p)| / d(q,p) = 1
    EXPECT_EQ(L, brute_lip(X, dp));

    std::vector<double> f(dp.size()), g(dp.size());
    for (std::size_t i = 0; i < f.size(); ++i) f[i] = uniform(rng, -1, 1), g[i] = uniform(rng, -1, 1);
    std::vector<double> f3(f.size()), fg(f.size());
    for (std::size_t i = 0; i < f.size(); ++i) f3[i] = -3.0 * f[i], fg[i] = f[i] + g[i];
    EXPECT_NEAR(lipschitz_seminorm(X, f3), 3.0 * lipschitz_seminorm(X, f), 1e-12 * lipschitz_seminorm(X, f3));
    EXPECT_LE(lipschitz_seminorm(X, fg), lipschitz_seminorm(X, f) + lipschitz_seminorm(X, g) + 1e-12 * lipschitz_seminorm(X, fg));
  }
}

TEST(DNormComm, Examples) {
  const auto X = fixtures::two_point();
  EXPECT_EQ(d_norm_comm(X, {0}, LipFunction{0.0, 0.0}), 0.0);
  EXPECT_EQ(d_norm_comm(X, {0}, LipFunction{0.0, 1.0}), 1.0);
  EXPECT_EQ(d_norm_comm(X, {0}, LipFunction{0.0, Complex(0.0, 0.5)}), 0.5);
  EXPECT_THROW(d_norm_comm(X, {0}, LipFunction{1.0, 1.0}), InputError);
  const auto Y = fixtures::line3();
  const LipFunction f{0.0, 0.3, -0.2};
  EXPECT_EQ(d_norm_comm(Y, {0}, f), std::max(0.3, lipschitz_seminorm(Y, real_values(f))));
}

TEST(HausdorffSets, Examples) {
  const auto X = fixtures::line3();
  EXPECT_EQ(hausdorff_sets(X, {0, 2}, {0, 2}), 0.0);
  EXPECT_EQ(hausdorff_sets(X, {0}, {2}), 1.0);
  EXPECT_NEAR(hausdorff_sets(X, {0}, {1}), 0.1, 1e-15);
  EXPECT_THROW(hausdorff_sets(X, {}, {1}), InputError);
}

TEST(McShane, Examples) {
  const auto X = fixtures::line3();
  const auto g = mcshane_extend(X, {0}, std::vector<double>{0.0}, 1.0, -1.0, 1.0);
  for (int x = 0; x < 3; ++x) EXPECT_EQ(g[static_cast<std::size_t>(x)], std::min(X.d(x, 0), 1.0));
  const auto z = mcshane_extend(X, {0, 2}, std::vector<double>{0.0, 0.0}, 1.0, 0.0, 0.0);
  for (double v : z) EXPECT_EQ(v, 0.0);
  EXPECT_THROW(mcshane_extend(X, {0, 1}, std::vector<double>{0.0, 1.0}, 1.0, -1.0, 1.0), InputError);
  EXPECT_THROW(mcshane_extend(X, {0}, std::vector<double>{2.0}, 1.0, -1.0, 1.0), InputError);
}

TEST(McShane, RandomInstances) {
  for (int s = 0; s < 300; ++s) {
    Rng rng = make_stream(41, "mcshane", static_cast<std::uint64_t>(s));
    const auto X = random_space(rng, 12);
    const auto S = normalize_set(X, random_subset(rng, X.size()));
    const double L = uniform(rng, 0.1, 3.0);
    // Data drawn as a restriction of an L-Lipschitz function.
    const int p = uniform_int(rng, 0, X.size() - 1);
    std::vector<double> vals;
    for (int y : S) vals.push_back(0.5 * L * X.d(y, p) - 0.1);
    double lo = *std::min_element(vals.begin(), vals.end()), hi = *std::max_element(vals.begin(), vals.end());
    const auto g = mcshane_extend(X, S, vals, L, lo, hi);
    for (std::size_t a = 0; a < S.size(); ++a) EXPECT_EQ(g[static_cast<std::size_t>(S[a])], vals[a]);
    EXPECT_LE(brute_lip(X, g), L + 1e-12);
    for (double v : g) {
      EXPECT_GE(v, lo);
      EXPECT_LE(v, hi);
    }
  }
}

TEST(Repair, ZeroFunction) {
  const auto X = fixtures::line3();
  const auto r = repair(X, {0}, {1}, LipFunction(3, 0.0), 0.32);
  EXPECT_TRUE(r.certificate.passed());
  for (const auto& v : r.h) EXPECT_EQ(v, Complex(0.0));
  EXPECT_EQ(r.certificate.distance, 0.0);
  EXPECT_EQ(r.certificate.sup_norm, 0.0);
  EXPECT_EQ(r.certificate.lip_re, 0.0);
}

TEST(Repair, Line3Construction) {
  const auto X = fixtures::line3();
  for (double t : {0.0, 0.05, 0.1})
    for (double s : {-0.7, 0.2, 0.9}) {
      const LipFunction f{0.0, t, Complex(s, 0.1 * s)};
      ASSERT_LE(d_norm_comm(X, {0}, f), 1.0);
      const auto r = repair(X, {0}, {1}, f, 0.32);
      EXPECT_TRUE(r.certificate.passed());
      EXPECT_LE(r.certificate.distance, 8 * 0.32);
      EXPECT_LE(std::abs(r.h[1]), 1e-12);
    }
}

TEST(Repair, Rejections) {
  const auto X = fixtures::line3();
  EXPECT_THROW(repair(X, {0}, {1}, LipFunction(3, 0.0), 0.3), InputError);  // 0.1 >= 0.09
  EXPECT_THROW(repair(X, {0}, {0}, LipFunction{0.0, 0.5, 2.0}, 0.5), InputError);
  EXPECT_THROW(repair(X, {0}, {0}, LipFunction(3, 0.0), 0.0), InputError);
  try {
    repair(X, {0}, {2}, LipFunction(3, 0.0), 0.5);
    FAIL();
  } catch (const InputError& e) {
    EXPECT_NE(std::string(e.what()).find("1.0"), std::string::npos);
  }
}

TEST(Repair, EpsAboveOneIsClamped) {
  const auto X = fixtures::line3();
  const auto r = repair(X, {0}, {0}, LipFunction{0.0, 0.1, 0.5}, 3.0);
  EXPECT_EQ(r.eps, kMaxEps);
  EXPECT_FALSE(r.note.empty());
  EXPECT_TRUE(r.certificate.passed());
}

TEST(Repair, SameZeroSetSweep) {
  for (int s = 0; s < 500; ++s) {
    Rng rng = make_stream(42, "repair/same", static_cast<std::uint64_t>(s));
    const auto X = random_space(rng, 12);
    const auto F = normalize_set(X, random_subset(rng, X.size()));
    const auto f = random_ball_function(X, F, rng);
    const double eps = uniform(rng, 1e-3, 0.999);
    const auto r = repair(X, F, F, f, eps);
    EXPECT_TRUE(r.certificate.passed()) << s;
    EXPECT_LE(r.certificate.distance, 8.0 * eps);
  }
}

TEST(Repair, DegenerateLargeEps) {
  for (int s = 0; s < 200; ++s) {
    Rng rng = make_stream(43, "repair/degenerate", static_cast<std::uint64_t>(s));
    auto X = random_space(rng, 8);
    if (X.diameter() >= kMaxEps) continue;
    const double eps = uniform(rng, std::max(0.25, X.diameter()), kMaxEps);
    const auto F = normalize_set(X, random_subset(rng, X.size()));
    const auto f = random_ball_function(X, F, rng);
    const auto r = repair(X, F, F, f, eps);
    EXPECT_EQ(static_cast<int>(r.near_set.size()), X.size());
    for (const auto& v : r.h) EXPECT_EQ(v, Complex(0.0));
    EXPECT_TRUE(r.certificate.passed());
  }
}

TEST(Repair, ReportJson) {
  const auto X = fixtures::line3();
  const LipFunction f{0.0, 0.1, 0.9};
  const auto r = repair(X, {0}, {1}, f, 0.32);
  const Json j = repair_report_json(X, r, f);
  EXPECT_EQ(j.at("certificate").size(), 5u);
  EXPECT_TRUE(j.at("passed").get<bool>());
  EXPECT_NEAR(j.at("measured").at("distance").get<double>(), r.certificate.distance, 0.0);
}

TEST(SpaceJson, RoundTripAndFixtures) {
  const auto X = fixtures::line3();
  const auto Y = space_from_json(space_to_json(X));
  EXPECT_EQ(Y.dist(), X.dist());
  const std::string dir = QMLAB_FIXTURE_DIR;
  const auto Z = space_from_json(read_json_file(dir + "/spaces/line3.json"));
  EXPECT_EQ(subset_from_json(Z, Json::array({"c", "a"})), (PointSet{0, 2}));
  EXPECT_EQ(subset_to_json(Z, {1}), Json::array({"b"}));
}
