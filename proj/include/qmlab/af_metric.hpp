#pragma once

// The L_beta seminorm on a truncated AF tower and the constants that enter the
// propinquity estimates for its ideals.

#include <algorithm>
#include <string>
#include <vector>

#include "qmlab/algebra.hpp"
#include "qmlab/random.hpp"
#include "qmlab/tower.hpp"

namespace qmlab {

enum class TripleCase { af, commutative };

/// The (F, G, H) triples used for the AF and the commutative bundles.
///
/// AF:           F = 2(x1 x4 + x2 x3), G(x,y,z) = F(x,y,z,z), H(x,y) = F(x,x,y,y)
/// commutative:  F =   x1 x4 + x2 x3,  G(x,y,z) = F(x,z,y,z), H(x,y) = F(x,y,x,y)
struct AdmissibleTriple {
  TripleCase kind = TripleCase::af;

  double F(double x1, double x2, double x3, double x4) const {
    const double s = x1 * x4 + x2 * x3;
    return kind == TripleCase::af ? 2.0 * s : s;
  }
  double G(double x, double y, double z) const {
    return kind == TripleCase::af ? F(x, y, z, z) : F(x, z, y, z);
  }
  double H(double x, double y) const { return kind == TripleCase::af ? F(x, x, y, y) : F(x, y, x, y); }
};

struct TripleCheckResult {
  long tuples = 0;
  long failures = 0;
  std::vector<std::string> failed_checks;  // first few, for diagnostics
};

namespace detail {
// Dyadic rationals k / 2^10 with k < 2^20: every sum of two products of such
// numbers is exact in double precision, so the inequalities can be compared
// with zero tolerance.
inline double dyadic(Rng& rng) { return uniform_int(rng, 0, 1 << 20) / 1024.0; }
}  // namespace detail

/// Checks monotonicity and the lower bounds x1x4 + x2x3 <= F, (x+y)z <= G,
/// 2xy <= H on `count` random nonnegative tuples.
inline TripleCheckResult check_triple(const AdmissibleTriple& t, long count, Rng& rng) {
  TripleCheckResult r;
  auto fail = [&r](const std::string& what) {
    ++r.failures;
    if (r.failed_checks.size() < 8) r.failed_checks.push_back(what);
  };
  for (long s = 0; s < count; ++s) {
    double x[4], y[4];
    for (int k = 0; k < 4; ++k) {
      x[k] = detail::dyadic(rng);
      y[k] = x[k] + detail::dyadic(rng);
    }
    ++r.tuples;
    if (!(t.F(x[0], x[1], x[2], x[3]) <= t.F(y[0], y[1], y[2], y[3]))) fail("F monotone");
    if (!(x[0] * x[3] + x[1] * x[2] <= t.F(x[0], x[1], x[2], x[3]))) fail("F lower bound");
    if (!(t.G(x[0], x[1], x[2]) <= t.G(y[0], y[1], y[2]))) fail("G monotone");
    if (!((x[0] + x[1]) * x[2] <= t.G(x[0], x[1], x[2]))) fail("G lower bound");
    if (!(t.H(x[0], x[1]) <= t.H(y[0], y[1]))) fail("H monotone");
    if (!(2.0 * x[0] * x[1] <= t.H(x[0], x[1]))) fail("H lower bound");
  }
  return r;
}

/// ||a - E_n(a)|| / beta(n) for n = 0 .. M-1.
inline std::vector<double> l_seminorm_terms(const Tower& t, const BetaSequence& beta, const Element& a) {
  if (beta.size() < t.top()) throw InputError("l_seminorm: beta needs at least M values");
  std::vector<double> terms;
  for (int n = 0; n < t.top(); ++n) terms.push_back(op_norm(a - t.expectation_top(n, a)) / beta(n));
  return terms;
}

/// L_beta(a) = max_n ||a - E_n(a)|| / beta(n). Exact on the truncated tower:
/// E_n(a) = a for n >= M, so the remaining terms vanish.
inline double l_seminorm(const Tower& t, const BetaSequence& beta, const Element& a) {
  const auto terms = l_seminorm_terms(t, beta, a);
  return terms.empty() ? 0.0 : *std::max_element(terms.begin(), terms.end());
}

struct LeibnizSlack {
  double jordan = 0.0;
  double lie = 0.0;
};

/// F(||a||, ||b||, L(a), L(b)) - L(a∘b) and the same for {a,b}. Inputs are
/// replaced by their real parts first.
inline LeibnizSlack quasi_leibniz_slack(const Tower& t, const BetaSequence& beta, const Element& a,
                                        const Element& b) {
  const Element sa = real_part(a);
  const Element sb = real_part(b);
  const AdmissibleTriple triple{TripleCase::af};
  const double bound =
      triple.F(op_norm(sa), op_norm(sb), l_seminorm(t, beta, sa), l_seminorm(t, beta, sb));
  const auto [jordan, lie] = jordan_lie(sa, sb);
  return {bound - l_seminorm(t, beta, jordan), bound - l_seminorm(t, beta, lie)};
}

struct XnFactors {
  double x_prime = 0.0;  // max_{m<n} (2 beta(n) + beta(m)) / beta(m)
  double x = 0.0;        // max(1 + beta(n), x_prime)
  double bound = 0.0;    // max(beta(n), x - 1)
};

inline XnFactors xn_factors(const BetaSequence& beta, int n) {
  if (n < 1) throw InputError("xn_factors: n must be >= 1 (no m < n for n = 0)");
  if (n >= beta.size()) throw InputError("xn_factors: beta(" + std::to_string(n) + ") is not defined");
  XnFactors f;
  f.x_prime = -1.0;
  for (int m = 0; m < n; ++m) f.x_prime = std::max(f.x_prime, (2.0 * beta(n) + beta(m)) / beta(m));
  f.x = std::max(1.0 + beta(n), f.x_prime);
  f.bound = std::max(beta(n), f.x - 1.0);
  return f;
}

/// Upper bound beta(n) on the quantum propinquity between (A_n, L_beta) and
/// (A, L_beta). Exposed as data; the true distance is never computed.
struct PropinquityBound {
  int level = 0;
  double value = 0.0;
  static constexpr const char* kind = "upper bound: quantum propinquity (A_n, L) to (A, L)";
};

inline PropinquityBound af_propinquity_bound(const BetaSequence& beta, int n) {
  if (n < 0) throw InputError("af_propinquity_bound: negative level");
  return {n, beta(n)};
}

}  // namespace qmlab
