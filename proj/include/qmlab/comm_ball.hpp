#pragma once

// Sup-norm distance from a function to the unit D-ball of I_F, and sampled
// Hausdorff distances between two such balls.
//
// dist(f, B_F) is found by bisection on t over the feasibility of
//   { h : h|F = 0, L(Re h) <= 1, L(Im h) <= 1, |h| <= 1, |f - h| <= t }.
// Real inputs admit a real optimum (take Re h), and the real problem is a
// system of difference constraints solved exactly in one pass. Complex inputs
// use cyclic projections onto the pairwise slabs and pointwise discs; each
// near-feasible iterate is snapped to an exact member of B_F and the upper end
// of the bracket is the measured distance to that member.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "qmlab/commutative.hpp"
#include "qmlab/parallel.hpp"

namespace qmlab {

struct BallDistanceOptions {
  double tol = 1e-6;
  int max_sweeps = 200000;
  int stall_window = 250;
  double stall_ratio = 0.995;
};

namespace detail {

// Largest 1-Lipschitz function below hi; feasible iff it stays above lo.
inline bool real_band_feasible(const FiniteMetricSpace& X, const std::vector<double>& lo,
                               const std::vector<double>& hi) {
  const int n = X.size();
  for (int x = 0; x < n; ++x)
    if (lo[static_cast<std::size_t>(x)] > hi[static_cast<std::size_t>(x)]) return false;
  for (int x = 0; x < n; ++x) {
    double top = hi[static_cast<std::size_t>(x)];
    for (int y = 0; y < n; ++y) top = std::min(top, hi[static_cast<std::size_t>(y)] + X.d(x, y));
    if (top < lo[static_cast<std::size_t>(x)]) return false;
  }
  return true;
}

inline bool real_feasible(const FiniteMetricSpace& X, const PointSet& F, const std::vector<double>& f, double t) {
  std::vector<double> lo(f.size()), hi(f.size());
  for (std::size_t x = 0; x < f.size(); ++x) {
    lo[x] = std::max(-1.0, f[x] - t);
    hi[x] = std::min(1.0, f[x] + t);
  }
  for (int p : F) {
    const auto i = static_cast<std::size_t>(p);
    if (lo[i] > 0.0 || hi[i] < 0.0) return false;
    lo[i] = hi[i] = 0.0;
  }
  return real_band_feasible(X, lo, hi);
}

enum class Feasibility { feasible, infeasible };

inline double max_violation(const FiniteMetricSpace& X, const PointSet& F, const LipFunction& f, double t,
                            const std::vector<double>& re, const std::vector<double>& im) {
  double v = 0.0;
  const int n = X.size();
  for (int p : F) v = std::max(v, std::hypot(re[static_cast<std::size_t>(p)], im[static_cast<std::size_t>(p)]));
  for (int x = 0; x < n; ++x) {
    const auto i = static_cast<std::size_t>(x);
    v = std::max(v, std::hypot(re[i], im[i]) - 1.0);
    v = std::max(v, std::hypot(re[i] - f[i].real(), im[i] - f[i].imag()) - t);
    for (int y = x + 1; y < n; ++y) {
      const auto j = static_cast<std::size_t>(y);
      v = std::max(v, std::abs(re[i] - re[j]) - X.d(x, y));
      v = std::max(v, std::abs(im[i] - im[j]) - X.d(x, y));
    }
  }
  return v;
}

inline void project_disc(double& a, double& b, double ca, double cb, double r) {
  const double da = a - ca, db = b - cb;
  const double len = std::hypot(da, db);
  if (len > r) {
    const double s = r / len;
    a = ca + da * s;
    b = cb + db * s;
  }
}

inline void project_slab(double& u, double& v, double width, bool u_fixed, bool v_fixed) {
  const double diff = u - v;
  const double excess = diff > width ? diff - width : (diff < -width ? diff + width : 0.0);
  if (excess == 0.0 || (u_fixed && v_fixed)) return;
  if (u_fixed) {
    v += excess;
  } else if (v_fixed) {
    u -= excess;
  } else {
    u -= 0.5 * excess;
    v += 0.5 * excess;
  }
}

inline Feasibility complex_feasible(const FiniteMetricSpace& X, const PointSet& F, const LipFunction& f, double t,
                                    std::vector<double>& re, std::vector<double>& im, const BallDistanceOptions& opt,
                                    double accept) {
  const int n = X.size();
  std::vector<char> pinned(static_cast<std::size_t>(n), 0);
  for (int p : F) {
    const auto i = static_cast<std::size_t>(p);
    if (std::abs(f[i]) > t) return Feasibility::infeasible;
    pinned[i] = 1;
    re[i] = im[i] = 0.0;
  }
  double window_start = std::numeric_limits<double>::infinity();
  for (int sweep = 1; sweep <= opt.max_sweeps; ++sweep) {
    for (int x = 0; x < n; ++x)
      for (int y = x + 1; y < n; ++y) {
        const auto i = static_cast<std::size_t>(x), j = static_cast<std::size_t>(y);
        project_slab(re[i], re[j], X.d(x, y), pinned[i], pinned[j]);
        project_slab(im[i], im[j], X.d(x, y), pinned[i], pinned[j]);
      }
    for (int x = 0; x < n; ++x) {
      const auto i = static_cast<std::size_t>(x);
      if (pinned[i]) continue;
      project_disc(re[i], im[i], 0.0, 0.0, 1.0);
      project_disc(re[i], im[i], f[i].real(), f[i].imag(), t);
    }
    const double v = max_violation(X, F, f, t, re, im);
    if (v <= accept) return Feasibility::feasible;
    if (sweep % opt.stall_window == 0) {
      if (v > opt.stall_ratio * window_start) return Feasibility::infeasible;
      window_start = v;
    }
  }
  throw ConvergenceError("ball_distance: cyclic projections hit the sweep cap", 0.0, t);
}

// Largest 1-Lipschitz function below v + slack (0 on F); within slack of v
// when v violates the pairwise constraints by at most 2 slack.
inline std::vector<double> snap_lipschitz(const FiniteMetricSpace& X, const PointSet& F, const std::vector<double>& v,
                                          double slack) {
  const int n = X.size();
  std::vector<double> hi(v.size());
  for (std::size_t x = 0; x < v.size(); ++x) hi[x] = v[x] + slack;
  for (int p : F) hi[static_cast<std::size_t>(p)] = 0.0;
  std::vector<double> out(v.size());
  for (int x = 0; x < n; ++x) {
    double m = hi[static_cast<std::size_t>(x)];
    for (int y = 0; y < n; ++y) m = std::min(m, hi[static_cast<std::size_t>(y)] + X.d(x, y));
    out[static_cast<std::size_t>(x)] = m;
  }
  for (int p : F) out[static_cast<std::size_t>(p)] = 0.0;
  return out;
}

// Exact member of B_F near (re, im); returns its sup distance to f.
inline double snapped_distance(const FiniteMetricSpace& X, const PointSet& F, const LipFunction& f,
                               const std::vector<double>& re, const std::vector<double>& im, double violation) {
  const auto u = snap_lipschitz(X, F, re, violation);
  const auto w = snap_lipschitz(X, F, im, violation);
  double peak = 0.0;
  for (std::size_t x = 0; x < u.size(); ++x) peak = std::max(peak, std::hypot(u[x], w[x]));
  const double scale = peak > 1.0 ? 1.0 / peak : 1.0;
  double d = 0.0;
  for (std::size_t x = 0; x < u.size(); ++x) d = std::max(d, std::abs(f[x] - Complex(scale * u[x], scale * w[x])));
  return d;
}

// dist >= the real distances of Re f and Im f, and >= |f| on F.
inline double complex_lower_bound(const FiniteMetricSpace& X, const PointSet& F, const LipFunction& f, double hi,
                                  double tol) {
  double lo = 0.0;
  for (int p : F) lo = std::max(lo, std::abs(f[static_cast<std::size_t>(p)]));
  for (int part = 0; part < 2; ++part) {
    std::vector<double> g(f.size());
    for (std::size_t x = 0; x < f.size(); ++x) g[x] = part == 0 ? f[x].real() : f[x].imag();
    if (real_feasible(X, F, g, lo)) continue;
    double a = lo, b = hi;
    while (b - a > tol) {
      const double mid = 0.5 * (a + b);
      (real_feasible(X, F, g, mid) ? b : a) = mid;
    }
    lo = std::max(lo, a);
  }
  return lo;
}

inline bool is_real(const LipFunction& f) {
  for (const auto& v : f)
    if (v.imag() != 0.0) return false;
  return true;
}

}  // namespace detail

/// min over h in B_F of ||f - h||_inf, to within opt.tol (the returned value
/// is the feasible end of the final bracket).
inline double ball_distance(const FiniteMetricSpace& X, const PointSet& F_in, const LipFunction& f,
                            const BallDistanceOptions& opt = {}) {
  if (!(opt.tol > 0.0)) throw InputError("ball_distance: tol must be positive");
  if (static_cast<int>(f.size()) != X.size()) throw InputError("ball_distance: size mismatch");
  const PointSet F = normalize_set(X, F_in);
  double hi = sup_norm(std::span<const Complex>(f));  // h = 0 is always in the ball
  double lo = 0.0;
  if (hi == 0.0) return 0.0;
  if (in_vanishing_ideal(F, f)) {
    // f / D(f) lies in B_F.
    const double d = d_norm_comm(X, F, f);
    if (d <= 1.0) return 0.0;
    hi = std::min(hi, hi * (1.0 - 1.0 / d));
    if (hi <= opt.tol) return hi;
  }

  if (detail::is_real(f)) {
    const auto re = real_values(f);
    if (detail::real_feasible(X, F, re, 0.0)) return 0.0;
    while (hi - lo > opt.tol) {
      const double mid = 0.5 * (lo + hi);
      (detail::real_feasible(X, F, re, mid) ? hi : lo) = mid;
    }
    return hi;
  }

  const double accept = opt.tol / 16.0;
  lo = detail::complex_lower_bound(X, F, f, hi, opt.tol / 4.0);
  double best = hi;
  std::vector<double> re(f.size(), 0.0), im(f.size(), 0.0);
  try {
    while (best - lo > opt.tol) {
      const double mid = 0.5 * (lo + best);
      std::vector<double> tr = re, ti = im;
      if (detail::complex_feasible(X, F, f, mid, tr, ti, opt, accept) == detail::Feasibility::feasible) {
        const double v = detail::max_violation(X, F, f, mid, tr, ti);
        best = std::min(best, detail::snapped_distance(X, F, f, tr, ti, std::max(v, 0.0)));
        re = std::move(tr);
        im = std::move(ti);
      } else {
        lo = mid;
      }
    }
  } catch (const ConvergenceError& e) {
    throw ConvergenceError(e.what(), lo, best);
  }
  return best;
}

struct BallHausdorffResult {
  double estimate = 0.0;      // max of the two sampled directed distances
  double directed_12 = 0.0;   // sampled sup_{g in B_F1} dist(g, B_F2)
  double directed_21 = 0.0;
  double set_hausdorff = 0.0;  // Haus(F1, F2)
  double bound = 0.0;    // min{1, 8 eps*}
  int candidates = 0;
  bool passed = false;
};

inline constexpr double kStrictGuard = 1e-6;

/// min{1, 8 eps*} with eps* = sqrt(H)(1 + 1e-6) when H < 1; the balls lie in
/// the sup-norm unit ball and share 0, so 1 always bounds their distance.
inline double ball_hausdorff_bound(double set_hausdorff) {
  if (set_hausdorff >= 1.0) return 1.0;
  return std::min(1.0, 8.0 * std::sqrt(set_hausdorff) * (1.0 + kStrictGuard));
}

/// Extreme-leaning members of B_F: +-u, i u and e^{i pi/4} u with
/// u = min(1, d(., F)), followed by random McShane-built functions.
inline std::vector<LipFunction> ball_candidates(const FiniteMetricSpace& X, const PointSet& F, int count,
                                                std::uint64_t seed) {
  std::vector<LipFunction> out;
  LipFunction u(static_cast<std::size_t>(X.size()));
  for (int x = 0; x < X.size(); ++x) u[static_cast<std::size_t>(x)] = std::min(1.0, distance_to_set(X, x, F));
  const Complex rot = std::polar(1.0, std::acos(-1.0) / 4.0);
  for (Complex c : {Complex(1.0), Complex(-1.0), kI, rot}) {
    if (static_cast<int>(out.size()) >= count) break;
    LipFunction g = u;
    for (auto& v : g) v *= c;
    out.push_back(std::move(g));
  }
  for (int k = 0; static_cast<int>(out.size()) < count; ++k) {
    Rng rng = make_stream(seed, "ball_candidates", static_cast<std::uint64_t>(k));
    out.push_back(random_ball_function(X, F, rng));
  }
  return out;
}

inline BallHausdorffResult ball_hausdorff(const FiniteMetricSpace& X, const PointSet& F1_in, const PointSet& F2_in,
                                          int sample_count, std::uint64_t seed, double tol) {
  const PointSet F1 = normalize_set(X, F1_in);
  const PointSet F2 = normalize_set(X, F2_in);
  if (F1.empty() || F2.empty()) throw InputError("ball_hausdorff: empty subset");
  if (sample_count < 1) throw InputError("ball_hausdorff: sample_count must be >= 1");
  BallHausdorffResult r;
  r.set_hausdorff = hausdorff_sets(X, F1, F2);
  r.bound = ball_hausdorff_bound(r.set_hausdorff);
  BallDistanceOptions opt;
  opt.tol = tol;

  auto directed = [&](const PointSet& from, const PointSet& to, std::uint64_t s) {
    const auto cands = ball_candidates(X, from, sample_count, s);
    std::vector<double> d(cands.size());
    parallel_for(cands.size(), [&](std::size_t k) { d[k] = ball_distance(X, to, cands[k], opt); });
    return d.empty() ? 0.0 : *std::max_element(d.begin(), d.end());
  };
  r.directed_12 = directed(F1, F2, stream_seed(seed, "ball_hausdorff", 0));
  r.directed_21 = directed(F2, F1, stream_seed(seed, "ball_hausdorff", 1));
  r.estimate = std::max(r.directed_12, r.directed_21);
  r.candidates = 2 * sample_count;
  r.passed = r.estimate <= r.bound + tol;
  return r;
}

}  // namespace qmlab
