#pragma once

// Ideals of C(X) for a finite metric space X.
//
// A closed set F ⊆ X gives the ideal I_F of functions vanishing on F. Its
// D-norm is max{ ||f||_inf, L_d(Re f), L_d(Im f) }. The repair construction
// moves a unit-ball element of I_{F_n} into the unit ball of I_F when F_n and
// F are Hausdorff-close, with sup-norm error at most 8 eps.
//
// Compact metric spaces are represented here by finite ones.

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "qmlab/algebra.hpp"
#include "qmlab/error.hpp"
#include "qmlab/random.hpp"

namespace qmlab {

using PointSet = std::vector<int>;

class FiniteMetricSpace {
 public:
  static constexpr double kTriangleTol = 1e-12;

  FiniteMetricSpace() = default;
  FiniteMetricSpace(std::vector<std::string> labels, std::vector<std::vector<double>> dist)
      : labels_(std::move(labels)), dist_(std::move(dist)) {
    const std::size_t n = labels_.size();
    if (n == 0) throw InputError("metric space: no points");
    if (dist_.size() != n) throw InputError("metric space: distance matrix size mismatch");
    for (const auto& row : dist_)
      if (row.size() != n) throw InputError("metric space: distance matrix is not square");
    for (std::size_t i = 0; i < n; ++i) {
      if (dist_[i][i] != 0.0) throw InputError("metric space: nonzero diagonal at " + labels_[i]);
      for (std::size_t j = 0; j < n; ++j) {
        if (dist_[i][j] != dist_[j][i]) throw InputError("metric space: asymmetric distance");
        if (i != j && !(dist_[i][j] > 0.0)) throw InputError("metric space: distinct points at distance 0");
        for (std::size_t k = 0; k < n; ++k)
          if (dist_[i][k] > dist_[i][j] + dist_[j][k] + kTriangleTol)
            throw InputError("metric space: triangle inequality fails");
      }
    }
  }

  /// Points on the real line with |x - y|.
  static FiniteMetricSpace on_line(const std::vector<double>& xs) {
    std::vector<std::string> labels;
    std::vector<std::vector<double>> d(xs.size(), std::vector<double>(xs.size(), 0.0));
    for (std::size_t i = 0; i < xs.size(); ++i) {
      labels.push_back("p" + std::to_string(i));
      for (std::size_t j = 0; j < xs.size(); ++j) d[i][j] = std::abs(xs[i] - xs[j]);
    }
    return {std::move(labels), std::move(d)};
  }

  /// Points in the plane with the Euclidean distance.
  static FiniteMetricSpace planar(const std::vector<std::pair<double, double>>& pts) {
    std::vector<std::string> labels;
    std::vector<std::vector<double>> d(pts.size(), std::vector<double>(pts.size(), 0.0));
    for (std::size_t i = 0; i < pts.size(); ++i) {
      labels.push_back("p" + std::to_string(i));
      for (std::size_t j = 0; j < i; ++j)
        d[i][j] = d[j][i] = std::hypot(pts[i].first - pts[j].first, pts[i].second - pts[j].second);
    }
    return {std::move(labels), std::move(d)};
  }

  int size() const noexcept { return static_cast<int>(labels_.size()); }
  double d(int i, int j) const { return dist_[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]; }
  const std::vector<std::string>& labels() const noexcept { return labels_; }
  const std::vector<std::vector<double>>& dist() const noexcept { return dist_; }

  int index_of(const std::string& label) const {
    auto it = std::find(labels_.begin(), labels_.end(), label);
    if (it == labels_.end()) throw InputError("metric space: unknown point '" + label + "'");
    return static_cast<int>(it - labels_.begin());
  }

  double diameter() const {
    double m = 0.0;
    for (const auto& row : dist_)
      for (double v : row) m = std::max(m, v);
    return m;
  }

 private:
  std::vector<std::string> labels_;
  std::vector<std::vector<double>> dist_;
};

/// Complex values, one per point of the space.
using LipFunction = std::vector<Complex>;

inline PointSet normalize_set(const FiniteMetricSpace& X, PointSet s) {
  std::sort(s.begin(), s.end());
  s.erase(std::unique(s.begin(), s.end()), s.end());
  for (int p : s)
    if (p < 0 || p >= X.size()) throw InputError("point index out of range");
  return s;
}

inline PointSet set_union(const PointSet& a, const PointSet& b) {
  PointSet out;
  std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

inline bool set_contains(const PointSet& s, int p) { return std::binary_search(s.begin(), s.end(), p); }

inline double sup_norm(std::span<const Complex> f) {
  double m = 0.0;
  for (const auto& v : f) m = std::max(m, std::abs(v));
  return m;
}

inline double sup_norm(std::span<const double> f) {
  double m = 0.0;
  for (double v : f) m = std::max(m, std::abs(v));
  return m;
}

inline std::vector<double> real_values(const LipFunction& f) {
  std::vector<double> out;
  for (const auto& v : f) out.push_back(v.real());
  return out;
}

inline std::vector<double> imag_values(const LipFunction& f) {
  std::vector<double> out;
  for (const auto& v : f) out.push_back(v.imag());
  return out;
}

namespace detail {
template <typename T>
double lipschitz_over(const FiniteMetricSpace& X, std::span<const T> f, std::span<const int> pts) {
  double L = 0.0;
  for (std::size_t a = 0; a < pts.size(); ++a)
    for (std::size_t b = a + 1; b < pts.size(); ++b)
      L = std::max(L, std::abs(f[static_cast<std::size_t>(pts[a])] - f[static_cast<std::size_t>(pts[b])]) /
                          X.d(pts[a], pts[b]));
  return L;
}

inline std::vector<int> all_points(const FiniteMetricSpace& X) {
  std::vector<int> v(static_cast<std::size_t>(X.size()));
  for (int i = 0; i < X.size(); ++i) v[static_cast<std::size_t>(i)] = i;
  return v;
}
}  // namespace detail

/// L_d(f) = max over pairs x != y of |f(x) - f(y)| / d(x, y).
inline double lipschitz_seminorm(const FiniteMetricSpace& X, std::span<const double> f) {
  if (static_cast<int>(f.size()) != X.size()) throw InputError("lipschitz_seminorm: size mismatch");
  const auto pts = detail::all_points(X);
  return detail::lipschitz_over<double>(X, f, pts);
}

inline double lipschitz_seminorm(const FiniteMetricSpace& X, std::span<const Complex> f) {
  if (static_cast<int>(f.size()) != X.size()) throw InputError("lipschitz_seminorm: size mismatch");
  const auto pts = detail::all_points(X);
  return detail::lipschitz_over<Complex>(X, f, pts);
}

inline constexpr double kVanishTol = 1e-12;

/// f ∈ I_F iff |f(x)| <= 1e-12 on F.
inline bool in_vanishing_ideal(const PointSet& F, std::span<const Complex> f) {
  for (int p : F)
    if (std::abs(f[static_cast<std::size_t>(p)]) > kVanishTol) return false;
  return true;
}

/// D(f) = max{ ||f||, L_d(Re f), L_d(Im f) } for f ∈ I_F.
inline double d_norm_comm(const FiniteMetricSpace& X, const PointSet& F, const LipFunction& f) {
  if (static_cast<int>(f.size()) != X.size()) throw InputError("d_norm_comm: size mismatch");
  if (!in_vanishing_ideal(F, f)) throw InputError("d_norm_comm: function does not vanish on F");
  const auto re = real_values(f);
  const auto im = imag_values(f);
  return std::max({sup_norm(std::span<const Complex>(f)), lipschitz_seminorm(X, re), lipschitz_seminorm(X, im)});
}

inline double distance_to_set(const FiniteMetricSpace& X, int x, const PointSet& S) {
  double m = std::numeric_limits<double>::infinity();
  for (int y : S) m = std::min(m, X.d(x, y));
  return m;
}

/// Hausdorff distance between nonempty subsets; empty input is rejected.
inline double hausdorff_sets(const FiniteMetricSpace& X, const PointSet& F, const PointSet& G) {
  if (F.empty() || G.empty()) throw InputError("hausdorff_sets: empty set");
  double h = 0.0;
  for (int x : F) h = std::max(h, distance_to_set(X, x, G));
  for (int x : G) h = std::max(h, distance_to_set(X, x, F));
  return h;
}

inline constexpr double kExtensionTol = 1e-8;

/// McShane extension g(x) = clamp(min_{y ∈ S} f(y) + L d(x, y), lo, hi).
/// Values on S are kept exactly; L_d(g) <= L and lo <= g <= hi.
inline std::vector<double> mcshane_extend(const FiniteMetricSpace& X, const PointSet& S,
                                          std::span<const double> values_on_S, double L, double lo, double hi) {
  if (S.empty()) throw InputError("mcshane_extend: empty domain");
  if (values_on_S.size() != S.size()) throw InputError("mcshane_extend: one value per domain point required");
  if (!(L >= 0.0)) throw InputError("mcshane_extend: negative Lipschitz bound");
  for (std::size_t a = 0; a < S.size(); ++a) {
    if (values_on_S[a] < lo || values_on_S[a] > hi) throw InputError("mcshane_extend: values outside the clamp range");
    for (std::size_t b = a + 1; b < S.size(); ++b) {
      const double slope = std::abs(values_on_S[a] - values_on_S[b]) / X.d(S[a], S[b]);
      if (slope > L * (1.0 + kExtensionTol) + kExtensionTol)
        throw InputError("mcshane_extend: data has Lipschitz constant " + std::to_string(slope) + " > " +
                         std::to_string(L));
    }
  }
  std::vector<double> g(static_cast<std::size_t>(X.size()));
  for (int x = 0; x < X.size(); ++x) {
    double m = std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < S.size(); ++a) m = std::min(m, values_on_S[a] + L * X.d(x, S[a]));
    g[static_cast<std::size_t>(x)] = std::clamp(m, lo, hi);
  }
  for (std::size_t a = 0; a < S.size(); ++a) g[static_cast<std::size_t>(S[a])] = values_on_S[a];
  return g;
}

struct RepairCertificate {
  double vanish_max = 0.0;   // max |h| on F ∪ F_n
  double lip_re = 0.0;       // L_d(Re h)
  double lip_im = 0.0;       // L_d(Im h)
  double sup_norm = 0.0;     // ||h||_inf
  double distance = 0.0;     // ||f - h||_inf
  double distance_bound = 0.0;  // 8 eps
  bool vanishes = false;
  bool lip_re_ok = false;
  bool lip_im_ok = false;
  bool sup_norm_ok = false;
  bool distance_ok = false;

  bool passed() const { return vanishes && lip_re_ok && lip_im_ok && sup_norm_ok && distance_ok; }
  int failures() const { return !vanishes + !lip_re_ok + !lip_im_ok + !sup_norm_ok + !distance_ok; }
};

struct RepairResult {
  LipFunction h;
  double eps = 0.0;
  double hausdorff = 0.0;
  std::vector<int> near_set;  // G_n = { x : d(x, F_n ∪ F) < eps }
  RepairCertificate certificate;
  std::string note;
};

inline constexpr double kRepairTol = 1e-8;
inline constexpr double kUnitBallTol = 1e-9;
inline constexpr double kMaxEps = 1.0 - 1e-9;

/// Moves f from the unit ball of I_{F_n} into the unit ball of I_F:
///   G_n = { x : d(x, F_n ∪ F) < eps },
///   f_1 = Re f / (1 + eps) on G_n^c and 0 on F ∪ F_n (f_2 likewise with Im f),
///   g_i = McShane extension of f_i with constant 1, clamped to +-||f_i||,
///   h = g_1 + i g_2.
/// Requires Haus(F_n, F) < eps^2 and 0 < eps < 1.
inline RepairResult repair(const FiniteMetricSpace& X, PointSet Fn, PointSet F, const LipFunction& f, double eps) {
  Fn = normalize_set(X, std::move(Fn));
  F = normalize_set(X, std::move(F));
  if (static_cast<int>(f.size()) != X.size()) throw InputError("repair: function size mismatch");
  if (!(eps > 0.0)) throw InputError("repair: eps must be positive");
  RepairResult r;
  if (eps >= 1.0) {
    r.note = "eps " + std::to_string(eps) + " clamped to 1 - 1e-9";
    eps = kMaxEps;
  }
  r.eps = eps;
  const double Df = d_norm_comm(X, Fn, f);
  if (Df > 1.0 + kUnitBallTol) throw InputError("repair: D(f) = " + std::to_string(Df) + " exceeds 1");
  r.hausdorff = hausdorff_sets(X, Fn, F);
  if (!(r.hausdorff < eps * eps))
    throw InputError("repair: Hausdorff distance " + std::to_string(r.hausdorff) + " is not below eps^2 = " +
                     std::to_string(eps * eps));

  const PointSet base = set_union(F, Fn);
  PointSet domain = base;
  for (int x = 0; x < X.size(); ++x) {
    if (distance_to_set(X, x, base) < eps) {
      r.near_set.push_back(x);
    } else {
      domain.push_back(x);
    }
  }
  std::sort(domain.begin(), domain.end());

  std::vector<double> f1, f2;
  for (int x : domain) {
    const bool zero = set_contains(base, x);
    const Complex v = f[static_cast<std::size_t>(x)];
    f1.push_back(zero ? 0.0 : v.real() / (1.0 + eps));
    f2.push_back(zero ? 0.0 : v.imag() / (1.0 + eps));
  }
  const double c1 = sup_norm(std::span<const double>(f1));
  const double c2 = sup_norm(std::span<const double>(f2));
  const auto g1 = mcshane_extend(X, domain, f1, 1.0, -c1, c1);
  const auto g2 = mcshane_extend(X, domain, f2, 1.0, -c2, c2);

  r.h.resize(f.size());
  for (std::size_t x = 0; x < f.size(); ++x) r.h[x] = Complex(g1[x], g2[x]);

  RepairCertificate& c = r.certificate;
  for (int x : base) c.vanish_max = std::max(c.vanish_max, std::abs(r.h[static_cast<std::size_t>(x)]));
  c.lip_re = lipschitz_seminorm(X, g1);
  c.lip_im = lipschitz_seminorm(X, g2);
  c.sup_norm = sup_norm(std::span<const Complex>(r.h));
  for (std::size_t x = 0; x < f.size(); ++x) c.distance = std::max(c.distance, std::abs(f[x] - r.h[x]));
  c.distance_bound = 8.0 * eps;
  c.vanishes = c.vanish_max <= kVanishTol;
  c.lip_re_ok = c.lip_re <= 1.0 + kRepairTol;
  c.lip_im_ok = c.lip_im <= 1.0 + kRepairTol;
  c.sup_norm_ok = c.sup_norm <= 1.0 + kRepairTol;
  c.distance_ok = c.distance <= c.distance_bound;
  return r;
}

// ---- sampling helpers shared by the harness and the tests ----

/// Random planar space with 2..max_points points. Half of the draws are
/// clustered so that nearby subsets with small Hausdorff distance exist.
inline FiniteMetricSpace random_space(Rng& rng, int max_points) {
  const int n = uniform_int(rng, 2, std::max(2, max_points));
  std::vector<std::pair<double, double>> pts;
  const bool clustered = uniform_int(rng, 0, 1) == 1;
  while (static_cast<int>(pts.size()) < n) {
    std::pair<double, double> p{uniform(rng), uniform(rng)};
    if (clustered && !pts.empty() && uniform_int(rng, 0, 1) == 1) {
      const auto& anchor = pts[static_cast<std::size_t>(uniform_int(rng, 0, static_cast<int>(pts.size()) - 1))];
      const double r = 0.02 * uniform(rng) + 1e-3;
      p = {anchor.first + r * (2 * uniform(rng) - 1), anchor.second + r * (2 * uniform(rng) - 1)};
    }
    bool distinct = true;
    for (const auto& q : pts) distinct = distinct && std::hypot(p.first - q.first, p.second - q.second) > 1e-6;
    if (distinct) pts.push_back(p);
  }
  return FiniteMetricSpace::planar(pts);
}

inline PointSet random_subset(Rng& rng, int size, bool nonempty = true) {
  PointSet s;
  for (int i = 0; i < size; ++i)
    if (uniform_int(rng, 0, 2) == 0) s.push_back(i);
  if (nonempty && s.empty()) s.push_back(uniform_int(rng, 0, size - 1));
  return s;
}

/// Random real 1-Lipschitz function with values in [-1, 1] vanishing on F.
inline std::vector<double> random_lipschitz_real(const FiniteMetricSpace& X, const PointSet& F, Rng& rng) {
  PointSet anchors = F;
  std::vector<double> vals(F.size(), 0.0);
  for (int x = 0; x < X.size(); ++x) {
    if (set_contains(F, x) || uniform_int(rng, 0, 1) == 0) continue;
    anchors.push_back(x);
    vals.push_back(uniform(rng, -1.0, 1.0));
  }
  if (anchors.empty()) {
    anchors.push_back(0);
    vals.push_back(uniform(rng, -1.0, 1.0));
  }
  double L = 0.0;
  for (std::size_t a = 0; a < anchors.size(); ++a)
    for (std::size_t b = a + 1; b < anchors.size(); ++b)
      L = std::max(L, std::abs(vals[a] - vals[b]) / X.d(anchors[a], anchors[b]));
  if (L > 1.0)
    for (auto& v : vals) v /= L;
  // Keep anchor order sorted for mcshane_extend's domain.
  std::vector<std::size_t> order(anchors.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return anchors[a] < anchors[b]; });
  PointSet dom;
  std::vector<double> dv;
  for (std::size_t i : order) {
    dom.push_back(anchors[i]);
    dv.push_back(vals[i]);
  }
  return mcshane_extend(X, dom, dv, 1.0, -1.0, 1.0);
}

/// Random element of the unit D-ball of I_F. Every fourth draw is real.
inline LipFunction random_ball_function(const FiniteMetricSpace& X, const PointSet& F, Rng& rng) {
  const auto re = random_lipschitz_real(X, F, rng);
  const bool real_only = uniform_int(rng, 0, 3) == 0;
  const auto im = real_only ? std::vector<double>(re.size(), 0.0) : random_lipschitz_real(X, F, rng);
  LipFunction f(re.size());
  for (std::size_t i = 0; i < f.size(); ++i) f[i] = Complex(re[i], im[i]);
  const double s = sup_norm(std::span<const Complex>(f));
  if (s > 1.0)
    for (auto& v : f) v /= s;
  for (int p : F) f[static_cast<std::size_t>(p)] = 0.0;
  return f;
}

}  // namespace qmlab
