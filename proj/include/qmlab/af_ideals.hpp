#pragma once

// Ideals of a truncated AF tower and the metrized bundle built on them.
//
// An ideal is fixed by the set of top-level blocks it contains. Its slice at
// level n is the set S_n of level-n blocks all of whose images land in
// S_{n+1}; I_n = I ∩ A_n is the sum of the blocks in S_n, with unit 1_n.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "qmlab/af_metric.hpp"
#include "qmlab/algebra.hpp"
#include "qmlab/parallel.hpp"
#include "qmlab/random.hpp"
#include "qmlab/tower.hpp"

namespace qmlab {

inline constexpr double kMembershipTol = 1e-12;

class IdealSupport {
 public:
  const Tower& tower() const noexcept { return tower_; }
  const std::vector<int>& top_support() const noexcept { return top_support_; }

  bool has(int n, int block) const {
    return in_.at(static_cast<std::size_t>(n)).at(static_cast<std::size_t>(block));
  }

  /// Sorted block indices of S_n.
  std::vector<int> blocks(int n) const {
    std::vector<int> out;
    const auto& row = in_.at(static_cast<std::size_t>(n));
    for (std::size_t i = 0; i < row.size(); ++i)
      if (row[i]) out.push_back(static_cast<int>(i));
    return out;
  }

  bool same_slice(const IdealSupport& o, int n) const {
    return in_.at(static_cast<std::size_t>(n)) == o.in_.at(static_cast<std::size_t>(n));
  }

  /// i ∈ S_n and m[j][i] > 0 imply j ∈ S_{n+1}. Checked directly from the
  /// diagram, independently of the derivation rule.
  bool edge_closed() const {
    for (int n = 0; n < tower_.top(); ++n)
      for (int i = 0; i < tower_.shape(n).block_count(); ++i)
        for (int j = 0; j < tower_.shape(n + 1).block_count(); ++j)
          if (has(n, i) && tower_.mult(n, j, i) > 0 && !has(n + 1, j)) return false;
    return true;
  }

  /// a ∈ I_n iff its blocks outside S_n vanish (norm <= tol).
  bool contains(int n, const Element& a, double tol = kMembershipTol) const {
    if (!(a.shape() == tower_.shape(n))) throw InputError("ideal membership: element not at level " + std::to_string(n));
    for (int i = 0; i < a.shape().block_count(); ++i)
      if (!has(n, i) && spectral_norm(a.block(i)) > tol) return false;
    return true;
  }

  bool contains_top(const Element& a, double tol = kMembershipTol) const { return contains(tower_.top(), a, tol); }

  /// 1_n, the unit of I_n, at level n. Zero when S_n is empty.
  Element unit(int n) const { return Element::central_projection(tower_.shape(n), blocks(n)); }
  /// 1_n lifted to the top level.
  const Element& unit_top(int n) const { return units_top_.at(static_cast<std::size_t>(n)); }

  bool is_zero() const { return top_support_.empty(); }

  friend IdealSupport derive_supports(const Tower& t, std::vector<int> top_support);

 private:
  IdealSupport(Tower t) : tower_(std::move(t)) {}

  Tower tower_;
  std::vector<int> top_support_;
  std::vector<std::vector<bool>> in_;
  std::vector<Element> units_top_;
};

/// S_M = top_support; S_n = { i : every j with m[j][i] > 0 lies in S_{n+1} }.
inline IdealSupport derive_supports(const Tower& t, std::vector<int> top_support) {
  std::sort(top_support.begin(), top_support.end());
  top_support.erase(std::unique(top_support.begin(), top_support.end()), top_support.end());
  const int M = t.top();
  for (int i : top_support)
    if (i < 0 || i >= t.shape(M).block_count())
      throw InputError("ideal support: top block " + std::to_string(i) + " does not exist");

  IdealSupport I(t);
  I.top_support_ = top_support;
  I.in_.resize(static_cast<std::size_t>(M) + 1);
  auto& top = I.in_.back();
  top.assign(static_cast<std::size_t>(t.shape(M).block_count()), false);
  for (int i : top_support) top[static_cast<std::size_t>(i)] = true;
  for (int n = M - 1; n >= 0; --n) {
    auto& row = I.in_[static_cast<std::size_t>(n)];
    const auto& above = I.in_[static_cast<std::size_t>(n) + 1];
    row.assign(static_cast<std::size_t>(t.shape(n).block_count()), false);
    for (int i = 0; i < t.shape(n).block_count(); ++i) {
      bool all = true;
      for (int j = 0; j < t.shape(n + 1).block_count(); ++j)
        if (t.mult(n, j, i) > 0 && !above[static_cast<std::size_t>(j)]) all = false;
      row[static_cast<std::size_t>(i)] = all;
    }
  }
  for (int n = 0; n <= M; ++n) I.units_top_.push_back(t.lift_to_top(n, I.unit(n)));
  return I;
}

inline Element unit_projection(const IdealSupport& I, int n) { return I.unit(n); }

struct DNormTerms {
  double lseminorm = 0.0;
  double norm = 0.0;
  double ideal_term = 0.0;  // max_n ||w - w 1_n|| / beta(n)
  double value() const { return std::max({lseminorm, norm, ideal_term}); }
};

inline DNormTerms d_norm_terms(const BetaSequence& beta, const IdealSupport& I, const Element& omega) {
  if (!I.contains_top(omega)) throw InputError("d_norm_af: element is not in the ideal");
  const Tower& t = I.tower();
  DNormTerms d;
  d.lseminorm = l_seminorm(t, beta, omega);
  d.norm = op_norm(omega);
  for (int n = 0; n < t.top(); ++n)
    d.ideal_term = std::max(d.ideal_term, op_norm(omega - omega * I.unit_top(n)) / beta(n));
  return d;
}

/// D_I(w) = max{ L_beta(w), ||w||, max_n ||w - w 1_n|| / beta(n) }.
inline double d_norm_af(const BetaSequence& beta, const IdealSupport& I, const Element& omega) {
  return d_norm_terms(beta, I, omega).value();
}

inline constexpr double kDivisionGuard = 1e-14;

/// Elements of B = { w ∈ I : D(w) <= 1 } supported on the slice I_level,
/// embedded at the top. Slot 0 is 0, slot 1 the rescaled 1_level; the rest are
/// random (Gaussian, self-adjoint or rank one, cycling) and rescaled to D = 1.
/// Reproducible per seed.
inline std::vector<Element> ball_sample(const BetaSequence& beta, const IdealSupport& I, int level, int count,
                                        std::uint64_t seed) {
  if (count < 1) throw InputError("ball_sample: count must be >= 1");
  const Tower& t = I.tower();
  if (level < 0 || level > t.top()) throw InputError("ball_sample: invalid level");
  const std::vector<int> support = I.blocks(level);
  std::vector<Element> out{Element::zero(t.top_shape())};
  if (support.empty() || count == 1) return out;

  auto normalize = [&](const Element& w) {
    const double d = d_norm_af(beta, I, w);
    return w / std::max(d, kDivisionGuard);
  };
  out.push_back(normalize(I.unit_top(level)));

  const std::size_t random_count = static_cast<std::size_t>(std::max(0, count - 2));
  std::vector<Element> drawn(random_count);
  const std::string suite = "ball_sample/level" + std::to_string(level);
  parallel_for(random_count, [&](std::size_t idx) {
    Rng rng = make_stream(seed, suite, idx);
    const BlockShape& shape = t.shape(level);
    Element a = random_element(shape, rng);
    if (idx % 3 == 1) a = real_part(a);
    if (idx % 3 == 2) {
      const int blk = support[static_cast<std::size_t>(uniform_int(rng, 0, static_cast<int>(support.size()) - 1))];
      const Block col = a.block(blk).col(0);
      const Block row = a.block(blk).col(1 % shape.dim(blk));
      a = Element::zero(shape);
      a.block(blk) = col * row.adjoint();
    }
    for (int i = 0; i < shape.block_count(); ++i)
      if (!I.has(level, i)) a.block(i).setZero();
    drawn[idx] = normalize(t.lift_to_top(level, a));
  });
  for (auto& e : drawn) out.push_back(std::move(e));
  return out;
}

struct RecoveryCertificate {
  int level = 0;
  double beta_n = 0.0;
  double x_n = 0.0;
  Element candidate;          // E_n(b 1_n) / x_n, at the top level
  double lifted_d = 0.0;      // D(E_n(b 1_n))
  double candidate_d = 0.0;   // D(candidate)
  double residual = 0.0;      // ||b - E_n(b) 1_n||
  double distance = 0.0;      // ||b - candidate||
  double distance_bound = 0.0;  // (x_n - 1) + 2 beta(n)
  double module_defect = 0.0;   // ||E_n(b 1_n) - E_n(b) 1_n||
  bool lifted_ok = false;
  bool candidate_ok = false;
  bool residual_ok = false;
  bool distance_ok = false;
  bool module_ok = false;
  bool in_slice = false;

  bool passed() const { return lifted_ok && candidate_ok && residual_ok && distance_ok && module_ok && in_slice; }
  int failures() const {
    return !lifted_ok + !candidate_ok + !residual_ok + !distance_ok + !module_ok + !in_slice;
  }
};

inline constexpr double kBallTol = 1e-9;
inline constexpr double kCertificateTol = 1e-8;

/// Recovers a point of B_n near b ∈ B: c = E_n(b 1_n) / x_n, and checks
///   D(E_n(b 1_n)) <= x_n,  D(c) <= 1,  ||b - E_n(b) 1_n|| <= 2 beta(n),
///   ||b - c|| <= (x_n - 1) + 2 beta(n),
/// plus the module identity E_n(b 1_n) = E_n(b) 1_n ∈ I_n.
inline RecoveryCertificate recover_certificate(const BetaSequence& beta, const IdealSupport& I, const Element& b,
                                               int n) {
  const Tower& t = I.tower();
  if (n < 1 || n > t.top()) throw InputError("recover_certificate: level must satisfy 1 <= n <= M");
  const double db = d_norm_af(beta, I, b);
  if (db > 1.0 + kBallTol) throw InputError("recover_certificate: D(b) = " + std::to_string(db) + " exceeds 1");

  RecoveryCertificate c;
  c.level = n;
  c.beta_n = beta(n);
  c.x_n = xn_factors(beta, n).x;
  c.distance_bound = (c.x_n - 1.0) + 2.0 * c.beta_n;

  const Element& unit = I.unit_top(n);
  const Element lifted = t.expectation_top(n, b * unit);
  const Element module_form = t.expectation_top(n, b) * unit;
  c.module_defect = distance(lifted, module_form);
  c.module_ok = c.module_defect <= 1e-10;
  c.in_slice = I.contains(n, t.expectation(n, b * unit), 1e-10);

  c.lifted_d = d_norm_af(beta, I, lifted);
  c.candidate = lifted / c.x_n;
  c.candidate_d = d_norm_af(beta, I, c.candidate);
  c.residual = distance(b, module_form);
  c.distance = distance(b, c.candidate);

  c.lifted_ok = c.lifted_d <= c.x_n + kCertificateTol;
  c.candidate_ok = c.candidate_d <= 1.0 + kCertificateTol;
  c.residual_ok = c.residual <= 2.0 * c.beta_n + kCertificateTol;
  c.distance_ok = c.distance <= c.distance_bound + kCertificateTol;
  return c;
}

/// max over sampled xi of ||w* xi - v* xi||; a lower estimate of k_Omega(w, v).
inline double k_modular_estimate(const Element& omega, const Element& nu, const std::vector<Element>& ball) {
  if (ball.empty()) throw InputError("k_modular_estimate: empty sample");
  const Element diff = (omega - nu).adjoint();
  double best = 0.0;
  for (const auto& xi : ball) best = std::max(best, op_norm(diff * xi));
  return best;
}

struct BridgeReport {
  int level = 0;
  double height = 0.0;
  double basic_reach = 0.0;
  double modular_reach = 0.0;
  double imprint_estimate = 0.0;
  double imprint_bound = 0.0;
  double lambda_bound = 0.0;  // max{beta(n), x_n - 1}
  double lambda_chain = 0.0;  // max{height, basic_reach, modular_reach + imprint_bound}
  int certificate_failures = 0;
  std::vector<std::string> failures;

  bool passed() const { return failures.empty(); }
};

inline constexpr double kImprintTol = 1e-6;

namespace detail {
// ||X||_op is at least the largest column or row norm of any block.
inline double op_norm_lower_bound(const Element& x) {
  double lb = 0.0;
  for (const auto& b : x.blocks()) {
    lb = std::max(lb, b.colwise().norm().maxCoeff());
    lb = std::max(lb, b.rowwise().norm().maxCoeff());
  }
  return lb;
}
}  // namespace detail

/// Sampled directed Hausdorff distance (operator norm) from the top ball to
/// B_n. The B_n sample is augmented with the recovery candidates of the top
/// samples that pass their certificate; every point used lies in B_n.
inline BridgeReport imprint_estimate(const BetaSequence& beta, const IdealSupport& I, int n,
                                     const std::vector<Element>& samples_n, const std::vector<Element>& samples_top) {
  if (samples_n.empty() || samples_top.empty()) throw InputError("imprint_estimate: empty samples");
  const XnFactors xf = xn_factors(beta, n);
  BridgeReport r;
  r.level = n;
  r.height = 0.0;
  r.basic_reach = beta(n);
  r.modular_reach = 0.0;
  r.imprint_bound = (xf.x - 1.0) + 2.0 * beta(n);
  r.lambda_bound = xf.bound;
  r.lambda_chain = std::max({r.height, r.basic_reach, r.modular_reach + r.imprint_bound});

  std::vector<RecoveryCertificate> certs(samples_top.size());
  parallel_for(samples_top.size(), [&](std::size_t k) { certs[k] = recover_certificate(beta, I, samples_top[k], n); });

  std::vector<const Element*> inner;
  for (const auto& e : samples_n) inner.push_back(&e);
  for (const auto& c : certs) {
    if (c.passed()) inner.push_back(&c.candidate);
    else ++r.certificate_failures;
  }

  // max over b of min over c. A b whose running min drops to the running max
  // cannot change the result, so its search stops early; the b attaining the
  // max never stops early, which keeps the value exact and order independent.
  std::atomic<double> running_max{0.0};
  auto raise = [&running_max](double v) {
    double cur = running_max.load();
    while (v > cur && !running_max.compare_exchange_weak(cur, v)) {
    }
  };
  parallel_for(samples_top.size(), [&](std::size_t k) {
    const Element& b = samples_top[k];
    double best = certs[k].passed() ? certs[k].distance : std::numeric_limits<double>::infinity();
    for (const Element* c : inner) {
      if (best <= running_max.load()) return;
      const Element diff = b - *c;
      if (detail::op_norm_lower_bound(diff) >= best) continue;
      best = std::min(best, op_norm(diff));
    }
    raise(best);
  });
  r.imprint_estimate = running_max.load();

  if (r.certificate_failures > 0)
    r.failures.push_back(std::to_string(r.certificate_failures) + " recovery certificates failed");
  if (r.imprint_estimate > r.imprint_bound + kImprintTol)
    r.failures.push_back("sampled imprint " + std::to_string(r.imprint_estimate) + " exceeds bound " +
                         std::to_string(r.imprint_bound));
  return r;
}

/// Surrogate distance 2^-(first level where the slices differ), 0 if none.
/// Labelled a surrogate: it encodes level-wise eventual agreement only.
inline double fell_surrogate(const IdealSupport& I, const IdealSupport& J) {
  if (!I.tower().same_diagram(J.tower())) throw InputError("fell_surrogate: ideals live on different towers");
  for (int n = 0; n <= I.tower().top(); ++n)
    if (!I.same_slice(J, n)) return std::ldexp(1.0, -n);
  return 0.0;
}

struct FellRow {
  int k = 0;
  std::optional<int> agreement_level;  // N_k; empty when the slices differ already at level 0
  std::optional<double> beta_n;
  std::optional<double> x_n;
  std::optional<double> bound;         // 2 max{beta(N_k), x_{N_k} - 1}
  double surrogate_distance = 0.0;
  std::string note;
};

inline constexpr const char* kNoAgreementNote = "no agreement level >= 1";

/// One row per sequence index: N_k is the largest N with I^k_n = I^inf_n for
/// every n <= N, and the bound 2 max{beta(N), x_N - 1} follows from the
/// triangle inequality with a vanishing middle term.
inline std::vector<FellRow> fell_to_propinquity_table(const BetaSequence& beta,
                                                      const std::vector<IdealSupport>& sequence,
                                                      const IdealSupport& limit) {
  std::vector<FellRow> rows;
  const int M = limit.tower().top();
  for (std::size_t k = 0; k < sequence.size(); ++k) {
    const IdealSupport& I = sequence[k];
    if (!I.tower().same_diagram(limit.tower()))
      throw InputError("fell_to_propinquity_table: ideal " + std::to_string(k) + " is on another tower");
    FellRow row;
    row.k = static_cast<int>(k);
    row.surrogate_distance = fell_surrogate(I, limit);
    int agree = -1;
    while (agree < M && I.same_slice(limit, agree + 1)) ++agree;
    if (agree >= 0) row.agreement_level = agree;
    if (agree >= 1) {
      const XnFactors xf = xn_factors(beta, agree);
      row.beta_n = beta(agree);
      row.x_n = xf.x;
      row.bound = 2.0 * xf.bound;
    } else {
      row.note = kNoAgreementNote;
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace qmlab
