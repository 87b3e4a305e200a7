#pragma once

// Truncated AF towers A_0 ⊂ A_1 ⊂ ... ⊂ A_M given by Bratteli data.
//
// Level n is a multi-matrix algebra with block sizes levels[n]. The
// multiplicity matrix mults[n][j][i] says how many copies of level-n block i
// sit inside level-(n+1) block j. Inside block j the copies are stacked
// diagonally in lexicographic order of (source block i, copy index).
//
// The top level M stands in for the whole algebra A. Its faithful tracial
// state is given by top_trace; lower levels get the restricted traces.

#include <cmath>
#include <memory>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "qmlab/algebra.hpp"

namespace qmlab {

struct TowerSpec {
  std::vector<std::vector<int>> levels;
  std::vector<std::vector<std::vector<int>>> mults;
  std::vector<double> top_trace;

  friend bool operator==(const TowerSpec&, const TowerSpec&) = default;
};

struct ValidationCheck {
  std::string name;
  bool passed = true;
  std::string detail;
};

struct ValidationReport {
  std::vector<ValidationCheck> checks;

  bool ok() const {
    for (const auto& c : checks)
      if (!c.passed) return false;
    return true;
  }
  std::string failures() const {
    std::string out;
    for (const auto& c : checks)
      if (!c.passed) out += c.name + ": " + c.detail + "\n";
    return out;
  }
};

namespace detail {
inline void add_check(ValidationReport& r, std::string name, bool ok, std::string detail = {}) {
  r.checks.push_back({std::move(name), ok, ok ? std::string{} : std::move(detail)});
}
}  // namespace detail

inline ValidationReport validate_tower(const TowerSpec& t) {
  ValidationReport r;
  if (t.levels.empty()) {
    detail::add_check(r, "levels_nonempty", false, "tower has no levels");
    return r;
  }
  detail::add_check(r, "levels_nonempty", true);

  bool dims_ok = true;
  std::string dims_detail;
  for (std::size_t n = 0; n < t.levels.size() && dims_ok; ++n) {
    if (t.levels[n].empty()) {
      dims_ok = false;
      dims_detail = "level " + std::to_string(n) + " has no blocks";
    }
    for (std::size_t i = 0; i < t.levels[n].size() && dims_ok; ++i)
      if (t.levels[n][i] < 1) {
        dims_ok = false;
        dims_detail = "level " + std::to_string(n) + " block " + std::to_string(i) + " has size < 1";
      }
  }
  detail::add_check(r, "block_dims_positive", dims_ok, dims_detail);

  const bool scalars = t.levels[0] == std::vector<int>{1};
  detail::add_check(r, "level0_scalars", scalars, "A_0 must be scalars (level 0 shape must be [1])");

  const std::size_t top = t.levels.size() - 1;
  const bool mult_count = t.mults.size() == top;
  detail::add_check(r, "mults_count", mult_count,
                    "expected " + std::to_string(top) + " multiplicity matrices, got " +
                        std::to_string(t.mults.size()));

  bool shape_ok = mult_count && dims_ok;
  bool nonneg = true, unital = true, reach = true;
  std::string shape_detail, nonneg_detail, unital_detail, reach_detail;
  if (mult_count) {
    for (std::size_t n = 0; n < top; ++n) {
      const auto& m = t.mults[n];
      const std::size_t rows = t.levels[n + 1].size(), cols = t.levels[n].size();
      bool level_shape = m.size() == rows;
      for (const auto& row : m) level_shape = level_shape && row.size() == cols;
      if (!level_shape) {
        if (shape_ok)
          shape_detail = "level " + std::to_string(n) + ": matrix must be " + std::to_string(rows) + "x" +
                         std::to_string(cols);
        shape_ok = false;
        continue;
      }
      for (std::size_t j = 0; j < rows; ++j) {
        long long total = 0;
        for (std::size_t i = 0; i < cols; ++i) {
          if (m[j][i] < 0 && nonneg) {
            nonneg = false;
            nonneg_detail = "level " + std::to_string(n) + " entry [" + std::to_string(j) + "][" +
                            std::to_string(i) + "] is negative";
          }
          total += static_cast<long long>(m[j][i]) * t.levels[n][i];
        }
        if (total != t.levels[n + 1][j] && unital) {
          unital = false;
          unital_detail = "unitality fails at level " + std::to_string(n + 1) + " block " + std::to_string(j) +
                          ": " + std::to_string(t.levels[n + 1][j]) + " != " + std::to_string(total);
        }
      }
      for (std::size_t i = 0; i < cols; ++i) {
        bool hit = false;
        for (std::size_t j = 0; j < rows; ++j) hit = hit || m[j][i] > 0;
        if (!hit && reach) {
          reach = false;
          reach_detail = "level " + std::to_string(n) + " block " + std::to_string(i) + " does not reach level " +
                         std::to_string(n + 1);
        }
      }
    }
  }
  detail::add_check(r, "mults_shape", shape_ok, shape_detail);
  detail::add_check(r, "mults_nonnegative", nonneg, nonneg_detail);
  detail::add_check(r, "unitality", unital, unital_detail);
  detail::add_check(r, "no_zero_column", reach, reach_detail);

  const auto& top_dims = t.levels[top];
  const bool trace_size = t.top_trace.size() == top_dims.size();
  detail::add_check(r, "top_trace_size", trace_size, "need one weight per top-level block");
  bool positive = true;
  double total = 0.0;
  for (std::size_t i = 0; i < t.top_trace.size(); ++i) {
    positive = positive && t.top_trace[i] > 0.0;
    if (trace_size) total += t.top_trace[i] * top_dims[i];
  }
  detail::add_check(r, "top_trace_positive", positive, "top trace weights must be > 0");
  detail::add_check(r, "top_trace_normalized", trace_size && std::abs(total - 1.0) <= TraceWeights::kNormTol,
                    "sum of weight*dim is " + std::to_string(total) + ", must be 1");
  return r;
}

/// Validated, immutable tower. Copies share the lazily built projection cache.
class Tower {
 public:
  explicit Tower(TowerSpec spec) : impl_(std::make_shared<Impl>()) {
    auto report = validate_tower(spec);
    if (!report.ok()) throw InputError("invalid tower:\n" + report.failures());
    impl_->spec = std::move(spec);
    const auto& s = impl_->spec;
    for (const auto& dims : s.levels) impl_->shapes.emplace_back(dims);

    // Restrict the trace down the tower: w_n[i] = sum_j m[j][i] * w_{n+1}[j].
    std::vector<std::vector<double>> w(s.levels.size());
    w.back() = s.top_trace;
    for (int n = top() - 1; n >= 0; --n) {
      const auto& m = s.mults[static_cast<std::size_t>(n)];
      auto& wn = w[static_cast<std::size_t>(n)];
      wn.assign(s.levels[static_cast<std::size_t>(n)].size(), 0.0);
      for (std::size_t j = 0; j < m.size(); ++j)
        for (std::size_t i = 0; i < wn.size(); ++i) wn[i] += m[j][i] * w[static_cast<std::size_t>(n) + 1][j];
    }
    for (std::size_t n = 0; n < w.size(); ++n) impl_->traces.emplace_back(impl_->shapes[n], w[n]);

    impl_->flags = std::make_unique<std::once_flag[]>(s.levels.size());
    impl_->projectors.resize(s.levels.size());
  }

  const TowerSpec& spec() const noexcept { return impl_->spec; }
  /// Index M of the top level.
  int top() const noexcept { return static_cast<int>(impl_->spec.levels.size()) - 1; }
  const BlockShape& shape(int n) const { return impl_->shapes.at(static_cast<std::size_t>(n)); }
  const BlockShape& top_shape() const { return shape(top()); }
  const TraceWeights& trace(int n) const { return impl_->traces.at(static_cast<std::size_t>(n)); }
  const TraceWeights& top_trace() const { return trace(top()); }

  int mult(int n, int j, int i) const {
    return impl_->spec.mults.at(static_cast<std::size_t>(n))
        .at(static_cast<std::size_t>(j))
        .at(static_cast<std::size_t>(i));
  }

  bool same_diagram(const Tower& o) const { return impl_ == o.impl_ || impl_->spec == o.impl_->spec; }

  /// Unital inclusion A_n -> A_{n+1}.
  Element embed(int n, const Element& a) const {
    check_level(n, "embed");
    if (n == top()) throw InputError("embed: level is already the top");
    if (!(a.shape() == shape(n))) throw InputError("embed: element does not match level shape");
    const BlockShape& next = shape(n + 1);
    Element out = Element::zero(next);
    for (int j = 0; j < next.block_count(); ++j) {
      Block& dst = out.block(j);
      Eigen::Index offset = 0;
      for (int i = 0; i < shape(n).block_count(); ++i) {
        const int d = shape(n).dim(i);
        for (int c = 0; c < mult(n, j, i); ++c) {
          dst.block(offset, offset, d, d) = a.block(i);
          offset += d;
        }
      }
    }
    return out;
  }

  Element lift(int from, const Element& a, int to) const {
    if (from > to) throw InputError("lift: target level below source");
    Element e = a;
    for (int n = from; n < to; ++n) e = embed(n, e);
    return e;
  }

  Element lift_to_top(int n, const Element& a) const { return lift(n, a, top()); }

  /// tau-preserving conditional expectation of a top-level element onto A_n,
  /// returned as an element of A_n.
  Element expectation(int n, const Element& x) const {
    check_level(n, "expectation");
    check_top(x, "expectation");
    if (n == top()) return x;
    const Projector& p = projector(n);
    const Eigen::VectorXcd coeff = p.dual * x.flatten();
    return Element::unflatten(shape(n), p.preimage * coeff);
  }

  /// Same as expectation(), embedded back into the top level.
  Element expectation_top(int n, const Element& x) const {
    check_level(n, "expectation");
    check_top(x, "expectation");
    if (n == top()) return x;
    const Projector& p = projector(n);
    const Eigen::VectorXcd coeff = p.dual * x.flatten();
    return Element::unflatten(top_shape(), p.image * coeff);
  }

 private:
  // Orthogonal basis (tau inner product) of the image of A_n in the top
  // level: columns of `image`, with matching level-n preimages in
  // `preimage`. Row k of `dual` maps x to <x, u_k> / <u_k, u_k>.
  struct Projector {
    Eigen::MatrixXcd image;
    Eigen::MatrixXcd preimage;
    Eigen::MatrixXcd dual;
  };

  struct Impl {
    TowerSpec spec;
    std::vector<BlockShape> shapes;
    std::vector<TraceWeights> traces;
    std::unique_ptr<std::once_flag[]> flags;
    std::vector<std::optional<Projector>> projectors;
  };

  void check_level(int n, const char* op) const {
    if (n < 0 || n > top()) throw InputError(std::string(op) + ": invalid level index " + std::to_string(n));
  }
  void check_top(const Element& x, const char* op) const {
    if (!(x.shape() == top_shape())) throw InputError(std::string(op) + ": element is not at the top level");
  }

  const Projector& projector(int n) const {
    auto idx = static_cast<std::size_t>(n);
    std::call_once(impl_->flags[idx], [&] { impl_->projectors[idx] = build_projector(n); });
    return *impl_->projectors[idx];
  }

  Eigen::VectorXd top_entry_weights() const {
    Eigen::VectorXd w(top_shape().algebra_dim());
    Eigen::Index k = 0;
    for (int i = 0; i < top_shape().block_count(); ++i) {
      const int d = top_shape().dim(i);
      for (int e = 0; e < d * d; ++e) w(k++) = top_trace().weight(i);
    }
    return w;
  }

  // Modified Gram-Schmidt on the lifted matrix units, two passes.
  Projector build_projector(int n) const {
    const BlockShape& s = shape(n);
    const Eigen::VectorXd w = top_entry_weights();
    auto inner = [&w](const Eigen::VectorXcd& a, const Eigen::VectorXcd& b) {
      return (b.conjugate().array() * w.array() * a.array()).sum();
    };
    const Eigen::Index K = s.algebra_dim();
    const Eigen::Index N = top_shape().algebra_dim();
    Projector p;
    Eigen::VectorXd norms2(K);
    p.image.resize(N, K);
    p.preimage.resize(K, K);
    Eigen::Index k = 0;
    for (int i = 0; i < s.block_count(); ++i) {
      for (int r = 0; r < s.dim(i); ++r) {
        for (int c = 0; c < s.dim(i); ++c) {
          Element unit = Element::zero(s);
          unit.block(i)(r, c) = 1.0;
          Eigen::VectorXcd v = lift_to_top(n, unit).flatten();
          Eigen::VectorXcd pre = unit.flatten();
          for (int pass = 0; pass < 2; ++pass) {
            for (Eigen::Index j = 0; j < k; ++j) {
              const Complex coef = inner(v, p.image.col(j)) / norms2(j);
              v -= coef * p.image.col(j);
              pre -= coef * p.preimage.col(j);
            }
          }
          norms2(k) = inner(v, v).real();
          if (!(norms2(k) > 1e-300)) throw std::logic_error("expectation basis degenerated");
          p.image.col(k) = v;
          p.preimage.col(k) = pre;
          ++k;
        }
      }
    }
    p.dual = (p.image.array().colwise() * w.cast<Complex>().array()).matrix().adjoint();
    p.dual = norms2.cwiseInverse().cast<Complex>().asDiagonal() * p.dual;
    return p;
  }

  std::shared_ptr<Impl> impl_;
};

/// Restricted trace weights for every level, bottom to top.
inline std::vector<TraceWeights> induced_traces(const Tower& t) {
  std::vector<TraceWeights> out;
  for (int n = 0; n <= t.top(); ++n) out.push_back(t.trace(n));
  return out;
}

inline Element conditional_expectation(const Tower& t, int n, const Element& x) { return t.expectation(n, x); }

struct RatioReport {
  std::vector<double> ratios;  // beta(n)/beta(n-1), n >= 1
  bool all_below_one = true;
  bool nonincreasing = true;
};

/// Positive weights beta(0), beta(1), ... used by L_beta and the ideal D-norm.
class BetaSequence {
 public:
  BetaSequence() = default;
  explicit BetaSequence(std::vector<double> values) : values_(std::move(values)) {
    if (values_.empty()) throw InputError("BetaSequence: empty");
    for (double v : values_)
      if (!(v > 0.0) || !std::isfinite(v)) throw InputError("BetaSequence: values must be positive and finite");
  }

  /// beta(n) = 1/n! for n = 0 .. count-1.
  static BetaSequence factorial(int count) {
    std::vector<double> v;
    double f = 1.0;
    for (int n = 0; n < count; ++n) {
      if (n > 0) f /= n;
      v.push_back(f);
    }
    return BetaSequence(std::move(v));
  }

  int size() const noexcept { return static_cast<int>(values_.size()); }
  const std::vector<double>& values() const noexcept { return values_; }
  double operator()(int n) const {
    if (n < 0 || n >= size()) throw InputError("beta(" + std::to_string(n) + ") is not defined");
    return values_[static_cast<std::size_t>(n)];
  }

  /// Finite ratio profile only. A finite prefix cannot certify that the
  /// ratios tend to 0.
  RatioReport ratio_report() const {
    RatioReport r;
    for (std::size_t n = 1; n < values_.size(); ++n) {
      const double q = values_[n] / values_[n - 1];
      r.all_below_one = r.all_below_one && q < 1.0;
      if (!r.ratios.empty()) r.nonincreasing = r.nonincreasing && q <= r.ratios.back();
      r.ratios.push_back(q);
    }
    return r;
  }

 private:
  std::vector<double> values_;
};

}  // namespace qmlab
