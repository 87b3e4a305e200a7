#pragma once

// Finite-dimensional multi-matrix C*-algebras: M_{d_1} (+) ... (+) M_{d_k}.
//
// An Element stores one dense complex block per summand. All arithmetic is
// blockwise; the C*-norm is the largest singular value over the blocks.

#include <Eigen/Dense>

#include <algorithm>
#include <complex>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "qmlab/error.hpp"

namespace qmlab {

using Complex = std::complex<double>;
using Block = Eigen::MatrixXcd;

inline constexpr Complex kI{0.0, 1.0};

class BlockShape {
 public:
  BlockShape() = default;
  explicit BlockShape(std::vector<int> dims) : dims_(std::move(dims)) {
    if (dims_.empty()) throw InputError("BlockShape: no blocks");
    for (int d : dims_)
      if (d < 1) throw InputError("BlockShape: block size must be >= 1");
  }

  const std::vector<int>& dims() const noexcept { return dims_; }
  int block_count() const noexcept { return static_cast<int>(dims_.size()); }
  int dim(int i) const { return dims_.at(static_cast<std::size_t>(i)); }

  /// Complex dimension of the algebra, sum of d_i^2.
  int algebra_dim() const noexcept {
    return std::accumulate(dims_.begin(), dims_.end(), 0,
                           [](int acc, int d) { return acc + d * d; });
  }

  friend bool operator==(const BlockShape&, const BlockShape&) = default;

 private:
  std::vector<int> dims_;
};

class Element {
 public:
  Element() = default;
  Element(BlockShape shape, std::vector<Block> blocks)
      : shape_(std::move(shape)), blocks_(std::move(blocks)) {
    if (static_cast<int>(blocks_.size()) != shape_.block_count())
      throw InputError("Element: block count does not match shape");
    for (int i = 0; i < shape_.block_count(); ++i) {
      const auto& b = blocks_[static_cast<std::size_t>(i)];
      if (b.rows() != shape_.dim(i) || b.cols() != shape_.dim(i))
        throw InputError("Element: block " + std::to_string(i) + " has wrong size");
    }
  }

  static Element zero(const BlockShape& shape) {
    std::vector<Block> blocks;
    for (int d : shape.dims()) blocks.push_back(Block::Zero(d, d));
    return {shape, std::move(blocks)};
  }

  static Element identity(const BlockShape& shape) { return scalar(shape, 1.0); }

  static Element scalar(const BlockShape& shape, Complex c) {
    std::vector<Block> blocks;
    for (int d : shape.dims()) blocks.push_back(c * Block::Identity(d, d));
    return {shape, std::move(blocks)};
  }

  /// Identity on the listed blocks, zero elsewhere (a central projection).
  static Element central_projection(const BlockShape& shape, std::span<const int> blocks_on) {
    Element e = zero(shape);
    for (int i : blocks_on) {
      if (i < 0 || i >= shape.block_count()) throw InputError("central_projection: bad block index");
      e.blocks_[static_cast<std::size_t>(i)].setIdentity();
    }
    return e;
  }

  const BlockShape& shape() const noexcept { return shape_; }
  const std::vector<Block>& blocks() const noexcept { return blocks_; }
  const Block& block(int i) const { return blocks_.at(static_cast<std::size_t>(i)); }
  Block& block(int i) { return blocks_.at(static_cast<std::size_t>(i)); }

  Element adjoint() const {
    Element out = *this;
    for (auto& b : out.blocks_) b = b.adjoint().eval();
    return out;
  }

  Element& operator+=(const Element& o) {
    require_same(o, "add");
    for (std::size_t i = 0; i < blocks_.size(); ++i) blocks_[i] += o.blocks_[i];
    return *this;
  }
  Element& operator-=(const Element& o) {
    require_same(o, "sub");
    for (std::size_t i = 0; i < blocks_.size(); ++i) blocks_[i] -= o.blocks_[i];
    return *this;
  }
  Element& operator*=(Complex c) {
    for (auto& b : blocks_) b *= c;
    return *this;
  }

  friend Element operator+(Element a, const Element& b) { return a += b; }
  friend Element operator-(Element a, const Element& b) { return a -= b; }
  friend Element operator-(Element a) { return a *= -1.0; }
  friend Element operator*(Complex c, Element a) { return a *= c; }
  friend Element operator*(Element a, Complex c) { return a *= c; }
  friend Element operator*(double c, Element a) { return a *= Complex(c, 0.0); }
  friend Element operator*(Element a, double c) { return a *= Complex(c, 0.0); }
  friend Element operator/(Element a, double c) { return a *= Complex(1.0 / c, 0.0); }

  friend Element operator*(const Element& a, const Element& b) {
    a.require_same(b, "mul");
    std::vector<Block> blocks;
    blocks.reserve(a.blocks_.size());
    for (std::size_t i = 0; i < a.blocks_.size(); ++i) blocks.push_back(a.blocks_[i] * b.blocks_[i]);
    return {a.shape_, std::move(blocks)};
  }

  /// Blocks concatenated, each in row-major order.
  Eigen::VectorXcd flatten() const {
    Eigen::VectorXcd v(shape_.algebra_dim());
    Eigen::Index k = 0;
    for (const auto& b : blocks_)
      for (Eigen::Index r = 0; r < b.rows(); ++r)
        for (Eigen::Index c = 0; c < b.cols(); ++c) v(k++) = b(r, c);
    return v;
  }

  static Element unflatten(const BlockShape& shape, const Eigen::VectorXcd& v) {
    if (v.size() != shape.algebra_dim()) throw InputError("unflatten: length mismatch");
    Element e = zero(shape);
    Eigen::Index k = 0;
    for (auto& b : e.blocks_)
      for (Eigen::Index r = 0; r < b.rows(); ++r)
        for (Eigen::Index c = 0; c < b.cols(); ++c) b(r, c) = v(k++);
    return e;
  }

 private:
  void require_same(const Element& o, const char* op) const {
    if (!(shape_ == o.shape_)) throw InputError(std::string("shape mismatch in ") + op);
  }

  BlockShape shape_;
  std::vector<Block> blocks_;
};

/// Largest singular value of a single block.
inline double spectral_norm(const Block& b) {
  if (b.size() == 0) return 0.0;
  Eigen::JacobiSVD<Block> svd(b);
  return svd.singularValues()(0);
}

/// C*-norm: max over blocks of the largest singular value.
inline double op_norm(const Element& a) {
  double n = 0.0;
  for (const auto& b : a.blocks()) n = std::max(n, spectral_norm(b));
  return n;
}

inline double distance(const Element& a, const Element& b) { return op_norm(a - b); }

/// Norm-distance equality; never bitwise.
inline bool approx_equal(const Element& a, const Element& b, double tol = 1e-12) {
  return distance(a, b) <= tol;
}

class TraceWeights {
 public:
  static constexpr double kNormTol = 1e-12;

  TraceWeights() = default;
  TraceWeights(BlockShape shape, std::vector<double> weights)
      : shape_(std::move(shape)), weights_(std::move(weights)) {
    if (static_cast<int>(weights_.size()) != shape_.block_count())
      throw InputError("TraceWeights: one weight per block required");
    double total = 0.0;
    for (int i = 0; i < shape_.block_count(); ++i) {
      double w = weights_[static_cast<std::size_t>(i)];
      if (!(w > 0.0)) throw InputError("TraceWeights: weights must be strictly positive");
      total += w * shape_.dim(i);
    }
    if (std::abs(total - 1.0) > kNormTol)
      throw InputError("TraceWeights: sum of weight*dim must be 1, got " + std::to_string(total));
  }

  const BlockShape& shape() const noexcept { return shape_; }
  const std::vector<double>& weights() const noexcept { return weights_; }
  double weight(int i) const { return weights_.at(static_cast<std::size_t>(i)); }

 private:
  BlockShape shape_;
  std::vector<double> weights_;
};

inline Complex trace_state(const TraceWeights& tau, const Element& a) {
  if (!(tau.shape() == a.shape())) throw InputError("trace_state: shape mismatch");
  Complex t = 0.0;
  for (int i = 0; i < a.shape().block_count(); ++i) t += tau.weight(i) * a.block(i).trace();
  return t;
}

/// <a, b> = tau(b* a), linear in the first slot.
inline Complex gns_inner(const TraceWeights& tau, const Element& a, const Element& b) {
  if (!(tau.shape() == a.shape()) || !(a.shape() == b.shape()))
    throw InputError("gns_inner: shape mismatch");
  Complex s = 0.0;
  for (int i = 0; i < a.shape().block_count(); ++i)
    s += tau.weight(i) * (b.block(i).conjugate().cwiseProduct(a.block(i))).sum();
  return s;
}

inline bool is_self_adjoint(const Element& a, double tol = 0.0) {
  for (const auto& b : a.blocks())
    if ((b - b.adjoint()).cwiseAbs().maxCoeff() > tol) return false;
  return true;
}

namespace detail {
// Copies the conjugate of the upper triangle into the lower one and zeroes
// the imaginary diagonal, so the result is Hermitian bit for bit.
inline void force_hermitian(Element& a) {
  for (int i = 0; i < a.shape().block_count(); ++i) {
    Block& b = a.block(i);
    for (Eigen::Index r = 0; r < b.rows(); ++r) {
      b(r, r) = Complex(b(r, r).real(), 0.0);
      for (Eigen::Index c = r + 1; c < b.cols(); ++c) b(c, r) = std::conj(b(r, c));
    }
  }
}
}  // namespace detail

/// (Re a, Im a) with Re a = (a + a*)/2 and Im a = (a - a*)/(2i).
inline std::pair<Element, Element> re_im_parts(const Element& a) {
  const Element adj = a.adjoint();
  Element re = (a + adj) * 0.5;
  Element im = (a - adj) * Complex(0.0, -0.5);
  detail::force_hermitian(re);
  detail::force_hermitian(im);
  return {std::move(re), std::move(im)};
}

inline Element real_part(const Element& a) { return re_im_parts(a).first; }

/// Jordan product (ab + ba)/2 and Lie product (ab - ba)/(2i).
inline std::pair<Element, Element> jordan_lie(const Element& a, const Element& b) {
  const Element ab = a * b;
  const Element ba = b * a;
  return {(ab + ba) * 0.5, (ab - ba) * Complex(0.0, -0.5)};
}

}  // namespace qmlab
