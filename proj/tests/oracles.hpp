#pragma once

// Independent reference implementations used to cross-check the library.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <vector>

#include "qmlab/qmlab.hpp"

namespace oracle {

using qmlab::Block;
using qmlab::Complex;
using qmlab::Element;

inline Block naive_multiply(const Block& a, const Block& b) {
  Block c = Block::Zero(a.rows(), b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < b.cols(); ++j) {
      Complex s = 0.0;
      for (Eigen::Index k = 0; k < a.cols(); ++k) s += a(i, k) * b(k, j);
      c(i, j) = s;
    }
  return c;
}

// sqrt of the largest eigenvalue of a* a.
inline double eig_norm(const Block& a) {
  if (a.size() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Block> es(a.adjoint() * a, Eigen::EigenvaluesOnly);
  return std::sqrt(std::max(0.0, es.eigenvalues().maxCoeff()));
}

inline double eig_norm(const Element& a) {
  double n = 0.0;
  for (const auto& b : a.blocks()) n = std::max(n, eig_norm(b));
  return n;
}

inline double min_eigenvalue(const Element& a) {
  double m = 1e300;
  for (const auto& b : a.blocks()) {
    Eigen::SelfAdjointEigenSolver<Block> es(Block(0.5 * (b + b.adjoint())), Eigen::EigenvaluesOnly);
    m = std::min(m, es.eigenvalues().minCoeff());
  }
  return m;
}

// Embedding built from the multiplicity matrix by placing copies along the
// diagonal, independent of the library's lift.
inline Element embed_once(const qmlab::TowerSpec& t, int n, const Element& a) {
  const auto& m = t.mults[static_cast<std::size_t>(n)];
  const auto& dims = t.levels[static_cast<std::size_t>(n) + 1];
  std::vector<Block> blocks;
  for (std::size_t j = 0; j < dims.size(); ++j) {
    Block b = Block::Zero(dims[j], dims[j]);
    int off = 0;
    for (std::size_t i = 0; i < m[j].size(); ++i)
      for (int c = 0; c < m[j][i]; ++c) {
        const auto& src = a.block(static_cast<int>(i));
        b.block(off, off, src.rows(), src.cols()) = src;
        off += static_cast<int>(src.rows());
      }
    blocks.push_back(b);
  }
  return Element(qmlab::BlockShape(dims), blocks);
}

inline Element embed_to(const qmlab::TowerSpec& t, int from, const Element& a, int to) {
  Element x = a;
  for (int n = from; n < to; ++n) x = embed_once(t, n, x);
  return x;
}

// Top-level trace weights pulled down by the recursion w_n = m^T w_{n+1}.
inline std::vector<double> level_weights(const qmlab::TowerSpec& t, int n) {
  std::vector<double> w = t.top_trace;
  for (int k = static_cast<int>(t.levels.size()) - 2; k >= n; --k) {
    const auto& m = t.mults[static_cast<std::size_t>(k)];
    std::vector<double> lower(t.levels[static_cast<std::size_t>(k)].size(), 0.0);
    for (std::size_t j = 0; j < m.size(); ++j)
      for (std::size_t i = 0; i < m[j].size(); ++i) lower[i] += m[j][i] * w[j];
    w = lower;
  }
  return w;
}

// E_n by weighted least squares over the lifted matrix units, solved with a
// pivoted QR (no Gram-Schmidt).
inline Element expectation_lsq(const qmlab::TowerSpec& t, int n, const Element& x) {
  const int M = static_cast<int>(t.levels.size()) - 1;
  const qmlab::BlockShape low(t.levels[static_cast<std::size_t>(n)]);
  const qmlab::BlockShape top(t.levels[static_cast<std::size_t>(M)]);
  std::vector<double> sqrt_w;
  for (std::size_t j = 0; j < t.top_trace.size(); ++j)
    for (int k = 0; k < top.dim(static_cast<int>(j)) * top.dim(static_cast<int>(j)); ++k)
      sqrt_w.push_back(std::sqrt(t.top_trace[j]));
  std::vector<Element> units;
  for (int i = 0; i < low.block_count(); ++i)
    for (int r = 0; r < low.dim(i); ++r)
      for (int c = 0; c < low.dim(i); ++c) {
        Element e = Element::zero(low);
        e.block(i)(r, c) = 1.0;
        units.push_back(e);
      }
  Eigen::MatrixXcd A(static_cast<Eigen::Index>(sqrt_w.size()), static_cast<Eigen::Index>(units.size()));
  for (std::size_t k = 0; k < units.size(); ++k) {
    const Eigen::VectorXcd v = embed_to(t, n, units[k], M).flatten();
    for (Eigen::Index r = 0; r < v.size(); ++r) A(r, static_cast<Eigen::Index>(k)) = v(r) * sqrt_w[static_cast<std::size_t>(r)];
  }
  Eigen::VectorXcd rhs = x.flatten();
  for (Eigen::Index r = 0; r < rhs.size(); ++r) rhs(r) *= sqrt_w[static_cast<std::size_t>(r)];
  const Eigen::VectorXcd coef = A.colPivHouseholderQr().solve(rhs);
  Element y = Element::zero(low);
  for (std::size_t k = 0; k < units.size(); ++k) y += units[k] * coef(static_cast<Eigen::Index>(k));
  return y;
}

inline double l_seminorm(const qmlab::TowerSpec& t, const std::vector<double>& beta, const Element& a) {
  const int M = static_cast<int>(t.levels.size()) - 1;
  double v = 0.0;
  for (int n = 0; n < M; ++n)
    v = std::max(v, eig_norm(a - embed_to(t, n, expectation_lsq(t, n, a), M)) / beta[static_cast<std::size_t>(n)]);
  return v;
}

// D_I with every ingredient recomputed: supports by edge closure, units by
// hand, expectations by least squares.
inline double d_norm(const qmlab::TowerSpec& t, const std::vector<double>& beta, std::vector<int> top_support,
                     const Element& w) {
  const int M = static_cast<int>(t.levels.size()) - 1;
  std::vector<std::vector<bool>> in(t.levels.size());
  in[static_cast<std::size_t>(M)].assign(t.levels[static_cast<std::size_t>(M)].size(), false);
  for (int j : top_support) in[static_cast<std::size_t>(M)][static_cast<std::size_t>(j)] = true;
  for (int n = M - 1; n >= 0; --n) {
    const auto& m = t.mults[static_cast<std::size_t>(n)];
    in[static_cast<std::size_t>(n)].assign(t.levels[static_cast<std::size_t>(n)].size(), true);
    for (std::size_t i = 0; i < in[static_cast<std::size_t>(n)].size(); ++i)
      for (std::size_t j = 0; j < m.size(); ++j)
        if (m[j][i] > 0 && !in[static_cast<std::size_t>(n) + 1][j]) in[static_cast<std::size_t>(n)][i] = false;
  }
  double v = std::max(l_seminorm(t, beta, w), eig_norm(w));
  for (int n = 0; n < M; ++n) {
    const qmlab::BlockShape s(t.levels[static_cast<std::size_t>(n)]);
    Element u = Element::zero(s);
    for (int i = 0; i < s.block_count(); ++i)
      if (in[static_cast<std::size_t>(n)][static_cast<std::size_t>(i)]) u.block(i).setIdentity();
    v = std::max(v, eig_norm(w - w * embed_to(t, n, u, M)) / beta[static_cast<std::size_t>(n)]);
  }
  return v;
}

// Two-point space {p, q}, d = 1, F = {p}, real f: min over a grid of h(q).
inline double two_point_ball_distance_grid(double fq, double fp, int steps = 200000) {
  double best = 1e300;
  for (int k = 0; k <= steps; ++k) {
    const double h = -1.0 + 2.0 * k / steps;  // |h| <= 1, L(h) = |h| <= 1
    best = std::min(best, std::max(std::abs(fp), std::abs(fq - h)));
  }
  return best;
}

}  // namespace oracle
