#pragma once

// Deterministic random streams.
//
// A root seed is split into independent streams keyed by (seed, suite, index):
//
//   stream_seed = splitmix64(splitmix64(seed ^ fnv1a64(suite)) + index)
//
// Each sweep task draws from its own stream, so results do not depend on the
// order in which tasks run.

#include <cstdint>
#include <random>
#include <string_view>

#include "qmlab/algebra.hpp"

namespace qmlab {

using Rng = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::uint64_t stream_seed(std::uint64_t seed, std::string_view suite, std::uint64_t index) {
  return splitmix64(splitmix64(seed ^ fnv1a64(suite)) + index);
}

inline Rng make_stream(std::uint64_t seed, std::string_view suite, std::uint64_t index) {
  return Rng(stream_seed(seed, suite, index));
}

inline double uniform(Rng& rng, double lo = 0.0, double hi = 1.0) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline int uniform_int(Rng& rng, int lo, int hi) {
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

inline double gaussian(Rng& rng) { return std::normal_distribution<double>(0.0, 1.0)(rng); }

/// Element with i.i.d. standard complex Gaussian entries.
inline Element random_element(const BlockShape& shape, Rng& rng) {
  Element e = Element::zero(shape);
  for (int i = 0; i < shape.block_count(); ++i) {
    Block& b = e.block(i);
    for (Eigen::Index r = 0; r < b.rows(); ++r)
      for (Eigen::Index c = 0; c < b.cols(); ++c) b(r, c) = Complex(gaussian(rng), gaussian(rng));
  }
  return e;
}

inline Element random_self_adjoint(const BlockShape& shape, Rng& rng) {
  return real_part(random_element(shape, rng));
}

}  // namespace qmlab
