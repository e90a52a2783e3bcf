#pragma once

#include <Eigen/Core>
#include <cmath>
#include <span>
#include <string>

#include "simflood/composition.hpp"
#include "simflood/errors.hpp"
#include "simflood/knowledge_graph.hpp"

namespace simflood {

/// Dense n x m cross-graph similarities, row-major so row blocks are contiguous.
template <typename Scalar>
using SimilarityMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

using Similarity = SimilarityMatrix<float>;

enum class Normalization { global_max_abs };

struct FloodConfig {
  int max_iterations = 20;
  double epsilon = 1e-4;
  /// Reset seed entries to 1 (and re-add the base matrix) before every normalization.
  bool reinject_seeds = false;
  Normalization normalization = Normalization::global_max_abs;
  /// Rows per work unit.
  Index block_height = 1024;
  int workers = 1;

  /// Throws ConfigError unless max_iterations >= 1, epsilon > 0, block_height >= 1 and workers >= 1.
  void validate() const;
};

/// Omega_0: `base` (or zeros) with every seed entry overwritten by 1.
template <typename Scalar>
SimilarityMatrix<Scalar> init_omega(Index n, Index m, std::span<const EntityPair> seeds,
                                    const SimilarityMatrix<Scalar>* base = nullptr) {
  SimilarityMatrix<Scalar> omega;
  if (base) {
    if (base->rows() != n || base->cols() != m) throw DimensionError("init_omega: base matrix shape mismatch");
    omega = *base;
  } else {
    omega = SimilarityMatrix<Scalar>::Zero(n, m);
  }
  for (const auto& [i, j] : seeds) {
    if (i < 0 || i >= n || j < 0 || j >= m)
      throw DimensionError("init_omega: seed (" + std::to_string(i) + ", " + std::to_string(j) + ") out of range");
    omega(i, j) = Scalar(1);
  }
  return omega;
}

/// Largest absolute entry; throws NumericError on a non-finite entry.
template <typename Derived>
double max_abs(const Eigen::MatrixBase<Derived>& m) {
  double largest = 0.0;
  for (Index i = 0; i < m.rows(); ++i)
    for (Index j = 0; j < m.cols(); ++j) {
      const double v = static_cast<double>(m(i, j));
      if (!std::isfinite(v)) throw NumericError("non-finite similarity value");
      largest = std::max(largest, std::abs(v));
    }
  return largest;
}

/// Divides every entry by the largest absolute entry, mapping values into
/// [-1, 1]. A zero matrix is left untouched. Returns the divisor (0 if none).
template <typename Derived>
double normalize(Eigen::MatrixBase<Derived>& m) {
  using Scalar = typename Derived::Scalar;
  const double largest = max_abs(m);
  if (largest == 0.0) return 0.0;
  const auto divisor = static_cast<Scalar>(largest);
  m.derived() = m.derived() / divisor;
  return largest;
}

template <typename Derived>
double normalize(Eigen::MatrixBase<Derived>&& m) {
  return normalize(m);
}

/// Max elementwise absolute difference.
template <typename A, typename B>
double delta(const Eigen::MatrixBase<A>& a, const Eigen::MatrixBase<B>& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw DimensionError("delta: shape mismatch");
  double largest = 0.0;
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < a.cols(); ++j)
      largest = std::max(largest, std::abs(static_cast<double>(a(i, j)) - static_cast<double>(b(i, j))));
  return largest;
}

/// What a reinjecting step restores before normalizing.
template <typename Scalar>
struct Anchor {
  std::span<const EntityPair> seeds;
  const SimilarityMatrix<Scalar>* base = nullptr;
};

/// normalize(Lambda * Omega * Lambda'^T), evaluated as Lambda * (Omega * Lambda'^T)
/// with 64-bit accumulation. With `anchor`, the base matrix is added and
/// the seed entries reset to 1 before normalization.
template <typename Scalar>
SimilarityMatrix<Scalar> flood_step(const CompositionMatrix& source, const SimilarityMatrix<Scalar>& omega,
                                    const CompositionMatrix& target, const FloodConfig& config,
                                    const Anchor<Scalar>* anchor = nullptr);

template <typename Scalar>
struct FloodResult {
  SimilarityMatrix<Scalar> omega;
  int iterations = 0;
  bool converged = false;
  double last_delta = 0.0;
};

/// Iterates flood_step from init_omega(seeds, base) until the change between
/// consecutive normalized matrices drops below epsilon or max_iterations is hit.
template <typename Scalar>
FloodResult<Scalar> run_flood(const CompositionMatrix& source, const CompositionMatrix& target,
                              std::span<const EntityPair> seeds, const FloodConfig& config,
                              const SimilarityMatrix<Scalar>* base = nullptr);

extern template Similarity flood_step<float>(const CompositionMatrix&, const Similarity&, const CompositionMatrix&,
                                             const FloodConfig&, const Anchor<float>*);
extern template SimilarityMatrix<double> flood_step<double>(const CompositionMatrix&, const SimilarityMatrix<double>&,
                                                            const CompositionMatrix&, const FloodConfig&,
                                                            const Anchor<double>*);
extern template FloodResult<float> run_flood<float>(const CompositionMatrix&, const CompositionMatrix&,
                                                    std::span<const EntityPair>, const FloodConfig&,
                                                    const Similarity*);
extern template FloodResult<double> run_flood<double>(const CompositionMatrix&, const CompositionMatrix&,
                                                      std::span<const EntityPair>, const FloodConfig&,
                                                      const SimilarityMatrix<double>*);

}  // namespace simflood
