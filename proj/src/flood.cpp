#include "simflood/flood.hpp"

#include <vector>

#include "simflood/parallel.hpp"

namespace simflood {

void FloodConfig::validate() const {
  if (max_iterations < 1) throw ConfigError("max_iterations must be >= 1");
  if (!(epsilon > 0.0)) throw ConfigError("epsilon must be > 0");
  if (block_height < 1) throw ConfigError("block_height must be >= 1");
  if (workers < 1) throw ConfigError("workers must be >= 1");
}

namespace {

using Accumulator = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// T = Omega * Lambda'^T. Row i of T only reads row i of Omega.
template <typename Scalar>
Accumulator right_product(const SimilarityMatrix<Scalar>& omega, const CompositionMatrix& target,
                          const FloodConfig& config) {
  const Index n = omega.rows();
  const Index m = omega.cols();
  Accumulator out(n, m);
  const SparseMatrix& a = target.direct();
  const SparseMatrix& u = target.usage();
  const SparseMatrix& v = target.imbalance();
  const Index num_relations = target.is_factored() ? v.rows() : 0;

  parallel_blocks(n, config.block_height, config.workers, [&](Index begin, Index end) {
    std::vector<double> projected(static_cast<std::size_t>(num_relations));
    for (Index i = begin; i < end; ++i) {
      const Scalar* row = omega.data() + i * m;
      for (Index r = 0; r < num_relations; ++r) {
        double sum = 0.0;
        for (SparseMatrix::InnerIterator it(v, r); it; ++it) sum += static_cast<double>(row[it.col()]) * it.value();
        projected[static_cast<std::size_t>(r)] = sum;
      }
      double* dst = out.data() + i * m;
      for (Index j = 0; j < m; ++j) {
        double sum = 0.0;
        for (SparseMatrix::InnerIterator it(a, j); it; ++it) sum += static_cast<double>(row[it.col()]) * it.value();
        if (num_relations > 0)
          for (SparseMatrix::InnerIterator it(u, j); it; ++it)
            sum += projected[static_cast<std::size_t>(it.col())] * it.value();
        dst[j] = sum;
      }
    }
  });
  return out;
}

// X = Lambda * T, plus the anchor when reinjecting.
template <typename Scalar>
SimilarityMatrix<Scalar> left_product(const CompositionMatrix& source, const Accumulator& t, const FloodConfig& config,
                                      const Anchor<Scalar>* anchor) {
  const Index n = t.rows();
  const Index m = t.cols();
  const SparseMatrix& a = source.direct();
  const SparseMatrix& u = source.usage();
  const SparseMatrix& v = source.imbalance();

  Accumulator projected;
  if (source.is_factored()) {
    projected.setZero(v.rows(), m);
    parallel_blocks(v.rows(), config.block_height, config.workers, [&](Index begin, Index end) {
      for (Index r = begin; r < end; ++r)
        for (SparseMatrix::InnerIterator it(v, r); it; ++it) projected.row(r) += it.value() * t.row(it.col());
    });
  }

  std::vector<std::vector<Index>> seeds_by_row;
  if (anchor) {
    seeds_by_row.resize(static_cast<std::size_t>(n));
    for (const auto& [i, j] : anchor->seeds) {
      if (i < 0 || i >= n || j < 0 || j >= m) throw DimensionError("flood_step: seed out of range");
      seeds_by_row[static_cast<std::size_t>(i)].push_back(j);
    }
    if (anchor->base && (anchor->base->rows() != n || anchor->base->cols() != m))
      throw DimensionError("flood_step: base matrix shape mismatch");
  }

  SimilarityMatrix<Scalar> out(n, m);
  parallel_blocks(n, config.block_height, config.workers, [&](Index begin, Index end) {
    Eigen::RowVectorXd acc(m);
    for (Index i = begin; i < end; ++i) {
      acc.setZero();
      for (SparseMatrix::InnerIterator it(a, i); it; ++it) acc += it.value() * t.row(it.col());
      if (source.is_factored())
        for (SparseMatrix::InnerIterator it(u, i); it; ++it) acc += it.value() * projected.row(it.col());
      if (anchor) {
        if (anchor->base)
          for (Index j = 0; j < m; ++j) {
            const auto b = (*anchor->base)(i, j);
            if (b != Scalar(0)) acc(j) += static_cast<double>(b);
          }
        for (const Index j : seeds_by_row[static_cast<std::size_t>(i)]) acc(j) = 1.0;
      }
      out.row(i) = acc.cast<Scalar>();
    }
  });
  return out;
}

}  // namespace

template <typename Scalar>
SimilarityMatrix<Scalar> flood_step(const CompositionMatrix& source, const SimilarityMatrix<Scalar>& omega,
                                    const CompositionMatrix& target, const FloodConfig& config,
                                    const Anchor<Scalar>* anchor) {
  if (omega.rows() != source.size() || omega.cols() != target.size())
    throw DimensionError("flood_step: omega is " + std::to_string(omega.rows()) + "x" + std::to_string(omega.cols()) +
                         ", compositions are " + std::to_string(source.size()) + " and " +
                         std::to_string(target.size()));
  auto next = left_product(source, right_product(omega, target, config), config, anchor);
  normalize(next);
  return next;
}

template <typename Scalar>
FloodResult<Scalar> run_flood(const CompositionMatrix& source, const CompositionMatrix& target,
                              std::span<const EntityPair> seeds, const FloodConfig& config,
                              const SimilarityMatrix<Scalar>* base) {
  config.validate();
  FloodResult<Scalar> result;
  result.omega = init_omega<Scalar>(source.size(), target.size(), seeds, base);
  const Anchor<Scalar> anchor{seeds, base};
  const Anchor<Scalar>* reinject = config.reinject_seeds ? &anchor : nullptr;
  for (int t = 1; t <= config.max_iterations; ++t) {
    auto next = flood_step(source, result.omega, target, config, reinject);
    result.last_delta = delta(next, result.omega);
    result.omega = std::move(next);
    result.iterations = t;
    if (result.last_delta < config.epsilon) {
      result.converged = true;
      break;
    }
  }
  return result;
}

template Similarity flood_step<float>(const CompositionMatrix&, const Similarity&, const CompositionMatrix&,
                                      const FloodConfig&, const Anchor<float>*);
template SimilarityMatrix<double> flood_step<double>(const CompositionMatrix&, const SimilarityMatrix<double>&,
                                                     const CompositionMatrix&, const FloodConfig&,
                                                     const Anchor<double>*);
template FloodResult<float> run_flood<float>(const CompositionMatrix&, const CompositionMatrix&,
                                             std::span<const EntityPair>, const FloodConfig&, const Similarity*);
template FloodResult<double> run_flood<double>(const CompositionMatrix&, const CompositionMatrix&,
                                               std::span<const EntityPair>, const FloodConfig&,
                                               const SimilarityMatrix<double>*);

}  // namespace simflood
