#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>
#include <iosfwd>
#include <span>
#include <string_view>

#include "simflood/errors.hpp"
#include "simflood/knowledge_graph.hpp"

namespace simflood {

using Index = Eigen::Index;
using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

/// Which embedding model the composition coefficients are derived from.
enum class Variant { transe, gcn };

Variant parse_variant(std::string_view name);
std::string_view to_string(Variant variant);

/// The composition-coefficient matrix of one graph: row i expresses entity
/// x_i as a weighted combination of entities of the same graph.
///
/// Stored either explicitly, or factored as A + U * V where A (n x n) holds
/// the direct-neighbour part, U (n x |R|) the entity-relation usage and
/// V (|R| x n) the per-relation subject/object imbalance. The factored form
/// keeps the relation term sparse: expanded, it couples every entity using a
/// relation to every entity incident to it.
class CompositionMatrix {
 public:
  CompositionMatrix() = default;

  static CompositionMatrix explicit_form(Variant variant, SparseMatrix matrix);
  static CompositionMatrix factored_form(Variant variant, SparseMatrix direct, SparseMatrix usage,
                                         SparseMatrix imbalance);

  Variant variant() const { return variant_; }
  Index size() const { return direct_.rows(); }
  bool is_factored() const { return factored_; }

  /// The explicit matrix, or A of the factored form.
  const SparseMatrix& direct() const { return direct_; }
  /// U; empty unless factored.
  const SparseMatrix& usage() const { return usage_; }
  /// V; empty unless factored.
  const SparseMatrix& imbalance() const { return imbalance_; }

  /// Dense row i. The terms of each coefficient are summed in ascending
  /// order of value, so the result does not depend on relation numbering.
  Eigen::VectorXd row(Index i) const;
  double coefficient(Index i, Index j) const { return row(i)(j); }

  /// Explicit sparse matrix; exact zeros are dropped.
  SparseMatrix materialize() const;

 private:
  Variant variant_ = Variant::gcn;
  bool factored_ = false;
  SparseMatrix direct_;
  SparseMatrix usage_;
  SparseMatrix imbalance_;
};

/// TransE-derived coefficients, factored:
///   A_ij = |R(x_i,x_j)| / |T_i|
///   U_ir = |T_{i,r}| / (|T_i| |T_r|)
///   V_rj = |T_{j,r}| - |T_{j,r^-1}|
/// with r ranging over original and reverse relations.
CompositionMatrix lambda_transe(const KnowledgeGraph& kg);

/// Mean-pooling coefficients: 1 / |N(x_i)| for each distinct neighbour x_j.
CompositionMatrix lambda_gcn(const KnowledgeGraph& kg);

CompositionMatrix build_lambda(const KnowledgeGraph& kg, Variant variant);

/// Lambda * M, without materializing the factored form.
template <typename Derived>
Eigen::MatrixXd apply_right(const CompositionMatrix& lambda, const Eigen::MatrixBase<Derived>& m) {
  if (m.rows() != lambda.size())
    throw DimensionError("apply_right: matrix has " + std::to_string(m.rows()) + " rows, expected " +
                         std::to_string(lambda.size()));
  const Eigen::MatrixXd dense = m.template cast<double>();
  Eigen::MatrixXd out = lambda.direct() * dense;
  if (lambda.is_factored()) {
    const Eigen::MatrixXd projected = lambda.imbalance() * dense;
    out += lambda.usage() * projected;
  }
  return out;
}

/// Principal submatrix on the entities in `keep` (in that order).
CompositionMatrix restrict_to(const CompositionMatrix& lambda, std::span<const Index> keep);

/// Writes the explicit form as `row\tcol\tvalue` lines, row-major.
void write_lambda_triples(std::ostream& out, const CompositionMatrix& lambda);

}  // namespace simflood
