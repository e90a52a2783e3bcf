#include "simflood/composition.hpp"

#include <algorithm>
#include <cstdio>
#include <ostream>
#include <utility>
#include <vector>

namespace simflood {

Variant parse_variant(std::string_view name) {
  if (name == "transe") return Variant::transe;
  if (name == "gcn") return Variant::gcn;
  throw ConfigError("unknown lambda variant: " + std::string(name));
}

std::string_view to_string(Variant variant) { return variant == Variant::transe ? "transe" : "gcn"; }

CompositionMatrix CompositionMatrix::explicit_form(Variant variant, SparseMatrix matrix) {
  if (matrix.rows() != matrix.cols()) throw DimensionError("composition matrix must be square");
  CompositionMatrix c;
  c.variant_ = variant;
  c.direct_ = std::move(matrix);
  c.direct_.makeCompressed();
  return c;
}

CompositionMatrix CompositionMatrix::factored_form(Variant variant, SparseMatrix direct, SparseMatrix usage,
                                                   SparseMatrix imbalance) {
  if (direct.rows() != direct.cols() || usage.rows() != direct.rows() || imbalance.cols() != direct.cols() ||
      usage.cols() != imbalance.rows())
    throw DimensionError("inconsistent factored composition shapes");
  CompositionMatrix c;
  c.variant_ = variant;
  c.factored_ = true;
  c.direct_ = std::move(direct);
  c.usage_ = std::move(usage);
  c.imbalance_ = std::move(imbalance);
  c.direct_.makeCompressed();
  c.usage_.makeCompressed();
  c.imbalance_.makeCompressed();
  return c;
}

Eigen::VectorXd CompositionMatrix::row(Index i) const {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(size());
  if (!factored_) {
    for (SparseMatrix::InnerIterator it(direct_, i); it; ++it) out(it.col()) = it.value();
    return out;
  }
  std::vector<std::pair<Index, double>> terms;
  for (SparseMatrix::InnerIterator it(direct_, i); it; ++it) terms.emplace_back(it.col(), it.value());
  for (SparseMatrix::InnerIterator u(usage_, i); u; ++u)
    for (SparseMatrix::InnerIterator v(imbalance_, u.col()); v; ++v) terms.emplace_back(v.col(), u.value() * v.value());
  std::sort(terms.begin(), terms.end());
  for (const auto& [j, value] : terms) out(j) += value;
  return out;
}

SparseMatrix CompositionMatrix::materialize() const {
  if (!factored_) return direct_;
  std::vector<Eigen::Triplet<double>> entries;
  for (Index i = 0; i < size(); ++i) {
    const Eigen::VectorXd r = row(i);
    for (Index j = 0; j < r.size(); ++j)
      if (r(j) != 0.0) entries.emplace_back(i, j, r(j));
  }
  SparseMatrix out(size(), size());
  out.setFromTriplets(entries.begin(), entries.end());
  return out;
}

CompositionMatrix lambda_transe(const KnowledgeGraph& kg) {
  const auto n = static_cast<Index>(kg.num_entities());
  const auto num_relations = static_cast<Index>(kg.num_relations());

  std::vector<Eigen::Triplet<double>> direct;
  std::vector<Eigen::Triplet<double>> usage;
  std::vector<Eigen::Triplet<double>> imbalance;
  for (Index i = 0; i < n; ++i) {
    const auto e = static_cast<EntityId>(i);
    const auto degree = static_cast<double>(kg.degree(e));
    if (degree == 0.0) continue;
    for (const auto& c : kg.neighbor_counts(e)) direct.emplace_back(i, c.id, c.count / degree);
    for (const auto& c : kg.relation_usage(e))
      usage.emplace_back(i, c.id, c.count / (degree * static_cast<double>(kg.relation_count(c.id))));
  }
  // V_rj: +1 for every r-triplet with x_j as subject, -1 for every r-triplet
  // with x_j as object (the subject of the matching reverse triplet).
  for (Index r = 0; r < num_relations; ++r)
    for (const auto& t : kg.with_relation(static_cast<RelationId>(r))) {
      imbalance.emplace_back(r, t.subject, 1.0);
      imbalance.emplace_back(r, t.object, -1.0);
    }

  SparseMatrix a(n, n);
  a.setFromTriplets(direct.begin(), direct.end());
  SparseMatrix u(n, num_relations);
  u.setFromTriplets(usage.begin(), usage.end());
  SparseMatrix v(num_relations, n);
  v.setFromTriplets(imbalance.begin(), imbalance.end());
  v.prune(0.0, 0.0);
  return CompositionMatrix::factored_form(Variant::transe, std::move(a), std::move(u), std::move(v));
}

CompositionMatrix lambda_gcn(const KnowledgeGraph& kg) {
  const auto n = static_cast<Index>(kg.num_entities());
  std::vector<Eigen::Triplet<double>> entries;
  for (Index i = 0; i < n; ++i) {
    const auto neighbors = kg.neighbor_counts(static_cast<EntityId>(i));
    const double weight = 1.0 / static_cast<double>(neighbors.size());
    for (const auto& c : neighbors) entries.emplace_back(i, c.id, weight);
  }
  SparseMatrix m(n, n);
  m.setFromTriplets(entries.begin(), entries.end());
  return CompositionMatrix::explicit_form(Variant::gcn, std::move(m));
}

CompositionMatrix build_lambda(const KnowledgeGraph& kg, Variant variant) {
  return variant == Variant::transe ? lambda_transe(kg) : lambda_gcn(kg);
}

namespace {

SparseMatrix select(const SparseMatrix& m, const std::vector<Index>& row_map, const std::vector<Index>& col_map,
                    Index rows, Index cols) {
  std::vector<Eigen::Triplet<double>> entries;
  for (Index i = 0; i < m.outerSize(); ++i) {
    const Index new_row = row_map.empty() ? i : row_map[static_cast<std::size_t>(i)];
    if (new_row < 0) continue;
    for (SparseMatrix::InnerIterator it(m, i); it; ++it) {
      const Index new_col = col_map.empty() ? it.col() : col_map[static_cast<std::size_t>(it.col())];
      if (new_col >= 0) entries.emplace_back(new_row, new_col, it.value());
    }
  }
  SparseMatrix out(rows, cols);
  out.setFromTriplets(entries.begin(), entries.end());
  return out;
}

}  // namespace

CompositionMatrix restrict_to(const CompositionMatrix& lambda, std::span<const Index> keep) {
  std::vector<Index> remap(static_cast<std::size_t>(lambda.size()), -1);
  for (std::size_t k = 0; k < keep.size(); ++k) {
    const Index e = keep[k];
    if (e < 0 || e >= lambda.size()) throw DimensionError("restrict_to: entity index out of range");
    if (remap[static_cast<std::size_t>(e)] >= 0) throw ConsistencyError("restrict_to: duplicate entity index");
    remap[static_cast<std::size_t>(e)] = static_cast<Index>(k);
  }
  const auto n = static_cast<Index>(keep.size());
  auto direct = select(lambda.direct(), remap, remap, n, n);
  if (!lambda.is_factored()) return CompositionMatrix::explicit_form(lambda.variant(), std::move(direct));
  const auto num_relations = lambda.usage().cols();
  return CompositionMatrix::factored_form(lambda.variant(), std::move(direct),
                                          select(lambda.usage(), remap, {}, n, num_relations),
                                          select(lambda.imbalance(), {}, remap, num_relations, n));
}

void write_lambda_triples(std::ostream& out, const CompositionMatrix& lambda) {
  const SparseMatrix m = lambda.materialize();
  char buffer[32];
  for (Index i = 0; i < m.outerSize(); ++i)
    for (SparseMatrix::InnerIterator it(m, i); it; ++it) {
      std::snprintf(buffer, sizeof buffer, "%.17g", it.value());
      out << i << '\t' << it.col() << '\t' << buffer << '\n';
    }
}

}  // namespace simflood
