#pragma once

#include <cstddef>
#include <filesystem>
#include <span>

#include "simflood/flood.hpp"
#include "simflood/knowledge_graph.hpp"

namespace simflood {

/// Precomputed entity-name vectors for one graph, one row per entity.
struct NameVectorTable {
  Eigen::MatrixXd vectors;
  std::vector<bool> covered;
  /// Lines whose label is not an entity of the graph.
  std::size_t skipped = 0;

  Index dimension() const { return vectors.cols(); }
  std::size_t coverage() const;
};

/// Reads `label<TAB>v1<TAB>v2...` lines. Lines for unknown labels are
/// skipped and counted; differing dimensions or non-finite values throw ParseError.
NameVectorTable load_name_vectors(const std::filesystem::path& file, const KnowledgeGraph& kg);

/// Cosine similarity of every source/target pair; 0 where either side has
/// no vector (or a zero vector).
Similarity name_similarity(const NameVectorTable& source, const NameVectorTable& target);

/// gamma * text with every seed entry then forced to 1.
template <typename Scalar>
SimilarityMatrix<Scalar> fuse(const SimilarityMatrix<Scalar>& text, std::span<const EntityPair> seeds, double gamma) {
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw ConfigError("gamma must lie in [0, 1]");
  SimilarityMatrix<Scalar> base = text * static_cast<Scalar>(gamma);
  return init_omega<Scalar>(text.rows(), text.cols(), seeds, &base);
}

}  // namespace simflood
