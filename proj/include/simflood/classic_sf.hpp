#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "simflood/flood.hpp"
#include "simflood/knowledge_graph.hpp"

namespace simflood {

/// Maps source relation labels to target relation labels. Without explicit
/// entries, relations are matched by identical label.
struct RelationAlignment {
  std::unordered_map<std::string, std::string> labels;
  bool by_label = true;

  /// Target relation for an original (non-reverse) source relation label.
  std::optional<std::string> map(const std::string& source_label) const;
};

/// Reads `relation_label_1<TAB>relation_label_2` lines; the result maps only
/// the listed relations.
RelationAlignment load_relation_map(const std::filesystem::path& file);

struct PcgNode {
  EntityId source;
  EntityId target;
  friend bool operator==(const PcgNode&, const PcgNode&) = default;
};

struct PcgEdge {
  Index from;
  Index to;
  /// Source-graph relation the edge was induced by.
  RelationId relation;
  double coefficient;
};

/// Graph over mapping pairs (x, y). An edge ((x1,y1), r, (x2,y2)) exists iff
/// (x1,r,x2) is in the source graph and (y1,r',y2) in the target graph with
/// r' the aligned relation. An r-labelled edge leaving p carries weight
/// 1 / (number of r-labelled edges leaving p).
class PairwiseConnectivityGraph {
 public:
  std::span<const PcgNode> nodes() const { return nodes_; }
  /// Sorted by (to, from, relation).
  std::span<const PcgEdge> edges() const { return edges_; }
  std::optional<Index> find(EntityId source, EntityId target) const;

  Index source_size() const { return source_size_; }
  Index target_size() const { return target_size_; }
  /// Original source relations with no counterpart in the target graph.
  std::size_t unmapped_relations() const { return unmapped_relations_; }

  /// phi: pushes every node value along its outgoing edges, scaled by the
  /// edge coefficients.
  Eigen::VectorXd propagate(const Eigen::VectorXd& values) const;

 private:
  friend PairwiseConnectivityGraph build_pcg(const KnowledgeGraph&, const KnowledgeGraph&, const RelationAlignment&,
                                             std::span<const EntityPair>, std::size_t);

  std::vector<PcgNode> nodes_;
  std::vector<PcgEdge> edges_;
  Index source_size_ = 0;
  Index target_size_ = 0;
  std::size_t unmapped_relations_ = 0;
};

/// Nodes are the pairs incident to at least one induced edge plus the seed
/// pairs. Throws ConfigError when more than `max_edges` edges would be induced.
PairwiseConnectivityGraph build_pcg(const KnowledgeGraph& source, const KnowledgeGraph& target,
                                    const RelationAlignment& relations, std::span<const EntityPair> seeds = {},
                                    std::size_t max_edges = std::size_t{1} << 28);

/// Iterates Omega_t = normalize(Omega_0 + Omega_{t-1} + phi(Omega_0 + Omega_{t-1}))
/// starting from Omega_0 itself, with the same stopping rule as run_flood.
template <typename Scalar>
FloodResult<Scalar> sf_fixpoint(const PairwiseConnectivityGraph& pcg, const SimilarityMatrix<Scalar>& omega0,
                                const FloodConfig& config);

extern template FloodResult<float> sf_fixpoint<float>(const PairwiseConnectivityGraph&, const Similarity&,
                                                      const FloodConfig&);
extern template FloodResult<double> sf_fixpoint<double>(const PairwiseConnectivityGraph&,
                                                        const SimilarityMatrix<double>&, const FloodConfig&);

}  // namespace simflood
