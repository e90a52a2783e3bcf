#include "simflood/classic_sf.hpp"

#include <algorithm>
#include <fstream>
#include <tuple>
#include <unordered_map>

#include "simflood/parallel.hpp"

namespace simflood {

std::optional<std::string> RelationAlignment::map(const std::string& source_label) const {
  if (auto it = labels.find(source_label); it != labels.end()) return it->second;
  if (by_label) return source_label;
  return std::nullopt;
}

RelationAlignment load_relation_map(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw ParseError(file.string(), 0, "cannot open file");
  RelationAlignment alignment;
  alignment.by_label = false;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto fields = split_fields(line);
    if (fields.size() != 2)
      throw ParseError(file.string(), line_no, "expected 2 tab-separated fields, got " + std::to_string(fields.size()));
    if (!alignment.labels.emplace(std::string(fields[0]), std::string(fields[1])).second)
      throw ConsistencyError(file.string() + ":" + std::to_string(line_no) + ": relation mapped twice");
  }
  return alignment;
}

std::optional<Index> PairwiseConnectivityGraph::find(EntityId source, EntityId target) const {
  const PcgNode key{source, target};
  auto it = std::lower_bound(nodes_.begin(), nodes_.end(), key, [](const PcgNode& a, const PcgNode& b) {
    return std::tie(a.source, a.target) < std::tie(b.source, b.target);
  });
  if (it == nodes_.end() || !(*it == key)) return std::nullopt;
  return static_cast<Index>(it - nodes_.begin());
}

Eigen::VectorXd PairwiseConnectivityGraph::propagate(const Eigen::VectorXd& values) const {
  if (values.size() != static_cast<Index>(nodes_.size())) throw DimensionError("propagate: value count mismatch");
  Eigen::VectorXd out = Eigen::VectorXd::Zero(values.size());
  for (const auto& e : edges_) out(e.to) += e.coefficient * values(e.from);
  return out;
}

namespace {

std::uint64_t pack(EntityId x, EntityId y) {
  return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(x)) << 32) | static_cast<std::uint32_t>(y);
}

}  // namespace

PairwiseConnectivityGraph build_pcg(const KnowledgeGraph& source, const KnowledgeGraph& target,
                                    const RelationAlignment& relations, std::span<const EntityPair> seeds,
                                    std::size_t max_edges) {
  PairwiseConnectivityGraph pcg;
  pcg.source_size_ = static_cast<Index>(source.num_entities());
  pcg.target_size_ = static_cast<Index>(target.num_entities());

  // Source relation -> target relation over the augmented relation sets.
  std::vector<std::optional<RelationId>> counterpart(source.num_relations());
  for (std::size_t r = 0; r < source.num_original_relations(); ++r) {
    const auto mapped = relations.map(source.relations().label(static_cast<RelationId>(r)));
    const auto found = mapped ? target.relations().find(*mapped) : std::nullopt;
    if (!found || target.is_reverse(*found)) {
      ++pcg.unmapped_relations_;
      continue;
    }
    counterpart[r] = *found;
    counterpart[static_cast<std::size_t>(source.reverse(static_cast<RelationId>(r)))] = target.reverse(*found);
  }

  std::size_t total = 0;
  for (std::size_t r = 0; r < source.num_relations(); ++r)
    if (counterpart[r])
      total += source.relation_count(static_cast<RelationId>(r)) * target.relation_count(*counterpart[r]);
  if (total > max_edges)
    throw ConfigError("pairwise connectivity graph would hold " + std::to_string(total) + " edges (limit " +
                      std::to_string(max_edges) + ")");

  struct RawEdge {
    std::uint64_t from;
    std::uint64_t to;
    RelationId relation;
  };
  std::vector<RawEdge> raw;
  raw.reserve(total);
  for (std::size_t r = 0; r < source.num_relations(); ++r) {
    if (!counterpart[r]) continue;
    for (const auto& t1 : source.with_relation(static_cast<RelationId>(r)))
      for (const auto& t2 : target.with_relation(*counterpart[r]))
        raw.push_back({pack(t1.subject, t2.subject), pack(t1.object, t2.object), static_cast<RelationId>(r)});
  }

  std::vector<std::uint64_t> keys;
  keys.reserve(2 * raw.size() + seeds.size());
  for (const auto& e : raw) {
    keys.push_back(e.from);
    keys.push_back(e.to);
  }
  for (const auto& [x, y] : seeds) keys.push_back(pack(x, y));
  std::sort(keys.begin(), keys.end());
  keys.erase(std::unique(keys.begin(), keys.end()), keys.end());

  pcg.nodes_.reserve(keys.size());
  std::unordered_map<std::uint64_t, Index> node_index;
  node_index.reserve(keys.size());
  for (const auto key : keys) {
    node_index.emplace(key, static_cast<Index>(pcg.nodes_.size()));
    pcg.nodes_.push_back({static_cast<EntityId>(key >> 32), static_cast<EntityId>(key & 0xffffffffU)});
  }

  // Out-degree per (node, relation) for the inverse-count coefficients.
  std::unordered_map<std::uint64_t, std::int64_t> out_count;
  auto count_key = [](Index node, RelationId r) {
    return (static_cast<std::uint64_t>(node) << 32) | static_cast<std::uint32_t>(r);
  };
  pcg.edges_.reserve(raw.size());
  for (const auto& e : raw) {
    const Index from = node_index.at(e.from);
    const Index to = node_index.at(e.to);
    ++out_count[count_key(from, e.relation)];
    pcg.edges_.push_back({from, to, e.relation, 0.0});
  }
  for (auto& e : pcg.edges_) e.coefficient = 1.0 / static_cast<double>(out_count.at(count_key(e.from, e.relation)));
  std::sort(pcg.edges_.begin(), pcg.edges_.end(), [](const PcgEdge& a, const PcgEdge& b) {
    return std::tie(a.to, a.from, a.relation) < std::tie(b.to, b.from, b.relation);
  });
  return pcg;
}

template <typename Scalar>
FloodResult<Scalar> sf_fixpoint(const PairwiseConnectivityGraph& pcg, const SimilarityMatrix<Scalar>& omega0,
                                const FloodConfig& config) {
  config.validate();
  const Index n = omega0.rows();
  const Index m = omega0.cols();
  if (n != pcg.source_size() || m != pcg.target_size()) throw DimensionError("sf_fixpoint: omega0 shape mismatch");

  const auto nodes = pcg.nodes();
  const auto edges = pcg.edges();
  // Nodes are sorted by source entity, so each row owns a contiguous node range.
  std::vector<std::size_t> row_nodes(static_cast<std::size_t>(n) + 1, 0);
  for (const auto& node : nodes) ++row_nodes[static_cast<std::size_t>(node.source) + 1];
  for (Index i = 0; i < n; ++i) row_nodes[static_cast<std::size_t>(i) + 1] += row_nodes[static_cast<std::size_t>(i)];
  std::vector<std::size_t> incoming(nodes.size() + 1, 0);
  for (const auto& e : edges) ++incoming[static_cast<std::size_t>(e.to) + 1];
  for (std::size_t k = 0; k < nodes.size(); ++k) incoming[k + 1] += incoming[k];

  FloodResult<Scalar> result;
  result.omega = omega0;
  for (int t = 1; t <= config.max_iterations; ++t) {
    const auto& previous = result.omega;
    SimilarityMatrix<Scalar> next(n, m);
    parallel_blocks(n, config.block_height, config.workers, [&](Index begin, Index end) {
      for (Index i = begin; i < end; ++i) {
        for (Index j = 0; j < m; ++j)
          next(i, j) = static_cast<Scalar>(static_cast<double>(omega0(i, j)) + static_cast<double>(previous(i, j)));
        for (auto k = row_nodes[static_cast<std::size_t>(i)]; k < row_nodes[static_cast<std::size_t>(i) + 1]; ++k) {
          const auto& node = nodes[k];
          double sum = static_cast<double>(omega0(i, node.target)) + static_cast<double>(previous(i, node.target));
          for (auto e = incoming[k]; e < incoming[k + 1]; ++e) {
            const auto& from = nodes[static_cast<std::size_t>(edges[e].from)];
            sum += edges[e].coefficient * (static_cast<double>(omega0(from.source, from.target)) +
                                           static_cast<double>(previous(from.source, from.target)));
          }
          next(i, node.target) = static_cast<Scalar>(sum);
        }
      }
    });
    normalize(next);
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

template FloodResult<float> sf_fixpoint<float>(const PairwiseConnectivityGraph&, const Similarity&,
                                               const FloodConfig&);
template FloodResult<double> sf_fixpoint<double>(const PairwiseConnectivityGraph&, const SimilarityMatrix<double>&,
                                                 const FloodConfig&);

}  // namespace simflood
