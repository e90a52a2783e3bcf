#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

namespace simflood {

using EntityId = std::int32_t;
using RelationId = std::int32_t;

struct Triplet {
  EntityId subject;
  RelationId relation;
  EntityId object;

  friend bool operator==(const Triplet&, const Triplet&) = default;
};

/// Bijective label <-> dense id mapping, ids assigned in insertion order.
class LabelTable {
 public:
  std::int32_t intern(std::string_view label);
  std::optional<std::int32_t> find(std::string_view label) const;
  const std::string& label(std::int32_t id) const { return labels_[static_cast<std::size_t>(id)]; }
  std::size_t size() const { return labels_.size(); }
  std::span<const std::string> labels() const { return labels_; }

 private:
  std::vector<std::string> labels_;
  std::unordered_map<std::string, std::int32_t> index_;
};

/// (relation, count) or (neighbor, count) entry of a per-entity index.
struct CountEntry {
  std::int32_t id;
  std::int32_t count;
};

/// A reverse-augmented, deduplicated triplet store with the counting indexes
/// used by the composition coefficients. Immutable once built.
///
/// Relation ids: originals are 0..R-1 in first-seen order, the reverse of
/// relation k is k+R and the reverse of k+R is k.
class KnowledgeGraph {
 public:
  KnowledgeGraph() = default;

  std::size_t num_entities() const { return entities_.size(); }
  /// Originals plus reverses.
  std::size_t num_relations() const { return relations_.size(); }
  std::size_t num_original_relations() const { return num_original_relations_; }
  std::size_t num_triplets() const { return triplets_.size(); }

  const LabelTable& entities() const { return entities_; }
  const LabelTable& relations() const { return relations_; }

  std::span<const Triplet> triplets() const { return triplets_; }

  RelationId reverse(RelationId r) const {
    const auto base = static_cast<RelationId>(num_original_relations_);
    return r < base ? r + base : r - base;
  }
  bool is_reverse(RelationId r) const { return static_cast<std::size_t>(r) >= num_original_relations_; }

  /// T_e: triplets with `e` as subject, ordered by (relation, object).
  std::span<const Triplet> outgoing(EntityId e) const;
  /// Triplets carrying relation `r`, ordered by (subject, object).
  std::span<const Triplet> with_relation(RelationId r) const;

  /// |T_e|
  std::size_t degree(EntityId e) const { return outgoing(e).size(); }
  /// |T_r|
  std::size_t relation_count(RelationId r) const { return with_relation(r).size(); }
  /// (r, |T_{e,r}|) for every relation used by `e` as subject, sorted by r.
  std::span<const CountEntry> relation_usage(EntityId e) const;
  /// |T_{e,r}|
  std::size_t relation_usage(EntityId e, RelationId r) const;
  /// (x_j, |R(e, x_j)|) for every distinct neighbor of `e`, sorted by x_j.
  std::span<const CountEntry> neighbor_counts(EntityId e) const;
  /// |N(e)|
  std::size_t num_neighbors(EntityId e) const { return neighbor_counts(e).size(); }
  /// |R(x_i, x_j)|
  std::size_t connecting_relations(EntityId xi, EntityId xj) const;

 private:
  friend class KnowledgeGraphBuilder;

  LabelTable entities_;
  LabelTable relations_;
  std::size_t num_original_relations_ = 0;
  std::vector<Triplet> triplets_;

  // CSR views: triplets sorted by subject and by relation.
  std::vector<Triplet> by_subject_;
  std::vector<std::size_t> subject_offsets_;
  std::vector<Triplet> by_relation_;
  std::vector<std::size_t> relation_offsets_;
  std::vector<CountEntry> usage_;
  std::vector<std::size_t> usage_offsets_;
  std::vector<CountEntry> neighbors_;
  std::vector<std::size_t> neighbor_offsets_;
};

/// Accumulates labelled triplets, drops duplicates, then augments with
/// reverse triplets and builds all indexes.
class KnowledgeGraphBuilder {
 public:
  EntityId add_entity(std::string_view label) { return entities_.intern(label); }
  RelationId add_relation(std::string_view label) { return relations_.intern(label); }
  /// Returns false when the triplet was already present.
  bool add_triplet(std::string_view subject, std::string_view relation, std::string_view object);
  bool add_triplet(EntityId subject, RelationId relation, EntityId object);

  std::size_t num_triplets() const { return triplets_.size(); }

  KnowledgeGraph build() &&;

 private:
  struct TripletHash {
    std::size_t operator()(const Triplet& t) const noexcept;
  };

  LabelTable entities_;
  LabelTable relations_;
  std::vector<Triplet> triplets_;
  std::unordered_set<Triplet, TripletHash> seen_;
};

/// Suffix appended to an original relation label to name its reverse.
inline constexpr std::string_view kReverseSuffix = "^-1";

enum class Format { openea, dbp15k };

Format parse_format(std::string_view name);
std::string_view to_string(Format format);

/// Numeric-id to label maps of the DBP15K layout (ids are global across both graphs).
struct IdMaps {
  std::unordered_map<std::string, std::string> entities;
  std::unordered_map<std::string, std::string> relations;

  std::string_view entity_label(std::string_view id) const;
  std::string_view relation_label(std::string_view id) const;
};

/// Reads one triple file into a builder. Each non-empty line must hold
/// exactly three tab-separated fields; `\r\n` endings are accepted.
/// Returns the number of lines read.
std::size_t read_triples(const std::filesystem::path& file, Format format, KnowledgeGraphBuilder& builder,
                         const IdMaps* ids = nullptr);

KnowledgeGraph load_kg(const std::filesystem::path& triple_file, Format format, const IdMaps* ids = nullptr);

/// Splits a line on single tabs, stripping a trailing `\r`.
std::vector<std::string_view> split_fields(std::string_view line);

enum class Split { seed, valid, test };

std::string_view to_string(Split split);

using EntityPair = std::pair<EntityId, EntityId>;

/// Seed/valid/test entity pairs. An entity appears at most once per side
/// across all three lists.
class AlignmentSet {
 public:
  /// Throws ConsistencyError when either side is already used.
  void add(Split split, EntityId source, EntityId target);

  const std::vector<EntityPair>& pairs(Split split) const;
  const std::vector<EntityPair>& seed() const { return seed_; }
  const std::vector<EntityPair>& valid() const { return valid_; }
  const std::vector<EntityPair>& test() const { return test_; }
  std::size_t size() const { return seed_.size() + valid_.size() + test_.size(); }

 private:
  std::vector<EntityPair> seed_;
  std::vector<EntityPair> valid_;
  std::vector<EntityPair> test_;
  std::unordered_map<EntityId, Split> used_source_;
  std::unordered_map<EntityId, Split> used_target_;
};

/// Appends the pairs of a two-column link file to `split`. Labels are
/// resolved against the source and target graphs (through `ids` first, for
/// numeric DBP15K links). Returns the number of pairs read.
std::size_t load_alignment(const std::filesystem::path& links_file, const KnowledgeGraph& source,
                           const KnowledgeGraph& target, Split split, AlignmentSet& alignment,
                           const IdMaps* ids = nullptr);

struct GraphStats {
  std::size_t entities = 0;
  std::size_t relations = 0;
  std::size_t triplets = 0;
  /// out-degree |T_e| -> number of entities
  std::map<std::size_t, std::size_t> degree_histogram;
};

GraphStats stats(const KnowledgeGraph& kg);

}  // namespace simflood
