#include "simflood/knowledge_graph.hpp"

#include <algorithm>
#include <fstream>
#include <tuple>

#include "simflood/errors.hpp"

namespace simflood {

std::int32_t LabelTable::intern(std::string_view label) {
  auto key = std::string(label);
  if (auto it = index_.find(key); it != index_.end()) return it->second;
  const auto id = static_cast<std::int32_t>(labels_.size());
  labels_.push_back(key);
  index_.emplace(std::move(key), id);
  return id;
}

std::optional<std::int32_t> LabelTable::find(std::string_view label) const {
  if (auto it = index_.find(std::string(label)); it != index_.end()) return it->second;
  return std::nullopt;
}

std::span<const Triplet> KnowledgeGraph::outgoing(EntityId e) const {
  const auto i = static_cast<std::size_t>(e);
  return {by_subject_.data() + subject_offsets_[i], subject_offsets_[i + 1] - subject_offsets_[i]};
}

std::span<const Triplet> KnowledgeGraph::with_relation(RelationId r) const {
  const auto i = static_cast<std::size_t>(r);
  return {by_relation_.data() + relation_offsets_[i], relation_offsets_[i + 1] - relation_offsets_[i]};
}

std::span<const CountEntry> KnowledgeGraph::relation_usage(EntityId e) const {
  const auto i = static_cast<std::size_t>(e);
  return {usage_.data() + usage_offsets_[i], usage_offsets_[i + 1] - usage_offsets_[i]};
}

std::span<const CountEntry> KnowledgeGraph::neighbor_counts(EntityId e) const {
  const auto i = static_cast<std::size_t>(e);
  return {neighbors_.data() + neighbor_offsets_[i], neighbor_offsets_[i + 1] - neighbor_offsets_[i]};
}

namespace {

std::size_t lookup_count(std::span<const CountEntry> entries, std::int32_t id) {
  auto it = std::lower_bound(entries.begin(), entries.end(), id,
                             [](const CountEntry& c, std::int32_t v) { return c.id < v; });
  return it != entries.end() && it->id == id ? static_cast<std::size_t>(it->count) : 0;
}

}  // namespace

std::size_t KnowledgeGraph::relation_usage(EntityId e, RelationId r) const {
  return lookup_count(relation_usage(e), r);
}

std::size_t KnowledgeGraph::connecting_relations(EntityId xi, EntityId xj) const {
  return lookup_count(neighbor_counts(xi), xj);
}

std::size_t KnowledgeGraphBuilder::TripletHash::operator()(const Triplet& t) const noexcept {
  auto h = static_cast<std::uint64_t>(static_cast<std::uint32_t>(t.subject));
  h = h * 0x9E3779B97F4A7C15ULL ^ static_cast<std::uint32_t>(t.relation);
  h = h * 0x9E3779B97F4A7C15ULL ^ static_cast<std::uint32_t>(t.object);
  return static_cast<std::size_t>(h ^ (h >> 29));
}

bool KnowledgeGraphBuilder::add_triplet(std::string_view subject, std::string_view relation,
                                        std::string_view object) {
  const auto s = entities_.intern(subject);
  const auto r = relations_.intern(relation);
  const auto o = entities_.intern(object);
  return add_triplet(s, r, o);
}

bool KnowledgeGraphBuilder::add_triplet(EntityId subject, RelationId relation, EntityId object) {
  const Triplet t{subject, relation, object};
  if (!seen_.insert(t).second) return false;
  triplets_.push_back(t);
  return true;
}

KnowledgeGraph KnowledgeGraphBuilder::build() && {
  KnowledgeGraph kg;
  kg.entities_ = std::move(entities_);
  const auto num_original = relations_.size();
  kg.num_original_relations_ = num_original;
  kg.relations_ = relations_;
  for (std::size_t r = 0; r < num_original; ++r) {
    const auto reverse_label = relations_.label(static_cast<RelationId>(r)) + std::string(kReverseSuffix);
    if (relations_.find(reverse_label))
      throw ConsistencyError("relation label collides with a synthesized reverse: " + reverse_label);
    kg.relations_.intern(reverse_label);
  }

  const auto offset = static_cast<RelationId>(num_original);
  kg.triplets_ = triplets_;
  kg.triplets_.reserve(2 * triplets_.size());
  for (const auto& t : triplets_) kg.triplets_.push_back({t.object, t.relation + offset, t.subject});
  triplets_.clear();
  seen_.clear();

  const auto n = kg.entities_.size();
  const auto num_relations = kg.relations_.size();

  kg.by_subject_ = kg.triplets_;
  std::sort(kg.by_subject_.begin(), kg.by_subject_.end(), [](const Triplet& a, const Triplet& b) {
    return std::tie(a.subject, a.relation, a.object) < std::tie(b.subject, b.relation, b.object);
  });
  kg.by_relation_ = kg.triplets_;
  std::sort(kg.by_relation_.begin(), kg.by_relation_.end(), [](const Triplet& a, const Triplet& b) {
    return std::tie(a.relation, a.subject, a.object) < std::tie(b.relation, b.subject, b.object);
  });

  kg.subject_offsets_.assign(n + 1, 0);
  for (const auto& t : kg.by_subject_) ++kg.subject_offsets_[static_cast<std::size_t>(t.subject) + 1];
  for (std::size_t i = 0; i < n; ++i) kg.subject_offsets_[i + 1] += kg.subject_offsets_[i];

  kg.relation_offsets_.assign(num_relations + 1, 0);
  for (const auto& t : kg.by_relation_) ++kg.relation_offsets_[static_cast<std::size_t>(t.relation) + 1];
  for (std::size_t r = 0; r < num_relations; ++r) kg.relation_offsets_[r + 1] += kg.relation_offsets_[r];

  kg.usage_offsets_.assign(n + 1, 0);
  kg.neighbor_offsets_.assign(n + 1, 0);
  std::vector<CountEntry> scratch;
  for (std::size_t e = 0; e < n; ++e) {
    const auto out = kg.outgoing(static_cast<EntityId>(e));
    // by_subject_ is sorted by (relation, object) within a subject.
    for (const auto& t : out) {
      if (kg.usage_.size() > kg.usage_offsets_[e] && kg.usage_.back().id == t.relation)
        ++kg.usage_.back().count;
      else
        kg.usage_.push_back({t.relation, 1});
    }
    kg.usage_offsets_[e + 1] = kg.usage_.size();

    scratch.clear();
    for (const auto& t : out) scratch.push_back({t.object, 1});
    std::sort(scratch.begin(), scratch.end(), [](const CountEntry& a, const CountEntry& b) { return a.id < b.id; });
    for (const auto& c : scratch) {
      if (kg.neighbors_.size() > kg.neighbor_offsets_[e] && kg.neighbors_.back().id == c.id)
        ++kg.neighbors_.back().count;
      else
        kg.neighbors_.push_back(c);
    }
    kg.neighbor_offsets_[e + 1] = kg.neighbors_.size();
  }
  return kg;
}

Format parse_format(std::string_view name) {
  if (name == "openea") return Format::openea;
  if (name == "dbp15k") return Format::dbp15k;
  throw ConfigError("unknown dataset format: " + std::string(name));
}

std::string_view to_string(Format format) { return format == Format::openea ? "openea" : "dbp15k"; }

std::string_view to_string(Split split) {
  switch (split) {
    case Split::seed: return "seed";
    case Split::valid: return "valid";
    case Split::test: return "test";
  }
  return "?";
}

std::string_view IdMaps::entity_label(std::string_view id) const {
  if (auto it = entities.find(std::string(id)); it != entities.end()) return it->second;
  return id;
}

std::string_view IdMaps::relation_label(std::string_view id) const {
  if (auto it = relations.find(std::string(id)); it != relations.end()) return it->second;
  return id;
}

std::vector<std::string_view> split_fields(std::string_view line) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const auto tab = line.find('\t', start);
    if (tab == std::string_view::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
  return fields;
}

namespace {

bool blank(std::string_view line) {
  return line.find_first_not_of(" \t\r") == std::string_view::npos;
}

std::ifstream open_input(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw ParseError(file.string(), 0, "cannot open file");
  return in;
}

}  // namespace

std::size_t read_triples(const std::filesystem::path& file, Format format, KnowledgeGraphBuilder& builder,
                         const IdMaps* ids) {
  auto in = open_input(file);
  std::string line;
  std::size_t line_no = 0;
  std::size_t read = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (blank(line)) continue;
    const auto fields = split_fields(line);
    if (fields.size() != 3)
      throw ParseError(file.string(), line_no, "expected 3 tab-separated fields, got " + std::to_string(fields.size()));
    if (format == Format::dbp15k && ids) {
      builder.add_triplet(ids->entity_label(fields[0]), ids->relation_label(fields[1]), ids->entity_label(fields[2]));
    } else {
      builder.add_triplet(fields[0], fields[1], fields[2]);
    }
    ++read;
  }
  return read;
}

KnowledgeGraph load_kg(const std::filesystem::path& triple_file, Format format, const IdMaps* ids) {
  KnowledgeGraphBuilder builder;
  if (read_triples(triple_file, format, builder, ids) == 0)
    throw EmptyGraphError(triple_file.string() + ": no triplets");
  return std::move(builder).build();
}

void AlignmentSet::add(Split split, EntityId source, EntityId target) {
  if (auto it = used_source_.find(source); it != used_source_.end())
    throw ConsistencyError("source entity " + std::to_string(source) + " already aligned in the " +
                           std::string(to_string(it->second)) + " split");
  if (auto it = used_target_.find(target); it != used_target_.end())
    throw ConsistencyError("target entity " + std::to_string(target) + " already aligned in the " +
                           std::string(to_string(it->second)) + " split");
  used_source_.emplace(source, split);
  used_target_.emplace(target, split);
  switch (split) {
    case Split::seed: seed_.emplace_back(source, target); break;
    case Split::valid: valid_.emplace_back(source, target); break;
    case Split::test: test_.emplace_back(source, target); break;
  }
}

const std::vector<EntityPair>& AlignmentSet::pairs(Split split) const {
  switch (split) {
    case Split::seed: return seed_;
    case Split::valid: return valid_;
    case Split::test: break;
  }
  return test_;
}

std::size_t load_alignment(const std::filesystem::path& links_file, const KnowledgeGraph& source,
                           const KnowledgeGraph& target, Split split, AlignmentSet& alignment, const IdMaps* ids) {
  auto in = open_input(links_file);
  std::string line;
  std::size_t line_no = 0;
  std::size_t read = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (blank(line)) continue;
    const auto fields = split_fields(line);
    if (fields.size() != 2)
      throw ParseError(links_file.string(), line_no,
                       "expected 2 tab-separated fields, got " + std::to_string(fields.size()));
    const auto source_label = ids ? ids->entity_label(fields[0]) : fields[0];
    const auto target_label = ids ? ids->entity_label(fields[1]) : fields[1];
    const auto s = source.entities().find(source_label);
    if (!s) throw ResolutionError(std::string(source_label));
    const auto t = target.entities().find(target_label);
    if (!t) throw ResolutionError(std::string(target_label));
    try {
      alignment.add(split, *s, *t);
    } catch (const ConsistencyError& e) {
      throw ConsistencyError(links_file.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
    ++read;
  }
  return read;
}

GraphStats stats(const KnowledgeGraph& kg) {
  GraphStats s;
  s.entities = kg.num_entities();
  s.relations = kg.num_relations();
  s.triplets = kg.num_triplets();
  for (std::size_t e = 0; e < kg.num_entities(); ++e) ++s.degree_histogram[kg.degree(static_cast<EntityId>(e))];
  return s;
}

}  // namespace simflood
