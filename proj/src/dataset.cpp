#include "simflood/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <vector>

#include "simflood/errors.hpp"

namespace fs = std::filesystem;

namespace simflood {

namespace {

using LabelPairs = std::vector<std::pair<std::string, std::string>>;

LabelPairs read_pairs(const fs::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw ParseError(file.string(), 0, "cannot open file");
  LabelPairs pairs;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto fields = split_fields(line);
    if (fields.size() != 2)
      throw ParseError(file.string(), line_no, "expected 2 tab-separated fields, got " + std::to_string(fields.size()));
    pairs.emplace_back(std::string(fields[0]), std::string(fields[1]));
  }
  return pairs;
}

void require(const fs::path& file) {
  if (!fs::is_regular_file(file)) throw ConfigError("missing dataset file: " + file.string());
}

std::optional<fs::path> find_fold(const fs::path& dir) {
  if (fs::is_regular_file(dir / "train_links")) return dir;
  std::vector<fs::path> children;
  for (const auto& entry : fs::directory_iterator(dir))
    if (entry.is_directory()) children.push_back(entry.path());
  std::sort(children.begin(), children.end());
  for (const auto& child : children)
    if (auto found = find_fold(child)) return found;
  return std::nullopt;
}

void split_by_fraction(const LabelPairs& all, double fraction, const Dataset& ds, AlignmentSet& links,
                       const IdMaps* ids) {
  if (!(fraction >= 0.0 && fraction <= 1.0)) throw ConfigError("seed fraction must lie in [0, 1]");
  const auto num_seed = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(all.size())));
  for (std::size_t i = 0; i < all.size(); ++i) {
    const auto src = ids ? ids->entity_label(all[i].first) : std::string_view(all[i].first);
    const auto tgt = ids ? ids->entity_label(all[i].second) : std::string_view(all[i].second);
    const auto s = ds.source.entities().find(src);
    if (!s) throw ResolutionError(std::string(src));
    const auto t = ds.target.entities().find(tgt);
    if (!t) throw ResolutionError(std::string(tgt));
    links.add(i < num_seed ? Split::seed : Split::test, *s, *t);
  }
}

Dataset load_openea(const fs::path& root, const DatasetOptions& options) {
  require(root / "rel_triples_1");
  require(root / "rel_triples_2");
  require(root / "ent_links");

  KnowledgeGraphBuilder b1;
  KnowledgeGraphBuilder b2;
  if (read_triples(root / "rel_triples_1", Format::openea, b1) == 0)
    throw EmptyGraphError((root / "rel_triples_1").string() + ": no triplets");
  if (read_triples(root / "rel_triples_2", Format::openea, b2) == 0)
    throw EmptyGraphError((root / "rel_triples_2").string() + ": no triplets");
  const auto all_links = read_pairs(root / "ent_links");
  for (const auto& [s, t] : all_links) {
    b1.add_entity(s);
    b2.add_entity(t);
  }

  Dataset ds;
  ds.source = std::move(b1).build();
  ds.target = std::move(b2).build();

  if (options.seed_fraction) {
    split_by_fraction(all_links, *options.seed_fraction, ds, ds.links, nullptr);
    return ds;
  }
  std::optional<fs::path> fold;
  if (options.fold)
    fold = options.fold->is_absolute() ? *options.fold : root / *options.fold;
  else
    fold = find_fold(root);
  if (!fold || !fs::is_regular_file(*fold / "train_links"))
    throw ConfigError("no fold directory with train_links under " + root.string());
  ds.fold = *fold;
  load_alignment(*fold / "train_links", ds.source, ds.target, Split::seed, ds.links);
  if (fs::is_regular_file(*fold / "valid_links"))
    load_alignment(*fold / "valid_links", ds.source, ds.target, Split::valid, ds.links);
  require(*fold / "test_links");
  load_alignment(*fold / "test_links", ds.source, ds.target, Split::test, ds.links);
  return ds;
}

Dataset load_dbp15k(const fs::path& root, const DatasetOptions& options) {
  require(root / "ent_ids_1");
  require(root / "ent_ids_2");
  require(root / "triples_1");
  require(root / "triples_2");

  IdMaps ids;
  const auto entity_ids_1 = read_pairs(root / "ent_ids_1");
  const auto entity_ids_2 = read_pairs(root / "ent_ids_2");
  for (const auto* table : {&entity_ids_1, &entity_ids_2})
    for (const auto& [id, label] : *table)
      if (!ids.entities.emplace(id, label).second) throw ConsistencyError("duplicate entity id " + id);
  for (const auto* name : {"rel_ids_1", "rel_ids_2"})
    if (fs::is_regular_file(root / name))
      for (const auto& [id, label] : read_pairs(root / name)) ids.relations.emplace(id, label);

  KnowledgeGraphBuilder b1;
  KnowledgeGraphBuilder b2;
  if (read_triples(root / "triples_1", Format::dbp15k, b1, &ids) == 0)
    throw EmptyGraphError((root / "triples_1").string() + ": no triplets");
  if (read_triples(root / "triples_2", Format::dbp15k, b2, &ids) == 0)
    throw EmptyGraphError((root / "triples_2").string() + ": no triplets");
  for (const auto& [id, label] : entity_ids_1) b1.add_entity(label);
  for (const auto& [id, label] : entity_ids_2) b2.add_entity(label);

  Dataset ds;
  ds.source = std::move(b1).build();
  ds.target = std::move(b2).build();

  const bool shipped_split = fs::is_regular_file(root / "sup_ent_ids") && fs::is_regular_file(root / "ref_ent_ids");
  if (!options.seed_fraction && shipped_split) {
    ds.fold = root;
    load_alignment(root / "sup_ent_ids", ds.source, ds.target, Split::seed, ds.links, &ids);
    load_alignment(root / "ref_ent_ids", ds.source, ds.target, Split::test, ds.links, &ids);
    return ds;
  }
  LabelPairs all;
  if (fs::is_regular_file(root / "ill_ent_ids")) {
    all = read_pairs(root / "ill_ent_ids");
  } else if (shipped_split) {
    all = read_pairs(root / "sup_ent_ids");
    auto rest = read_pairs(root / "ref_ent_ids");
    all.insert(all.end(), rest.begin(), rest.end());
  } else {
    throw ConfigError("no link file (ill_ent_ids or sup_ent_ids/ref_ent_ids) under " + root.string());
  }
  split_by_fraction(all, options.seed_fraction.value_or(0.3), ds, ds.links, &ids);
  return ds;
}

}  // namespace

Dataset load_dataset(const fs::path& root, Format format, const DatasetOptions& options) {
  if (!fs::is_directory(root)) throw ConfigError("dataset directory not found: " + root.string());
  return format == Format::openea ? load_openea(root, options) : load_dbp15k(root, options);
}

}  // namespace simflood
