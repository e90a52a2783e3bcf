#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "simflood/knowledge_graph.hpp"

namespace simflood {

/// A source/target graph pair with its alignment splits.
struct Dataset {
  KnowledgeGraph source;
  KnowledgeGraph target;
  AlignmentSet links;
  /// Fold directory the splits were read from (empty when derived by fraction).
  std::filesystem::path fold;
};

struct DatasetOptions {
  /// OpenEA fold directory, relative to the dataset root. When unset the
  /// first directory (sorted, depth-first) holding `train_links` is used.
  std::optional<std::filesystem::path> fold;
  /// When set, ignore the shipped splits: the first round(f * N) pairs of
  /// the full link file become seeds, the rest test pairs.
  std::optional<double> seed_fraction;
};

/// OpenEA layout: `rel_triples_1`, `rel_triples_2`, `ent_links` and fold
/// directories with `train_links`/`valid_links`/`test_links`.
///
/// DBP15K layout: `triples_1`, `triples_2` over numeric ids, `ent_ids_1`,
/// `ent_ids_2` (and optionally `rel_ids_1`, `rel_ids_2`) mapping ids to
/// labels, `sup_ent_ids` (seed) and `ref_ent_ids` (test) link files, or an
/// `ill_ent_ids` file split by `seed_fraction`.
///
/// Entities that occur only in link or id files are kept with no triplets.
Dataset load_dataset(const std::filesystem::path& root, Format format, const DatasetOptions& options = {});

}  // namespace simflood
