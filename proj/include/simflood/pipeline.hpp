#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string_view>
#include <vector>

#include "simflood/classic_sf.hpp"
#include "simflood/dataset.hpp"
#include "simflood/evaluation.hpp"
#include "simflood/flood.hpp"

namespace simflood {

enum class Mode { transflood, gcnflood, classic_sf };

Mode parse_mode(std::string_view name);
std::string_view to_string(Mode mode);

struct RunConfig {
  std::filesystem::path dataset;
  Format format = Format::openea;
  Mode mode = Mode::transflood;
  FloodConfig flood;
  double gamma = 0.5;
  std::optional<std::filesystem::path> name_vectors;
  std::optional<std::filesystem::path> relation_map;
  std::optional<std::filesystem::path> save_omega;
  std::optional<std::filesystem::path> load_omega;
  std::optional<std::filesystem::path> report_out;
  CandidatePool candidates = CandidatePool::test;
  std::optional<double> seed_fraction;
  std::optional<std::filesystem::path> fold;
  /// Keep only seed and test target columns in Omega.
  bool restrict_columns = false;

  /// Throws ConfigError on inconsistent settings.
  void validate() const;
};

/// Writes the resolved configuration as a `[flood]` table of `key = value`
/// lines; `simflood flood --config FILE` replays the run.
void write_config(std::ostream& out, const RunConfig& config);

struct StageTimings {
  double load = 0.0;
  double lambda = 0.0;
  double flood = 0.0;
  double eval = 0.0;
  double total = 0.0;
};

struct RunOutcome {
  Similarity omega;
  /// Target entity of each Omega column.
  std::vector<EntityId> columns;
  int iterations = 0;
  bool converged = false;
  double last_delta = 0.0;
  RankingReport report;
  StageTimings timings;
  std::size_t unmapped_relations = 0;
  std::size_t pcg_nodes = 0;
  std::size_t pcg_edges = 0;
  std::size_t name_vector_coverage[2] = {0, 0};
};

/// Compositions (or PCG), flooding (or checkpoint load), ranking and, when
/// configured, checkpoint/report export.
RunOutcome run_alignment(const RunConfig& config, const Dataset& dataset);

/// Loads the dataset, then run_alignment; `timings.load` covers the load.
RunOutcome run_alignment(const RunConfig& config);

/// Writes the report, its `.metrics` summary and `.config` echo next to
/// `config.report_out`.
void export_report(const RunConfig& config, const Dataset& dataset, const RunOutcome& outcome);

}  // namespace simflood
