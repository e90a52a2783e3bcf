#include "simflood/pipeline.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>
#include <ostream>

#include "simflood/checkpoint.hpp"
#include "simflood/composition.hpp"
#include "simflood/text_fusion.hpp"

namespace simflood {

Mode parse_mode(std::string_view name) {
  if (name == "transflood") return Mode::transflood;
  if (name == "gcnflood") return Mode::gcnflood;
  if (name == "classic-sf") return Mode::classic_sf;
  throw ConfigError("unknown mode: " + std::string(name));
}

std::string_view to_string(Mode mode) {
  switch (mode) {
    case Mode::transflood: return "transflood";
    case Mode::gcnflood: return "gcnflood";
    case Mode::classic_sf: return "classic-sf";
  }
  return "?";
}

void RunConfig::validate() const {
  flood.validate();
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw ConfigError("gamma must lie in [0, 1]");
  if (seed_fraction && !(*seed_fraction >= 0.0 && *seed_fraction <= 1.0))
    throw ConfigError("seed fraction must lie in [0, 1]");
  if (restrict_columns && mode == Mode::classic_sf) throw ConfigError("column restriction is not supported for classic-sf");
  if (restrict_columns && (save_omega || load_omega))
    throw ConfigError("omega checkpoints hold full matrices; drop --restrict-columns");
  if (relation_map && mode != Mode::classic_sf) throw ConfigError("--relation-map only applies to classic-sf");
}

void write_config(std::ostream& out, const RunConfig& config) {
  auto quoted = [](const std::filesystem::path& p) { return "\"" + p.generic_string() + "\""; };
  char buffer[64];
  out << "[flood]\n";
  out << "dataset = " << quoted(config.dataset) << '\n';
  out << "format = \"" << to_string(config.format) << "\"\n";
  out << "mode = \"" << to_string(config.mode) << "\"\n";
  out << "max-iter = " << config.flood.max_iterations << '\n';
  std::snprintf(buffer, sizeof buffer, "%.17g", config.flood.epsilon);
  out << "epsilon = " << buffer << '\n';
  out << "reinject-seeds = " << (config.flood.reinject_seeds ? "true" : "false") << '\n';
  out << "block-height = " << config.flood.block_height << '\n';
  out << "workers = " << config.flood.workers << '\n';
  std::snprintf(buffer, sizeof buffer, "%.17g", config.gamma);
  out << "gamma = " << buffer << '\n';
  out << "candidates = \"" << to_string(config.candidates) << "\"\n";
  out << "restrict-columns = " << (config.restrict_columns ? "true" : "false") << '\n';
  if (config.name_vectors) out << "name-vectors = " << quoted(*config.name_vectors) << '\n';
  if (config.relation_map) out << "relation-map = " << quoted(*config.relation_map) << '\n';
  if (config.save_omega) out << "save-omega = " << quoted(*config.save_omega) << '\n';
  if (config.load_omega) out << "load-omega = " << quoted(*config.load_omega) << '\n';
  if (config.report_out) out << "report-out = " << quoted(*config.report_out) << '\n';
  if (config.fold) out << "fold = " << quoted(*config.fold) << '\n';
  if (config.seed_fraction) {
    std::snprintf(buffer, sizeof buffer, "%.17g", *config.seed_fraction);
    out << "seed-fraction = " << buffer << '\n';
  }
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

// Maps target entity ids to Omega columns.
struct ColumnMap {
  std::vector<EntityId> columns;
  std::vector<Index> column_of;

  Index at(EntityId e) const {
    const Index c = column_of[static_cast<std::size_t>(e)];
    if (c < 0) throw DimensionError("target entity outside the restricted columns");
    return c;
  }
};

ColumnMap make_columns(const Dataset& dataset, bool restrict) {
  ColumnMap map;
  const auto m = dataset.target.num_entities();
  map.column_of.assign(m, -1);
  if (!restrict) {
    for (std::size_t e = 0; e < m; ++e) {
      map.columns.push_back(static_cast<EntityId>(e));
      map.column_of[e] = static_cast<Index>(e);
    }
    return map;
  }
  std::vector<bool> keep(m, false);
  for (const auto& p : dataset.links.seed()) keep[static_cast<std::size_t>(p.second)] = true;
  for (const auto& p : dataset.links.test()) keep[static_cast<std::size_t>(p.second)] = true;
  for (std::size_t e = 0; e < m; ++e)
    if (keep[e]) {
      map.column_of[e] = static_cast<Index>(map.columns.size());
      map.columns.push_back(static_cast<EntityId>(e));
    }
  return map;
}

std::vector<EntityPair> to_columns(const std::vector<EntityPair>& pairs, const ColumnMap& map) {
  std::vector<EntityPair> out;
  out.reserve(pairs.size());
  for (const auto& [s, t] : pairs) out.emplace_back(s, static_cast<EntityId>(map.at(t)));
  return out;
}

}  // namespace

RunOutcome run_alignment(const RunConfig& config, const Dataset& dataset) {
  config.validate();
  RunOutcome outcome;
  const auto start = Clock::now();

  const ColumnMap columns = make_columns(dataset, config.restrict_columns);
  outcome.columns = columns.columns;
  const auto seeds = to_columns(dataset.links.seed(), columns);
  const auto test = to_columns(dataset.links.test(), columns);
  const auto n = static_cast<Index>(dataset.source.num_entities());
  const auto m = static_cast<Index>(columns.columns.size());

  if (config.load_omega) {
    auto checkpoint = load_checkpoint(*config.load_omega);
    if (checkpoint.omega.rows() != n || checkpoint.omega.cols() != m)
      throw DimensionError("checkpoint shape does not match the dataset");
    outcome.omega = std::move(checkpoint.omega);
    outcome.iterations = static_cast<int>(checkpoint.iteration);
  } else {
    std::optional<Similarity> base;
    if (config.name_vectors) {
      const auto t1 = load_name_vectors(*config.name_vectors, dataset.source);
      const auto t2 = load_name_vectors(*config.name_vectors, dataset.target);
      outcome.name_vector_coverage[0] = t1.coverage();
      outcome.name_vector_coverage[1] = t2.coverage();
      Similarity text = name_similarity(t1, t2);
      if (config.restrict_columns) {
        Similarity restricted(n, m);
        for (Index c = 0; c < m; ++c) restricted.col(c) = text.col(columns.columns[static_cast<std::size_t>(c)]);
        text = std::move(restricted);
      }
      base = fuse(text, seeds, config.gamma);
    }

    if (config.mode == Mode::classic_sf) {
      const auto relations = config.relation_map ? load_relation_map(*config.relation_map) : RelationAlignment{};
      auto phase = Clock::now();
      const auto pcg = build_pcg(dataset.source, dataset.target, relations, seeds);
      outcome.timings.lambda = seconds_since(phase);
      outcome.unmapped_relations = pcg.unmapped_relations();
      outcome.pcg_nodes = pcg.nodes().size();
      outcome.pcg_edges = pcg.edges().size();
      phase = Clock::now();
      const Similarity omega0 = base ? *base : init_omega<float>(n, m, seeds);
      auto result = sf_fixpoint(pcg, omega0, config.flood);
      outcome.timings.flood = seconds_since(phase);
      outcome.omega = std::move(result.omega);
      outcome.iterations = result.iterations;
      outcome.converged = result.converged;
      outcome.last_delta = result.last_delta;
    } else {
      const auto variant = config.mode == Mode::transflood ? Variant::transe : Variant::gcn;
      auto phase = Clock::now();
      const auto source_lambda = build_lambda(dataset.source, variant);
      auto target_lambda = build_lambda(dataset.target, variant);
      if (config.restrict_columns) {
        std::vector<Index> keep(columns.columns.begin(), columns.columns.end());
        target_lambda = restrict_to(target_lambda, keep);
      }
      outcome.timings.lambda = seconds_since(phase);
      phase = Clock::now();
      auto result = run_flood<float>(source_lambda, target_lambda, seeds, config.flood, base ? &*base : nullptr);
      outcome.timings.flood = seconds_since(phase);
      outcome.omega = std::move(result.omega);
      outcome.iterations = result.iterations;
      outcome.converged = result.converged;
      outcome.last_delta = result.last_delta;
    }
  }

  auto phase = Clock::now();
  outcome.report = rank_targets(outcome.omega, test, config.candidates, 10, config.flood.workers);
  outcome.timings.eval = seconds_since(phase);

  if (config.save_omega)
    save_checkpoint(*config.save_omega,
                    {outcome.omega, static_cast<std::uint64_t>(config.flood.block_height),
                     static_cast<std::uint64_t>(outcome.iterations)});
  if (config.report_out) export_report(config, dataset, outcome);
  outcome.timings.total = seconds_since(start);
  return outcome;
}

RunOutcome run_alignment(const RunConfig& config) {
  config.validate();
  const auto start = Clock::now();
  const Dataset dataset = load_dataset(config.dataset, config.format, {config.fold, config.seed_fraction});
  const double load = seconds_since(start);
  auto outcome = run_alignment(config, dataset);
  outcome.timings.load = load;
  outcome.timings.total += load;
  return outcome;
}

void export_report(const RunConfig& config, const Dataset& dataset, const RunOutcome& outcome) {
  const auto& path = *config.report_out;
  std::vector<std::string> column_labels;
  column_labels.reserve(outcome.columns.size());
  for (const auto e : outcome.columns) column_labels.push_back(dataset.target.entities().label(e));

  std::ofstream report(path, std::ios::binary);
  if (!report) throw Error("cannot open " + path.string() + " for writing");
  write_report(report, outcome.report, dataset.source.entities().labels(), column_labels);

  std::ofstream metrics(path.string() + ".metrics", std::ios::binary);
  write_metrics(metrics, outcome.report);
  std::ofstream echo(path.string() + ".config", std::ios::binary);
  write_config(echo, config);
  if (!report || !metrics || !echo) throw Error("failed to write report files next to " + path.string());
}

}  // namespace simflood
