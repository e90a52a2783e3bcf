#include "simflood/cli.hpp"

#include <CLI11.hpp>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "simflood/checkpoint.hpp"
#include "simflood/composition.hpp"
#include "simflood/pipeline.hpp"

namespace simflood {

namespace {

struct Options {
  std::string dataset;
  std::string format = "openea";
  std::string mode = "transflood";
  int max_iter = 20;
  double epsilon = 1e-4;
  bool reinject = false;
  double gamma = 0.5;
  std::string name_vectors;
  std::string relation_map;
  std::string save_omega;
  std::string load_omega;
  std::string report_out;
  int workers = 1;
  Index block_height = 1024;
  std::string candidates = "test";
  double seed_fraction = -1.0;
  std::string fold;
  bool restrict_columns = false;
};

std::optional<std::filesystem::path> optional_path(const std::string& s) {
  if (s.empty()) return std::nullopt;
  return std::filesystem::path(s);
}

RunConfig resolve(const Options& o) {
  RunConfig c;
  c.dataset = o.dataset;
  c.format = parse_format(o.format);
  c.mode = parse_mode(o.mode);
  c.flood.max_iterations = o.max_iter;
  c.flood.epsilon = o.epsilon;
  c.flood.reinject_seeds = o.reinject;
  c.flood.block_height = o.block_height;
  c.flood.workers = o.workers;
  c.gamma = o.gamma;
  c.name_vectors = optional_path(o.name_vectors);
  c.relation_map = optional_path(o.relation_map);
  c.save_omega = optional_path(o.save_omega);
  c.load_omega = optional_path(o.load_omega);
  c.report_out = optional_path(o.report_out);
  c.candidates = parse_candidate_pool(o.candidates);
  if (o.seed_fraction >= 0.0) c.seed_fraction = o.seed_fraction;
  c.fold = optional_path(o.fold);
  c.restrict_columns = o.restrict_columns;
  c.validate();
  return c;
}

void add_dataset_options(CLI::App* cmd, Options& o) {
  cmd->add_option("--dataset", o.dataset, "Dataset directory")->required();
  cmd->add_option("--format", o.format, "Dataset layout")->check(CLI::IsMember({"openea", "dbp15k"}));
  cmd->add_option("--fold", o.fold, "OpenEA fold directory, relative to the dataset");
  cmd->add_option("--seed-fraction", o.seed_fraction, "Re-split all links: this fraction becomes seeds");
}

void add_run_options(CLI::App* cmd, Options& o) {
  add_dataset_options(cmd, o);
  cmd->add_option("--mode", o.mode, "Alignment method")->check(CLI::IsMember({"transflood", "gcnflood", "classic-sf"}));
  cmd->add_option("--max-iter", o.max_iter, "Maximum number of flooding iterations (>= 1)");
  cmd->add_option("--epsilon", o.epsilon, "Convergence threshold on the max-abs change");
  cmd->add_flag("--reinject-seeds", o.reinject, "Restore seeds (and text base) before every normalization");
  cmd->add_option("--gamma", o.gamma, "Weight of the name similarity in Omega_0");
  cmd->add_option("--name-vectors", o.name_vectors, "Entity-name vector file");
  cmd->add_option("--relation-map", o.relation_map, "Relation alignment file (classic-sf)");
  cmd->add_option("--save-omega", o.save_omega, "Write the final Omega checkpoint");
  cmd->add_option("--load-omega", o.load_omega, "Evaluate a saved Omega checkpoint instead of flooding");
  cmd->add_option("--report-out", o.report_out, "Ranking report path (.metrics/.config written alongside)");
  cmd->add_option("--workers", o.workers, "Worker threads");
  cmd->add_option("--block-height", o.block_height, "Rows per work block");
  cmd->add_option("--candidates", o.candidates, "Candidate pool")->check(CLI::IsMember({"test", "all"}));
  cmd->add_flag("--restrict-columns", o.restrict_columns, "Keep only seed and test target columns");
}

void print_outcome(std::ostream& out, const RunConfig& config, const RunOutcome& outcome) {
  char line[160];
  out << "mode: " << to_string(config.mode) << '\n';
  if (!config.load_omega) {
    std::snprintf(line, sizeof line, "iterations: %d (%s, last delta %.3g)\n", outcome.iterations,
                  outcome.converged ? "converged" : "max-iter reached", outcome.last_delta);
    out << line;
  }
  if (config.mode == Mode::classic_sf && !config.load_omega)
    out << "pcg: " << outcome.pcg_nodes << " nodes, " << outcome.pcg_edges << " edges, "
        << outcome.unmapped_relations << " unmapped relations\n";
  if (config.name_vectors)
    out << "name vectors: " << outcome.name_vector_coverage[0] << " source, " << outcome.name_vector_coverage[1]
        << " target entities covered\n";
  write_metrics(out, outcome.report);
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Learning-free entity alignment by similarity flooding over entity compositions", "simflood"};
  app.set_config("--config", "", "TOML file with [flood], [eval] or [bench] option tables, such as a report .config echo");
  app.require_subcommand(1);

  Options options;

  auto* flood = app.add_subcommand("flood", "Run TransFlood, GCNFlood or classic similarity flooding and evaluate");
  add_run_options(flood, options);

  auto* eval = app.add_subcommand("eval", "Evaluate a saved Omega checkpoint against the test links");
  add_dataset_options(eval, options);
  eval->add_option("--load-omega", options.load_omega, "Omega checkpoint")->required();
  eval->add_option("--report-out", options.report_out, "Ranking report path");
  eval->add_option("--candidates", options.candidates, "Candidate pool")->check(CLI::IsMember({"test", "all"}));
  eval->add_option("--workers", options.workers, "Worker threads");

  auto* bench = app.add_subcommand("bench", "Time the load / lambda / flood / eval stages");
  add_run_options(bench, options);
  // lets `simflood flood --config run.config` reach the top-level option
  for (auto* cmd : {flood, eval, bench}) cmd->fallthrough();

  auto* lambda = app.add_subcommand("lambda", "Composition matrix tools");
  lambda->require_subcommand(1);
  auto* dump = lambda->add_subcommand("dump", "Write the explicit composition matrix as row/col/value lines");
  std::string triples;
  std::string variant = "transe";
  std::string dump_out;
  int graph = 1;
  std::size_t max_entities = 5000;
  dump->add_option("--triples", triples, "Single tab-separated triple file (labels)");
  dump->add_option("--dataset", options.dataset, "Dataset directory (alternative to --triples)");
  dump->add_option("--format", options.format, "Dataset layout")->check(CLI::IsMember({"openea", "dbp15k"}));
  dump->add_option("--kg", graph, "Which graph of the dataset")->check(CLI::IsMember({1, 2}));
  dump->add_option("--variant", variant, "Composition variant")->check(CLI::IsMember({"transe", "gcn"}));
  dump->add_option("--out", dump_out, "Output file (stdout when omitted)");
  dump->add_option("--max-entities", max_entities, "Refuse graphs larger than this");

  auto* stats_cmd = app.add_subcommand("stats", "Graph statistics of a triple file");
  stats_cmd->add_option("--triples", triples, "Tab-separated triple file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  try {
    if (*flood || *bench) {
      const auto config = resolve(options);
      const auto outcome = run_alignment(config);
      if (*flood) {
        print_outcome(out, config, outcome);
      } else {
        char line[160];
        const auto& t = outcome.timings;
        std::snprintf(line, sizeof line, "load %.3fs\nlambda %.3fs\nflood %.3fs\neval %.3fs\ntotal %.3fs\n", t.load,
                      t.lambda, t.flood, t.eval, t.total);
        out << line;
      }
      return 0;
    }
    if (*eval) {
      auto config = resolve(options);
      const auto outcome = run_alignment(config);
      write_metrics(out, outcome.report);
      return 0;
    }
    if (*dump) {
      KnowledgeGraph kg;
      if (!triples.empty()) {
        kg = load_kg(triples, Format::openea);
      } else if (!options.dataset.empty()) {
        auto ds = load_dataset(options.dataset, parse_format(options.format), {});
        kg = graph == 1 ? std::move(ds.source) : std::move(ds.target);
      } else {
        throw ConfigError("lambda dump needs --triples or --dataset");
      }
      if (kg.num_entities() > max_entities)
        throw ConfigError("graph has " + std::to_string(kg.num_entities()) + " entities; raise --max-entities to dump");
      const auto composition = build_lambda(kg, parse_variant(variant));
      if (dump_out.empty()) {
        write_lambda_triples(out, composition);
      } else {
        std::ofstream file(dump_out, std::ios::binary);
        if (!file) throw Error("cannot open " + dump_out + " for writing");
        write_lambda_triples(file, composition);
      }
      return 0;
    }
    if (*stats_cmd) {
      const auto s = stats(load_kg(triples, Format::openea));
      out << "entities = " << s.entities << "\nrelations = " << s.relations << "\ntriplets = " << s.triplets << '\n';
      for (const auto& [degree, count] : s.degree_histogram) out << "degree " << degree << " = " << count << '\n';
      return 0;
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

}  // namespace simflood
