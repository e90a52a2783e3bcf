#include <doctest.h>

#include <fstream>
#include <map>
#include <sstream>

#include "simflood/checkpoint.hpp"
#include "simflood/cli.hpp"
#include "simflood/pipeline.hpp"
#include "test_util.hpp"

using namespace simflood;
namespace fs = std::filesystem;

namespace {

const fs::path kFixtures = SIMFLOOD_FIXTURES;
const fs::path kTiny = kFixtures / "tiny";

struct CliRun {
  int status;
  std::string out;
  std::string err;
};

CliRun cli(std::vector<std::string> args) {
  args.insert(args.begin(), "simflood");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int status = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {status, out.str(), err.str()};
}

std::string slurp(const fs::path& file) {
  std::ifstream in(file, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

std::string metrics_part(const std::string& text) { return text.substr(text.find("count = ")); }

// label pair -> value, from a golden file
std::map<std::pair<std::string, std::string>, double> read_golden(const fs::path& file) {
  std::map<std::pair<std::string, std::string>, double> golden;
  std::ifstream in(file);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto fields = split_fields(line);
    golden[{std::string(fields[0]), std::string(fields[1])}] = std::stod(std::string(fields[2]));
  }
  return golden;
}

}  // namespace

TEST_CASE("fixture dataset loads") {
  const auto ds = load_dataset(kTiny, Format::openea, {});
  CHECK(ds.source.num_entities() == 30);
  CHECK(ds.target.num_entities() == 30);
  CHECK(ds.links.seed().size() == 9);
  CHECK(ds.links.test().size() == 18);
}

TEST_CASE("pipeline reproduces the golden similarity matrices") {
  const auto ds = load_dataset(kTiny, Format::openea, {});
  for (const auto& [mode, file] : {std::pair{Mode::transflood, "golden_transe.tsv"},
                                   std::pair{Mode::gcnflood, "golden_gcn.tsv"}}) {
    CAPTURE(file);
    RunConfig config;
    config.dataset = kTiny;
    config.mode = mode;
    const auto outcome = run_alignment(config, ds);
    CHECK(outcome.iterations == 20);
    const auto golden = read_golden(kFixtures / file);
    REQUIRE(golden.size() == 900);
    double worst = 0.0;
    for (const auto& [labels, value] : golden) {
      const auto i = ds.source.entities().find(labels.first);
      const auto j = ds.target.entities().find(labels.second);
      REQUIRE(i.has_value());
      REQUIRE(j.has_value());
      worst = std::max(worst, std::abs(outcome.omega(*i, *j) - value));
    }
    CHECK(worst <= 1e-6);
  }
}

TEST_CASE("checkpoint layout and round trip") {
  OmegaCheckpoint checkpoint;
  checkpoint.omega.resize(2, 3);
  checkpoint.omega << 1.0f, -0.5f, 0.25f, 0.0f, 3.0f, -1.0f;
  checkpoint.block_height = 7;
  checkpoint.iteration = 12;
  std::stringstream buffer;
  write_checkpoint(buffer, checkpoint);
  const auto bytes = buffer.str();
  REQUIRE(bytes.size() == 32 + 6 * 4);
  auto word = [&](int k) {
    std::uint64_t v = 0;
    for (int b = 7; b >= 0; --b) v = (v << 8) | static_cast<unsigned char>(bytes[static_cast<std::size_t>(8 * k + b)]);
    return v;
  };
  CHECK(word(0) == 2);
  CHECK(word(1) == 3);
  CHECK(word(2) == 7);
  CHECK(word(3) == 12);
  // -0.5f = 0xBF000000, stored little-endian as the second value
  CHECK(static_cast<unsigned char>(bytes[32 + 4 + 3]) == 0xBF);

  const auto back = read_checkpoint(buffer);
  CHECK(back.omega == checkpoint.omega);
  CHECK(back.block_height == 7);
  CHECK(back.iteration == 12);

  std::stringstream truncated(bytes.substr(0, bytes.size() - 1));
  CHECK_THROWS_AS(read_checkpoint(truncated), ParseError);
}

TEST_CASE("cli: invalid settings are rejected") {
  const auto zero = cli({"flood", "--dataset", kTiny.string(), "--max-iter", "0"});
  CHECK(zero.status != 0);
  CHECK(zero.err.find("error:") != std::string::npos);
  CHECK(cli({"flood", "--dataset", kTiny.string(), "--mode", "bogus"}).status != 0);
  CHECK(cli({"flood", "--dataset", kTiny.string(), "--relation-map", (kTiny / "relation_map").string()}).status != 0);
  CHECK(cli({"flood", "--dataset", kTiny.string(), "--gamma", "2"}).status != 0);
  CHECK(cli({"flood", "--dataset", (kFixtures / "missing").string()}).status != 0);
  CHECK(cli({}).status != 0);
}

TEST_CASE("cli: saved Omega evaluates to the same metrics") {
  simflood::testing::TempDir dir;
  const auto omega = (dir.path() / "omega.bin").string();
  const auto flood = cli({"flood", "--dataset", kTiny.string(), "--save-omega", omega});
  REQUIRE(flood.status == 0);
  CHECK(flood.out.find("mode: transflood") != std::string::npos);
  CHECK(fs::file_size(omega) == 32 + 30 * 30 * 4);
  CHECK(load_checkpoint(omega).iteration == 20);
  const auto eval = cli({"eval", "--dataset", kTiny.string(), "--load-omega", omega});
  REQUIRE(eval.status == 0);
  CHECK(eval.out == metrics_part(flood.out));
}

TEST_CASE("cli: results do not depend on the worker count") {
  simflood::testing::TempDir dir;
  std::string omega_bytes, report_bytes;
  for (const auto* mode : {"transflood", "gcnflood"}) {
    for (const auto* workers : {"1", "2", "8"}) {
      const auto stem = dir.path() / (std::string(mode) + workers);
      const auto run = cli({"flood", "--dataset", kTiny.string(), "--mode", mode, "--workers", workers,
                            "--block-height", "7", "--save-omega", stem.string() + ".bin", "--report-out",
                            stem.string() + ".tsv"});
      REQUIRE(run.status == 0);
      const auto o = slurp(stem.string() + ".bin");
      const auto r = slurp(stem.string() + ".tsv");
      if (std::string(workers) == "1") {
        omega_bytes = o;
        report_bytes = r;
      } else {
        CHECK(o == omega_bytes);
        CHECK(r == report_bytes);
      }
    }
  }
}

TEST_CASE("cli: report files and config echo") {
  simflood::testing::TempDir dir;
  const auto report = dir.path() / "report.tsv";
  const auto run = cli({"flood", "--dataset", kTiny.string(), "--mode", "gcnflood", "--max-iter", "5",
                        "--candidates", "all", "--report-out", report.string()});
  REQUIRE(run.status == 0);
  const auto text = slurp(report);
  CHECK(text.rfind("#source\ttrue_target\trank\ttop_targets\n", 0) == 0);
  std::istringstream lines(text);
  std::string line;
  int rows = 0;
  std::getline(lines, line);
  while (std::getline(lines, line)) {
    ++rows;
    CHECK(split_fields(line).size() == 13);  // source, truth, rank, ten candidates
  }
  CHECK(rows == 18);
  CHECK(slurp(report.string() + ".metrics") == metrics_part(run.out));
  const auto config = slurp(report.string() + ".config");
  CHECK(config.find("mode = \"gcnflood\"") != std::string::npos);
  CHECK(config.find("max-iter = 5") != std::string::npos);

  // the echo reproduces the run
  const auto again = cli({"flood", "--config", report.string() + ".config"});
  REQUIRE(again.status == 0);
  CHECK(again.out == run.out);
}

TEST_CASE("cli: bench reports stage timings") {
  const auto run = cli({"bench", "--dataset", kTiny.string(), "--max-iter", "3"});
  REQUIRE(run.status == 0);
  for (const auto* stage : {"load ", "lambda ", "flood ", "eval ", "total "})
    CHECK(run.out.find(stage) != std::string::npos);
}

TEST_CASE("cli: lambda dump and stats") {
  simflood::testing::TempDir dir;
  const auto triples = dir.write("chain", "a\tr\tb\nb\tr\tc\n");
  const auto dump = cli({"lambda", "dump", "--triples", triples.string()});
  REQUIRE(dump.status == 0);
  CHECK(dump.out.find("0\t0\t0.5\n") != std::string::npos);
  CHECK(dump.out.find("0\t1\t1\n") != std::string::npos);
  CHECK(dump.out.find("0\t2\t-0.5\n") != std::string::npos);
  const auto gcn = cli({"lambda", "dump", "--triples", triples.string(), "--variant", "gcn"});
  CHECK(gcn.out == "0\t1\t1\n1\t0\t0.5\n1\t2\t0.5\n2\t1\t1\n");
  CHECK(cli({"lambda", "dump", "--triples", triples.string(), "--max-entities", "2"}).status != 0);
  const auto fromset = cli({"lambda", "dump", "--dataset", kTiny.string(), "--kg", "2"});
  CHECK(fromset.status == 0);

  const auto s = cli({"stats", "--triples", triples.string()});
  REQUIRE(s.status == 0);
  CHECK(s.out.find("entities = 3\n") != std::string::npos);
  CHECK(s.out.find("triplets = 4\n") != std::string::npos);
}

TEST_CASE("pipeline: column restriction") {
  const auto ds = load_dataset(kTiny, Format::openea, {});
  RunConfig config;
  config.dataset = kTiny;
  config.restrict_columns = true;
  const auto outcome = run_alignment(config, ds);
  CHECK(outcome.omega.cols() == 27);
  CHECK(outcome.columns.size() == 27);
  CHECK(outcome.report.entries.size() == 18);
  for (const auto& e : outcome.report.entries) CHECK(e.rank <= 18);

  config.save_omega = "unused.bin";
  CHECK_THROWS_AS(run_alignment(config, ds), ConfigError);
}

TEST_CASE("pipeline: classic similarity flooding") {
  const auto ds = load_dataset(kTiny, Format::openea, {});
  RunConfig config;
  config.dataset = kTiny;
  config.mode = Mode::classic_sf;
  const auto unmapped = run_alignment(config, ds);
  CHECK(unmapped.unmapped_relations == 4);
  CHECK(unmapped.pcg_edges == 0);
  CHECK(unmapped.pcg_nodes == 9);

  config.relation_map = kTiny / "relation_map";
  const auto mapped = run_alignment(config, ds);
  CHECK(mapped.unmapped_relations == 0);
  CHECK(mapped.pcg_edges > 0);
  CHECK(mapped.omega.minCoeff() >= 0.0f);
  CHECK(mapped.omega.maxCoeff() == 1.0f);
  CHECK(mapped.report.mrr > unmapped.report.mrr);
}

TEST_CASE("pipeline: name vectors") {
  const auto ds = load_dataset(kTiny, Format::openea, {});
  RunConfig config;
  config.dataset = kTiny;
  config.flood.reinject_seeds = true;
  config.name_vectors = kTiny / "name_vectors";
  config.gamma = 0.0;
  const auto zero = run_alignment(config, ds);
  CHECK(zero.name_vector_coverage[0] == 30);
  CHECK(zero.name_vector_coverage[1] == 30);
  RunConfig plain = config;
  plain.name_vectors.reset();
  CHECK(run_alignment(plain, ds).omega == zero.omega);

  config.gamma = 0.8;
  const auto fused = run_alignment(config, ds);
  CHECK(fused.report.hits_at_1 >= zero.report.hits_at_1);
}
