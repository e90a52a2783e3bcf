#include <doctest.h>

#include <cmath>
#include <cstring>
#include <limits>
#include <random>
#include <vector>

#include "oracles.hpp"
#include "simflood/flood.hpp"

using namespace simflood;
using doctest::Approx;

namespace {

KnowledgeGraph chain() {
  KnowledgeGraphBuilder b;
  b.add_triplet("a", "r", "b");
  b.add_triplet("b", "r", "c");
  return std::move(b).build();
}

std::vector<EntityPair> random_seeds(std::mt19937_64& rng, Index n, Index m, double fraction) {
  std::vector<EntityId> rows(static_cast<std::size_t>(n));
  std::vector<EntityId> cols(static_cast<std::size_t>(m));
  for (Index i = 0; i < n; ++i) rows[static_cast<std::size_t>(i)] = static_cast<EntityId>(i);
  for (Index j = 0; j < m; ++j) cols[static_cast<std::size_t>(j)] = static_cast<EntityId>(j);
  std::shuffle(rows.begin(), rows.end(), rng);
  std::shuffle(cols.begin(), cols.end(), rng);
  const auto count = static_cast<std::size_t>(fraction * static_cast<double>(std::min(n, m)));
  std::vector<EntityPair> seeds;
  for (std::size_t k = 0; k < std::max<std::size_t>(count, 1); ++k) seeds.emplace_back(rows[k], cols[k]);
  return seeds;
}

}  // namespace

TEST_CASE("init_omega") {
  CHECK(init_omega<float>(2, 3, {}).isZero(0.0f));

  const std::vector<EntityPair> seeds{{0, 0}, {1, 2}};
  const auto omega = init_omega<float>(2, 3, seeds);
  CHECK(omega.sum() == 2.0f);
  CHECK(omega(0, 0) == 1.0f);
  CHECK(omega(1, 2) == 1.0f);

  Similarity base = Similarity::Constant(2, 3, 0.2f);
  base(1, 2) = 0.7f;
  const auto over = init_omega<float>(2, 3, seeds, &base);
  CHECK(over(1, 2) == 1.0f);
  CHECK(over(0, 1) == 0.2f);

  const std::vector<EntityPair> bad{{2, 0}};
  CHECK_THROWS_AS(init_omega<float>(2, 3, bad), DimensionError);
}

TEST_CASE("normalize") {
  Similarity m(2, 2);
  m << 2, -4, 1, 0;
  CHECK(normalize(m) == 4.0);
  CHECK(m(0, 0) == 0.5f);
  CHECK(m(0, 1) == -1.0f);
  CHECK(m(1, 0) == 0.25f);
  CHECK(m(1, 1) == 0.0f);

  const Similarity before = m;
  normalize(m);
  CHECK(m == before);

  Similarity zero = Similarity::Zero(3, 3);
  CHECK(normalize(zero) == 0.0);
  CHECK(zero.isZero(0.0f));

  Similarity bad = Similarity::Zero(1, 2);
  bad(0, 1) = std::numeric_limits<float>::quiet_NaN();
  CHECK_THROWS_AS(normalize(bad), NumericError);
}

TEST_CASE("normalize preserves row argmax sets and range") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<float> value(-50.0f, 50.0f);
  for (int trial = 0; trial < 200; ++trial) {
    Similarity m = Similarity::NullaryExpr(5, 7, [&] { return value(rng); });
    m(trial % 5, trial % 7) = m.row(trial % 5).maxCoeff();  // force a tie
    const Similarity before = m;
    normalize(m);
    CHECK(m.cwiseAbs().maxCoeff() == 1.0f);
    for (Index i = 0; i < m.rows(); ++i)
      for (Index j = 0; j < m.cols(); ++j)
        CHECK((before(i, j) == before.row(i).maxCoeff()) == (m(i, j) == m.row(i).maxCoeff()));
  }
}

TEST_CASE("delta") {
  Similarity a = Similarity::Random(4, 5);
  CHECK(delta(a, a) == 0.0);
  Similarity b = a;
  b(2, 3) += 0.3f;
  CHECK(delta(a, b) == Approx(0.3).epsilon(1e-6));
  CHECK_THROWS_AS(delta(a, Similarity::Zero(4, 4)), DimensionError);

  std::mt19937_64 rng(8);
  std::uniform_real_distribution<float> value(-1.0f, 1.0f);
  const Similarity x = Similarity::NullaryExpr(6, 6, [&] { return value(rng); });
  const Similarity y = Similarity::NullaryExpr(6, 6, [&] { return value(rng); });
  double brute = 0.0;
  for (Index i = 0; i < 6; ++i)
    for (Index j = 0; j < 6; ++j)
      brute = std::max(brute, std::abs(static_cast<double>(x(i, j)) - static_cast<double>(y(i, j))));
  CHECK(delta(x, y) == brute);
}

TEST_CASE("flood_step: zero is a fixpoint") {
  const auto lambda = lambda_transe(chain());
  const auto next = flood_step<float>(lambda, Similarity::Zero(3, 3), lambda, {});
  CHECK(next.isZero(0.0f));
}

TEST_CASE("flood_step: chain against its copy from identity") {
  const auto kg = chain();
  const std::vector<EntityPair> all{{0, 0}, {1, 1}, {2, 2}};
  SUBCASE("transe: normalize(Lambda Lambda^T)") {
    const auto lambda = lambda_transe(kg);
    const auto next = flood_step<double>(lambda, init_omega<double>(3, 3, all), lambda, {});
    SimilarityMatrix<double> expected(3, 3);
    expected << 1.5, 0, 0.5, 0, 0.5, 0, 0.5, 0, 1.5;
    expected /= 1.5;
    CHECK((next - expected).cwiseAbs().maxCoeff() <= 1e-12);
    for (Index i = 0; i < 3; ++i) {
      Index best = 0;
      next.row(i).maxCoeff(&best);
      CHECK(best == i);
    }
  }
  SUBCASE("gcn") {
    const auto lambda = lambda_gcn(kg);
    const auto next = flood_step<double>(lambda, init_omega<double>(3, 3, all), lambda, {});
    SimilarityMatrix<double> expected(3, 3);
    expected << 1, 0, 1, 0, 0.5, 0, 1, 0, 1;
    CHECK((next - expected).cwiseAbs().maxCoeff() <= 1e-12);
  }
}

TEST_CASE("flood_step: dimension mismatch") {
  const auto lambda = lambda_gcn(chain());
  CHECK_THROWS_AS(flood_step<float>(lambda, Similarity::Zero(3, 2), lambda, {}), DimensionError);
}

TEST_CASE("flood_step matches the naive triple loop on a 10x12 case") {
  std::mt19937_64 rng(21);
  auto t1 = oracle::random_triples(rng, 10, 3, 30);
  auto t2 = oracle::random_triples(rng, 12, 3, 30);
  t1.push_back({"e9", "r0", "e0"});
  t2.push_back({"e11", "r0", "e0"});
  const auto kg1 = oracle::build(t1);
  const auto kg2 = oracle::build(t2);
  std::uniform_real_distribution<double> value(-1.0, 1.0);
  const auto n = static_cast<Index>(kg1.num_entities());
  const auto m = static_cast<Index>(kg2.num_entities());
  const oracle::Dense omega = oracle::Dense::NullaryExpr(n, m, [&] { return value(rng); });
  for (const auto variant : {Variant::transe, Variant::gcn}) {
    const oracle::Dense l1 =
        variant == Variant::transe ? oracle::transe_closed_form(t1, kg1) : oracle::gcn_closed_form(t1, kg1);
    const oracle::Dense l2 =
        variant == Variant::transe ? oracle::transe_closed_form(t2, kg2) : oracle::gcn_closed_form(t2, kg2);
    oracle::Dense expected = l1 * omega * l2.transpose();
    expected /= expected.cwiseAbs().maxCoeff();
    const SimilarityMatrix<double> start = omega;
    const auto got = flood_step<double>(build_lambda(kg1, variant), start, build_lambda(kg2, variant), {});
    CHECK((got - expected).cwiseAbs().maxCoeff() <= 1e-6);
  }
}

TEST_CASE("run_flood stopping rule") {
  const auto lambda = lambda_transe(chain());
  const std::vector<EntityPair> seeds{{0, 0}};
  FloodConfig config;
  config.epsilon = 1e9;
  auto loose = run_flood<float>(lambda, lambda, seeds, config);
  CHECK(loose.iterations == 1);
  CHECK(loose.converged);

  config.epsilon = 1e-30;
  config.max_iterations = 1;
  auto single = run_flood<float>(lambda, lambda, seeds, config);
  CHECK(single.iterations == 1);
  CHECK(single.converged == (single.last_delta < config.epsilon));

  config.max_iterations = 0;
  CHECK_THROWS_AS(run_flood<float>(lambda, lambda, seeds, config), ConfigError);
  config.max_iterations = 5;
  config.epsilon = 0.0;
  CHECK_THROWS_AS(run_flood<float>(lambda, lambda, seeds, config), ConfigError);
}

TEST_CASE("run_flood is bit-identical across runs, workers and block heights") {
  std::mt19937_64 rng(30);
  auto triples = oracle::random_triples(rng, 30, 4, 90);
  for (int k = 0; k + 1 < 30; ++k) triples.push_back({"e" + std::to_string(k), "r0", "e" + std::to_string(k + 1)});
  const auto kg = oracle::build(triples);
  const auto n = static_cast<Index>(kg.num_entities());
  const auto seeds = random_seeds(rng, n, n, 0.3);
  for (const auto variant : {Variant::transe, Variant::gcn}) {
    const auto lambda = build_lambda(kg, variant);
    FloodConfig config;
    config.max_iterations = 20;
    const auto reference = run_flood<float>(lambda, lambda, seeds, config);
    for (const int workers : {1, 2, 8})
      for (const Index block : {1, 7, 1024}) {
        config.workers = workers;
        config.block_height = block;
        const auto again = run_flood<float>(lambda, lambda, seeds, config);
        CHECK(again.iterations == reference.iterations);
        CHECK(std::memcmp(again.omega.data(), reference.omega.data(),
                          sizeof(float) * static_cast<std::size_t>(again.omega.size())) == 0);
      }
  }
}

TEST_CASE("run_flood matches the naive implementation on random pairs") {
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 5; ++trial) {
    const auto t1 = oracle::random_triples(rng, 40, 4, 120);
    const auto t2 = oracle::random_triples(rng, 40, 4, 120);
    const auto kg1 = oracle::build(t1);
    const auto kg2 = oracle::build(t2);
    const auto n = static_cast<Index>(kg1.num_entities());
    const auto m = static_cast<Index>(kg2.num_entities());
    const auto seeds = random_seeds(rng, n, m, 0.3);
    for (const auto variant : {Variant::transe, Variant::gcn})
      for (const bool reinject : {false, true}) {
        const oracle::Dense l1 =
            variant == Variant::transe ? oracle::transe_closed_form(t1, kg1) : oracle::gcn_closed_form(t1, kg1);
        const oracle::Dense l2 =
            variant == Variant::transe ? oracle::transe_closed_form(t2, kg2) : oracle::gcn_closed_form(t2, kg2);
        FloodConfig config;
        config.max_iterations = 10;
        config.epsilon = 1e-300;
        config.reinject_seeds = reinject;
        const auto got = run_flood<float>(build_lambda(kg1, variant), build_lambda(kg2, variant), seeds, config);
        const auto expected = oracle::naive_flood(l1, l2, seeds, 10, 1e-300, reinject);
        CHECK(got.iterations == expected.iterations);
        CHECK((got.omega.cast<double>() - expected.omega).cwiseAbs().maxCoeff() <= 1e-6);
      }
  }
}

TEST_CASE("reinjection with a base matrix matches the naive implementation") {
  std::mt19937_64 rng(4);
  const auto t1 = oracle::random_triples(rng, 15, 3, 40);
  const auto t2 = oracle::random_triples(rng, 15, 3, 40);
  const auto kg1 = oracle::build(t1);
  const auto kg2 = oracle::build(t2);
  const auto n = static_cast<Index>(kg1.num_entities());
  const auto m = static_cast<Index>(kg2.num_entities());
  const auto seeds = random_seeds(rng, n, m, 0.3);
  std::uniform_real_distribution<double> value(0.0, 0.5);
  const oracle::Dense base = oracle::Dense::NullaryExpr(n, m, [&] { return value(rng); });
  const SimilarityMatrix<double> base_matrix = base;
  FloodConfig config;
  config.max_iterations = 8;
  config.reinject_seeds = true;
  const auto got =
      run_flood<double>(lambda_gcn(kg1), lambda_gcn(kg2), seeds, config, &base_matrix);
  const auto expected =
      oracle::naive_flood(oracle::gcn_closed_form(t1, kg1), oracle::gcn_closed_form(t2, kg2), seeds, 8, 1e-4, true,
                          &base);
  CHECK(got.iterations == expected.iterations);
  CHECK((got.omega - expected.omega).cwiseAbs().maxCoeff() <= 1e-9);
}

TEST_CASE("every iterate stays finite and within [-1, 1]") {
  std::mt19937_64 rng(12);
  const auto kg1 = oracle::build(oracle::random_triples(rng, 40, 5, 150));
  const auto kg2 = oracle::build(oracle::random_triples(rng, 40, 5, 150));
  const auto seeds =
      random_seeds(rng, static_cast<Index>(kg1.num_entities()), static_cast<Index>(kg2.num_entities()), 0.3);
  const auto l1 = lambda_transe(kg1);
  const auto l2 = lambda_transe(kg2);
  Similarity omega = init_omega<float>(l1.size(), l2.size(), seeds);
  for (int t = 0; t < 15; ++t) {
    omega = flood_step(l1, omega, l2, FloodConfig{});
    CHECK(omega.allFinite());
    CHECK(omega.cwiseAbs().maxCoeff() <= 1.0f);
  }
}
