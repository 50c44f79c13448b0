#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "evonarx/algorithms.hpp"
#include "evonarx/plant.hpp"
#include "evonarx/trainer.hpp"

using namespace evonarx;

namespace {

// Short learning set so the loop tests stay fast.
const Dataset& short_learning_set() {
  static const Dataset data = [] {
    SurrogatePlantParams params;
    return generate_dataset(params, learning_schedule(), 400.0, 1.0, nullptr,
                            "learning-short");
  }();
  return data;
}

NasConfig smoke_config(Algorithm a) {
  NasConfig cfg = defaults_for(a);
  cfg.popSize = 12;
  cfg.generations = 10;
  cfg.maxNinLay = 5;
  cfg.duMax = 5;
  cfg.dyMax = 5;
  cfg.hmBest = 3;
  return cfg;
}

SpeciesKey nkey(int n) {
  SpeciesKey k;
  k.mode = SpeciesKey::Mode::NeuronCount;
  k.neuron_counts = {n};
  return k;
}

FitnessRecord rec(double fitness) {
  FitnessRecord r;
  r.fitness = fitness;
  return r;
}

void check_monotone_best(const RunResult& r) {
  for (std::size_t g = 1; g < r.per_generation.size(); ++g)
    CHECK(r.per_generation[g].best_fitness >=
          r.per_generation[g - 1].best_fitness);
}

}  // namespace

TEST_CASE("detect_domination: unanimous top block") {
  const std::vector<FitnessRecord> records = {rec(9.1), rec(9.5), rec(9.4),
                                              rec(9.3), rec(9.2), rec(8.0)};
  const std::vector<SpeciesKey> keys = {nkey(3), nkey(3), nkey(3),
                                        nkey(3), nkey(3), nkey(7)};
  const DominationState s = detect_domination(records, keys, 5);
  REQUIRE(s.dominated);
  CHECK(s.dominant->neuron_counts.front() == 3);
  REQUIRE(s.secondary.size() == 2);
  CHECK(s.secondary[0].neuron_counts.front() == 2);
  CHECK(s.secondary[1].neuron_counts.front() == 4);
}

TEST_CASE("detect_domination: one dissenter in the top block") {
  const std::vector<FitnessRecord> records = {rec(9.5), rec(9.4), rec(9.3),
                                              rec(9.2), rec(9.1)};
  const std::vector<SpeciesKey> keys = {nkey(3), nkey(3), nkey(3), nkey(3),
                                        nkey(4)};
  CHECK_FALSE(detect_domination(records, keys, 5).dominated);
}

TEST_CASE("detect_domination: single-neuron dominant has no lower species") {
  const std::vector<FitnessRecord> records = {rec(9.5), rec(9.4), rec(9.3)};
  const std::vector<SpeciesKey> keys = {nkey(1), nkey(1), nkey(1)};
  const DominationState s = detect_domination(records, keys, 3);
  REQUIRE(s.dominated);
  REQUIRE(s.secondary.size() == 1);
  CHECK(s.secondary[0].neuron_counts.front() == 2);
}

TEST_CASE("detect_domination: population smaller than hmBest") {
  const std::vector<FitnessRecord> records = {rec(9.5), rec(9.4)};
  const std::vector<SpeciesKey> keys = {nkey(1), nkey(1)};
  CHECK_FALSE(detect_domination(records, keys, 5).dominated);
}

TEST_CASE("intra-species pairs never cross species") {
  RngStream rng(4);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<SpeciesKey> keys;
    for (int i = 0; i < 20; ++i)
      keys.push_back(nkey(static_cast<int>(rng.uniform_int(1, 4))));
    const std::vector<SpeciesKey> wanted = {nkey(1), nkey(2), nkey(3)};
    const auto pairs = intra_species_pairs(
        keys, wanted, derive_seed(9, static_cast<std::uint64_t>(trial), 0, 0), 1);
    for (const auto& [a, b] : pairs) {
      CHECK(keys[a] == keys[b]);
      CHECK(a != b);
    }
  }
}

TEST_CASE("generations=0 reports only the evaluated initial population") {
  NasConfig cfg = smoke_config(Algorithm::Dnas1);
  cfg.generations = 0;
  const RunResult r = run_dnas1(cfg, short_learning_set(), 1);
  CHECK(r.per_generation.size() == 1);
  CHECK(r.per_generation[0].population == cfg.popSize);
  CHECK(r.best_record.fitness == r.per_generation[0].best_fitness);
}

TEST_CASE("dnas1: delays pinned, neuron cap respected, best monotone") {
  const NasConfig cfg = smoke_config(Algorithm::Dnas1);
  const RunResult r = run_dnas1(cfg, short_learning_set(), 7);
  CHECK(r.best.du == 5);
  CHECK(r.best.dy == 5);
  CHECK(r.final_du_avg == 5.0);
  CHECK(r.final_dy_avg == 5.0);
  for (const auto& [n, count] : r.final_neuron_histogram) {
    CHECK(n >= 1);
    CHECK(n <= cfg.maxNinLay);
    CHECK(count > 0);
  }
  check_monotone_best(r);
}

TEST_CASE("dnas2 with pMutD=0 and pinned delays replays dnas1 exactly") {
  NasConfig cfg = smoke_config(Algorithm::Dnas2);
  cfg.pMutD = 0.0;
  cfg.duFixed = 5;
  cfg.dyFixed = 5;
  const RunResult a = run_dnas1(cfg, short_learning_set(), 11);
  const RunResult b = run_dnas2(cfg, short_learning_set(), 11);
  REQUIRE(a.per_generation.size() == b.per_generation.size());
  for (std::size_t g = 0; g < a.per_generation.size(); ++g) {
    CHECK(a.per_generation[g].best_fitness == b.per_generation[g].best_fitness);
    CHECK(a.per_generation[g].mean_fitness == b.per_generation[g].mean_fitness);
    CHECK(a.per_generation[g].population == b.per_generation[g].population);
  }
  CHECK(flatten_weights(a.best) == flatten_weights(b.best));
}

TEST_CASE("dnas2: delays stay within their caps across seeded runs") {
  const NasConfig cfg = smoke_config(Algorithm::Dnas2);
  for (std::uint64_t seed : {1ull, 2ull, 3ull}) {
    const RunResult r = run_dnas2(cfg, short_learning_set(), seed);
    CHECK(r.best.du >= 0);
    CHECK(r.best.du <= cfg.duMax);
    CHECK(r.best.dy >= 0);
    CHECK(r.best.dy <= cfg.dyMax);
    CHECK(r.final_du_avg >= 0.0);
    CHECK(r.final_du_avg <= cfg.duMax);
    check_monotone_best(r);
  }
}

TEST_CASE("dnas3: population bounded, best monotone") {
  const NasConfig cfg = smoke_config(Algorithm::Dnas3);
  for (std::uint64_t seed : {5ull, 6ull}) {
    const RunResult r = run_dnas3(cfg, short_learning_set(), seed);
    for (const auto& g : r.per_generation) {
      CHECK(g.population >= 1);
      CHECK(g.population <= cfg.popSize);
    }
    check_monotone_best(r);
    CHECK_FALSE(structural_fault(r.best));
  }
}

TEST_CASE("dnas3 is deterministic and thread-count independent") {
  NasConfig cfg = smoke_config(Algorithm::Dnas3);
  const RunResult a = run_dnas3(cfg, short_learning_set(), 21);
  const RunResult b = run_dnas3(cfg, short_learning_set(), 21);
  NasConfig threaded = cfg;
  threaded.threads = 3;
  const RunResult c = run_dnas3(threaded, short_learning_set(), 21);
  REQUIRE(a.per_generation.size() == b.per_generation.size());
  REQUIRE(a.per_generation.size() == c.per_generation.size());
  for (std::size_t g = 0; g < a.per_generation.size(); ++g) {
    CHECK(a.per_generation[g].best_fitness == b.per_generation[g].best_fitness);
    CHECK(a.per_generation[g].best_fitness == c.per_generation[g].best_fitness);
    CHECK(a.per_generation[g].mean_error == c.per_generation[g].mean_error);
  }
  CHECK(flatten_weights(a.best) == flatten_weights(b.best));
  CHECK(flatten_weights(a.best) == flatten_weights(c.best));
}

TEST_CASE("dnas4: unique species after selection, monotone best") {
  NasConfig cfg = smoke_config(Algorithm::Dnas4);
  cfg.popSize = 8;
  cfg.generations = 3;
  cfg.maxNinLay = 3;
  cfg.duMax = 3;
  cfg.dyMax = 3;
  cfg.trainEpochs = 15;
  const RunResult r = run_dnas4(cfg, short_learning_set(), 3);
  check_monotone_best(r);
  CHECK(static_cast<int>(r.final_species.size()) <= cfg.popSize);
  for (std::size_t i = 0; i < r.final_species.size(); ++i)
    for (std::size_t j = i + 1; j < r.final_species.size(); ++j)
      CHECK_FALSE(r.final_species[i] == r.final_species[j]);
  REQUIRE(r.best_trainer.has_value());
  CHECK_FALSE(structural_fault(r.best));
}

TEST_CASE("dnas4 is deterministic across thread counts") {
  NasConfig cfg = smoke_config(Algorithm::Dnas4);
  cfg.popSize = 6;
  cfg.generations = 2;
  cfg.maxNinLay = 3;
  cfg.duMax = 3;
  cfg.dyMax = 3;
  cfg.trainEpochs = 10;
  const RunResult a = run_dnas4(cfg, short_learning_set(), 9);
  NasConfig threaded = cfg;
  threaded.threads = 3;
  const RunResult b = run_dnas4(threaded, short_learning_set(), 9);
  REQUIRE(a.per_generation.size() == b.per_generation.size());
  for (std::size_t g = 0; g < a.per_generation.size(); ++g)
    CHECK(a.per_generation[g].best_fitness == b.per_generation[g].best_fitness);
  CHECK(flatten_weights(a.best) == flatten_weights(b.best));
}

TEST_CASE("exhaustive search: single point runs exactly R trainings") {
  NasConfig cfg = defaults_for(Algorithm::Exhaustive);
  cfg.gridNeuronsMax = 1;
  cfg.gridDu = {2};
  cfg.gridDy = {2};
  cfg.gridRepeats = 3;
  cfg.trainEpochs = 15;
  const ExhaustiveResult r = exhaustive_search(cfg, short_learning_set(), 4);
  REQUIRE(r.points.size() == 1);
  CHECK(r.winner == 0);
  CHECK(r.points[0].neurons == 1);
  CHECK(std::isfinite(r.points[0].best_fitness));
  CHECK_FALSE(structural_fault(r.points[0].best_genome));
}

TEST_CASE("exhaustive search: winner is the fitness argmax over the grid") {
  NasConfig cfg = defaults_for(Algorithm::Exhaustive);
  cfg.gridNeuronsMax = 2;
  cfg.gridDu = {1, 3};
  cfg.gridDy = {1};
  cfg.gridRepeats = 2;
  cfg.trainEpochs = 15;
  const ExhaustiveResult r = exhaustive_search(cfg, short_learning_set(), 4);
  REQUIRE(r.points.size() == 4);
  for (const auto& p : r.points)
    CHECK(r.points[r.winner].best_fitness >= p.best_fitness);
}

TEST_CASE("seeded smoke runs reproduce the frozen best-fitness trajectories") {
  // Regression pins from the first verified runs of each algorithm.
  const std::vector<double> dnas1_seed1001 = {
      9.7208696494571782, 9.829784033376141,  9.9561882778128066,
      9.9561900721850396, 9.9561900721850396, 9.956190830894819,
      9.9562083383698283, 9.9562162746040332, 9.9562182824867733,
      9.956235321009693,  9.9562378776989675};
  const std::vector<double> dnas2_seed1002 = {
      9.9168388401674239, 9.9168476310696363, 9.9168596810709957,
      9.9235862136120367, 9.9235895544268491, 9.951186718893041,
      9.9512066552451781, 9.9512405753301412, 9.9512656253029643,
      9.9549981045176565, 9.9549981045176565};
  const std::vector<double> dnas3_seed1003 = {
      9.8786966925929409, 9.9354321944116997, 9.9405920986595806,
      9.948158804803942,  9.948158804803942,  9.9482807993137481,
      9.9482807993137481, 9.9636470536486446, 9.9636470536486446,
      9.9636470536486446, 9.9666478462821342};

  const auto check = [](const RunResult& r, const std::vector<double>& golden) {
    REQUIRE(r.per_generation.size() == golden.size());
    for (std::size_t g = 0; g < golden.size(); ++g)
      CHECK(r.per_generation[g].best_fitness ==
            doctest::Approx(golden[g]).epsilon(1e-12));
  };
  check(run_dnas1(smoke_config(Algorithm::Dnas1), short_learning_set(), 1001),
        dnas1_seed1001);
  check(run_dnas2(smoke_config(Algorithm::Dnas2), short_learning_set(), 1002),
        dnas2_seed1002);
  check(run_dnas3(smoke_config(Algorithm::Dnas3), short_learning_set(), 1003),
        dnas3_seed1003);
}

TEST_CASE("per-call seeds are distinct and stable") {
  CHECK(call_seed(42, 0) != call_seed(42, 1));
  CHECK(call_seed(42, 1) == call_seed(42, 1));
  CHECK(call_seed(42, 1) != call_seed(43, 1));
}

TEST_CASE("discovered genome generalises to both verification sets") {
  SurrogatePlantParams params;
  const Dataset learning =
      generate_dataset(params, learning_schedule(), 3000.0, 1.0, nullptr,
                       "learning");
  NasConfig cfg = defaults_for(Algorithm::Dnas3);
  cfg.popSize = 14;
  cfg.generations = 8;
  cfg.duMax = 6;
  cfg.dyMax = 6;
  const RunResult r = run_dnas3(cfg, learning, call_seed(3, 0));
  REQUIRE_FALSE(r.best_record.diverged);

  for (const char* name : {"verification-1", "verification-2"}) {
    const Dataset ver = generate_dataset(params, bundled_schedule(name), 3000.0,
                                         1.0, nullptr, name);
    const SimResult sim = simulate_closed_loop(r.best, ver.inputs,
                                               ver.nominal_input,
                                               ver.nominal_output);
    REQUIRE_FALSE(sim.diverged);
    const double err = mean_error(sim.outputs, ver.targets);
    CAPTURE(name);
    CHECK(err <= 2.0 * r.best_record.mean_error);
  }
}
