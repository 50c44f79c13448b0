#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "evonarx/config.hpp"
#include "evonarx/fitness.hpp"
#include "evonarx/genome.hpp"
#include "evonarx/operators.hpp"
#include "evonarx/plant.hpp"
#include "evonarx/trainer.hpp"

namespace evonarx {

// Species identity. DNAS3 groups by the hidden layer's neuron count alone;
// DNAS4 groups by the full architecture plus the training method.
struct SpeciesKey {
  enum class Mode { NeuronCount, FullArchitecture };
  Mode mode = Mode::NeuronCount;
  std::vector<int> neuron_counts;
  int du = 0;
  int dy = 0;
  std::optional<TrainerKind> trainer;

  bool operator==(const SpeciesKey& other) const;
};

SpeciesKey neuron_count_key(const Genome& g);
SpeciesKey full_architecture_key(const Genome& g, TrainerKind trainer);

struct DominationState {
  bool dominated = false;
  std::optional<SpeciesKey> dominant;
  // Secondary species differ from the dominant by one neuron; the smaller
  // one is absent when the dominant species has a single neuron.
  std::vector<SpeciesKey> secondary;
};

// A species dominates when the hm_best fittest individuals all carry its key
// (fitness ties broken by position). Populations smaller than hm_best are
// never dominated.
DominationState detect_domination(std::span<const FitnessRecord> records,
                                  std::span<const SpeciesKey> keys,
                                  std::size_t hm_best);

struct GenerationStats {
  double best_fitness = 0.0;
  double mean_fitness = 0.0;  // over non-diverged individuals
  double mean_error = 0.0;    // over non-diverged individuals
  int population = 0;
};

struct RunResult {
  std::vector<GenerationStats> per_generation;  // entry 0: initial population
  Genome best;
  FitnessRecord best_record;
  std::optional<TrainerKind> best_trainer;      // DNAS4 only
  std::map<int, int> final_neuron_histogram;    // final population composition
  std::vector<SpeciesKey> final_species;        // one key per final individual
  double final_du_avg = 0.0;
  double final_dy_avg = 0.0;
  double wall_seconds = 0.0;  // informational; excluded from determinism
};

RunResult run_dnas1(const NasConfig& cfg, const Dataset& data,
                    std::uint64_t run_seed);
RunResult run_dnas2(const NasConfig& cfg, const Dataset& data,
                    std::uint64_t run_seed);
RunResult run_dnas3(const NasConfig& cfg, const Dataset& data,
                    std::uint64_t run_seed);
RunResult run_dnas4(const NasConfig& cfg, const Dataset& data,
                    std::uint64_t run_seed);

// Dispatch on cfg.algorithm (Exhaustive is not a generation loop; see below).
RunResult run_algorithm(const NasConfig& cfg, const Dataset& data,
                        std::uint64_t run_seed);

// Per-call seeds derived from the master seed so calls are independently
// re-runnable.
std::uint64_t call_seed(std::uint64_t master_seed, int call_index);

// Crossover pairing restricted to species: each wanted species pairs its
// members internally at pCross = 1. Every returned pair shares a species key.
std::vector<std::pair<std::size_t, std::size_t>> intra_species_pairs(
    std::span<const SpeciesKey> keys, std::span<const SpeciesKey> wanted,
    std::uint64_t run_seed, std::uint64_t generation);

// ---- exhaustive-search baseline ----

struct GridPoint {
  int neurons = 1;
  int du = 0;
  int dy = 0;
  double best_fitness = 0.0;
  double best_mean_error = 0.0;
  Genome best_genome;
};

struct ExhaustiveResult {
  std::vector<GridPoint> points;  // neurons-major, then du, then dy
  std::size_t winner = 0;         // index of the fittest point
  double wall_seconds = 0.0;
};

// Trains every (neurons, du, dy) grid point `repeats` times from fresh
// random weights and scores each with the closed-loop fitness function.
ExhaustiveResult exhaustive_search(const NasConfig& cfg, const Dataset& data,
                                   std::uint64_t run_seed);

}  // namespace evonarx
