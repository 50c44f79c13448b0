#pragma once

#include <span>
#include <vector>

#include "evonarx/genome.hpp"

namespace evonarx {

struct Dataset;  // plant.hpp

// Structure-penalised fitness:  base - p1*meanError - p2*neurons - p3*delays.
struct FitnessWeights {
  double p1 = 1.0;     // error weight
  double p2 = 0.01;    // per-neuron penalty
  double p3 = 0.0001;  // per-delay-level penalty
  double base = 10.0;
};

// Fitness assigned to individuals whose simulation produced a non-finite
// value; far below anything reachable so selection discards them.
inline constexpr double kDivergedFitness = -1.0e6;

struct FitnessRecord {
  double fitness = kDivergedFitness;
  double mean_error = 0.0;  // scaled-power units
  int neuron_count = 0;     // hidden neurons
  int delay_sum = 0;        // du + dy
  bool diverged = false;
};

// (1/n) * sum |response - target|
double mean_error(std::span<const double> response, std::span<const double> target);

double fitness(double mean_err, int neuron_count, int delay_sum,
               const FitnessWeights& w);

FitnessRecord evaluate_genome(const Genome& g, const Dataset& data,
                              const FitnessWeights& w);

// One record per genome, input order preserved. `threads` > 1 fans the
// evaluations out; the gather is ordered so results do not depend on it.
std::vector<FitnessRecord> evaluate_population(std::span<const Genome> population,
                                               const Dataset& data,
                                               const FitnessWeights& w,
                                               int threads = 1);

}  // namespace evonarx
