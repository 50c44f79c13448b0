#include "evonarx/fitness.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "evonarx/kernels.hpp"
#include "evonarx/parallel.hpp"
#include "evonarx/plant.hpp"

namespace evonarx {

double mean_error(std::span<const double> response,
                  std::span<const double> target) {
  if (response.size() != target.size())
    throw std::invalid_argument("mean_error: length mismatch (" +
                                std::to_string(response.size()) + " vs " +
                                std::to_string(target.size()) + ")");
  if (response.empty())
    throw std::invalid_argument("mean_error: empty sequences");
  return kern::sum_abs_diff(response.data(), target.data(), response.size()) /
         static_cast<double>(response.size());
}

double fitness(double mean_err, int neuron_count, int delay_sum,
               const FitnessWeights& w) {
  return w.base - w.p1 * mean_err - w.p2 * neuron_count - w.p3 * delay_sum;
}

FitnessRecord evaluate_genome(const Genome& g, const Dataset& data,
                              const FitnessWeights& w) {
  FitnessRecord rec;
  rec.neuron_count = g.hidden_neuron_count();
  rec.delay_sum = g.du + g.dy;

  const SimResult sim =
      simulate_closed_loop(g, data.inputs, data.nominal_input, data.nominal_output);
  if (sim.diverged) {
    rec.diverged = true;
    rec.fitness = kDivergedFitness;
    rec.mean_error = std::numeric_limits<double>::infinity();
    return rec;
  }
  rec.mean_error = mean_error(sim.outputs, data.targets);
  if (!std::isfinite(rec.mean_error)) {
    rec.diverged = true;
    rec.fitness = kDivergedFitness;
    return rec;
  }
  rec.fitness = fitness(rec.mean_error, rec.neuron_count, rec.delay_sum, w);
  return rec;
}

std::vector<FitnessRecord> evaluate_population(std::span<const Genome> population,
                                               const Dataset& data,
                                               const FitnessWeights& w,
                                               int threads) {
  std::vector<FitnessRecord> records(population.size());
  parallel_for(population.size(), threads, [&](std::size_t i) {
    records[i] = evaluate_genome(population[i], data, w);
  });
  return records;
}

}  // namespace evonarx
