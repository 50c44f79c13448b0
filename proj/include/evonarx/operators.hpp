#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "evonarx/genome.hpp"
#include "evonarx/rng.hpp"

// Specialised evolutionary operators. Every operator is pure: sources are
// never modified, offspring are new genomes, and all randomness comes from
// the stream passed in. Structural bookkeeping (delay slots, downstream
// weights) keeps every offspring consistent with required_weights.

namespace evonarx {

struct OperatorConfig {
  double p_mut_weight = 0.2;      // pMutW
  double p_mut_new_neuron = 0.2;  // pMutNewN
  double p_mut_del_neuron = 0.2;  // pMutDelN
  double p_mut_delay = 0.2;       // pMutD
  double p_cross = 0.8;           // pCross
  double min_delta = 0.0001;
  double max_delta = 0.1;
  double min_weight = -1.0;
  double max_weight = 1.0;
  int max_neurons_per_layer = 20;  // maxNinLay
  int du_max = 50;
  int dy_max = 50;
};

// Per-individual weight-mutation magnitudes from population fitness:
//   fit = -fitness; fit += |min(fit)|;
//   dw  = (maxDelta-minDelta)*(fit-minFit)/(maxFit-minFit) + minDelta
// Best individual maps to minDelta, worst to maxDelta. A (near-)degenerate
// spread (< 1e-12) maps everyone to minDelta.
std::vector<double> delta_w(std::span<const double> fitness_values,
                            double min_delta, double max_delta);

// Each weight mutates independently with p_mut_weight; a mutated weight moves
// by +-delta, sign drawn 50/50. Returns nothing when no weight mutated.
std::optional<Genome> mutate_weights(const Genome& g, double delta,
                                     double p_mut_weight, RngStream& rng);

// One offspring per successful free-place draw, each differing from the
// source by exactly one appended neuron (and the matching downstream weight).
std::vector<Genome> mutate_add_neurons(const Genome& g, double p_mut_new_neuron,
                                       double min_w, double max_w,
                                       int max_neurons_per_layer, RngStream& rng);

// One offspring per deleted neuron; a layer's sole neuron is never deleted.
std::vector<Genome> mutate_delete_neurons(const Genome& g,
                                          double p_mut_del_neuron,
                                          RngStream& rng);

// du and dy are drawn independently; each hit yields one offspring whose
// delay moved by +-1 (50/50) with first-layer weight slots adjusted. Moves
// below 0 or above the cap are skipped.
std::vector<Genome> mutate_delays(const Genome& g, double p_mut_delay,
                                  double min_w, double max_w, int du_max,
                                  int dy_max, RngStream& rng);

// Deterministic pieces of the crossover, exposed for direct testing.
int cross_delay(int d_p1, int d_p2, double r);                // round(r*d1+(1-r)*d2)
double blend_weight(double w_p1, double w_p2, double r);      // r*w1+(1-r)*w2

// Child delays are rounded convex combinations of the parents'; aligned
// weights blend with a fresh r each, weights present in one parent copy
// verbatim, biases always blend, and a neuron present in only one parent is
// inherited with probability 50% into the first free place after the child's
// last neuron. Weight slots that exist in neither parent (after delay
// reconciliation) are drawn fresh from [min_w, max_w]. Parents must have the
// same hidden layer count.
Genome crossover_pair(const Genome& p1, const Genome& p2, double min_w,
                      double max_w, RngStream& rng);

// Draws the parent pool (each index enters with p_cross), shuffles it and
// pairs consecutive members; an odd leftover is dropped. No index appears in
// more than one pair.
std::vector<std::pair<std::size_t, std::size_t>> pair_parents(
    std::size_t population_size, double p_cross, RngStream& rng);

// mu+lambda roulette selection with elitism over a candidate pool. The
// hm_best fittest pass unconditionally (ties broken by pool order); the rest
// of the pop_size slots are drawn without replacement with probability
// proportional to fitness - min(fitness) + 1e-6. Diverged candidates are
// dropped up front (unless nothing else exists). Returns indices into the
// pool, selection order.
std::vector<std::size_t> roulette_select_with_elitism(
    std::span<const double> pool_fitness,
    std::span<const std::uint8_t> pool_diverged, std::size_t pop_size,
    std::size_t hm_best, RngStream& rng);

// Indices of the n fittest pool members (ties by pool order).
std::vector<std::size_t> best_n_indices(std::span<const double> pool_fitness,
                                        std::size_t n);

}  // namespace evonarx
