#pragma once

#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "evonarx/rng.hpp"

namespace evonarx {

// Recurrent NARX-style SISO network: hidden layers of bipolar-sigmoid
// neurons, one linear output neuron fed back into the input vector.
//
// A first-layer neuron sees, in this fixed order:
//   [ u(k), u(k-1)..u(k-du), y(k-1)..y(k-dy), bias ]
// Deeper layers and the output neuron see the previous layer's outputs plus
// the bias. The bias is stored as the final weight slot.

enum class Activation { BipolarSigmoid, Linear };

struct Neuron {
  std::vector<double> weights;
  Activation activation = Activation::BipolarSigmoid;

  double bias() const { return weights.back(); }
};

struct Genome {
  std::vector<std::vector<Neuron>> hidden;  // never empty
  Neuron output;                            // single linear neuron (SISO)
  int du = 0;                               // input delay level, samples
  int dy = 0;                               // feedback delay level, samples

  int hidden_neuron_count() const;
  std::vector<int> layer_sizes() const;
  int weight_count() const;  // all weights incl. biases
};

struct StructuralError : std::logic_error {
  using std::logic_error::logic_error;
};

// Weight count (incl. bias) a neuron must carry at 1-based `layer_index`,
// where index hidden_count+1 addresses the output layer.
int required_weights(int layer_index, const std::vector<int>& hidden_sizes,
                     int du, int dy);

// First violated structural rule, or nullopt if the genome is valid.
std::optional<std::string> structural_fault(const Genome& g);
inline bool structurally_valid(const Genome& g) { return !structural_fault(g); }

struct GenomeInit {
  int layer_count_min = 1;
  int layer_count_max = 1;
  int max_neurons_per_layer = 1;  // maxNinLay
  // Delays: either a fixed value or a uniform draw from [min, max].
  std::optional<int> du_fixed;
  std::optional<int> dy_fixed;
  int du_min = 1, du_max = 1;
  int dy_min = 1, dy_max = 1;
  double min_weight = -1.0;
  double max_weight = 1.0;
};

// Draw order: du, dy, layer count, then per layer the neuron count, then
// every weight (bias last) layer by layer, output neuron last.
Genome init_genome(const GenomeInit& init, RngStream& rng);

// Redraws every weight and bias uniformly from [lo, hi]; structure untouched.
void randomize_weights(Genome& g, double lo, double hi, RngStream& rng);

struct SimResult {
  std::vector<double> outputs;  // same length as the input sequence
  bool diverged = false;        // non-finite value hit; outputs after that
                                // point are meaningless
};

// Deterministic closed-loop simulation: the network consumes its own delayed
// outputs. Histories before sample 0 read the nominal values.
SimResult simulate_closed_loop(const Genome& g, std::span<const double> inputs,
                               double nominal_input, double nominal_output);

}  // namespace evonarx
