#include "evonarx/genome.hpp"

#include <cmath>

#include "evonarx/kernels.hpp"

namespace evonarx {

int Genome::hidden_neuron_count() const {
  int n = 0;
  for (const auto& layer : hidden) n += static_cast<int>(layer.size());
  return n;
}

std::vector<int> Genome::layer_sizes() const {
  std::vector<int> sizes;
  sizes.reserve(hidden.size());
  for (const auto& layer : hidden) sizes.push_back(static_cast<int>(layer.size()));
  return sizes;
}

int Genome::weight_count() const {
  int n = static_cast<int>(output.weights.size());
  for (const auto& layer : hidden)
    for (const auto& neuron : layer) n += static_cast<int>(neuron.weights.size());
  return n;
}

int required_weights(int layer_index, const std::vector<int>& hidden_sizes,
                     int du, int dy) {
  const int layer_count = static_cast<int>(hidden_sizes.size());
  if (layer_index < 1 || layer_index > layer_count + 1)
    throw StructuralError("layer_index " + std::to_string(layer_index) +
                          " out of range 1.." + std::to_string(layer_count + 1));
  if (layer_index == 1) return 1 + du + dy + 1;
  return hidden_sizes[static_cast<std::size_t>(layer_index) - 2] + 1;
}

std::optional<std::string> structural_fault(const Genome& g) {
  if (g.du < 0 || g.dy < 0) return "negative delay level";
  if (g.hidden.empty()) return "no hidden layers";
  const auto sizes = g.layer_sizes();
  for (std::size_t l = 0; l < g.hidden.size(); ++l) {
    if (g.hidden[l].empty())
      return "hidden layer " + std::to_string(l + 1) + " is empty";
    const int need = required_weights(static_cast<int>(l) + 1, sizes, g.du, g.dy);
    for (std::size_t j = 0; j < g.hidden[l].size(); ++j) {
      const Neuron& neuron = g.hidden[l][j];
      if (neuron.activation != Activation::BipolarSigmoid)
        return "hidden neuron with non-sigmoid activation";
      if (static_cast<int>(neuron.weights.size()) != need)
        return "layer " + std::to_string(l + 1) + " neuron " +
               std::to_string(j + 1) + " has " +
               std::to_string(neuron.weights.size()) + " weights, needs " +
               std::to_string(need);
      for (double w : neuron.weights)
        if (!std::isfinite(w)) return "non-finite weight";
    }
  }
  if (g.output.activation != Activation::Linear)
    return "output neuron is not linear";
  const int need_out =
      required_weights(static_cast<int>(sizes.size()) + 1, sizes, g.du, g.dy);
  if (static_cast<int>(g.output.weights.size()) != need_out)
    return "output neuron has " + std::to_string(g.output.weights.size()) +
           " weights, needs " + std::to_string(need_out);
  for (double w : g.output.weights)
    if (!std::isfinite(w)) return "non-finite output weight";
  return std::nullopt;
}

Genome init_genome(const GenomeInit& init, RngStream& rng) {
  Genome g;
  g.du = init.du_fixed ? *init.du_fixed
                       : static_cast<int>(rng.uniform_int(init.du_min, init.du_max));
  g.dy = init.dy_fixed ? *init.dy_fixed
                       : static_cast<int>(rng.uniform_int(init.dy_min, init.dy_max));
  const int layers = static_cast<int>(
      rng.uniform_int(init.layer_count_min, init.layer_count_max));
  std::vector<int> sizes(static_cast<std::size_t>(layers));
  for (int& s : sizes)
    s = static_cast<int>(rng.uniform_int(1, init.max_neurons_per_layer));

  g.hidden.resize(sizes.size());
  for (std::size_t l = 0; l < sizes.size(); ++l) {
    const int need = required_weights(static_cast<int>(l) + 1, sizes, g.du, g.dy);
    g.hidden[l].resize(static_cast<std::size_t>(sizes[l]));
    for (Neuron& neuron : g.hidden[l]) {
      neuron.activation = Activation::BipolarSigmoid;
      neuron.weights.resize(static_cast<std::size_t>(need));
      for (double& w : neuron.weights)
        w = rng.uniform(init.min_weight, init.max_weight);
    }
  }
  g.output.activation = Activation::Linear;
  g.output.weights.resize(static_cast<std::size_t>(sizes.back()) + 1);
  for (double& w : g.output.weights)
    w = rng.uniform(init.min_weight, init.max_weight);
  return g;
}

void randomize_weights(Genome& g, double lo, double hi, RngStream& rng) {
  for (auto& layer : g.hidden)
    for (Neuron& neuron : layer)
      for (double& w : neuron.weights) w = rng.uniform(lo, hi);
  for (double& w : g.output.weights) w = rng.uniform(lo, hi);
}

SimResult simulate_closed_loop(const Genome& g, std::span<const double> inputs,
                               double nominal_input, double nominal_output) {
  if (inputs.empty()) throw std::invalid_argument("empty input sequence");

  const std::size_t n = inputs.size();
  SimResult result;
  result.outputs.assign(n, 0.0);

  const int du = g.du;
  const int dy = g.dy;
  std::vector<double> x(static_cast<std::size_t>(1 + du + dy));
  std::vector<double> h_prev, h_cur;

  for (std::size_t k = 0; k < n; ++k) {
    x[0] = inputs[k];
    for (int a = 1; a <= du; ++a)
      x[static_cast<std::size_t>(a)] =
          (k >= static_cast<std::size_t>(a)) ? inputs[k - a] : nominal_input;
    for (int b = 1; b <= dy; ++b)
      x[static_cast<std::size_t>(du + b)] =
          (k >= static_cast<std::size_t>(b)) ? result.outputs[k - b]
                                             : nominal_output;

    const std::vector<double>* in = &x;
    for (const auto& layer : g.hidden) {
      h_cur.resize(layer.size());
      for (std::size_t j = 0; j < layer.size(); ++j) {
        const Neuron& neuron = layer[j];
        const double a = kern::dot(neuron.weights.data(), in->data(), in->size()) +
                         neuron.bias();
        h_cur[j] = std::tanh(a);
      }
      std::swap(h_prev, h_cur);
      in = &h_prev;
    }
    const double y =
        kern::dot(g.output.weights.data(), in->data(), in->size()) +
        g.output.bias();
    if (!std::isfinite(y)) {
      result.diverged = true;
      return result;
    }
    result.outputs[k] = y;
  }
  return result;
}

}  // namespace evonarx
