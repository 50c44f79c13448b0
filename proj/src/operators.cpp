#include "evonarx/operators.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <stdexcept>

namespace evonarx {

std::vector<double> delta_w(std::span<const double> fitness_values,
                            double min_delta, double max_delta) {
  if (fitness_values.empty())
    throw std::invalid_argument("delta_w: empty fitness vector");

  std::vector<double> fit(fitness_values.begin(), fitness_values.end());
  for (double& f : fit) f = -f;
  const double lo = *std::min_element(fit.begin(), fit.end());
  for (double& f : fit) f += std::fabs(lo);
  const double min_fit = *std::min_element(fit.begin(), fit.end());
  const double max_fit = *std::max_element(fit.begin(), fit.end());

  std::vector<double> dw(fit.size(), min_delta);
  const double spread = max_fit - min_fit;
  if (spread < 1e-12) return dw;  // converged population: gentlest change
  for (std::size_t i = 0; i < fit.size(); ++i)
    dw[i] = (max_delta - min_delta) * (fit[i] - min_fit) / spread + min_delta;
  return dw;
}

std::optional<Genome> mutate_weights(const Genome& g, double delta,
                                     double p_mut_weight, RngStream& rng) {
  Genome child = g;
  bool mutated = false;
  const auto mutate_neuron = [&](Neuron& neuron) {
    for (double& w : neuron.weights) {
      if (!rng.bernoulli(p_mut_weight)) continue;
      w += rng.bernoulli(0.5) ? delta : -delta;
      mutated = true;
    }
  };
  for (auto& layer : child.hidden)
    for (Neuron& neuron : layer) mutate_neuron(neuron);
  mutate_neuron(child.output);
  if (!mutated) return std::nullopt;
  return child;
}

namespace {

Neuron random_neuron(int weight_count, Activation act, double lo, double hi,
                     RngStream& rng) {
  Neuron n;
  n.activation = act;
  n.weights.resize(static_cast<std::size_t>(weight_count));
  for (double& w : n.weights) w = rng.uniform(lo, hi);
  return n;
}

// Downstream of hidden layer l: the next hidden layer, or the output neuron.
void insert_downstream_weight(Genome& g, std::size_t layer, std::size_t slot,
                              double lo, double hi, RngStream& rng) {
  const auto insert = [&](Neuron& n) {
    n.weights.insert(n.weights.begin() + static_cast<std::ptrdiff_t>(slot),
                     rng.uniform(lo, hi));
  };
  if (layer + 1 < g.hidden.size())
    for (Neuron& n : g.hidden[layer + 1]) insert(n);
  else
    insert(g.output);
}

void erase_downstream_weight(Genome& g, std::size_t layer, std::size_t slot) {
  const auto erase = [&](Neuron& n) {
    n.weights.erase(n.weights.begin() + static_cast<std::ptrdiff_t>(slot));
  };
  if (layer + 1 < g.hidden.size())
    for (Neuron& n : g.hidden[layer + 1]) erase(n);
  else
    erase(g.output);
}

}  // namespace

std::vector<Genome> mutate_add_neurons(const Genome& g, double p_mut_new_neuron,
                                       double min_w, double max_w,
                                       int max_neurons_per_layer,
                                       RngStream& rng) {
  std::vector<Genome> offspring;
  const auto sizes = g.layer_sizes();
  for (std::size_t l = 0; l < g.hidden.size(); ++l) {
    const int free_places = max_neurons_per_layer - sizes[l];
    const int need = required_weights(static_cast<int>(l) + 1, sizes, g.du, g.dy);
    for (int f = 0; f < free_places; ++f) {
      if (!rng.bernoulli(p_mut_new_neuron)) continue;
      Genome child = g;
      child.hidden[l].push_back(
          random_neuron(need, Activation::BipolarSigmoid, min_w, max_w, rng));
      // The new neuron sits in the first free place, i.e. right after the
      // source layer's last neuron: downstream slot index = old layer size.
      insert_downstream_weight(child, l, static_cast<std::size_t>(sizes[l]),
                               min_w, max_w, rng);
      offspring.push_back(std::move(child));
    }
  }
  return offspring;
}

std::vector<Genome> mutate_delete_neurons(const Genome& g,
                                          double p_mut_del_neuron,
                                          RngStream& rng) {
  std::vector<Genome> offspring;
  for (std::size_t l = 0; l < g.hidden.size(); ++l) {
    for (std::size_t j = 0; j < g.hidden[l].size(); ++j) {
      if (!rng.bernoulli(p_mut_del_neuron)) continue;
      if (g.hidden[l].size() == 1) continue;  // never empty a layer
      Genome child = g;
      child.hidden[l].erase(child.hidden[l].begin() +
                            static_cast<std::ptrdiff_t>(j));
      erase_downstream_weight(child, l, j);
      offspring.push_back(std::move(child));
    }
  }
  return offspring;
}

namespace {

// First-layer weight layout: [u(k)..u(k-du), y(k-1)..y(k-dy), bias].
// End of the u-block is index du; end of the y-block is index du+dy.

Genome with_du_changed(const Genome& g, int delta, double min_w, double max_w,
                       RngStream& rng) {
  Genome child = g;
  child.du += delta;
  for (Neuron& n : child.hidden.front()) {
    if (delta > 0)
      n.weights.insert(n.weights.begin() + (g.du + 1), rng.uniform(min_w, max_w));
    else
      n.weights.erase(n.weights.begin() + g.du);
  }
  return child;
}

Genome with_dy_changed(const Genome& g, int delta, double min_w, double max_w,
                       RngStream& rng) {
  Genome child = g;
  child.dy += delta;
  for (Neuron& n : child.hidden.front()) {
    if (delta > 0)
      n.weights.insert(n.weights.begin() + (g.du + 1 + g.dy),
                       rng.uniform(min_w, max_w));
    else
      n.weights.erase(n.weights.begin() + (g.du + g.dy));
  }
  return child;
}

}  // namespace

std::vector<Genome> mutate_delays(const Genome& g, double p_mut_delay,
                                  double min_w, double max_w, int du_max,
                                  int dy_max, RngStream& rng) {
  std::vector<Genome> offspring;
  if (rng.bernoulli(p_mut_delay)) {
    const int delta = rng.bernoulli(0.5) ? 1 : -1;
    const int next = g.du + delta;
    if (next >= 0 && next <= du_max)
      offspring.push_back(with_du_changed(g, delta, min_w, max_w, rng));
  }
  if (rng.bernoulli(p_mut_delay)) {
    const int delta = rng.bernoulli(0.5) ? 1 : -1;
    const int next = g.dy + delta;
    if (next >= 0 && next <= dy_max)
      offspring.push_back(with_dy_changed(g, delta, min_w, max_w, rng));
  }
  return offspring;
}

int cross_delay(int d_p1, int d_p2, double r) {
  return static_cast<int>(std::llround(r * d_p1 + (1.0 - r) * d_p2));
}

double blend_weight(double w_p1, double w_p2, double r) {
  return r * w_p1 + (1.0 - r) * w_p2;
}

namespace {

// Weight index of semantic first-layer slot `s` inside a parent with delays
// (du, dy), or -1 when the parent has no such input. Slots are numbered for
// the child: 0..du_c are u-lags, du_c+1..du_c+dy_c are y-lags.
int first_layer_source_index(int slot, int du_child, int du_parent,
                             int dy_parent) {
  if (slot <= du_child) {  // u-lag `slot`
    return slot <= du_parent ? slot : -1;
  }
  const int y_lag = slot - du_child;  // 1-based
  return y_lag <= dy_parent ? du_parent + y_lag : -1;
}

struct Origin {
  int p1 = -1;
  int p2 = -1;
};

// Builds one child neuron.  `src1`/`src2` are the parents' neurons at this
// position (null when absent).  `slot_source` maps a child weight slot to the
// corresponding weight index in each parent (-1 when unavailable).
Neuron cross_neuron(const Neuron* src1, const Neuron* src2, int child_slots,
                    const std::function<int(int, int /*parent*/)>& slot_source,
                    double min_w, double max_w, RngStream& rng) {
  Neuron out;
  out.activation = src1 ? src1->activation : src2->activation;
  out.weights.resize(static_cast<std::size_t>(child_slots) + 1);
  for (int s = 0; s < child_slots; ++s) {
    const int i1 = src1 ? slot_source(s, 1) : -1;
    const int i2 = src2 ? slot_source(s, 2) : -1;
    double w;
    if (i1 >= 0 && i2 >= 0)
      w = blend_weight(src1->weights[static_cast<std::size_t>(i1)],
                       src2->weights[static_cast<std::size_t>(i2)],
                       rng.uniform01());
    else if (i1 >= 0)
      w = src1->weights[static_cast<std::size_t>(i1)];
    else if (i2 >= 0)
      w = src2->weights[static_cast<std::size_t>(i2)];
    else
      w = rng.uniform(min_w, max_w);
    out.weights[static_cast<std::size_t>(s)] = w;
  }
  // Bias: blended whenever both parents contribute, otherwise inherited.
  if (src1 && src2)
    out.weights.back() = blend_weight(src1->bias(), src2->bias(), rng.uniform01());
  else
    out.weights.back() = (src1 ? src1 : src2)->bias();
  return out;
}

}  // namespace

Genome crossover_pair(const Genome& p1, const Genome& p2, double min_w,
                      double max_w, RngStream& rng) {
  if (p1.hidden.size() != p2.hidden.size())
    throw StructuralError("crossover_pair: parents differ in layer count");

  Genome child;
  child.du = cross_delay(p1.du, p2.du, rng.uniform01());
  child.dy = cross_delay(p1.dy, p2.dy, rng.uniform01());
  child.hidden.resize(p1.hidden.size());

  // Origins of the previous child layer's neurons in each parent; for the
  // first hidden layer the "previous layer" is the semantic input vector.
  std::vector<Origin> prev_origins;

  for (std::size_t l = 0; l < p1.hidden.size(); ++l) {
    const auto& layer1 = p1.hidden[l];
    const auto& layer2 = p2.hidden[l];
    const std::size_t common = std::min(layer1.size(), layer2.size());

    std::vector<Origin> origins;
    for (std::size_t j = 0; j < common; ++j)
      origins.push_back({static_cast<int>(j), static_cast<int>(j)});
    for (std::size_t j = common; j < std::max(layer1.size(), layer2.size()); ++j) {
      if (!rng.bernoulli(0.5)) continue;  // neuron found in one parent only
      if (j < layer1.size())
        origins.push_back({static_cast<int>(j), -1});
      else
        origins.push_back({-1, static_cast<int>(j)});
    }

    const int child_slots =
        l == 0 ? 1 + child.du + child.dy
               : static_cast<int>(prev_origins.size());

    child.hidden[l].reserve(origins.size());
    for (const Origin& o : origins) {
      const Neuron* src1 = o.p1 >= 0 ? &layer1[static_cast<std::size_t>(o.p1)] : nullptr;
      const Neuron* src2 = o.p2 >= 0 ? &layer2[static_cast<std::size_t>(o.p2)] : nullptr;
      const auto slot_source = [&](int s, int parent) -> int {
        if (l == 0) {
          const Genome& p = parent == 1 ? p1 : p2;
          return first_layer_source_index(s, child.du, p.du, p.dy);
        }
        const Origin& po = prev_origins[static_cast<std::size_t>(s)];
        return parent == 1 ? po.p1 : po.p2;
      };
      child.hidden[l].push_back(
          cross_neuron(src1, src2, child_slots, slot_source, min_w, max_w, rng));
    }
    prev_origins = std::move(origins);
  }

  const auto out_slot_source = [&](int s, int parent) -> int {
    const Origin& po = prev_origins[static_cast<std::size_t>(s)];
    return parent == 1 ? po.p1 : po.p2;
  };
  child.output = cross_neuron(&p1.output, &p2.output,
                              static_cast<int>(prev_origins.size()),
                              out_slot_source, min_w, max_w, rng);
  return child;
}

std::vector<std::pair<std::size_t, std::size_t>> pair_parents(
    std::size_t population_size, double p_cross, RngStream& rng) {
  std::vector<std::size_t> pool;
  for (std::size_t i = 0; i < population_size; ++i)
    if (rng.bernoulli(p_cross)) pool.push_back(i);

  // Fisher-Yates with our stream (std::shuffle is implementation-defined).
  for (std::size_t i = pool.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(
        rng.uniform_int(0, static_cast<std::int64_t>(i) - 1));
    std::swap(pool[i - 1], pool[j]);
  }

  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t i = 0; i + 1 < pool.size(); i += 2)
    pairs.emplace_back(pool[i], pool[i + 1]);
  return pairs;
}

std::vector<std::size_t> best_n_indices(std::span<const double> pool_fitness,
                                        std::size_t n) {
  std::vector<std::size_t> order(pool_fitness.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return pool_fitness[a] > pool_fitness[b];
  });
  if (order.size() > n) order.resize(n);
  return order;
}

std::vector<std::size_t> roulette_select_with_elitism(
    std::span<const double> pool_fitness,
    std::span<const std::uint8_t> pool_diverged, std::size_t pop_size,
    std::size_t hm_best, RngStream& rng) {
  if (pool_fitness.size() != pool_diverged.size())
    throw std::invalid_argument("roulette selection: size mismatch");

  std::vector<std::size_t> candidates;
  for (std::size_t i = 0; i < pool_fitness.size(); ++i)
    if (!pool_diverged[i]) candidates.push_back(i);
  if (candidates.empty())
    for (std::size_t i = 0; i < pool_fitness.size(); ++i) candidates.push_back(i);

  if (candidates.size() <= pop_size) return candidates;

  std::stable_sort(candidates.begin(), candidates.end(),
                   [&](std::size_t a, std::size_t b) {
                     return pool_fitness[a] > pool_fitness[b];
                   });

  const std::size_t elites = std::min(hm_best, pop_size);
  std::vector<std::size_t> selected(candidates.begin(),
                                    candidates.begin() + static_cast<std::ptrdiff_t>(elites));

  std::vector<std::size_t> rest(candidates.begin() + static_cast<std::ptrdiff_t>(elites),
                                candidates.end());
  double min_fit = pool_fitness[rest.front()];
  for (std::size_t i : rest) min_fit = std::min(min_fit, pool_fitness[i]);

  std::vector<double> weight(rest.size());
  double total = 0.0;
  for (std::size_t i = 0; i < rest.size(); ++i) {
    weight[i] = pool_fitness[rest[i]] - min_fit + 1e-6;
    total += weight[i];
  }

  for (std::size_t draw = elites; draw < pop_size && !rest.empty(); ++draw) {
    const double x = rng.uniform01() * total;
    double cum = 0.0;
    std::size_t pick = rest.size() - 1;
    for (std::size_t i = 0; i < rest.size(); ++i) {
      cum += weight[i];
      if (x < cum) {
        pick = i;
        break;
      }
    }
    selected.push_back(rest[pick]);
    total -= weight[pick];
    rest.erase(rest.begin() + static_cast<std::ptrdiff_t>(pick));
    weight.erase(weight.begin() + static_cast<std::ptrdiff_t>(pick));
  }
  return selected;
}

}  // namespace evonarx
