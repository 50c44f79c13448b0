#include "evonarx/algorithms.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <utility>

#include "evonarx/parallel.hpp"

namespace evonarx {

namespace {

// Stream labels: every offspring-producing event draws from its own derived
// stream, so adding or disabling one operator never shifts another's draws.
enum StreamOp : std::uint64_t {
  kInitOp = 1,
  kWeightMutOp = 2,
  kAddNeuronOp = 3,
  kDelNeuronOp = 4,
  kDelayMutOp = 5,
  kPairingOp = 6,
  kCrossoverOp = 7,
  kSelectionOp = 8,
  kRegrowOp = 9,
  kStructMutOp = 10,
  kTrainOp = 11,
  kRetrainOp = 12,
  kCallOp = 13,
};

}  // namespace

bool SpeciesKey::operator==(const SpeciesKey& other) const {
  if (mode != other.mode) return false;
  if (neuron_counts != other.neuron_counts) return false;
  if (mode == Mode::NeuronCount) return true;
  return du == other.du && dy == other.dy && trainer == other.trainer;
}

SpeciesKey neuron_count_key(const Genome& g) {
  SpeciesKey key;
  key.mode = SpeciesKey::Mode::NeuronCount;
  key.neuron_counts = {static_cast<int>(g.hidden.front().size())};
  return key;
}

SpeciesKey full_architecture_key(const Genome& g, TrainerKind trainer) {
  SpeciesKey key;
  key.mode = SpeciesKey::Mode::FullArchitecture;
  key.neuron_counts = g.layer_sizes();
  key.du = g.du;
  key.dy = g.dy;
  key.trainer = trainer;
  return key;
}

DominationState detect_domination(std::span<const FitnessRecord> records,
                                  std::span<const SpeciesKey> keys,
                                  std::size_t hm_best) {
  DominationState state;
  if (records.size() < hm_best || hm_best == 0) return state;

  std::vector<double> fit(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) fit[i] = records[i].fitness;
  const auto top = best_n_indices(fit, hm_best);

  const SpeciesKey& lead = keys[top.front()];
  for (std::size_t i : top)
    if (!(keys[i] == lead)) return state;

  state.dominated = true;
  state.dominant = lead;
  const int n = lead.neuron_counts.front();
  if (n > 1) {
    SpeciesKey below = lead;
    below.neuron_counts.front() = n - 1;
    state.secondary.push_back(below);
  }
  SpeciesKey above = lead;
  above.neuron_counts.front() = n + 1;
  state.secondary.push_back(above);
  return state;
}

std::uint64_t call_seed(std::uint64_t master_seed, int call_index) {
  return derive_seed(master_seed, kCallOp, static_cast<std::uint64_t>(call_index),
                     0);
}

std::vector<std::pair<std::size_t, std::size_t>> intra_species_pairs(
    std::span<const SpeciesKey> keys, std::span<const SpeciesKey> wanted,
    std::uint64_t run_seed, std::uint64_t generation) {
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t w = 0; w < wanted.size(); ++w) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < keys.size(); ++i)
      if (keys[i] == wanted[w]) members.push_back(i);
    if (members.size() < 2) continue;
    RngStream ps = derive_stream(run_seed, kPairingOp, generation, w + 1);
    for (const auto& [a, b] : pair_parents(members.size(), 1.0, ps))
      pairs.emplace_back(members[a], members[b]);
  }
  return pairs;
}

namespace {

GenerationStats population_stats(std::span<const FitnessRecord> records) {
  GenerationStats s;
  s.population = static_cast<int>(records.size());
  double best = -std::numeric_limits<double>::infinity();
  double fit_sum = 0.0, err_sum = 0.0;
  int alive = 0;
  for (const auto& r : records) {
    best = std::max(best, r.fitness);
    if (r.diverged) continue;
    fit_sum += r.fitness;
    err_sum += r.mean_error;
    ++alive;
  }
  s.best_fitness = best;
  s.mean_fitness = alive > 0 ? fit_sum / alive : kDivergedFitness;
  s.mean_error = alive > 0 ? err_sum / alive
                           : std::numeric_limits<double>::infinity();
  return s;
}

GenomeInit init_from_config(const NasConfig& cfg) {
  GenomeInit init;
  init.layer_count_min = cfg.maxLay;  // DNAS1-3: fixed hidden layer count
  init.layer_count_max = cfg.maxLay;
  init.max_neurons_per_layer = cfg.maxNinLay;
  init.du_fixed = cfg.duFixed;
  init.dy_fixed = cfg.dyFixed;
  init.du_min = std::min(1, cfg.duMax);
  init.du_max = cfg.duMax;
  init.dy_min = std::min(1, cfg.dyMax);
  init.dy_max = cfg.dyMax;
  init.min_weight = cfg.minW;
  init.max_weight = cfg.maxW;
  return init;
}

// Weight-mutation magnitudes for the current population: the published
// fitness-to-delta mapping over the non-diverged members; diverged members
// (absent from the paper's setting) get the coarsest step.
std::vector<double> population_deltas(std::span<const FitnessRecord> records,
                                      const NasConfig& cfg) {
  std::vector<double> alive_fitness;
  for (const auto& r : records)
    if (!r.diverged) alive_fitness.push_back(r.fitness);
  std::vector<double> out(records.size(), cfg.maxDelta);
  if (alive_fitness.empty()) return out;
  const std::vector<double> dw = delta_w(alive_fitness, cfg.minDelta, cfg.maxDelta);
  std::size_t at = 0;
  for (std::size_t i = 0; i < records.size(); ++i)
    if (!records[i].diverged) out[i] = dw[at++];
  return out;
}

struct EvolvedPopulation {
  std::vector<Genome> genomes;
  std::vector<FitnessRecord> records;
};

struct LoopTraits {
  bool delete_neurons = false;
  bool delay_mutation = false;
  bool dnas3_species = false;
};

RunResult finalize_run(const std::vector<Genome>& pop,
                       const std::vector<FitnessRecord>& records,
                       std::vector<GenerationStats> history) {
  RunResult result;
  result.per_generation = std::move(history);
  std::size_t best = 0;
  for (std::size_t i = 1; i < pop.size(); ++i)
    if (records[i].fitness > records[best].fitness) best = i;
  result.best = pop[best];
  result.best_record = records[best];
  double du_sum = 0.0, dy_sum = 0.0;
  for (std::size_t i = 0; i < pop.size(); ++i) {
    result.final_neuron_histogram[pop[i].hidden_neuron_count()]++;
    du_sum += pop[i].du;
    dy_sum += pop[i].dy;
  }
  result.final_du_avg = du_sum / static_cast<double>(pop.size());
  result.final_dy_avg = dy_sum / static_cast<double>(pop.size());
  return result;
}

RunResult run_evolution(const NasConfig& cfg, const Dataset& data,
                        std::uint64_t run_seed, const LoopTraits& traits) {
  validate(cfg);
  const auto t0 = std::chrono::steady_clock::now();
  const FitnessWeights weights = cfg.fitness_weights();
  const GenomeInit init = init_from_config(cfg);

  std::vector<Genome> pop;
  pop.reserve(static_cast<std::size_t>(cfg.popSize));
  for (int i = 0; i < cfg.popSize; ++i) {
    RngStream s = derive_stream(run_seed, kInitOp, 0, static_cast<std::uint64_t>(i));
    pop.push_back(init_genome(init, s));
  }
  std::vector<FitnessRecord> records =
      evaluate_population(pop, data, weights, cfg.threads);

  std::vector<GenerationStats> history;
  history.push_back(population_stats(records));

  double cur_pcross = cfg.pCross;
  bool was_dominated = false;

  for (int gen = 1; gen <= cfg.generations; ++gen) {
    const auto g64 = static_cast<std::uint64_t>(gen);

    DominationState domination;
    if (traits.dnas3_species) {
      std::vector<SpeciesKey> keys;
      keys.reserve(pop.size());
      for (const Genome& g : pop) keys.push_back(neuron_count_key(g));
      domination = detect_domination(records, keys, static_cast<std::size_t>(cfg.hmBest));

      if (was_dominated && !domination.dominated) {
        // Domination lost: restore inter-species crossover at the reduced
        // rate and regrow the population toward popSize by mutating the
        // survivors.
        cur_pcross = 0.2;
        const std::vector<double> deltas = population_deltas(records, cfg);
        const std::size_t survivors = pop.size();
        std::size_t attempt = 0;
        while (pop.size() < static_cast<std::size_t>(cfg.popSize) &&
               attempt < 50 * static_cast<std::size_t>(cfg.popSize)) {
          const std::size_t src = attempt % survivors;
          RngStream s = derive_stream(run_seed, kRegrowOp, g64, attempt);
          ++attempt;
          std::optional<Genome> grown;
          switch (attempt % 4) {
            case 0: {
              auto batch = mutate_add_neurons(pop[src], cfg.pMutNewN, cfg.minW,
                                              cfg.maxW, cfg.maxNinLay, s);
              if (!batch.empty()) grown = std::move(batch.front());
              break;
            }
            case 1:
              grown = mutate_weights(pop[src], deltas[src], cfg.pMutW, s);
              break;
            case 2: {
              auto batch = mutate_delays(pop[src], cfg.pMutD, cfg.minW, cfg.maxW,
                                         cfg.duMax, cfg.dyMax, s);
              if (!batch.empty()) grown = std::move(batch.front());
              break;
            }
            default: {
              auto batch = mutate_delete_neurons(pop[src], cfg.pMutDelN, s);
              if (!batch.empty()) grown = std::move(batch.front());
              break;
            }
          }
          if (!grown) continue;
          records.push_back(evaluate_genome(*grown, data, weights));
          pop.push_back(std::move(*grown));
        }
      }
      was_dominated = domination.dominated;
    }

    // Mutation phase.
    std::vector<Genome> offspring;
    const std::vector<double> deltas = population_deltas(records, cfg);
    for (std::size_t i = 0; i < pop.size(); ++i) {
      const auto i64 = static_cast<std::uint64_t>(i);
      {
        RngStream s = derive_stream(run_seed, kWeightMutOp, g64, i64);
        if (auto child = mutate_weights(pop[i], deltas[i], cfg.pMutW, s))
          offspring.push_back(std::move(*child));
      }
      {
        RngStream s = derive_stream(run_seed, kAddNeuronOp, g64, i64);
        for (Genome& child : mutate_add_neurons(pop[i], cfg.pMutNewN, cfg.minW,
                                                cfg.maxW, cfg.maxNinLay, s))
          offspring.push_back(std::move(child));
      }
      if (traits.delay_mutation) {
        RngStream s = derive_stream(run_seed, kDelayMutOp, g64, i64);
        for (Genome& child : mutate_delays(pop[i], cfg.pMutD, cfg.minW, cfg.maxW,
                                           cfg.duMax, cfg.dyMax, s))
          offspring.push_back(std::move(child));
      }
      if (traits.delete_neurons) {
        RngStream s = derive_stream(run_seed, kDelNeuronOp, g64, i64);
        for (Genome& child : mutate_delete_neurons(pop[i], cfg.pMutDelN, s))
          offspring.push_back(std::move(child));
      }
    }

    // Crossover phase.
    if (traits.dnas3_species && domination.dominated) {
      // Intra-species crossover at pCross = 1 within the dominant and
      // secondary species.
      std::vector<SpeciesKey> wanted;
      wanted.push_back(*domination.dominant);
      for (const auto& k : domination.secondary) wanted.push_back(k);
      std::vector<SpeciesKey> keys;
      keys.reserve(pop.size());
      for (const Genome& g : pop) keys.push_back(neuron_count_key(g));
      const auto pairs = intra_species_pairs(keys, wanted, run_seed, g64);
      for (std::size_t p = 0; p < pairs.size(); ++p) {
        RngStream cs = derive_stream(run_seed, kCrossoverOp, g64, p);
        offspring.push_back(crossover_pair(pop[pairs[p].first],
                                           pop[pairs[p].second], cfg.minW,
                                           cfg.maxW, cs));
      }
    } else {
      RngStream ps = derive_stream(run_seed, kPairingOp, g64, 0);
      const auto pairs = pair_parents(pop.size(), cur_pcross, ps);
      for (std::size_t p = 0; p < pairs.size(); ++p) {
        RngStream cs = derive_stream(run_seed, kCrossoverOp, g64, p);
        offspring.push_back(crossover_pair(pop[pairs[p].first],
                                           pop[pairs[p].second], cfg.minW,
                                           cfg.maxW, cs));
      }
    }

    std::vector<FitnessRecord> offspring_records =
        evaluate_population(offspring, data, weights, cfg.threads);

    // mu + lambda pool.
    std::vector<Genome> pool = std::move(pop);
    std::vector<FitnessRecord> pool_records = std::move(records);
    for (std::size_t i = 0; i < offspring.size(); ++i) {
      pool.push_back(std::move(offspring[i]));
      pool_records.push_back(offspring_records[i]);
    }

    std::vector<std::size_t> keep;
    if (traits.dnas3_species) {
      std::vector<double> fit(pool.size());
      for (std::size_t i = 0; i < pool.size(); ++i) fit[i] = pool_records[i].fitness;
      if (domination.dominated) {
        // hmBest best of the dominant species and of each secondary species.
        std::vector<SpeciesKey> wanted;
        wanted.push_back(*domination.dominant);
        for (const auto& k : domination.secondary) wanted.push_back(k);
        for (const auto& key : wanted) {
          std::vector<std::size_t> members;
          for (std::size_t i = 0; i < pool.size(); ++i)
            if (!pool_records[i].diverged && neuron_count_key(pool[i]) == key)
              members.push_back(i);
          std::stable_sort(members.begin(), members.end(),
                           [&](std::size_t a, std::size_t b) {
                             return fit[a] > fit[b];
                           });
          if (members.size() > static_cast<std::size_t>(cfg.hmBest))
            members.resize(static_cast<std::size_t>(cfg.hmBest));
          keep.insert(keep.end(), members.begin(), members.end());
        }
        if (keep.empty()) keep = best_n_indices(fit, static_cast<std::size_t>(cfg.popSize));
      } else {
        // Full elitism, the roulette is not used in DNAS3.
        std::vector<std::size_t> alive;
        for (std::size_t i = 0; i < pool.size(); ++i)
          if (!pool_records[i].diverged) alive.push_back(i);
        if (alive.empty())
          for (std::size_t i = 0; i < pool.size(); ++i) alive.push_back(i);
        std::stable_sort(alive.begin(), alive.end(),
                         [&](std::size_t a, std::size_t b) {
                           return fit[a] > fit[b];
                         });
        if (alive.size() > static_cast<std::size_t>(cfg.popSize))
          alive.resize(static_cast<std::size_t>(cfg.popSize));
        keep = std::move(alive);
      }
    } else {
      std::vector<double> fit(pool.size());
      std::vector<std::uint8_t> diverged(pool.size());
      for (std::size_t i = 0; i < pool.size(); ++i) {
        fit[i] = pool_records[i].fitness;
        diverged[i] = pool_records[i].diverged ? 1 : 0;
      }
      RngStream ss = derive_stream(run_seed, kSelectionOp, g64, 0);
      keep = roulette_select_with_elitism(
          fit, diverged, static_cast<std::size_t>(cfg.popSize),
          static_cast<std::size_t>(cfg.hmBest), ss);
    }

    pop.clear();
    records.clear();
    for (std::size_t i : keep) {
      pop.push_back(std::move(pool[i]));
      records.push_back(pool_records[i]);
    }
    history.push_back(population_stats(records));
  }

  RunResult result = finalize_run(pop, records, std::move(history));
  for (const Genome& g : pop) result.final_species.push_back(neuron_count_key(g));
  result.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return result;
}

}  // namespace

RunResult run_dnas1(const NasConfig& cfg, const Dataset& data,
                    std::uint64_t run_seed) {
  // Fixed delays, no neuron deletion, no delay mutation.
  NasConfig pinned = cfg;
  if (!pinned.duFixed) pinned.duFixed = 5;
  if (!pinned.dyFixed) pinned.dyFixed = 5;
  return run_evolution(pinned, data, run_seed, {false, false, false});
}

RunResult run_dnas2(const NasConfig& cfg, const Dataset& data,
                    std::uint64_t run_seed) {
  return run_evolution(cfg, data, run_seed, {false, true, false});
}

RunResult run_dnas3(const NasConfig& cfg, const Dataset& data,
                    std::uint64_t run_seed) {
  return run_evolution(cfg, data, run_seed, {true, true, true});
}

// ---- DNAS4 ----

namespace {

struct Dnas4Individual {
  Genome genome;
  TrainerKind trainer = TrainerKind::LevenbergMarquardt;
  FitnessRecord record;
};

Genome make_skeleton(const std::vector<int>& sizes, int du, int dy) {
  Genome g;
  g.du = du;
  g.dy = dy;
  g.hidden.resize(sizes.size());
  for (std::size_t l = 0; l < sizes.size(); ++l) {
    const int need = required_weights(static_cast<int>(l) + 1, sizes, du, dy);
    g.hidden[l].assign(static_cast<std::size_t>(sizes[l]),
                       Neuron{std::vector<double>(static_cast<std::size_t>(need), 0.0),
                              Activation::BipolarSigmoid});
  }
  g.output.activation = Activation::Linear;
  g.output.weights.assign(static_cast<std::size_t>(sizes.back()) + 1, 0.0);
  return g;
}

TrainerKind random_trainer(RngStream& rng) {
  switch (rng.uniform_int(0, 2)) {
    case 0: return TrainerKind::LevenbergMarquardt;
    case 1: return TrainerKind::BayesianRegularization;
    default: return TrainerKind::ScaledConjugateGradient;
  }
}

TrainerKind other_trainer(TrainerKind current, RngStream& rng) {
  std::vector<TrainerKind> others;
  for (TrainerKind k : {TrainerKind::LevenbergMarquardt,
                        TrainerKind::BayesianRegularization,
                        TrainerKind::ScaledConjugateGradient})
    if (k != current) others.push_back(k);
  return others[static_cast<std::size_t>(rng.uniform_int(0, 1))];
}

// Architecture descriptor for mutation/crossover; weights are irrelevant
// because every new individual is trained from fresh random weights.
struct Arch {
  std::vector<int> sizes;
  int du = 0;
  int dy = 0;
  TrainerKind trainer = TrainerKind::LevenbergMarquardt;
};

Arch arch_of(const Dnas4Individual& ind) {
  return {ind.genome.layer_sizes(), ind.genome.du, ind.genome.dy, ind.trainer};
}

// Mutates exactly one feature: layer count, per-layer neuron counts, delay
// levels, or the learning method.
std::optional<Arch> mutate_arch(const Arch& src, const NasConfig& cfg,
                                RngStream& rng) {
  Arch out = src;
  switch (rng.uniform_int(0, 3)) {
    case 0: {  // hidden layer count: insert or remove a random layer
      const bool can_insert = static_cast<int>(out.sizes.size()) < cfg.maxLay;
      const bool can_remove = out.sizes.size() > 1;
      if (!can_insert && !can_remove) return std::nullopt;
      bool insert = rng.bernoulli(0.5);
      if (insert && !can_insert) insert = false;
      if (!insert && !can_remove) insert = true;
      if (insert) {
        const auto pos = static_cast<std::size_t>(
            rng.uniform_int(0, static_cast<std::int64_t>(out.sizes.size())));
        const int neurons = static_cast<int>(rng.uniform_int(1, cfg.maxNinLay));
        out.sizes.insert(out.sizes.begin() + static_cast<std::ptrdiff_t>(pos),
                         neurons);
      } else {
        const auto pos = static_cast<std::size_t>(rng.uniform_int(
            0, static_cast<std::int64_t>(out.sizes.size()) - 1));
        out.sizes.erase(out.sizes.begin() + static_cast<std::ptrdiff_t>(pos));
      }
      return out;
    }
    case 1: {  // one neuron added or removed per layer, drawn per layer
      for (std::size_t l = 0; l < out.sizes.size(); ++l) {
        const bool add = rng.bernoulli(0.5);
        if (add) {
          out.sizes[l] += 1;
        } else if (out.sizes[l] > 1) {
          out.sizes[l] -= 1;
        } else if (out.sizes.size() > 1) {
          out.sizes.erase(out.sizes.begin() + static_cast<std::ptrdiff_t>(l));
          --l;  // removing the last neuron removes the layer
        }
      }
      return out;
    }
    case 2: {  // both delay levels move by one, direction drawn per level
      const int ddu = rng.bernoulli(0.5) ? 1 : -1;
      const int ddy = rng.bernoulli(0.5) ? 1 : -1;
      const int ndu = out.du + ddu;
      const int ndy = out.dy + ddy;
      if (ndu >= 0 && ndu <= cfg.duMax) out.du = ndu;
      if (ndy >= 0 && ndy <= cfg.dyMax) out.dy = ndy;
      return out;
    }
    default:
      out.trainer = other_trainer(out.trainer, rng);
      return out;
  }
}

Arch crossover_arch(const Arch& a, const Arch& b, RngStream& rng) {
  Arch child;
  const int layers = cross_delay(static_cast<int>(a.sizes.size()),
                                 static_cast<int>(b.sizes.size()),
                                 rng.uniform01());
  for (int i = 0; i < layers; ++i) {
    const int na = i < static_cast<int>(a.sizes.size()) ? a.sizes[static_cast<std::size_t>(i)] : 0;
    const int nb = i < static_cast<int>(b.sizes.size()) ? b.sizes[static_cast<std::size_t>(i)] : 0;
    const int n = cross_delay(na, nb, rng.uniform01());
    if (n > 0) child.sizes.push_back(n);  // a layer rounded to zero vanishes
  }
  child.du = cross_delay(a.du, b.du, rng.uniform01());
  child.dy = cross_delay(a.dy, b.dy, rng.uniform01());
  child.trainer = rng.bernoulli(0.5) ? a.trainer : b.trainer;
  return child;
}

Dnas4Individual train_arch(const Arch& arch, const NasConfig& cfg,
                           const Dataset& data, const FitnessWeights& weights,
                           RngStream& rng) {
  Dnas4Individual ind;
  ind.trainer = arch.trainer;
  const Genome skeleton = make_skeleton(arch.sizes, arch.du, arch.dy);
  try {
    TrainResult tr = train(skeleton, data, cfg.train_spec(arch.trainer), rng);
    ind.genome = std::move(tr.genome);
    if (tr.diverged) {
      ind.record.diverged = true;
      ind.record.fitness = kDivergedFitness;
      ind.record.neuron_count = ind.genome.hidden_neuron_count();
      ind.record.delay_sum = ind.genome.du + ind.genome.dy;
      return ind;
    }
  } catch (const std::invalid_argument&) {
    // Dataset shorter than the architecture's delays: unusable individual.
    ind.genome = skeleton;
    ind.record.diverged = true;
    ind.record.fitness = kDivergedFitness;
    return ind;
  }
  ind.record = evaluate_genome(ind.genome, data, weights);
  return ind;
}

}  // namespace

RunResult run_dnas4(const NasConfig& cfg, const Dataset& data,
                    std::uint64_t run_seed) {
  validate(cfg);
  const auto t0 = std::chrono::steady_clock::now();
  const FitnessWeights weights = cfg.fitness_weights();

  GenomeInit init = init_from_config(cfg);
  init.layer_count_min = 1;
  init.layer_count_max = cfg.maxLay;

  // Initial population: random architectures, trained before evaluation.
  std::vector<Arch> seeds(static_cast<std::size_t>(cfg.popSize));
  for (int i = 0; i < cfg.popSize; ++i) {
    RngStream s = derive_stream(run_seed, kInitOp, 0, static_cast<std::uint64_t>(i));
    const Genome draft = init_genome(init, s);
    seeds[static_cast<std::size_t>(i)] = {draft.layer_sizes(), draft.du, draft.dy,
                                          random_trainer(s)};
  }
  std::vector<Dnas4Individual> pop(seeds.size());
  parallel_for(seeds.size(), cfg.threads, [&](std::size_t i) {
    RngStream s = derive_stream(run_seed, kTrainOp, 0, i);
    pop[i] = train_arch(seeds[i], cfg, data, weights, s);
  });

  const auto stats_of = [&](const std::vector<Dnas4Individual>& p) {
    std::vector<FitnessRecord> rs;
    rs.reserve(p.size());
    for (const auto& ind : p) rs.push_back(ind.record);
    return population_stats(rs);
  };

  std::vector<GenerationStats> history;
  history.push_back(stats_of(pop));

  for (int gen = 1; gen <= cfg.generations; ++gen) {
    const auto g64 = static_cast<std::uint64_t>(gen);

    // Retraining pass: reselected individuals restart from fresh weights and
    // keep the new result only when it improves.
    {
      std::vector<std::size_t> chosen;
      for (std::size_t i = 0; i < pop.size(); ++i) {
        RngStream s = derive_stream(run_seed, kRetrainOp, g64, i);
        if (s.bernoulli(cfg.pRetrain)) chosen.push_back(i);
      }
      std::vector<Dnas4Individual> retrained(chosen.size());
      parallel_for(chosen.size(), cfg.threads, [&](std::size_t c) {
        RngStream s = derive_stream(run_seed, kRetrainOp, g64,
                                    1000000 + chosen[c]);
        retrained[c] = train_arch(arch_of(pop[chosen[c]]), cfg, data, weights, s);
      });
      for (std::size_t c = 0; c < chosen.size(); ++c)
        if (retrained[c].record.fitness > pop[chosen[c]].record.fitness)
          pop[chosen[c]] = std::move(retrained[c]);
    }

    // Structure mutation and crossover produce new architectures.
    std::vector<Arch> new_archs;
    for (std::size_t i = 0; i < pop.size(); ++i) {
      RngStream s = derive_stream(run_seed, kStructMutOp, g64, i);
      if (!s.bernoulli(cfg.pMut)) continue;
      if (auto arch = mutate_arch(arch_of(pop[i]), cfg, s))
        new_archs.push_back(std::move(*arch));
    }
    {
      RngStream ps = derive_stream(run_seed, kPairingOp, g64, 0);
      const auto pairs = pair_parents(pop.size(), cfg.pCross, ps);
      for (std::size_t p = 0; p < pairs.size(); ++p) {
        RngStream cs = derive_stream(run_seed, kCrossoverOp, g64, p);
        new_archs.push_back(
            crossover_arch(arch_of(pop[pairs[p].first]),
                           arch_of(pop[pairs[p].second]), cs));
      }
    }

    std::vector<Dnas4Individual> offspring(new_archs.size());
    parallel_for(new_archs.size(), cfg.threads, [&](std::size_t i) {
      RngStream s = derive_stream(run_seed, kTrainOp, g64, i);
      offspring[i] = train_arch(new_archs[i], cfg, data, weights, s);
    });

    // mu + lambda, best first, one survivor per species, at most popSize.
    std::vector<Dnas4Individual> pool = std::move(pop);
    for (auto& ind : offspring) pool.push_back(std::move(ind));

    std::vector<std::size_t> order(pool.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return pool[a].record.fitness > pool[b].record.fitness;
    });

    pop.clear();
    std::vector<SpeciesKey> kept_keys;
    for (std::size_t idx : order) {
      if (pop.size() >= static_cast<std::size_t>(cfg.popSize)) break;
      const SpeciesKey key =
          full_architecture_key(pool[idx].genome, pool[idx].trainer);
      bool seen = false;
      for (const auto& k : kept_keys)
        if (k == key) {
          seen = true;
          break;
        }
      if (seen) continue;
      kept_keys.push_back(key);
      pop.push_back(std::move(pool[idx]));
    }
    history.push_back(stats_of(pop));
  }

  std::vector<Genome> genomes;
  std::vector<FitnessRecord> recs;
  genomes.reserve(pop.size());
  for (auto& ind : pop) {
    genomes.push_back(ind.genome);
    recs.push_back(ind.record);
  }
  RunResult result = finalize_run(genomes, recs, std::move(history));
  for (const auto& ind : pop)
    result.final_species.push_back(
        full_architecture_key(ind.genome, ind.trainer));
  std::size_t best = 0;
  for (std::size_t i = 1; i < pop.size(); ++i)
    if (pop[i].record.fitness > pop[best].record.fitness) best = i;
  result.best_trainer = pop[best].trainer;
  result.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return result;
}

RunResult run_algorithm(const NasConfig& cfg, const Dataset& data,
                        std::uint64_t run_seed) {
  switch (cfg.algorithm) {
    case Algorithm::Dnas1: return run_dnas1(cfg, data, run_seed);
    case Algorithm::Dnas2: return run_dnas2(cfg, data, run_seed);
    case Algorithm::Dnas3: return run_dnas3(cfg, data, run_seed);
    case Algorithm::Dnas4: return run_dnas4(cfg, data, run_seed);
    case Algorithm::Exhaustive:
      throw ConfigError("exhaustive search is not a generation loop; use exhaustive_search()");
  }
  throw ConfigError("unknown algorithm");
}

ExhaustiveResult exhaustive_search(const NasConfig& cfg, const Dataset& data,
                                   std::uint64_t run_seed) {
  validate(cfg);
  const auto t0 = std::chrono::steady_clock::now();
  const FitnessWeights weights = cfg.fitness_weights();

  struct Job {
    int neurons, du, dy, repeat;
    std::size_t point;
  };
  ExhaustiveResult result;
  std::vector<Job> jobs;
  for (int n = 1; n <= cfg.gridNeuronsMax; ++n)
    for (int du : cfg.gridDu)
      for (int dy : cfg.gridDy) {
        GridPoint point;
        point.neurons = n;
        point.du = du;
        point.dy = dy;
        point.best_fitness = -std::numeric_limits<double>::infinity();
        for (int r = 0; r < cfg.gridRepeats; ++r)
          jobs.push_back({n, du, dy, r, result.points.size()});
        result.points.push_back(std::move(point));
      }

  std::vector<Dnas4Individual> outcomes(jobs.size());
  parallel_for(jobs.size(), cfg.threads, [&](std::size_t j) {
    const Job& job = jobs[j];
    RngStream s = derive_stream(run_seed, kTrainOp,
                                static_cast<std::uint64_t>(job.point),
                                static_cast<std::uint64_t>(job.repeat));
    const Arch arch{{job.neurons}, job.du, job.dy, cfg.gridTrainer};
    outcomes[j] = train_arch(arch, cfg, data, weights, s);
  });

  for (std::size_t j = 0; j < jobs.size(); ++j) {
    GridPoint& point = result.points[jobs[j].point];
    const auto& out = outcomes[j];
    if (out.record.diverged) continue;
    if (out.record.fitness > point.best_fitness) {
      point.best_fitness = out.record.fitness;
      point.best_mean_error = out.record.mean_error;
      point.best_genome = out.genome;
    }
  }
  for (std::size_t i = 1; i < result.points.size(); ++i)
    if (result.points[i].best_fitness >
        result.points[result.winner].best_fitness)
      result.winner = i;

  result.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return result;
}

}  // namespace evonarx
