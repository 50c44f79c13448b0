// Acceptance suite: one pass/fail line per criterion, nonzero exit if any
// criterion fails. The CLI binary path is taken from argv[1] (needed for the
// byte-level determinism criterion).

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "evonarx/algorithms.hpp"
#include "evonarx/config.hpp"
#include "evonarx/dataset_io.hpp"
#include "evonarx/kernels.hpp"
#include "evonarx/operators.hpp"
#include "evonarx/plant.hpp"
#include "evonarx/trainer.hpp"

using namespace evonarx;
namespace fs = std::filesystem;

namespace {

int g_failures = 0;
std::string g_cli_path;

struct Timer {
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
        .count();
  }
};

void report(int criterion, bool pass, const std::string& what,
            const std::string& detail, double seconds) {
  std::printf("[%s] criterion %2d: %s (%s; %.1fs)\n", pass ? "PASS" : "FAIL",
              criterion, what.c_str(), detail.c_str(), seconds);
  std::fflush(stdout);
  if (!pass) ++g_failures;
}

const Dataset& learning_set() {
  static const Dataset data = [] {
    SurrogatePlantParams params;
    return generate_dataset(params, learning_schedule(), 3000.0, 1.0, nullptr,
                            "learning");
  }();
  return data;
}

Genome random_genome(RngStream& rng, int max_neurons, int dmax) {
  GenomeInit init;
  init.max_neurons_per_layer = max_neurons;
  init.du_min = 0;
  init.du_max = dmax;
  init.dy_min = 0;
  init.dy_max = dmax;
  return init_genome(init, rng);
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// ---- criterion 1: operator structural fuzz ----
void criterion1() {
  Timer timer;
  RngStream rng(101);
  int applications = 0, failures = 0;
  while (applications < 10000) {
    const Genome g = random_genome(rng, 6, 8);
    RngStream s = derive_stream(7, static_cast<std::uint64_t>(applications), 0, 0);
    const auto check = [&](const Genome& child) {
      if (structural_fault(child)) ++failures;
      ++applications;
    };
    if (const auto child = mutate_weights(g, 0.05, 0.4, s)) check(*child);
    for (const Genome& child : mutate_add_neurons(g, 0.5, -1, 1, 6, s))
      check(child);
    for (const Genome& child : mutate_delete_neurons(g, 0.5, s)) check(child);
    for (const Genome& child : mutate_delays(g, 0.7, -1, 1, 8, 8, s))
      check(child);
  }
  const double secs = timer.seconds();
  report(1, failures == 0 && secs < 60.0, "operator structural fuzz",
         std::to_string(applications) + " offspring, " +
             std::to_string(failures) + " structural failures",
         secs);
}

// ---- criterion 2: delta-w mapping ----
void criterion2() {
  Timer timer;
  bool ok = true;
  std::string detail = "endpoints exact, mapping monotone";
  RngStream rng(202);
  for (int trial = 0; trial < 1000 && ok; ++trial) {
    const std::size_t n = static_cast<std::size_t>(rng.uniform_int(2, 20));
    std::vector<double> fit(n);
    for (double& f : fit) f = rng.uniform(-50.0, 50.0);
    const auto dw = delta_w(fit, 0.0001, 0.1);
    const auto best = static_cast<std::size_t>(
        std::max_element(fit.begin(), fit.end()) - fit.begin());
    const auto worst = static_cast<std::size_t>(
        std::min_element(fit.begin(), fit.end()) - fit.begin());
    if (fit[best] - fit[worst] < 1e-12) continue;
    if (std::fabs(dw[best] - 0.0001) > 1e-12 || std::fabs(dw[worst] - 0.1) > 1e-12)
      ok = false;
    for (std::size_t i = 0; i < n && ok; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (fit[i] < fit[j] && dw[i] < dw[j] - 1e-15) {
          ok = false;
          break;
        }
  }
  const auto worked = delta_w(std::vector<double>{9.9, 9.5, 8.0}, 0.0001, 0.1);
  if (std::fabs(worked[0] - 0.0001) > 1e-6 ||
      std::fabs(worked[1] - 0.021132) > 1e-6 || std::fabs(worked[2] - 0.1) > 1e-6) {
    ok = false;
    detail = "worked example mismatch";
  }
  report(2, ok, "delta-w fitness-to-step mapping", detail, timer.seconds());
}

// ---- criterion 3: fitness trade-off ----
void criterion3() {
  Timer timer;
  const FitnessWeights w;  // (1, 0.01, 0.0001), base 10
  const double a = fitness(0.02, 5, 10, w);
  const double b = fitness(0.03, 4, 10, w);
  const bool ok = std::fabs(a - b) < 1e-12;
  std::ostringstream detail;
  detail << "f(0.02,5,10)=" << a << " vs f(0.03,4,10)=" << b;
  report(3, ok, "fitness one-neuron/1%-error trade-off", detail.str(),
         timer.seconds());
}

// ---- criterion 4: crossover bound properties ----
void criterion4() {
  Timer timer;
  RngStream rng(404);
  int pairs = 0, failures = 0;
  while (pairs < 10000) {
    const Genome p1 = random_genome(rng, 6, 8);
    const Genome p2 = random_genome(rng, 6, 8);
    RngStream s = derive_stream(17, static_cast<std::uint64_t>(pairs), 0, 0);
    const Genome child = crossover_pair(p1, p2, -1, 1, s);
    ++pairs;

    bool ok = !structural_fault(child);
    ok = ok && child.du >= std::min(p1.du, p2.du) &&
         child.du <= std::max(p1.du, p2.du);
    ok = ok && child.dy >= std::min(p1.dy, p2.dy) &&
         child.dy <= std::max(p1.dy, p2.dy);
    ok = ok && child.hidden[0].size() <=
                   std::max(p1.hidden[0].size(), p2.hidden[0].size());

    const std::size_t aligned =
        std::min(p1.hidden[0].size(), p2.hidden[0].size());
    const int aligned_u = std::min({child.du, p1.du, p2.du});
    for (std::size_t j = 0; j < aligned && ok; ++j) {
      for (int a = 0; a <= aligned_u; ++a) {
        const double w1 = p1.hidden[0][j].weights[static_cast<std::size_t>(a)];
        const double w2 = p2.hidden[0][j].weights[static_cast<std::size_t>(a)];
        const double wc = child.hidden[0][j].weights[static_cast<std::size_t>(a)];
        if (wc < std::min(w1, w2) - 1e-12 || wc > std::max(w1, w2) + 1e-12) {
          ok = false;
          break;
        }
      }
    }
    if (!ok) ++failures;
  }
  report(4, failures == 0, "crossover delay/weight/size bounds",
         std::to_string(pairs) + " pairs, " + std::to_string(failures) +
             " violations",
         timer.seconds());
}

// ---- criterion 5: elitism monotonicity for every algorithm ----
void criterion5() {
  Timer timer;
  int violations = 0;
  const auto run_and_check = [&](Algorithm a, const NasConfig& cfg) {
    for (int call = 0; call < 20; ++call) {
      RunResult r;
      switch (a) {
        case Algorithm::Dnas1:
          r = run_dnas1(cfg, learning_set(), call_seed(505, call));
          break;
        case Algorithm::Dnas2:
          r = run_dnas2(cfg, learning_set(), call_seed(505, call));
          break;
        case Algorithm::Dnas3:
          r = run_dnas3(cfg, learning_set(), call_seed(505, call));
          break;
        default:
          r = run_dnas4(cfg, learning_set(), call_seed(505, call));
          break;
      }
      for (std::size_t g = 1; g < r.per_generation.size(); ++g)
        if (r.per_generation[g].best_fitness <
            r.per_generation[g - 1].best_fitness)
          ++violations;
    }
  };
  NasConfig evo = defaults_for(Algorithm::Dnas1);
  evo.popSize = 20;
  evo.generations = 15;
  evo.maxNinLay = 6;
  evo.duMax = 6;
  evo.dyMax = 6;
  run_and_check(Algorithm::Dnas1, evo);
  evo = defaults_for(Algorithm::Dnas2);
  evo.popSize = 20;
  evo.generations = 15;
  evo.maxNinLay = 6;
  evo.duMax = 6;
  evo.dyMax = 6;
  run_and_check(Algorithm::Dnas2, evo);
  evo.algorithm = Algorithm::Dnas3;
  run_and_check(Algorithm::Dnas3, evo);

  NasConfig hybrid = defaults_for(Algorithm::Dnas4);
  hybrid.popSize = 5;
  hybrid.generations = 15;
  hybrid.maxNinLay = 3;
  hybrid.duMax = 3;
  hybrid.dyMax = 3;
  hybrid.trainEpochs = 15;
  run_and_check(Algorithm::Dnas4, hybrid);

  report(5, violations == 0,
         "per-generation best fitness non-decreasing (4 algorithms x 20 runs x "
         "15 generations)",
         std::to_string(violations) + " violations", timer.seconds());
}

// ---- criterion 6: analytic gradient vs central differences ----
void criterion6() {
  Timer timer;
  Dataset slice;
  slice.nominal_input = learning_set().nominal_input;
  slice.nominal_output = learning_set().nominal_output;
  slice.inputs.assign(learning_set().inputs.begin() + 180,
                      learning_set().inputs.begin() + 240);
  slice.targets.assign(learning_set().targets.begin() + 180,
                       learning_set().targets.begin() + 240);

  RngStream rng(606);
  double worst = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    Genome g = random_genome(rng, 3, 3);
    randomize_weights(g, -0.9, 0.9, rng);
    const auto [loss, grad] = teacher_forcing_loss_and_gradient(g, slice);
    (void)loss;
    const auto params = flatten_weights(g);
    const double h = 1e-6;
    for (std::size_t i = 0; i < params.size(); ++i) {
      Genome plus = g, minus = g;
      auto p = params;
      p[i] = params[i] + h;
      unflatten_weights(plus, p);
      p[i] = params[i] - h;
      unflatten_weights(minus, p);
      const double fd = (teacher_forcing_loss_and_gradient(plus, slice).first -
                         teacher_forcing_loss_and_gradient(minus, slice).first) /
                        (2.0 * h);
      const double denom = std::max({std::fabs(fd), std::fabs(grad[i]), 1e-8});
      worst = std::max(worst, std::fabs(grad[i] - fd) / denom);
    }
  }
  std::ostringstream detail;
  detail << "max relative error " << worst;
  report(6, worst < 1e-4, "teacher-forcing gradient vs central differences",
         detail.str(), timer.seconds());
}

// ---- criterion 7: LM linear oracle ----
namespace {
class LinearFitModel final : public LeastSquaresModel {
 public:
  LinearFitModel() {
    for (int i = 0; i < 50; ++i) {
      us_.push_back(-2.0 + 4.0 * i / 49.0);
      ys_.push_back(2.0 * us_.back() + 1.0);
    }
  }
  std::size_t param_count() const override { return 2; }
  std::size_t residual_count() const override { return us_.size(); }
  double sum_squares(std::span<const double> p, double* jtj,
                     double* jtr) const override {
    double sse = 0.0;
    for (std::size_t i = 0; i < us_.size(); ++i) {
      const double r = p[0] * us_[i] + p[1] - ys_[i];
      sse += r * r;
      if (jtj) {
        jtj[0] += us_[i] * us_[i];
        jtj[1] += us_[i];
        jtj[3] += 1.0;
      }
      if (jtr) {
        jtr[0] += us_[i] * r;
        jtr[1] += r;
      }
    }
    return sse;
  }
  std::vector<double> us_, ys_;
};
}  // namespace

void criterion7() {
  Timer timer;
  const LinearFitModel model;
  // Closed-form least squares as the independent oracle.
  double su = 0, suu = 0, sy = 0, suy = 0;
  const double n = static_cast<double>(model.us_.size());
  for (std::size_t i = 0; i < model.us_.size(); ++i) {
    su += model.us_[i];
    suu += model.us_[i] * model.us_[i];
    sy += model.ys_[i];
    suy += model.us_[i] * model.ys_[i];
  }
  const double det = n * suu - su * su;
  const double w_ref = (n * suy - su * sy) / det;
  const double b_ref = (suu * sy - su * suy) / det;

  LmOptions opts;
  opts.max_epochs = 100;
  const LmOutcome out = lm_minimize(model, {0.0, 0.0}, opts);
  const double dw = std::fabs(out.params[0] - w_ref);
  const double db = std::fabs(out.params[1] - b_ref);
  const bool ok = dw < 1e-6 && db < 1e-6 && std::fabs(out.params[0] - 2.0) < 1e-6 &&
                  std::fabs(out.params[1] - 1.0) < 1e-6 && timer.seconds() < 5.0;
  std::ostringstream detail;
  detail << "LM (" << out.params[0] << ", " << out.params[1]
         << ") vs closed form (" << w_ref << ", " << b_ref << ")";
  report(7, ok, "LM recovers y = 2u + 1", detail.str(), timer.seconds());
}

// ---- criteria 8 and 9: desk-scale method checks ----
struct DeskRuns {
  std::vector<double> dnas3_errors, dnas3_fitness;
  std::vector<double> dnas3_neurons, dnas1_neurons;
};

DeskRuns desk_runs;

void criterion8() {
  Timer timer;
  NasConfig cfg = defaults_for(Algorithm::Dnas3);
  cfg.popSize = 30;
  cfg.generations = 30;
  cfg.calls = 10;
  cfg.duMax = 10;
  cfg.dyMax = 10;
  cfg.seed = 2026;

  for (int call = 0; call < cfg.calls; ++call) {
    const RunResult r = run_dnas3(cfg, learning_set(), call_seed(cfg.seed, call));
    desk_runs.dnas3_errors.push_back(r.best_record.mean_error);
    desk_runs.dnas3_fitness.push_back(r.best_record.fitness);
    desk_runs.dnas3_neurons.push_back(r.best_record.neuron_count);
  }
  NasConfig cfg1 = defaults_for(Algorithm::Dnas1);
  cfg1.popSize = 30;
  cfg1.generations = 30;
  cfg1.calls = 10;
  cfg1.duMax = 10;
  cfg1.dyMax = 10;
  cfg1.seed = 2026;
  for (int call = 0; call < cfg1.calls; ++call) {
    const RunResult r = run_dnas1(cfg1, learning_set(), call_seed(cfg1.seed, call));
    desk_runs.dnas1_neurons.push_back(r.best_record.neuron_count);
  }

  const double med3 = median(desk_runs.dnas3_neurons);
  const double med1 = median(desk_runs.dnas1_neurons);
  const double med_err = median(desk_runs.dnas3_errors);
  const bool ok = med3 < med1 && med_err <= 0.05;
  std::ostringstream detail;
  detail << "median neurons dnas3 " << med3 << " vs dnas1 " << med1
         << "; dnas3 median error " << med_err;
  report(8, ok, "desk-scale size finding (dnas3 smaller than dnas1)",
         detail.str(), timer.seconds());
}

void criterion9() {
  Timer timer;
  NasConfig grid_cfg = defaults_for(Algorithm::Exhaustive);
  grid_cfg.gridNeuronsMax = 3;
  grid_cfg.gridDu = {1, 5, 10};
  grid_cfg.gridDy = {1, 5, 10};
  grid_cfg.gridRepeats = 2;
  grid_cfg.trainEpochs = 60;
  grid_cfg.seed = 2026;
  const ExhaustiveResult grid = exhaustive_search(grid_cfg, learning_set(), 2026);
  const GridPoint& winner = grid.points[grid.winner];

  const double dnas3_median_fitness = median(desk_runs.dnas3_fitness);
  const bool fitness_ok =
      winner.best_fitness >= dnas3_median_fitness - 0.05;

  NasConfig d4 = defaults_for(Algorithm::Dnas4);
  d4.popSize = 10;
  d4.generations = 10;
  d4.calls = 10;
  d4.maxNinLay = 5;
  d4.duMax = 10;
  d4.dyMax = 10;
  d4.trainEpochs = 60;
  d4.seed = 2026;
  int matches = 0;
  for (int call = 0; call < d4.calls; ++call) {
    const RunResult r = run_dnas4(d4, learning_set(), call_seed(d4.seed, call));
    if (r.best_record.neuron_count == winner.neurons) ++matches;
  }
  const bool ok = fitness_ok && matches >= 7;
  std::ostringstream detail;
  detail << "grid winner " << winner.neurons << " neurons, fitness "
         << winner.best_fitness << " vs dnas3 median " << dnas3_median_fitness
         << "; dnas4 matches " << matches << "/10";
  report(9, ok, "exhaustive-search agreement", detail.str(), timer.seconds());
}

// ---- criterion 10: byte-identical CLI outputs ----
std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

bool same_bytes(const fs::path& a, const fs::path& b) {
  return fs::exists(a) && fs::exists(b) && read_file(a) == read_file(b);
}

void criterion10() {
  Timer timer;
  if (g_cli_path.empty()) {
    report(10, false, "CLI determinism", "CLI path not supplied", 0.0);
    return;
  }
  const fs::path base = fs::temp_directory_path() / "evonarx_acceptance";
  fs::remove_all(base);
  fs::create_directories(base);

  const std::string flags =
      " run --algorithm dnas3 --calls 3 --generations 10 --seed 42"
      " --set popSize=16 duMax=8 dyMax=8";
  const auto invoke = [&](const std::string& extra, const fs::path& out) {
    const std::string cmd = g_cli_path + flags + extra + " --out " +
                            out.string() + " > /dev/null 2>&1";
    return std::system(cmd.c_str()) == 0;
  };
  bool ok = invoke(" --threads 2", base / "a") &&
            invoke(" --threads 2", base / "b") &&
            invoke(" --threads 1", base / "c");

  const std::vector<std::string> deterministic = {
      "summary.json", "generations.csv", "histogram.csv", "config.txt",
      "best_call0.json", "best_call1.json", "best_call2.json"};
  std::string detail = "threads=2 repeat and threads=1 vs 2";
  if (ok) {
    for (const auto& f : deterministic)
      if (!same_bytes(base / "a" / f, base / "b" / f)) {
        ok = false;
        detail = "repeat runs differ in " + f;
      }
    // Thread count appears only in the config echo; all computed outputs must
    // match across thread counts.
    for (const auto& f : {"generations.csv", "histogram.csv", "best_call0.json",
                          "best_call1.json", "best_call2.json"})
      if (!same_bytes(base / "a" / f, base / "c" / f)) {
        ok = false;
        detail = std::string("thread counts differ in ") + f;
      }
  } else {
    detail = "CLI invocation failed";
  }
  fs::remove_all(base);
  report(10, ok, "byte-identical run outputs", detail, timer.seconds());
}

// ---- criterion 11: surrogate equilibrium and range ----
void criterion11() {
  Timer timer;
  SurrogatePlantParams params;
  RodSchedule nominal{{{0.0, params.z_nom}}};
  const Dataset hold = generate_dataset(params, nominal, 1500.0, 1.0);
  double worst = 0.0;
  for (double y : hold.targets) worst = std::max(worst, std::fabs(y - 1.0));

  bool in_range = true;
  for (const auto& name : bundled_schedule_names()) {
    const Dataset d =
        generate_dataset(params, bundled_schedule(name), 3000.0, 1.0);
    for (double y : d.targets)
      if (y < 0.0 || y > 1.184) in_range = false;
  }
  std::ostringstream detail;
  detail << "max |y-1| at nominal " << worst << "; bundled schedules "
         << (in_range ? "within" : "outside") << " [0, 1.184]";
  report(11, worst <= 1e-6 && in_range, "surrogate equilibrium and range",
         detail.str(), timer.seconds());
}

}  // namespace

int main(int argc, char** argv) {
  if (argc > 1) g_cli_path = argv[1];
  std::printf("acceptance suite (kernel backend: %s)\n",
              kern::backend_name(kern::active_backend()));

  criterion1();
  criterion2();
  criterion3();
  criterion4();
  criterion5();
  criterion6();
  criterion7();
  criterion8();
  criterion9();
  criterion10();
  criterion11();

  if (g_failures == 0) {
    std::printf("all 11 criteria passed\n");
    return 0;
  }
  std::printf("%d criterion(s) failed\n", g_failures);
  return 1;
}
