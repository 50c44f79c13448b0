#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "evonarx/genome.hpp"
#include "evonarx/plant.hpp"
#include "evonarx/rng.hpp"

namespace evonarx {

enum class TrainerKind {
  LevenbergMarquardt,
  BayesianRegularization,  // LM with an L2 weight-decay term
  ScaledConjugateGradient,
};

const char* trainer_name(TrainerKind k);

struct TrainSpec {
  TrainerKind kind = TrainerKind::LevenbergMarquardt;
  int max_epochs = 200;
  double loss_tolerance = 0.0;    // stop once MSE <= this (checked up front)
  double damping_init = 1e-3;     // LM damping start
  double l2_strength = 1e-4;      // weight decay for BayesianRegularization
  double min_improvement = 1e-9;  // early stop threshold ...
  int stall_window = 10;          // ... over this many epochs
  bool randomize_init = true;     // redraw weights uniform [-1,1] before work
};

struct TrainResult {
  Genome genome;           // same architecture, updated weights
  double final_loss = 0.0; // teacher-forcing MSE
  bool diverged = false;
  std::vector<double> accepted_losses;  // per accepted epoch, non-increasing
};

// Weights flattened layer by layer, neuron by neuron, bias in its stored
// slot, output neuron last.
std::vector<double> flatten_weights(const Genome& g);
void unflatten_weights(Genome& g, std::span<const double> params);

// One-step-ahead (series-parallel) loss: delayed outputs come from the
// target sequence, so the network is static per sample. Returns the MSE and
// its analytic gradient over the flattened weights, computed by reverse
// accumulation.
std::pair<double, std::vector<double>> teacher_forcing_loss_and_gradient(
    const Genome& g, const Dataset& data);

TrainResult train(const Genome& g, const Dataset& data, const TrainSpec& spec,
                  RngStream& rng);

// ---- generic Levenberg-Marquardt core ----
// Exposed separately so trivially-shaped problems (and oracles) can use the
// same optimizer that genome training runs on.

class LeastSquaresModel {
 public:
  virtual ~LeastSquaresModel() = default;
  virtual std::size_t param_count() const = 0;
  virtual std::size_t residual_count() const = 0;
  // Sum of squared residuals at `params`. When jtj/jtr are non-null (sized
  // n*n row-major and n, zero-initialised by the caller) the per-sample
  // Jacobian is accumulated into them.
  virtual double sum_squares(std::span<const double> params, double* jtj,
                             double* jtr) const = 0;
};

struct LmOptions {
  int max_epochs = 200;
  double damping_init = 1e-3;
  double l2_strength = 0.0;
  double loss_tolerance = 0.0;    // on MSE
  double min_improvement = 1e-9;  // on MSE
  int stall_window = 10;
};

struct LmOutcome {
  std::vector<double> params;
  double final_mse = 0.0;
  bool diverged = false;
  std::vector<double> accepted_losses;  // MSE per accepted step
};

LmOutcome lm_minimize(const LeastSquaresModel& model,
                      std::vector<double> initial, const LmOptions& opts);

}  // namespace evonarx
