#include "evonarx/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "evonarx/kernels.hpp"

namespace evonarx {

const char* trainer_name(TrainerKind k) {
  switch (k) {
    case TrainerKind::LevenbergMarquardt: return "lm";
    case TrainerKind::BayesianRegularization: return "br";
    case TrainerKind::ScaledConjugateGradient: return "scg";
  }
  return "?";
}

std::vector<double> flatten_weights(const Genome& g) {
  std::vector<double> params;
  params.reserve(static_cast<std::size_t>(g.weight_count()));
  for (const auto& layer : g.hidden)
    for (const Neuron& n : layer)
      params.insert(params.end(), n.weights.begin(), n.weights.end());
  params.insert(params.end(), g.output.weights.begin(), g.output.weights.end());
  return params;
}

void unflatten_weights(Genome& g, std::span<const double> params) {
  std::size_t at = 0;
  const auto take = [&](Neuron& n) {
    if (at + n.weights.size() > params.size())
      throw std::invalid_argument("unflatten_weights: too few parameters");
    std::copy_n(params.begin() + static_cast<std::ptrdiff_t>(at),
                n.weights.size(), n.weights.begin());
    at += n.weights.size();
  };
  for (auto& layer : g.hidden)
    for (Neuron& n : layer) take(n);
  take(g.output);
  if (at != params.size())
    throw std::invalid_argument("unflatten_weights: parameter count mismatch");
}

namespace {

// Teacher-forcing residual model over a genome architecture. Each sample is
// a static forward pass; the Jacobian row d(yhat)/d(weights) comes from
// reverse accumulation through the stored activations.
class TeacherForcingModel final : public LeastSquaresModel {
 public:
  TeacherForcingModel(const Genome& arch, const Dataset& data)
      : scratch_(arch), data_(data) {
    if (data.inputs.size() <=
        static_cast<std::size_t>(std::max(arch.du, arch.dy)))
      throw std::invalid_argument(
          "dataset too short for the genome's delay levels");
    param_count_ = static_cast<std::size_t>(scratch_.weight_count());
    x_.resize(static_cast<std::size_t>(1 + arch.du + arch.dy));
    acts_.resize(arch.hidden.size());
    deltas_.resize(arch.hidden.size());
    for (std::size_t l = 0; l < arch.hidden.size(); ++l) {
      acts_[l].resize(arch.hidden[l].size());
      deltas_[l].resize(arch.hidden[l].size());
    }
  }

  std::size_t param_count() const override { return param_count_; }
  std::size_t residual_count() const override { return data_.inputs.size(); }

  double sum_squares(std::span<const double> params, double* jtj,
                     double* jtr) const override {
    unflatten_weights(scratch_, params);
    const std::size_t n = data_.inputs.size();
    const std::size_t np = param_count_;
    std::vector<double> row(jtj || jtr ? np : 0);

    double sse = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      const double yhat = forward(k);
      const double r = yhat - data_.targets[k];
      sse += r * r;
      if (!row.empty()) {
        std::fill(row.begin(), row.end(), 0.0);
        backward(row.data());
        if (jtj) {
          // Upper triangle of JtJ += row*row'.
          for (std::size_t i = 0; i < np; ++i) {
            if (row[i] == 0.0) continue;
            kern::axpy(row[i], row.data() + i, jtj + i * np + i, np - i);
          }
        }
        if (jtr) kern::axpy(r, row.data(), jtr, np);
      }
    }
    return sse;
  }

  // MSE gradient by reverse accumulation (no JtJ).
  double mse_and_gradient(std::span<const double> params,
                          std::vector<double>& grad) const {
    unflatten_weights(scratch_, params);
    const std::size_t n = data_.inputs.size();
    grad.assign(param_count_, 0.0);
    std::vector<double> row(param_count_);
    double sse = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      const double yhat = forward(k);
      const double r = yhat - data_.targets[k];
      sse += r * r;
      std::fill(row.begin(), row.end(), 0.0);
      backward(row.data());
      kern::axpy(2.0 * r / static_cast<double>(n), row.data(), grad.data(),
                 param_count_);
    }
    return sse / static_cast<double>(n);
  }

 private:
  double forward(std::size_t k) const {
    const Genome& g = scratch_;
    x_[0] = data_.inputs[k];
    for (int a = 1; a <= g.du; ++a)
      x_[static_cast<std::size_t>(a)] = (k >= static_cast<std::size_t>(a))
                                            ? data_.inputs[k - a]
                                            : data_.nominal_input;
    for (int b = 1; b <= g.dy; ++b)
      x_[static_cast<std::size_t>(g.du + b)] =
          (k >= static_cast<std::size_t>(b)) ? data_.targets[k - b]
                                             : data_.nominal_output;
    const std::vector<double>* in = &x_;
    for (std::size_t l = 0; l < g.hidden.size(); ++l) {
      auto& act = acts_[l];
      for (std::size_t j = 0; j < g.hidden[l].size(); ++j) {
        const Neuron& neuron = g.hidden[l][j];
        act[j] = std::tanh(
            kern::dot(neuron.weights.data(), in->data(), in->size()) +
            neuron.bias());
      }
      in = &act;
    }
    return kern::dot(scratch_.output.weights.data(), in->data(), in->size()) +
           scratch_.output.bias();
  }

  // d(yhat)/d(param) for the sample last passed to forward(). `row` holds
  // param_count_ zeros on entry; parameters are laid out exactly as
  // flatten_weights produces them.
  void backward(double* row) const {
    const Genome& g = scratch_;
    const std::size_t layers = g.hidden.size();
    const std::vector<double>& last = acts_[layers - 1];

    // Output neuron: dyhat/dw_j = h_j, dyhat/db = 1.
    std::size_t out_base = 0;
    for (const auto& layer : g.hidden)
      for (const Neuron& n : layer) out_base += n.weights.size();
    for (std::size_t j = 0; j < last.size(); ++j) row[out_base + j] = last[j];
    row[out_base + last.size()] = 1.0;

    // delta for the last hidden layer.
    auto& dl = deltas_[layers - 1];
    for (std::size_t j = 0; j < last.size(); ++j)
      dl[j] = g.output.weights[j] * (1.0 - last[j] * last[j]);

    for (std::size_t l = layers; l-- > 0;) {
      const std::vector<double>& inputs = l == 0 ? x_ : acts_[l - 1];
      std::size_t base = 0;
      for (std::size_t ll = 0; ll < l; ++ll)
        for (const Neuron& n : g.hidden[ll]) base += n.weights.size();
      const auto& delta = deltas_[l];
      std::size_t at = base;
      for (std::size_t j = 0; j < g.hidden[l].size(); ++j) {
        kern::axpy(delta[j], inputs.data(), row + at, inputs.size());
        row[at + inputs.size()] = delta[j];  // bias slot
        at += inputs.size() + 1;
      }
      if (l > 0) {
        auto& dprev = deltas_[l - 1];
        const std::vector<double>& hprev = acts_[l - 1];
        for (std::size_t i = 0; i < dprev.size(); ++i) {
          double s = 0.0;
          for (std::size_t j = 0; j < g.hidden[l].size(); ++j)
            s += g.hidden[l][j].weights[i] * delta[j];
          dprev[i] = s * (1.0 - hprev[i] * hprev[i]);
        }
      }
    }
  }

  mutable Genome scratch_;
  const Dataset& data_;
  std::size_t param_count_ = 0;
  mutable std::vector<double> x_;
  mutable std::vector<std::vector<double>> acts_;
  mutable std::vector<std::vector<double>> deltas_;
};

// Cholesky solve of (A)x = b with A given as its upper triangle (row-major).
// Returns false when A is not positive definite.
bool cholesky_solve(std::vector<double> a, std::vector<double> b,
                    std::size_t n, std::vector<double>& x) {
  // Mirror upper triangle down, then in-place LL'.
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < i; ++j) a[i * n + j] = a[j * n + i];
  for (std::size_t j = 0; j < n; ++j) {
    double d = a[j * n + j];
    for (std::size_t k = 0; k < j; ++k) d -= a[j * n + k] * a[j * n + k];
    if (!(d > 0.0) || !std::isfinite(d)) return false;
    const double ld = std::sqrt(d);
    a[j * n + j] = ld;
    for (std::size_t i = j + 1; i < n; ++i) {
      double s = a[i * n + j];
      for (std::size_t k = 0; k < j; ++k) s -= a[i * n + k] * a[j * n + k];
      a[i * n + j] = s / ld;
    }
  }
  // Ly = b
  for (std::size_t i = 0; i < n; ++i) {
    double s = b[i];
    for (std::size_t k = 0; k < i; ++k) s -= a[i * n + k] * b[k];
    b[i] = s / a[i * n + i];
  }
  // L'x = y
  x.assign(n, 0.0);
  for (std::size_t i = n; i-- > 0;) {
    double s = b[i];
    for (std::size_t k = i + 1; k < n; ++k) s -= a[k * n + i] * x[k];
    x[i] = s / a[i * n + i];
  }
  return true;
}

}  // namespace

LmOutcome lm_minimize(const LeastSquaresModel& model,
                      std::vector<double> initial, const LmOptions& opts) {
  const std::size_t np = model.param_count();
  const double n = static_cast<double>(model.residual_count());
  const double alpha = opts.l2_strength;

  LmOutcome out;
  out.params = std::move(initial);

  const auto objective = [&](std::span<const double> p, double* jtj,
                             double* jtr) {
    double s = model.sum_squares(p, jtj, jtr);
    if (alpha > 0.0) {
      for (std::size_t i = 0; i < np; ++i) {
        s += alpha * p[i] * p[i];
        if (jtj) jtj[i * np + i] += alpha;
        if (jtr) jtr[i] += alpha * p[i];
      }
    }
    return s;
  };

  double current = objective(out.params, nullptr, nullptr);
  if (!std::isfinite(current)) {
    out.diverged = true;
    out.final_mse = std::numeric_limits<double>::infinity();
    return out;
  }
  out.accepted_losses.push_back(current / n);
  if (current / n <= opts.loss_tolerance) {
    out.final_mse = model.sum_squares(out.params, nullptr, nullptr) / n;
    return out;
  }

  double lambda = opts.damping_init;
  std::vector<double> jtj(np * np), jtr(np), step, trial(np);

  for (int epoch = 0; epoch < opts.max_epochs; ++epoch) {
    std::fill(jtj.begin(), jtj.end(), 0.0);
    std::fill(jtr.begin(), jtr.end(), 0.0);
    current = objective(out.params, jtj.data(), jtr.data());

    bool accepted = false;
    for (int attempt = 0; attempt < 25 && !accepted; ++attempt) {
      std::vector<double> damped = jtj;
      for (std::size_t i = 0; i < np; ++i) damped[i * np + i] += lambda;
      std::vector<double> rhs(np);
      for (std::size_t i = 0; i < np; ++i) rhs[i] = -jtr[i];
      if (!cholesky_solve(std::move(damped), std::move(rhs), np, step)) {
        lambda *= 10.0;
        continue;
      }
      for (std::size_t i = 0; i < np; ++i) trial[i] = out.params[i] + step[i];
      const double trial_obj = objective(trial, nullptr, nullptr);
      if (std::isfinite(trial_obj) && trial_obj < current) {
        out.params = trial;
        current = trial_obj;
        lambda = std::max(lambda / 10.0, 1e-15);
        accepted = true;
      } else {
        lambda *= 10.0;
        if (lambda > 1e15) break;
      }
    }
    if (!accepted) break;  // no usable step at any damping

    out.accepted_losses.push_back(current / n);
    if (current / n <= opts.loss_tolerance) break;
    const int w = opts.stall_window;
    const auto& hist = out.accepted_losses;
    if (static_cast<int>(hist.size()) > w &&
        hist[hist.size() - 1 - static_cast<std::size_t>(w)] - hist.back() <
            opts.min_improvement)
      break;
  }

  out.final_mse = model.sum_squares(out.params, nullptr, nullptr) / n;
  if (!std::isfinite(out.final_mse)) out.diverged = true;
  return out;
}

namespace {

struct ScgOutcome {
  std::vector<double> params;
  double final_mse = 0.0;
  bool diverged = false;
  std::vector<double> accepted_losses;
};

// Moller's scaled conjugate gradient on the teacher-forcing MSE.
ScgOutcome scg_minimize(const TeacherForcingModel& model,
                        std::vector<double> initial, const TrainSpec& spec) {
  const std::size_t np = model.param_count();
  ScgOutcome out;
  out.params = std::move(initial);

  std::vector<double> grad, grad_new, grad_probe;
  double f = model.mse_and_gradient(out.params, grad);
  if (!std::isfinite(f)) {
    out.diverged = true;
    out.final_mse = std::numeric_limits<double>::infinity();
    return out;
  }
  out.accepted_losses.push_back(f);
  if (f <= spec.loss_tolerance) {
    out.final_mse = f;
    return out;
  }

  std::vector<double> r(np), d(np), probe(np);
  for (std::size_t i = 0; i < np; ++i) r[i] = -grad[i];
  d = r;

  const double sigma0 = 1e-4;
  double lambda = 1e-6;
  double theta = 0.0;  // raw directional curvature d'Hd
  bool success = true;

  const auto sqnorm = [](const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return s;
  };

  for (int k = 1; k <= spec.max_epochs; ++k) {
    const double d2 = sqnorm(d);
    if (d2 < 1e-30) break;

    if (success) {
      const double sigma = sigma0 / std::sqrt(d2);
      for (std::size_t i = 0; i < np; ++i) probe[i] = out.params[i] + sigma * d[i];
      model.mse_and_gradient(probe, grad_probe);
      theta = 0.0;
      for (std::size_t i = 0; i < np; ++i)
        theta += d[i] * (grad_probe[i] - grad[i]) / sigma;
    }
    // Damped curvature; indefinite directions are made positive definite.
    double delta = theta + lambda * d2;
    if (delta <= 0.0) {
      lambda = 2.0 * (lambda - delta / d2);
      delta = -theta;
    }

    double mu = 0.0;
    for (std::size_t i = 0; i < np; ++i) mu += d[i] * r[i];
    if (!(mu > 0.0)) {  // direction no longer a descent direction: restart
      d = r;
      success = true;
      continue;
    }
    const double alpha = mu / delta;

    for (std::size_t i = 0; i < np; ++i) probe[i] = out.params[i] + alpha * d[i];
    const double f_trial = model.mse_and_gradient(probe, grad_probe);
    if (!std::isfinite(f_trial)) {
      out.diverged = true;
      break;
    }
    const double comparison = 2.0 * delta * (f - f_trial) / (mu * mu);

    if (comparison >= 0.0) {
      out.params = probe;
      f = f_trial;
      grad = grad_probe;
      success = true;
      out.accepted_losses.push_back(f);

      std::vector<double> r_new(np);
      for (std::size_t i = 0; i < np; ++i) r_new[i] = -grad[i];
      if (k % static_cast<int>(np) == 0) {
        d = r_new;  // periodic restart along steepest descent
      } else {
        double rn2 = 0.0, rnr = 0.0;
        for (std::size_t i = 0; i < np; ++i) {
          rn2 += r_new[i] * r_new[i];
          rnr += r_new[i] * r[i];
        }
        const double beta = (rn2 - rnr) / mu;
        for (std::size_t i = 0; i < np; ++i) d[i] = r_new[i] + beta * d[i];
      }
      r = r_new;
      if (comparison >= 0.75) lambda = std::max(lambda * 0.25, 1e-20);

      if (f <= spec.loss_tolerance) break;
      const int w = spec.stall_window;
      const auto& hist = out.accepted_losses;
      if (static_cast<int>(hist.size()) > w &&
          hist[hist.size() - 1 - static_cast<std::size_t>(w)] - hist.back() <
              spec.min_improvement)
        break;
      if (sqnorm(r) < 1e-24) break;
    } else {
      success = false;
    }
    if (comparison < 0.25) lambda += delta * (1.0 - comparison) / d2;
    if (lambda > 1e20) break;
  }

  out.final_mse = f;
  return out;
}

}  // namespace

std::pair<double, std::vector<double>> teacher_forcing_loss_and_gradient(
    const Genome& g, const Dataset& data) {
  TeacherForcingModel model(g, data);
  std::vector<double> grad;
  const double mse = model.mse_and_gradient(flatten_weights(g), grad);
  return {mse, std::move(grad)};
}

TrainResult train(const Genome& g, const Dataset& data, const TrainSpec& spec,
                  RngStream& rng) {
  if (spec.max_epochs < 1) throw std::invalid_argument("max_epochs must be >= 1");

  TrainResult result;
  result.genome = g;
  if (spec.randomize_init) randomize_weights(result.genome, -1.0, 1.0, rng);

  TeacherForcingModel model(result.genome, data);
  std::vector<double> initial = flatten_weights(result.genome);

  if (spec.kind == TrainerKind::ScaledConjugateGradient) {
    ScgOutcome scg = scg_minimize(model, std::move(initial), spec);
    unflatten_weights(result.genome, scg.params);
    result.final_loss = scg.final_mse;
    result.diverged = scg.diverged;
    result.accepted_losses = std::move(scg.accepted_losses);
    return result;
  }

  LmOptions opts;
  opts.max_epochs = spec.max_epochs;
  opts.damping_init = spec.damping_init;
  opts.l2_strength =
      spec.kind == TrainerKind::BayesianRegularization ? spec.l2_strength : 0.0;
  opts.loss_tolerance = spec.loss_tolerance;
  opts.min_improvement = spec.min_improvement;
  opts.stall_window = spec.stall_window;

  LmOutcome lm = lm_minimize(model, std::move(initial), opts);
  unflatten_weights(result.genome, lm.params);
  result.final_loss = lm.final_mse;
  result.diverged = lm.diverged;
  result.accepted_losses = std::move(lm.accepted_losses);
  return result;
}

}  // namespace evonarx
