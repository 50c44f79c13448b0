#include "evonarx/plant.hpp"

#include <cmath>
#include <utility>

namespace evonarx {

namespace {

struct PlantState {
  double n;  // scaled power
  double c;  // scaled precursor concentration
  double T;  // scaled temperature
};

struct Derivs {
  double dn, dc, dT;
};

double worth(const SurrogatePlantParams& p, double z) {
  return p.worth_gain * (1.0 - std::exp(-p.worth_decay * (z - p.z_min))) - 1.0;
}

Derivs derivs(const SurrogatePlantParams& p, const PlantState& s, double z) {
  const double rho = p.rod_worth_scale * worth(p, z) -
                     p.feedback_coeff * (s.T - 1.0);
  return {
      ((rho - p.beta) * s.n + p.beta * s.c) / p.gen_time,
      p.lambda_c * (s.n - s.c),
      (s.n - s.T) / p.thermal_tau,
  };
}

// One RK4 step of length h while the rod slews from z0 toward `target`.
PlantState rk4_step(const SurrogatePlantParams& p, const PlantState& s,
                    double z0, double target, double h) {
  const auto z_at = [&](double dt) {
    const double dist = target - z0;
    const double travel = p.rod_speed * dt;
    if (std::fabs(dist) <= travel) return target;
    return z0 + (dist > 0.0 ? travel : -travel);
  };
  const auto add = [](const PlantState& a, const Derivs& d, double f) {
    return PlantState{a.n + f * d.dn, a.c + f * d.dc, a.T + f * d.dT};
  };
  const Derivs k1 = derivs(p, s, z_at(0.0));
  const Derivs k2 = derivs(p, add(s, k1, h / 2.0), z_at(h / 2.0));
  const Derivs k3 = derivs(p, add(s, k2, h / 2.0), z_at(h / 2.0));
  const Derivs k4 = derivs(p, add(s, k3, h), z_at(h));
  return PlantState{
      s.n + h / 6.0 * (k1.dn + 2.0 * k2.dn + 2.0 * k3.dn + k4.dn),
      s.c + h / 6.0 * (k1.dc + 2.0 * k2.dc + 2.0 * k3.dc + k4.dc),
      s.T + h / 6.0 * (k1.dT + 2.0 * k2.dT + 2.0 * k3.dT + k4.dT),
  };
}

void validate_schedule(const SurrogatePlantParams& p, const RodSchedule& sched) {
  if (sched.steps.empty())
    throw GenerationError("rod schedule has no steps");
  double prev = sched.steps.front().first;
  if (prev != 0.0)
    throw GenerationError("rod schedule must start at t = 0");
  for (std::size_t i = 0; i < sched.steps.size(); ++i) {
    const auto& [t, z] = sched.steps[i];
    if (i > 0 && t <= prev)
      throw GenerationError("rod schedule times must be strictly increasing");
    prev = t;
    if (z < p.z_min || z > p.z_max)
      throw GenerationError("rod target " + std::to_string(z) +
                            " m outside travel range [" +
                            std::to_string(p.z_min) + ", " +
                            std::to_string(p.z_max) + "]");
  }
}

double gaussian(RngStream& rng) {
  // Box-Muller; both uniforms drawn even though one output is used, to keep
  // the draw count per sample fixed.
  const double u1 = rng.uniform01();
  const double u2 = rng.uniform01();
  const double r = std::sqrt(-2.0 * std::log(1.0 - u1));
  return r * std::cos(2.0 * 3.14159265358979323846 * u2);
}

}  // namespace

double SurrogatePlantParams::steady_power(double z) const {
  if (feedback_coeff == 0.0)
    throw GenerationError("zero feedback coefficient has no steady state");
  return 1.0 + rod_worth_scale / feedback_coeff * worth(*this, z);
}

double RodSchedule::target_at(double t) const {
  double z = steps.front().second;
  for (const auto& [time, target] : steps) {
    if (time > t) break;
    z = target;
  }
  return z;
}

RodSchedule learning_schedule() {
  return {{{0.0, -1.098},
           {200.0, -1.327},
           {450.0, -0.937},
           {700.0, -1.522},
           {1000.0, -1.197},
           {1250.0, -0.774},
           {1550.0, -1.098},
           {1800.0, -1.684},
           {2150.0, -1.294},
           {2400.0, -1.002},
           {2700.0, -1.098}}};
}

RodSchedule verification1_schedule() {
  return {{{0.0, -1.098},
           {150.0, -0.872},
           {400.0, -1.229},
           {650.0, -1.619},
           {950.0, -1.099},
           {1200.0, -0.709},
           {1500.0, -1.392},
           {1850.0, -1.034},
           {2100.0, -1.489},
           {2450.0, -1.197},
           {2750.0, -1.098}}};
}

RodSchedule verification2_schedule() {
  return {{{0.0, -1.098},
           {300.0, -1.587},
           {800.0, -0.839},
           {1400.0, -1.359},
           {1900.0, -0.963},
           {2400.0, -1.255},
           {2800.0, -1.098}}};
}

const std::vector<std::string>& bundled_schedule_names() {
  static const std::vector<std::string> names = {"learning", "verification-1",
                                                 "verification-2"};
  return names;
}

RodSchedule bundled_schedule(const std::string& name) {
  if (name == "learning") return learning_schedule();
  if (name == "verification-1") return verification1_schedule();
  if (name == "verification-2") return verification2_schedule();
  throw GenerationError("unknown schedule '" + name + "'");
}

Dataset generate_dataset(const SurrogatePlantParams& params,
                         const RodSchedule& schedule, double duration,
                         double sample_period, RngStream* noise,
                         std::string name) {
  validate_schedule(params, schedule);
  if (sample_period <= 0.0) throw GenerationError("sample period must be > 0");
  const auto samples = static_cast<std::size_t>(duration / sample_period);
  if (samples == 0) throw GenerationError("duration shorter than one sample");

  const int substeps =
      std::max(1, static_cast<int>(std::llround(sample_period / params.substep)));
  const double h = sample_period / substeps;

  Dataset data;
  data.inputs.reserve(samples);
  data.targets.reserve(samples);
  data.nominal_input = params.z_nom;
  data.nominal_output = 1.0;
  data.sample_period = sample_period;
  data.name = std::move(name);

  PlantState state{1.0, 1.0, 1.0};
  double z = params.z_nom;

  for (std::size_t k = 0; k < samples; ++k) {
    const double t = static_cast<double>(k) * sample_period;
    const double target = schedule.target_at(t);

    if (!(state.n >= 0.0) || state.n > params.max_power_ratio)
      throw GenerationError(
          "surrogate plant unstable: scaled power " + std::to_string(state.n) +
          " left [0, " + std::to_string(params.max_power_ratio) + "] at t = " +
          std::to_string(t) + " s");

    data.inputs.push_back(target);
    double y = state.n;
    if (noise != nullptr && params.noise_std > 0.0)
      y += params.noise_std * gaussian(*noise);
    data.targets.push_back(y);

    for (int s = 0; s < substeps; ++s) {
      const double ts = t + s * h;
      const double tgt = schedule.target_at(ts);
      state = rk4_step(params, state, z, tgt, h);
      const double dist = tgt - z;
      const double travel = params.rod_speed * h;
      z = std::fabs(dist) <= travel ? tgt : z + (dist > 0.0 ? travel : -travel);
    }
  }
  return data;
}

}  // namespace evonarx
