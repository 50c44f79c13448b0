#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "evonarx/rng.hpp"

namespace evonarx {

// Paired input/target sequences in scaled units: inputs are control-rod
// positions in metres, targets are thermal power over nominal power (1.0 at
// nominal). The nominal values seed the delayed histories before sample 0.
struct Dataset {
  std::vector<double> inputs;
  std::vector<double> targets;
  double nominal_input = -1.098;
  double nominal_output = 1.0;
  double sample_period = 1.0;  // seconds
  std::string name;
};

struct GenerationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// One-group point kinetics with a single effective precursor, first-order
// temperature feedback and a saturating rod-worth curve, integrated with
// fixed-step RK4. Stands in for the full reactor model as a data source; the
// worth-curve constants are calibrated so a full rod stroke maps steady-state
// scaled power onto [0, 1.184] with 1.0 at the nominal rod position.
struct SurrogatePlantParams {
  double beta = 0.0065;         // delayed-neutron fraction
  double lambda_c = 0.08;       // effective precursor decay constant, 1/s
  double gen_time = 1.0e-4;     // neutron generation time, s
  double rod_worth_scale = 0.005;   // reactivity across the worth curve
  double feedback_coeff = 0.005;    // temperature feedback reactivity gain
  double thermal_tau = 2.0;     // thermal time constant, s
  double rod_speed = 0.01;      // rod slew rate, m/s
  double z_min = -2.196;        // rod travel, metres
  double z_nom = -1.098;
  double z_max = 0.0;
  // Saturating worth map g(z) = worth_gain*(1 - exp(-worth_decay*(z-z_min))),
  // calibrated against the [0, 1.184] scaled-power range.
  double worth_gain = 1.2254901960784312;
  double worth_decay = 1.5417299830356568;
  double nominal_power_w = 3.436e9;
  double substep = 0.01;        // RK4 internal step, s
  double max_power_ratio = 10.0;  // generation aborts beyond this
  double noise_std = 0.0;       // optional measurement noise on targets

  // Steady-state scaled power for a held rod position.
  double steady_power(double z) const;
};

// Piecewise-constant rod-position targets: (start time, target) pairs,
// ordered, first entry at t = 0.
struct RodSchedule {
  std::vector<std::pair<double, double>> steps;

  double target_at(double t) const;
};

// Bundled desk-scale schedules (multi-level staircases).
RodSchedule learning_schedule();
RodSchedule verification1_schedule();
RodSchedule verification2_schedule();
const std::vector<std::string>& bundled_schedule_names();
RodSchedule bundled_schedule(const std::string& name);

Dataset generate_dataset(const SurrogatePlantParams& params,
                         const RodSchedule& schedule, double duration,
                         double sample_period, RngStream* noise = nullptr,
                         std::string name = {});

}  // namespace evonarx
