// Time integration of the coupled city-road system on a finite window.
//
// Cities outside the window are held at zero (absorbing exterior). One
// step is a predictor-corrector: explicit reaction/exchange at the cities,
// Crank-Nicolson diffusion on every road with Robin loads averaged between
// the old city densities and the predicted ones.
#pragma once

#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "cityroad/edge_solver.hpp"
#include "cityroad/model.hpp"

namespace cityroad {

class BlowUpError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct InitialData {
  enum class Kind { left_block, sine_bump, point_mass, custom };

  Kind kind = Kind::left_block;
  int block_length = 20;     // left_block: Lambda_j = 1 for j in (-block_length, 0]
  int bump_cities = 5;       // sine_bump: N
  double scale = 1.0;        // sine_bump amplitude epsilon
  int point_index = 0;       // point_mass
  double amplitude = 1.0;    // point_mass
  std::optional<LatticeState> state;  // custom

  static InitialData left_block(int block_length = 20);
  static InitialData sine_bump(int n, double scale = 1.0);
  static InitialData point_mass(int index, double amplitude);
  static InitialData custom(LatticeState s);

  /// Index range [lo, hi] of the cities carrying the data.
  std::pair<int, int> support() const;
};

struct SimulationConfig {
  double T = 50.0;
  double dt = 1e-3;
  int m = 32;
  int window_margin = 8;
  int snapshot_stride = 0;    // 0: about 200 snapshots per run
  double c_upper_guess = 1.0;
  /// Leading steps replaced by two backward-Euler half steps each; damps the
  /// stiff edge modes excited by initial data that violate the Robin conditions.
  int smoothing_steps = 2;

  void validate() const;
  long step_count() const;
  int effective_stride() const;
};

struct InitResult {
  LatticeState state;
  CompatibilityReport compatibility;
};

/// Step cap of the explicit reaction/exchange part: 0.1 / max(f'(0), 2 beta, 2 alpha).
double max_exchange_dt(const Parameters& p);

/// Builds the t = 0 state on a window that extends the data support by
/// ceil(c_upper_guess T) + window_margin cities on both sides.
InitResult init_state(const InitialData& data, const SimulationConfig& cfg, const Parameters& p);

/// Reusable step machinery for one (m, dt, p).
class LatticeStepper {
 public:
  LatticeStepper(int m, double dt, const Parameters& p);

  /// Predictor-corrector step; theta = 1 gives the backward-Euler variant.
  LatticeState step(const LatticeState& s, double theta = 0.5) const;
  /// Two backward-Euler half steps.
  LatticeState smoothing_step(const LatticeState& s) const;

  double dt() const { return dt_; }
  void set_blow_up_ceiling(double c) { ceiling_ = c; }

 private:
  LatticeState advance(const LatticeState& s, const EdgeStepOperator& op, double dt) const;

  Parameters p_;
  double dt_;
  EdgeStepOperator crank_nicolson_;
  EdgeStepOperator half_implicit_;
  double ceiling_ = 0.0;  // 0: derived from the state at each call
};

/// Single Crank-Nicolson predictor-corrector step.
LatticeState step_system(const LatticeState& s, double dt, const Parameters& p);

/// Upper bounds max(|Lambda|, 1) and max(beta/alpha, |h|) of the solution.
struct APrioriBounds {
  double rho_max = 1.0;
  double v_max = 1.0;
};
APrioriBounds a_priori_bounds(const LatticeState& initial, const Parameters& p);

struct Trajectory {
  std::vector<LatticeState> snapshots;
  std::vector<std::pair<double, double>> mass;  // (time, total mass)
  SimulationConfig config;
  CompatibilityReport compatibility;
  APrioriBounds bounds;
  double max_bound_violation = 0.0;
  bool window_contaminated = false;

  const LatticeState& final_state() const { return snapshots.back(); }
};

/// Runs the full system. Throws std::invalid_argument if dt exceeds
/// max_exchange_dt, std::runtime_error if an a-priori bound is exceeded by
/// more than 1e-9 * scale, BlowUpError on divergence.
Trajectory simulate(const InitialData& data, const SimulationConfig& cfg, const Parameters& p);

/// Same, starting from an already prepared state.
Trajectory simulate_from(const LatticeState& initial, const SimulationConfig& cfg, const Parameters& p);

/// Max deviation from (beta/alpha, 1) at the final snapshot over |j| <= radius.
/// radius < 0 uses a quarter of the window width.
double check_long_time_convergence(const Trajectory& traj, const Parameters& p, int radius = -1);

/// Largest amount by which `lower` exceeds `upper` anywhere (0 if ordered).
double ordering_violation(const LatticeState& lower, const LatticeState& upper);

/// Smallest value in the state.
double min_value(const LatticeState& s);

}  // namespace cityroad
