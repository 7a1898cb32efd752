// Large-diffusion limit of the city-road system.
//
// As d -> infinity every road becomes flat and the model reduces to the
// lattice ODE system
//   V_j' = -2 alpha V_j + beta (P_j + P_{j+1})
//   P_j' = f(P_j) + alpha (V_j + V_{j-1}) - 2 beta P_j
// with its own minimal speed c*_inf.
#pragma once

#include <utility>
#include <vector>

#include "cityroad/lattice_sim.hpp"
#include "cityroad/model.hpp"

namespace cityroad {

/// V[k] is the road between j_min + k and j_min + k + 1; P[k] the city j_min + k.
struct AsymptoticState {
  int j_min = 0;
  int j_max = 1;
  std::vector<double> V;
  std::vector<double> P;
  double time = 0.0;

  static AsymptoticState constant(int j_min, int j_max, double v_value, double p_value);
  double P_at(int j) const;
  double V_at(int j) const;
  void validate() const;
};

/// Largest stable step for the explicit integrator: 0.1 / max(f'(0), 2 beta, 2 alpha).
double max_asymptotic_dt(const Parameters& p);

/// Classical RK4 step with zero exterior. Throws BlowUpError if any value
/// exceeds 10 max(beta/alpha, 1, |s|).
AsymptoticState step_asymptotic(const AsymptoticState& s, double dt, const Parameters& p);

struct AsymptoticTrajectory {
  std::vector<AsymptoticState> snapshots;
  std::vector<std::pair<double, double>> mass;  // (time, sum V + sum P)
  bool window_contaminated = false;

  const AsymptoticState& final_state() const { return snapshots.back(); }
};

struct AsymptoticConfig {
  double T = 60.0;
  double dt = 0.01;
  int snapshot_stride = 0;  // 0: about 200 snapshots
  void validate(const Parameters& p) const;
};

AsymptoticTrajectory simulate_asymptotic(const AsymptoticState& initial, const AsymptoticConfig& cfg,
                                         const Parameters& p);

/// Matched limit data: V_j = integral of the road j, P_j = rho_j.
AsymptoticState asymptotic_from_lattice(const LatticeState& s);

struct AsymptoticDispersion {
  double psi = 0.0;
  double delta_inf = 0.0;
  double c_plus = 0.0;  // NaN for mu = 0
};

/// Psi(c, mu), Delta(mu) and the positive root c_plus(mu).
AsymptoticDispersion asymptotic_dispersion_eval(double mu, double c, const Parameters& p);

/// dPsi/dmu at (c, mu).
double asymptotic_dpsi_dmu(double mu, double c, const Parameters& p);

struct AsymptoticSpeed {
  double mu_star = 0.0;
  double c_star_inf = 0.0;
  double psi_residual = 0.0;
  double dpsi_residual = 0.0;
};

inline constexpr double kAsymptoticMuLow = 1e-4;
inline constexpr double kAsymptoticMuHigh = 50.0;

/// Minimises c_plus over a 2000-point geometric grid on [1e-4, 50] and
/// refines by golden section. Throws if the minimum is at a grid end or the
/// tangency residuals exceed 1e-8.
AsymptoticSpeed compute_c_star_inf(const Parameters& p);

struct ConvergenceRow {
  double epsilon = 0.0;
  double error = 0.0;
};

struct ConvergenceExperiment {
  SimulationConfig sim;      // T, dt, m, margin for the full runs
  double asymptotic_dt = 0.0;  // 0: use sim.dt
  double t_begin = 1.0;      // errors are measured on [t_begin, T]
  int central_radius = 10;   // |j| <= radius
};

/// For each epsilon = 1/d runs the full system with d = 1/epsilon and the
/// limit system from matched data (flat roads) and reports the max deviation.
std::vector<ConvergenceRow> large_d_convergence_experiment(const std::vector<double>& eps_list,
                                                           const InitialData& data,
                                                           const ConvergenceExperiment& exp,
                                                           const Parameters& p);

}  // namespace cityroad
