// Measured spreading speed: track the rightmost threshold crossing of the
// city densities and fit a line to its late-time positions.
#pragma once

#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "cityroad/asymptotic.hpp"
#include "cityroad/lattice_sim.hpp"

namespace cityroad {

class NoCrossingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Interpolated coordinate j0 + k + (rho_k - thr) / (rho_k - rho_{k+1}) of
/// the rightmost downward crossing; rho[0] sits at lattice index j0.
double level_position(std::span<const double> rho, double threshold, int j0 = 0);

struct FrontTrace {
  std::vector<double> times;
  std::vector<double> positions;
  double threshold = 0.5;
  double fitted_speed = 0.0;
  double intercept = 0.0;
  double fit_residual = 0.0;
  std::pair<double, double> fit_window{0.0, 0.0};
  bool non_ballistic = false;
};

inline constexpr double kNonBallisticResidual = 0.5;
inline constexpr std::size_t kMinFitSnapshots = 10;

/// Least-squares front speed from (t, position) samples; only samples with
/// t in [lo T, hi T] (T the last time) enter the fit.
FrontTrace fit_front(std::vector<double> times, std::vector<double> positions, double threshold,
                     std::pair<double, double> window_fraction = {0.5, 1.0});

FrontTrace estimate_speed(const Trajectory& traj, double threshold = 0.5,
                          std::pair<double, double> window_fraction = {0.5, 1.0});
FrontTrace estimate_speed(const AsymptoticTrajectory& traj, double threshold = 0.5,
                          std::pair<double, double> window_fraction = {0.5, 1.0});

struct PowerLawFit {
  double a1 = 0.0;
  double a0 = 0.0;
  double max_rel_residual = 0.0;
};

/// Ordinary least squares of ln(speed) against ln(f'(0)).
PowerLawFit loglog_fit(std::span<const double> fprime0_values, std::span<const double> speeds);

/// sup over cities and roads with |j| >= cut of the occupancy.
double far_field_sup(const LatticeState& s, double cut);
/// max deviation from (beta/alpha, 1) over cities and roads with |j| <= cut.
double near_field_gap(const LatticeState& s, double cut, const Parameters& p);
double far_field_sup(const AsymptoticState& s, double cut);
double near_field_gap(const AsymptoticState& s, double cut, const Parameters& p);

}  // namespace cityroad
