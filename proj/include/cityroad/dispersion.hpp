// Linear spreading speed of the city-road system.
//
// Exponential solutions (v, rho) = exp(-mu (j - c t)) (V(x), 1) of the
// system linearised at zero exist iff cosh(mu) = y(lambda) with
// lambda = mu c. The minimal speed is c* = min over lambda > lambda0 of
// lambda / arccosh(y(lambda)), where y(lambda0) = 1.
#pragma once

#include <optional>
#include <vector>

#include "cityroad/model.hpp"

namespace cityroad {

struct DispersionPoint {
  double lambda = 0.0;
  double delta = 0.0;
  /// May overflow to +inf for very large lambda; mu stays finite.
  double y = 0.0;
  std::optional<double> mu;  // defined iff y > 1
  std::optional<double> c;
};

/// Small-s switchover of the Taylor branch, s = sqrt(lambda/d).
inline constexpr double kTaylorSwitch = 1e-4;

DispersionPoint dispersion_eval(double lambda, const Parameters& p);

/// Branch-forced variant used to compare the Taylor and direct formulas.
enum class DispersionBranch { automatic, direct, taylor };
DispersionPoint dispersion_eval(double lambda, const Parameters& p, DispersionBranch branch);

/// Delta(lambda) = alpha^2 + d lambda + 2 alpha sqrt(d lambda) coth(sqrt(lambda/d)).
double dispersion_delta(double lambda, const Parameters& p);

/// g(lambda) = lambda + 2 beta - f'(0), strictly increasing.
double crossing_g(double lambda, const Parameters& p);
/// G(lambda), decreasing from G(0) = 2 beta.
double crossing_G(double lambda, const Parameters& p);

/// Unique root of y = 1 (equivalently g = G). Throws std::runtime_error if
/// no sign change appears below lambda = 1e6 or the post-check fails.
double find_lambda0(const Parameters& p);

struct LocalMinimum {
  double lambda = 0.0;
  double c = 0.0;
};

struct DispersionResult {
  double lambda0 = 0.0;
  double lambda_star = 0.0;
  double mu_star = 0.0;
  double c_star = 0.0;
  std::vector<DispersionPoint> scan;
  /// Every interior grid-local minimum of c on the scan.
  std::vector<LocalMinimum> local_minima;
};

inline constexpr int kScanPoints = 2000;

/// Geometric scan of c(lambda) on (lambda0 (1 + 1e-6), lambda0 1e4) followed
/// by golden-section refinement. Throws if the minimum sits at the upper end
/// even after one x10 extension.
DispersionResult compute_c_star(const Parameters& p);

/// Road profile of the exponential solution at (lambda, mu):
/// V(x) = a cosh(s x) + b sinh(s x), s = sqrt(lambda/d), fixed by the Robin rows.
double exponential_profile(double x, double lambda, double mu, const Parameters& p);
double exponential_profile_derivative(double x, double lambda, double mu, const Parameters& p);

/// V*(x) at the minimiser.
double profile_v_star(double x, const DispersionResult& res, const Parameters& p);

/// Max relative residual of the four exponential-ansatz equations
/// (mu c = lambda, the city line, both Robin lines) with c = lambda / mu.
double exponential_ansatz_residual(double lambda, double mu, const Parameters& p);

/// Moving exponential supersolution min(theta e^{-mu*(j - c* t)} V*(x), beta/alpha)
/// and min(theta e^{-mu*(j - c* t)}, 1).
struct ExponentialSupersolution {
  DispersionResult res;
  Parameters p;
  double theta = 1.0;

  double road(int j, double x, double t) const;
  double city(int j, double t) const;
};

/// Smallest theta making the supersolution dominate `s` at t = s.time.
ExponentialSupersolution fit_supersolution(const LatticeState& s, const DispersionResult& res, const Parameters& p);

}  // namespace cityroad
