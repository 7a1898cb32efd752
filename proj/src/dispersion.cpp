#include "cityroad/dispersion.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace cityroad {

namespace {

/// The three ratios of the road Green's function at s = sqrt(lambda/d):
/// sqrt(d lambda) coth(s), sqrt(d lambda) / sinh(s), and log(sinh(s) / sqrt(d lambda)).
struct RoadRatios {
  double q_coth = 0.0;
  double q_csch = 0.0;
  double log_sinh_over_q = 0.0;
};

RoadRatios road_ratios(double lambda, double d, DispersionBranch branch) {
  const double s = std::sqrt(lambda / d);
  const bool taylor = branch == DispersionBranch::taylor || (branch == DispersionBranch::automatic && s < kTaylorSwitch);
  RoadRatios r;
  if (taylor) {
    const double s2 = s * s;
    r.q_coth = d * (1.0 + s2 / 3.0);
    r.q_csch = d * (1.0 - s2 / 6.0);
    r.log_sinh_over_q = std::log1p(s2 / 6.0) - std::log(d);
    return r;
  }
  const double q = std::sqrt(d * lambda);
  r.q_coth = q / std::tanh(s);
  r.q_csch = s > 700.0 ? 0.0 : q / std::sinh(s);
  const double log_sinh = s > 1.0 ? s + std::log1p(-std::exp(-2.0 * s)) - std::numbers::ln2 : std::log(std::sinh(s));
  r.log_sinh_over_q = log_sinh - std::log(q);
  return r;
}

double arccosh_from_log(double y, double log_y) {
  if (y < 1e8) return std::log(y + std::sqrt((y - 1.0) * (y + 1.0)));
  return log_y + std::log1p(std::sqrt(1.0 - std::exp(-2.0 * log_y)));
}

}  // namespace

double dispersion_delta(double lambda, const Parameters& p) {
  const RoadRatios r = road_ratios(lambda, p.d, DispersionBranch::automatic);
  return p.alpha * p.alpha + p.d * lambda + 2.0 * p.alpha * r.q_coth;
}

DispersionPoint dispersion_eval(double lambda, const Parameters& p) {
  return dispersion_eval(lambda, p, DispersionBranch::automatic);
}

DispersionPoint dispersion_eval(double lambda, const Parameters& p, DispersionBranch branch) {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw std::invalid_argument("dispersion_eval: lambda must be >= 0");
  const double a = p.alpha;
  const double b = p.beta;
  const double f0 = p.f.fprime0();
  const RoadRatios r = lambda == 0.0 ? RoadRatios{p.d, p.d, -std::log(p.d)} : road_ratios(lambda, p.d, branch);

  DispersionPoint pt;
  pt.lambda = lambda;
  pt.delta = a * a + p.d * lambda + 2.0 * a * r.q_coth;
  const double bracket = pt.delta / (2.0 * a * b) * (lambda + 2.0 * b - f0) - (a + r.q_coth);
  double log_y = -std::numeric_limits<double>::infinity();
  if (bracket > 0.0) {
    log_y = std::log(bracket) + r.log_sinh_over_q;
    pt.y = std::exp(log_y);
  } else {
    pt.y = bracket * std::exp(r.log_sinh_over_q);
  }
  if (pt.y > 1.0) {
    pt.mu = arccosh_from_log(pt.y, log_y);
    pt.c = lambda / *pt.mu;
  }
  return pt;
}

double crossing_g(double lambda, const Parameters& p) { return lambda + 2.0 * p.beta - p.f.fprime0(); }

double crossing_G(double lambda, const Parameters& p) {
  const RoadRatios r = lambda == 0.0 ? RoadRatios{p.d, p.d, 0.0} : road_ratios(lambda, p.d, DispersionBranch::automatic);
  const double delta = p.alpha * p.alpha + p.d * lambda + 2.0 * p.alpha * r.q_coth;
  return 2.0 * p.alpha * p.beta / delta * (p.alpha + r.q_coth + r.q_csch);
}

double find_lambda0(const Parameters& p) {
  p.validate();
  if (!(p.f.fprime0() > 0.0)) throw std::invalid_argument("find_lambda0: requires f'(0) > 0");
  auto gap = [&](double l) { return crossing_g(l, p) - crossing_G(l, p); };

  double lo = 0.0;
  double hi = 1.0;
  while (gap(hi) <= 0.0) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e6) throw std::runtime_error("find_lambda0: no sign change of g - G below lambda = 1e6");
  }
  while (hi - lo > 1e-12 * std::max(1.0, lo)) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (gap(mid) > 0.0 ? hi : lo) = mid;
  }
  const double root = 0.5 * (lo + hi);
  const double y = dispersion_eval(root, p).y;
  if (!(std::abs(y - 1.0) <= 1e-10)) throw std::runtime_error("find_lambda0: post-check |y(lambda0) - 1| <= 1e-10 failed");
  return root;
}

namespace {

double speed_at(double lambda, const Parameters& p) {
  const auto pt = dispersion_eval(lambda, p);
  return pt.c ? *pt.c : std::numeric_limits<double>::infinity();
}

std::vector<DispersionPoint> geometric_scan(double lo, double hi, const Parameters& p) {
  std::vector<DispersionPoint> scan;
  scan.reserve(kScanPoints);
  const double ratio = std::log(hi / lo) / (kScanPoints - 1);
  for (int i = 0; i < kScanPoints; ++i) scan.push_back(dispersion_eval(lo * std::exp(ratio * i), p));
  scan.back() = dispersion_eval(hi, p);
  return scan;
}

std::size_t argmin_speed(const std::vector<DispersionPoint>& scan) {
  std::size_t best = 0;
  double best_c = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < scan.size(); ++i)
    if (scan[i].c && *scan[i].c < best_c) {
      best_c = *scan[i].c;
      best = i;
    }
  return best;
}

template <class F>
double golden_section(F&& fn, double a, double b, double rel_tol) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = fn(c);
  double fd = fn(d);
  while (b - a > rel_tol * std::abs(0.5 * (a + b))) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = fn(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = fn(d);
    }
  }
  return 0.5 * (a + b);
}

}  // namespace

DispersionResult compute_c_star(const Parameters& p) {
  DispersionResult res;
  res.lambda0 = find_lambda0(p);
  const double lo = res.lambda0 * (1.0 + 1e-6);
  double hi = res.lambda0 * 1e4;
  res.scan = geometric_scan(lo, hi, p);
  std::size_t i = argmin_speed(res.scan);
  if (i + 1 == res.scan.size()) {
    hi *= 10.0;
    res.scan = geometric_scan(lo, hi, p);
    i = argmin_speed(res.scan);
  }
  if (i == 0 || i + 1 == res.scan.size())
    throw std::runtime_error("compute_c_star: minimum of c(lambda) lies at a scan endpoint");

  for (std::size_t k = 1; k + 1 < res.scan.size(); ++k) {
    const auto& s = res.scan;
    if (s[k].c && s[k - 1].c && s[k + 1].c && *s[k].c < *s[k - 1].c && *s[k].c <= *s[k + 1].c)
      res.local_minima.push_back({s[k].lambda, *s[k].c});
  }

  res.lambda_star = golden_section([&](double l) { return speed_at(l, p); }, res.scan[i - 1].lambda,
                                   res.scan[i + 1].lambda, 1e-10);
  const auto star = dispersion_eval(res.lambda_star, p);
  res.mu_star = *star.mu;
  res.c_star = res.lambda_star / res.mu_star;
  if (!(*res.scan.front().c > res.c_star && *res.scan.back().c > res.c_star))
    throw std::runtime_error("compute_c_star: scan endpoints do not exceed the minimum");
  return res;
}

namespace {

/// cosh(s z) / sinh(s) and sinh(s z) / sinh(s) for z in [0, 1], overflow-free.
struct HyperbolicRatios {
  double s;
  double denom;  // 1 - e^{-2s}
  explicit HyperbolicRatios(double s_) : s(s_), denom(-std::expm1(-2.0 * s_)) {}
  double cosh_ratio(double z) const { return (std::exp(-s * (1.0 - z)) + std::exp(-s * (1.0 + z))) / denom; }
  double sinh_ratio(double z) const { return std::exp(-s * (1.0 - z)) * -std::expm1(-2.0 * s * z) / denom; }
};

}  // namespace

double exponential_profile(double x, double lambda, double mu, const Parameters& p) {
  const double s = std::sqrt(lambda / p.d);
  const double q = std::sqrt(p.d * lambda);
  const HyperbolicRatios h(s);
  const double delta = dispersion_delta(lambda, p);
  const double near = q * h.cosh_ratio(1.0 - x) + p.alpha * h.sinh_ratio(1.0 - x);
  const double far = q * h.cosh_ratio(x) + p.alpha * h.sinh_ratio(x);
  return p.beta / delta * (near + std::exp(-mu) * far);
}

double exponential_profile_derivative(double x, double lambda, double mu, const Parameters& p) {
  const double s = std::sqrt(lambda / p.d);
  const double q = std::sqrt(p.d * lambda);
  const HyperbolicRatios h(s);
  const double delta = dispersion_delta(lambda, p);
  const double near = -s * (q * h.sinh_ratio(1.0 - x) + p.alpha * h.cosh_ratio(1.0 - x));
  const double far = s * (q * h.sinh_ratio(x) + p.alpha * h.cosh_ratio(x));
  return p.beta / delta * (near + std::exp(-mu) * far);
}

double profile_v_star(double x, const DispersionResult& res, const Parameters& p) {
  return exponential_profile(x, res.lambda_star, res.mu_star, p);
}

double exponential_ansatz_residual(double lambda, double mu, const Parameters& p) {
  const double c = lambda / mu;
  const double v0 = exponential_profile(0.0, lambda, mu, p);
  const double v1 = exponential_profile(1.0, lambda, mu, p);
  const double dv0 = exponential_profile_derivative(0.0, lambda, mu, p);
  const double dv1 = exponential_profile_derivative(1.0, lambda, mu, p);
  const double f0 = p.f.fprime0();
  const double em = std::exp(-mu);

  const double r_speed = std::abs(mu * c - lambda) / lambda;
  const double city_rhs = f0 + p.alpha * (v0 + std::exp(mu) * v1) - 2.0 * p.beta;
  const double r_city = std::abs(mu * c - city_rhs) / (lambda + f0 + 2.0 * p.beta);
  const double r_left = std::abs(-p.d * dv0 + p.alpha * v0 - p.beta) / p.beta;
  const double r_right = std::abs(p.d * dv1 + p.alpha * v1 - p.beta * em) / (p.beta * em);
  return std::max({r_speed, r_city, r_left, r_right});
}

double ExponentialSupersolution::road(int j, double x, double t) const {
  const double e = std::exp(-res.mu_star * (j - res.c_star * t));
  return std::min(theta * e * profile_v_star(x, res, p), p.beta / p.alpha);
}

double ExponentialSupersolution::city(int j, double t) const {
  return std::min(theta * std::exp(-res.mu_star * (j - res.c_star * t)), 1.0);
}

ExponentialSupersolution fit_supersolution(const LatticeState& s, const DispersionResult& res, const Parameters& p) {
  ExponentialSupersolution sup{res, p, 0.0};
  const double t = s.time;
  for (int j = s.j_min; j <= s.j_max; ++j) {
    const double r = s.rho_at(j);
    if (r > 0.0) sup.theta = std::max(sup.theta, r * std::exp(res.mu_star * (j - res.c_star * t)));
    if (j == s.j_max) break;
    const EdgeGrid& e = s.edge_at(j);
    for (int i = 0; i <= e.m(); ++i) {
      if (e[i] <= 0.0) continue;
      const double base = std::exp(-res.mu_star * (j - res.c_star * t)) * profile_v_star(e.x(i), res, p);
      sup.theta = std::max(sup.theta, e[i] / base);
    }
  }
  return sup;
}

}  // namespace cityroad
