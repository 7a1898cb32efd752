#include "cityroad/asymptotic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace cityroad {

AsymptoticState AsymptoticState::constant(int j_min, int j_max, double v_value, double p_value) {
  if (j_min >= j_max) throw std::invalid_argument("asymptotic window needs j_min < j_max");
  AsymptoticState s;
  s.j_min = j_min;
  s.j_max = j_max;
  s.V.assign(static_cast<std::size_t>(j_max - j_min), v_value);
  s.P.assign(static_cast<std::size_t>(j_max - j_min + 1), p_value);
  return s;
}

double AsymptoticState::P_at(int j) const {
  if (j < j_min || j > j_max) return 0.0;
  return P[static_cast<std::size_t>(j - j_min)];
}

double AsymptoticState::V_at(int j) const {
  if (j < j_min || j >= j_max) return 0.0;
  return V[static_cast<std::size_t>(j - j_min)];
}

void AsymptoticState::validate() const {
  if (j_min >= j_max) throw std::invalid_argument("asymptotic window needs j_min < j_max");
  if (P.size() != static_cast<std::size_t>(j_max - j_min + 1) || V.size() + 1 != P.size())
    throw std::invalid_argument("asymptotic state shape does not match its window");
  for (double v : V)
    if (!std::isfinite(v)) throw std::invalid_argument("asymptotic state has non-finite V");
  for (double v : P)
    if (!std::isfinite(v)) throw std::invalid_argument("asymptotic state has non-finite P");
}

double max_asymptotic_dt(const Parameters& p) { return max_exchange_dt(p); }

namespace {

void rhs(const std::vector<double>& V, const std::vector<double>& P, const Parameters& p, std::vector<double>& dV,
         std::vector<double>& dP) {
  const std::size_t n = P.size();
  for (std::size_t k = 0; k + 1 < n; ++k) dV[k] = -2.0 * p.alpha * V[k] + p.beta * (P[k] + P[k + 1]);
  for (std::size_t k = 0; k < n; ++k) {
    double in = 0.0;
    if (k + 1 < n) in += V[k];
    if (k > 0) in += V[k - 1];
    dP[k] = p.f(P[k]) + p.alpha * in - 2.0 * p.beta * P[k];
  }
}

AsymptoticState rk4(const AsymptoticState& s, double dt, const Parameters& p, double ceiling) {
  const std::size_t nv = s.V.size();
  const std::size_t np = s.P.size();
  std::vector<double> k1v(nv), k2v(nv), k3v(nv), k4v(nv), tv(nv);
  std::vector<double> k1p(np), k2p(np), k3p(np), k4p(np), tp(np);
  auto stage = [&](const std::vector<double>& kv, const std::vector<double>& kp, double h) {
    for (std::size_t i = 0; i < nv; ++i) tv[i] = s.V[i] + h * kv[i];
    for (std::size_t i = 0; i < np; ++i) tp[i] = s.P[i] + h * kp[i];
  };
  rhs(s.V, s.P, p, k1v, k1p);
  stage(k1v, k1p, 0.5 * dt);
  rhs(tv, tp, p, k2v, k2p);
  stage(k2v, k2p, 0.5 * dt);
  rhs(tv, tp, p, k3v, k3p);
  stage(k3v, k3p, dt);
  rhs(tv, tp, p, k4v, k4p);

  AsymptoticState out = s;
  out.time = s.time + dt;
  for (std::size_t i = 0; i < nv; ++i) out.V[i] += dt / 6.0 * (k1v[i] + 2.0 * k2v[i] + 2.0 * k3v[i] + k4v[i]);
  for (std::size_t i = 0; i < np; ++i) out.P[i] += dt / 6.0 * (k1p[i] + 2.0 * k2p[i] + 2.0 * k3p[i] + k4p[i]);

  for (double v : out.V)
    if (!(std::abs(v) <= ceiling)) throw BlowUpError("step_asymptotic: road value exceeds blow-up ceiling");
  for (double v : out.P)
    if (!(std::abs(v) <= ceiling)) throw BlowUpError("step_asymptotic: city value exceeds blow-up ceiling");
  return out;
}

double peak_of(const AsymptoticState& s, const Parameters& p) {
  double peak = std::max(p.beta / p.alpha, 1.0);
  for (double v : s.V) peak = std::max(peak, std::abs(v));
  for (double v : s.P) peak = std::max(peak, std::abs(v));
  return peak;
}

}  // namespace

AsymptoticState step_asymptotic(const AsymptoticState& s, double dt, const Parameters& p) {
  p.validate();
  s.validate();
  if (!(dt > 0.0) || dt > max_asymptotic_dt(p) * (1.0 + 1e-12))
    throw std::invalid_argument("step_asymptotic: dt must lie in (0, 0.1 / max(f'(0), 2 beta, 2 alpha)]");
  return rk4(s, dt, p, 10.0 * peak_of(s, p));
}

void AsymptoticConfig::validate(const Parameters& p) const {
  if (!(T > 0.0) || !std::isfinite(T)) throw std::invalid_argument("asymptotic config: T must be > 0");
  if (!(dt > 0.0) || dt > max_asymptotic_dt(p) * (1.0 + 1e-12))
    throw std::invalid_argument("asymptotic config: dt must lie in (0, 0.1 / max(f'(0), 2 beta, 2 alpha)]");
  if (snapshot_stride < 0) throw std::invalid_argument("asymptotic config: snapshot_stride must be >= 0");
}

AsymptoticTrajectory simulate_asymptotic(const AsymptoticState& initial, const AsymptoticConfig& cfg,
                                         const Parameters& p) {
  p.validate();
  cfg.validate(p);
  initial.validate();
  const long steps = std::max(1L, std::lround(cfg.T / cfg.dt));
  const long stride = cfg.snapshot_stride > 0 ? cfg.snapshot_stride : std::max(1L, steps / 200);
  const double ceiling = 10.0 * peak_of(initial, p);

  AsymptoticTrajectory traj;
  auto record = [&](const AsymptoticState& s) {
    double mass = 0.0;
    double peak = 0.0;
    for (double v : s.V) mass += v;
    for (double v : s.P) {
      mass += v;
      peak = std::max(peak, std::abs(v));
    }
    const double edge = std::max(std::abs(s.P.front()), std::abs(s.P.back()));
    traj.window_contaminated = traj.window_contaminated || (peak > 0.0 && edge > 1e-8 * peak);
    traj.mass.emplace_back(s.time, mass);
    traj.snapshots.push_back(s);
  };
  AsymptoticState s = initial;
  record(s);
  for (long k = 1; k <= steps; ++k) {
    s = rk4(s, cfg.dt, p, ceiling);
    s.time = initial.time + static_cast<double>(k) * cfg.dt;
    if (k % stride == 0 || k == steps) record(s);
  }
  return traj;
}

AsymptoticState asymptotic_from_lattice(const LatticeState& s) {
  AsymptoticState a;
  a.j_min = s.j_min;
  a.j_max = s.j_max;
  a.time = s.time;
  a.P = s.rho;
  a.V.reserve(s.edges.size());
  for (const auto& e : s.edges) a.V.push_back(e.integral());
  return a;
}

AsymptoticDispersion asymptotic_dispersion_eval(double mu, double c, const Parameters& p) {
  const double f0 = p.f.fprime0();
  const double shift = 2.0 * p.alpha - 2.0 * p.beta + f0;
  const double b = 2.0 * p.alpha + 2.0 * p.beta - f0;
  AsymptoticDispersion out;
  out.delta_inf = shift * shift + 8.0 * p.alpha * p.beta * (1.0 + std::cosh(mu));
  const double root = std::sqrt(out.delta_inf);
  out.psi = -b + root - 2.0 * mu * c;
  out.c_plus = mu > 0.0 ? (-b + root) / (2.0 * mu) : std::numeric_limits<double>::quiet_NaN();
  return out;
}

double asymptotic_dpsi_dmu(double mu, double c, const Parameters& p) {
  const double delta = asymptotic_dispersion_eval(mu, c, p).delta_inf;
  return 4.0 * p.alpha * p.beta * std::sinh(mu) / std::sqrt(delta) - 2.0 * c;
}

AsymptoticSpeed compute_c_star_inf(const Parameters& p) {
  p.validate();
  if (!(p.f.fprime0() > 0.0)) throw std::invalid_argument("compute_c_star_inf: requires f'(0) > 0");
  auto c_plus = [&](double mu) { return asymptotic_dispersion_eval(mu, 0.0, p).c_plus; };

  constexpr int n = 2000;
  const double ratio = std::log(kAsymptoticMuHigh / kAsymptoticMuLow) / (n - 1);
  std::vector<double> grid(n);
  std::size_t best = 0;
  for (int i = 0; i < n; ++i) {
    grid[static_cast<std::size_t>(i)] = kAsymptoticMuLow * std::exp(ratio * i);
    if (c_plus(grid[static_cast<std::size_t>(i)]) < c_plus(grid[best])) best = static_cast<std::size_t>(i);
  }
  if (best == 0 || best + 1 == grid.size())
    throw std::runtime_error("compute_c_star_inf: minimum of c_plus lies at a grid endpoint");

  double a = grid[best - 1];
  double b = grid[best + 1];
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = b - inv_phi * (b - a);
  double x2 = a + inv_phi * (b - a);
  double f1 = c_plus(x1);
  double f2 = c_plus(x2);
  while (b - a > 1e-12 * 0.5 * (a + b)) {
    if (f1 < f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - inv_phi * (b - a);
      f1 = c_plus(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + inv_phi * (b - a);
      f2 = c_plus(x2);
    }
  }
  // golden section stalls near sqrt(eps); polish on dc_plus/dmu = dPsi/dmu / (2 mu)
  auto slope = [&](double mu) { return asymptotic_dpsi_dmu(mu, c_plus(mu), p); };
  double lo = grid[best - 1];
  double hi = grid[best + 1];
  if (slope(lo) < 0.0 && slope(hi) > 0.0) {
    for (int it = 0; it < 200 && hi - lo > 4.0 * std::numeric_limits<double>::epsilon() * hi; ++it) {
      const double mid = 0.5 * (lo + hi);
      (slope(mid) < 0.0 ? lo : hi) = mid;
    }
    a = lo;
    b = hi;
  }
  AsymptoticSpeed out;
  out.mu_star = 0.5 * (a + b);
  out.c_star_inf = c_plus(out.mu_star);
  out.psi_residual = std::abs(asymptotic_dispersion_eval(out.mu_star, out.c_star_inf, p).psi);
  out.dpsi_residual = std::abs(asymptotic_dpsi_dmu(out.mu_star, out.c_star_inf, p));
  if (out.psi_residual > 1e-8 || out.dpsi_residual > 1e-8)
    throw std::runtime_error("compute_c_star_inf: tangency conditions not met");
  return out;
}

std::vector<ConvergenceRow> large_d_convergence_experiment(const std::vector<double>& eps_list,
                                                           const InitialData& data,
                                                           const ConvergenceExperiment& exp,
                                                           const Parameters& p) {
  std::vector<ConvergenceRow> rows;
  for (double eps : eps_list) {
    if (!(eps > 0.0)) throw std::invalid_argument("large_d_convergence_experiment: epsilon must be > 0");
    Parameters pe = p;
    pe.d = 1.0 / eps;

    const LatticeState start = init_state(data, exp.sim, pe).state;
    for (const auto& e : start.edges) {
      const auto v = e.values();
      if (std::any_of(v.begin(), v.end(), [&](double x) { return x != v[0]; }))
        throw std::invalid_argument("large_d_convergence_experiment: initial roads must be flat");
    }
    const Trajectory full = simulate_from(start, exp.sim, pe);

    AsymptoticConfig acfg;
    acfg.T = exp.sim.T;
    acfg.dt = exp.asymptotic_dt > 0.0 ? exp.asymptotic_dt : exp.sim.dt;
    acfg.snapshot_stride = static_cast<int>(std::lround(exp.sim.effective_stride() * exp.sim.dt / acfg.dt));
    const AsymptoticTrajectory lim = simulate_asymptotic(asymptotic_from_lattice(start), acfg, p);

    double err = 0.0;
    const std::size_t count = std::min(full.snapshots.size(), lim.snapshots.size());
    for (std::size_t k = 0; k < count; ++k) {
      const LatticeState& fs = full.snapshots[k];
      const AsymptoticState& as = lim.snapshots[k];
      if (std::abs(fs.time - as.time) > 1e-9) throw std::logic_error("convergence experiment: snapshot times diverged");
      if (fs.time < exp.t_begin - 1e-12) continue;
      for (int j = -exp.central_radius; j <= exp.central_radius; ++j) {
        err = std::max(err, std::abs(fs.rho_at(j) - as.P_at(j)));
        if (j >= fs.j_min && j < fs.j_max)
          for (double v : fs.edge_at(j).values()) err = std::max(err, std::abs(v - as.V_at(j)));
      }
    }
    rows.push_back({eps, err});
  }
  return rows;
}

}  // namespace cityroad
