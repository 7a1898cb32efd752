#include "cityroad/acceptance.hpp"

#include <fmt/format.h>

#include <chrono>
#include <cmath>
#include <exception>
#include <functional>
#include <limits>
#include <numbers>
#include <random>
#include <vector>

#include "cityroad/asymptotic.hpp"
#include "cityroad/dispersion.hpp"
#include "cityroad/edge_solver.hpp"
#include "cityroad/front_speed.hpp"
#include "cityroad/lattice_sim.hpp"

namespace cityroad {

namespace {

struct Outcome {
  bool passed = false;
  std::string detail;
};

Outcome edge_convergence() {
  const auto p = default_parameters();
  const double coarse = manufactured_solution_error(32, 1e-3, 0.1, p);
  const double fine = manufactured_solution_error(64, 2.5e-4, 0.1, p);
  const double ratio = coarse / fine;
  return {ratio >= 3.5, fmt::format("e32={:.3e} e64={:.3e} ratio={:.3f} (need >= 3.5)", coarse, fine, ratio)};
}

double relative_drift(const Trajectory& traj) {
  const double m0 = traj.mass.front().second;
  double worst = 0.0;
  for (const auto& [t, m] : traj.mass) worst = std::max(worst, std::abs(m - m0) / m0);
  return worst;
}

// The scheme conserves mass exactly in exact arithmetic, so the drift is pure
// rounding; it grows at most like (step count) * eps, and a refinement ratio
// is meaningless below that floor.
double drift_floor(const SimulationConfig& cfg) {
  return static_cast<double>(cfg.step_count()) * std::numeric_limits<double>::epsilon();
}

Outcome mass_conservation() {
  Parameters p = default_parameters();
  p.f = Nonlinearity::inert();
  SimulationConfig cfg;
  cfg.T = 10.0;
  cfg.m = 64;
  cfg.dt = 1e-3;
  const double coarse = relative_drift(simulate(InitialData::left_block(), cfg, p));
  const double coarse_floor = drift_floor(cfg);
  cfg.m = 128;
  cfg.dt = 5e-4;
  const double fine = relative_drift(simulate(InitialData::left_block(), cfg, p));
  const bool at_floor = coarse <= coarse_floor && fine <= drift_floor(cfg);
  const bool shrinks = fine * 3.5 <= coarse;
  return {coarse <= 1e-5 && (shrinks || at_floor),
          fmt::format("drift(m=64)={:.3e} drift(m=128)={:.3e} ({})", coarse, fine,
                      at_floor ? fmt::format("both under the rounding floor steps*eps={:.1e}", drift_floor(cfg)) : fmt::format("ratio {:.2f}", coarse / fine))};
}

Outcome steady_state() {
  const auto p = default_parameters();
  const double v_star = p.beta / p.alpha;
  const auto s = LatticeState::constant(-20, 20, 32, 1.0, v_star);
  const auto next = step_system(s, 1e-3, p);
  // the absorbing exterior drains the two window ends; judge the interior
  double full = 0.0;
  for (int j = -10; j <= 10; ++j) {
    full = std::max(full, std::abs(next.rho_at(j) - 1.0));
    if (j < 10)
      for (double v : next.edge_at(j).values()) full = std::max(full, std::abs(v - v_star));
  }
  const auto a = AsymptoticState::constant(-20, 20, v_star, 1.0);
  const auto an = step_asymptotic(a, max_asymptotic_dt(p), p);
  double limit = 0.0;
  for (int j = -10; j <= 10; ++j) {
    limit = std::max(limit, std::abs(an.P_at(j) - 1.0));
    if (j < 10) limit = std::max(limit, std::abs(an.V_at(j) - v_star));
  }
  return {full <= 1e-12 && limit <= 1e-13, fmt::format("full={:.2e} (<= 1e-12) limit={:.2e} (<= 1e-13)", full, limit)};
}

Outcome dispersion_pipeline() {
  const auto p = default_parameters();
  const auto res = compute_c_star(p);
  const double y_err = std::abs(dispersion_eval(res.lambda0, p).y - 1.0);
  const double ansatz = exponential_ansatz_residual(res.lambda_star, res.mu_star, p);
  const bool ends = *res.scan.front().c > res.c_star && *res.scan.back().c > res.c_star;
  return {y_err <= 1e-10 && ansatz <= 1e-8 && ends,
          fmt::format("c*={:.10f} |y(lambda0)-1|={:.1e} ansatz={:.1e} endpoints_above={}", res.c_star, y_err, ansatz,
                      ends)};
}

// Criteria 5 and 6 share one run of the full system.
struct SpreadingRun {
  Trajectory traj;
  double c_star = 0.0;
};

const SpreadingRun& spreading_run() {
  static const SpreadingRun run = [] {
    const auto p = default_parameters();
    SpreadingRun r;
    r.c_star = compute_c_star(p).c_star;
    SimulationConfig cfg;
    cfg.T = 80.0;
    cfg.m = 32;
    cfg.dt = 1e-3;
    cfg.snapshot_stride = 250;
    cfg.c_upper_guess = 1.5 * r.c_star;
    r.traj = simulate(InitialData::left_block(), cfg, p);
    return r;
  }();
  return run;
}

Outcome theory_vs_simulation() {
  const auto& run = spreading_run();
  std::vector<double> t, x;
  for (const auto& s : run.traj.snapshots) {
    if (s.time > 60.0 + 1e-9) break;
    if (s.time < 30.0 - 1e-9) continue;
    t.push_back(s.time);
    x.push_back(level_position(s.rho, 0.5, s.j_min));
  }
  const auto fit = fit_front(t, x, 0.5, {0.5, 1.0});
  const double rel = std::abs(fit.fitted_speed - run.c_star) / run.c_star;
  return {rel <= 0.05 && !run.traj.window_contaminated,
          fmt::format("c_measured={:.5f} c*={:.5f} rel_error={:.4f} (<= 0.05) residual={:.3f} contaminated={}",
                      fit.fitted_speed, run.c_star, rel, fit.fit_residual, run.traj.window_contaminated)};
}

// A finite block spreads both ways, so the leftward front is as fast as the
// rightward one; the far field ahead of the rightward front is j >= cut.
double ahead_sup(const LatticeState& s, double cut) {
  double sup = 0.0;
  for (int j = s.j_min; j <= s.j_max; ++j) {
    if (j >= cut) sup = std::max(sup, s.rho_at(j));
    if (j < s.j_max && j + 1 >= cut)
      for (double v : s.edge_at(j).values()) sup = std::max(sup, v);
  }
  return sup;
}

Outcome spreading_dichotomy() {
  const auto& run = spreading_run();
  const auto p = default_parameters();
  const auto& fin = run.traj.final_state();
  const LatticeState* at60 = nullptr;
  for (const auto& s : run.traj.snapshots)
    if (std::abs(s.time - 60.0) < 1e-9) at60 = &s;
  const double sup60 = ahead_sup(*at60, 1.2 * run.c_star * 60.0);
  const double sup80 = ahead_sup(fin, 1.2 * run.c_star * fin.time);
  const double gap = near_field_gap(fin, 0.8 * run.c_star * fin.time, p);
  return {sup60 < 1e-3 && sup80 < 1e-3 && gap <= 0.05,
          fmt::format("sup(j>=1.2c*t) at t=60: {:.2e}, t=80: {:.2e} (< 1e-3); inf gap |j|<=0.8c*t at t=80: {:.2e} "
                      "(<= 0.05)",
                      sup60, sup80, gap)};
}

Outcome asymptotic_speed() {
  const auto p = default_parameters();
  const auto sp = compute_c_star_inf(p);
  SimulationConfig window;
  window.T = 60.0;
  window.c_upper_guess = 1.5 * sp.c_star_inf;
  window.m = 2;
  auto start = asymptotic_from_lattice(init_state(InitialData::left_block(), window, p).state);
  AsymptoticConfig cfg;
  cfg.T = 60.0;
  cfg.dt = 0.01;
  cfg.snapshot_stride = 25;
  const auto traj = simulate_asymptotic(start, cfg, p);
  const auto fit = estimate_speed(traj);
  const double rel = std::abs(fit.fitted_speed - sp.c_star_inf) / sp.c_star_inf;
  const bool tangent = sp.psi_residual <= 1e-8 && sp.dpsi_residual <= 1e-8;
  // Bramson's logarithmic lag for compact data, (3 / (2 mu*)) ln t, lowers the
  // late-half slope by 3 ln 2 / (mu* T); reported, not used for the verdict
  const double lag = 3.0 * std::numbers::ln2 / (sp.mu_star * cfg.T);
  return {rel <= 0.03 && tangent && !traj.window_contaminated,
          fmt::format("c_measured={:.5f} c*_inf={:.5f} rel_error={:.4f} (<= 0.03) psi={:.1e} dpsi={:.1e}; "
                      "expected log-lag {:.4f} -> lag-corrected rel_error={:.4f}",
                      fit.fitted_speed, sp.c_star_inf, rel, sp.psi_residual, sp.dpsi_residual, lag,
                      std::abs(fit.fitted_speed + lag - sp.c_star_inf) / sp.c_star_inf)};
}

Outcome large_d_trend() {
  Parameters p = default_parameters();
  const double c_inf = compute_c_star_inf(p).c_star_inf;
  std::vector<double> speeds;
  for (double d : {1.0, 10.0, 100.0, 1e4}) {
    p.d = d;
    speeds.push_back(compute_c_star(p).c_star);
  }
  bool increasing = true;
  for (std::size_t k = 1; k < speeds.size(); ++k) increasing = increasing && speeds[k] > speeds[k - 1];
  const double rel = std::abs(speeds.back() - c_inf) / c_inf;
  return {increasing && rel <= 0.02,
          fmt::format("c*(1,10,100,1e4)=({:.5f}, {:.5f}, {:.5f}, {:.6f}) c*_inf={:.6f} rel_gap={:.2e} (conjecture check)",
                      speeds[0], speeds[1], speeds[2], speeds[3], c_inf, rel)};
}

Outcome large_d_convergence() {
  const auto p = default_parameters();
  ConvergenceExperiment exp;
  exp.sim.T = 5.0;
  exp.sim.m = 32;
  exp.sim.dt = 1e-3;
  exp.sim.c_upper_guess = 1.0;
  const auto rows = large_d_convergence_experiment({1e-1, 1e-2, 1e-3}, InitialData::left_block(), exp, p);
  const bool decreasing = rows[1].error < rows[0].error && rows[2].error < rows[1].error;
  return {decreasing, fmt::format("e(1e-1)={:.3e} e(1e-2)={:.3e} e(1e-3)={:.3e}", rows[0].error, rows[1].error,
                                  rows[2].error)};
}

Outcome power_law() {
  std::vector<double> rates{0.25, 0.5, 1.0, 2.0, 4.0}, speeds;
  for (double r : rates) {
    Parameters p = default_parameters();
    p.f = Nonlinearity::logistic(r);
    speeds.push_back(compute_c_star(p).c_star);
  }
  const auto fit = loglog_fit(rates, speeds);
  return {fit.a1 >= 0.48 && fit.a1 <= 0.58,
          fmt::format("a1={:.4f} a0={:.4f} max_rel_residual={:.3e} (a1 in [0.48, 0.58])", fit.a1, fit.a0,
                      fit.max_rel_residual)};
}

Outcome comparison_principle() {
  const auto p = default_parameters();
  std::mt19937_64 rng(20240611);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double pi = std::numbers::pi;
  // CN is monotone for dt (d/dx^2 + alpha/dx) <= 1; m = 16, dt = 1e-3 gives 0.27
  SimulationConfig cfg;
  cfg.T = 5.0;
  cfg.m = 16;
  cfg.dt = 1e-3;
  cfg.c_upper_guess = 1.0;
  AsymptoticConfig acfg;
  acfg.T = 5.0;
  acfg.dt = 0.01;

  auto smooth = [&](double amp) {
    const double a = amp * unit(rng), b = amp * unit(rng) * 0.5, k = 1.0 + std::floor(3.0 * unit(rng));
    std::vector<double> v(static_cast<std::size_t>(cfg.m) + 1);
    for (int i = 0; i <= cfg.m; ++i) v[static_cast<std::size_t>(i)] = a + b * std::cos(k * pi * i / cfg.m);
    for (double& x : v) x = std::max(x, 0.0);
    return EdgeGrid(std::move(v));
  };

  double worst_order = 0.0, worst_min = 0.0;
  for (int pair = 0; pair < 20; ++pair) {
    auto lower = LatticeState::constant(-5, 5, cfg.m, 0.0, 0.0);
    for (auto& r : lower.rho) r = unit(rng);
    for (auto& e : lower.edges) e = smooth(p.beta / p.alpha);
    auto upper = lower;
    for (auto& r : upper.rho) r += 0.5 * unit(rng);
    for (auto& e : upper.edges) {
      const auto extra = smooth(0.5);
      for (std::size_t i = 0; i < e.values().size(); ++i) e[i] += extra[i];
    }

    const auto a = simulate(InitialData::custom(lower), cfg, p);
    const auto b = simulate(InitialData::custom(upper), cfg, p);
    for (std::size_t k = 0; k < a.snapshots.size(); ++k) {
      worst_order = std::max(worst_order, ordering_violation(a.snapshots[k], b.snapshots[k]));
      worst_min = std::min({worst_min, min_value(a.snapshots[k]), min_value(b.snapshots[k])});
    }

    const auto al = simulate_asymptotic(asymptotic_from_lattice(a.snapshots.front()), acfg, p);
    const auto au = simulate_asymptotic(asymptotic_from_lattice(b.snapshots.front()), acfg, p);
    for (std::size_t k = 0; k < al.snapshots.size(); ++k) {
      const auto& l = al.snapshots[k];
      const auto& u = au.snapshots[k];
      for (std::size_t i = 0; i < l.P.size(); ++i) {
        worst_order = std::max(worst_order, l.P[i] - u.P[i]);
        worst_min = std::min({worst_min, l.P[i], u.P[i]});
      }
      for (std::size_t i = 0; i < l.V.size(); ++i) {
        worst_order = std::max(worst_order, l.V[i] - u.V[i]);
        worst_min = std::min({worst_min, l.V[i], u.V[i]});
      }
    }
  }
  return {worst_order <= 1e-10 && worst_min >= -1e-12,
          fmt::format("20 pairs x 2 systems: max ordering violation={:.2e} (<= 1e-10) min value={:.2e} (>= -1e-12)",
                      worst_order, worst_min)};
}

// Quadrature budget of the oracle comparison: the oracle at 512 time nodes and
// the solver at m=128, dt=1e-4 are each accurate to about 1e-5.
constexpr double kOracleBudget = 1e-4;

Outcome oracle_agreement() {
  const auto p = default_parameters();
  const double pi = std::numbers::pi;
  auto h0 = [&](double x) { return 0.6 + 0.2 * std::cos(pi * x) + 0.1 * x * x; };
  auto dh0 = [&](double x) { return -0.2 * pi * std::sin(pi * x) + 0.2 * x; };
  const double gl = -p.d * dh0(0.0) + p.alpha * h0(0.0);
  const double gr = p.d * dh0(1.0) + p.alpha * h0(1.0);
  auto g = [&](double t) { return gl + 0.5 * std::sin(3.0 * t); };
  auto h = [&](double t) { return gr * std::exp(-t); };

  const int m = 128;
  const double dt = 1e-4;
  std::vector<double> v(m + 1);
  for (int i = 0; i <= m; ++i) v[static_cast<std::size_t>(i)] = h0(static_cast<double>(i) / m);
  EdgeGrid e(std::move(v));
  const auto op = assemble_step_operator(m, dt, p);
  for (int k = 0; k < 1000; ++k) e = step_edge(op, e, {g(k * dt), g((k + 1) * dt), h(k * dt), h((k + 1) * dt)});

  double worst = 0.0;
  std::string pts;
  for (double x : {0.0, 0.25, 0.5, 1.0}) {
    const double oracle = integral_representation_oracle(h0, g, h, 0.1, x, p);
    const double fd = e[static_cast<std::size_t>(std::lround(x * m))];
    worst = std::max(worst, std::abs(oracle - fd));
    pts += fmt::format(" x={}:{:.2e}", x, std::abs(oracle - fd));
  }
  return {worst <= kOracleBudget, fmt::format("max |oracle - solver|={:.2e} (<= {:.0e});{}", worst, kOracleBudget, pts)};
}

struct Criterion {
  const char* name;
  double budget_seconds;
  std::function<Outcome()> run;
};

const std::vector<Criterion>& criteria() {
  static const std::vector<Criterion> all{
      {"edge-solver convergence", 1.0, edge_convergence},
      {"mass conservation", 30.0, mass_conservation},
      {"steady-state fixed point", 0.0, steady_state},
      {"dispersion self-consistency", 1.0, dispersion_pipeline},
      {"theory vs simulation speed", 120.0, theory_vs_simulation},
      {"spreading dichotomy", 0.0, spreading_dichotomy},
      {"asymptotic speed", 10.0, asymptotic_speed},
      {"large-d trend", 0.0, large_d_trend},
      {"large-d convergence", 120.0, large_d_convergence},
      {"power-law regression", 0.0, power_law},
      {"comparison principle", 0.0, comparison_principle},
      {"oracle agreement", 0.0, oracle_agreement},
  };
  return all;
}

}  // namespace

CriterionResult run_criterion(int id) {
  if (id < 1 || id > kCriterionCount) throw std::invalid_argument(fmt::format("no acceptance criterion {}", id));
  const auto& c = criteria()[static_cast<std::size_t>(id - 1)];
  CriterionResult r;
  r.id = id;
  r.name = c.name;
  r.budget_seconds = c.budget_seconds;
  const auto start = std::chrono::steady_clock::now();
  try {
    const Outcome o = c.run();
    r.passed = o.passed;
    r.detail = o.detail;
  } catch (const std::exception& e) {
    r.passed = false;
    r.detail = fmt::format("exception: {}", e.what());
  }
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (r.budget_seconds > 0.0 && r.seconds > r.budget_seconds) {
    r.passed = false;
    r.detail += fmt::format("; runtime {:.1f} s over the {:.0f} s budget", r.seconds, r.budget_seconds);
  }
  return r;
}

std::vector<CriterionResult> run_acceptance(std::span<const int> ids,
                                            const std::function<void(const CriterionResult&)>& report) {
  std::vector<int> todo(ids.begin(), ids.end());
  if (todo.empty())
    for (int k = 1; k <= kCriterionCount; ++k) todo.push_back(k);
  std::vector<CriterionResult> out;
  for (int id : todo) {
    out.push_back(run_criterion(id));
    if (report) report(out.back());
  }
  return out;
}

std::string format_result(const CriterionResult& r) {
  return fmt::format("{} {:>2} {:<28} ({:.2f} s) {}", r.passed ? "PASS" : "FAIL", r.id, r.name, r.seconds, r.detail);
}

}  // namespace cityroad
