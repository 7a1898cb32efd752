#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "cityroad/asymptotic.hpp"
#include "cityroad/dispersion.hpp"
#include "cityroad/front_speed.hpp"
#include "generators.hpp"

using namespace cityroad;

namespace {

AsymptoticState random_pair(std::mt19937_64& rng, int j_min, int j_max, double hi) {
  auto s = AsymptoticState::constant(j_min, j_max, 0.0, 0.0);
  for (auto& v : s.V) v = gen::uniform(rng, 0.0, hi);
  for (auto& v : s.P) v = gen::uniform(rng, 0.0, hi);
  return s;
}

}  // namespace

TEST_CASE("asymptotic step") {
  const auto p = default_parameters();
  SUBCASE("fixed point") {
    auto rng = gen::rng(5);
    for (int trial = 0; trial < 10; ++trial) {
      Parameters q = p;
      q.alpha = gen::uniform(rng, 0.5, 2);
      q.beta = gen::uniform(rng, 0.5, 2);
      // the absorbing exterior reaches a few cities per RK stage; check well inside
      const auto s = AsymptoticState::constant(-20, 20, q.beta / q.alpha, 1.0);
      const auto next = step_asymptotic(s, max_asymptotic_dt(q), q);
      for (int j = -10; j <= 10; ++j) CHECK(std::abs(next.P_at(j) - 1.0) <= 1e-13);
      for (int j = -10; j < 10; ++j) CHECK(std::abs(next.V_at(j) - q.beta / q.alpha) <= 1e-13);
      // stationary relation V_j = beta/(2 alpha) (P_j + P_{j+1})
      CHECK(s.V[0] == doctest::Approx(q.beta / (2 * q.alpha) * (s.P[0] + s.P[1])));
    }
  }
  SUBCASE("zero") {
    const auto s = AsymptoticState::constant(-3, 3, 0.0, 0.0);
    const auto next = step_asymptotic(s, 0.01, p);
    for (double v : next.P) CHECK(v == 0.0);
    for (double v : next.V) CHECK(v == 0.0);
  }
  SUBCASE("step cap") {
    const auto s = AsymptoticState::constant(-3, 3, 0.0, 0.0);
    CHECK(max_asymptotic_dt(p) == doctest::Approx(0.05));
    CHECK_THROWS_AS(step_asymptotic(s, 0.06, p), std::invalid_argument);
  }
  SUBCASE("ordering and positivity") {
    auto rng = gen::rng(21);
    AsymptoticConfig cfg;
    cfg.T = 5.0;
    cfg.dt = 0.01;
    for (int trial = 0; trial < 10; ++trial) {
      const auto lower = random_pair(rng, -6, 6, 0.8);
      auto upper = lower;
      for (auto& v : upper.V) v += gen::uniform(rng, 0, 0.3);
      for (auto& v : upper.P) v += gen::uniform(rng, 0, 0.3);
      const auto a = simulate_asymptotic(lower, cfg, p);
      const auto b = simulate_asymptotic(upper, cfg, p);
      for (std::size_t k = 0; k < a.snapshots.size(); ++k) {
        for (std::size_t i = 0; i < a.snapshots[k].P.size(); ++i) {
          CHECK(a.snapshots[k].P[i] <= b.snapshots[k].P[i] + 1e-10);
          CHECK(a.snapshots[k].P[i] >= -1e-12);
        }
        for (std::size_t i = 0; i < a.snapshots[k].V.size(); ++i)
          CHECK(a.snapshots[k].V[i] <= b.snapshots[k].V[i] + 1e-10);
      }
    }
  }
  SUBCASE("mass analogue without reaction") {
    Parameters q = p;
    q.f = Nonlinearity::inert();
    auto s = AsymptoticState::constant(-40, 40, 0.0, 0.0);
    for (int j = -3; j <= 3; ++j) s.P[static_cast<std::size_t>(j + 40)] = 1.0;
    AsymptoticConfig cfg;
    cfg.T = 10.0;
    auto drift = [&](double dt) {
      cfg.dt = dt;
      const auto traj = simulate_asymptotic(s, cfg, q);
      const double m0 = traj.mass.front().second;
      double worst = 0.0;
      for (const auto& [t, m] : traj.mass) worst = std::max(worst, std::abs(m - m0) / m0);
      return worst;
    };
    CHECK(drift(0.05) <= 1e-12);
  }
}

TEST_CASE("asymptotic dispersion relation") {
  const auto p = default_parameters();
  SUBCASE("values at mu = 0") {
    const auto e = asymptotic_dispersion_eval(0.0, 0.7, p);
    CHECK(e.delta_inf == doctest::Approx(17.0));
    CHECK(e.psi == doctest::Approx(-3.0 + std::sqrt(17.0)));
    CHECK(e.psi > 0.0);
    CHECK(std::isnan(e.c_plus));
  }
  SUBCASE("delta is even") {
    for (double mu : {0.1, 0.7, 2.5, 6.0})
      CHECK(asymptotic_dispersion_eval(mu, 0, p).delta_inf == asymptotic_dispersion_eval(-mu, 0, p).delta_inf);
  }
  SUBCASE("c_plus is the positive root of the quadratic") {
    auto rng = gen::rng(3);
    for (int k = 0; k < 20; ++k) {
      Parameters q = p;
      q.alpha = gen::uniform(rng, 0.3, 3);
      q.beta = gen::uniform(rng, 0.3, 3);
      q.f = Nonlinearity::logistic(gen::uniform(rng, 0.3, 3));
      const double mu = gen::uniform(rng, 0.05, 5);
      const double z = mu * asymptotic_dispersion_eval(mu, 0, q).c_plus;
      const double f0 = q.f.fprime0();
      const double quad = z * z + (2 * q.beta - f0 + 2 * q.alpha) * z + 2 * q.alpha * (2 * q.beta - f0) -
                          2 * q.alpha * q.beta * (1 + std::cosh(mu));
      const double scale = z * z + std::abs(2 * q.beta - f0 + 2 * q.alpha) * std::abs(z) +
                           2 * q.alpha * q.beta * (1 + std::cosh(mu)) + std::abs(2 * q.alpha * (2 * q.beta - f0));
      CHECK(std::abs(quad) <= 1e-10 * scale);
      CHECK(z > 0.0);
    }
  }
}

TEST_CASE("limit speed") {
  const auto p = default_parameters();
  const auto sp = compute_c_star_inf(p);
  CHECK(sp.psi_residual <= 1e-10);
  CHECK(sp.dpsi_residual <= 1e-8);
  CHECK(sp.c_star_inf > compute_c_star(p).c_star);

  SUBCASE("dense grid oracle") {
    double best = 1e300;
    for (int k = 0; k <= 200000; ++k) {
      const double mu = sp.mu_star * (0.9 + 0.2 * k / 200000.0);
      best = std::min(best, asymptotic_dispersion_eval(mu, 0, p).c_plus);
    }
    CHECK(std::abs(best - sp.c_star_inf) <= 1e-10 * sp.c_star_inf);
  }
  SUBCASE("c_plus blows up at both ends") {
    CHECK(asymptotic_dispersion_eval(kAsymptoticMuLow, 0, p).c_plus > 10 * sp.c_star_inf);
    CHECK(asymptotic_dispersion_eval(kAsymptoticMuHigh, 0, p).c_plus > 10 * sp.c_star_inf);
  }
  SUBCASE("two roots above the minimal speed, none below") {
    const int n = 4000;
    auto psi_on_grid = [&](double c) {
      std::vector<double> v;
      for (int k = 0; k < n; ++k) {
        const double mu = kAsymptoticMuLow * std::pow(kAsymptoticMuHigh / kAsymptoticMuLow, k / (n - 1.0));
        v.push_back(asymptotic_dispersion_eval(mu, c, p).psi);
      }
      return v;
    };
    for (double v : psi_on_grid(0.95 * sp.c_star_inf)) CHECK(v > 0.0);
    const auto above = psi_on_grid(1.1 * sp.c_star_inf);
    int changes = 0;
    for (std::size_t k = 1; k < above.size(); ++k)
      if ((above[k - 1] < 0) != (above[k] < 0)) ++changes;
    CHECK(changes == 2);
  }
  SUBCASE("large diffusivity approaches the limit") {
    Parameters q = p;
    q.d = 1e4;
    const double c = compute_c_star(q).c_star;
    CHECK(c < sp.c_star_inf);
    CHECK(std::abs(c - sp.c_star_inf) / sp.c_star_inf <= 0.02);
  }
}

TEST_CASE("lattice to limit data") {
  auto s = LatticeState::constant(0, 3, 8, 0.5, 2.0);
  const auto a = asymptotic_from_lattice(s);
  CHECK(a.P == s.rho);
  for (double v : a.V) CHECK(v == doctest::Approx(2.0));
}

TEST_CASE("large diffusivity convergence") {
  const auto p = default_parameters();
  SUBCASE("matched steady states") {
    auto s = LatticeState::constant(-10, 10, 8, 1.0, 1.0);
    ConvergenceExperiment exp;
    exp.sim.T = 1.0;
    exp.sim.m = 8;
    exp.sim.dt = 1e-3;
    exp.t_begin = 0.0;
    exp.central_radius = 5;
    const auto rows = large_d_convergence_experiment({0.1}, InitialData::custom(s), exp, p);
    CHECK(rows.front().error <= 1e-6);
  }
  SUBCASE("error decays with epsilon") {
    ConvergenceExperiment exp;
    exp.sim.T = 2.0;
    exp.sim.m = 16;
    exp.sim.dt = 1e-3;
    exp.sim.c_upper_guess = 1.0;
    exp.central_radius = 5;
    const auto rows = large_d_convergence_experiment({1e-1, 1e-2, 1e-3}, InitialData::left_block(), exp, p);
    REQUIRE(rows.size() == 3);
    CHECK(rows[1].error < rows[0].error);
    CHECK(rows[2].error < rows[1].error);
  }
  SUBCASE("rejects curved roads") {
    ConvergenceExperiment exp;
    exp.sim.T = 1.0;
    exp.sim.m = 16;
    CHECK_THROWS_AS(large_d_convergence_experiment({0.1}, InitialData::sine_bump(3), exp, p), std::invalid_argument);
  }
}

TEST_CASE("spreading in the limit system") {
  const auto p = default_parameters();
  const auto sp = compute_c_star_inf(p);
  auto s = AsymptoticState::constant(-120, 120, 0.0, 0.0);
  for (int j = -2; j <= 2; ++j) s.P[static_cast<std::size_t>(j + 120)] = 1.0;
  AsymptoticConfig cfg;
  cfg.T = 80.0;
  cfg.dt = 0.02;
  const auto traj = simulate_asymptotic(s, cfg, p);
  CHECK_FALSE(traj.window_contaminated);
  const auto& fin = traj.final_state();
  CHECK(far_field_sup(fin, 1.2 * sp.c_star_inf * fin.time) < 1e-3);
  CHECK(near_field_gap(fin, 0.8 * sp.c_star_inf * fin.time, p) < 0.05);
}
