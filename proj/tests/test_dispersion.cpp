#include <doctest.h>

#include <boost/multiprecision/cpp_dec_float.hpp>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "cityroad/dispersion.hpp"
#include "cityroad/lattice_sim.hpp"
#include "generators.hpp"

using namespace cityroad;
using Big = boost::multiprecision::cpp_dec_float_50;

namespace {

Parameters with_fprime0(double r) {
  Parameters p = default_parameters();
  p.f = Nonlinearity::logistic(r);
  return p;
}

// Closed form of y evaluated in 50-digit arithmetic.
Big y_50(const Big& lambda, const Parameters& p) {
  const Big alpha = p.alpha, beta = p.beta, d = p.d, f0 = p.f.fprime0();
  const Big s = sqrt(lambda / d);
  const Big q = sqrt(d * lambda);
  const Big coth = cosh(s) / sinh(s);
  const Big delta = alpha * alpha + d * lambda + 2 * alpha * q * coth;
  return (delta / (2 * alpha * beta) * (lambda + 2 * beta - f0) - (alpha + q * coth)) * sinh(s) / q;
}

// Robin rows for V = A cosh(s x) + B sinh(s x) solved as a 2x2 system.
std::pair<double, double> profile_by_solve(double lambda, double mu, const Parameters& p) {
  const double s = std::sqrt(lambda / p.d);
  const double ch = std::cosh(s), sh = std::sinh(s);
  // [alpha, -d s; d s sh + alpha ch, d s ch + alpha sh] (A, B) = (beta, beta e^-mu)
  const double a11 = p.alpha, a12 = -p.d * s;
  const double a21 = p.d * s * sh + p.alpha * ch, a22 = p.d * s * ch + p.alpha * sh;
  const double b1 = p.beta, b2 = p.beta * std::exp(-mu);
  const double det = a11 * a22 - a12 * a21;
  const double A = (b1 * a22 - a12 * b2) / det;
  const double B = (a11 * b2 - a21 * b1) / det;
  return {A, A * ch + B * sh};
}

}  // namespace

TEST_CASE("dispersion evaluation") {
  const auto p = default_parameters();
  SUBCASE("small lambda limit") {
    CHECK(dispersion_eval(1e-12, p).y == doctest::Approx(-0.5).epsilon(1e-6));
    CHECK_FALSE(dispersion_eval(1e-12, p).mu.has_value());
  }
  SUBCASE("delta at zero") { CHECK(dispersion_delta(0.0, p) == doctest::Approx(3.0)); }
  SUBCASE("50-digit oracle") {
    for (double lambda : {1.0, 0.3, 2.5, 7.0}) {
      const double y = dispersion_eval(lambda, p).y;
      const double ref = static_cast<double>(y_50(Big(lambda), p));
      CHECK(std::abs(y - ref) <= 1e-12 * std::abs(ref));
    }
    Parameters q = p;
    q.alpha = 0.7;
    q.beta = 1.9;
    q.d = 3.0;
    const double ref = static_cast<double>(y_50(Big(1), q));
    CHECK(std::abs(dispersion_eval(1.0, q).y - ref) <= 1e-12 * std::abs(ref));
  }
  SUBCASE("Taylor and direct branches agree at the switch") {
    for (double d : {0.5, 1.0, 10.0}) {
      Parameters q = p;
      q.d = d;
      const double lambda = d * kTaylorSwitch * kTaylorSwitch;
      const double yt = dispersion_eval(lambda, q, DispersionBranch::taylor).y;
      const double yd = dispersion_eval(lambda, q, DispersionBranch::direct).y;
      CHECK(std::abs(yt - yd) <= 1e-10 * std::abs(yd));
    }
  }
  SUBCASE("mu from arccosh") {
    const auto pt = dispersion_eval(3.0, p);
    REQUIRE(pt.mu.has_value());
    CHECK(std::cosh(*pt.mu) == doctest::Approx(pt.y).epsilon(1e-12));
    CHECK(*pt.c == doctest::Approx(3.0 / *pt.mu));
  }
}

TEST_CASE("lambda0") {
  const auto p = default_parameters();
  const double l0 = find_lambda0(p);
  CHECK(std::abs(dispersion_eval(l0, p).y - 1.0) <= 1e-10);
  CHECK(crossing_g(0.0, p) < crossing_G(0.0, p));
  CHECK(crossing_G(0.0, p) == doctest::Approx(2.0 * p.beta));

  SUBCASE("dense sign scan oracle") {
    const int n = 100000;
    const double hi = 4.0;
    double crossing = -1.0;
    int changes = 0;
    double prev = crossing_g(hi / n, p) - crossing_G(hi / n, p);
    for (int k = 2; k <= n; ++k) {
      const double lam = hi * k / n;
      const double cur = crossing_g(lam, p) - crossing_G(lam, p);
      if ((prev < 0.0) != (cur < 0.0)) {
        ++changes;
        crossing = lam;
      }
      prev = cur;
    }
    CHECK(changes == 1);
    CHECK(std::abs(crossing - l0) <= hi / n);
  }
  SUBCASE("y below one before lambda0") {
    for (int k = 1; k <= 100; ++k) CHECK(dispersion_eval(l0 * k / 101.0, p).y < 1.0);
  }
  SUBCASE("lambda0 shrinks with f'(0)") {
    double prev = l0;
    for (double r : {1e-2, 1e-3, 1e-4}) {
      const double l = find_lambda0(with_fprime0(r));
      CHECK(l < prev);
      CHECK(std::abs(dispersion_eval(l, with_fprime0(r)).y - 1.0) <= 1e-10);
      prev = l;
    }
    CHECK(prev < 1e-3);
  }
  SUBCASE("requires growth") {
    Parameters q = p;
    q.f = Nonlinearity::inert();
    CHECK_THROWS(find_lambda0(q));
  }
}

TEST_CASE("minimal speed") {
  const auto p = default_parameters();
  const auto res = compute_c_star(p);
  CHECK(res.lambda0 < res.lambda_star);
  CHECK(res.scan.size() >= static_cast<std::size_t>(kScanPoints));
  CHECK(*res.scan.front().c > res.c_star);
  CHECK(*res.scan.back().c > res.c_star);
  CHECK(res.local_minima.size() == 1);
  CHECK(res.c_star == doctest::Approx(res.lambda_star / res.mu_star));

  SUBCASE("dense grid oracle") {
    // c is flat at the minimum, so a fine grid pins c* far tighter than lambda*
    double best = 1e300;
    const double lo = res.lambda_star * 0.9, hi = res.lambda_star * 1.1;
    for (int k = 0; k <= 200000; ++k) {
      const auto pt = dispersion_eval(lo + (hi - lo) * k / 200000.0, p);
      best = std::min(best, *pt.c);
    }
    CHECK(std::abs(best - res.c_star) <= 1e-8 * res.c_star);
  }
  SUBCASE("y above one past lambda0 on the scan") {
    for (const auto& pt : res.scan) CHECK(pt.y > 1.0);
  }
  SUBCASE("single sign change of g - G on the scan range") {
    int changes = 0;
    double prev = crossing_g(res.lambda0 * 1e-3, p) - crossing_G(res.lambda0 * 1e-3, p);
    for (const auto& pt : res.scan) {
      const double cur = crossing_g(pt.lambda, p) - crossing_G(pt.lambda, p);
      if ((prev < 0.0) != (cur < 0.0)) ++changes;
      prev = cur;
    }
    CHECK(changes == 1);
  }
  SUBCASE("ansatz residuals") {
    CHECK(exponential_ansatz_residual(res.lambda_star, res.mu_star, p) <= 1e-8);
    auto rng = gen::rng(77);
    for (int k = 0; k < 5; ++k) {
      const double lam = res.lambda0 * (1.0 + gen::uniform(rng, 0.01, 20.0));
      const auto pt = dispersion_eval(lam, p);
      REQUIRE(pt.mu.has_value());
      CHECK(exponential_ansatz_residual(lam, *pt.mu, p) <= 1e-8);
    }
  }
  SUBCASE("power law in f'(0)") {
    std::vector<double> logs_r, logs_c;
    for (double r : {0.25, 0.5, 1.0, 2.0, 4.0}) {
      logs_r.push_back(std::log(r));
      logs_c.push_back(std::log(compute_c_star(with_fprime0(r)).c_star));
    }
    double mx = 0, my = 0;
    for (std::size_t k = 0; k < 5; ++k) {
      mx += logs_r[k] / 5;
      my += logs_c[k] / 5;
    }
    double sxy = 0, sxx = 0;
    for (std::size_t k = 0; k < 5; ++k) {
      sxy += (logs_r[k] - mx) * (logs_c[k] - my);
      sxx += (logs_r[k] - mx) * (logs_r[k] - mx);
    }
    CHECK(sxy / sxx >= 0.48);
    CHECK(sxy / sxx <= 0.58);
  }
  SUBCASE("speed grows with diffusivity") {
    double prev = 0.0;
    for (double d : {1.0, 10.0, 100.0, 1e4}) {
      Parameters q = p;
      q.d = d;
      const double c = compute_c_star(q).c_star;
      CHECK(c > prev);
      prev = c;
    }
  }
}

TEST_CASE("exponential profile") {
  const auto p = default_parameters();
  const auto res = compute_c_star(p);
  const auto [v0, v1] = profile_by_solve(res.lambda_star, res.mu_star, p);
  CHECK(std::abs(profile_v_star(0.0, res, p) - v0) <= 1e-12 * v0);
  CHECK(std::abs(profile_v_star(1.0, res, p) - v1) <= 1e-12 * v0);
  for (int i = 0; i <= 100; ++i) CHECK(profile_v_star(i / 100.0, res, p) > 0.0);
  CHECK(res.mu_star > 0.0);

  Parameters q = p;
  q.d = 5.0;
  q.alpha = 0.5;
  const auto rq = compute_c_star(q);
  const auto [w0, w1] = profile_by_solve(rq.lambda_star, rq.mu_star, q);
  CHECK(std::abs(profile_v_star(0.0, rq, q) - w0) <= 1e-12 * w0);
  CHECK(std::abs(profile_v_star(1.0, rq, q) - w1) <= 1e-12 * w0);
}

TEST_CASE("exponential supersolution dominates a seeded run") {
  const auto p = default_parameters();
  const auto res = compute_c_star(p);
  SimulationConfig cfg;
  cfg.T = 10.0;
  cfg.m = 16;
  cfg.dt = 2e-3;
  cfg.c_upper_guess = 1.0;
  cfg.snapshot_stride = 100;
  auto seed = LatticeState::constant(-3, 3, cfg.m, 0.0, 0.0);
  for (int j = -3; j <= 3; ++j) seed.rho[static_cast<std::size_t>(j + 3)] = 0.5 * std::exp(-0.25 * j * j);
  const auto traj = simulate(InitialData::custom(seed), cfg, p);
  const auto sup = fit_supersolution(traj.snapshots.front(), res, p);
  CHECK(sup.theta > 0.0);
  for (const auto& s : traj.snapshots) {
    double worst = 0.0;
    for (int j = s.j_min; j <= s.j_max; ++j) {
      worst = std::max(worst, s.rho_at(j) - sup.city(j, s.time));
      if (j < s.j_max)
        for (int i = 0; i <= cfg.m; ++i)
          worst = std::max(worst, s.edge_at(j)[static_cast<std::size_t>(i)] - sup.road(j, s.edge_at(j).x(i), s.time));
    }
    CHECK(worst <= 1e-6);
  }
}
