#include <doctest.h>

#include <cmath>
#include <limits>
#include <stdexcept>
#include <numbers>
#include <vector>

#include "cityroad/edge_solver.hpp"
#include "generators.hpp"

using namespace cityroad;

namespace {

constexpr double kUlp = std::numeric_limits<double>::epsilon();

double max_abs_diff(std::span<const double> a, std::span<const double> b) {
  double e = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) e = std::max(e, std::abs(a[i] - b[i]));
  return e;
}

}  // namespace

TEST_CASE("thomas solve matches dense multiply") {
  auto rng = gen::rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 5 + static_cast<std::size_t>(trial);
    TridiagonalOperator op{gen::uniform_vector(rng, n, -1, 1), gen::uniform_vector(rng, n, 3, 4),
                           gen::uniform_vector(rng, n, -1, 1)};
    const auto x = gen::uniform_vector(rng, n, -2, 2);
    auto b = op.apply(x);
    solve_tridiagonal(op, b);
    CHECK(max_abs_diff(b, x) < 1e-13);
  }
}

TEST_CASE("assembly") {
  const auto p = default_parameters();
  const auto op = assemble_step_operator(32, 1e-3, p);
  CHECK(op.implicit_part.size() == 33);
  CHECK(op.implicit_part.strictly_diagonally_dominant());
  CHECK(op.load_weight == doctest::Approx(64.0));
  // Robin row: diagonal of L is -2d/dx^2 - 2 alpha/dx, neighbour 2d/dx^2
  const double dx = 1.0 / 32;
  CHECK(op.implicit_part.diagonal[0] == doctest::Approx(1.0 + 0.5e-3 * (2.0 / (dx * dx) + 2.0 / dx)));
  CHECK(op.implicit_part.upper[0] == doctest::Approx(-0.5e-3 * 2.0 / (dx * dx)));
  CHECK(op.implicit_part.lower[32] == doctest::Approx(-0.5e-3 * 2.0 / (dx * dx)));

  CHECK_THROWS_AS(assemble_step_operator(1, 1e-3, p), std::invalid_argument);
  CHECK_THROWS_AS(assemble_step_operator(8, 0.0, p), std::invalid_argument);
  Parameters bad = p;
  bad.d = 0.0;
  CHECK_THROWS_AS(assemble_step_operator(8, 1e-3, bad), std::invalid_argument);
}

TEST_CASE("robin-consistent constant is a fixed point") {
  Parameters p = default_parameters();
  p.alpha = 2.0;
  p.beta = 3.0;
  const auto op = assemble_step_operator(32, 1e-3, p);
  const double c = p.beta / p.alpha;
  EdgeGrid e(32, c);
  for (int k = 0; k < 100; ++k) e = step_edge(op, e, {p.beta, p.beta, p.beta, p.beta});
  for (double v : e.values()) CHECK(std::abs(v - c) <= 8 * kUlp * c * 100);
  EdgeGrid one = step_edge(op, EdgeGrid(32, c), {p.beta, p.beta, p.beta, p.beta});
  for (double v : one.values()) CHECK(std::abs(v - c) <= 8 * kUlp * c);
}

TEST_CASE("zero stays zero") {
  const auto op = assemble_step_operator(16, 1e-2, default_parameters());
  const auto e = step_edge(op, EdgeGrid(16, 0.0), {});
  for (double v : e.values()) CHECK(v == 0.0);
}

TEST_CASE("vanishing step is consistent") {
  auto rng = gen::rng(8);
  const auto p = default_parameters();
  const auto e = gen::smooth_edge(rng, 32, 1.0);
  const auto op = assemble_step_operator(32, 1e-8, p);
  const RobinLoads loads{0.3, 0.3, 0.2, 0.2};
  const auto out = step_edge(op, e, loads);
  CHECK(max_abs_diff(out.values(), e.values()) < 1e-4);
}

TEST_CASE("step rejects NaN") {
  const auto op = assemble_step_operator(8, 1e-3, default_parameters());
  CHECK_THROWS_AS(step_edge(op, EdgeGrid(8, 0.0), {std::nan(""), 0, 0, 0}), std::invalid_argument);
  EdgeGrid e(8, 0.0);
  e[3] = std::nan("");
  CHECK_THROWS_AS(step_edge(op, e, {}), std::invalid_argument);
  CHECK_THROWS_AS(step_edge(op, EdgeGrid(16, 0.0), {}), std::invalid_argument);
}

TEST_CASE("manufactured solution") {
  const auto p = default_parameters();
  SUBCASE("single step") {
    const double err = manufactured_solution_error(32, 1e-3, 1e-3, p);
    CHECK(err < 1e-3);
  }
  SUBCASE("refinement") {
    const double e32 = manufactured_solution_error(32, 1e-3, 0.1, p);
    const double e64 = manufactured_solution_error(64, 2.5e-4, 0.1, p);
    const double e128 = manufactured_solution_error(128, 6.25e-5, 0.1, p);
    CHECK(std::isfinite(e32));
    CHECK(e32 / e64 >= 3.5);
    CHECK(e64 / e128 >= 3.5);
    CHECK(std::log2(e32 / e64) >= 1.8);
  }
  SUBCASE("zero horizon") { CHECK(manufactured_solution_error(32, 1e-3, 0.0, p) == 0.0); }
  SUBCASE("invalid diffusivity") {
    Parameters q = p;
    q.d = 0.0;
    CHECK_THROWS_AS(manufactured_solution_error(32, 1e-3, 0.1, q), std::invalid_argument);
  }
}

TEST_CASE("loads drive a zero road monotonically up to beta/alpha") {
  Parameters p = default_parameters();
  p.beta = 2.0;
  const auto op = assemble_step_operator(32, 1e-3, p);
  EdgeGrid e(32, 0.0);
  double prev_mid = 0.0;
  for (int k = 0; k < 3000; ++k) {
    e = step_edge(op, e, {p.beta, p.beta, p.beta, p.beta});
    for (double v : e.values()) {
      CHECK(v >= -1e-12);
      CHECK(v <= p.beta / p.alpha + 1e-12);
    }
    CHECK(e[16] >= prev_mid - 1e-14);
    prev_mid = e[16];
  }
  CHECK(e[16] == doctest::Approx(2.0).epsilon(1e-2));
}

TEST_CASE("discrete maximum principle and linearity") {
  auto rng = gen::rng(99);
  const auto p = default_parameters();
  // CN is monotone when dt (d/dx^2 + alpha/dx) <= 1
  const auto op = assemble_step_operator(32, 5e-4, p);
  for (int trial = 0; trial < 40; ++trial) {
    const auto e1 = gen::smooth_edge(rng, 32, 2.0);
    const auto e2 = gen::smooth_edge(rng, 32, 2.0);
    const RobinLoads g1{gen::uniform(rng, 0, 1), gen::uniform(rng, 0, 1), gen::uniform(rng, 0, 1),
                        gen::uniform(rng, 0, 1)};
    const RobinLoads g2{gen::uniform(rng, 0, 1), gen::uniform(rng, 0, 1), gen::uniform(rng, 0, 1),
                        gen::uniform(rng, 0, 1)};
    const auto s1 = step_edge(op, e1, g1);
    for (double v : s1.values()) CHECK(v >= -1e-12);

    const double a = gen::uniform(rng, -2, 2), b = gen::uniform(rng, -2, 2);
    std::vector<double> mix(33);
    for (std::size_t i = 0; i < 33; ++i) mix[i] = a * e1[i] + b * e2[i];
    const RobinLoads gm{a * g1.left_start + b * g2.left_start, a * g1.left_end + b * g2.left_end,
                        a * g1.right_start + b * g2.right_start, a * g1.right_end + b * g2.right_end};
    const auto sm = step_edge(op, EdgeGrid(mix), gm);
    const auto s2 = step_edge(op, e2, g2);
    for (std::size_t i = 0; i < 33; ++i) CHECK(sm[i] == doctest::Approx(a * s1[i] + b * s2[i]).epsilon(1e-12).scale(1));
  }
}

TEST_CASE("integral representation oracle") {
  const auto p = default_parameters();
  const double pi = std::numbers::pi;
  const double rate = p.d * pi * pi;

  SUBCASE("manufactured solution interior") {
    auto h0 = [&](double x) { return std::cos(pi * x); };
    auto g = [&](double t) { return p.alpha * std::exp(-rate * t); };
    auto h = [&](double t) { return -p.alpha * std::exp(-rate * t); };
    const double t = 0.05;
    CHECK(std::abs(integral_representation_oracle(h0, g, h, t, 0.5, p)) < 1e-5);
    CHECK(integral_representation_oracle(h0, g, h, t, 0.25, p) ==
          doctest::Approx(std::exp(-rate * t) * std::cos(pi * 0.25)).epsilon(1e-5));
    CHECK(integral_representation_oracle(h0, g, h, t, 0.0, p) == doctest::Approx(std::exp(-rate * t)).epsilon(1e-5));
  }

  SUBCASE("all zero") {
    auto zero = [](double) { return 0.0; };
    CHECK(integral_representation_oracle(zero, zero, zero, 0.1, 0.3, p) == 0.0);
  }

  SUBCASE("agrees with the finite-difference solver on random compatible data") {
    auto rng = gen::rng(12);
    for (int trial = 0; trial < 3; ++trial) {
      const double c0 = gen::uniform(rng, 0.2, 1.0), c1 = gen::uniform(rng, -0.3, 0.3),
                   c2 = gen::uniform(rng, -0.3, 0.3);
      auto h0 = [=](double x) { return c0 + c1 * std::cos(pi * x) + c2 * x * x; };
      auto dh0 = [=](double x) { return -c1 * pi * std::sin(pi * x) + 2 * c2 * x; };
      const double gl = -p.d * dh0(0.0) + p.alpha * h0(0.0);
      const double gr = p.d * dh0(1.0) + p.alpha * h0(1.0);
      const double sl = gen::uniform(rng, -1, 1), sr = gen::uniform(rng, -1, 1);
      auto g = [=](double t) { return gl + sl * t; };
      auto h = [=](double t) { return gr + sr * t; };

      const int m = 128;
      const double dt = 1e-4;
      std::vector<double> v(m + 1);
      for (int i = 0; i <= m; ++i) v[static_cast<std::size_t>(i)] = h0(static_cast<double>(i) / m);
      EdgeGrid e(v);
      const auto op = assemble_step_operator(m, dt, p);
      for (int k = 0; k < 1000; ++k) e = step_edge(op, e, {g(k * dt), g((k + 1) * dt), h(k * dt), h((k + 1) * dt)});

      for (double x : {0.0, 0.25, 0.5, 1.0}) {
        const double oracle = integral_representation_oracle(h0, g, h, 0.1, x, p);
        const double fd = e[static_cast<std::size_t>(std::lround(x * m))];
        CHECK(std::abs(oracle - fd) <= 1e-4);
      }
    }
  }

  SUBCASE("rejects bad arguments") {
    auto zero = [](double) { return 0.0; };
    CHECK_THROWS_AS(integral_representation_oracle(zero, zero, zero, 0.0, 0.3, p), std::invalid_argument);
    CHECK_THROWS_AS(integral_representation_oracle(zero, zero, zero, 0.1, 1.3, p), std::invalid_argument);
  }
}
