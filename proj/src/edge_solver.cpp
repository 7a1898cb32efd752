#include "cityroad/edge_solver.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace cityroad {

std::vector<double> TridiagonalOperator::apply(std::span<const double> x) const {
  const std::size_t n = size();
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    double s = diagonal[i] * x[i];
    if (i > 0) s += lower[i] * x[i - 1];
    if (i + 1 < n) s += upper[i] * x[i + 1];
    y[i] = s;
  }
  return y;
}

bool TridiagonalOperator::strictly_diagonally_dominant() const {
  const std::size_t n = size();
  for (std::size_t i = 0; i < n; ++i) {
    double off = 0.0;
    if (i > 0) off += std::abs(lower[i]);
    if (i + 1 < n) off += std::abs(upper[i]);
    if (!(std::abs(diagonal[i]) > off)) return false;
  }
  return true;
}

void solve_tridiagonal(const TridiagonalOperator& op, std::span<double> rhs) {
  const std::size_t n = op.size();
  if (rhs.size() != n) throw std::invalid_argument("solve_tridiagonal: size mismatch");
  std::vector<double> c(n);
  double denom = op.diagonal[0];
  c[0] = n > 1 ? op.upper[0] / denom : 0.0;
  rhs[0] /= denom;
  for (std::size_t i = 1; i < n; ++i) {
    denom = op.diagonal[i] - op.lower[i] * c[i - 1];
    c[i] = i + 1 < n ? op.upper[i] / denom : 0.0;
    rhs[i] = (rhs[i] - op.lower[i] * rhs[i - 1]) / denom;
  }
  for (std::size_t i = n - 1; i-- > 0;) rhs[i] -= c[i] * rhs[i + 1];
}

EdgeStepOperator assemble_step_operator(int m, double dt, const Parameters& p, double theta) {
  p.validate();
  if (m < 2) throw std::invalid_argument("assemble_step_operator: m must be >= 2");
  if (!(dt > 0.0) || !std::isfinite(dt)) throw std::invalid_argument("assemble_step_operator: dt must be > 0");
  if (!(theta > 0.0 && theta <= 1.0)) throw std::invalid_argument("assemble_step_operator: theta must be in (0,1]");

  const std::size_t n = static_cast<std::size_t>(m) + 1;
  const double dx = 1.0 / m;
  const double k = p.d / (dx * dx);
  const double robin = 2.0 * p.alpha / dx;

  // Discrete Laplacian with ghost-node Robin rows.
  std::vector<double> lo(n, k), di(n, -2.0 * k), up(n, k);
  lo[0] = 0.0;
  up[0] = 2.0 * k;
  di[0] = -2.0 * k - robin;
  lo[n - 1] = 2.0 * k;
  up[n - 1] = 0.0;
  di[n - 1] = -2.0 * k - robin;

  EdgeStepOperator op;
  op.m = m;
  op.dt = dt;
  op.theta = theta;
  op.load_weight = 2.0 / dx;
  auto build = [&](double scale) {
    TridiagonalOperator t;
    t.lower.resize(n);
    t.diagonal.resize(n);
    t.upper.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      t.lower[i] = scale * lo[i];
      t.diagonal[i] = 1.0 + scale * di[i];
      t.upper[i] = scale * up[i];
    }
    return t;
  };
  op.implicit_part = build(-theta * dt);
  op.explicit_part = build((1.0 - theta) * dt);
  if (!op.implicit_part.strictly_diagonally_dominant())
    throw std::runtime_error("assemble_step_operator: implicit operator is not strictly diagonally dominant");
  return op;
}

EdgeGrid step_edge(const EdgeStepOperator& op, const EdgeGrid& edge, const RobinLoads& loads) {
  if (edge.m() != op.m) throw std::invalid_argument("step_edge: edge resolution does not match operator");
  for (double g : {loads.left_start, loads.left_end, loads.right_start, loads.right_end})
    if (!std::isfinite(g)) throw std::invalid_argument("step_edge: non-finite Robin data");
  for (double v : edge.values())
    if (!std::isfinite(v)) throw std::invalid_argument("step_edge: non-finite edge value");

  std::vector<double> rhs = op.explicit_part.apply(edge.values());
  const double w0 = 1.0 - op.theta;
  const double w1 = op.theta;
  rhs.front() += op.dt * op.load_weight * (w0 * loads.left_start + w1 * loads.left_end);
  rhs.back() += op.dt * op.load_weight * (w0 * loads.right_start + w1 * loads.right_end);
  solve_tridiagonal(op.implicit_part, rhs);
  return EdgeGrid(std::move(rhs));
}

EdgeGrid step_edge(const RobinStepInput& in) {
  return step_edge(assemble_step_operator(in.edge.m(), in.dt, in.p), in.edge, in.loads);
}

double manufactured_solution_error(int m, double dt, double T, const Parameters& p) {
  p.validate();
  if (!(T >= 0.0)) throw std::invalid_argument("manufactured_solution_error: T must be >= 0");
  if (T == 0.0) return 0.0;
  const long steps = std::lround(T / dt);
  if (steps <= 0 || std::abs(steps * dt - T) > 1e-9 * T)
    throw std::invalid_argument("manufactured_solution_error: T must be a multiple of dt");

  const double pi = std::numbers::pi;
  const double rate = p.d * pi * pi;
  std::vector<double> v0(static_cast<std::size_t>(m) + 1);
  for (int i = 0; i <= m; ++i) v0[static_cast<std::size_t>(i)] = std::cos(pi * i / m);
  EdgeGrid edge(std::move(v0));
  const auto op = assemble_step_operator(m, dt, p);
  for (long s = 0; s < steps; ++s) {
    const double a = std::exp(-rate * s * dt);
    const double b = std::exp(-rate * (s + 1) * dt);
    edge = step_edge(op, edge, {p.alpha * a, p.alpha * b, -p.alpha * a, -p.alpha * b});
  }
  const double decay = std::exp(-rate * steps * dt);
  double err = 0.0;
  for (int i = 0; i <= m; ++i) err = std::max(err, std::abs(edge[i] - decay * std::cos(pi * i / m)));
  return err;
}

// ---------------------------------------------------------------------------
// Boundary-integral oracle

namespace {

double heat_kernel(double tau, double x, double d) {
  if (tau <= 0.0) return 0.0;
  return std::exp(-x * x / (4.0 * d * tau)) / std::sqrt(4.0 * std::numbers::pi * d * tau);
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

/// Exact integral of K(t, x - y) against the piecewise-linear interpolant of samples.
double initial_term(std::span<const double> samples, double t, double x, double d) {
  const std::size_t n = samples.size() - 1;
  const double h = 1.0 / static_cast<double>(n);
  const double sigma = std::sqrt(2.0 * d * t);
  const double inv_norm = 1.0 / (sigma * std::sqrt(2.0 * std::numbers::pi));
  double sum = 0.0;
  double za = (0.0 - x) / sigma;
  double cdf_a = normal_cdf(za);
  double pdf_a = std::exp(-0.5 * za * za) * inv_norm;
  for (std::size_t i = 0; i < n; ++i) {
    const double ya = static_cast<double>(i) * h;
    const double yb = static_cast<double>(i + 1) * h;
    const double zb = (yb - x) / sigma;
    const double cdf_b = normal_cdf(zb);
    const double pdf_b = std::exp(-0.5 * zb * zb) * inv_norm;
    const double mass = cdf_b - cdf_a;
    const double first = x * mass - sigma * sigma * (pdf_b - pdf_a);
    const double q = (samples[i + 1] - samples[i]) / h;
    const double p0 = samples[i] - q * ya;
    sum += p0 * mass + q * first;
    cdf_a = cdf_b;
    pdf_a = pdf_b;
  }
  return sum;
}

struct GaussRule {
  std::vector<double> nodes;    // on [0,1]
  std::vector<double> weights;  // sum to 1
};

GaussRule gauss_legendre(int n) {
  GaussRule r;
  r.nodes.resize(static_cast<std::size_t>(n));
  r.weights.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p1 = 1.0, p2 = 0.0;
      for (int k = 1; k <= n; ++k) {
        const double p3 = p2;
        p2 = p1;
        p1 = ((2.0 * k - 1.0) * z * p2 - (k - 1.0) * p3) / k;
      }
      dp = n * (z * p1 - p2) / (z * z - 1.0);
      const double dz = p1 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-15) break;
    }
    r.nodes[static_cast<std::size_t>(i)] = 0.5 * (1.0 - z);
    r.weights[static_cast<std::size_t>(i)] = 1.0 / ((1.0 - z * z) * dp * dp);
  }
  return r;
}

struct Setup {
  std::size_t steps;
  double tau;
  std::vector<double> h0_samples;
};

Setup prepare(const std::function<double(double)>& h0, std::span<const double> g, std::span<const double> h,
              double t, const Parameters& p, const OracleOptions& opt) {
  p.validate();
  if (!(t > 0.0)) throw std::invalid_argument("integral_representation_oracle: t must be > 0");
  if (g.size() < 2 || g.size() != h.size())
    throw std::invalid_argument("integral_representation_oracle: boundary samples must share a grid of >= 2 points");
  if (opt.initial_samples < 2) throw std::invalid_argument("integral_representation_oracle: initial_samples must be >= 2");
  Setup s;
  s.steps = g.size() - 1;
  s.tau = t / static_cast<double>(s.steps);
  s.h0_samples.resize(static_cast<std::size_t>(opt.initial_samples) + 1);
  for (int i = 0; i <= opt.initial_samples; ++i)
    s.h0_samples[static_cast<std::size_t>(i)] = h0(static_cast<double>(i) / opt.initial_samples);
  return s;
}

}  // namespace

BoundaryTraces solve_boundary_traces(const std::function<double(double)>& h0, std::span<const double> g,
                                     std::span<const double> h, double t, const Parameters& p,
                                     const OracleOptions& opt) {
  const Setup s = prepare(h0, g, h, t, p, opt);
  const std::size_t n = s.steps;
  const double tau = s.tau;
  const double d = p.d;
  const double alpha = p.alpha;

  // Product-integration weights for the weakly singular kernel K(t-s, 0)
  // against hat functions; they depend only on the lag.
  const double c0 = 1.0 / std::sqrt(4.0 * std::numbers::pi * d);
  std::vector<double> w_late(n), w_early(n);
  for (std::size_t lag = 0; lag < n; ++lag) {
    const double ra = std::sqrt((static_cast<double>(lag) + 1.0) * tau);
    const double rb = std::sqrt(static_cast<double>(lag) * tau);
    const double diff = tau / (ra + rb);
    const double m0 = 2.0 * diff;
    const double m1 = (2.0 / 3.0) * diff * diff * (2.0 * ra + rb);
    w_late[lag] = c0 * m1 / tau;
    w_early[lag] = c0 * (m0 - m1 / tau);
  }
  // Smooth kernels on the far boundary, trapezoid weights folded in later.
  std::vector<double> far_single(n + 1), far_double(n + 1);
  for (std::size_t lag = 0; lag <= n; ++lag) {
    const double dt = static_cast<double>(lag) * tau;
    const double k1 = heat_kernel(dt, 1.0, d);
    far_single[lag] = k1;
    far_double[lag] = dt > 0.0 ? -alpha * k1 + k1 / (2.0 * dt) : 0.0;
  }

  BoundaryTraces tr;
  tr.times.resize(n + 1);
  tr.left.resize(n + 1);
  tr.right.resize(n + 1);
  tr.left[0] = h0(0.0);
  tr.right[0] = h0(1.0);
  tr.times[0] = 0.0;
  const double diagonal = 0.5 + alpha * w_late[0];
  if (diagonal < opt.min_diagonal)
    throw std::runtime_error("integral_representation_oracle: ill-conditioned collocation diagonal");

  for (std::size_t k = 1; k <= n; ++k) {
    const double tk = static_cast<double>(k) * tau;
    tr.times[k] = tk;
    auto singular = [&](auto&& phi) {
      double acc = 0.0;
      for (std::size_t i = 1; i <= k; ++i) acc += w_late[k - i] * phi(i) + w_early[k - i] * phi(i - 1);
      return acc;
    };
    auto trapezoid = [&](const std::vector<double>& kernel, auto&& phi) {
      double acc = 0.5 * kernel[k] * phi(0);
      for (std::size_t i = 1; i < k; ++i) acc += kernel[k - i] * phi(i);
      return acc * tau;  // kernel[0] == 0 so the endpoint at s = t_k drops out
    };
    auto at = [](std::span<const double> v) { return [v](std::size_t i) { return v[i]; }; };
    auto known_left = [&](std::size_t i) { return i < k ? tr.left[i] : 0.0; };
    auto known_right = [&](std::size_t i) { return i < k ? tr.right[i] : 0.0; };

    const double rhs_left = initial_term(s.h0_samples, tk, 0.0, d) + singular(at(g)) +
                            trapezoid(far_single, at(h)) - alpha * singular(known_left) +
                            trapezoid(far_double, at(tr.right));
    const double rhs_right = initial_term(s.h0_samples, tk, 1.0, d) + singular(at(h)) +
                             trapezoid(far_single, at(g)) - alpha * singular(known_right) +
                             trapezoid(far_double, at(tr.left));
    tr.left[k] = rhs_left / diagonal;
    tr.right[k] = rhs_right / diagonal;
  }
  return tr;
}

double integral_representation_oracle(const std::function<double(double)>& h0, std::span<const double> g,
                                      std::span<const double> h, double t, double x, const Parameters& p,
                                      const OracleOptions& opt) {
  if (!(x >= 0.0 && x <= 1.0)) throw std::invalid_argument("integral_representation_oracle: x must lie in [0,1]");
  const BoundaryTraces tr = solve_boundary_traces(h0, g, h, t, p, opt);
  if (x == 0.0) return tr.left.back();
  if (x == 1.0) return tr.right.back();

  const Setup s = prepare(h0, g, h, t, p, opt);
  const double d = p.d;
  const double alpha = p.alpha;
  const GaussRule rule = gauss_legendre(opt.gauss_points);
  double acc = initial_term(s.h0_samples, t, x, d);
  for (std::size_t i = 1; i <= s.steps; ++i) {
    const double a = static_cast<double>(i - 1) * s.tau;
    for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
      const double w = rule.weights[q] * s.tau;
      const double theta = rule.nodes[q];
      const double sq = a + theta * s.tau;
      const double lag = t - sq;
      auto lerp = [&](std::span<const double> v) { return (1.0 - theta) * v[i - 1] + theta * v[i]; };
      const double k_near = heat_kernel(lag, x, d);
      const double k_far = heat_kernel(lag, x - 1.0, d);
      const double dk_near = -x / (2.0 * lag) * k_near;           // d * dK/dx at x
      const double dk_far = -(x - 1.0) / (2.0 * lag) * k_far;     // d * dK/dx at x - 1
      acc += w * (k_far * lerp(h) + k_near * lerp(g));
      acc += w * (-alpha * k_far + dk_far) * lerp(tr.right);
      acc -= w * (alpha * k_near + dk_near) * lerp(tr.left);
    }
  }
  return acc;
}

double integral_representation_oracle(const std::function<double(double)>& h0,
                                      const std::function<double(double)>& g,
                                      const std::function<double(double)>& h, double t, double x,
                                      const Parameters& p, int time_nodes, const OracleOptions& opt) {
  if (time_nodes < 1) throw std::invalid_argument("integral_representation_oracle: time_nodes must be >= 1");
  std::vector<double> gs(static_cast<std::size_t>(time_nodes) + 1), hs(gs.size());
  for (int k = 0; k <= time_nodes; ++k) {
    const double tk = t * k / time_nodes;
    gs[static_cast<std::size_t>(k)] = g(tk);
    hs[static_cast<std::size_t>(k)] = h(tk);
  }
  return integral_representation_oracle(h0, gs, hs, t, x, p, opt);
}

}  // namespace cityroad
