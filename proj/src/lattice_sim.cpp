#include "cityroad/lattice_sim.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace cityroad {

InitialData InitialData::left_block(int block_length) {
  if (block_length < 1) throw std::invalid_argument("left_block: block_length must be >= 1");
  InitialData d;
  d.kind = Kind::left_block;
  d.block_length = block_length;
  return d;
}

InitialData InitialData::sine_bump(int n, double scale) {
  if (n < 1) throw std::invalid_argument("sine_bump: N must be >= 1");
  if (!(scale > 0.0) || !std::isfinite(scale)) throw std::invalid_argument("sine_bump: scale must be > 0");
  InitialData d;
  d.kind = Kind::sine_bump;
  d.bump_cities = n;
  d.scale = scale;
  return d;
}

InitialData InitialData::point_mass(int index, double amplitude) {
  if (!(amplitude > 0.0) || !std::isfinite(amplitude))
    throw std::invalid_argument("point_mass: amplitude must be finite and > 0 (trivial or negative data)");
  InitialData d;
  d.kind = Kind::point_mass;
  d.point_index = index;
  d.amplitude = amplitude;
  return d;
}

InitialData InitialData::custom(LatticeState s) {
  s.validate();
  InitialData d;
  d.kind = Kind::custom;
  d.state = std::move(s);
  return d;
}

std::pair<int, int> InitialData::support() const {
  switch (kind) {
    case Kind::left_block:
      return {-block_length + 1, 0};
    case Kind::sine_bump:
      return {0, bump_cities + 1};
    case Kind::point_mass:
      return {point_index, point_index};
    case Kind::custom:
      return {state->j_min, state->j_max};
  }
  return {0, 0};
}

void SimulationConfig::validate() const {
  auto fail = [](const std::string& what) { throw std::invalid_argument("simulation config: " + what); };
  if (!(T > 0.0) || !std::isfinite(T)) fail("T must be > 0");
  if (!(dt > 0.0) || !std::isfinite(dt)) fail("dt must be > 0");
  if (m < 2) fail("m must be >= 2");
  if (window_margin < 4) fail("window_margin must be >= 4");
  if (snapshot_stride < 0) fail("snapshot_stride must be >= 0");
  if (!(c_upper_guess >= 0.0) || !std::isfinite(c_upper_guess)) fail("c_upper_guess must be >= 0");
  if (smoothing_steps < 0) fail("smoothing_steps must be >= 0");
}

long SimulationConfig::step_count() const { return std::max(1L, std::lround(T / dt)); }

int SimulationConfig::effective_stride() const {
  if (snapshot_stride > 0) return snapshot_stride;
  return static_cast<int>(std::max(1L, step_count() / 200));
}

double max_exchange_dt(const Parameters& p) {
  return 0.1 / std::max({p.f.fprime0(), 2.0 * p.beta, 2.0 * p.alpha});
}

InitResult init_state(const InitialData& data, const SimulationConfig& cfg, const Parameters& p) {
  cfg.validate();
  p.validate();
  const auto [lo, hi] = data.support();
  const int ext = static_cast<int>(std::ceil(cfg.c_upper_guess * cfg.T)) + cfg.window_margin;
  LatticeState s = LatticeState::constant(lo - ext, hi + ext, cfg.m, 0.0, 0.0);

  switch (data.kind) {
    case InitialData::Kind::left_block:
      for (int j = lo; j <= hi; ++j) s.rho[static_cast<std::size_t>(j - s.j_min)] = 1.0;
      break;
    case InitialData::Kind::point_mass:
      s.rho[static_cast<std::size_t>(data.point_index - s.j_min)] = data.amplitude;
      break;
    case InitialData::Kind::sine_bump: {
      const int n = data.bump_cities;
      for (int j = 1; j <= n; ++j)
        s.rho[static_cast<std::size_t>(j - s.j_min)] = data.scale * std::sin(j * std::numbers::pi / (n + 1));
      const auto profiles = stationary_from_rho(s.rho, rescale_to_unit_length(p).params);
      for (std::size_t k = 0; k < s.edges.size(); ++k) {
        auto v = s.edges[k].values();
        for (int i = 0; i <= cfg.m; ++i) v[static_cast<std::size_t>(i)] = profiles[k](static_cast<double>(i) / cfg.m);
      }
      break;
    }
    case InitialData::Kind::custom: {
      const LatticeState& c = *data.state;
      if (c.resolution() != cfg.m) throw std::invalid_argument("init_state: custom data resolution differs from m");
      for (int j = c.j_min; j <= c.j_max; ++j) s.rho[static_cast<std::size_t>(j - s.j_min)] = c.rho_at(j);
      for (int j = c.j_min; j < c.j_max; ++j) s.edges[static_cast<std::size_t>(j - s.j_min)] = c.edge_at(j);
      break;
    }
  }

  double peak = 0.0;
  for (double r : s.rho) {
    if (r < 0.0) throw std::invalid_argument("init_state: negative city density");
    peak = std::max(peak, r);
  }
  for (const auto& e : s.edges)
    for (double v : e.values()) {
      if (v < 0.0) throw std::invalid_argument("init_state: negative road density");
      peak = std::max(peak, v);
    }
  if (!(peak > 0.0)) throw std::invalid_argument("init_state: initial data is identically zero");
  s.validate();
  return {s, check_compatibility(s, p)};
}

LatticeStepper::LatticeStepper(int m, double dt, const Parameters& p)
    : p_(p),
      dt_(dt),
      crank_nicolson_(assemble_step_operator(m, dt, p, 0.5)),
      half_implicit_(assemble_step_operator(m, 0.5 * dt, p, 1.0)) {}

LatticeState LatticeStepper::step(const LatticeState& s, double theta) const {
  if (theta == 0.5) return advance(s, crank_nicolson_, dt_);
  return advance(s, assemble_step_operator(s.resolution(), dt_, p_, theta), dt_);
}

LatticeState LatticeStepper::smoothing_step(const LatticeState& s) const {
  return advance(advance(s, half_implicit_, 0.5 * dt_), half_implicit_, 0.5 * dt_);
}

LatticeState LatticeStepper::advance(const LatticeState& s, const EdgeStepOperator& op, double dt) const {
  const std::size_t n = s.rho.size();
  const double alpha = p_.alpha;
  const double beta = p_.beta;
  const double theta = op.theta;

  auto inflow = [&](const std::vector<EdgeGrid>& edges, std::size_t k) {
    double in = 0.0;
    if (k + 1 < n) in += edges[k].left();
    if (k > 0) in += edges[k - 1].right();
    return alpha * in;
  };

  std::vector<double> rhs_old(n), predicted(n);
  for (std::size_t k = 0; k < n; ++k) {
    rhs_old[k] = p_.f(s.rho[k]) + inflow(s.edges, k) - 2.0 * beta * s.rho[k];
    predicted[k] = s.rho[k] + dt * rhs_old[k];
  }

  LatticeState out;
  out.j_min = s.j_min;
  out.j_max = s.j_max;
  out.time = s.time + dt;
  out.edges.reserve(s.edges.size());
  for (std::size_t k = 0; k + 1 < n; ++k) {
    const RobinLoads loads{beta * s.rho[k], beta * predicted[k], beta * s.rho[k + 1], beta * predicted[k + 1]};
    out.edges.push_back(step_edge(op, s.edges[k], loads));
  }
  out.rho.resize(n);
  double ceiling = ceiling_;
  if (ceiling <= 0.0) {
    double peak = std::max(beta / alpha, 1.0);
    for (double r : s.rho) peak = std::max(peak, std::abs(r));
    for (const auto& e : s.edges)
      for (double v : e.values()) peak = std::max(peak, std::abs(v));
    ceiling = 10.0 * peak;
  }
  for (std::size_t k = 0; k < n; ++k) {
    const double rhs_new = p_.f(predicted[k]) + inflow(out.edges, k) - 2.0 * beta * predicted[k];
    out.rho[k] = s.rho[k] + dt * ((1.0 - theta) * rhs_old[k] + theta * rhs_new);
    if (!(std::abs(out.rho[k]) <= ceiling)) {
      std::ostringstream os;
      os << "blow-up at city " << (s.j_min + static_cast<int>(k)) << ", t=" << out.time << ": rho=" << out.rho[k];
      throw BlowUpError(os.str());
    }
  }
  for (std::size_t k = 0; k < out.edges.size(); ++k)
    for (double v : out.edges[k].values())
      if (!(std::abs(v) <= ceiling)) {
        std::ostringstream os;
        os << "blow-up on road " << (s.j_min + static_cast<int>(k)) << ", t=" << out.time;
        throw BlowUpError(os.str());
      }
  return out;
}

LatticeState step_system(const LatticeState& s, double dt, const Parameters& p) {
  s.validate();
  return LatticeStepper(s.resolution(), dt, p).step(s);
}

APrioriBounds a_priori_bounds(const LatticeState& initial, const Parameters& p) {
  APrioriBounds b{1.0, p.beta / p.alpha};
  for (double r : initial.rho) b.rho_max = std::max(b.rho_max, r);
  for (const auto& e : initial.edges)
    for (double v : e.values()) b.v_max = std::max(b.v_max, v);
  return b;
}

namespace {

double bound_violation(const LatticeState& s, const APrioriBounds& b) {
  double worst = 0.0;
  for (double r : s.rho) worst = std::max({worst, -r, r - b.rho_max});
  for (const auto& e : s.edges)
    for (double v : e.values()) worst = std::max({worst, -v, v - b.v_max});
  return worst;
}

bool contaminated(const LatticeState& s) {
  double peak = 0.0;
  for (double r : s.rho) peak = std::max(peak, std::abs(r));
  const double edge = std::max(std::abs(s.rho.front()), std::abs(s.rho.back()));
  return peak > 0.0 && edge > 1e-8 * peak;
}

}  // namespace

Trajectory simulate_from(const LatticeState& initial, const SimulationConfig& cfg, const Parameters& p) {
  cfg.validate();
  p.validate();
  initial.validate();
  if (initial.resolution() != cfg.m) throw std::invalid_argument("simulate: state resolution differs from m");
  if (cfg.dt > max_exchange_dt(p) * (1.0 + 1e-12))
    throw std::invalid_argument("simulate: dt exceeds 0.1 / max(f'(0), 2 beta, 2 alpha)");

  Trajectory traj;
  traj.config = cfg;
  traj.compatibility = check_compatibility(initial, p);
  traj.bounds = a_priori_bounds(initial, p);
  const double tol = 1e-9 * std::max(traj.bounds.rho_max, traj.bounds.v_max);

  LatticeStepper stepper(cfg.m, cfg.dt, p);
  stepper.set_blow_up_ceiling(10.0 * std::max(traj.bounds.rho_max, traj.bounds.v_max));

  auto record = [&](const LatticeState& s) {
    traj.max_bound_violation = std::max(traj.max_bound_violation, bound_violation(s, traj.bounds));
    if (traj.max_bound_violation > tol) {
      std::ostringstream os;
      os << "simulate: a-priori bound violated by " << traj.max_bound_violation << " at t=" << s.time;
      throw std::runtime_error(os.str());
    }
    traj.window_contaminated = traj.window_contaminated || contaminated(s);
    traj.mass.emplace_back(s.time, total_mass(s));
    traj.snapshots.push_back(s);
  };

  const long steps = cfg.step_count();
  const int stride = cfg.effective_stride();
  LatticeState state = initial;
  record(state);
  for (long k = 1; k <= steps; ++k) {
    state = k <= cfg.smoothing_steps ? stepper.smoothing_step(state) : stepper.step(state);
    state.time = static_cast<double>(k) * cfg.dt + initial.time;
    if (k % stride == 0 || k == steps) record(state);
  }
  return traj;
}

Trajectory simulate(const InitialData& data, const SimulationConfig& cfg, const Parameters& p) {
  return simulate_from(init_state(data, cfg, p).state, cfg, p);
}

double check_long_time_convergence(const Trajectory& traj, const Parameters& p, int radius) {
  const LatticeState& s = traj.final_state();
  if (radius < 0) radius = (s.j_max - s.j_min) / 4;
  const double v_star = p.beta / p.alpha;
  double dev = 0.0;
  for (int j = std::max(-radius, s.j_min); j <= std::min(radius, s.j_max); ++j) {
    dev = std::max(dev, std::abs(s.rho_at(j) - 1.0));
    if (j < radius && j < s.j_max)
      for (double v : s.edge_at(j).values()) dev = std::max(dev, std::abs(v - v_star));
  }
  return dev;
}

double ordering_violation(const LatticeState& lower, const LatticeState& upper) {
  if (lower.j_min != upper.j_min || lower.j_max != upper.j_max)
    throw std::invalid_argument("ordering_violation: windows differ");
  double worst = 0.0;
  for (std::size_t k = 0; k < lower.rho.size(); ++k) worst = std::max(worst, lower.rho[k] - upper.rho[k]);
  for (std::size_t k = 0; k < lower.edges.size(); ++k)
    for (std::size_t i = 0; i < lower.edges[k].values().size(); ++i)
      worst = std::max(worst, lower.edges[k][i] - upper.edges[k][i]);
  return worst;
}

double min_value(const LatticeState& s) {
  double lo = *std::min_element(s.rho.begin(), s.rho.end());
  for (const auto& e : s.edges)
    for (double v : e.values()) lo = std::min(lo, v);
  return lo;
}

}  // namespace cityroad
