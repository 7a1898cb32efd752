#include "cityroad/model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace cityroad {

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw std::invalid_argument(what);
}

}  // namespace

Nonlinearity Nonlinearity::logistic(double rate) {
  require(std::isfinite(rate) && rate > 0.0, "logistic rate must be > 0");
  Nonlinearity nl;
  nl.kind_ = Kind::logistic;
  nl.fprime0_ = rate;
  return nl;
}

Nonlinearity Nonlinearity::tabulated(std::vector<double> nodes, double fprime0) {
  require(nodes.size() >= 3, "tabulated nonlinearity needs at least 3 nodes");
  require(std::isfinite(fprime0) && fprime0 > 0.0, "tabulated fprime0 must be > 0");
  for (double v : nodes) require(std::isfinite(v), "tabulated nonlinearity has non-finite node");
  require(nodes.front() == 0.0 && nodes.back() == 0.0, "tabulated nonlinearity must vanish at 0 and 1");

  Nonlinearity nl;
  nl.kind_ = Kind::tabulated;
  nl.fprime0_ = fprime0;
  const std::size_t n = nodes.size() - 1;
  const double h = 1.0 / static_cast<double>(n);
  nl.slopes_.resize(nodes.size());
  nl.slopes_[0] = fprime0;
  for (std::size_t i = 1; i < n; ++i) nl.slopes_[i] = (nodes[i + 1] - nodes[i - 1]) / (2.0 * h);
  nl.slopes_[n] = (nodes[n] - nodes[n - 1]) / h;
  nl.nodes_ = std::move(nodes);
  require(nl.slopes_[n] < 0.0, "tabulated nonlinearity must decrease through u=1");
  nl.check_admissible();
  return nl;
}

Nonlinearity Nonlinearity::inert() { return Nonlinearity{}; }

double Nonlinearity::operator()(double u) const {
  switch (kind_) {
    case Kind::inert:
      return 0.0;
    case Kind::logistic:
      return fprime0_ * u * (1.0 - u);
    case Kind::tabulated:
      break;
  }
  const std::size_t n = nodes_.size() - 1;
  if (u <= 0.0) return fprime0_ * u;
  if (u >= 1.0) return slopes_[n] * (u - 1.0);
  const double h = 1.0 / static_cast<double>(n);
  const std::size_t i = std::min(n - 1, static_cast<std::size_t>(u / h));
  const double t = (u - static_cast<double>(i) * h) / h;
  const double t2 = t * t;
  const double t3 = t2 * t;
  const double h00 = 2 * t3 - 3 * t2 + 1;
  const double h10 = t3 - 2 * t2 + t;
  const double h01 = -2 * t3 + 3 * t2;
  const double h11 = t3 - t2;
  return h00 * nodes_[i] + h10 * h * slopes_[i] + h01 * nodes_[i + 1] + h11 * h * slopes_[i + 1];
}

void Nonlinearity::check_admissible() const {
  const Nonlinearity& f = *this;
  require(f(0.0) == 0.0 && f(1.0) == 0.0, "nonlinearity must vanish at 0 and 1");
  for (int k = 1; k <= kAdmissibilitySamples; ++k) {
    const double u = static_cast<double>(k) / (kAdmissibilitySamples + 1);
    const double fu = f(u);
    if (!(fu > 0.0) || fu > fprime0_ * u * (1.0 + 1e-12)) {
      std::ostringstream os;
      os << "nonlinearity violates 0 < f(u) <= f'(0) u at u=" << u;
      throw std::invalid_argument(os.str());
    }
  }
  for (int k = 1; k <= 64; ++k) {
    const double s = static_cast<double>(k) / 64.0;
    require(f(-s) < 0.0 && f(1.0 + s) < 0.0, "nonlinearity must be negative outside [0,1]");
  }
}

std::string Nonlinearity::describe() const {
  std::ostringstream os;
  switch (kind_) {
    case Kind::logistic:
      os << "logistic(r=" << fprime0_ << ")";
      break;
    case Kind::tabulated:
      os << "tabulated(" << nodes_.size() << " nodes, f'(0)=" << fprime0_ << ")";
      break;
    case Kind::inert:
      os << "inert";
      break;
  }
  return os.str();
}

void Parameters::validate() const {
  auto positive = [](double v, const char* name) {
    if (!(std::isfinite(v) && v > 0.0)) throw std::invalid_argument(std::string(name) + " must be a finite positive number");
  };
  positive(alpha, "alpha");
  positive(beta, "beta");
  positive(d, "d");
  positive(ell, "ell");
}

Parameters default_parameters() { return Parameters{}; }

RescaledParameters rescale_to_unit_length(const Parameters& p) {
  p.validate();
  RescaledParameters out{p, p.ell};
  out.params.d = p.d / (p.ell * p.ell);
  out.params.alpha = p.alpha / p.ell;
  out.params.ell = 1.0;
  return out;
}

EdgeGrid::EdgeGrid(int m, double value) {
  require(m >= 2, "edge resolution m must be >= 2");
  require(std::isfinite(value), "edge value must be finite");
  values_.assign(static_cast<std::size_t>(m) + 1, value);
}

EdgeGrid::EdgeGrid(std::vector<double> values) : values_(std::move(values)) {
  require(values_.size() >= 3, "edge grid needs m >= 2");
  for (double v : values_) require(std::isfinite(v), "edge grid has non-finite value");
}

double EdgeGrid::integral() const {
  double sum = 0.5 * (values_.front() + values_.back());
  for (std::size_t i = 1; i + 1 < values_.size(); ++i) sum += values_[i];
  return sum * dx();
}

LatticeState LatticeState::constant(int j_min, int j_max, int m, double rho_value, double v_value) {
  require(j_min < j_max, "window needs j_min < j_max");
  LatticeState s;
  s.j_min = j_min;
  s.j_max = j_max;
  s.rho.assign(static_cast<std::size_t>(j_max - j_min + 1), rho_value);
  s.edges.assign(static_cast<std::size_t>(j_max - j_min), EdgeGrid(m, v_value));
  return s;
}

double LatticeState::rho_at(int j) const {
  if (j < j_min || j > j_max) return 0.0;
  return rho[static_cast<std::size_t>(j - j_min)];
}

const EdgeGrid& LatticeState::edge_at(int j) const {
  if (j < j_min || j >= j_max) throw std::out_of_range("edge index outside window");
  return edges[static_cast<std::size_t>(j - j_min)];
}

void LatticeState::validate() const {
  require(j_min < j_max, "window needs j_min < j_max");
  require(rho.size() == static_cast<std::size_t>(j_max - j_min + 1), "rho length does not match window");
  require(edges.size() + 1 == rho.size(), "edge count must be vertex count - 1");
  require(std::isfinite(time), "state time must be finite");
  for (double r : rho) require(std::isfinite(r), "non-finite city density");
  const int m = edges.front().m();
  for (const auto& e : edges) {
    require(e.m() == m, "edges must share one resolution");
    for (double v : e.values()) require(std::isfinite(v), "non-finite road density");
  }
}

LatticeState LatticeState::translated(int offset) const {
  LatticeState out = *this;
  out.j_min += offset;
  out.j_max += offset;
  return out;
}

double total_mass(const LatticeState& s) {
  double mass = 0.0;
  for (double r : s.rho) mass += r;
  for (const auto& e : s.edges) mass += e.integral();
  return mass;
}

double stationary_coupling(const Parameters& p) { return p.beta * p.d / (2.0 * p.d + p.alpha); }

std::vector<LinearProfile> stationary_from_rho(std::span<const double> rho, const Parameters& p) {
  p.validate();
  require(p.normalized(), "stationary_from_rho requires ell = 1 (rescale first)");
  for (double r : rho) require(std::isfinite(r), "stationary_from_rho: non-finite density");
  std::vector<LinearProfile> out;
  if (rho.size() < 2) return out;
  out.reserve(rho.size() - 1);
  const double a = p.alpha;
  const double d = p.d;
  const double pref = p.beta * d / (a * (2.0 * d + a));
  const double ratio = (d + a) / d;
  for (std::size_t j = 0; j + 1 < rho.size(); ++j) {
    const double left = pref * (ratio * rho[j] + rho[j + 1]);
    const double slope = p.beta / (2.0 * d + a) * (rho[j + 1] - rho[j]);
    out.push_back({slope, left});
  }
  return out;
}

std::vector<double> stationary_residual(std::span<const double> rho, const Parameters& p) {
  require(rho.size() >= 3, "stationary_residual needs at least 3 densities");
  const double k = stationary_coupling(p);
  std::vector<double> r(rho.size() - 2);
  for (std::size_t j = 1; j + 1 < rho.size(); ++j)
    r[j - 1] = k * (rho[j - 1] - 2.0 * rho[j] + rho[j + 1]) + p.f(rho[j]);
  return r;
}

CompatibilityReport check_compatibility(const LatticeState& s, const Parameters& p) {
  CompatibilityReport rep;
  rep.left_defect.reserve(s.edges.size());
  rep.right_defect.reserve(s.edges.size());
  for (std::size_t k = 0; k < s.edges.size(); ++k) {
    const auto v = s.edges[k].values();
    const std::size_t m = v.size() - 1;
    const double h = s.edges[k].dx();
    const double d0 = (-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2.0 * h);
    const double d1 = (3.0 * v[m] - 4.0 * v[m - 1] + v[m - 2]) / (2.0 * h);
    const double left = -p.d * d0 + p.alpha * v[0] - p.beta * s.rho[k];
    const double right = p.d * d1 + p.alpha * v[m] - p.beta * s.rho[k + 1];
    rep.left_defect.push_back(left);
    rep.right_defect.push_back(right);
    rep.max_defect = std::max({rep.max_defect, std::abs(left), std::abs(right)});
  }
  return rep;
}

}  // namespace cityroad
