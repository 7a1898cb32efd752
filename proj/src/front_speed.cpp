#include "cityroad/front_speed.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace cityroad {

double level_position(std::span<const double> rho, double threshold, int j0) {
  if (!(threshold > 0.0 && threshold < 1.0)) throw std::invalid_argument("level_position: threshold must lie in (0, 1)");
  for (std::size_t k = rho.size(); k-- > 1;) {
    const double a = rho[k - 1];
    const double b = rho[k];
    if (a >= threshold && b < threshold)
      return static_cast<double>(j0) + static_cast<double>(k - 1) + (a - threshold) / (a - b);
  }
  throw NoCrossingError("level_position: no threshold crossing in the window");
}

FrontTrace fit_front(std::vector<double> times, std::vector<double> positions, double threshold,
                     std::pair<double, double> window_fraction) {
  if (times.size() != positions.size()) throw std::invalid_argument("fit_front: size mismatch");
  if (times.empty()) throw std::invalid_argument("fit_front: no samples");
  const auto [lo, hi] = window_fraction;
  if (!(lo >= 0.0 && lo < hi && hi <= 1.0)) throw std::invalid_argument("fit_front: window must satisfy 0 <= lo < hi <= 1");
  for (std::size_t k = 1; k < times.size(); ++k)
    if (!(times[k] > times[k - 1])) throw std::invalid_argument("fit_front: times must be strictly increasing");

  FrontTrace out;
  out.threshold = threshold;
  const double T = times.back();
  out.fit_window = {lo * T, hi * T};

  double n = 0.0, st = 0.0, sx = 0.0;
  for (std::size_t k = 0; k < times.size(); ++k) {
    if (times[k] < out.fit_window.first - 1e-12 || times[k] > out.fit_window.second + 1e-12) continue;
    n += 1.0;
    st += times[k];
    sx += positions[k];
  }
  if (n < static_cast<double>(kMinFitSnapshots))
    throw std::invalid_argument("fit_front: fewer than 10 snapshots inside the fit window");
  const double tm = st / n;
  const double xm = sx / n;
  double stt = 0.0, stx = 0.0;
  for (std::size_t k = 0; k < times.size(); ++k) {
    if (times[k] < out.fit_window.first - 1e-12 || times[k] > out.fit_window.second + 1e-12) continue;
    stt += (times[k] - tm) * (times[k] - tm);
    stx += (times[k] - tm) * (positions[k] - xm);
  }
  out.fitted_speed = stx / stt;
  out.intercept = xm - out.fitted_speed * tm;
  for (std::size_t k = 0; k < times.size(); ++k) {
    if (times[k] < out.fit_window.first - 1e-12 || times[k] > out.fit_window.second + 1e-12) continue;
    out.fit_residual = std::max(out.fit_residual, std::abs(positions[k] - out.intercept - out.fitted_speed * times[k]));
  }
  out.non_ballistic = out.fit_residual > kNonBallisticResidual;
  out.times = std::move(times);
  out.positions = std::move(positions);
  return out;
}

namespace {

template <class Snapshots, class Rho>
FrontTrace trace(const Snapshots& snaps, double threshold, std::pair<double, double> window, Rho rho_of) {
  if (snaps.empty()) throw std::invalid_argument("estimate_speed: empty trajectory");
  const double T = snaps.back().time;
  std::vector<double> times;
  std::vector<double> positions;
  for (const auto& s : snaps) {
    if (s.time < window.first * T - 1e-12) continue;
    times.push_back(s.time);
    positions.push_back(level_position(rho_of(s), threshold, s.j_min));
  }
  return fit_front(std::move(times), std::move(positions), threshold, window);
}

}  // namespace

FrontTrace estimate_speed(const Trajectory& traj, double threshold, std::pair<double, double> window_fraction) {
  return trace(traj.snapshots, threshold, window_fraction, [](const LatticeState& s) { return std::span(s.rho); });
}

FrontTrace estimate_speed(const AsymptoticTrajectory& traj, double threshold,
                          std::pair<double, double> window_fraction) {
  return trace(traj.snapshots, threshold, window_fraction, [](const AsymptoticState& s) { return std::span(s.P); });
}

PowerLawFit loglog_fit(std::span<const double> fprime0_values, std::span<const double> speeds) {
  if (fprime0_values.size() != speeds.size()) throw std::invalid_argument("loglog_fit: size mismatch");
  if (fprime0_values.size() < 4) throw std::invalid_argument("loglog_fit: needs at least 4 points");
  const std::size_t n = speeds.size();
  std::vector<double> lx(n), ly(n);
  for (std::size_t k = 0; k < n; ++k) {
    if (!(fprime0_values[k] > 0.0) || !(speeds[k] > 0.0) || !std::isfinite(fprime0_values[k]) ||
        !std::isfinite(speeds[k]))
      throw std::invalid_argument("loglog_fit: inputs must be positive and finite");
    lx[k] = std::log(fprime0_values[k]);
    ly[k] = std::log(speeds[k]);
  }
  double mx = 0.0, my = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    mx += lx[k];
    my += ly[k];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    sxx += (lx[k] - mx) * (lx[k] - mx);
    sxy += (lx[k] - mx) * (ly[k] - my);
  }
  if (!(sxx > 1e-300)) throw std::invalid_argument("loglog_fit: degenerate abscissae");
  PowerLawFit out;
  out.a1 = sxy / sxx;
  out.a0 = my - out.a1 * mx;
  for (std::size_t k = 0; k < n; ++k) {
    const double model = std::exp(out.a0) * std::pow(fprime0_values[k], out.a1);
    out.max_rel_residual = std::max(out.max_rel_residual, std::abs(model - speeds[k]) / speeds[k]);
  }
  return out;
}

double far_field_sup(const LatticeState& s, double cut) {
  double sup = 0.0;
  for (int j = s.j_min; j <= s.j_max; ++j) {
    if (std::abs(j) >= cut) sup = std::max(sup, s.rho_at(j));
    // road j spans [j, j+1]; it counts once either end is in the far field
    if (j < s.j_max && (std::abs(j) >= cut || std::abs(j + 1) >= cut))
      for (double v : s.edge_at(j).values()) sup = std::max(sup, v);
  }
  return sup;
}

double near_field_gap(const LatticeState& s, double cut, const Parameters& p) {
  const double v_ref = p.beta / p.alpha;
  double gap = 0.0;
  for (int j = static_cast<int>(std::ceil(-cut)); j <= static_cast<int>(std::floor(cut)); ++j) {
    gap = std::max(gap, std::abs(s.rho_at(j) - 1.0));
    if (j + 1 <= cut) {
      if (j < s.j_min || j >= s.j_max) {
        gap = std::max(gap, v_ref);
        continue;
      }
      for (double v : s.edge_at(j).values()) gap = std::max(gap, std::abs(v - v_ref));
    }
  }
  return gap;
}

double far_field_sup(const AsymptoticState& s, double cut) {
  double sup = 0.0;
  for (int j = s.j_min; j <= s.j_max; ++j) {
    if (std::abs(j) >= cut) sup = std::max(sup, s.P_at(j));
    if (j < s.j_max && (std::abs(j) >= cut || std::abs(j + 1) >= cut)) sup = std::max(sup, s.V_at(j));
  }
  return sup;
}

double near_field_gap(const AsymptoticState& s, double cut, const Parameters& p) {
  const double v_ref = p.beta / p.alpha;
  double gap = 0.0;
  for (int j = static_cast<int>(std::ceil(-cut)); j <= static_cast<int>(std::floor(cut)); ++j) {
    gap = std::max(gap, std::abs(s.P_at(j) - 1.0));
    if (j + 1 <= cut) gap = std::max(gap, std::abs(s.V_at(j) - v_ref));
  }
  return gap;
}

}  // namespace cityroad
