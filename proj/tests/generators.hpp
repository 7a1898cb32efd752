// Seeded case generators for the property tests.
#pragma once

#include <cmath>
#include <random>
#include <vector>

#include "cityroad/model.hpp"

namespace gen {

inline std::mt19937_64 rng(unsigned long long seed) { return std::mt19937_64(seed); }

inline double uniform(std::mt19937_64& r, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(r);
}

inline std::vector<double> uniform_vector(std::mt19937_64& r, std::size_t n, double lo, double hi) {
  std::vector<double> v(n);
  for (auto& x : v) x = uniform(r, lo, hi);
  return v;
}

/// Smooth nonnegative profile sum_k a_k (1 + cos(k pi x)) / 2 on m+1 nodes.
inline cityroad::EdgeGrid smooth_edge(std::mt19937_64& r, int m, double amplitude) {
  const double pi = 3.14159265358979323846;
  double a[3];
  for (double& c : a) c = uniform(r, 0.0, amplitude / 3.0);
  std::vector<double> v(static_cast<std::size_t>(m) + 1);
  for (int i = 0; i <= m; ++i) {
    const double x = static_cast<double>(i) / m;
    double s = 0.0;
    for (int k = 0; k < 3; ++k) s += a[k] * 0.5 * (1.0 + std::cos((k + 1) * pi * x));
    v[static_cast<std::size_t>(i)] = s;
  }
  return cityroad::EdgeGrid(std::move(v));
}

/// Random nonnegative lattice state with cities in [0, rho_hi] and smooth roads.
inline cityroad::LatticeState random_state(std::mt19937_64& r, int j_min, int j_max, int m, double rho_hi,
                                           double v_hi) {
  cityroad::LatticeState s = cityroad::LatticeState::constant(j_min, j_max, m, 0.0, 0.0);
  for (auto& x : s.rho) x = uniform(r, 0.0, rho_hi);
  for (auto& e : s.edges) e = smooth_edge(r, m, v_hi);
  return s;
}

}  // namespace gen
