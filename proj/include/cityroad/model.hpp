// Core domain types for the city-road lattice model.
//
// Cities sit on the integer lattice and carry a density rho_j. The road
// joining city j to city j+1 carries a density profile v_j(x), x in [0, 1].
// Roads diffuse, cities grow, and the two exchange mass through Robin
// boundary conditions at each road end.
#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace cityroad {

/// Reaction term of the city equation.
///
/// Logistic and tabulated kinds must satisfy the KPP conditions
/// f(0)=f(1)=0 and 0 < f(u) <= f'(0) u on (0,1), and be negative outside
/// [0,1]. The inert kind (f == 0) is not KPP and exists for conservation
/// experiments; it is rejected by anything that needs a spreading speed.
class Nonlinearity {
 public:
  enum class Kind { logistic, tabulated, inert };

  static Nonlinearity logistic(double rate);
  /// Nodes are equispaced on [0,1] (first and last must be 0).
  /// Interpolation is piecewise cubic Hermite; the slope at 0 is fprime0.
  static Nonlinearity tabulated(std::vector<double> nodes, double fprime0);
  static Nonlinearity inert();

  double operator()(double u) const;

  Kind kind() const { return kind_; }
  double fprime0() const { return fprime0_; }
  bool is_kpp() const { return kind_ != Kind::inert; }
  std::string describe() const;

 private:
  Nonlinearity() = default;
  void check_admissible() const;

  Kind kind_ = Kind::inert;
  double fprime0_ = 0.0;
  std::vector<double> nodes_;
  std::vector<double> slopes_;
};

/// Number of equispaced samples used by the admissibility check.
inline constexpr int kAdmissibilitySamples = 1024;

struct Parameters {
  double alpha = 1.0;  // road -> city exchange rate
  double beta = 1.0;   // city -> road exchange rate
  double d = 1.0;      // road diffusivity
  double ell = 1.0;    // road length
  Nonlinearity f = Nonlinearity::logistic(1.0);

  /// Throws std::invalid_argument naming the offending field.
  void validate() const;
  bool normalized() const { return ell == 1.0; }
};

/// Parameters for the default running example (alpha, beta, d, f'(0)) = (1,1,1,1).
Parameters default_parameters();

struct RescaledParameters {
  Parameters params;
  /// Road densities map as v_unit = scale * v.
  double scale = 1.0;
};

RescaledParameters rescale_to_unit_length(const Parameters& p);

/// One road sampled at x_i = i/m, i = 0..m.
class EdgeGrid {
 public:
  EdgeGrid(int m, double value);
  explicit EdgeGrid(std::vector<double> values);

  int m() const { return static_cast<int>(values_.size()) - 1; }
  double dx() const { return 1.0 / m(); }
  double x(int i) const { return static_cast<double>(i) / m(); }
  std::span<const double> values() const { return values_; }
  std::span<double> values() { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }
  double& operator[](std::size_t i) { return values_[i]; }
  double left() const { return values_.front(); }
  double right() const { return values_.back(); }
  /// Trapezoid rule on the grid.
  double integral() const;

 private:
  std::vector<double> values_;
};

/// Snapshot of a finite window [j_min, j_max] of the lattice.
///
/// rho[k] is the city at j_min + k; edges[k] is the road between
/// j_min + k and j_min + k + 1.
struct LatticeState {
  int j_min = 0;
  int j_max = 1;
  std::vector<double> rho;
  std::vector<EdgeGrid> edges;
  double time = 0.0;

  static LatticeState constant(int j_min, int j_max, int m, double rho_value, double v_value);

  std::size_t vertex_count() const { return rho.size(); }
  int resolution() const { return edges.empty() ? 0 : edges.front().m(); }
  double rho_at(int j) const;
  const EdgeGrid& edge_at(int j) const;
  /// Throws std::invalid_argument on shape mismatch or non-finite entries.
  void validate() const;
  /// Shifts every index by `offset` (values untouched).
  LatticeState translated(int offset) const;
};

/// Sum of city densities plus trapezoid integrals of the roads.
double total_mass(const LatticeState& s);

/// v_j(x) = slope * x + intercept.
struct LinearProfile {
  double slope = 0.0;
  double intercept = 0.0;
  double operator()(double x) const { return slope * x + intercept; }
  double at_left() const { return intercept; }
  double at_right() const { return slope + intercept; }
};

/// Stationary road profiles for the given city densities: one per
/// consecutive pair of cities. Requires normalized parameters.
std::vector<LinearProfile> stationary_from_rho(std::span<const double> rho, const Parameters& p);

/// Residual of the reduced stationary lattice equation at every interior city.
std::vector<double> stationary_residual(std::span<const double> rho, const Parameters& p);

/// Effective lattice coupling beta*d/(2d+alpha) of the reduced stationary equation.
double stationary_coupling(const Parameters& p);

/// Per-city report of the initial-data compatibility with the Robin conditions.
struct CompatibilityReport {
  std::vector<double> left_defect;   // -d h_j'(0) + alpha h_j(0) - beta Lambda_j
  std::vector<double> right_defect;  //  d h_j'(1) + alpha h_j(1) - beta Lambda_{j+1}
  double max_defect = 0.0;
  bool compatible(double tol) const { return max_defect <= tol; }
};

/// Road derivatives use one-sided second-order differences.
CompatibilityReport check_compatibility(const LatticeState& s, const Parameters& p);

}  // namespace cityroad
