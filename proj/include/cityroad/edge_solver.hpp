// Crank-Nicolson solver for one road: d/dt v = d v_xx on [0,1] with
//   -d v_x(0) + alpha v(0) = g_left,   d v_x(1) + alpha v(1) = g_right.
#pragma once

#include <functional>
#include <span>
#include <vector>

#include "cityroad/model.hpp"

namespace cityroad {

struct TridiagonalOperator {
  std::vector<double> lower;     // lower[i] multiplies x[i-1]; lower[0] unused
  std::vector<double> diagonal;
  std::vector<double> upper;     // upper[i] multiplies x[i+1]; upper[n-1] unused

  std::size_t size() const { return diagonal.size(); }
  std::vector<double> apply(std::span<const double> x) const;
  bool strictly_diagonally_dominant() const;
};

/// In-place Thomas algorithm; `rhs` becomes the solution. O(n).
void solve_tridiagonal(const TridiagonalOperator& op, std::span<double> rhs);

/// Time-stepping operators for one edge resolution, step size and parameter set.
///
/// The Robin rows come from eliminating a ghost node with the centred
/// boundary flux. `load_weight` is the coefficient of the Robin data in
/// the boundary rows of the discrete Laplacian (2/dx).
struct EdgeStepOperator {
  int m = 0;
  double dt = 0.0;
  double theta = 0.5;  // 0.5: Crank-Nicolson, 1: backward Euler
  TridiagonalOperator implicit_part;  // I - theta dt L
  TridiagonalOperator explicit_part;  // I + (1-theta) dt L
  double load_weight = 0.0;
};

/// Throws std::invalid_argument for m < 2, dt <= 0, or invalid parameters;
/// std::runtime_error if the implicit operator is not strictly dominant.
EdgeStepOperator assemble_step_operator(int m, double dt, const Parameters& p, double theta = 0.5);

struct RobinLoads {
  double left_start = 0.0;
  double left_end = 0.0;
  double right_start = 0.0;
  double right_end = 0.0;
};

/// One step with the Robin data blended between step start and step end
/// with the operator's theta weights.
EdgeGrid step_edge(const EdgeStepOperator& op, const EdgeGrid& edge, const RobinLoads& loads);

struct RobinStepInput {
  EdgeGrid edge;
  RobinLoads loads;
  double dt = 0.0;
  Parameters p;
};

/// Convenience form assembling the Crank-Nicolson operator on the fly.
EdgeGrid step_edge(const RobinStepInput& in);

/// Max-norm error at time T of the solver against the exact solution
/// exp(-d pi^2 t) cos(pi x), whose Robin data is +/- alpha exp(-d pi^2 t).
double manufactured_solution_error(int m, double dt, double T, const Parameters& p);

/// Heat-kernel boundary-integral representation of the same edge problem,
/// used only as an independent check of the finite-difference solver.
struct OracleOptions {
  /// Piecewise-linear resolution used for the initial-profile integral.
  int initial_samples = 4096;
  /// Gauss points per time panel when evaluating at interior x.
  int gauss_points = 8;
  /// Collocation diagonal below this is reported as ill-conditioned.
  double min_diagonal = 1e-8;
};

struct BoundaryTraces {
  std::vector<double> times;
  std::vector<double> left;   // u(t_k, 0)
  std::vector<double> right;  // u(t_k, 1)
};

/// Solves the Volterra system for the boundary traces on the uniform grid
/// t_k = k t / N, N = g.size() - 1. `g` and `h` are the Robin data sampled
/// on that grid.
BoundaryTraces solve_boundary_traces(const std::function<double(double)>& h0, std::span<const double> g,
                                     std::span<const double> h, double t, const Parameters& p,
                                     const OracleOptions& opt = {});

/// Evaluates the representation formula at (t, x). x = 0 and x = 1 return
/// the collocated traces.
double integral_representation_oracle(const std::function<double(double)>& h0, std::span<const double> g,
                                      std::span<const double> h, double t, double x, const Parameters& p,
                                      const OracleOptions& opt = {});

/// Same, sampling the Robin data functions on `time_nodes` + 1 points.
double integral_representation_oracle(const std::function<double(double)>& h0,
                                      const std::function<double(double)>& g,
                                      const std::function<double(double)>& h, double t, double x,
                                      const Parameters& p, int time_nodes = 512, const OracleOptions& opt = {});

}  // namespace cityroad
