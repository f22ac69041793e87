#pragma once

#include <array>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ksym/bundles.hpp"
#include "ksym/expr.hpp"
#include "ksym/lagrangian.hpp"

namespace ksym {

/// One axis of a uniform parameter grid.  The evolution axis includes both
/// endpoints; a periodic axis covers [min, max) and wraps around.
struct GridAxis {
  double min = 0.0;
  double max = 1.0;
  double step = 0.1;
  bool periodic = false;

  int nodes() const;
  double coord(int index) const { return min + step * index; }
};

/// Uniform grid over (t^1, ..., t^k), k in {1, 2}. Axis 0 is the evolution axis.
class GridSpec {
 public:
  explicit GridSpec(std::vector<GridAxis> axes);

  int k() const noexcept { return static_cast<int>(axes_.size()); }
  const GridAxis& axis(int a) const { return axes_[static_cast<std::size_t>(a)]; }
  const std::vector<GridAxis>& axes() const noexcept { return axes_; }
  int node_count() const noexcept;
  int node(int i0, int i1 = 0) const noexcept { return k() == 1 ? i0 : i0 * axes_[1].nodes() + i1; }
  std::array<int, 2> multi_index(int node) const noexcept;
  std::vector<double> coords(int node) const;

  /// Same extents with every step divided by `factor`.
  GridSpec refined(int factor) const;

 private:
  std::vector<GridAxis> axes_;
};

/// Discrete field phi on a grid plus its first jet.
struct SolutionGrid {
  GridSpec grid;
  int n = 0;
  std::vector<double> values;  // node * n + i
  std::vector<double> jets;    // node * n * k + i * k + A, by finite differences of `values`
  /// k = 1 only: velocities carried by the integrator state (node * n + i).
  std::vector<double> state_velocity;
  std::vector<std::string> warnings;

  double value(int node, int i) const { return values[static_cast<std::size_t>(node * n + i)]; }
  double jet(int node, int i, int a) const {
    return jets[static_cast<std::size_t>((node * n + i) * grid.k() + a)];
  }
  JetPoint jet_point(int node) const;
};

/// Centered differences on interior/periodic nodes, second-order one-sided at
/// the ends of the evolution axis.
std::vector<double> finite_difference_jets(const GridSpec& grid, int n, std::span<const double> values);

/// RK4 integration of the k = 1 Euler-Lagrange SODE from (q0, v0).
SolutionGrid integrate_k1(const LagrangianModel& model, const Eigen::VectorXd& q0,
                          const Eigen::VectorXd& v0, const GridSpec& grid);

/// Structural data of a quadratic Lagrangian that admits explicit leapfrog in t^1.
struct HyperbolicSystem {
  Eigen::MatrixXd h11;     // d^2L/dv_1 dv_1, n x n, positive definite
  Eigen::MatrixXd h22;     // d^2L/dv_2 dv_2
  Eigen::MatrixXd c2;      // (i, j): d^2L/dq^i dv^j_2 - d^2L/dq^j dv^i_2
  Eigen::MatrixXd k;       // d^2L/dq dq
  Eigen::VectorXd source;  // dL/dq at the origin
  double wave_speed = 0.0;
};

/// Symbolic hyperbolicity check; throws SolverError if L is not quadratic,
/// couples v_1 to v_2, carries a gyroscopic q-v_1 term, or is not hyperbolic.
HyperbolicSystem hyperbolic_system(const LagrangianModel& model);

/// Leapfrog evolution in t^1 with periodic t^2 for k = 2.  Initial data are
/// expressions in t2.
SolutionGrid integrate_k2_hyperbolic(const LagrangianModel& model, std::span<const Expr> phi0,
                                     std::span<const Expr> phidot0, const GridSpec& grid);

/// max over nodes and components of |phi - exact(t)|.
double solution_error(const VarTable& vars, const SolutionGrid& sol, std::span<const Expr> exact);

enum class Side { Lagrangian, Hamiltonian };

struct CurrentTrace {
  int k = 0;
  std::vector<double> values;      // node * k + A
  std::vector<double> divergence;  // NaN on non-interior nodes
  std::vector<char> interior;
  double max_divergence = 0.0;
};

/// Evaluates F^A nodewise on the jet (Lagrangian side) or its Legendre image
/// (Hamiltonian side, requires `model`) and its centered-difference divergence.
/// Interior nodes are those whose divergence stencil only reads centered jets,
/// i.e. evolution index in [2, nodes - 3].
CurrentTrace evaluate_current(const VarTable& vars, std::span<const Expr> current,
                              const SolutionGrid& sol, Side side,
                              const LagrangianModel* model = nullptr);

/// One row per node: t-coordinates, phi, jets, then F^A and divergence when a trace is given.
void write_csv(std::ostream& out, const VarTable& vars, const SolutionGrid& sol,
               const CurrentTrace* trace = nullptr);

}  // namespace ksym
