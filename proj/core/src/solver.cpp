#include "ksym/solver.hpp"

#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>

#include "ksym/errors.hpp"

namespace ksym {

namespace {

using Index = Eigen::Index;

double axis_ratio(const GridAxis& a) { return (a.max - a.min) / a.step; }

}  // namespace

int GridAxis::nodes() const {
  const int cells = static_cast<int>(std::lround(axis_ratio(*this)));
  return periodic ? cells : cells + 1;
}

GridSpec::GridSpec(std::vector<GridAxis> axes) : axes_(std::move(axes)) {
  if (axes_.empty() || axes_.size() > 2) throw SolverError("grids support k = 1 or k = 2");
  for (std::size_t a = 0; a < axes_.size(); ++a) {
    const auto& ax = axes_[a];
    if (!(ax.step > 0.0) || !(ax.max > ax.min)) throw SolverError("grid axis needs step > 0 and max > min");
    const double r = axis_ratio(ax);
    if (std::abs(r - std::round(r)) > 1e-9) {
      throw SolverError("grid axis " + std::to_string(a + 1) + ": extent is not an integer number of steps");
    }
    if (a == 0 && ax.periodic) throw SolverError("axis 1 is the evolution axis and cannot be periodic");
    if (a == 1 && !ax.periodic) throw SolverError("axis 2 must be periodic");
  }
  if (axes_[0].nodes() < 3) throw SolverError("evolution axis needs at least 3 nodes");
  if (axes_.size() == 2 && axes_[1].nodes() < 3) throw SolverError("periodic axis needs at least 3 nodes");
}

int GridSpec::node_count() const noexcept {
  int count = 1;
  for (const auto& a : axes_) count *= a.nodes();
  return count;
}

std::array<int, 2> GridSpec::multi_index(int node) const noexcept {
  if (k() == 1) return {node, 0};
  const int n1 = axes_[1].nodes();
  return {node / n1, node % n1};
}

std::vector<double> GridSpec::coords(int node) const {
  const auto idx = multi_index(node);
  std::vector<double> t;
  for (int a = 0; a < k(); ++a) t.push_back(axes_[static_cast<std::size_t>(a)].coord(idx[static_cast<std::size_t>(a)]));
  return t;
}

GridSpec GridSpec::refined(int factor) const {
  auto axes = axes_;
  for (auto& a : axes) a.step /= factor;
  return GridSpec(std::move(axes));
}

JetPoint SolutionGrid::jet_point(int node) const {
  const int k = grid.k();
  JetPoint w{Eigen::VectorXd(n), Eigen::MatrixXd(n, k)};
  for (int i = 0; i < n; ++i) {
    w.q[i] = value(node, i);
    for (int a = 0; a < k; ++a) w.v(i, a) = jet(node, i, a);
  }
  return w;
}

std::vector<double> finite_difference_jets(const GridSpec& grid, int n, std::span<const double> values) {
  const int k = grid.k();
  const int nodes = grid.node_count();
  std::vector<double> jets(static_cast<std::size_t>(nodes * n * k));
  auto val = [&](int node, int i) { return values[static_cast<std::size_t>(node * n + i)]; };

  const int n0 = grid.axis(0).nodes();
  const double h0 = grid.axis(0).step;
  const int n1 = k == 2 ? grid.axis(1).nodes() : 1;
  const double h1 = k == 2 ? grid.axis(1).step : 1.0;
  for (int i0 = 0; i0 < n0; ++i0) {
    for (int i1 = 0; i1 < n1; ++i1) {
      const int node = grid.node(i0, i1);
      for (int i = 0; i < n; ++i) {
        double d0 = 0.0;
        if (i0 == 0) {
          d0 = (-3.0 * val(grid.node(0, i1), i) + 4.0 * val(grid.node(1, i1), i) - val(grid.node(2, i1), i)) / (2.0 * h0);
        } else if (i0 == n0 - 1) {
          d0 = (3.0 * val(grid.node(n0 - 1, i1), i) - 4.0 * val(grid.node(n0 - 2, i1), i) +
                val(grid.node(n0 - 3, i1), i)) / (2.0 * h0);
        } else {
          d0 = (val(grid.node(i0 + 1, i1), i) - val(grid.node(i0 - 1, i1), i)) / (2.0 * h0);
        }
        jets[static_cast<std::size_t>((node * n + i) * k)] = d0;
        if (k == 2) {
          const int up = (i1 + 1) % n1;
          const int down = (i1 + n1 - 1) % n1;
          jets[static_cast<std::size_t>((node * n + i) * k + 1)] =
              (val(grid.node(i0, up), i) - val(grid.node(i0, down), i)) / (2.0 * h1);
        }
      }
    }
  }
  return jets;
}

SolutionGrid integrate_k1(const LagrangianModel& model, const Eigen::VectorXd& q0,
                          const Eigen::VectorXd& v0, const GridSpec& grid) {
  const auto& vars = model.vars();
  const int n = vars.n();
  if (vars.k() != 1 || grid.k() != 1) throw SolverError("integrate_k1 requires k = 1");
  if (q0.size() != n || v0.size() != n) throw DimensionMismatch("initial data needs n components");

  auto rhs = [&](const Eigen::VectorXd& y) {
    JetPoint w{y.head(n), y.tail(n)};
    const SopdeSolution s = sopde_solve(model, w);
    Eigen::VectorXd dy(2 * n);
    dy.head(n) = y.tail(n);
    for (int j = 0; j < n; ++j) dy[n + j] = s.vertical[static_cast<std::size_t>(j)](0, 0);
    return dy;
  };

  SolutionGrid sol{grid, n, {}, {}, {}, {}};
  const int steps = grid.axis(0).nodes();
  const double h = grid.axis(0).step;
  sol.values.resize(static_cast<std::size_t>(steps * n));
  sol.state_velocity.resize(static_cast<std::size_t>(steps * n));
  Eigen::VectorXd y(2 * n);
  y << q0, v0;
  for (int s = 0; s < steps; ++s) {
    for (int i = 0; i < n; ++i) {
      sol.values[static_cast<std::size_t>(s * n + i)] = y[i];
      sol.state_velocity[static_cast<std::size_t>(s * n + i)] = y[n + i];
    }
    if (s + 1 == steps) break;
    const Eigen::VectorXd k1 = rhs(y);
    const Eigen::VectorXd k2 = rhs(y + 0.5 * h * k1);
    const Eigen::VectorXd k3 = rhs(y + 0.5 * h * k2);
    const Eigen::VectorXd k4 = rhs(y + h * k3);
    y += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (!y.allFinite()) {
      throw SolverError("step rejected: non-finite state at t = " + std::to_string(grid.axis(0).coord(s + 1)));
    }
  }
  sol.jets = finite_difference_jets(grid, n, sol.values);
  return sol;
}

HyperbolicSystem hyperbolic_system(const LagrangianModel& model) {
  const auto& vars = model.vars();
  const int n = vars.n();
  const int k = vars.k();
  if (k != 2) throw SolverError("hyperbolic leapfrog requires k = 2");
  const Chart& chart = model.chart();

  // Quadratic iff every third partial derivative is identically zero.
  for (const auto& a : chart) {
    const Expr da = diff(model.lagrangian(), a);
    for (const auto& b : chart) {
      const Expr dab = diff(da, b);
      for (const auto& c : chart) {
        if (!diff(dab, c).is_zero()) {
          throw SolverError("not hyperbolic: Lagrangian is not quadratic (d^3L/d" + a + "d" + b + "d" + c +
                            " does not vanish)");
        }
      }
    }
  }

  const Eigen::VectorXd origin = Eigen::VectorXd::Zero(vars.total_dim());
  const Eigen::MatrixXd vv = model.hess_vv(origin);
  const Eigen::MatrixXd qv = model.hess_qv(origin);
  HyperbolicSystem sys;
  sys.h11.resize(n, n);
  sys.h22.resize(n, n);
  sys.c2.resize(n, n);
  sys.k.resize(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      sys.h11(i, j) = vv(i * k, j * k);
      sys.h22(i, j) = vv(i * k + 1, j * k + 1);
      if (vv(i * k, j * k + 1) != 0.0) {
        throw SolverError("not hyperbolic: mixed v_1 v_2 coupling prevents explicit leapfrog");
      }
      if (qv(i, j * k) != qv(j, i * k)) {
        throw SolverError("not hyperbolic: gyroscopic q-v_1 coupling prevents explicit leapfrog");
      }
      sys.c2(i, j) = qv(i, j * k + 1) - qv(j, i * k + 1);
      sys.k(i, j) = eval(diff(model.dq(i), vars.q(j)), {});
    }
  }
  sys.source = model.grad_q(origin);

  Eigen::LLT<Eigen::MatrixXd> llt(sys.h11);
  if (llt.info() != Eigen::Success) throw SolverError("not hyperbolic: v_1 Hessian block is not positive definite");
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> gen(-sys.h22, sys.h11);
  const Eigen::VectorXd speeds2 = gen.eigenvalues();
  if (speeds2.minCoeff() < -1e-12) throw SolverError("not hyperbolic: elliptic in t^2");
  sys.wave_speed = std::sqrt(std::max(0.0, speeds2.maxCoeff()));
  return sys;
}

SolutionGrid integrate_k2_hyperbolic(const LagrangianModel& model, std::span<const Expr> phi0,
                                     std::span<const Expr> phidot0, const GridSpec& grid) {
  const auto& vars = model.vars();
  const int n = vars.n();
  if (grid.k() != 2) throw SolverError("integrate_k2_hyperbolic requires a k = 2 grid");
  if (static_cast<int>(phi0.size()) != n || static_cast<int>(phidot0.size()) != n) {
    throw DimensionMismatch("initial data needs n components");
  }
  const HyperbolicSystem sys = hyperbolic_system(model);
  const Eigen::LLT<Eigen::MatrixXd> h11(sys.h11);

  const int nt = grid.axis(0).nodes();
  const int nx = grid.axis(1).nodes();
  const double ht = grid.axis(0).step;
  const double hx = grid.axis(1).step;

  SolutionGrid sol{grid, n, {}, {}, {}, {}};
  if (sys.wave_speed * ht / hx > 1.0) {
    sol.warnings.push_back("CFL violation: c*h1/h2 = " + std::to_string(sys.wave_speed * ht / hx) + " > 1");
  }
  sol.values.assign(static_cast<std::size_t>(nt * nx * n), 0.0);
  auto at = [&](int it, int ix, int i) -> double& {
    return sol.values[static_cast<std::size_t>(grid.node(it, ix) * n + i)];
  };

  // phi_11 = H11^-1 (source + K phi + C2 phi_2 - H22 phi_22) on time row `it`.
  auto acceleration = [&](int it) {
    Eigen::MatrixXd acc(n, nx);
    Eigen::VectorXd phi(n), d1(n), d2(n);
    for (int ix = 0; ix < nx; ++ix) {
      const int up = (ix + 1) % nx;
      const int down = (ix + nx - 1) % nx;
      for (int i = 0; i < n; ++i) {
        phi[i] = at(it, ix, i);
        d1[i] = (at(it, up, i) - at(it, down, i)) / (2.0 * hx);
        d2[i] = (at(it, up, i) - 2.0 * phi[i] + at(it, down, i)) / (hx * hx);
      }
      acc.col(ix) = h11.solve(sys.source + sys.k * phi + sys.c2 * d1 - sys.h22 * d2);
    }
    return acc;
  };

  Bindings b;
  for (int ix = 0; ix < nx; ++ix) {
    b[vars.t(1)] = grid.axis(1).coord(ix);
    for (int i = 0; i < n; ++i) at(0, ix, i) = eval(phi0[static_cast<std::size_t>(i)], b);
  }
  {
    const Eigen::MatrixXd acc = acceleration(0);
    for (int ix = 0; ix < nx; ++ix) {
      b[vars.t(1)] = grid.axis(1).coord(ix);
      for (int i = 0; i < n; ++i) {
        at(1, ix, i) = at(0, ix, i) + ht * eval(phidot0[static_cast<std::size_t>(i)], b) + 0.5 * ht * ht * acc(i, ix);
      }
    }
  }
  for (int it = 1; it + 1 < nt; ++it) {
    const Eigen::MatrixXd acc = acceleration(it);
    for (int ix = 0; ix < nx; ++ix) {
      for (int i = 0; i < n; ++i) {
        const double next = 2.0 * at(it, ix, i) - at(it - 1, ix, i) + ht * ht * acc(i, ix);
        if (!std::isfinite(next)) {
          throw SolverError("step rejected: non-finite state at t1 = " + std::to_string(grid.axis(0).coord(it + 1)));
        }
        at(it + 1, ix, i) = next;
      }
    }
  }
  sol.jets = finite_difference_jets(grid, n, sol.values);
  return sol;
}

double solution_error(const VarTable& vars, const SolutionGrid& sol, std::span<const Expr> exact) {
  if (static_cast<int>(exact.size()) != sol.n) throw DimensionMismatch("exact solution needs n components");
  const Chart tchart = vars.parameter_chart();
  const CompiledExprs reference(exact, tchart);
  double worst = 0.0;
  for (int node = 0; node < sol.grid.node_count(); ++node) {
    const auto t = sol.grid.coords(node);
    const Eigen::VectorXd tv = Eigen::Map<const Eigen::VectorXd>(t.data(), static_cast<Index>(t.size()));
    const Eigen::VectorXd ref = reference(tv);
    for (int i = 0; i < sol.n; ++i) worst = std::max(worst, std::abs(sol.value(node, i) - ref[i]));
  }
  return worst;
}

CurrentTrace evaluate_current(const VarTable& vars, std::span<const Expr> current,
                              const SolutionGrid& sol, Side side, const LagrangianModel* model) {
  const GridSpec& grid = sol.grid;
  const int k = grid.k();
  if (static_cast<int>(current.size()) != k) throw DimensionMismatch("current needs k components");
  if (vars.k() != k || vars.n() != sol.n) throw DimensionMismatch("current and solution dimensions differ");
  if (side == Side::Hamiltonian && model == nullptr) {
    throw Error("Hamiltonian-side currents need a Lagrangian model for the Legendre map");
  }
  const Chart chart = side == Side::Lagrangian ? vars.velocity_chart() : vars.momentum_chart();
  const CompiledExprs f(current, chart);

  const int nodes = grid.node_count();
  CurrentTrace trace;
  trace.k = k;
  trace.values.resize(static_cast<std::size_t>(nodes * k));
  for (int node = 0; node < nodes; ++node) {
    const JetPoint w = sol.jet_point(node);
    const Eigen::VectorXd x = side == Side::Lagrangian ? w.flat() : legendre(*model, w).flat();
    const Eigen::VectorXd values = f(x);
    for (int a = 0; a < k; ++a) trace.values[static_cast<std::size_t>(node * k + a)] = values[a];
  }

  auto fval = [&](int node, int a) { return trace.values[static_cast<std::size_t>(node * k + a)]; };
  const int n0 = grid.axis(0).nodes();
  const int n1 = k == 2 ? grid.axis(1).nodes() : 1;
  trace.divergence.assign(static_cast<std::size_t>(nodes), std::numeric_limits<double>::quiet_NaN());
  trace.interior.assign(static_cast<std::size_t>(nodes), 0);
  // Nodes 0 and n0-1 carry one-sided jets; keep them out of every divergence stencil.
  for (int i0 = 2; i0 + 2 < n0; ++i0) {
    for (int i1 = 0; i1 < n1; ++i1) {
      const int node = grid.node(i0, i1);
      double div = (fval(grid.node(i0 + 1, i1), 0) - fval(grid.node(i0 - 1, i1), 0)) / (2.0 * grid.axis(0).step);
      if (k == 2) {
        const int up = (i1 + 1) % n1;
        const int down = (i1 + n1 - 1) % n1;
        div += (fval(grid.node(i0, up), 1) - fval(grid.node(i0, down), 1)) / (2.0 * grid.axis(1).step);
      }
      trace.divergence[static_cast<std::size_t>(node)] = div;
      trace.interior[static_cast<std::size_t>(node)] = 1;
      trace.max_divergence = std::max(trace.max_divergence, std::abs(div));
    }
  }
  return trace;
}

void write_csv(std::ostream& out, const VarTable& vars, const SolutionGrid& sol, const CurrentTrace* trace) {
  const int k = sol.grid.k();
  const int n = sol.n;
  for (int a = 0; a < k; ++a) out << vars.t(a) << ',';
  for (int i = 0; i < n; ++i) out << vars.q(i) << ',';
  for (int i = 0; i < n; ++i)
    for (int a = 0; a < k; ++a) out << vars.v(i, a) << (i + 1 == n && a + 1 == k && !trace ? "" : ",");
  if (trace) {
    for (int a = 0; a < k; ++a) out << 'F' << (a + 1) << ',';
    out << "divergence,interior";
  }
  out << '\n';
  out << std::setprecision(17);
  for (int node = 0; node < sol.grid.node_count(); ++node) {
    for (double t : sol.grid.coords(node)) out << t << ',';
    for (int i = 0; i < n; ++i) out << sol.value(node, i) << ',';
    for (int i = 0; i < n; ++i)
      for (int a = 0; a < k; ++a) out << sol.jet(node, i, a) << (i + 1 == n && a + 1 == k && !trace ? "" : ",");
    if (trace) {
      for (int a = 0; a < k; ++a) out << trace->values[static_cast<std::size_t>(node * k + a)] << ',';
      const auto idx = static_cast<std::size_t>(node);
      if (trace->interior[idx]) out << trace->divergence[idx];
      out << ',' << static_cast<int>(trace->interior[idx]);
    }
    out << '\n';
  }
}

}  // namespace ksym
