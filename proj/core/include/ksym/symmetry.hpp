#pragma once

#include <span>
#include <string>
#include <vector>

#include "ksym/bundles.hpp"
#include "ksym/check.hpp"
#include "ksym/forms.hpp"
#include "ksym/hamiltonian.hpp"
#include "ksym/lagrangian.hpp"
#include "ksym/solver.hpp"

namespace ksym {

// Infinitesimal checks. Y lives on the momentum chart for Hamiltonian models
// and on the velocity chart for Lagrangian models.

/// L(Y) omega^A = 0 for every A and Y(H) = 0.
CheckReport check_cartan_hamiltonian(const VectorField& y, const HamiltonianModel& model,
                                     const SampleSpec& samples, double tol = 1e-9);
/// L(Y) omega_L^A = 0 for every A and Y(E_L) = 0.
CheckReport check_cartan_lagrangian(const VectorField& y, const LagrangianModel& model,
                                    const SampleSpec& samples, double tol = 1e-9);
/// L(Z^C*) theta^A = 0 and L(Z^C*) omega^A = 0 on the momentum chart.
CheckReport check_cotangent_lift_invariance(const VarTable& vars, const VectorFieldQ& z,
                                            const SampleSpec& samples, double tol = 1e-9);

enum class Provenance { NaturalLift, UserSupplied };

/// Conserved current f = (f^1, ..., f^k) over the velocity or momentum chart.
struct NoetherCurrent {
  Side side = Side::Lagrangian;
  Provenance provenance = Provenance::NaturalLift;
  Chart chart;
  std::vector<Expr> f;
  /// i(Y) omega^A - df^A = 0 at the construction samples.
  CheckReport verification;
};

/// f^A = Z^V_A(L) - g^A.  Rejects with VerificationFailure when Z^C(L) != d_T g
/// at the samples (`g` empty means g = 0).
NoetherCurrent noether_current_lagrangian(const LagrangianModel& model, const VectorFieldQ& z,
                                          std::span<const Expr> g, const SampleSpec& samples,
                                          double tol = 1e-9);
/// f^A = i(Y) theta^A - zeta^A.  Requires Y to pass check_cartan_hamiltonian and
/// L(Y) theta^A = d zeta^A at the samples (`zeta` empty means zeta = 0).
NoetherCurrent noether_current_hamiltonian(const HamiltonianModel& model, const VectorField& y,
                                           std::span<const Expr> zeta, const SampleSpec& samples,
                                           double tol = 1e-9);

/// Symbolic total divergence sum_A d(f^A o phi)/dt^A for an analytic field phi(t).
/// Hamiltonian-side currents are composed with the Legendre image, which needs `model`.
Expr total_divergence(const VarTable& vars, const NoetherCurrent& current, std::span<const Expr> phi,
                      const LagrangianModel* model = nullptr);
Expr total_divergence(const VarTable& vars, const NoetherCurrent& current, const CoJetMap& psi);

/// Analytic mode: the total divergence vanishes at sampled parameter values.
CheckReport verify_conservation(const VarTable& vars, const NoetherCurrent& current,
                                std::span<const Expr> phi, const SampleSpec& t_samples,
                                double tol = 1e-9, const LagrangianModel* model = nullptr);
CheckReport verify_conservation(const VarTable& vars, const NoetherCurrent& current,
                                const CoJetMap& psi, const SampleSpec& t_samples, double tol = 1e-9);

struct GridConservationReport {
  double coarse_divergence = 0.0;
  double fine_divergence = 0.0;
  double ratio = 0.0;  // coarse / fine, nominally 4 for second-order grids
  bool ratio_in_range = false;
  bool pass = false;
  double tolerance = 0.0;
};

/// Grid mode: max interior divergence on a grid and on its refinement by 2.
/// Passes iff the coarse divergence is within `tol` and it decays at second
/// order (ratio in [3, 5]) or is already at rounding level.
GridConservationReport verify_conservation_grid(const VarTable& vars, const NoetherCurrent& current,
                                                const SolutionGrid& coarse, const SolutionGrid& fine,
                                                const LagrangianModel* model = nullptr,
                                                double tol = 1e-3);

/// sum_A X_A(f^A) = 0 for the canonical k-vector field of the model.
CheckReport verify_bracket_theorem(const HamiltonianModel& model, const NoetherCurrent& current,
                                   const SampleSpec& samples, double tol = 1e-9);
CheckReport verify_bracket_theorem(const LagrangianModel& model, const NoetherCurrent& current,
                                   const SampleSpec& samples, double tol = 1e-9);

// Finite symmetries induced by a diffeomorphism phi of Q.

/// (T^1_k)^* phi preserves every omega^A and H up to a constant; also checks the declared inverse.
CheckReport check_cartan_diffeomorphism(const HamiltonianModel& model, const QDiffeomorphism& phi,
                                        const SampleSpec& samples, double tol = 1e-9);
/// T^1_k phi preserves every omega_L^A and E_L up to a constant; also checks the declared inverse.
CheckReport check_cartan_diffeomorphism(const LagrangianModel& model, const QDiffeomorphism& phi,
                                        const SampleSpec& samples, double tol = 1e-9);

struct TransportReport {
  CheckReport input;  // field-equation residual of the given solution
  CheckReport image;  // residual of its image, judged at `tolerance`
  double tolerance = 0.0;
  bool pass = false;
};

/// Maps an analytic solution through the induced diffeomorphism and measures
/// the field-equation residual of the image.  Tolerance is base_tol plus ten
/// times the input residual.
TransportReport check_symmetry_by_transport(const HamiltonianModel& model, const QDiffeomorphism& phi,
                                            const CoJetMap& psi, const SampleSpec& t_samples,
                                            double base_tol = 1e-9);
TransportReport check_symmetry_by_transport(const LagrangianModel& model, const QDiffeomorphism& phi,
                                            std::span<const Expr> sol, const SampleSpec& t_samples,
                                            double base_tol = 1e-9);

/// Image of an analytic field under phi: t -> phi(sol(t)).
std::vector<Expr> transport(const QDiffeomorphism& phi, const VarTable& vars, std::span<const Expr> sol);
/// Image of an analytic cojet map under (T^1_k)^* phi.
CoJetMap transport(const QDiffeomorphism& phi, const VarTable& vars, const CoJetMap& psi);

/// Pullback of a current through the induced diffeomorphism: F o Phi.
NoetherCurrent pullback(const NoetherCurrent& current, const VarTable& vars, const QDiffeomorphism& phi);

}  // namespace ksym
