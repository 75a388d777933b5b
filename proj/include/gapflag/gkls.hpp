#pragma once

// GKLS (Lindblad) evolution of density matrices, directly and in the split
// form where the gap vector r follows the diagonal of the dissipator in the
// instantaneous eigenbasis and the frame U rotates with U' = U Omega~.

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "gapflag/density.hpp"
#include "gapflag/spectral_core.hpp"

namespace gapflag {

class LindbladModel {
public:
  /// H Hermitian to 1e-12, one non-negative rate per jump, matching shapes.
  LindbladModel(ComplexMatrix hamiltonian, std::vector<ComplexMatrix> jumps,
                std::vector<double> rates);

  int dim() const { return static_cast<int>(h_.rows()); }
  const ComplexMatrix& hamiltonian() const { return h_; }
  const std::vector<ComplexMatrix>& jumps() const { return jumps_; }
  const std::vector<double>& rates() const { return rates_; }

  LindbladModel with_hamiltonian(ComplexMatrix hamiltonian) const;

private:
  ComplexMatrix h_;
  std::vector<ComplexMatrix> jumps_;
  std::vector<double> rates_;
};

/// sum_k h_k (L_k rho L_k^dagger - {rho, L_k^dagger L_k}/2)
ComplexMatrix dissipator(const ComplexMatrix& rho, const LindbladModel& model);
/// -i[H, rho] + dissipator(rho)
ComplexMatrix lindblad_rhs(const ComplexMatrix& rho, const LindbladModel& model);
ComplexMatrix lindblad_rhs(const DensityMatrix& rho, const LindbladModel& model);

/// Gaussian Hermitian H (entries ~ scale), `jump_count` complex Gaussian jump
/// operators with entries of variance 1/n, unit rates.
LindbladModel random_lindblad_model(int n, int jump_count, std::uint64_t seed,
                                    double hamiltonian_scale = 1.0, double jump_scale = 1.0);

/// Moving-frame state of the split integrator.
struct SplitState {
  GapVector r;
  ComplexMatrix u;
  double t = 0.0;
};

/// Smallest adjacent gap tolerated by the split machinery.
inline constexpr double kDegeneracyThreshold = 1e-8;

struct SplitRates {
  RealVector r_dot;
  RealVector p_dot;              // M r_dot
  RealVector dissipator_diag;    // D_i, diagonal of U^dagger L_diss[rho] U
  ComplexMatrix dissipator_tilde;  // U^dagger L_diss[rho] U
  ComplexMatrix omega_tilde;     // U^dagger U', zero diagonal
  ComplexMatrix omega;           // U Omega~ U^dagger = U' U^dagger
};

/// Throws DegeneracyError if min_a r_a <= kDegeneracyThreshold.
SplitRates split_rhs(const SplitState& state, const LindbladModel& model);
/// Raw form used inside integrator stages, where u may be off-unitary by O(dt^5).
SplitRates split_rhs(const RealVector& r, const ComplexMatrix& u, const LindbladModel& model);

struct StepDiagnostics {
  double trace_error = 0.0;     // |tr rho - 1| before renormalization
  double min_eigenvalue = 0.0;
  double min_gap = 0.0;         // smallest adjacent eigenvalue gap
  double frame_drift = 0.0;     // ||U^dagger U - 1||_F before polar correction (split only)
};

struct Trajectory {
  std::string method;
  std::vector<double> times;
  std::vector<ComplexMatrix> states;
  std::vector<RealVector> gaps;         // descending-eigenvalue gaps at each record
  std::vector<ComplexMatrix> frames;    // split records only
  std::vector<StepDiagnostics> diagnostics;
  /// Set when the split chart broke down and the run continued directly.
  std::optional<double> breakdown_time;
};

struct IntegrationOptions {
  /// Record one state every `record_every` steps; the final state is always recorded.
  std::size_t record_every = 1;
  /// On chart breakdown, finish the run with integrate_direct instead of throwing.
  bool fallback_to_direct = false;
  double positivity_tolerance = 1e-8;
};

/// Fixed-step RK4 on rho with per-step Hermitization and trace renormalization.
/// Throws PositivityError if an eigenvalue falls below -positivity_tolerance.
Trajectory integrate_direct(const DensityMatrix& rho0, const LindbladModel& model, double t_end,
                            double dt, const IntegrationOptions& options = {});

/// Fixed-step RK4 on (r, U) with polar re-orthonormalization of U each step.
/// Throws DegeneracyError carrying the breakdown time unless fallback is enabled.
Trajectory integrate_split(const DensityMatrix& rho0, const LindbladModel& model, double t_end,
                           double dt, const IntegrationOptions& options = {});

/// Number of RK4 steps for [0, t_end] with step at most dt.
std::size_t step_count(double t_end, double dt);

// -- qubit closed form ------------------------------------------------------

struct QubitAngles {
  double r = 0.0;
  double theta = 0.0;
  double phi = 0.0;
};

struct QubitRates {
  double phi_dot = 0.0;
  double theta_dot = 0.0;
  double r_dot = 0.0;
};

/// Pauli jumps L_k = sigma_k with rates (h_1, h_2, h_3) and Hamiltonian H.
LindbladModel pauli_model(const ComplexMatrix& hamiltonian, const std::array<double, 3>& rates);

/// Closed-form angular and radial rates for the Pauli-channel qubit.
/// Throws DegeneracyError when r <= 0 or sin(theta) <= 1e-8.
QubitRates qubit_rhs(const QubitAngles& state, const ComplexMatrix& hamiltonian,
                     const std::array<double, 3>& rates);

/// The same rates obtained from split_rhs with U = U(theta, phi), by tracking
/// the Bloch vector of the first column.
QubitRates qubit_rates_from_split(const QubitAngles& state, const LindbladModel& model);

/// rho = (1 + r u(theta,phi) . sigma) / 2
DensityMatrix qubit_density(const QubitAngles& state);

// -- real qutrit --------------------------------------------------------------

struct QutritEuler {
  double r1 = 0.0;
  double r2 = 0.0;
  double alpha = 0.0;
  double beta = 0.0;
  double gamma = 0.0;
};

struct QutritRates {
  double alpha_dot = 0.0;
  double beta_dot = 0.0;
  double gamma_dot = 0.0;
  double r1_dot = 0.0;
  double r2_dot = 0.0;
  Eigen::Matrix3d omega;  // U^T U'
  Eigen::Vector3d d;      // diagonal dissipator entries in the frame
  Eigen::Matrix3d k;      // off-diagonal dissipator entries in the frame
};

/// R_z(alpha) R_y(beta) R_z(gamma)
Eigen::Matrix3d euler_rotation(double alpha, double beta, double gamma);
/// U^T U' for the zyz Euler chart at the given angle rates.
Eigen::Matrix3d euler_omega(const QutritEuler& state, double alpha_dot, double beta_dot,
                            double gamma_dot);

/// Real qutrit with rho' = [A, rho] + L_diss[rho]; only the jumps and rates of
/// `dissipator` are used, and they must map real symmetric matrices to real
/// symmetric matrices.
QutritRates real_qutrit_rhs(const QutritEuler& state, const Eigen::Matrix3d& a,
                            const LindbladModel& dissipator);

DensityMatrix real_qutrit_density(const QutritEuler& state);

// -- secular factorization ------------------------------------------------------

struct SecularReport {
  bool factorized = false;
  /// Largest |k_ij/(p_i - p_j) - reference| across probes, per 0-based pair.
  std::map<std::pair<int, int>, double> spread;
  double max_spread = 0.0;
  std::vector<RealVector> probes;
};

/// Evaluates k_ij/(p_i - p_j) at the frame of `state` for the state's own gap
/// vector and a fixed family of interior probes; factorized iff every ratio
/// varies by less than `tolerance`.
SecularReport secular_factorization_test(const LindbladModel& model, const SplitState& state,
                                         double tolerance);

}  // namespace gapflag
