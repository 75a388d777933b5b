#pragma once

// SU(n) angular coordinates: embedded su(2) rotations, the coset product
// over pairs (i, j), the flag-manifold measure, Monte-Carlo frames on the
// flag manifold, and covariant quantization.
//
// Pairs (i, j) are 0-based with i < j. They are stored in lexicographic
// order (0,1), (0,2), ..., (0,n-1), (1,2), ..., which is also the order of
// the coset product.

#include <cstdint>
#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include "gapflag/density.hpp"
#include "gapflag/random.hpp"
#include "gapflag/spectral_core.hpp"

namespace gapflag {

/// Lexicographic position of pair (i, j), i < j, among the n(n-1)/2 pairs.
int pair_index(int n, int i, int j);
std::vector<std::pair<int, int>> lexicographic_pairs(int n);

class AngleSet {
public:
  /// All angles zero, no torus phases.
  explicit AngleSet(int n);
  /// theta_ij in [0, pi], phi_ij in [0, 2pi), both in lexicographic pair order;
  /// torus, if present, holds n-1 phases.
  AngleSet(int n, std::vector<double> theta, std::vector<double> phi,
           std::optional<std::vector<double>> torus = std::nullopt);

  int dim() const { return n_; }
  int pair_count() const { return static_cast<int>(theta_.size()); }
  double theta(int i, int j) const { return theta_[pair_index(n_, i, j)]; }
  double phi(int i, int j) const { return phi_[pair_index(n_, i, j)]; }
  const std::vector<double>& thetas() const { return theta_; }
  const std::vector<double>& phis() const { return phi_; }
  const std::optional<std::vector<double>>& torus() const { return torus_; }

private:
  int n_;
  std::vector<double> theta_;
  std::vector<double> phi_;
  std::optional<std::vector<double>> torus_;
};

/// Uniform draw from the angle box [0,pi]^{pairs} x [0,2pi)^{pairs}.
AngleSet uniform_angles(int n, Rng& rng, bool with_torus = false);

/// sigma_k^{(i,j)}, k in {1, 2, 3}: the Pauli matrix embedded in the (i,j) plane.
ComplexMatrix embedded_generator(int n, int i, int j, int k);

/// Orthonormal Cartan generator H_l for l = 1..n-1 (trace-orthonormal, traceless).
RealMatrix cartan_generator(int n, int l);

/// exp(-i phi s3/2) exp(-i theta s2/2) exp(i phi s3/2) on the (i,j) block.
UnitaryFrame rotation_factor(int n, int i, int j, double theta, double phi);

/// Ordered product of rotation factors, pairs in lexicographic order.
UnitaryFrame coset_unitary(const AngleSet& angles);
/// coset_unitary(angles) * exp(i sum_l phi_l H_l). Requires torus phases.
UnitaryFrame full_unitary(const AngleSet& angles);

/// Closed-form qutrit coset matrix in terms of c_ij = cos(theta_ij/2),
/// s_ij = sin(theta_ij/2) and the three phases.
ComplexMatrix qutrit_coset_closed_form(const AngleSet& angles);

/// 1/n + sum_a r_a U omega_a U^dagger.
DensityMatrix assemble_density(const GapVector& r, const AngleSet& angles);
DensityMatrix assemble_density(const GapVector& r, const ComplexMatrix& u);

struct SpectralFrame {
  GapVector r;
  UnitaryFrame frame;
};

/// Threshold on the smallest adjacent eigenvalue gap for eigendecompose_ordered.
inline constexpr double kFrameGapThreshold = 1e-10;

/// Descending eigenvalues and a phase-fixed special unitary frame with
/// rho = U diag(p) U^dagger. Throws DegeneracyError if the spectrum has a gap
/// below kFrameGapThreshold.
SpectralFrame eigendecompose_ordered(const DensityMatrix& rho);

/// Phase convention: the largest-modulus entry of each column is made real
/// positive, then the last column absorbs conj(det) so that det = 1.
ComplexMatrix fix_frame_phases(ComplexMatrix u);

/// Normalized flag-manifold density with respect to prod dtheta_ij dphi_ij.
double flag_density(const AngleSet& angles);
/// Lebesgue volume of the angle box, (2 pi^2)^{n(n-1)/2}.
double angle_box_volume(int n);

/// Invariant-measure frames: orthonormalized complex Gaussian matrices,
/// then fix_frame_phases. Deterministic given the seed.
class FlagSampler {
public:
  FlagSampler(int n, std::uint64_t seed);
  UnitaryFrame next();
  ComplexMatrix next_matrix();
  int dim() const { return n_; }

private:
  int n_;
  Rng rng_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

UnitaryFrame sample_flag(int n, std::uint64_t seed);

/// Number of independent sub-seed shards used by the Monte-Carlo estimators.
inline constexpr int kMonteCarloShards = 8;

struct MonteCarloMatrix {
  ComplexMatrix mean;
  /// Per-entry standard error of the mean (real and imaginary parts combined).
  RealMatrix standard_error;
  double frobenius_error = 0.0;  // ||mean - target||_F
  std::uint64_t samples = 0;
  std::uint64_t seed = 0;
};

/// Average of n |u_i><u_i| over N invariant frames; target is the identity.
/// Column index i is 0-based.
MonteCarloMatrix resolution_check(int n, int column, std::uint64_t samples, std::uint64_t seed);

using FlagFunction = std::function<double(const UnitaryFrame&)>;

/// Monte-Carlo estimate of Op_f = int f(F) n rho_{r,F} dmu(F). The reported
/// Frobenius error is measured against the identity (the f == 1 value).
MonteCarloMatrix quantize(const FlagFunction& f, const GapVector& r, std::uint64_t samples,
                          std::uint64_t seed);

/// (4 pi)^{n(n-1)/2} / prod_{m=1}^{n-1} m!
double flag_volume(int n);
/// Vol(R_{n-1}) * flag_volume(n).
double state_space_volume(int n);

}  // namespace gapflag
