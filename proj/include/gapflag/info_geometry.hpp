#pragma once

// Information geometry in gap coordinates: Fisher-Rao pullback, relative
// entropy to the uniform spectrum, Bures split, and the trace-distance
// purity functional R(rho).

#include <map>
#include <utility>

#include "gapflag/density.hpp"
#include "gapflag/spectral_core.hpp"

namespace gapflag {

struct MetricTensor {
  int n = 0;
  RealMatrix g;  // (n-1) x (n-1), symmetric
};

struct BuresDecomposition {
  MetricTensor spectral_part;
  /// Coefficient of |theta_ij|^2, theta = U^dagger dU, keyed by 0-based (i, j), i < j,
  /// in the split ds^2 = spectral + sum_{i<j} w_ij |theta_ij|^2 with
  /// w_ij = (p_i - p_j)^2 / (2 (p_i + p_j)). The second-order expansion of
  /// 2(1 - sqrt(F)), which reproduces the spectral part, gives 2 w_ij.
  std::map<std::pair<int, int>, double> angular_weights;
};

/// g_ab = sum_k M_ka M_kb / p_k. Throws SingularMetricError if some p_k < 1e-12.
MetricTensor fisher_metric_r(const GapVector& r);

/// D(p || u_n) = sum_k p_k ln(n p_k). Throws SingularMetricError on p_k <= 0.
double kl_exact(const ProbVector& p);
/// (n/2) r^T C^{-1} r, the quadratic part of kl_exact around r = 0.
double kl_quadratic(const GapVector& r);

/// Spectral part is fisher/4; angular weight (i,j) is
/// (1/2)(r_i + ... + r_{j-1})^2 / (p_i + p_j). Throws DegeneracyError if any
/// r_a < 1e-12.
BuresDecomposition bures_decomposition(const GapVector& r);

/// (n / (2(n-1))) sum_i |p_i - 1/n| for a descending spectrum.
double purity_from_probs(const ProbVector& p);
/// Eigenvalues of rho, then purity_from_probs.
double purity_trace_norm(const DensityMatrix& rho);
/// (n/(n-1)) sum_a (C^{-1})_{a,k*} r_a. Propagates CrossoverTieError.
double purity_gap(const GapVector& r);

/// -sum p ln p, with 0 ln 0 = 0.
double shannon_entropy(const ProbVector& p);

/// Eigenvalues of a Hermitian matrix, descending.
RealVector descending_eigenvalues(const ComplexMatrix& hermitian);

}  // namespace gapflag
