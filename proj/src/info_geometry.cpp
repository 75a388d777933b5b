#include "gapflag/info_geometry.hpp"

#include <algorithm>
#include <cmath>

#include "gapflag/errors.hpp"

namespace gapflag {

MetricTensor fisher_metric_r(const GapVector& r) {
  const ProbVector p = probs_from_gaps(r);
  const int n = p.dim();
  if (p.values().minCoeff() < kValidationTol)
    throw SingularMetricError("Fisher metric is singular: some eigenvalue p_k vanishes");
  // n * M has integer entries, so the sum is exact up to the final scaling.
  const RealMatrix nm = jacobian_matrix(n) * static_cast<double>(n);
  const RealMatrix scaled = nm.array().round().matrix();
  const RealVector inv_p = p.values().cwiseInverse();
  MetricTensor out;
  out.n = n;
  out.g = scaled.transpose() * inv_p.asDiagonal() * scaled / static_cast<double>(n * n);
  out.g = 0.5 * (out.g + out.g.transpose()).eval();
  return out;
}

double kl_exact(const ProbVector& p) {
  const int n = p.dim();
  double d = 0.0;
  for (int k = 0; k < n; ++k) {
    if (p[k] <= 0.0) throw SingularMetricError("relative entropy undefined for zero probabilities");
    d += p[k] * std::log(n * p[k]);
  }
  return d;
}

double kl_quadratic(const GapVector& r) {
  const int n = r.dim();
  const RealMatrix ci = inverse_cartan(n).to_real();
  return 0.5 * n * r.values().dot(ci * r.values());
}

BuresDecomposition bures_decomposition(const GapVector& r) {
  const int n = r.dim();
  for (int a = 0; a < n - 1; ++a)
    if (r[a] < kValidationTol)
      throw DegeneracyError("degenerate spectrum: r_" + std::to_string(a + 1) +
                            " = 0, angular chart collapses");
  BuresDecomposition out;
  out.spectral_part = fisher_metric_r(r);
  out.spectral_part.g *= 0.25;
  const ProbVector p = probs_from_gaps(r);
  for (int i = 0; i < n; ++i) {
    double gap = 0.0;
    for (int j = i + 1; j < n; ++j) {
      gap += r[j - 1];
      out.angular_weights[{i, j}] = 0.5 * gap * gap / (p[i] + p[j]);
    }
  }
  return out;
}

double purity_from_probs(const ProbVector& p) {
  const int n = p.dim();
  const double l1 = (p.values().array() - 1.0 / n).abs().sum();
  return n / (2.0 * (n - 1)) * l1;
}

RealVector descending_eigenvalues(const ComplexMatrix& hermitian) {
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(hermitian, Eigen::EigenvaluesOnly);
  return es.eigenvalues().reverse();
}

double purity_trace_norm(const DensityMatrix& rho) {
  const RealVector evals = descending_eigenvalues(rho.matrix());
  const int n = rho.dim();
  return n / (2.0 * (n - 1)) * (evals.array() - 1.0 / n).abs().sum();
}

double purity_gap(const GapVector& r) {
  const int n = r.dim();
  const int kstar = crossover_index(r);
  double acc = 0.0;
  for (int a = 1; a <= n - 1; ++a)
    acc += static_cast<double>(std::min(a, kstar) * (n - std::max(a, kstar))) / n * r[a - 1];
  return n / static_cast<double>(n - 1) * acc;
}

double shannon_entropy(const ProbVector& p) {
  double h = 0.0;
  for (int k = 0; k < p.dim(); ++k)
    if (p[k] > 0.0) h -= p[k] * std::log(p[k]);
  return h;
}

}  // namespace gapflag
