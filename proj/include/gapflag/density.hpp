#pragma once

#include "gapflag/types.hpp"

namespace gapflag {

/// Hermitian, unit-trace, positive semidefinite n x n matrix.
class DensityMatrix {
public:
  /// Hermitian and trace to 1e-12, eigenvalues >= -1e-10; throws ValidationError.
  explicit DensityMatrix(ComplexMatrix rho);

  int dim() const { return static_cast<int>(rho_.rows()); }
  const ComplexMatrix& matrix() const { return rho_; }

  static DensityMatrix maximally_mixed(int n);

private:
  ComplexMatrix rho_;
};

/// Special unitary frame U = (u_1, ..., u_n); columns are eigenvectors.
class UnitaryFrame {
public:
  /// U^dagger U = 1 and det U = 1, both to 1e-12; throws ValidationError.
  explicit UnitaryFrame(ComplexMatrix u);

  int dim() const { return static_cast<int>(u_.rows()); }
  const ComplexMatrix& matrix() const { return u_; }
  ComplexVector column(int i) const { return u_.col(i); }

  static UnitaryFrame identity(int n);

private:
  ComplexMatrix u_;
};

/// Largest |a_ij - conj(a_ji)|.
double hermiticity_defect(const ComplexMatrix& a);
/// Frobenius norm of U^dagger U - 1.
double unitarity_defect(const ComplexMatrix& u);

}  // namespace gapflag
