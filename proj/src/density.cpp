#include "gapflag/density.hpp"

#include <cmath>
#include <sstream>

#include "gapflag/errors.hpp"

namespace gapflag {

double hermiticity_defect(const ComplexMatrix& a) {
  return (a - a.adjoint()).cwiseAbs().maxCoeff();
}

double unitarity_defect(const ComplexMatrix& u) {
  return (u.adjoint() * u - ComplexMatrix::Identity(u.rows(), u.cols())).norm();
}

DensityMatrix::DensityMatrix(ComplexMatrix rho) : rho_(std::move(rho)) {
  if (rho_.rows() < 2 || rho_.rows() != rho_.cols())
    throw ValidationError("density matrix must be square with n >= 2");
  if (hermiticity_defect(rho_) > kValidationTol)
    throw ValidationError("density matrix is not Hermitian");
  if (std::abs(rho_.trace() - Complex(1.0)) > kValidationTol) {
    std::ostringstream os;
    os.precision(17);
    os << "density matrix trace is " << rho_.trace().real() << ", expected 1";
    throw ValidationError(os.str());
  }
  const ComplexMatrix herm = 0.5 * (rho_ + rho_.adjoint());
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(herm, Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() < -1e-10)
    throw ValidationError("density matrix is not positive semidefinite");
}

DensityMatrix DensityMatrix::maximally_mixed(int n) {
  return DensityMatrix(ComplexMatrix::Identity(n, n) / static_cast<double>(n));
}

UnitaryFrame::UnitaryFrame(ComplexMatrix u) : u_(std::move(u)) {
  if (u_.rows() < 1 || u_.rows() != u_.cols()) throw ValidationError("frame must be square");
  if (unitarity_defect(u_) > kValidationTol) throw ValidationError("frame is not unitary");
  if (std::abs(u_.determinant() - Complex(1.0)) > kValidationTol)
    throw ValidationError("frame does not have unit determinant");
}

UnitaryFrame UnitaryFrame::identity(int n) { return UnitaryFrame(ComplexMatrix::Identity(n, n)); }

}  // namespace gapflag
