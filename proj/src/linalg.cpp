#include "vbr/linalg.hpp"

#include "vbr/error.hpp"

#include <string>

namespace vbr::linalg {

Eigen::LLT<Matrix> spd_factor(const Matrix &m, std::string_view what) {
  if (m.rows() != m.cols() || m.rows() == 0 || !m.allFinite()) {
    throw DomainError(std::string(what) + " must be a finite square matrix");
  }
  Eigen::LLT<Matrix> llt(symmetrize(m));
  if (llt.info() != Eigen::Success) {
    throw DomainError(std::string(what) + " must be symmetric positive-definite");
  }
  return llt;
}

bool is_spd(const Matrix &m) {
  if (m.rows() != m.cols() || m.rows() == 0 || !m.allFinite()) {
    return false;
  }
  Eigen::LLT<Matrix> llt(symmetrize(m));
  return llt.info() == Eigen::Success;
}

bool is_psd(const Matrix &m, double rel_tol) {
  if (m.rows() != m.cols() || !m.allFinite()) {
    return false;
  }
  if (m.size() == 0) {
    return true;
  }
  Eigen::SelfAdjointEigenSolver<Matrix> eig(symmetrize(m), Eigen::EigenvaluesOnly);
  const double scale = std::max(1.0, eig.eigenvalues().cwiseAbs().maxCoeff());
  return eig.eigenvalues().minCoeff() >= -rel_tol * scale;
}

double log_det(const Eigen::LLT<Matrix> &factor) {
  return 2.0 * factor.matrixLLT().diagonal().array().log().sum();
}

Matrix spd_inverse(const Matrix &m, std::string_view what) {
  const auto llt = spd_factor(m, what);
  return symmetrize(llt.solve(Matrix::Identity(m.rows(), m.cols())));
}

} // namespace vbr::linalg
