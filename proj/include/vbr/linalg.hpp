#pragma once

#include <Eigen/Dense>
#include <string_view>

namespace vbr::linalg {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

inline Matrix symmetrize(const Matrix &m) { return 0.5 * (m + m.transpose()); }

/// Cholesky factor of an SPD matrix; throws DomainError naming `what` otherwise.
Eigen::LLT<Matrix> spd_factor(const Matrix &m, std::string_view what);

bool is_spd(const Matrix &m);

/// Positive semi-definite up to a relative tolerance on the smallest eigenvalue.
bool is_psd(const Matrix &m, double rel_tol = 1e-10);

double log_det(const Eigen::LLT<Matrix> &factor);

Matrix spd_inverse(const Matrix &m, std::string_view what);

/// Column-major D x D block stored contiguously in a flat vector.
inline Eigen::Map<const Matrix> matrix_block(const Vector &flat, Eigen::Index offset,
                                             Eigen::Index dim) {
  return {flat.data() + offset, dim, dim};
}

inline Eigen::Map<Matrix> matrix_block(Vector &flat, Eigen::Index offset, Eigen::Index dim) {
  return {flat.data() + offset, dim, dim};
}

} // namespace vbr::linalg
