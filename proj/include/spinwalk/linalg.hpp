#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <vector>

namespace spinwalk {

using Eigen::Matrix2cd;
using Eigen::MatrixXcd;
using Eigen::VectorXcd;
using complexd = std::complex<double>;

inline MatrixXcd kron(const MatrixXcd& a, const MatrixXcd& b) {
  MatrixXcd out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

/// Tensor product of per-spin 2x2 blocks, index k ascending, leftmost factor
/// first (canonical spin ordering).
inline MatrixXcd tensor_product(const std::vector<Matrix2cd>& blocks) {
  MatrixXcd out = MatrixXcd::Identity(1, 1);
  for (const auto& b : blocks) out = kron(out, b);
  return out;
}

inline double max_abs(const MatrixXcd& m) { return m.cwiseAbs().maxCoeff(); }

inline double unitarity_residual(const MatrixXcd& u) {
  return max_abs(u.adjoint() * u - MatrixXcd::Identity(u.rows(), u.cols()));
}

/// In-place single-spin gate on a 2^n state vector. Spin positions count from
/// the left: position 0 owns the most significant bit of the basis index.
inline void apply_single_spin(VectorXcd& psi, const Matrix2cd& u, int position, int n_spins) {
  const std::uint64_t stride = std::uint64_t{1} << (n_spins - 1 - position);
  const std::uint64_t dim = std::uint64_t{1} << n_spins;
  for (std::uint64_t base = 0; base < dim; base += 2 * stride) {
    for (std::uint64_t offset = 0; offset < stride; ++offset) {
      const std::uint64_t i0 = base + offset;
      const std::uint64_t i1 = i0 + stride;
      const complexd a = psi[static_cast<Eigen::Index>(i0)];
      const complexd b = psi[static_cast<Eigen::Index>(i1)];
      psi[static_cast<Eigen::Index>(i0)] = u(0, 0) * a + u(0, 1) * b;
      psi[static_cast<Eigen::Index>(i1)] = u(1, 0) * a + u(1, 1) * b;
    }
  }
}

}  // namespace spinwalk
