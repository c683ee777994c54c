#pragma once

#include <cmath>
#include <optional>
#include <utility>

#include <Eigen/Eigenvalues>

#include "spinwalk/bath.hpp"
#include "spinwalk/errors.hpp"
#include "spinwalk/linalg.hpp"

namespace spinwalk {

inline int spins_from_dim(Eigen::Index dim) {
  int n = 0;
  while ((Eigen::Index{1} << n) < dim) ++n;
  if ((Eigen::Index{1} << n) != dim)
    throw ConfigError("state dimension must be a power of two");
  return n;
}

/// Bath state in either representation: a unit-norm pure vector or a
/// unit-trace density operator on the 2^N bath space.
class BathState {
 public:
  static BathState pure(VectorXcd psi) {
    const int n = spins_from_dim(psi.size());
    if (n > kMaxPureSpins)
      throw EngineLimitError("pure states capped at " +
                             std::to_string(kMaxPureSpins) + " spins");
    const double norm = psi.norm();
    if (std::abs(norm - 1.0) > 1e-9)
      throw ConfigError("pure state must have unit norm");
    psi /= norm;
    return BathState(n, std::move(psi), std::nullopt);
  }

  static BathState density(MatrixXcd rho) {
    if (rho.rows() != rho.cols())
      throw ConfigError("density operator must be square");
    const int n = spins_from_dim(rho.rows());
    if (n > kMaxDensitySpins)
      throw EngineLimitError("density operators capped at " +
                             std::to_string(kMaxDensitySpins) + " spins");
    if (max_abs(MatrixXcd(rho - rho.adjoint())) > 1e-10)
      throw ConfigError("density operator must be Hermitian");
    const double trace = rho.trace().real();
    if (std::abs(trace - 1.0) > 1e-9)
      throw ConfigError("density operator must have unit trace");
    rho /= trace;
    return BathState(n, std::nullopt, std::move(rho));
  }

  static BathState maximally_mixed(int n_spins) {
    if (n_spins < 1) throw ConfigError("n_spins must be >= 1");
    if (n_spins > kMaxDensitySpins)
      throw EngineLimitError("density operators capped at " +
                             std::to_string(kMaxDensitySpins) + " spins");
    const Eigen::Index dim = Eigen::Index{1} << n_spins;
    MatrixXcd rho = MatrixXcd::Identity(dim, dim) / static_cast<double>(dim);
    return BathState(n_spins, std::nullopt, std::move(rho));
  }

  /// Computational-basis state |index> with the first spin as the most
  /// significant bit.
  static BathState basis_state(int n_spins, std::uint64_t index) {
    if (n_spins < 1) throw ConfigError("n_spins must be >= 1");
    if (n_spins > kMaxPureSpins)
      throw EngineLimitError("pure states capped at " +
                             std::to_string(kMaxPureSpins) + " spins");
    const Eigen::Index dim = Eigen::Index{1} << n_spins;
    if (index >= static_cast<std::uint64_t>(dim))
      throw ConfigError("basis index out of range");
    VectorXcd psi = VectorXcd::Zero(dim);
    psi(static_cast<Eigen::Index>(index)) = 1.0;
    return BathState(n_spins, std::move(psi), std::nullopt);
  }

  bool is_pure() const { return pure_.has_value(); }
  int n_spins() const { return n_spins_; }
  Eigen::Index dim() const { return Eigen::Index{1} << n_spins_; }

  const VectorXcd& vector() const {
    if (!pure_) throw ConfigError("state is not in the pure representation");
    return *pure_;
  }
  const MatrixXcd& matrix() const {
    if (!density_) throw ConfigError("state is not in the density representation");
    return *density_;
  }

  MatrixXcd as_density() const {
    if (density_) return *density_;
    return (*pure_) * pure_->adjoint();
  }

  /// Full invariant check including positive semidefiniteness.
  void validate() const {
    if (pure_) {
      if (std::abs(pure_->norm() - 1.0) > 1e-12)
        throw ConfigError("pure state norm drifted from 1");
      return;
    }
    if (std::abs(density_->trace().real() - 1.0) > 1e-10)
      throw ConfigError("density trace drifted from 1");
    if (max_abs(MatrixXcd(*density_ - density_->adjoint())) > 1e-12)
      throw ConfigError("density operator not Hermitian");
    Eigen::SelfAdjointEigenSolver<MatrixXcd> solver(*density_,
                                                    Eigen::EigenvaluesOnly);
    if (solver.eigenvalues().minCoeff() < -1e-10)
      throw ConfigError("density operator has a negative eigenvalue");
  }

 private:
  BathState(int n_spins, std::optional<VectorXcd> psi, std::optional<MatrixXcd> rho)
      : n_spins_(n_spins), pure_(std::move(psi)), density_(std::move(rho)) {}

  int n_spins_;
  std::optional<VectorXcd> pure_;
  std::optional<MatrixXcd> density_;
};

/// Tr[rho^2] for density operators, exactly 1 for pure states.
inline double bath_purity(const BathState& state) {
  if (state.is_pure()) return 1.0;
  return state.matrix().squaredNorm();
}

}  // namespace spinwalk
