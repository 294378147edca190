#pragma once

#include <Eigen/Dense>
#include <vector>

#include "qmi/errors.hpp"
#include "qmi/mp_linalg.hpp"

namespace qmi::dm {

// Dense density matrix. digits == 16 evaluates in double precision; anything
// larger routes the spectral pipeline through the multi-precision kernels
// (needed where strongly negative exponents amplify small eigenvalues).
struct DensityMatrix {
  int digits = 16;
  Eigen::MatrixXcd m;

  int dim() const { return static_cast<int>(m.rows()); }

  // Hermitian, unit trace, eigenvalues >= -tol
  void validate() const;

  static DensityMatrix from_dense(Eigen::MatrixXcd mat, int digits = 16) {
    DensityMatrix r;
    r.m = std::move(mat);
    r.digits = digits;
    r.validate();
    return r;
  }
};

// ---- entropies -------------------------------------------------------------

double vn_entropy(const DensityMatrix& rho);
double renyi_entropy(const DensityMatrix& rho, double alpha);

// S(A) + S(B) - S(AB); rho_a, rho_b must be the partial traces of rho_ab.
double vn_mi(const DensityMatrix& rho_ab, const DensityMatrix& rho_a, const DensityMatrix& rho_b);

// S_alpha(A) + S_alpha(B) - S_alpha(AB) for the (dim_a, dim_b) factorization.
// May be negative; that is the point of keeping it around.
double entropy_based_rmi(const DensityMatrix& rho_ab, int dim_a, int dim_b, double alpha);

// ---- divergences -----------------------------------------------------------

// (1/(alpha-1)) log Tr (sigma^((1-alpha)/(2z)) rho^(alpha/z) sigma^((1-alpha)/(2z)))^z
double az_divergence(const DensityMatrix& rho, const DensityMatrix& sigma, double alpha, double z);

// az divergence against rho_A (x) rho_B built internally by partial traces
double az_rmi(const DensityMatrix& rho_ab, int dim_a, int dim_b, double alpha, double z);

// (1/(alpha-1)) log Tr[sigma (sigma^(-1/2) rho sigma^(-1/2))^alpha]
double geometric_divergence(const DensityMatrix& rho, const DensityMatrix& sigma, double alpha);

// ---- partial traces --------------------------------------------------------

// trace out the second / first tensor factor of a (dim_a * dim_b) system
Eigen::MatrixXcd ptrace_second(const Eigen::MatrixXcd& rho_ab, int dim_a, int dim_b);
Eigen::MatrixXcd ptrace_first(const Eigen::MatrixXcd& rho_ab, int dim_a, int dim_b);

// qubit-register partial trace: keep the listed sites (0-indexed, site 0 is
// the least significant bit), trace the rest
Eigen::MatrixXcd partial_trace(const Eigen::VectorXcd& state, int n_sites,
                               const std::vector<int>& keep);
Eigen::MatrixXcd partial_trace(const Eigen::MatrixXcd& rho, int n_sites,
                               const std::vector<int>& keep);

Eigen::MatrixXcd kron(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b);

}  // namespace qmi::dm
