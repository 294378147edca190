#pragma once

#include "qmi/density_matrix.hpp"
#include "qmi/free_fermion.hpp"

namespace qmi::dm {

// Dense density matrix of the unique fermionic Gaussian state with two-point
// functions <c^dag_i c_j> = C_ij, assembled in the Jordan-Wigner
// representation of the rotated modes. Brute force: dim(C) <= 12.
DensityMatrix gaussian_rho(const ff::CorrMatrix& c, int digits = 16);

// Same construction from an explicit complex matrix with spectrum in [0, 1].
DensityMatrix gaussian_rho(const Eigen::MatrixXcd& corr, int digits = 16);

// <c^dag_i c_j> moments of a dense state, for reconstruction checks
Eigen::MatrixXcd gaussian_moments(const Eigen::MatrixXcd& rho, int n_modes);

}  // namespace qmi::dm
