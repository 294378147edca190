#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "qmi/density_matrix.hpp"

namespace qmi::imps {

// Translation-invariant infinite MPS: D matrices of size chi x chi. One tensor
// represents unit_cell_sites physical lattice sites.
struct IMPS {
  int phys_dim = 2;
  int bond_dim = 1;
  int unit_cell_sites = 2;
  std::vector<Eigen::MatrixXcd> tensor;  // indexed by the physical label
  double rescale_factor = 1.0;           // applied at load so lambda_1 = 1

  void validate_shapes() const;
};

// transfer matrix T = sum_i A_i (x) conj(A_i), chi^2 x chi^2
Eigen::MatrixXcd transfer_matrix(const IMPS& s);

// top-k eigenpairs sorted by descending magnitude with biorthonormal
// left/right vectors (left vectors are rows of V^{-1}, so <l_a|r_b> = delta)
struct TransferSpectrum {
  Eigen::VectorXcd eigenvalues;
  Eigen::MatrixXcd right;  // columns
  Eigen::MatrixXcd left;   // rows
};

TransferSpectrum transfer_spectrum(const IMPS& s, int k);

// loader: validates the documented JSON format, checks injectivity through the
// leading-eigenvalue gap, rescales so lambda_1 = 1
IMPS load_imps(const std::string& path);
void save_imps(const IMPS& s, const std::string& path);
IMPS normalize_imps(IMPS s);  // the loader's gap check + rescale, for in-memory states

// reduced density matrix of n_tensors adjacent tensors
dm::DensityMatrix rdm_interval(const IMPS& s, int n_tensors);

// disjoint intervals of nA and nB tensors separated by gap tensors;
// truncation: all chi^2 pairs kept for chi <= 32, else |lambda|^gap >= 1e-16
struct DisjointRdm {
  dm::DensityMatrix rho;
  double truncation_bound = 0.0;
  double asymmetry = 0.0;  // Hermiticity repair size
};
DisjointRdm rdm_disjoint(const IMPS& s, int n_a, int gap, int n_b);

// xi = -unit_cell_sites / log|lambda_2|; 0 for bond dimension 1
double correlation_length(const IMPS& s);

// finite-window oracles: the same matrix elements from a length-n_window
// periodic closure evaluated with plain transfer-matrix powers (no
// eigendecomposition); used to cross-check the spectral route
Eigen::MatrixXcd finite_window_rdm_interval(const IMPS& s, int n_tensors, int n_window);
Eigen::MatrixXcd finite_window_rdm_disjoint(const IMPS& s, int n_a, int gap, int n_b,
                                            int n_window);

// deterministic random injective state (entries from a seeded generator),
// normalized; used by tests and the fixture generator tool
IMPS random_imps(int phys_dim, int bond_dim, unsigned seed, int unit_cell_sites = 2);

}  // namespace qmi::imps
