#pragma once

#include <vector>

#include "qmi/mp_matrix.hpp"

namespace qmi::mp {

struct JacobiOptions {
  int max_sweeps = 50;
  bool want_vectors = true;
  // start from a double-precision eigenbasis (orthonormalized at working
  // precision) so only the quadratic Jacobi phase remains
  bool precondition = true;
};

struct SymJacobiResult {
  std::vector<Real> eigenvalues;  // ascending
  RealMat vectors;                // columns; empty when !want_vectors
  int sweeps = 0;
};

struct HermJacobiResult {
  std::vector<Real> eigenvalues;  // ascending (real)
  CplxMat vectors;
  int sweeps = 0;
};

// Production kernels; all parallel loops are element-partitioned with a fixed
// summation order, so results are bit-identical for any thread count.
//
// Real symmetric path: Householder tridiagonalization + implicit-shift QL.
// The correlation spectra handled here cluster doubly-exponentially at the
// interval ends, which stalls Jacobi sweeps but leaves QL unaffected.
SymJacobiResult eig_sym_tridql(RealMat A, int digits, const JacobiOptions& opt = {});

// Cyclic Jacobi with double-precision spectral preconditioning. Used for the
// complex Hermitian path (small dimensions) and as a second production route
// for cross-checks.
SymJacobiResult jacobi_sym(RealMat A, int digits, const JacobiOptions& opt = {});
HermJacobiResult jacobi_herm(CplxMat A, int digits, const JacobiOptions& opt = {});

void matmul(RealMat& out, const RealMat& a, const RealMat& b);
void matmul_abt(RealMat& out, const RealMat& a, const RealMat& b);  // a * b^T
void matmul(CplxMat& out, const CplxMat& a, const CplxMat& b);
void matmul_abh(CplxMat& out, const CplxMat& a, const CplxMat& b);  // a * b^dagger

// For products whose exact result is symmetric / Hermitian: compute the upper
// triangle only and mirror, so the output is symmetric at the storage level.
void matmul_sym_result(RealMat& out, const RealMat& a, const RealMat& b);
void matmul_abt_sym_result(RealMat& out, const RealMat& a, const RealMat& b);
void matmul_herm_result(CplxMat& out, const CplxMat& a, const CplxMat& b);
void matmul_abh_herm_result(CplxMat& out, const CplxMat& a, const CplxMat& b);

// Serial reference implementations: classic cyclic Jacobi with immediate
// updates and plain triple-loop products. Used by tests and the benchmark to
// cross-check the production kernels.
namespace serial_ref {
SymJacobiResult jacobi_sym_cyclic(RealMat A, int digits, const JacobiOptions& opt = {});
HermJacobiResult jacobi_herm_cyclic(CplxMat A, int digits, const JacobiOptions& opt = {});
void matmul(RealMat& out, const RealMat& a, const RealMat& b);
void matmul(CplxMat& out, const CplxMat& a, const CplxMat& b);
}  // namespace serial_ref

}  // namespace qmi::mp
