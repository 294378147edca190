#pragma once

#include <functional>
#include <vector>

#include "qmi/mp_kernels.hpp"
#include "qmi/precision.hpp"

namespace qmi::mp {

// Eigendecomposition of a real symmetric matrix, eigenvalues ascending.
struct SymEigen {
  std::vector<Real> eigenvalues;
  RealMat vectors;  // columns
};

// Eigendecomposition of a complex Hermitian matrix, eigenvalues ascending.
struct HermEigen {
  std::vector<Real> eigenvalues;
  CplxMat vectors;
};

SymEigen eigh(const RealMat& m, const PrecisionPolicy& policy, bool want_vectors = true);
HermEigen eigh(const CplxMat& m, const PrecisionPolicy& policy, bool want_vectors = true);

// Eigenvalues in (-10^(10-digits), 0) are clamped to 0; anything more negative
// is a hard domain error when `strict` is set. The correlation spectra handled
// here are in [0, 1] analytically, so negatives are roundoff by construction.
void clamp_psd(std::vector<Real>& eigenvalues, int digits, bool strict, const char* what);

// U diag(f(lambda)) U^T from a precomputed eigensystem.
RealMat spectral_map(const SymEigen& es, const std::function<void(Real&, const Real&)>& f);
CplxMat spectral_map(const HermEigen& es, const std::function<void(Real&, const Real&)>& f);

// M^p for PSD M (tiny negative eigenvalues clamped). Integer p is evaluated
// with integer powers so mildly indefinite inputs still work.
RealMat mat_power_psd(const RealMat& m, double p, const PrecisionPolicy& policy);
CplxMat mat_power_psd(const CplxMat& m, double p, const PrecisionPolicy& policy);

// sum of log(eigenvalue) over the clamped spectrum; singular if any
// eigenvalue is <= 0 after clamping.
Real logdet_psd(const RealMat& m, const PrecisionPolicy& policy);
Real logdet_psd(const CplxMat& m, const PrecisionPolicy& policy);

// max_ij |M - U diag(evals) U^T|_ij, for tests
Real reconstruction_residual(const RealMat& m, const SymEigen& es);
Real reconstruction_residual(const CplxMat& m, const HermEigen& es);
Real unitarity_residual(const RealMat& vectors);
Real unitarity_residual(const CplxMat& vectors);

}  // namespace qmi::mp
