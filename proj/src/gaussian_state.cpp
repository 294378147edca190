#include "qmi/gaussian_state.hpp"

#include <cmath>

namespace qmi::dm {

using Eigen::MatrixXcd;
using Eigen::VectorXcd;
using Eigen::VectorXd;

namespace {

// c^dag_i on the JW register: |s> -> (-1)^(popcount below i) |s + bit_i>
void apply_cdag(int i, const VectorXcd& in, VectorXcd& out) {
  long dim = in.size();
  long bit = 1L << i;
  long below = bit - 1;
  out.setZero(dim);
  for (long s = 0; s < dim; ++s) {
    if (in(s) == std::complex<double>(0.0, 0.0)) continue;
    if (s & bit) continue;
    int sign = __builtin_popcountll(static_cast<unsigned long long>(s & below)) & 1 ? -1 : 1;
    out(s | bit) += static_cast<double>(sign) * in(s);
  }
}

}  // namespace

DensityMatrix gaussian_rho(const Eigen::MatrixXcd& corr, int digits) {
  const int l = static_cast<int>(corr.rows());
  if (l > 12) throw ConfigError("gaussian_rho: dense cap is 12 modes");
  const long dim = 1L << l;

  MatrixXcd cs = 0.5 * (corr + corr.adjoint());
  Eigen::SelfAdjointEigenSolver<MatrixXcd> es(cs);
  if (es.info() != Eigen::Success) throw ConvergenceError("gaussian_rho: eigensolver failed");
  VectorXd nu = es.eigenvalues();
  for (int k = 0; k < l; ++k) {
    if (nu(k) < -1e-10 || nu(k) > 1.0 + 1e-10)
      throw DomainError("gaussian_rho: correlation spectrum outside [0, 1]");
    nu(k) = std::min(1.0, std::max(0.0, nu(k)));
  }

  // Fock vectors of the rotated modes d^dag_k = sum_i conj(V_ik) c^dag_i,
  // built recursively over occupation patterns (mode l-1 applied first, so
  // vectors for pattern p derive from p without its lowest set mode)
  std::vector<VectorXcd> fock(dim);
  fock[0] = VectorXcd::Zero(dim);
  fock[0](0) = 1.0;
  VectorXcd tmp(dim), acc(dim);
  for (long p = 1; p < dim; ++p) {
    int low = __builtin_ctzll(static_cast<unsigned long long>(p));
    const VectorXcd& parent = fock[p & (p - 1)];
    acc.setZero();
    for (int i = 0; i < l; ++i) {
      std::complex<double> w = std::conj(es.eigenvectors()(i, low));
      if (w == std::complex<double>(0.0, 0.0)) continue;
      apply_cdag(i, parent, tmp);
      acc += w * tmp;
    }
    fock[p] = acc;
  }

  // rho = sum_p prob(p) |p><p| with prob = prod nu_k^(n_k) (1-nu_k)^(1-n_k)
  MatrixXcd scaled(dim, dim);
  for (long p = 0; p < dim; ++p) {
    double prob = 1.0;
    for (int k = 0; k < l; ++k) prob *= (p & (1L << k)) ? nu(k) : 1.0 - nu(k);
    scaled.col(p) = std::sqrt(std::max(0.0, prob)) * fock[p];
  }
  MatrixXcd rho = scaled * scaled.adjoint();
  rho = 0.5 * (rho + rho.adjoint().eval());
  // normalize away the roundoff in the trace
  rho /= rho.trace().real();

  DensityMatrix out;
  out.digits = digits;
  out.m = std::move(rho);
  out.validate();
  return out;
}

DensityMatrix gaussian_rho(const ff::CorrMatrix& c, int digits) {
  const int l = c.entries.rows();
  MatrixXcd corr(l, l);
  for (int i = 0; i < l; ++i)
    for (int j = 0; j < l; ++j)
      corr(i, j) = std::complex<double>(c.entries.at(i, j).re.to_double(),
                                        c.entries.at(i, j).im.to_double());
  return gaussian_rho(corr, digits);
}

Eigen::MatrixXcd gaussian_moments(const Eigen::MatrixXcd& rho, int n_modes) {
  const long dim = rho.rows();
  MatrixXcd out(n_modes, n_modes);
  VectorXcd col(dim), ci(dim), cj(dim);
  for (int i = 0; i < n_modes; ++i)
    for (int j = 0; j < n_modes; ++j) {
      // Tr(rho c^dag_i c_j) = sum_s <s| rho c^dag_i c_j |s>
      std::complex<double> acc = 0.0;
      for (long s = 0; s < dim; ++s) {
        // c_j |s>
        long bj = 1L << j;
        if (!(s & bj)) continue;
        int sgnj = __builtin_popcountll(static_cast<unsigned long long>(s & (bj - 1))) & 1 ? -1 : 1;
        long s1 = s & ~bj;
        // c^dag_i applied to |s1>
        long bi = 1L << i;
        if (s1 & bi) continue;
        int sgni =
            __builtin_popcountll(static_cast<unsigned long long>(s1 & (bi - 1))) & 1 ? -1 : 1;
        long s2 = s1 | bi;
        acc += static_cast<double>(sgni * sgnj) * rho(s, s2);
      }
      out(i, j) = acc;
    }
  return out;
}

}  // namespace qmi::dm
