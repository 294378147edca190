#include "qmi/density_matrix.hpp"

#include <cmath>

namespace qmi::dm {

using Eigen::MatrixXcd;
using Eigen::MatrixXd;
using Eigen::VectorXcd;
using Eigen::VectorXd;

namespace {

double support_cutoff(int digits) {
  // the mp formula 10^(10-digits) would discard resolvable spectrum at
  // double precision, so the double route uses a fixed 1e-12
  return digits > 16 ? std::pow(10.0, 10 - digits) : 1e-12;
}

bool is_real(const MatrixXcd& m) {
  for (int i = 0; i < m.rows(); ++i)
    for (int j = 0; j < m.cols(); ++j)
      if (m(i, j).imag() != 0.0) return false;
  return true;
}

}  // namespace

void DensityMatrix::validate() const {
  if (m.rows() != m.cols()) throw ConfigError("DensityMatrix: square matrix required");
  double scale = m.cwiseAbs().maxCoeff();
  double herm = (m - m.adjoint()).cwiseAbs().maxCoeff();
  if (herm > 1e-10 * std::max(1.0, scale))
    throw DomainError("DensityMatrix: not Hermitian (deviation " + std::to_string(herm) + ")");
  double tr_err = std::abs(m.trace() - std::complex<double>(1.0, 0.0));
  if (tr_err > 1e-8)
    throw DomainError("DensityMatrix: trace deviates from 1 by " + std::to_string(tr_err));
}

// ---------------------------------------------------------------------------
// double-precision spectral helpers
// ---------------------------------------------------------------------------

namespace {

VectorXd herm_eigenvalues(const MatrixXcd& m) {
  Eigen::SelfAdjointEigenSolver<MatrixXcd> es(0.5 * (m + m.adjoint()));
  if (es.info() != Eigen::Success) throw ConvergenceError("eigensolver failed");
  return es.eigenvalues();
}

VectorXd clamp_spectrum(VectorXd v, double tol, const char* what) {
  for (int i = 0; i < v.size(); ++i) {
    if (v(i) < 0.0) {
      if (v(i) < -tol)
        throw DomainError(std::string(what) + ": eigenvalue " + std::to_string(v(i)) +
                          " below -" + std::to_string(tol));
      v(i) = 0.0;
    }
  }
  return v;
}

double entropy_from_spectrum_d(const VectorXd& v) {
  double s = 0.0;
  for (int i = 0; i < v.size(); ++i)
    if (v(i) > 0.0) s -= v(i) * std::log(v(i));
  return s;
}

// ---------------------------------------------------------------------------
// multi-precision pipeline, shared between the real and complex matrix types
// ---------------------------------------------------------------------------

using mp::CplxMat;
using mp::Real;
using mp::RealMat;

RealMat to_mp(const MatrixXd& m, mpfr_prec_t bits) {
  RealMat out(static_cast<int>(m.rows()), static_cast<int>(m.cols()), bits);
  for (int i = 0; i < m.rows(); ++i)
    for (int j = i; j < m.cols(); ++j) {
      out.at(i, j).set(m(i, j));
      if (j != i) out.at(j, i).set(m(i, j));  // exact-symmetric storage
    }
  return out;
}

CplxMat to_mp(const MatrixXcd& m, mpfr_prec_t bits) {
  CplxMat out(static_cast<int>(m.rows()), static_cast<int>(m.cols()), bits);
  for (int i = 0; i < m.rows(); ++i) {
    out.at(i, i).re.set(m(i, i).real());
    for (int j = i + 1; j < m.cols(); ++j) {
      out.at(i, j).re.set(m(i, j).real());
      out.at(i, j).im.set(m(i, j).imag());
      out.at(j, i).re.set(m(i, j).real());
      mpfr_neg(out.at(j, i).im.raw(), out.at(i, j).im.raw(), mp::RND);
    }
  }
  return out;
}

void scale_column(RealMat& dst, const RealMat& src, int j, const Real& f) {
  for (int i = 0; i < src.rows(); ++i) mul(dst.at(i, j), src.at(i, j), f);
}
void scale_column(CplxMat& dst, const CplxMat& src, int j, const Real& f) {
  for (int i = 0; i < src.rows(); ++i) {
    mul(dst.at(i, j).re, src.at(i, j).re, f);
    mul(dst.at(i, j).im, src.at(i, j).im, f);
  }
}

void selfadj_abt(RealMat& out, const RealMat& a, const RealMat& b) {
  mp::matmul_abt_sym_result(out, a, b);
}
void selfadj_abt(CplxMat& out, const CplxMat& a, const CplxMat& b) {
  mp::matmul_abh_herm_result(out, a, b);
}

void selfadj_product(RealMat& out, const RealMat& a, const RealMat& b) {
  mp::matmul_sym_result(out, a, b);
}
void selfadj_product(CplxMat& out, const CplxMat& a, const CplxMat& b) {
  mp::matmul_herm_result(out, a, b);
}

// lambda^p with 0^p := 0 for p > 0 and kernel directions dropped
template <class EigT>
std::vector<Real> spectrum_power(const EigT& es, double p, double cutoff, mpfr_prec_t bits) {
  Real pr(p, bits);
  Real cut(cutoff, bits);
  std::vector<Real> out(es.eigenvalues.size(), Real(bits));
  for (size_t k = 0; k < es.eigenvalues.size(); ++k) {
    const Real& lam = es.eigenvalues[k];
    if (lam.sgn() <= 0 || lam <= cut) {
      out[k].set_zero();
      continue;
    }
    mpfr_pow(out[k].raw(), lam.raw(), pr.raw(), mp::RND);
  }
  return out;
}

template <class MatT, class EigT>
MatT rebuild_from_spectrum(const EigT& es, const std::vector<Real>& f, mpfr_prec_t bits) {
  int n = es.vectors.rows();
  MatT scaled(n, n, bits);
  for (int j = 0; j < n; ++j) scale_column(scaled, es.vectors, j, f[j]);
  MatT out;
  selfadj_abt(out, scaled, es.vectors);
  return out;
}

// weight of rho inside the near-kernel of sigma (its eigenvectors with
// eigenvalue <= cut): sum_k <v_k|rho|v_k>
double kernel_leak(const RealMat& rho, const mp::SymEigen& es_s, const Real& cut) {
  mpfr_prec_t bits = rho.bits();
  int n = rho.rows();
  Real leak(bits), q(bits);
  leak.set_zero();
  std::vector<Real> w(n, Real(bits));
  for (int k = 0; k < n; ++k) {
    if (!(es_s.eigenvalues[k] <= cut)) continue;
    for (int i = 0; i < n; ++i) {
      w[i].set_zero();
      for (int j = 0; j < n; ++j) fma_acc(w[i], rho.at(i, j), es_s.vectors.at(j, k));
    }
    q.set_zero();
    for (int i = 0; i < n; ++i) fma_acc(q, es_s.vectors.at(i, k), w[i]);
    add(leak, leak, q);
  }
  return leak.to_double();
}

double kernel_leak(const CplxMat& rho, const mp::HermEigen& es_s, const Real& cut) {
  mpfr_prec_t bits = rho.bits();
  int n = rho.rows();
  Real leak(bits), q(bits), tmp(bits);
  leak.set_zero();
  std::vector<mp::Cplx> w(n, mp::Cplx(bits));
  for (int k = 0; k < n; ++k) {
    if (!(es_s.eigenvalues[k] <= cut)) continue;
    for (int i = 0; i < n; ++i) {
      w[i].set_zero();
      for (int j = 0; j < n; ++j) cfma_acc(w[i], rho.at(i, j), es_s.vectors.at(j, k), tmp);
    }
    q.set_zero();
    for (int i = 0; i < n; ++i) {
      fma_acc(q, es_s.vectors.at(i, k).re, w[i].re);
      fma_acc(q, es_s.vectors.at(i, k).im, w[i].im);
    }
    add(leak, leak, q);
  }
  return leak.to_double();
}

template <class MatT>
double az_divergence_mp(const MatT& rho, const MatT& sigma, double alpha, double z, int digits) {
  PrecisionPolicy pol;
  pol.digits = digits;
  mpfr_prec_t bits = rho.bits();
  double cutoff = support_cutoff(digits);
  Real cut(cutoff, bits);

  auto es_s = mp::eigh(sigma, pol);
  auto es_r = mp::eigh(rho, pol);
  mp::clamp_psd(es_r.eigenvalues, digits, false, "az_divergence(rho)");
  mp::clamp_psd(es_s.eigenvalues, digits, false, "az_divergence(sigma)");

  if (alpha > 1.0) {
    double leak = kernel_leak(rho, es_s, cut);
    if (leak > 1e-8)
      throw DomainError("az_divergence: rho has weight " + std::to_string(leak) +
                        " outside the support of sigma (alpha > 1)");
  }

  std::vector<Real> f_s = spectrum_power(es_s, (1.0 - alpha) / (2.0 * z), cutoff, bits);
  std::vector<Real> f_r = spectrum_power(es_r, alpha / z, cutoff, bits);
  MatT sh = rebuild_from_spectrum<MatT>(es_s, f_s, bits);
  MatT rp = rebuild_from_spectrum<MatT>(es_r, f_r, bits);

  MatT t1, w;
  mp::matmul(t1, sh, rp);
  selfadj_product(w, t1, sh);

  auto es_w = mp::eigh(w, pol, /*want_vectors=*/false);
  {
    Real tol = mp::pow10(10 - digits, bits);
    Real wmax(bits);
    wmax.set_zero();
    for (auto& ev : es_w.eigenvalues) {
      Real a = mp::abs(ev);
      if (a > wmax) wmax.set(a);
    }
    Real one(1.0, bits);
    if (wmax > one) mul(tol, tol, wmax);  // clamp relative to the W scale
    Real mtol(bits);
    neg(mtol, tol);
    for (auto& ev : es_w.eigenvalues) {
      if (ev.sgn() < 0) {
        if (ev < mtol) throw DomainError("az_divergence: W eigenvalue below clamp tolerance");
        ev.set_zero();
      }
    }
  }

  Real tr(bits), t(bits), zr(z, bits);
  tr.set_zero();
  for (const auto& ev : es_w.eigenvalues) {
    if (ev.is_zero()) continue;
    mpfr_pow(t.raw(), ev.raw(), zr.raw(), mp::RND);
    add(tr, tr, t);
  }
  if (tr.sgn() <= 0) throw SingularityError("az_divergence: trace vanished");
  Real lg = mp::log(tr);
  return lg.to_double() / (alpha - 1.0);
}

// double-precision routes
template <class MatX>
double az_divergence_d(const MatX& rho, const MatX& sigma, double alpha, double z, int digits) {
  double cutoff = support_cutoff(digits);
  Eigen::SelfAdjointEigenSolver<MatX> es_s(sigma), es_r(rho);
  if (es_s.info() != Eigen::Success || es_r.info() != Eigen::Success)
    throw ConvergenceError("az_divergence: eigensolver failed");
  VectorXd s = es_s.eigenvalues(), r = es_r.eigenvalues();

  if (alpha > 1.0) {
    double leak = 0.0;
    for (int k = 0; k < s.size(); ++k)
      if (s(k) <= cutoff)
        leak += std::real(std::complex<double>(
            es_s.eigenvectors().col(k).dot(rho * es_s.eigenvectors().col(k))));
    if (leak > 1e-8)
      throw DomainError("az_divergence: rho has weight " + std::to_string(leak) +
                        " outside the support of sigma (alpha > 1)");
  }

  VectorXd fs(s.size()), fr(r.size());
  double e_half = (1.0 - alpha) / (2.0 * z);
  for (int k = 0; k < s.size(); ++k) fs(k) = s(k) > cutoff ? std::pow(s(k), e_half) : 0.0;
  for (int k = 0; k < r.size(); ++k) fr(k) = r(k) > cutoff ? std::pow(r(k), alpha / z) : 0.0;

  MatX sh = es_s.eigenvectors() * fs.asDiagonal() * es_s.eigenvectors().adjoint();
  MatX rp = es_r.eigenvectors() * fr.asDiagonal() * es_r.eigenvectors().adjoint();
  MatX w = sh * rp * sh;
  w = 0.5 * (w + w.adjoint().eval());
  Eigen::SelfAdjointEigenSolver<MatX> es_w(w);
  VectorXd wv = es_w.eigenvalues();
  double wmax = std::max(std::abs(wv(0)), std::abs(wv(wv.size() - 1)));
  double tr = 0.0;
  for (int k = 0; k < wv.size(); ++k) {
    double v = wv(k);
    if (v <= 0.0 || v < 1e-15 * wmax * static_cast<double>(wv.size())) continue;
    tr += std::pow(v, z);
  }
  if (!(tr > 0.0)) throw SingularityError("az_divergence: trace vanished");
  return std::log(tr) / (alpha - 1.0);
}

}  // namespace

// ---------------------------------------------------------------------------
// public operations
// ---------------------------------------------------------------------------

double vn_entropy(const DensityMatrix& rho) {
  rho.validate();
  if (rho.digits <= 16) {
    VectorXd v = clamp_spectrum(herm_eigenvalues(rho.m), 1e-10, "vn_entropy");
    return entropy_from_spectrum_d(v);
  }
  PrecisionPolicy pol;
  pol.digits = rho.digits;
  mpfr_prec_t bits = mp::bits_for_digits(rho.digits);
  auto evs = is_real(rho.m)
                 ? mp::eigh(to_mp(MatrixXd(rho.m.real()), bits), pol, false).eigenvalues
                 : mp::eigh(to_mp(rho.m, bits), pol, false).eigenvalues;
  mp::clamp_psd(evs, rho.digits, true, "vn_entropy");
  Real acc(bits), lg(bits), t(bits);
  acc.set_zero();
  for (const auto& lam : evs) {
    if (lam.sgn() <= 0) continue;
    mpfr_log(lg.raw(), lam.raw(), mp::RND);
    mul(t, lam, lg);
    sub(acc, acc, t);
  }
  return acc.to_double();
}

double renyi_entropy(const DensityMatrix& rho, double alpha) {
  rho.validate();
  if (!(alpha > 0.0) || alpha == 1.0)
    throw ConfigError("renyi_entropy: alpha must be > 0 and != 1");
  if (rho.digits <= 16) {
    VectorXd v = clamp_spectrum(herm_eigenvalues(rho.m), 1e-10, "renyi_entropy");
    double tr = 0.0;
    for (int i = 0; i < v.size(); ++i)
      if (v(i) > 0.0) tr += std::pow(v(i), alpha);
    return std::log(tr) / (1.0 - alpha);
  }
  PrecisionPolicy pol;
  pol.digits = rho.digits;
  mpfr_prec_t bits = mp::bits_for_digits(rho.digits);
  auto evs = is_real(rho.m)
                 ? mp::eigh(to_mp(MatrixXd(rho.m.real()), bits), pol, false).eigenvalues
                 : mp::eigh(to_mp(rho.m, bits), pol, false).eigenvalues;
  mp::clamp_psd(evs, rho.digits, true, "renyi_entropy");
  Real tr(bits), t(bits), ar(alpha, bits);
  tr.set_zero();
  for (const auto& lam : evs) {
    if (lam.sgn() <= 0) continue;
    mpfr_pow(t.raw(), lam.raw(), ar.raw(), mp::RND);
    add(tr, tr, t);
  }
  Real lg = mp::log(tr);
  return lg.to_double() / (1.0 - alpha);
}

double vn_mi(const DensityMatrix& rho_ab, const DensityMatrix& rho_a, const DensityMatrix& rho_b) {
  int da = rho_a.dim(), db = rho_b.dim();
  if (da * db != rho_ab.dim()) throw ConfigError("vn_mi: dimension mismatch");
  double dev_a = (ptrace_second(rho_ab.m, da, db) - rho_a.m).cwiseAbs().maxCoeff();
  double dev_b = (ptrace_first(rho_ab.m, da, db) - rho_b.m).cwiseAbs().maxCoeff();
  if (dev_a > 1e-8 || dev_b > 1e-8)
    throw ConfigError("vn_mi: rho_a/rho_b are not the partial traces of rho_ab");
  return vn_entropy(rho_a) + vn_entropy(rho_b) - vn_entropy(rho_ab);
}

double entropy_based_rmi(const DensityMatrix& rho_ab, int dim_a, int dim_b, double alpha) {
  if (dim_a * dim_b != rho_ab.dim()) throw ConfigError("entropy_based_rmi: dimension mismatch");
  DensityMatrix ra{rho_ab.digits, ptrace_second(rho_ab.m, dim_a, dim_b)};
  DensityMatrix rb{rho_ab.digits, ptrace_first(rho_ab.m, dim_a, dim_b)};
  return renyi_entropy(ra, alpha) + renyi_entropy(rb, alpha) - renyi_entropy(rho_ab, alpha);
}

double az_divergence(const DensityMatrix& rho, const DensityMatrix& sigma, double alpha,
                     double z) {
  if (rho.dim() != sigma.dim()) throw ConfigError("az_divergence: dimension mismatch");
  if (!(alpha > 0.0) || alpha == 1.0)
    throw ConfigError("az_divergence: alpha must be > 0 and != 1");
  if (!(z > 0.0)) throw ConfigError("az_divergence: z must be > 0");
  int digits = std::max(rho.digits, sigma.digits);
  if (digits <= 16) {
    if (is_real(rho.m) && is_real(sigma.m)) {
      MatrixXd r = rho.m.real(), s = sigma.m.real();
      return az_divergence_d(r, s, alpha, z, digits);
    }
    return az_divergence_d(rho.m, sigma.m, alpha, z, digits);
  }
  mpfr_prec_t bits = mp::bits_for_digits(digits);
  if (is_real(rho.m) && is_real(sigma.m))
    return az_divergence_mp(to_mp(MatrixXd(rho.m.real()), bits),
                            to_mp(MatrixXd(sigma.m.real()), bits), alpha, z, digits);
  return az_divergence_mp(to_mp(rho.m, bits), to_mp(sigma.m, bits), alpha, z, digits);
}

double az_rmi(const DensityMatrix& rho_ab, int dim_a, int dim_b, double alpha, double z) {
  if (dim_a * dim_b != rho_ab.dim()) throw ConfigError("az_rmi: dimension mismatch");
  DensityMatrix sigma{rho_ab.digits, kron(ptrace_second(rho_ab.m, dim_a, dim_b),
                                          ptrace_first(rho_ab.m, dim_a, dim_b))};
  return az_divergence(rho_ab, sigma, alpha, z);
}

double geometric_divergence(const DensityMatrix& rho, const DensityMatrix& sigma, double alpha) {
  if (rho.dim() != sigma.dim()) throw ConfigError("geometric_divergence: dimension mismatch");
  if (!(alpha > 0.0) || alpha == 1.0)
    throw ConfigError("geometric_divergence: alpha must be > 0 and != 1");
  Eigen::SelfAdjointEigenSolver<MatrixXcd> es_s(0.5 * (sigma.m + sigma.m.adjoint()));
  VectorXd s = es_s.eigenvalues();
  double smax = s.maxCoeff();
  if (s.minCoeff() < 1e-14 * std::max(1.0, smax) * static_cast<double>(s.size()))
    throw SingularityError("geometric_divergence: singular sigma");
  VectorXd is(s.size());
  for (int k = 0; k < s.size(); ++k) is(k) = 1.0 / std::sqrt(s(k));
  MatrixXcd sinv_h = es_s.eigenvectors() * is.asDiagonal() * es_s.eigenvectors().adjoint();
  MatrixXcd g = sinv_h * rho.m * sinv_h;
  g = 0.5 * (g + g.adjoint().eval());
  Eigen::SelfAdjointEigenSolver<MatrixXcd> es_g(g);
  VectorXd gv = clamp_spectrum(es_g.eigenvalues(), 1e-10, "geometric_divergence");
  VectorXd ga(gv.size());
  for (int k = 0; k < gv.size(); ++k) ga(k) = gv(k) > 0.0 ? std::pow(gv(k), alpha) : 0.0;
  MatrixXcd gpow = es_g.eigenvectors() * ga.asDiagonal() * es_g.eigenvectors().adjoint();
  double tr = std::real((sigma.m * gpow).trace());
  if (!(tr > 0.0)) throw SingularityError("geometric_divergence: trace vanished");
  return std::log(tr) / (alpha - 1.0);
}

// ---------------------------------------------------------------------------
// partial traces
// ---------------------------------------------------------------------------

MatrixXcd ptrace_second(const MatrixXcd& rho_ab, int dim_a, int dim_b) {
  MatrixXcd out = MatrixXcd::Zero(dim_a, dim_a);
  for (int i = 0; i < dim_a; ++i)
    for (int j = 0; j < dim_a; ++j)
      for (int k = 0; k < dim_b; ++k) out(i, j) += rho_ab(i * dim_b + k, j * dim_b + k);
  return out;
}

MatrixXcd ptrace_first(const MatrixXcd& rho_ab, int dim_a, int dim_b) {
  MatrixXcd out = MatrixXcd::Zero(dim_b, dim_b);
  for (int i = 0; i < dim_b; ++i)
    for (int j = 0; j < dim_b; ++j)
      for (int k = 0; k < dim_a; ++k) out(i, j) += rho_ab(k * dim_b + i, k * dim_b + j);
  return out;
}

namespace {

// index maps splitting an n_sites register into (keep, rest); site 0 is the
// least significant bit
struct BitSplit {
  std::vector<long> keep_stride;
  std::vector<long> rest_stride;
  long nk = 1, nr = 1;
};

BitSplit bit_split(int n_sites, const std::vector<int>& keep) {
  std::vector<char> is_kept(n_sites, 0);
  for (int s : keep) {
    if (s < 0 || s >= n_sites) throw ConfigError("partial_trace: site index out of range");
    if (is_kept[s]) throw ConfigError("partial_trace: duplicate site in keep set");
    is_kept[s] = 1;
  }
  BitSplit bs;
  // set semantics: kept sites in ascending order map to ascending output bits,
  // so keeping every site reproduces the input indexing; a contiguous block
  // of high sites therefore sits in the first (most significant) factor
  for (int s = 0; s < n_sites; ++s) {
    if (is_kept[s]) bs.keep_stride.push_back(1L << s);
    else bs.rest_stride.push_back(1L << s);
  }
  bs.nk = 1L << bs.keep_stride.size();
  bs.nr = 1L << bs.rest_stride.size();
  return bs;
}

long compose_index(long pattern, const std::vector<long>& strides) {
  long idx = 0;
  for (size_t b = 0; b < strides.size(); ++b)
    if (pattern & (1L << b)) idx += strides[b];
  return idx;
}

}  // namespace

MatrixXcd partial_trace(const VectorXcd& state, int n_sites, const std::vector<int>& keep) {
  if (state.size() != (1L << n_sites)) throw ConfigError("partial_trace: state size mismatch");
  BitSplit bs = bit_split(n_sites, keep);
  MatrixXcd psi(bs.nk, bs.nr);
  std::vector<long> kidx(bs.nk), ridx(bs.nr);
  for (long a = 0; a < bs.nk; ++a) kidx[a] = compose_index(a, bs.keep_stride);
  for (long b = 0; b < bs.nr; ++b) ridx[b] = compose_index(b, bs.rest_stride);
#pragma omp parallel for schedule(static)
  for (long a = 0; a < bs.nk; ++a)
    for (long b = 0; b < bs.nr; ++b) psi(a, b) = state(kidx[a] + ridx[b]);
  return psi * psi.adjoint();
}

MatrixXcd partial_trace(const MatrixXcd& rho, int n_sites, const std::vector<int>& keep) {
  if (rho.rows() != (1L << n_sites)) throw ConfigError("partial_trace: rho size mismatch");
  BitSplit bs = bit_split(n_sites, keep);
  std::vector<long> kidx(bs.nk), ridx(bs.nr);
  for (long a = 0; a < bs.nk; ++a) kidx[a] = compose_index(a, bs.keep_stride);
  for (long b = 0; b < bs.nr; ++b) ridx[b] = compose_index(b, bs.rest_stride);
  MatrixXcd out = MatrixXcd::Zero(bs.nk, bs.nk);
#pragma omp parallel for schedule(static)
  for (long i = 0; i < bs.nk; ++i)
    for (long j = 0; j < bs.nk; ++j) {
      std::complex<double> acc = 0.0;
      for (long b = 0; b < bs.nr; ++b) acc += rho(kidx[i] + ridx[b], kidx[j] + ridx[b]);
      out(i, j) = acc;
    }
  return out;
}

MatrixXcd kron(const MatrixXcd& a, const MatrixXcd& b) {
  MatrixXcd out(a.rows() * b.rows(), a.cols() * b.cols());
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

}  // namespace qmi::dm
