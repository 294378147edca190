#include "qmi/mp_linalg.hpp"

#include <cmath>
#include <string>

#include "qmi/errors.hpp"

namespace qmi::mp {

SymEigen eigh(const RealMat& m, const PrecisionPolicy& policy, bool want_vectors) {
  if (!m.is_symmetric()) throw DomainError("eigh: matrix is not symmetric as stored");
  JacobiOptions opt;
  opt.want_vectors = want_vectors;
  auto r = eig_sym_tridql(m, policy.digits, opt);
  return SymEigen{std::move(r.eigenvalues), std::move(r.vectors)};
}

HermEigen eigh(const CplxMat& m, const PrecisionPolicy& policy, bool want_vectors) {
  if (!m.is_hermitian()) throw DomainError("eigh: matrix is not conjugate-symmetric as stored");
  JacobiOptions opt;
  opt.want_vectors = want_vectors;
  auto r = jacobi_herm(m, policy.digits, opt);
  return HermEigen{std::move(r.eigenvalues), std::move(r.vectors)};
}

void clamp_psd(std::vector<Real>& eigenvalues, int digits, bool strict, const char* what) {
  if (eigenvalues.empty()) return;
  mpfr_prec_t bits = eigenvalues[0].prec();
  Real tol = pow10(10 - digits, bits);
  Real mtol(bits);
  neg(mtol, tol);
  for (auto& ev : eigenvalues) {
    if (ev.sgn() < 0) {
      if (ev < mtol && strict)
        throw DomainError(std::string(what) + ": eigenvalue " + ev.str(8) +
                          " below -10^(10-digits) at " + std::to_string(digits) + " digits");
      ev.set_zero();
    }
  }
}

RealMat spectral_map(const SymEigen& es, const std::function<void(Real&, const Real&)>& f) {
  int n = es.vectors.rows();
  mpfr_prec_t bits = es.vectors.bits();
  // scaled = U * diag(f(lambda)), then out = scaled * U^T
  RealMat scaled(n, n, bits);
  Real fv(bits);
  for (int j = 0; j < n; ++j) {
    f(fv, es.eigenvalues[j]);
    for (int i = 0; i < n; ++i) mul(scaled.at(i, j), es.vectors.at(i, j), fv);
  }
  RealMat out;
  matmul_abt_sym_result(out, scaled, es.vectors);
  return out;
}

CplxMat spectral_map(const HermEigen& es, const std::function<void(Real&, const Real&)>& f) {
  int n = es.vectors.rows();
  mpfr_prec_t bits = es.vectors.bits();
  CplxMat scaled(n, n, bits);
  Real fv(bits);
  for (int j = 0; j < n; ++j) {
    f(fv, es.eigenvalues[j]);
    for (int i = 0; i < n; ++i) {
      mul(scaled.at(i, j).re, es.vectors.at(i, j).re, fv);
      mul(scaled.at(i, j).im, es.vectors.at(i, j).im, fv);
    }
  }
  CplxMat out;
  matmul_abh_herm_result(out, scaled, es.vectors);
  return out;
}

namespace {

bool near_integer(double p, long& ip) {
  double r = std::round(p);
  if (std::abs(p - r) < 1e-12) {
    ip = static_cast<long>(r);
    return true;
  }
  return false;
}

// f(lambda) = lambda^p with the domain rules shared by both scalar types
std::function<void(Real&, const Real&)> power_fn(double p, mpfr_prec_t bits, int digits,
                                                 const char* what) {
  long ip = 0;
  bool integral = near_integer(p, ip);
  Real pr(p, bits);
  return [=](Real& dst, const Real& lam) {
    if (lam.is_zero()) {
      if (p > 0.0) {
        dst.set_zero();
        return;
      }
      if (integral && ip == 0) {
        dst.set(1.0);
        return;
      }
      throw SingularityError(std::string(what) + ": zero eigenvalue with exponent " +
                             std::to_string(p));
    }
    if (lam.sgn() < 0 && !integral)
      throw DomainError(std::string(what) + ": negative eigenvalue " + lam.str(8) +
                        " with non-integer exponent at " + std::to_string(digits) + " digits");
    if (integral)
      mpfr_pow_si(dst.raw(), lam.raw(), ip, RND);
    else
      mpfr_pow(dst.raw(), lam.raw(), pr.raw(), RND);
  };
}

}  // namespace

RealMat mat_power_psd(const RealMat& m, double p, const PrecisionPolicy& policy) {
  auto es = eigh(m, policy);
  long ip;
  clamp_psd(es.eigenvalues, policy.digits, !near_integer(p, ip), "mat_power_psd");
  return spectral_map(es, power_fn(p, m.bits(), policy.digits, "mat_power_psd"));
}

CplxMat mat_power_psd(const CplxMat& m, double p, const PrecisionPolicy& policy) {
  auto es = eigh(m, policy);
  long ip;
  clamp_psd(es.eigenvalues, policy.digits, !near_integer(p, ip), "mat_power_psd");
  return spectral_map(es, power_fn(p, m.bits(), policy.digits, "mat_power_psd"));
}

namespace {

Real logdet_from_spectrum(std::vector<Real> evs, int digits, mpfr_prec_t bits) {
  clamp_psd(evs, digits, true, "logdet_psd");
  Real acc(bits);
  acc.set_zero();
  Real lg(bits);
  for (const auto& ev : evs) {
    if (ev.sgn() <= 0)
      throw SingularityError("logdet_psd: non-positive eigenvalue " + ev.str(8) +
                             " after clamping at " + std::to_string(digits) + " digits");
    mpfr_log(lg.raw(), ev.raw(), RND);
    add(acc, acc, lg);
  }
  return acc;
}

}  // namespace

Real logdet_psd(const RealMat& m, const PrecisionPolicy& policy) {
  auto es = eigh(m, policy, /*want_vectors=*/false);
  return logdet_from_spectrum(std::move(es.eigenvalues), policy.digits, m.bits());
}

Real logdet_psd(const CplxMat& m, const PrecisionPolicy& policy) {
  auto es = eigh(m, policy, /*want_vectors=*/false);
  return logdet_from_spectrum(std::move(es.eigenvalues), policy.digits, m.bits());
}

Real reconstruction_residual(const RealMat& m, const SymEigen& es) {
  RealMat rec = spectral_map(es, [](Real& d, const Real& l) { d.set(l); });
  int n = m.rows();
  Real worst(m.bits()), t(m.bits());
  worst.set_zero();
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      sub(t, rec.at(i, j), m.at(i, j));
      mpfr_abs(t.raw(), t.raw(), RND);
      if (t > worst) worst.set(t);
    }
  return worst;
}

Real reconstruction_residual(const CplxMat& m, const HermEigen& es) {
  CplxMat rec = spectral_map(es, [](Real& d, const Real& l) { d.set(l); });
  int n = m.rows();
  Real worst(m.bits()), t(m.bits());
  worst.set_zero();
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      sub(t, rec.at(i, j).re, m.at(i, j).re);
      mpfr_abs(t.raw(), t.raw(), RND);
      if (t > worst) worst.set(t);
      sub(t, rec.at(i, j).im, m.at(i, j).im);
      mpfr_abs(t.raw(), t.raw(), RND);
      if (t > worst) worst.set(t);
    }
  return worst;
}

Real unitarity_residual(const RealMat& v) {
  RealMat g;
  matmul_abt(g, v, v);
  int n = v.rows();
  Real worst(v.bits()), t(v.bits());
  worst.set_zero();
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      t.set(g.at(i, j));
      if (i == j) mpfr_sub_ui(t.raw(), t.raw(), 1u, RND);
      mpfr_abs(t.raw(), t.raw(), RND);
      if (t > worst) worst.set(t);
    }
  return worst;
}

Real unitarity_residual(const CplxMat& v) {
  CplxMat g;
  matmul_abh(g, v, v);
  int n = v.rows();
  Real worst(v.bits()), t(v.bits());
  worst.set_zero();
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      t.set(g.at(i, j).re);
      if (i == j) mpfr_sub_ui(t.raw(), t.raw(), 1u, RND);
      mpfr_abs(t.raw(), t.raw(), RND);
      if (t > worst) worst.set(t);
      t.set(g.at(i, j).im);
      mpfr_abs(t.raw(), t.raw(), RND);
      if (t > worst) worst.set(t);
    }
  return worst;
}

}  // namespace qmi::mp
