#include "qmi/mp_kernels.hpp"

#include <omp.h>

#include <Eigen/Dense>
#include <algorithm>
#include <numeric>
#include <string>

#include "qmi/errors.hpp"

namespace qmi::mp {

namespace {

struct SymRot {
  Real c, s, t;
  explicit SymRot(mpfr_prec_t bits) : c(bits), s(bits), t(bits) {}
};

// c, s, t zeroing a_pq of [[app, apq], [apq, aqq]] with |rotation| <= pi/4
void sym_rotation(const Real& app, const Real& aqq, const Real& apq, SymRot& r) {
  mpfr_prec_t bits = app.prec();
  Real theta(bits), den(bits), one(1.0, bits);
  sub(theta, aqq, app);
  Real two_apq(bits);
  add(two_apq, apq, apq);
  div(theta, theta, two_apq);
  // t = sign(theta) / (|theta| + sqrt(1 + theta^2))
  Real at = abs(theta);
  Real hyp = hypot(one, theta);
  add(den, at, hyp);
  div(r.t, one, den);
  if (theta.sgn() < 0) mpfr_neg(r.t.raw(), r.t.raw(), RND);
  Real tc = hypot(one, r.t);
  div(r.c, one, tc);
  mul(r.s, r.t, r.c);
}

struct HermRot {
  Real c, t, absw;
  Cplx s;  // s = -(t*c) * conj(w)/|w| for G = [[c, -conj(s)], [s, c]]
  explicit HermRot(mpfr_prec_t bits) : c(bits), t(bits), absw(bits), s(bits) {}
};

void herm_rotation(const Real& app, const Real& aqq, const Cplx& w, HermRot& r) {
  mpfr_prec_t bits = app.prec();
  r.absw = cabs(w);
  SymRot base(bits);
  sym_rotation(app, aqq, r.absw, base);
  r.c.set(base.c);
  r.t.set(base.t);
  Real sc(bits);
  mul(sc, base.t, base.c);
  mpfr_neg(sc.raw(), sc.raw(), RND);
  div(r.s.re, w.re, r.absw);
  div(r.s.im, w.im, r.absw);
  mpfr_neg(r.s.im.raw(), r.s.im.raw(), RND);
  mul(r.s.re, r.s.re, sc);
  mul(r.s.im, r.s.im, sc);
}

Real offdiag_frobenius(const RealMat& a) {
  int n = a.rows();
  Real s(a.bits());
  s.set_zero();
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) fma_acc(s, a.at(i, j), a.at(i, j));
  add(s, s, s);
  return sqrt(s);
}

Real offdiag_frobenius(const CplxMat& a) {
  int n = a.rows();
  Real s(a.bits());
  s.set_zero();
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      fma_acc(s, a.at(i, j).re, a.at(i, j).re);
      fma_acc(s, a.at(i, j).im, a.at(i, j).im);
    }
  add(s, s, s);
  return sqrt(s);
}

Real frobenius(const CplxMat& a) {
  Real s(a.bits());
  s.set_zero();
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j) {
      fma_acc(s, a.at(i, j).re, a.at(i, j).re);
      fma_acc(s, a.at(i, j).im, a.at(i, j).im);
    }
  return sqrt(s);
}

template <class Result, class Mat>
void sort_ascending(Result& res, std::vector<Real>& diag, Mat& vecs, bool want_vectors, int n) {
  std::vector<int> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](int i, int j) { return diag[i] < diag[j]; });
  res.eigenvalues.reserve(n);
  for (int k = 0; k < n; ++k) res.eigenvalues.push_back(diag[idx[k]]);
  if (want_vectors) {
    Mat sorted(n, n, vecs.bits());
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) sorted.at(i, j) = vecs.at(i, idx[j]);
    res.vectors = std::move(sorted);
  }
}

// Double-precision eigenbasis of A (exponent-rescaled to avoid overflow),
// re-orthonormalized at full precision. Conjugating by it leaves only the
// quadratic Jacobi phase. Returns an empty matrix when unavailable.
RealMat precondition_basis(const RealMat& a) {
  int n = a.rows();
  Real mx = a.max_abs();
  if (mx.is_zero()) return RealMat();
  long e = mpfr_get_exp(mx.raw());
  Eigen::MatrixXd ad(n, n);
  Real t(a.bits());
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      mpfr_mul_2si(t.raw(), a.at(i, j).raw(), -e, RND);
      ad(i, j) = t.to_double();
    }
  ad = 0.5 * (ad + ad.transpose().eval());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(ad);
  if (es.info() != Eigen::Success) return RealMat();
  RealMat q(n, n, a.bits());
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) q.at(i, j).set(es.eigenvectors()(i, j));
  // modified Gram-Schmidt at working precision: the conjugation must be an
  // exact similarity, not just approximately orthogonal
  Real r(a.bits()), nrm(a.bits());
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < j; ++i) {
      r.set_zero();
      for (int k = 0; k < n; ++k) fma_acc(r, q.at(k, i), q.at(k, j));
      for (int k = 0; k < n; ++k) fms_acc(q.at(k, j), r, q.at(k, i), t);
    }
    nrm.set_zero();
    for (int k = 0; k < n; ++k) fma_acc(nrm, q.at(k, j), q.at(k, j));
    nrm = sqrt(nrm);
    if (nrm.is_zero()) return RealMat();
    for (int k = 0; k < n; ++k) div(q.at(k, j), q.at(k, j), nrm);
  }
  return q;
}

CplxMat precondition_basis(const CplxMat& a) {
  int n = a.rows();
  Real mx = a.max_abs();
  if (mx.is_zero()) return CplxMat();
  long e = mpfr_get_exp(mx.raw());
  Eigen::MatrixXcd ad(n, n);
  Real t(a.bits());
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      mpfr_mul_2si(t.raw(), a.at(i, j).re.raw(), -e, RND);
      double re = t.to_double();
      mpfr_mul_2si(t.raw(), a.at(i, j).im.raw(), -e, RND);
      ad(i, j) = std::complex<double>(re, t.to_double());
    }
  ad = 0.5 * (ad + ad.adjoint().eval());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(ad);
  if (es.info() != Eigen::Success) return CplxMat();
  CplxMat q(n, n, a.bits());
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      q.at(i, j).re.set(es.eigenvectors()(i, j).real());
      q.at(i, j).im.set(es.eigenvectors()(i, j).imag());
    }
  Real tr(a.bits()), nrm(a.bits());
  Cplx r(a.bits()), prod(a.bits());
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < j; ++i) {
      r.set_zero();
      for (int k = 0; k < n; ++k) cfma_conj_acc(r, q.at(k, i), q.at(k, j), tr);
      for (int k = 0; k < n; ++k) {
        cmul(prod, r, q.at(k, i), tr);
        sub(q.at(k, j).re, q.at(k, j).re, prod.re);
        sub(q.at(k, j).im, q.at(k, j).im, prod.im);
      }
    }
    nrm.set_zero();
    for (int k = 0; k < n; ++k) {
      fma_acc(nrm, q.at(k, j).re, q.at(k, j).re);
      fma_acc(nrm, q.at(k, j).im, q.at(k, j).im);
    }
    nrm = sqrt(nrm);
    if (nrm.is_zero()) return CplxMat();
    for (int k = 0; k < n; ++k) {
      div(q.at(k, j).re, q.at(k, j).re, nrm);
      div(q.at(k, j).im, q.at(k, j).im, nrm);
    }
  }
  return q;
}

// out = a^T * b, exact-symmetric output (used for Q^T (A Q))
void matmul_atb_sym_result(RealMat& out, const RealMat& a, const RealMat& b) {
  int n = a.cols(), k = a.rows();
  out = RealMat(n, n, a.bits());
#pragma omp parallel for schedule(dynamic)
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      Real& acc = out.at(i, j);
      for (int l = 0; l < k; ++l) fma_acc(acc, a.at(l, i), b.at(l, j));
      if (j != i) out.at(j, i).set(acc);
    }
}

// out = a^dagger * b, exact-Hermitian output
void matmul_ahb_herm_result(CplxMat& out, const CplxMat& a, const CplxMat& b) {
  int n = a.cols(), k = a.rows();
  out = CplxMat(n, n, a.bits());
#pragma omp parallel for schedule(dynamic)
  for (int i = 0; i < n; ++i) {
    Real tmp(a.bits());
    for (int j = i; j < n; ++j) {
      Cplx& acc = out.at(i, j);
      for (int l = 0; l < k; ++l) cfma_conj_acc(acc, a.at(l, i), b.at(l, j), tmp);
      if (j == i)
        acc.im.set_zero();
      else
        out.at(j, i) = acc.conj();
    }
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// Householder tridiagonalization + implicit-shift QL
// ---------------------------------------------------------------------------

namespace {

// reduce symmetric a to tridiagonal (d, e); on exit a holds the accumulated
// orthogonal transform when want_vectors (classic tred2 scheme)
void householder_tridiag(RealMat& a, std::vector<Real>& d, std::vector<Real>& e,
                         bool want_vectors) {
  int n = a.rows();
  mpfr_prec_t bits = a.bits();
  d.assign(n, Real(bits));
  e.assign(n, Real(bits));
  for (auto& x : d) x.set_zero();
  for (auto& x : e) x.set_zero();
  std::vector<char> applied(n, 0);

  Real h(bits), scale(bits), f(bits), g(bits), hh(bits), t(bits);
  for (int i = n - 1; i >= 1; --i) {
    int l = i - 1;
    h.set_zero();
    scale.set_zero();
    if (l > 0) {
      for (int k = 0; k <= l; ++k) {
        mpfr_abs(t.raw(), a.at(i, k).raw(), RND);
        add(scale, scale, t);
      }
      if (scale.is_zero()) {
        e[i].set(a.at(i, l));
      } else {
        for (int k = 0; k <= l; ++k) {
          div(a.at(i, k), a.at(i, k), scale);
          fma_acc(h, a.at(i, k), a.at(i, k));
        }
        applied[i] = 1;
        f.set(a.at(i, l));
        g = sqrt(h);
        if (f.sgn() >= 0) mpfr_neg(g.raw(), g.raw(), RND);
        mul(e[i], scale, g);
        mul(t, f, g);
        sub(h, h, t);
        sub(a.at(i, l), f, g);
        f.set_zero();
        for (int j = 0; j <= l; ++j) {
          if (want_vectors) div(a.at(j, i), a.at(i, j), h);
          g.set_zero();
          for (int k = 0; k <= j; ++k) fma_acc(g, a.at(j, k), a.at(i, k));
          for (int k = j + 1; k <= l; ++k) fma_acc(g, a.at(k, j), a.at(i, k));
          div(e[j], g, h);
          fma_acc(f, e[j], a.at(i, j));
        }
        add(t, h, h);
        div(hh, f, t);
        for (int j = 0; j <= l; ++j) {
          mul(t, hh, a.at(i, j));
          sub(e[j], e[j], t);
        }
#pragma omp parallel for schedule(dynamic)
        for (int j = 0; j <= l; ++j) {
          Real tf(bits), tg(bits), tt(bits);
          tf.set(a.at(i, j));
          tg.set(e[j]);
          for (int k = 0; k <= j; ++k) {
            mul(tt, tf, e[k]);
            sub(a.at(j, k), a.at(j, k), tt);
            mul(tt, tg, a.at(i, k));
            sub(a.at(j, k), a.at(j, k), tt);
          }
        }
      }
    } else {
      e[i].set(a.at(i, l));
    }
    d[i].set(h);
  }

  if (want_vectors) {
    // accumulate transforms
    for (int i = 0; i < n; ++i) {
      if (applied[i]) {
#pragma omp parallel for schedule(static)
        for (int j = 0; j < i; ++j) {
          Real gg(bits), tt(bits);
          gg.set_zero();
          for (int k = 0; k < i; ++k) fma_acc(gg, a.at(i, k), a.at(k, j));
          for (int k = 0; k < i; ++k) {
            mul(tt, gg, a.at(k, i));
            sub(a.at(k, j), a.at(k, j), tt);
          }
        }
      }
      d[i].set(a.at(i, i));
      a.at(i, i).set(1.0);
      for (int j = 0; j < i; ++j) {
        a.at(j, i).set_zero();
        a.at(i, j).set_zero();
      }
    }
  } else {
    for (int i = 0; i < n; ++i) d[i].set(a.at(i, i));
  }
  // shift subdiagonal down: e[0..n-2] = e[1..n-1]
  for (int i = 1; i < n; ++i) e[i - 1].set(e[i]);
  e[n - 1].set_zero();
}

// implicit-shift QL on (d, e[0..n-2]); z column-rotated when want_vectors
void ql_implicit(std::vector<Real>& d, std::vector<Real>& e, RealMat& z, int digits,
                 bool want_vectors, int iter_cap) {
  int n = static_cast<int>(d.size());
  if (n == 0) return;
  mpfr_prec_t bits = d[0].prec();
  Real eps = pow10(2 - digits, bits);
  Real g(bits), r(bits), s(bits), c(bits), p(bits), f(bits), b(bits), dd(bits), t(bits),
      one(1.0, bits), two(2.0, bits);

  for (int l = 0; l < n; ++l) {
    int iter = 0;
    int m;
    do {
      for (m = l; m < n - 1; ++m) {
        mpfr_abs(dd.raw(), d[m].raw(), RND);
        mpfr_abs(t.raw(), d[m + 1].raw(), RND);
        add(dd, dd, t);
        mul(dd, dd, eps);
        mpfr_abs(t.raw(), e[m].raw(), RND);
        if (t <= dd) break;
      }
      if (m != l) {
        if (iter++ == iter_cap)
          throw ConvergenceError("eig_sym_tridql: QL iteration cap " + std::to_string(iter_cap) +
                                 " reached for dim " + std::to_string(n) + " at " +
                                 std::to_string(digits) + " digits");
        sub(g, d[l + 1], d[l]);
        add(t, e[l], e[l]);
        div(g, g, t);
        r = hypot(g, one);
        // g = d[m] - d[l] + e[l] / (g + copysign(r, g))
        mpfr_copysign(t.raw(), r.raw(), g.raw(), RND);
        add(t, g, t);
        div(t, e[l], t);
        sub(g, d[m], d[l]);
        add(g, g, t);
        s.set(1.0);
        c.set(1.0);
        p.set_zero();
        bool underflow = false;
        for (int i = m - 1; i >= l; --i) {
          mul(f, s, e[i]);
          mul(b, c, e[i]);
          r = hypot(f, g);
          e[i + 1].set(r);
          if (r.is_zero()) {
            sub(d[i + 1], d[i + 1], p);
            e[m].set_zero();
            underflow = true;
            break;
          }
          div(s, f, r);
          div(c, g, r);
          sub(g, d[i + 1], p);
          sub(t, d[i], g);
          mul(r, t, s);
          mul(t, two, c);
          fma_acc(r, t, b);
          mul(p, s, r);
          add(d[i + 1], g, p);
          mul(g, c, r);
          sub(g, g, b);
          if (want_vectors) {
            const int col0 = i, col1 = i + 1;
#pragma omp parallel for schedule(static)
            for (int k = 0; k < n; ++k) {
              Real zf(bits), u0(bits), tmp(bits);
              zf.set(z.at(k, col1));
              mul(u0, s, z.at(k, col0));
              fma_acc(u0, c, zf);
              mul(z.at(k, col0), c, z.at(k, col0));
              fms_acc(z.at(k, col0), s, zf, tmp);
              z.at(k, col1).set(u0);
            }
          }
        }
        if (underflow) continue;
        sub(d[l], d[l], p);
        e[l].set(g);
        e[m].set_zero();
      }
    } while (m != l);
  }
}

}  // namespace

SymJacobiResult eig_sym_tridql(RealMat A, int digits, const JacobiOptions& opt) {
  int n = A.rows();
  if (n != A.cols()) throw DomainError("eig_sym_tridql: square matrix required");
  mpfr_prec_t bits = A.bits();
  SymJacobiResult res;
  if (n == 0) return res;
  if (n == 1) {
    res.eigenvalues.push_back(A.at(0, 0));
    if (opt.want_vectors) res.vectors = RealMat::identity(1, bits);
    return res;
  }
  std::vector<Real> d, e;
  householder_tridiag(A, d, e, opt.want_vectors);
  RealMat z;
  if (opt.want_vectors) z = std::move(A);
  ql_implicit(d, e, z, digits, opt.want_vectors, 60);
  sort_ascending(res, d, z, opt.want_vectors, n);
  return res;
}

// ---------------------------------------------------------------------------
// real symmetric Jacobi: cyclic sweeps, rotation application parallelized
// element-wise (bit-identical for any thread count), double-precision spectral
// preconditioning to start in the quadratic regime
// ---------------------------------------------------------------------------

SymJacobiResult jacobi_sym(RealMat A, int digits, const JacobiOptions& opt) {
  int n = A.rows();
  if (n != A.cols()) throw DomainError("jacobi_sym: square matrix required");
  mpfr_prec_t bits = A.bits();
  SymJacobiResult res;
  if (n == 0) return res;

  Real scale = A.frobenius();
  Real conv = pow10(2 - digits, bits) * scale;
  Real skip = conv;
  {
    Real denom(static_cast<long>(4 * n), bits);
    div(skip, conv, denom);
  }

  RealMat pre;
  if (!scale.is_zero() && n >= 4 && opt.precondition) {
    pre = precondition_basis(A);
    if (pre.rows() == n) {
      RealMat t;
      matmul(t, A, pre);
      matmul_atb_sym_result(A, pre, t);
    }
  }

  RealMat V = opt.want_vectors ? RealMat::identity(n, bits) : RealMat();

  bool done = scale.is_zero();
  int sweep = 0;
  SymRot rot(bits);
  Real tw(bits);
  for (; sweep < opt.max_sweeps && !done; ++sweep) {
    if (offdiag_frobenius(A) <= conv) {
      done = true;
      break;
    }
    for (int p = 0; p < n - 1; ++p)
      for (int q = p + 1; q < n; ++q) {
        if (abs(A.at(p, q)) <= skip) continue;
        sym_rotation(A.at(p, p), A.at(q, q), A.at(p, q), rot);
        mul(tw, rot.t, A.at(p, q));
        sub(A.at(p, p), A.at(p, p), tw);
        add(A.at(q, q), A.at(q, q), tw);
        A.at(p, q).set_zero();
        A.at(q, p).set_zero();
#pragma omp parallel
        {
          Real u0(bits), u1(bits), tmp(bits);
#pragma omp for schedule(static) nowait
          for (int k = 0; k < n; ++k) {
            if (k != p && k != q) {
              mul(u0, rot.c, A.at(k, p));
              fms_acc(u0, rot.s, A.at(k, q), tmp);
              mul(u1, rot.s, A.at(k, p));
              fma_acc(u1, rot.c, A.at(k, q));
              A.at(k, p).set(u0);
              A.at(k, q).set(u1);
              A.at(p, k).set(u0);
              A.at(q, k).set(u1);
            }
            if (opt.want_vectors) {
              mul(u0, rot.c, V.at(k, p));
              fms_acc(u0, rot.s, V.at(k, q), tmp);
              mul(u1, rot.s, V.at(k, p));
              fma_acc(u1, rot.c, V.at(k, q));
              V.at(k, p).set(u0);
              V.at(k, q).set(u1);
            }
          }
        }
      }
  }

  if (!done && offdiag_frobenius(A) > conv)
    throw ConvergenceError("jacobi_sym: no convergence for dim " + std::to_string(n) + " at " +
                           std::to_string(digits) + " digits after " +
                           std::to_string(opt.max_sweeps) + " sweeps");
  res.sweeps = sweep;

  if (opt.want_vectors && pre.rows() == n) {
    RealMat full;
    matmul(full, pre, V);
    V = std::move(full);
  }

  std::vector<Real> diag;
  diag.reserve(n);
  for (int i = 0; i < n; ++i) diag.push_back(A.at(i, i));
  sort_ascending(res, diag, V, opt.want_vectors, n);
  return res;
}

// ---------------------------------------------------------------------------
// complex Hermitian Jacobi, same structure
// ---------------------------------------------------------------------------

namespace {

// dst = c*x + s*y (c real, s complex); dst must not alias x or y
inline void rot_combo(Cplx& dst, const Real& c, const Cplx& x, const Cplx& s, const Cplx& y,
                      Real& tmp) {
  mul(dst.re, c, x.re);
  mul(dst.im, c, x.im);
  fma_acc(dst.re, s.re, y.re);
  fms_acc(dst.re, s.im, y.im, tmp);
  fma_acc(dst.im, s.re, y.im);
  fma_acc(dst.im, s.im, y.re);
}

}  // namespace

HermJacobiResult jacobi_herm(CplxMat A, int digits, const JacobiOptions& opt) {
  int n = A.rows();
  if (n != A.cols()) throw DomainError("jacobi_herm: square matrix required");
  mpfr_prec_t bits = A.bits();
  HermJacobiResult res;
  if (n == 0) return res;

  Real scale = frobenius(A);
  Real conv = pow10(2 - digits, bits) * scale;
  Real skip = conv;
  {
    Real denom(static_cast<long>(4 * n), bits);
    div(skip, conv, denom);
  }

  CplxMat pre;
  if (!scale.is_zero() && n >= 4 && opt.precondition) {
    pre = precondition_basis(A);
    if (pre.rows() == n) {
      CplxMat t;
      matmul(t, A, pre);
      matmul_ahb_herm_result(A, pre, t);
    }
  }

  CplxMat V = opt.want_vectors ? CplxMat::identity(n, bits) : CplxMat();

  bool done = scale.is_zero();
  int sweep = 0;
  HermRot rot(bits);
  Real tw(bits);
  for (; sweep < opt.max_sweeps && !done; ++sweep) {
    if (offdiag_frobenius(A) <= conv) {
      done = true;
      break;
    }
    for (int p = 0; p < n - 1; ++p)
      for (int q = p + 1; q < n; ++q) {
        if (cabs(A.at(p, q)) <= skip) continue;
        herm_rotation(A.at(p, p).re, A.at(q, q).re, A.at(p, q), rot);
        mul(tw, rot.t, rot.absw);
        sub(A.at(p, p).re, A.at(p, p).re, tw);
        add(A.at(q, q).re, A.at(q, q).re, tw);
        A.at(p, q).set_zero();
        A.at(q, p).set_zero();
        A.at(p, p).im.set_zero();
        A.at(q, q).im.set_zero();
        Cplx cs = rot.s.conj();
        Cplx ms = rot.s;
        mpfr_neg(ms.re.raw(), ms.re.raw(), RND);
        mpfr_neg(ms.im.raw(), ms.im.raw(), RND);
        Cplx msc = cs;
        mpfr_neg(msc.re.raw(), msc.re.raw(), RND);
        mpfr_neg(msc.im.raw(), msc.im.raw(), RND);
#pragma omp parallel
        {
          Cplx u0(bits), u1(bits);
          Real tmp(bits);
#pragma omp for schedule(static) nowait
          for (int k = 0; k < n; ++k) {
            if (k != p && k != q) {
              // rows of G^dagger A, mirrored into columns by Hermiticity
              rot_combo(u0, rot.c, A.at(p, k), cs, A.at(q, k), tmp);
              rot_combo(u1, rot.c, A.at(q, k), ms, A.at(p, k), tmp);
              A.at(p, k).set(u0);
              A.at(q, k).set(u1);
              A.at(k, p) = u0.conj();
              A.at(k, q) = u1.conj();
            }
            if (opt.want_vectors) {
              rot_combo(u0, rot.c, V.at(k, p), rot.s, V.at(k, q), tmp);
              rot_combo(u1, rot.c, V.at(k, q), msc, V.at(k, p), tmp);
              V.at(k, p).set(u0);
              V.at(k, q).set(u1);
            }
          }
        }
      }
  }

  if (!done && offdiag_frobenius(A) > conv)
    throw ConvergenceError("jacobi_herm: no convergence for dim " + std::to_string(n) + " at " +
                           std::to_string(digits) + " digits after " +
                           std::to_string(opt.max_sweeps) + " sweeps");
  res.sweeps = sweep;

  if (opt.want_vectors && pre.rows() == n) {
    CplxMat full;
    matmul(full, pre, V);
    V = std::move(full);
  }

  std::vector<Real> diag;
  diag.reserve(n);
  for (int i = 0; i < n; ++i) diag.push_back(A.at(i, i).re);
  sort_ascending(res, diag, V, opt.want_vectors, n);
  return res;
}

// ---------------------------------------------------------------------------
// products
// ---------------------------------------------------------------------------

void matmul(RealMat& out, const RealMat& a, const RealMat& b) {
  int m = a.rows(), k = a.cols(), n = b.cols();
  if (k != b.rows()) throw DomainError("matmul: shape mismatch");
  out = RealMat(m, n, a.bits());
#pragma omp parallel for schedule(static)
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j) {
      Real& acc = out.at(i, j);
      for (int l = 0; l < k; ++l) fma_acc(acc, a.at(i, l), b.at(l, j));
    }
}

void matmul_abt(RealMat& out, const RealMat& a, const RealMat& b) {
  int m = a.rows(), k = a.cols(), n = b.rows();
  if (k != b.cols()) throw DomainError("matmul_abt: shape mismatch");
  out = RealMat(m, n, a.bits());
#pragma omp parallel for schedule(static)
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j) {
      Real& acc = out.at(i, j);
      for (int l = 0; l < k; ++l) fma_acc(acc, a.at(i, l), b.at(j, l));
    }
}

void matmul(CplxMat& out, const CplxMat& a, const CplxMat& b) {
  int m = a.rows(), k = a.cols(), n = b.cols();
  if (k != b.rows()) throw DomainError("matmul: shape mismatch");
  out = CplxMat(m, n, a.bits());
#pragma omp parallel for schedule(static)
  for (int i = 0; i < m; ++i) {
    Real tmp(a.bits());
    for (int j = 0; j < n; ++j) {
      Cplx& acc = out.at(i, j);
      for (int l = 0; l < k; ++l) cfma_acc(acc, a.at(i, l), b.at(l, j), tmp);
    }
  }
}

void matmul_abh(CplxMat& out, const CplxMat& a, const CplxMat& b) {
  int m = a.rows(), k = a.cols(), n = b.rows();
  if (k != b.cols()) throw DomainError("matmul_abh: shape mismatch");
  out = CplxMat(m, n, a.bits());
#pragma omp parallel for schedule(static)
  for (int i = 0; i < m; ++i) {
    Real tmp(a.bits());
    for (int j = 0; j < n; ++j) {
      Cplx& acc = out.at(i, j);
      for (int l = 0; l < k; ++l) {
        const Cplx& x = a.at(i, l);
        const Cplx& y = b.at(j, l);
        fma_acc(acc.re, x.re, y.re);
        fma_acc(acc.re, x.im, y.im);
        fms_acc(acc.im, x.re, y.im, tmp);
        fma_acc(acc.im, x.im, y.re);
      }
    }
  }
}

void matmul_sym_result(RealMat& out, const RealMat& a, const RealMat& b) {
  int n = a.rows(), k = a.cols();
  if (k != b.rows() || n != b.cols()) throw DomainError("matmul_sym_result: shape mismatch");
  out = RealMat(n, n, a.bits());
#pragma omp parallel for schedule(dynamic)
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      Real& acc = out.at(i, j);
      for (int l = 0; l < k; ++l) fma_acc(acc, a.at(i, l), b.at(l, j));
      if (j != i) out.at(j, i).set(acc);
    }
}

void matmul_abt_sym_result(RealMat& out, const RealMat& a, const RealMat& b) {
  int n = a.rows(), k = a.cols();
  if (k != b.cols() || n != b.rows()) throw DomainError("matmul_abt_sym_result: shape mismatch");
  out = RealMat(n, n, a.bits());
#pragma omp parallel for schedule(dynamic)
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      Real& acc = out.at(i, j);
      for (int l = 0; l < k; ++l) fma_acc(acc, a.at(i, l), b.at(j, l));
      if (j != i) out.at(j, i).set(acc);
    }
}

void matmul_herm_result(CplxMat& out, const CplxMat& a, const CplxMat& b) {
  int n = a.rows(), k = a.cols();
  if (k != b.rows() || n != b.cols()) throw DomainError("matmul_herm_result: shape mismatch");
  out = CplxMat(n, n, a.bits());
#pragma omp parallel for schedule(dynamic)
  for (int i = 0; i < n; ++i) {
    Real tmp(a.bits());
    for (int j = i; j < n; ++j) {
      Cplx& acc = out.at(i, j);
      for (int l = 0; l < k; ++l) cfma_acc(acc, a.at(i, l), b.at(l, j), tmp);
      if (j == i)
        acc.im.set_zero();
      else
        out.at(j, i) = acc.conj();
    }
  }
}

void matmul_abh_herm_result(CplxMat& out, const CplxMat& a, const CplxMat& b) {
  int n = a.rows(), k = a.cols();
  if (k != b.cols() || n != b.rows()) throw DomainError("matmul_abh_herm_result: shape mismatch");
  out = CplxMat(n, n, a.bits());
#pragma omp parallel for schedule(dynamic)
  for (int i = 0; i < n; ++i) {
    Real tmp(a.bits());
    for (int j = i; j < n; ++j) {
      Cplx& acc = out.at(i, j);
      for (int l = 0; l < k; ++l) {
        const Cplx& x = a.at(i, l);
        const Cplx& y = b.at(j, l);
        fma_acc(acc.re, x.re, y.re);
        fma_acc(acc.re, x.im, y.im);
        fms_acc(acc.im, x.re, y.im, tmp);
        fma_acc(acc.im, x.im, y.re);
      }
      if (j == i)
        acc.im.set_zero();
      else
        out.at(j, i) = acc.conj();
    }
  }
}

// ---------------------------------------------------------------------------
// serial references
// ---------------------------------------------------------------------------

namespace serial_ref {

SymJacobiResult jacobi_sym_cyclic(RealMat A, int digits, const JacobiOptions& opt) {
  int n = A.rows();
  mpfr_prec_t bits = A.bits();
  SymJacobiResult res;
  if (n == 0) return res;
  RealMat V = opt.want_vectors ? RealMat::identity(n, bits) : RealMat();
  Real scale = A.frobenius();
  Real conv = pow10(2 - digits, bits) * scale;
  Real skip = conv;
  {
    Real denom(static_cast<long>(4 * n), bits);
    div(skip, conv, denom);
  }
  bool done = scale.is_zero();
  int sweep = 0;
  SymRot r(bits);
  Real u0(bits), u1(bits), tmp(bits), tw(bits);
  for (; sweep < opt.max_sweeps && !done; ++sweep) {
    if (offdiag_frobenius(A) <= conv) {
      done = true;
      break;
    }
    for (int p = 0; p < n - 1; ++p)
      for (int q = p + 1; q < n; ++q) {
        if (abs(A.at(p, q)) <= skip) continue;
        sym_rotation(A.at(p, p), A.at(q, q), A.at(p, q), r);
        mul(tw, r.t, A.at(p, q));
        sub(A.at(p, p), A.at(p, p), tw);
        add(A.at(q, q), A.at(q, q), tw);
        A.at(p, q).set_zero();
        A.at(q, p).set_zero();
        for (int k = 0; k < n; ++k) {
          if (k == p || k == q) continue;
          mul(u0, r.c, A.at(k, p));
          fms_acc(u0, r.s, A.at(k, q), tmp);
          mul(u1, r.s, A.at(k, p));
          fma_acc(u1, r.c, A.at(k, q));
          A.at(k, p).set(u0);
          A.at(k, q).set(u1);
          A.at(p, k).set(u0);
          A.at(q, k).set(u1);
        }
        if (opt.want_vectors)
          for (int k = 0; k < n; ++k) {
            mul(u0, r.c, V.at(k, p));
            fms_acc(u0, r.s, V.at(k, q), tmp);
            mul(u1, r.s, V.at(k, p));
            fma_acc(u1, r.c, V.at(k, q));
            V.at(k, p).set(u0);
            V.at(k, q).set(u1);
          }
      }
  }
  if (!done && offdiag_frobenius(A) > conv)
    throw ConvergenceError("jacobi_sym_cyclic: no convergence for dim " + std::to_string(n));
  res.sweeps = sweep;
  std::vector<Real> diag;
  diag.reserve(n);
  for (int i = 0; i < n; ++i) diag.push_back(A.at(i, i));
  sort_ascending(res, diag, V, opt.want_vectors, n);
  return res;
}

HermJacobiResult jacobi_herm_cyclic(CplxMat A, int digits, const JacobiOptions& opt) {
  int n = A.rows();
  mpfr_prec_t bits = A.bits();
  HermJacobiResult res;
  if (n == 0) return res;
  CplxMat V = opt.want_vectors ? CplxMat::identity(n, bits) : CplxMat();
  Real scale = frobenius(A);
  Real conv = pow10(2 - digits, bits) * scale;
  Real skip = conv;
  {
    Real denom(static_cast<long>(4 * n), bits);
    div(skip, conv, denom);
  }
  bool done = scale.is_zero();
  int sweep = 0;
  HermRot r(bits);
  Cplx u0(bits), u1(bits), sc(bits), ms(bits);
  Real tmp(bits), tw(bits);
  for (; sweep < opt.max_sweeps && !done; ++sweep) {
    if (offdiag_frobenius(A) <= conv) {
      done = true;
      break;
    }
    for (int p = 0; p < n - 1; ++p)
      for (int q = p + 1; q < n; ++q) {
        if (cabs(A.at(p, q)) <= skip) continue;
        herm_rotation(A.at(p, p).re, A.at(q, q).re, A.at(p, q), r);
        mul(tw, r.t, r.absw);
        sub(A.at(p, p).re, A.at(p, p).re, tw);
        add(A.at(q, q).re, A.at(q, q).re, tw);
        A.at(p, q).set_zero();
        A.at(q, p).set_zero();
        sc = r.s.conj();
        ms = r.s;
        mpfr_neg(ms.re.raw(), ms.re.raw(), RND);
        mpfr_neg(ms.im.raw(), ms.im.raw(), RND);
        for (int k = 0; k < n; ++k) {
          if (k == p || k == q) continue;
          rot_combo(u0, r.c, A.at(p, k), sc, A.at(q, k), tmp);
          rot_combo(u1, r.c, A.at(q, k), ms, A.at(p, k), tmp);
          A.at(p, k).set(u0);
          A.at(q, k).set(u1);
          A.at(k, p) = u0.conj();
          A.at(k, q) = u1.conj();
        }
        if (opt.want_vectors) {
          Cplx msc = r.s.conj();
          mpfr_neg(msc.re.raw(), msc.re.raw(), RND);
          mpfr_neg(msc.im.raw(), msc.im.raw(), RND);
          for (int k = 0; k < n; ++k) {
            rot_combo(u0, r.c, V.at(k, p), r.s, V.at(k, q), tmp);
            rot_combo(u1, r.c, V.at(k, q), msc, V.at(k, p), tmp);
            V.at(k, p).set(u0);
            V.at(k, q).set(u1);
          }
        }
      }
  }
  if (!done && offdiag_frobenius(A) > conv)
    throw ConvergenceError("jacobi_herm_cyclic: no convergence for dim " + std::to_string(n));
  res.sweeps = sweep;
  std::vector<Real> diag;
  diag.reserve(n);
  for (int i = 0; i < n; ++i) diag.push_back(A.at(i, i).re);
  sort_ascending(res, diag, V, opt.want_vectors, n);
  return res;
}

void matmul(RealMat& out, const RealMat& a, const RealMat& b) {
  int m = a.rows(), k = a.cols(), n = b.cols();
  out = RealMat(m, n, a.bits());
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j)
      for (int l = 0; l < k; ++l) fma_acc(out.at(i, j), a.at(i, l), b.at(l, j));
}

void matmul(CplxMat& out, const CplxMat& a, const CplxMat& b) {
  int m = a.rows(), k = a.cols(), n = b.cols();
  out = CplxMat(m, n, a.bits());
  Real tmp(a.bits());
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j)
      for (int l = 0; l < k; ++l) cfma_acc(out.at(i, j), a.at(i, l), b.at(l, j), tmp);
}

}  // namespace serial_ref

}  // namespace qmi::mp
