#pragma once

#include "qmi/mp_real.hpp"

namespace qmi::mp {

// Complex number over Real. Kept deliberately small; the complex kernels
// manipulate components directly.
struct Cplx {
  Real re, im;

  Cplx() = default;
  explicit Cplx(mpfr_prec_t bits) : re(bits), im(bits) {}
  Cplx(double r, double i, mpfr_prec_t bits) : re(r, bits), im(i, bits) {}

  mpfr_prec_t prec() const { return re.prec(); }
  void set_zero() {
    re.set_zero();
    im.set_zero();
  }
  void set(const Cplx& o) {
    re.set(o.re);
    im.set(o.im);
  }
  Cplx conj() const {
    Cplx r(*this);
    mpfr_neg(r.im.raw(), r.im.raw(), RND);
    return r;
  }
};

// dst += a * b
inline void cfma_acc(Cplx& dst, const Cplx& a, const Cplx& b, Real& tmp) {
  fma_acc(dst.re, a.re, b.re);
  fms_acc(dst.re, a.im, b.im, tmp);
  fma_acc(dst.im, a.re, b.im);
  fma_acc(dst.im, a.im, b.re);
}

// dst += conj(a) * b
inline void cfma_conj_acc(Cplx& dst, const Cplx& a, const Cplx& b, Real& tmp) {
  fma_acc(dst.re, a.re, b.re);
  fma_acc(dst.re, a.im, b.im);
  fma_acc(dst.im, a.re, b.im);
  fms_acc(dst.im, a.im, b.re, tmp);
}

inline void cmul(Cplx& dst, const Cplx& a, const Cplx& b, Real& tmp) {
  dst.set_zero();
  cfma_acc(dst, a, b, tmp);
}

inline Real abs2(const Cplx& a) {
  Real r(a.prec());
  mul(r, a.re, a.re);
  fma_acc(r, a.im, a.im);
  return r;
}

inline Real cabs(const Cplx& a) { return hypot(a.re, a.im); }

}  // namespace qmi::mp
