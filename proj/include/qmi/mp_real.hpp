#pragma once

#include <mpfr.h>

#include <string>
#include <utility>

namespace qmi::mp {

// All mpfr operations use round-to-nearest so results are a deterministic
// function of inputs and precision.
inline constexpr mpfr_rnd_t RND = MPFR_RNDN;

// Bits for a decimal digit count, padded with guard bits and aligned to the
// limb size (keeps gmp on its fastest code paths).
inline mpfr_prec_t bits_for_digits(int digits) {
  double raw = digits * 3.3219280948873626 + 16.0;
  long b = static_cast<long>(raw) + 1;
  return static_cast<mpfr_prec_t>(((b + 63) / 64) * 64);
}

// RAII wrapper around mpfr_t. Each value carries its own precision; binary
// operators produce results at the wider operand precision. Hot kernels avoid
// operator temporaries and work through the in-place helpers below.
class Real {
 public:
  Real() { mpfr_init2(v_, 64); }
  explicit Real(mpfr_prec_t bits) { mpfr_init2(v_, bits); }
  Real(double x, mpfr_prec_t bits) {
    mpfr_init2(v_, bits);
    mpfr_set_d(v_, x, RND);
  }
  Real(long x, mpfr_prec_t bits) {
    mpfr_init2(v_, bits);
    mpfr_set_si(v_, x, RND);
  }
  Real(const Real& o) {
    mpfr_init2(v_, mpfr_get_prec(o.v_));
    mpfr_set(v_, o.v_, RND);
  }
  Real(Real&& o) noexcept {
    mpfr_init2(v_, 2);
    mpfr_swap(v_, o.v_);
  }
  Real& operator=(const Real& o) {
    if (this != &o) {
      mpfr_set_prec(v_, mpfr_get_prec(o.v_));
      mpfr_set(v_, o.v_, RND);
    }
    return *this;
  }
  Real& operator=(Real&& o) noexcept {
    mpfr_swap(v_, o.v_);
    return *this;
  }
  ~Real() { mpfr_clear(v_); }

  mpfr_ptr raw() { return v_; }
  mpfr_srcptr raw() const { return v_; }
  mpfr_prec_t prec() const { return mpfr_get_prec(v_); }

  void set(double x) { mpfr_set_d(v_, x, RND); }
  void set(long x) { mpfr_set_si(v_, x, RND); }
  void set(const Real& o) { mpfr_set(v_, o.v_, RND); }
  void set_zero() { mpfr_set_zero(v_, 1); }
  void set_str(const std::string& s) { mpfr_set_str(v_, s.c_str(), 10, RND); }

  double to_double() const { return mpfr_get_d(v_, RND); }
  bool is_nan() const { return mpfr_nan_p(v_) != 0; }
  bool is_zero() const { return mpfr_zero_p(v_) != 0; }
  int sgn() const { return mpfr_sgn(v_); }

  bool operator<(const Real& o) const { return mpfr_less_p(v_, o.v_) != 0; }
  bool operator>(const Real& o) const { return mpfr_greater_p(v_, o.v_) != 0; }
  bool operator<=(const Real& o) const { return mpfr_lessequal_p(v_, o.v_) != 0; }
  bool operator>=(const Real& o) const { return mpfr_greaterequal_p(v_, o.v_) != 0; }
  bool operator==(const Real& o) const { return mpfr_equal_p(v_, o.v_) != 0; }
  bool identical_bits(const Real& o) const {
    if (mpfr_nan_p(v_) || mpfr_nan_p(o.v_)) return mpfr_nan_p(v_) && mpfr_nan_p(o.v_);
    return prec() == o.prec() && mpfr_cmp(v_, o.v_) == 0;
  }

  std::string str(int out_digits = 0) const;

 private:
  mpfr_t v_;
};

inline mpfr_prec_t wider(const Real& a, const Real& b) {
  return a.prec() > b.prec() ? a.prec() : b.prec();
}

// ---- in-place helpers (no temporaries; the hot path) ----

inline void add(Real& dst, const Real& a, const Real& b) { mpfr_add(dst.raw(), a.raw(), b.raw(), RND); }
inline void sub(Real& dst, const Real& a, const Real& b) { mpfr_sub(dst.raw(), a.raw(), b.raw(), RND); }
inline void mul(Real& dst, const Real& a, const Real& b) { mpfr_mul(dst.raw(), a.raw(), b.raw(), RND); }
inline void div(Real& dst, const Real& a, const Real& b) { mpfr_div(dst.raw(), a.raw(), b.raw(), RND); }
inline void neg(Real& dst, const Real& a) { mpfr_neg(dst.raw(), a.raw(), RND); }
// dst += a*b
inline void fma_acc(Real& dst, const Real& a, const Real& b) {
  mpfr_fma(dst.raw(), a.raw(), b.raw(), dst.raw(), RND);
}
// dst -= a*b
inline void fms_acc(Real& dst, const Real& a, const Real& b, Real& tmp) {
  mpfr_mul(tmp.raw(), a.raw(), b.raw(), RND);
  mpfr_sub(dst.raw(), dst.raw(), tmp.raw(), RND);
}

// ---- value-returning convenience (setup / cold paths) ----

inline Real operator+(const Real& a, const Real& b) {
  Real r(wider(a, b));
  add(r, a, b);
  return r;
}
inline Real operator-(const Real& a, const Real& b) {
  Real r(wider(a, b));
  sub(r, a, b);
  return r;
}
inline Real operator*(const Real& a, const Real& b) {
  Real r(wider(a, b));
  mul(r, a, b);
  return r;
}
inline Real operator/(const Real& a, const Real& b) {
  Real r(wider(a, b));
  div(r, a, b);
  return r;
}
inline Real operator-(const Real& a) {
  Real r(a.prec());
  neg(r, a);
  return r;
}

inline Real abs(const Real& a) {
  Real r(a.prec());
  mpfr_abs(r.raw(), a.raw(), RND);
  return r;
}
inline Real sqrt(const Real& a) {
  Real r(a.prec());
  mpfr_sqrt(r.raw(), a.raw(), RND);
  return r;
}
inline Real log(const Real& a) {
  Real r(a.prec());
  mpfr_log(r.raw(), a.raw(), RND);
  return r;
}
// log(1 + a)
inline Real log1p(const Real& a) {
  Real r(a.prec());
  mpfr_log1p(r.raw(), a.raw(), RND);
  return r;
}
inline Real exp(const Real& a) {
  Real r(a.prec());
  mpfr_exp(r.raw(), a.raw(), RND);
  return r;
}
// a^p for a > 0 (or integer p)
inline Real pow(const Real& a, const Real& p) {
  Real r(wider(a, p));
  mpfr_pow(r.raw(), a.raw(), p.raw(), RND);
  return r;
}
inline Real pow_si(const Real& a, long p) {
  Real r(a.prec());
  mpfr_pow_si(r.raw(), a.raw(), p, RND);
  return r;
}
inline Real const_pi(mpfr_prec_t bits) {
  Real r(bits);
  mpfr_const_pi(r.raw(), RND);
  return r;
}
inline Real hypot(const Real& a, const Real& b) {
  Real r(wider(a, b));
  mpfr_hypot(r.raw(), a.raw(), b.raw(), RND);
  return r;
}
// 10^e at the given precision
inline Real pow10(long e, mpfr_prec_t bits) {
  Real r(bits);
  mpfr_ui_pow_ui(r.raw(), 10u, static_cast<unsigned long>(e >= 0 ? e : -e), RND);
  if (e < 0) mpfr_ui_div(r.raw(), 1u, r.raw(), RND);
  return r;
}

}  // namespace qmi::mp
