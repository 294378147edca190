#pragma once

#include <vector>

#include "qmi/errors.hpp"
#include "qmi/mp_complex.hpp"
#include "qmi/mp_real.hpp"

namespace qmi::mp {

// Dense real matrix, row-major, all entries at one precision.
class RealMat {
 public:
  RealMat() : rows_(0), cols_(0), bits_(64) {}
  RealMat(int rows, int cols, mpfr_prec_t bits)
      : rows_(rows), cols_(cols), bits_(bits), a_(static_cast<size_t>(rows) * cols, Real(bits)) {
    for (auto& x : a_) x.set_zero();
  }

  static RealMat identity(int n, mpfr_prec_t bits) {
    RealMat m(n, n, bits);
    for (int i = 0; i < n; ++i) m.at(i, i).set(1.0);
    return m;
  }

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  mpfr_prec_t bits() const { return bits_; }

  Real& at(int i, int j) { return a_[static_cast<size_t>(i) * cols_ + j]; }
  const Real& at(int i, int j) const { return a_[static_cast<size_t>(i) * cols_ + j]; }

  double at_d(int i, int j) const { return at(i, j).to_double(); }

  // max |a_ij|
  Real max_abs() const {
    Real m(bits_);
    m.set_zero();
    Real t(bits_);
    for (const auto& x : a_) {
      mpfr_abs(t.raw(), x.raw(), RND);
      if (t > m) m.set(t);
    }
    return m;
  }

  Real frobenius() const {
    Real s(bits_);
    s.set_zero();
    for (const auto& x : a_) fma_acc(s, x, x);
    return sqrt(s);
  }

  bool is_symmetric() const {
    if (rows_ != cols_) return false;
    for (int i = 0; i < rows_; ++i)
      for (int j = i + 1; j < cols_; ++j)
        if (!(at(i, j) == at(j, i))) return false;
    return true;
  }

 private:
  int rows_, cols_;
  mpfr_prec_t bits_;
  std::vector<Real> a_;
};

// Dense complex matrix, row-major.
class CplxMat {
 public:
  CplxMat() : rows_(0), cols_(0), bits_(64) {}
  CplxMat(int rows, int cols, mpfr_prec_t bits)
      : rows_(rows), cols_(cols), bits_(bits), a_(static_cast<size_t>(rows) * cols, Cplx(bits)) {
    for (auto& x : a_) x.set_zero();
  }

  static CplxMat identity(int n, mpfr_prec_t bits) {
    CplxMat m(n, n, bits);
    for (int i = 0; i < n; ++i) m.at(i, i).re.set(1.0);
    return m;
  }

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  mpfr_prec_t bits() const { return bits_; }

  Cplx& at(int i, int j) { return a_[static_cast<size_t>(i) * cols_ + j]; }
  const Cplx& at(int i, int j) const { return a_[static_cast<size_t>(i) * cols_ + j]; }

  Real max_abs() const {
    Real m(bits_);
    m.set_zero();
    for (const auto& x : a_) {
      Real t = cabs(x);
      if (t > m) m.set(t);
    }
    return m;
  }

  // Exact storage-level conjugate symmetry.
  bool is_hermitian() const {
    if (rows_ != cols_) return false;
    for (int i = 0; i < rows_; ++i) {
      if (!at(i, i).im.is_zero()) return false;
      for (int j = i + 1; j < cols_; ++j) {
        Cplx c = at(j, i).conj();
        if (!(at(i, j).re == c.re) || !(at(i, j).im == c.im)) return false;
      }
    }
    return true;
  }

  // True when the diagonal is real and off-diagonal entries are purely
  // imaginary; such matrices rotate to a real symmetric form.
  bool is_imag_offdiag() const {
    if (rows_ != cols_) return false;
    for (int i = 0; i < rows_; ++i)
      for (int j = 0; j < cols_; ++j) {
        if (i == j && !at(i, j).im.is_zero()) return false;
        if (i != j && !at(i, j).re.is_zero()) return false;
      }
    return true;
  }

 private:
  int rows_, cols_;
  mpfr_prec_t bits_;
  std::vector<Cplx> a_;
};

}  // namespace qmi::mp
