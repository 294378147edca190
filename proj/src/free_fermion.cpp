#include "qmi/free_fermion.hpp"

#include <algorithm>
#include <cmath>

namespace qmi::ff {

using mp::Cplx;
using mp::CplxMat;
using mp::Real;
using mp::RealMat;

namespace {

// site coordinates 1..lA and lA+d+1..lA+d+lB
std::vector<int> site_coords(const Partition& p) {
  std::vector<int> s;
  s.reserve(p.dim());
  for (int i = 1; i <= p.ell_a; ++i) s.push_back(i);
  for (int i = 1; i <= p.ell_b; ++i) s.push_back(p.ell_a + p.d + i);
  return s;
}

}  // namespace

CorrMatrix build_corr_matrix(const Partition& part, int digits) {
  part.validate();
  int n = part.dim();
  mpfr_prec_t bits = mp::bits_for_digits(digits);
  CorrMatrix c;
  c.partition = part;
  c.analytic = true;
  c.entries = CplxMat(n, n, bits);
  auto sites = site_coords(part);
  Real pi = mp::const_pi(bits);
  Real t(bits);
  for (int i = 0; i < n; ++i) {
    c.entries.at(i, i).re.set(0.5);
    for (int j = i + 1; j < n; ++j) {
      int m = sites[j] - sites[i];
      if (m % 2 == 0) continue;  // ((-1)^m - 1) vanishes at even distances
      // i/(pi*m) for the stored (row < col) order; Hermitian partner mirrored
      Real den(static_cast<long>(m), bits);
      mul(den, den, pi);
      t.set(1.0);
      div(t, t, den);
      c.entries.at(i, j).im.set(t);
      mpfr_neg(t.raw(), t.raw(), mp::RND);
      c.entries.at(j, i).im.set(t);
    }
  }
  return c;
}

CorrMatrix decouple(const CorrMatrix& c) {
  CorrMatrix out = c;
  out.decoupled = true;
  int na = c.partition.ell_a, n = c.partition.dim();
  for (int i = 0; i < na; ++i)
    for (int j = na; j < n; ++j) {
      out.entries.at(i, j).set_zero();
      out.entries.at(j, i).set_zero();
    }
  return out;
}

// Real diagonal, zero at even site distances, purely imaginary at odd ones:
// exactly the structure the diagonal phase i^site rotates to a real matrix.
bool is_phase_rotatable(const CorrMatrix& c) {
  const CplxMat& m = c.entries;
  int n = m.rows();
  auto sites = site_coords(c.partition);
  for (int a = 0; a < n; ++a) {
    if (!m.at(a, a).im.is_zero()) return false;
    for (int b = a + 1; b < n; ++b) {
      if (!m.at(a, b).re.is_zero()) return false;
      if ((sites[b] - sites[a]) % 2 == 0 && !m.at(a, b).im.is_zero()) return false;
    }
  }
  return true;
}

RealMat corr_rotated_real(const CorrMatrix& c) {
  const CplxMat& m = c.entries;
  if (!is_phase_rotatable(c))
    throw DomainError("corr_rotated_real: matrix is not of the real-rotatable form");
  int n = m.rows();
  RealMat out(n, n, m.bits());
  auto sites = site_coords(c.partition);
  // (D C D^dagger)_{ab} = i^{site_a - site_b} C_{ab}; at odd site distance the
  // purely imaginary entry i*y becomes real with sign i^{1 - dist}
  for (int a = 0; a < n; ++a) {
    out.at(a, a).set(m.at(a, a).re);
    for (int b = a + 1; b < n; ++b) {
      int mdist = sites[b] - sites[a];
      if (mdist % 2 == 0) continue;  // entry is exactly zero
      int ph = ((1 - mdist) % 4 + 4) % 4;  // 0 or 2
      Real v = m.at(a, b).im;
      if (ph == 2) mpfr_neg(v.raw(), v.raw(), mp::RND);
      out.at(a, b).set(v);
      out.at(b, a).set(v);
    }
  }
  return out;
}

namespace {

// clamp spectrum into [0, 1]; endpoints hit exactly when unresolvable
void clamp_unit_interval(std::vector<Real>& evs, int digits, const char* what) {
  if (evs.empty()) return;
  mpfr_prec_t bits = evs[0].prec();
  Real tol = mp::pow10(10 - digits, bits);
  Real lo(bits), hi(bits);
  neg(lo, tol);
  hi.set(1.0);
  add(hi, hi, tol);
  Real one(1.0, bits);
  for (auto& ev : evs) {
    if (ev.sgn() < 0) {
      if (ev < lo)
        throw DomainError(std::string(what) + ": eigenvalue " + ev.str(8) + " below tolerance");
      ev.set_zero();
    } else if (ev > one) {
      if (ev > hi)
        throw DomainError(std::string(what) + ": eigenvalue above 1 beyond tolerance");
      ev.set(one);
    }
  }
}

// sum of log(1 - nu); singular at nu == 1
Real logdet_one_minus(const std::vector<Real>& evs, mpfr_prec_t bits) {
  Real acc(bits), t(bits);
  acc.set_zero();
  for (const auto& nu : evs) {
    neg(t, nu);
    mpfr_log1p(t.raw(), t.raw(), mp::RND);
    if (mpfr_inf_p(t.raw()))
      throw SingularityError("azrmi_ff: eigenvalue of C at 1, 1-C singular at this precision");
    add(acc, acc, t);
  }
  return acc;
}

RealMat submatrix(const RealMat& m, int r0, int c0, int nr, int nc) {
  RealMat out(nr, nc, m.bits());
  for (int i = 0; i < nr; ++i)
    for (int j = 0; j < nc; ++j) out.at(i, j).set(m.at(r0 + i, c0 + j));
  return out;
}

bool equal_bits(const RealMat& a, const RealMat& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) return false;
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j)
      if (!a.at(i, j).identical_bits(b.at(i, j))) return false;
  return true;
}

}  // namespace

PartitionEigs prepare_partition(const Partition& part, int digits) {
  CorrMatrix c = build_corr_matrix(part, digits);
  RealMat rot = corr_rotated_real(c);
  PrecisionPolicy pol;
  pol.digits = digits;

  PartitionEigs pe;
  pe.partition = part;
  pe.digits = digits;
  pe.full = mp::eigh(rot, pol);
  clamp_unit_interval(pe.full.eigenvalues, digits, "prepare_partition(C)");

  RealMat aa = submatrix(rot, 0, 0, part.ell_a, part.ell_a);
  pe.block_a = mp::eigh(aa, pol);
  clamp_unit_interval(pe.block_a.eigenvalues, digits, "prepare_partition(C_AA)");

  if (part.ell_a == part.ell_b) {
    RealMat bb = submatrix(rot, part.ell_a, part.ell_a, part.ell_b, part.ell_b);
    pe.blocks_equal = equal_bits(aa, bb);
    if (!pe.blocks_equal) pe.block_b = mp::eigh(bb, pol);
  } else {
    RealMat bb = submatrix(rot, part.ell_a, part.ell_a, part.ell_b, part.ell_b);
    pe.block_b = mp::eigh(bb, pol);
  }
  if (!pe.blocks_equal) clamp_unit_interval(pe.block_b.eigenvalues, digits, "prepare_partition(C_BB)");

  mpfr_prec_t bits = rot.bits();
  pe.l1 = logdet_one_minus(pe.full.eigenvalues, bits);
  Real l2a = logdet_one_minus(pe.block_a.eigenvalues, bits);
  if (pe.blocks_equal) {
    pe.l2 = l2a + l2a;
  } else {
    pe.l2 = l2a + logdet_one_minus(pe.block_b.eigenvalues, bits);
  }
  return pe;
}

namespace {

// clamp tiny negatives relative to the dominant eigenvalue; K inherits the
// magnitude of the half-power factors, so an absolute tolerance is meaningless
void clamp_psd_scaled(std::vector<Real>& evs, int digits, const char* what) {
  if (evs.empty()) return;
  mpfr_prec_t bits = evs[0].prec();
  Real tol = mp::pow10(10 - digits, bits);
  Real scale(bits);
  scale.set_zero();
  for (const auto& ev : evs) {
    Real a = mp::abs(ev);
    if (a > scale) scale.set(a);
  }
  Real one(1.0, bits);
  if (scale > one) mul(tol, tol, scale);
  Real mtol(bits);
  neg(mtol, tol);
  for (auto& ev : evs) {
    if (ev.sgn() < 0) {
      if (ev < mtol)
        throw SingularityError(std::string(what) +
                               ": negative eigenvalue beyond the clamp tolerance at " +
                               std::to_string(digits) + " digits");
      ev.set_zero();
    }
  }
}

// f(nu) = (nu / (1 - nu))^e with endpoint handling
void mode_power(Real& dst, const Real& nu, const Real& e, double e_d, mpfr_prec_t bits) {
  if (nu.is_zero()) {
    if (e_d > 0.0) {
      dst.set_zero();
      return;
    }
    throw SingularityError("azrmi_ff: zero mode occupation with negative exponent");
  }
  Real om(bits);
  om.set(1.0);
  sub(om, om, nu);
  if (om.sgn() <= 0) throw SingularityError("azrmi_ff: mode occupation at 1");
  Real r(bits);
  div(r, nu, om);
  mpfr_pow(dst.raw(), r.raw(), e.raw(), mp::RND);
}

}  // namespace

double azrmi_from_eigs(const PartitionEigs& pe, const RMIPoint& pt) {
  pt.validate();
  const int n = pe.partition.dim();
  const int na = pe.partition.ell_a;
  mpfr_prec_t bits = mp::bits_for_digits(pe.digits);
  PrecisionPolicy pol;
  pol.digits = pe.digits;

  Real e_half(bits);   // (1 - alpha) / (2z)
  Real e_mid(bits);    // alpha / z
  {
    Real a(pt.alpha, bits), z(pt.z, bits), one(1.0, bits), two(2.0, bits);
    sub(e_half, one, a);
    Real den(bits);
    mul(den, two, z);
    div(e_half, e_half, den);
    div(e_mid, a, z);
  }
  double e_half_d = (1.0 - pt.alpha) / (2.0 * pt.z);
  double e_mid_d = pt.alpha / pt.z;

  // S = blockdiag((C_AA/(1-C_AA))^e_half, (C_BB/(1-C_BB))^e_half)
  auto fS = [&](Real& d, const Real& nu) { mode_power(d, nu, e_half, e_half_d, bits); };
  RealMat sa = mp::spectral_map(pe.block_a, fS);
  RealMat s(n, n, bits);
  for (int i = 0; i < na; ++i)
    for (int j = 0; j < na; ++j) s.at(i, j).set(sa.at(i, j));
  if (pe.blocks_equal) {
    for (int i = 0; i < na; ++i)
      for (int j = 0; j < na; ++j) s.at(na + i, na + j).set(sa.at(i, j));
  } else {
    RealMat sb = mp::spectral_map(pe.block_b, fS);
    for (int i = 0; i < n - na; ++i)
      for (int j = 0; j < n - na; ++j) s.at(na + i, na + j).set(sb.at(i, j));
  }

  auto fR = [&](Real& d, const Real& nu) { mode_power(d, nu, e_mid, e_mid_d, bits); };
  RealMat rp = mp::spectral_map(pe.full, fR);

  RealMat t1, k;
  mp::matmul(t1, s, rp);
  mp::matmul_sym_result(k, t1, s);

  auto esk = mp::eigh(k, pol, /*want_vectors=*/false);
  clamp_psd_scaled(esk.eigenvalues, pe.digits, "azrmi_ff(K)");

  // L3 = sum log(1 + kappa^z)
  Real l3(bits), t(bits), zr(pt.z, bits);
  l3.set_zero();
  for (const auto& kap : esk.eigenvalues) {
    if (kap.is_zero()) continue;  // log1p(0)
    mpfr_pow(t.raw(), kap.raw(), zr.raw(), mp::RND);
    mpfr_log1p(t.raw(), t.raw(), mp::RND);
    add(l3, l3, t);
  }

  // I = -alpha/(1-alpha) L1 - L2 - 1/(1-alpha) L3
  Real res(bits);
  {
    Real a(pt.alpha, bits), one(1.0, bits), oma(bits), coef(bits);
    sub(oma, one, a);
    div(coef, a, oma);
    mpfr_neg(coef.raw(), coef.raw(), mp::RND);
    mul(res, coef, pe.l1);
    sub(res, res, pe.l2);
    Real inv(bits);
    div(inv, one, oma);
    Real term(bits);
    mul(term, inv, l3);
    sub(res, res, term);
  }
  return res.to_double();
}

namespace {

std::vector<int> escalation_digits(const PrecisionPolicy& policy) {
  std::vector<int> ds;
  ds.push_back(policy.digits);
  for (int d : policy.schedule)
    if (d > policy.digits) ds.push_back(d);
  return ds;
}

}  // namespace

double azrmi_ff(const Partition& part, const RMIPoint& pt, const PrecisionPolicy& policy,
                int* digits_used) {
  policy.validate();
  pt.validate();
  std::string last;
  for (int d : escalation_digits(policy)) {
    try {
      PartitionEigs pe = prepare_partition(part, d);
      double v = azrmi_from_eigs(pe, pt);
      if (digits_used) *digits_used = d;
      return v;
    } catch (const SingularityError& e) {
      last = e.what();
    } catch (const DomainError& e) {
      last = e.what();
    }
  }
  throw PrecisionError("azrmi_ff: escalation schedule exhausted for partition (" +
                       std::to_string(part.ell_a) + "," + std::to_string(part.d) + "," +
                       std::to_string(part.ell_b) + "); last: " + last);
}

namespace {

void check_decoupled_pair(const CorrMatrix& c, const CorrMatrix& cp) {
  if (cp.entries.rows() != c.entries.rows())
    throw ConfigError("azrmi_ff: C and C' dimensions differ");
  int na = c.partition.ell_a, n = c.partition.dim();
  for (int i = 0; i < na; ++i)
    for (int j = na; j < n; ++j)
      if (!cp.entries.at(i, j).re.is_zero() || !cp.entries.at(i, j).im.is_zero() ||
          !cp.entries.at(j, i).re.is_zero() || !cp.entries.at(j, i).im.is_zero())
        throw ConfigError("azrmi_ff: C' has nonzero AB blocks");
}

// generic complex-path evaluation for user-supplied correlation matrices
double azrmi_herm_path(const CorrMatrix& c, const RMIPoint& pt, int digits) {
  const int n = c.entries.rows();
  const int na = c.partition.ell_a;
  mpfr_prec_t bits = c.entries.bits();
  PrecisionPolicy pol;
  pol.digits = digits;

  auto esc = mp::eigh(c.entries, pol);
  clamp_unit_interval(esc.eigenvalues, digits, "azrmi_ff(C)");

  CplxMat aa(na, na, bits), bb(n - na, n - na, bits);
  for (int i = 0; i < na; ++i)
    for (int j = 0; j < na; ++j) aa.at(i, j).set(c.entries.at(i, j));
  for (int i = 0; i < n - na; ++i)
    for (int j = 0; j < n - na; ++j) bb.at(i, j).set(c.entries.at(na + i, na + j));
  auto esa = mp::eigh(aa, pol);
  auto esb = mp::eigh(bb, pol);
  clamp_unit_interval(esa.eigenvalues, digits, "azrmi_ff(C_AA)");
  clamp_unit_interval(esb.eigenvalues, digits, "azrmi_ff(C_BB)");

  Real l1 = logdet_one_minus(esc.eigenvalues, bits);
  Real l2 = logdet_one_minus(esa.eigenvalues, bits) + logdet_one_minus(esb.eigenvalues, bits);

  Real e_half(bits), e_mid(bits);
  {
    Real a(pt.alpha, bits), z(pt.z, bits), one(1.0, bits), two(2.0, bits), den(bits);
    sub(e_half, one, a);
    mul(den, two, z);
    div(e_half, e_half, den);
    div(e_mid, a, z);
  }
  double e_half_d = (1.0 - pt.alpha) / (2.0 * pt.z);
  double e_mid_d = pt.alpha / pt.z;

  auto fS = [&](Real& d, const Real& nu) { mode_power(d, nu, e_half, e_half_d, bits); };
  auto fR = [&](Real& d, const Real& nu) { mode_power(d, nu, e_mid, e_mid_d, bits); };

  CplxMat sa = mp::spectral_map(esa, fS);
  CplxMat sb = mp::spectral_map(esb, fS);
  CplxMat s(n, n, bits);
  for (int i = 0; i < na; ++i)
    for (int j = 0; j < na; ++j) s.at(i, j).set(sa.at(i, j));
  for (int i = 0; i < n - na; ++i)
    for (int j = 0; j < n - na; ++j) s.at(na + i, na + j).set(sb.at(i, j));

  CplxMat rp = mp::spectral_map(esc, fR);
  CplxMat t1, k;
  mp::matmul(t1, s, rp);
  mp::matmul_herm_result(k, t1, s);

  auto esk = mp::eigh(k, pol, /*want_vectors=*/false);
  clamp_psd_scaled(esk.eigenvalues, digits, "azrmi_ff(K)");

  Real l3(bits), t(bits), zr(pt.z, bits);
  l3.set_zero();
  for (const auto& kap : esk.eigenvalues) {
    if (kap.is_zero()) continue;
    mpfr_pow(t.raw(), kap.raw(), zr.raw(), mp::RND);
    mpfr_log1p(t.raw(), t.raw(), mp::RND);
    add(l3, l3, t);
  }

  Real res(bits);
  {
    Real a(pt.alpha, bits), one(1.0, bits), oma(bits), coef(bits), inv(bits), term(bits);
    sub(oma, one, a);
    div(coef, a, oma);
    mpfr_neg(coef.raw(), coef.raw(), mp::RND);
    mul(res, coef, l1);
    sub(res, res, l2);
    div(inv, one, oma);
    mul(term, inv, l3);
    sub(res, res, term);
  }
  return res.to_double();
}

}  // namespace

double azrmi_ff(const CorrMatrix& c, const CorrMatrix& cp, const RMIPoint& pt,
                const PrecisionPolicy& policy) {
  policy.validate();
  pt.validate();
  check_decoupled_pair(c, cp);
  if (c.analytic) return azrmi_ff(c.partition, pt, policy);

  // user-supplied matrix: entries are fixed, escalate arithmetic only
  std::string last;
  for (int d : escalation_digits(policy)) {
    try {
      return azrmi_herm_path(c, pt, d);
    } catch (const SingularityError& e) {
      last = e.what();
    } catch (const DomainError& e) {
      last = e.what();
    }
  }
  throw PrecisionError("azrmi_ff: escalation exhausted on supplied matrix; last: " + last);
}

namespace {

double entropy_from_spectrum(std::vector<Real> evs, int digits, mpfr_prec_t bits) {
  clamp_unit_interval(evs, digits, "entropy_ff");
  Real acc(bits), t(bits), lg(bits), om(bits), one(1.0, bits);
  acc.set_zero();
  for (const auto& nu : evs) {
    if (!nu.is_zero() && !(nu == one)) {
      mpfr_log(lg.raw(), nu.raw(), mp::RND);
      mul(t, nu, lg);
      add(acc, acc, t);
      sub(om, one, nu);
      mpfr_log(lg.raw(), om.raw(), mp::RND);
      mul(t, om, lg);
      add(acc, acc, t);
    }
  }
  mpfr_neg(acc.raw(), acc.raw(), mp::RND);
  return acc.to_double();
}

}  // namespace

double entropy_ff(const CplxMat& c_block, const PrecisionPolicy& policy) {
  auto es = mp::eigh(c_block, policy, /*want_vectors=*/false);
  return entropy_from_spectrum(std::move(es.eigenvalues), policy.digits, c_block.bits());
}

double entropy_ff(const RealMat& c_block_rotated, const PrecisionPolicy& policy) {
  auto es = mp::eigh(c_block_rotated, policy, /*want_vectors=*/false);
  return entropy_from_spectrum(std::move(es.eigenvalues), policy.digits, c_block_rotated.bits());
}

double vn_mi_ff(const Partition& part, const PrecisionPolicy& policy) {
  CorrMatrix c = build_corr_matrix(part, policy.digits);
  RealMat rot = corr_rotated_real(c);
  RealMat aa = submatrix(rot, 0, 0, part.ell_a, part.ell_a);
  RealMat bb = submatrix(rot, part.ell_a, part.ell_a, part.ell_b, part.ell_b);
  double s_ab = entropy_ff(rot, policy);
  double s_a = entropy_ff(aa, policy);
  double s_b = (part.ell_a == part.ell_b && equal_bits(aa, bb)) ? s_a : entropy_ff(bb, policy);
  return s_a + s_b - s_ab;
}

int PrecisionMap::at(double alpha, double z) const {
  auto find_idx = [](const std::vector<double>& v, double x) {
    for (size_t i = 0; i < v.size(); ++i)
      if (std::abs(v[i] - x) < 1e-12) return static_cast<int>(i);
    return -1;
  };
  int ia = find_idx(alphas, alpha), iz = find_idx(zs, z);
  if (ia < 0 || iz < 0) throw ConfigError("PrecisionMap: node not in calibrated grid");
  return digits[static_cast<size_t>(ia) * zs.size() + iz];
}

PrecisionMap calibrate_precision(const std::vector<double>& alpha_grid,
                                 const std::vector<double>& z_grid, const Rational& x,
                                 int ell_max, const PrecisionPolicy& policy) {
  policy.validate();
  for (double a : alpha_grid)
    if (!(a > 0.0) || a > 3.0) throw ConfigError("calibrate_precision: alpha grid outside (0, 3]");
  for (double z : z_grid)
    if (!(z > 0.0) || z > 3.0) throw ConfigError("calibrate_precision: z grid outside (0, 3]");

  CrossRatio cr = CrossRatio::of(x);
  if (!cr.sqrt_rational)
    throw ConfigError("calibrate_precision: sqrt(x) must be rational for equal intervals");
  // d = ell (p - q)/q for sqrt(x) = q/p
  auto sep_for = [&](int ell) -> int {
    std::int64_t num = static_cast<std::int64_t>(ell) * (cr.sqrt_den - cr.sqrt_num);
    if (num % cr.sqrt_num != 0)
      throw ConfigError("calibrate_precision: ell_max incompatible with x on the lattice");
    return static_cast<int>(num / cr.sqrt_num);
  };
  Partition part{ell_max, sep_for(ell_max), ell_max};

  auto coarse_axis = [](const std::vector<double>& g) {
    if (g.size() <= 6) return g;
    std::vector<double> c;
    size_t steps = 5;
    for (size_t k = 0; k <= steps; ++k) c.push_back(g[k * (g.size() - 1) / steps]);
    return c;
  };
  std::vector<double> ca = coarse_axis(alpha_grid), cz = coarse_axis(z_grid);

  // evaluations cached per digits entry
  std::map<int, PartitionEigs> eig_cache;
  auto eval_at = [&](double a, double z, int digits) -> double {
    auto it = eig_cache.find(digits);
    if (it == eig_cache.end()) it = eig_cache.emplace(digits, prepare_partition(part, digits)).first;
    return azrmi_from_eigs(it->second, RMIPoint{a, z});
  };

  std::vector<double> coarse(ca.size() * cz.size());
  for (size_t i = 0; i < ca.size(); ++i)
    for (size_t j = 0; j < cz.size(); ++j) {
      const auto& sched = policy.schedule;
      int found = -1;
      for (size_t k = 0; k + 1 < sched.size(); ++k) {
        double v1, v2;
        try {
          v1 = eval_at(ca[i], cz[j], sched[k]);
          v2 = eval_at(ca[i], cz[j], sched[k + 1]);
        } catch (const SingularityError&) {
          continue;
        }
        if (std::abs(v1 - v2) <= policy.target_error) {
          found = sched[k];
          break;
        }
      }
      if (found < 0)
        throw PrecisionError("calibrate_precision: schedule exhausted at node (alpha=" +
                             std::to_string(ca[i]) + ", z=" + std::to_string(cz[j]) + ")");
      coarse[i * cz.size() + j] = found;
    }

  // bilinear interpolation onto the fine grid, rounded up to multiples of 50
  auto interp1 = [](const std::vector<double>& xs, double xq, size_t& i0, double& w) {
    if (xq <= xs.front()) {
      i0 = 0;
      w = 0.0;
      return;
    }
    if (xq >= xs.back()) {
      i0 = xs.size() - 2;
      w = 1.0;
      return;
    }
    for (size_t i = 0; i + 1 < xs.size(); ++i)
      if (xq <= xs[i + 1]) {
        i0 = i;
        w = (xq - xs[i]) / (xs[i + 1] - xs[i]);
        return;
      }
    i0 = xs.size() - 2;
    w = 1.0;
  };

  PrecisionMap map;
  map.alphas = alpha_grid;
  map.zs = z_grid;
  map.digits.resize(alpha_grid.size() * z_grid.size());
  int floor_d = PrecisionPolicy::floor_digits();
  for (size_t i = 0; i < alpha_grid.size(); ++i)
    for (size_t j = 0; j < z_grid.size(); ++j) {
      double v;
      if (ca.size() == 1 && cz.size() == 1) {
        v = coarse[0];
      } else if (ca.size() == 1) {
        size_t j0;
        double wz;
        interp1(cz, z_grid[j], j0, wz);
        v = coarse[j0] * (1 - wz) + coarse[j0 + 1] * wz;
      } else if (cz.size() == 1) {
        size_t i0;
        double wa;
        interp1(ca, alpha_grid[i], i0, wa);
        v = coarse[i0 * cz.size()] * (1 - wa) + coarse[(i0 + 1) * cz.size()] * wa;
      } else {
        size_t i0, j0;
        double wa, wz;
        interp1(ca, alpha_grid[i], i0, wa);
        interp1(cz, z_grid[j], j0, wz);
        double v00 = coarse[i0 * cz.size() + j0], v01 = coarse[i0 * cz.size() + j0 + 1];
        double v10 = coarse[(i0 + 1) * cz.size() + j0], v11 = coarse[(i0 + 1) * cz.size() + j0 + 1];
        v = v00 * (1 - wa) * (1 - wz) + v01 * (1 - wa) * wz + v10 * wa * (1 - wz) + v11 * wa * wz;
      }
      int d = static_cast<int>(std::ceil(v / 50.0) * 50);
      map.digits[i * z_grid.size() + j] = std::max(d, floor_d);
    }
  return map;
}

std::shared_ptr<const PartitionEigs> PartitionCache::get(const Partition& part, int digits) {
  auto key = std::make_tuple(part.ell_a, part.d, part.ell_b, digits);
  {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;
  }
  auto pe = std::make_shared<PartitionEigs>(prepare_partition(part, digits));
  std::lock_guard<std::mutex> lock(mu_);
  auto [it, inserted] = cache_.emplace(key, pe);
  return it->second;
}

void PartitionCache::clear() {
  std::lock_guard<std::mutex> lock(mu_);
  cache_.clear();
}

}  // namespace qmi::ff
