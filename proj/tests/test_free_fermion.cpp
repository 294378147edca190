#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "qmi/free_fermion.hpp"
#include "qmi/gaussian_state.hpp"
#include "qmi/scaling.hpp"

using namespace qmi;
using namespace qmi::ff;

namespace {
PrecisionPolicy pol(int digits) {
  PrecisionPolicy p;
  p.digits = digits;
  return p;
}
}  // namespace

TEST_CASE("correlation matrix entries: diagonal 1/2, distance 2 zero, distance 1 = +i/pi") {
  auto c = build_corr_matrix(Partition{2, 1, 2}, 60);
  // sites 1,2 | gap | 4,5
  CHECK(c.entries.at(0, 0).re.to_double() == doctest::Approx(0.5));
  CHECK(c.entries.at(0, 0).im.is_zero());
  // distance 1 within A: C[1][2] = +i/pi for ascending site labels
  CHECK(c.entries.at(0, 1).re.is_zero());
  CHECK(c.entries.at(0, 1).im.to_double() == doctest::Approx(1.0 / M_PI));
  CHECK(c.entries.at(1, 0).im.to_double() == doctest::Approx(-1.0 / M_PI));
  // distance 2 (site 2 to site 4, across the gap)
  CHECK(c.entries.at(1, 2).re.is_zero());
  CHECK(c.entries.at(1, 2).im.is_zero());
  // distance 3 crossing the gap: sites 1 -> 4
  CHECK(c.entries.at(0, 2).im.to_double() == doctest::Approx(1.0 / (3.0 * M_PI)));
  CHECK(c.entries.is_hermitian());
}

TEST_CASE("decouple zeroes AB blocks, is idempotent, keeps AA/BB bit-exact") {
  auto c = build_corr_matrix(Partition{2, 1, 2}, 60);
  auto cp = decouple(c);
  for (int i = 0; i < 2; ++i)
    for (int j = 2; j < 4; ++j) {
      CHECK(cp.entries.at(i, j).re.is_zero());
      CHECK(cp.entries.at(i, j).im.is_zero());
    }
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      CHECK(cp.entries.at(i, j).re.identical_bits(c.entries.at(i, j).re));
      CHECK(cp.entries.at(i, j).im.identical_bits(c.entries.at(i, j).im));
    }
  auto cpp = decouple(cp);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) {
      CHECK(cpp.entries.at(i, j).re.identical_bits(cp.entries.at(i, j).re));
      CHECK(cpp.entries.at(i, j).im.identical_bits(cp.entries.at(i, j).im));
    }

  auto c11 = build_corr_matrix(Partition{1, 1, 1}, 60);
  auto cp11 = decouple(c11);
  CHECK(cp11.entries.at(0, 0).re.to_double() == doctest::Approx(0.5));
  CHECK(cp11.entries.at(1, 1).re.to_double() == doctest::Approx(0.5));
  CHECK(cp11.entries.at(0, 1).im.is_zero());
}

TEST_CASE("phase rotation gives a real symmetric matrix with identical spectrum") {
  auto c = build_corr_matrix(Partition{3, 2, 3}, 100);
  CHECK(is_phase_rotatable(c));
  auto rot = corr_rotated_real(c);
  CHECK(rot.is_symmetric());
  auto er = mp::eigh(rot, pol(100), false);
  auto ec = mp::eigh(c.entries, pol(100), false);
  for (size_t k = 0; k < er.eigenvalues.size(); ++k) {
    mp::Real diff = er.eigenvalues[k] - ec.eigenvalues[k];
    CHECK(std::abs(diff.to_double()) < 1e-90);
  }
}

TEST_CASE("product state (C = C') has zero RMI") {
  auto c = build_corr_matrix(Partition{2, 3, 2}, 80);
  auto cp = decouple(c);
  // feed the decoupled matrix as both C and C': no correlations at all
  cp.analytic = false;  // force the supplied-matrix path
  double v = azrmi_ff(cp, cp, RMIPoint{2.0, 2.0}, pol(80));
  CHECK(std::abs(v) < 1e-60);
}

TEST_CASE("azrmi_ff matches the dense Gaussian oracle at (2,2), partition (2,2,2)") {
  Partition part{2, 2, 2};
  auto pe = prepare_partition(part, 80);
  double i_ff = azrmi_from_eigs(pe, RMIPoint{2.0, 2.0});
  auto rho = dm::gaussian_rho(build_corr_matrix(part, 80), 80);
  double i_dm = dm::az_rmi(rho, 4, 4, 2.0, 2.0);
  CHECK(std::abs(i_ff - i_dm) < 1e-10);
}

TEST_CASE("azrmi_ff via the generic complex path agrees with the rotated real path") {
  Partition part{2, 1, 2};
  auto c = build_corr_matrix(part, 80);
  auto cp = decouple(c);
  double fast = azrmi_ff(part, RMIPoint{1.5, 0.7}, pol(80));
  CorrMatrix generic = c;
  generic.analytic = false;
  double slow = azrmi_ff(generic, cp, RMIPoint{1.5, 0.7}, pol(80));
  CHECK(std::abs(fast - slow) < 1e-40);
}

TEST_CASE("A <-> B swap symmetry") {
  double a = azrmi_ff(Partition{2, 3, 4}, RMIPoint{2.0, 1.0}, pol(80));
  double b = azrmi_ff(Partition{4, 3, 2}, RMIPoint{2.0, 1.0}, pol(80));
  CHECK(a == doctest::Approx(b).epsilon(1e-10));
}

TEST_CASE("nonnegativity on DPI points") {
  for (auto [alpha, z] : {std::pair{0.5, 0.5}, {1.5, 1.5}, {2.0, 2.0}, {0.5, 1.0}, {2.0, 1.0}}) {
    for (auto part : {Partition{1, 1, 1}, Partition{2, 2, 2}, Partition{3, 1, 2}}) {
      double v = azrmi_ff(part, RMIPoint{alpha, z}, pol(80));
      CHECK(v >= -1e-12);
    }
  }
}

TEST_CASE("spectrum of C stays within [0,1] up to large partitions") {
  auto pe = prepare_partition(Partition{55, 110, 55}, 250);
  mp::Real one(1.0, mp::bits_for_digits(250));
  for (const auto& nu : pe.full.eigenvalues) {
    CHECK(nu.sgn() >= 0);
    CHECK(nu <= one);
  }
}

TEST_CASE("determinism: repeated azrmi_ff calls agree bit-exactly") {
  double a = azrmi_ff(Partition{3, 2, 3}, RMIPoint{1.7, 1.3}, pol(90));
  double b = azrmi_ff(Partition{3, 2, 3}, RMIPoint{1.7, 1.3}, pol(90));
  CHECK(a == b);
}

TEST_CASE("entropy_ff basics") {
  mpfr_prec_t bits = mp::bits_for_digits(60);
  mp::CplxMat c(2, 2, bits);
  c.at(0, 0).re.set(0.0);
  c.at(1, 1).re.set(1.0);
  CHECK(std::abs(entropy_ff(c, pol(60))) < 1e-50);

  mp::CplxMat h(1, 1, bits);
  h.at(0, 0).re.set(0.5);
  CHECK(entropy_ff(h, pol(60)) == doctest::Approx(std::log(2.0)).epsilon(1e-12));
}

TEST_CASE("adjacent-interval von Neumann MI slope approximates c/3 with c = 1") {
  // quick version of the CFT check around ell = 32 (the acceptance suite runs
  // the full window)
  PrecisionPolicy p = pol(50);
  std::vector<double> lx, ly;
  for (int ell : {24, 28, 32, 36, 40}) {
    lx.push_back(std::log(ell));
    ly.push_back(vn_mi_ff(Partition{ell, 0, ell}, p));
  }
  auto fit = scaling::linear_fit(lx, ly);
  CHECK(fit.slope == doctest::Approx(1.0 / 3.0).epsilon(0.06));
}

TEST_CASE("calibrate_precision: quiet node calibrates to the floor") {
  std::vector<double> alphas{2.0}, zs{2.0};
  auto map = calibrate_precision(alphas, zs, Rational(1, 4), 12, pol(250));
  CHECK(map.at(2.0, 2.0) == 250);
}

TEST_CASE("calibrate_precision rejects grids outside (0,3]") {
  std::vector<double> bad{3.5};
  std::vector<double> ok{1.0};
  CHECK_THROWS_AS(calibrate_precision(bad, ok, Rational(1, 4), 8, pol(250)), ConfigError);
}

TEST_CASE("precision escalation engages on a pathological schedule") {
  // artificially low starting digits on a large-ish partition: the smallest
  // eigenvalues collide with the clamp and the schedule must escalate
  PrecisionPolicy p;
  p.digits = 50;
  p.schedule = {80, 120};
  int used = 0;
  double v = azrmi_ff(Partition{12, 12, 12}, RMIPoint{2.5, 0.5}, p, &used);
  CHECK(std::isfinite(v));
  // a small partition stays at the requested digits
  int used_small = 0;
  azrmi_ff(Partition{2, 2, 2}, RMIPoint{2.5, 0.5}, p, &used_small);
  CHECK(used_small == 50);
}

TEST_CASE("partition cache returns shared eigendata") {
  PartitionCache cache;
  auto a = cache.get(Partition{3, 3, 3}, 60);
  auto b = cache.get(Partition{3, 3, 3}, 60);
  CHECK(a.get() == b.get());
  auto c = cache.get(Partition{3, 3, 3}, 80);
  CHECK(a.get() != c.get());
}

TEST_CASE("invalid inputs are rejected") {
  CHECK_THROWS_AS(build_corr_matrix(Partition{0, 1, 1}, 60), ConfigError);
  CHECK_THROWS_AS(azrmi_ff(Partition{1, 1, 1}, RMIPoint{1.0, 1.0}, pol(60)), ConfigError);
  CHECK_THROWS_AS(azrmi_ff(Partition{1, 1, 1}, RMIPoint{2.0, 0.0}, pol(60)), ConfigError);
}
