#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "qmi/density_matrix.hpp"
#include "qmi/free_fermion.hpp"
#include "qmi/gaussian_state.hpp"

using namespace qmi;
using namespace qmi::dm;
using Eigen::MatrixXcd;
using Eigen::VectorXcd;
using Eigen::VectorXd;

namespace {

// random state with a known spectrum: rho = U diag(p) U^dagger
MatrixXcd random_rho(int dim, unsigned seed, VectorXd* spectrum = nullptr) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  MatrixXcd a(dim, dim);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) a(i, j) = std::complex<double>(g(rng), g(rng));
  Eigen::HouseholderQR<MatrixXcd> qr(a);
  MatrixXcd u = qr.householderQ();
  VectorXd p(dim);
  double s = 0;
  for (int i = 0; i < dim; ++i) {
    p(i) = -std::log(std::uniform_real_distribution<double>(1e-4, 1.0)(rng));
    s += p(i);
  }
  p /= s;
  if (spectrum) *spectrum = p;
  return u * p.asDiagonal() * u.adjoint();
}

MatrixXcd bell_pair() {
  VectorXcd psi = VectorXcd::Zero(4);
  psi(0) = 1.0 / std::sqrt(2.0);
  psi(3) = 1.0 / std::sqrt(2.0);
  return psi * psi.adjoint();
}

}  // namespace

TEST_CASE("vn_entropy: pure state zero, maximally mixed log 2, known spectrum") {
  MatrixXcd proj = MatrixXcd::Zero(4, 4);
  proj(2, 2) = 1.0;
  CHECK(vn_entropy(DensityMatrix::from_dense(proj)) == doctest::Approx(0.0).epsilon(1e-12));

  MatrixXcd mixed = 0.5 * MatrixXcd::Identity(2, 2);
  CHECK(vn_entropy(DensityMatrix::from_dense(mixed)) == doctest::Approx(std::log(2.0)));

  VectorXd p;
  MatrixXcd rho = random_rho(4, 11, &p);
  double expected = 0.0;
  for (int i = 0; i < 4; ++i) expected -= p(i) * std::log(p(i));
  CHECK(vn_entropy(DensityMatrix::from_dense(rho)) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("vn_mi: product zero, Bell pair 2 log 2, local-unitary invariance") {
  MatrixXcd ra = random_rho(2, 1), rb = random_rho(2, 2);
  MatrixXcd prod = kron(ra, rb);
  double mi = vn_mi(DensityMatrix::from_dense(prod), DensityMatrix::from_dense(ra),
                    DensityMatrix::from_dense(rb));
  CHECK(std::abs(mi) < 1e-12);

  MatrixXcd bell = bell_pair();
  MatrixXcd qa = ptrace_second(bell, 2, 2), qb = ptrace_first(bell, 2, 2);
  double mi_bell = vn_mi(DensityMatrix::from_dense(bell), DensityMatrix::from_dense(qa),
                         DensityMatrix::from_dense(qb));
  CHECK(mi_bell == doctest::Approx(2.0 * std::log(2.0)).epsilon(1e-10));

  // local unitaries leave MI invariant
  std::mt19937 rng(3);
  std::normal_distribution<double> g(0.0, 1.0);
  MatrixXcd m(2, 2);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) m(i, j) = std::complex<double>(g(rng), g(rng));
  MatrixXcd ua = Eigen::HouseholderQR<MatrixXcd>(m).householderQ();
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) m(i, j) = std::complex<double>(g(rng), g(rng));
  MatrixXcd ub = Eigen::HouseholderQR<MatrixXcd>(m).householderQ();
  MatrixXcd rab = random_rho(4, 17);
  MatrixXcd u = kron(ua, ub);
  MatrixXcd rot = u * rab * u.adjoint();
  auto mi_of = [](const MatrixXcd& r) {
    return vn_mi(DensityMatrix::from_dense(r),
                 DensityMatrix::from_dense(ptrace_second(r, 2, 2)),
                 DensityMatrix::from_dense(ptrace_first(r, 2, 2)));
  };
  CHECK(mi_of(rab) == doctest::Approx(mi_of(rot)).epsilon(1e-10));
}

TEST_CASE("vn_mi rejects inconsistent marginals") {
  MatrixXcd rab = random_rho(4, 23);
  MatrixXcd wrong = random_rho(2, 24);
  CHECK_THROWS_AS(vn_mi(DensityMatrix::from_dense(rab), DensityMatrix::from_dense(wrong),
                        DensityMatrix::from_dense(ptrace_first(rab, 2, 2))),
                  ConfigError);
}

TEST_CASE("renyi_entropy: flat spectrum, pure state, alpha -> 1 limit") {
  MatrixXcd mixed = 0.5 * MatrixXcd::Identity(2, 2);
  for (double alpha : {0.3, 2.0, 3.0})
    CHECK(renyi_entropy(DensityMatrix::from_dense(mixed), alpha) ==
          doctest::Approx(std::log(2.0)).epsilon(1e-12));

  MatrixXcd proj = MatrixXcd::Zero(2, 2);
  proj(0, 0) = 1.0;
  CHECK(std::abs(renyi_entropy(DensityMatrix::from_dense(proj), 2.0)) < 1e-12);

  // two-sided bracket of the von Neumann limit
  auto rho = DensityMatrix::from_dense(random_rho(4, 5));
  double vn = vn_entropy(rho);
  double lo = renyi_entropy(rho, 1.0 + 1e-6);
  double hi = renyi_entropy(rho, 1.0 - 1e-6);
  CHECK(lo <= vn + 1e-5);
  CHECK(vn <= hi + 1e-5);
  CHECK(std::abs(0.5 * (lo + hi) - vn) < 1e-6);
}

TEST_CASE("entropy_based_rmi: product zero, alpha = 2 identity, negativity exists") {
  MatrixXcd prod = kron(random_rho(2, 31), random_rho(2, 32));
  CHECK(std::abs(entropy_based_rmi(DensityMatrix::from_dense(prod), 2, 2, 2.0)) < 1e-10);

  // alpha = 2 rearrangement: S_2 = -log Tr rho^2 termwise gives
  // I_2 = log[Tr rho_AB^2 / (Tr rho_A^2 Tr rho_B^2)]
  MatrixXcd rab = random_rho(4, 33);
  MatrixXcd ra = ptrace_second(rab, 2, 2), rb = ptrace_first(rab, 2, 2);
  double direct = std::log(std::real((rab * rab).trace()) /
                           (std::real((ra * ra).trace()) * std::real((rb * rb).trace())));
  CHECK(entropy_based_rmi(DensityMatrix::from_dense(rab), 2, 2, 2.0) ==
        doctest::Approx(direct).epsilon(1e-10));

  // random search finds a state with negative value at alpha = 3
  bool found = false;
  for (unsigned seed = 0; seed < 10000 && !found; ++seed) {
    MatrixXcd r = random_rho(4, 1000 + seed);
    if (entropy_based_rmi(DensityMatrix::from_dense(r), 2, 2, 3.0) < -1e-6) found = true;
  }
  CHECK(found);
}

TEST_CASE("az_divergence: identical states, Petz at z = 1, commuting pair") {
  auto rho = DensityMatrix::from_dense(random_rho(4, 41));
  CHECK(std::abs(az_divergence(rho, rho, 2.0, 1.5)) < 1e-12);

  // z = 1 reduces to the Petz form Tr(rho^alpha sigma^(1-alpha))
  auto sigma = DensityMatrix::from_dense(random_rho(4, 42));
  for (double alpha : {0.5, 1.5, 2.0}) {
    Eigen::SelfAdjointEigenSolver<MatrixXcd> er(rho.m), es(sigma.m);
    MatrixXcd ra = er.eigenvectors() *
                   er.eigenvalues().array().pow(alpha).matrix().asDiagonal() *
                   er.eigenvectors().adjoint();
    MatrixXcd sb = es.eigenvectors() *
                   es.eigenvalues().array().pow(1.0 - alpha).matrix().asDiagonal() *
                   es.eigenvectors().adjoint();
    double petz = std::log(std::real((ra * sb).trace())) / (alpha - 1.0);
    CHECK(az_divergence(rho, sigma, alpha, 1.0) == doctest::Approx(petz).epsilon(1e-10));
  }

  // commuting pair: classical Renyi divergence of the spectra, z-independent
  VectorXd p(3), q(3);
  p << 0.5, 0.3, 0.2;
  q << 0.2, 0.5, 0.3;
  MatrixXcd dp = p.cast<std::complex<double>>().asDiagonal();
  MatrixXcd dq = q.cast<std::complex<double>>().asDiagonal();
  double alpha = 1.7;
  double classical = 0.0;
  for (int i = 0; i < 3; ++i) classical += std::pow(p(i), alpha) * std::pow(q(i), 1.0 - alpha);
  classical = std::log(classical) / (alpha - 1.0);
  for (double z : {0.4, 1.0, 2.3})
    CHECK(az_divergence(DensityMatrix::from_dense(dp), DensityMatrix::from_dense(dq), alpha, z) ==
          doctest::Approx(classical).epsilon(1e-10));
}

TEST_CASE("az_divergence support violation for alpha > 1") {
  MatrixXcd sigma = MatrixXcd::Zero(2, 2);
  sigma(0, 0) = 1.0;  // pure, rank 1
  MatrixXcd rho = 0.5 * MatrixXcd::Identity(2, 2);
  CHECK_THROWS_AS(az_divergence(DensityMatrix::from_dense(rho),
                                DensityMatrix::from_dense(sigma), 2.0, 1.0),
                  DomainError);
}

TEST_CASE("az_rmi: product zero; z = alpha sandwiched cross-check") {
  MatrixXcd prod = kron(random_rho(2, 51), random_rho(2, 52));
  CHECK(std::abs(az_rmi(DensityMatrix::from_dense(prod), 2, 2, 2.0, 2.0)) < 1e-12);

  // sandwiched special case evaluated through the independent ordering
  // (sigma^((1-a)/(2a)) rho sigma^((1-a)/(2a)))^alpha
  MatrixXcd rab = random_rho(4, 53);
  MatrixXcd sig = kron(ptrace_second(rab, 2, 2), ptrace_first(rab, 2, 2));
  double alpha = 1.8;
  Eigen::SelfAdjointEigenSolver<MatrixXcd> es(sig);
  MatrixXcd sh = es.eigenvectors() *
                 es.eigenvalues().array().pow((1.0 - alpha) / (2.0 * alpha)).matrix().asDiagonal() *
                 es.eigenvectors().adjoint();
  MatrixXcd inner = sh * rab * sh;
  inner = 0.5 * (inner + inner.adjoint().eval());
  Eigen::SelfAdjointEigenSolver<MatrixXcd> ei(inner);
  double tr = 0.0;
  for (int k = 0; k < 4; ++k)
    if (ei.eigenvalues()(k) > 0) tr += std::pow(ei.eigenvalues()(k), alpha);
  double sandwiched = std::log(tr) / (alpha - 1.0);
  CHECK(az_rmi(DensityMatrix::from_dense(rab), 2, 2, alpha, alpha) ==
        doctest::Approx(sandwiched).epsilon(1e-10));
}

TEST_CASE("az divergences are nonnegative on DPI points for random two-qubit states") {
  for (unsigned seed = 100; seed < 140; ++seed) {
    MatrixXcd rab = random_rho(4, seed);
    auto rho = DensityMatrix::from_dense(rab);
    CHECK(az_rmi(rho, 2, 2, 2.0, 2.0) >= -1e-12);
    CHECK(az_rmi(rho, 2, 2, 1.5, 1.0) >= -1e-12);
    CHECK(az_rmi(rho, 2, 2, 0.7, 0.7) >= -1e-12);
  }
}

TEST_CASE("geometric_divergence: identical states, commuting pair, 2x2 closed form") {
  auto rho = DensityMatrix::from_dense(random_rho(3, 61));
  CHECK(std::abs(geometric_divergence(rho, rho, 2.0)) < 1e-12);

  VectorXd p(2), q(2);
  p << 0.7, 0.3;
  q << 0.4, 0.6;
  double alpha = 2.0;
  double classical = std::log(std::pow(p(0), 2.0) / q(0) + std::pow(p(1), 2.0) / q(1));
  CHECK(geometric_divergence(
            DensityMatrix::from_dense(p.cast<std::complex<double>>().asDiagonal()),
            DensityMatrix::from_dense(q.cast<std::complex<double>>().asDiagonal()), alpha) ==
        doctest::Approx(classical).epsilon(1e-10));

  // alpha = 2: Tr[sigma (s^-1/2 rho s^-1/2)^2] = Tr[rho sigma^-1 rho], with the
  // 2x2 inverse in closed form
  MatrixXcd r2 = random_rho(2, 62), s2 = random_rho(2, 63);
  MatrixXcd sinv(2, 2);
  std::complex<double> det = s2(0, 0) * s2(1, 1) - s2(0, 1) * s2(1, 0);
  sinv << s2(1, 1) / det, -s2(0, 1) / det, -s2(1, 0) / det, s2(0, 0) / det;
  double direct = std::log(std::real((r2 * sinv * r2).trace()));
  CHECK(geometric_divergence(DensityMatrix::from_dense(r2), DensityMatrix::from_dense(s2), 2.0) ==
        doctest::Approx(direct).epsilon(1e-10));

  MatrixXcd singular = MatrixXcd::Zero(2, 2);
  singular(0, 0) = 1.0;
  CHECK_THROWS_AS(geometric_divergence(DensityMatrix::from_dense(random_rho(2, 64)),
                                       DensityMatrix::from_dense(singular), 2.0),
                  SingularityError);
}

TEST_CASE("partial_trace: keep-all projector, Bell marginal, naive-summation oracle") {
  std::mt19937 rng(71);
  std::normal_distribution<double> g(0.0, 1.0);
  int n = 5;
  VectorXcd psi(1 << n);
  for (long i = 0; i < psi.size(); ++i) psi(i) = std::complex<double>(g(rng), g(rng));
  psi.normalize();

  // keep everything: rank-1 projector
  std::vector<int> all{0, 1, 2, 3, 4};
  MatrixXcd full = partial_trace(psi, n, all);
  CHECK((full - psi * psi.adjoint()).cwiseAbs().maxCoeff() < 1e-12);

  // Bell pair marginal
  VectorXcd bell = VectorXcd::Zero(4);
  bell(0) = bell(3) = 1.0 / std::sqrt(2.0);
  MatrixXcd half = partial_trace(bell, 2, {0});
  CHECK((half - 0.5 * MatrixXcd::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-12);

  // disjoint keep set {1, 4} against a naive O(4^n) index-summation oracle
  std::vector<int> keep{1, 4};
  MatrixXcd got = partial_trace(psi, n, keep);
  MatrixXcd want = MatrixXcd::Zero(4, 4);
  for (long s = 0; s < (1 << n); ++s)
    for (long t = 0; t < (1 << n); ++t) {
      auto bit = [](long x, int b) { return (x >> b) & 1L; };
      if (bit(s, 0) != bit(t, 0) || bit(s, 2) != bit(t, 2) || bit(s, 3) != bit(t, 3)) continue;
      long i = bit(s, 1) + 2 * bit(s, 4);  // ascending sites on ascending bits
      long j = bit(t, 1) + 2 * bit(t, 4);
      want(i, j) += psi(s) * std::conj(psi(t));
    }
  CHECK((got - want).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("gaussian_rho: vacuum, maximally mixed, moment reconstruction") {
  MatrixXcd zero = MatrixXcd::Zero(3, 3);
  auto vac = gaussian_rho(zero);
  CHECK(vac.m(0, 0).real() == doctest::Approx(1.0));
  CHECK(vac.m.cwiseAbs().sum() == doctest::Approx(1.0).epsilon(1e-10));

  MatrixXcd half = 0.5 * MatrixXcd::Identity(2, 2);
  auto mixed = gaussian_rho(half);
  CHECK((mixed.m - 0.25 * MatrixXcd::Identity(4, 4)).cwiseAbs().maxCoeff() < 1e-12);

  auto c = ff::build_corr_matrix(ff::Partition{2, 2, 2}, 60);
  auto rho = gaussian_rho(c);
  auto mom = gaussian_moments(rho.m, 4);
  double worst = 0.0;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) {
      std::complex<double> cij(c.entries.at(i, j).re.to_double(),
                               c.entries.at(i, j).im.to_double());
      worst = std::max(worst, std::abs(mom(i, j) - cij));
    }
  CHECK(worst < 1e-12);
}

TEST_CASE("gaussian_rho rejects oversized and non-physical inputs") {
  CHECK_THROWS_AS(gaussian_rho(MatrixXcd::Zero(13, 13)), ConfigError);
  MatrixXcd bad = 1.5 * MatrixXcd::Identity(2, 2);
  CHECK_THROWS_AS(gaussian_rho(bad), DomainError);
}

TEST_CASE("mp route agrees with the double route on benign states") {
  MatrixXcd rab = random_rho(4, 81);
  auto d16 = DensityMatrix::from_dense(rab, 16);
  auto d40 = DensityMatrix::from_dense(rab, 40);
  CHECK(vn_entropy(d16) == doctest::Approx(vn_entropy(d40)).epsilon(1e-12));
  CHECK(renyi_entropy(d16, 2.0) == doctest::Approx(renyi_entropy(d40, 2.0)).epsilon(1e-12));
  CHECK(az_rmi(d16, 2, 2, 2.0, 1.5) == doctest::Approx(az_rmi(d40, 2, 2, 2.0, 1.5)).epsilon(1e-10));
}
