#include "qmi/tfim.hpp"

#include <omp.h>

#include <cmath>
#include <vector>

namespace qmi::dm {

using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

constexpr long kBlock = 8192;

struct Bonds {
  std::vector<std::pair<int, int>> xx;
  double bias = 0.0;  // tiny sz bias lifting the g < 1 doublet deterministically
};

Bonds make_bonds(const SpinChainSpec& spec) {
  Bonds b;
  for (int i = 0; i + 1 < spec.n_sites; ++i) b.xx.push_back({i, i + 1});
  if (spec.boundary == SpinChainSpec::Boundary::periodic && spec.n_sites > 2)
    b.xx.push_back({spec.n_sites - 1, 0});
  if (spec.field_g < spec.coupling_j) b.bias = 1e-9;
  return b;
}

// diagonal part: -g * (n - 2 popcount) - bias contribution, per basis state
inline double diag_energy(long s, int n, double g, double bias) {
  int pc = __builtin_popcountll(static_cast<unsigned long long>(s));
  double sz_sum = static_cast<double>(n - 2 * pc);
  return -g * sz_sum + bias * sz_sum;
}

}  // namespace

void tfim_apply(const SpinChainSpec& spec, const VectorXd& psi, VectorXd& out) {
  const int n = spec.n_sites;
  const long dim = 1L << n;
  Bonds bonds = make_bonds(spec);
  out.resize(dim);
  const double j = spec.coupling_j, g = spec.field_g, bias = bonds.bias;
  const auto& xx = bonds.xx;
#pragma omp parallel for schedule(static)
  for (long s = 0; s < dim; ++s) {
    double acc = diag_energy(s, n, g, bias) * psi(s);
    for (const auto& [a, b] : xx) acc -= j * psi(s ^ ((1L << a) | (1L << b)));
    out(s) = acc;
  }
}

double det_dot(const VectorXd& a, const VectorXd& b) {
  const long n = a.size();
  const long nblocks = (n + kBlock - 1) / kBlock;
  std::vector<double> partial(nblocks, 0.0);
#pragma omp parallel for schedule(static)
  for (long blk = 0; blk < nblocks; ++blk) {
    double acc = 0.0;
    long lo = blk * kBlock, hi = std::min(n, lo + kBlock);
    for (long i = lo; i < hi; ++i) acc += a(i) * b(i);
    partial[blk] = acc;
  }
  double total = 0.0;
  for (long blk = 0; blk < nblocks; ++blk) total += partial[blk];
  return total;
}

namespace serial_ref {

double det_dot(const VectorXd& a, const VectorXd& b) {
  const long n = a.size();
  const long nblocks = (n + kBlock - 1) / kBlock;
  double total = 0.0;
  for (long blk = 0; blk < nblocks; ++blk) {
    double acc = 0.0;
    long lo = blk * kBlock, hi = std::min(n, lo + kBlock);
    for (long i = lo; i < hi; ++i) acc += a(i) * b(i);
    total += acc;
  }
  return total;
}

void tfim_apply(const SpinChainSpec& spec, const VectorXd& psi, VectorXd& out) {
  const int n = spec.n_sites;
  const long dim = 1L << n;
  Bonds bonds = make_bonds(spec);
  out.resize(dim);
  for (long s = 0; s < dim; ++s) {
    double acc = diag_energy(s, n, spec.field_g, bonds.bias) * psi(s);
    for (const auto& [a, b] : bonds.xx) acc -= spec.coupling_j * psi(s ^ ((1L << a) | (1L << b)));
    out(s) = acc;
  }
}

}  // namespace serial_ref

namespace {

void fix_phase(VectorXd& psi) {
  long best = 0;
  double mx = 0.0;
  for (long i = 0; i < psi.size(); ++i) {
    double a = std::abs(psi(i));
    if (a > mx) {
      mx = a;
      best = i;
    }
  }
  if (psi(best) < 0.0) psi = -psi;
}

GroundState dense_ground_state(const SpinChainSpec& spec) {
  const int n = spec.n_sites;
  const long dim = 1L << n;
  Bonds bonds = make_bonds(spec);
  MatrixXd h = MatrixXd::Zero(dim, dim);
  for (long s = 0; s < dim; ++s) {
    h(s, s) = diag_energy(s, n, spec.field_g, bonds.bias);
    for (const auto& [a, b] : bonds.xx) h(s ^ ((1L << a) | (1L << b)), s) -= spec.coupling_j;
  }
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(h);
  if (es.info() != Eigen::Success) throw ConvergenceError("tfim_ground_state: dense solve failed");
  GroundState gs;
  gs.energy = es.eigenvalues()(0);
  gs.psi = es.eigenvectors().col(0);
  fix_phase(gs.psi);
  return gs;
}

// restarted Lanczos with full reorthogonalization inside each Krylov block
GroundState lanczos_ground_state(const SpinChainSpec& spec) {
  const long dim = 1L << spec.n_sites;
  const int m = 24;          // Krylov block size
  const int max_restarts = 400;
  const double tol = 1e-12;

  // deterministic start vector
  VectorXd v(dim);
  unsigned long long x = 0x2545F4914F6CDD1Dull;
  for (long i = 0; i < dim; ++i) {
    x ^= x << 13;
    x ^= x >> 7;
    x ^= x << 17;
    v(i) = static_cast<double>((x >> 11) & 0xFFFFFFFFull) / 4294967296.0 - 0.5;
  }
  v /= std::sqrt(det_dot(v, v));

  std::vector<VectorXd> basis;
  VectorXd w(dim), hv(dim);
  GroundState gs;
  double prev_energy = 0.0;
  for (int restart = 0; restart < max_restarts; ++restart) {
    basis.clear();
    basis.push_back(v);
    MatrixXd t = MatrixXd::Zero(m, m);
    int built = 1;
    for (int k = 0; k < m; ++k) {
      tfim_apply(spec, basis[k], hv);
      // Rayleigh-Ritz column t(i,k) = <v_i|H|v_k>, then orthogonalize twice
      for (int i = 0; i <= k; ++i) {
        double c = det_dot(basis[i], hv);
        t(i, k) = c;
        t(k, i) = c;
        hv.noalias() -= c * basis[i];
      }
      for (int i = 0; i <= k; ++i) {
        double c = det_dot(basis[i], hv);
        hv.noalias() -= c * basis[i];
      }
      if (k + 1 < m) {
        double beta = std::sqrt(det_dot(hv, hv));
        if (beta < 1e-14) break;
        basis.push_back(hv / beta);
        built = k + 2;
      }
    }
    MatrixXd tb = t.topLeftCorner(built, built);
    tb = 0.5 * (tb + tb.transpose().eval());
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(tb);
    VectorXd ritz = es.eigenvectors().col(0);
    VectorXd next = VectorXd::Zero(dim);
    for (int i = 0; i < built; ++i) next.noalias() += ritz(i) * basis[i];
    next /= std::sqrt(det_dot(next, next));
    double energy = es.eigenvalues()(0);

    tfim_apply(spec, next, hv);
    w = hv - energy * next;
    double resid = std::sqrt(det_dot(w, w));
    gs.iterations = (restart + 1) * built;
    if (resid < tol * std::max(1.0, std::abs(energy)) ||
        (restart > 2 && std::abs(energy - prev_energy) < 1e-15 * std::abs(energy))) {
      gs.energy = energy;
      gs.psi = next;
      fix_phase(gs.psi);
      return gs;
    }
    prev_energy = energy;
    v = next;
  }
  throw ConvergenceError("tfim_ground_state: Lanczos did not converge within the restart cap");
}

}  // namespace

GroundState tfim_ground_state(const SpinChainSpec& spec) {
  spec.validate();
  if (spec.n_sites < 12) return dense_ground_state(spec);
  return lanczos_ground_state(spec);
}

}  // namespace qmi::dm
