#include "qmi/imps.hpp"

#include <cmath>
#include <complex>
#include <fstream>
#include <random>

#include <json.hpp>

namespace qmi::imps {

using Eigen::MatrixXcd;
using Eigen::VectorXcd;
using nlohmann::json;

void IMPS::validate_shapes() const {
  if (phys_dim < 1 || bond_dim < 1 || unit_cell_sites < 1)
    throw ConfigError("IMPS: dimensions must be positive");
  if (static_cast<int>(tensor.size()) != phys_dim)
    throw ConfigError("IMPS: tensor list size != phys_dim");
  for (const auto& a : tensor)
    if (a.rows() != bond_dim || a.cols() != bond_dim)
      throw ConfigError("IMPS: tensor matrices must be bond_dim x bond_dim");
}

MatrixXcd transfer_matrix(const IMPS& s) {
  int chi = s.bond_dim;
  MatrixXcd t = MatrixXcd::Zero(chi * chi, chi * chi);
  for (const auto& a : s.tensor)
    t += dm::kron(a, a.conjugate());
  return t;
}

namespace {

struct FullSpectrum {
  VectorXcd values;   // descending magnitude
  MatrixXcd right;    // columns
  MatrixXcd left;     // rows of right^{-1}
};

FullSpectrum full_transfer_spectrum(const MatrixXcd& t) {
  Eigen::ComplexEigenSolver<MatrixXcd> es(t);
  if (es.info() != Eigen::Success)
    throw ConvergenceError("transfer_spectrum: eigensolver failed");
  int n = static_cast<int>(t.rows());
  std::vector<int> idx(n);
  for (int i = 0; i < n; ++i) idx[i] = i;
  std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) {
    return std::abs(es.eigenvalues()(a)) > std::abs(es.eigenvalues()(b));
  });
  FullSpectrum fs;
  fs.values.resize(n);
  fs.right.resize(n, n);
  for (int k = 0; k < n; ++k) {
    fs.values(k) = es.eigenvalues()(idx[k]);
    fs.right.col(k) = es.eigenvectors().col(idx[k]);
  }
  Eigen::PartialPivLU<MatrixXcd> lu(fs.right);
  MatrixXcd inv = lu.inverse();
  double bio = (inv * fs.right - MatrixXcd::Identity(n, n)).cwiseAbs().maxCoeff();
  if (!(bio < 1e-8))
    throw ConvergenceError("transfer_spectrum: eigenbasis is ill-conditioned (residual " +
                           std::to_string(bio) + "); transfer matrix close to defective");
  fs.left = inv;
  return fs;
}

}  // namespace

TransferSpectrum transfer_spectrum(const IMPS& s, int k) {
  s.validate_shapes();
  int n = s.bond_dim * s.bond_dim;
  if (k < 1 || k > n) throw ConfigError("transfer_spectrum: k must be in [1, chi^2]");
  FullSpectrum fs = full_transfer_spectrum(transfer_matrix(s));
  TransferSpectrum out;
  out.eigenvalues = fs.values.head(k);
  out.right = fs.right.leftCols(k);
  out.left = fs.left.topRows(k);
  return out;
}

IMPS normalize_imps(IMPS s) {
  s.validate_shapes();
  MatrixXcd t = transfer_matrix(s);
  FullSpectrum fs = full_transfer_spectrum(t);
  double l1 = std::abs(fs.values(0));
  if (!(l1 > 0.0)) throw ConfigError("IMPS: zero transfer matrix");
  if (s.bond_dim > 1) {
    double l2 = std::abs(fs.values(1));
    if (l1 - l2 < 1e-10 * l1)
      throw ConfigError("IMPS: leading transfer eigenvalue is degenerate (gap " +
                        std::to_string((l1 - l2) / l1) + "); state is not injective");
  }
  // the transfer eigenvalue scales with |A|^2
  double f = 1.0 / std::sqrt(l1);
  for (auto& a : s.tensor) a *= f;
  s.rescale_factor = f;
  // residual phase of lambda_1: for T = sum A (x) conj(A) the leading
  // eigenvalue of a valid state is real positive; reject otherwise
  std::complex<double> lam1 = fs.values(0) * (f * f);
  if (std::abs(lam1 - std::complex<double>(1.0, 0.0)) > 1e-8)
    throw ConfigError("IMPS: leading eigenvalue is not real positive after rescaling");
  return s;
}

// ---------------------------------------------------------------------------
// file format
// ---------------------------------------------------------------------------

IMPS load_imps(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("load_imps: cannot open " + path);
  json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw ConfigError("load_imps: malformed JSON in " + path + ": " + e.what());
  }
  for (const char* key : {"version", "phys_dim", "bond_dim", "unit_cell_sites", "tensor"})
    if (!j.contains(key)) throw ConfigError(std::string("load_imps: missing field '") + key + "'");
  if (j["version"].get<int>() != 1)
    throw ConfigError("load_imps: unsupported format version " + j["version"].dump());
  IMPS s;
  s.phys_dim = j["phys_dim"].get<int>();
  s.bond_dim = j["bond_dim"].get<int>();
  s.unit_cell_sites = j["unit_cell_sites"].get<int>();
  const auto& tens = j["tensor"];
  if (!tens.is_array() || static_cast<int>(tens.size()) != s.phys_dim)
    throw ConfigError("load_imps: 'tensor' must list phys_dim matrices");
  for (const auto& mat : tens) {
    if (!mat.is_array() || static_cast<int>(mat.size()) != s.bond_dim)
      throw ConfigError("load_imps: tensor matrix has wrong row count");
    MatrixXcd m(s.bond_dim, s.bond_dim);
    for (int r = 0; r < s.bond_dim; ++r) {
      const auto& row = mat[r];
      if (!row.is_array() || static_cast<int>(row.size()) != s.bond_dim)
        throw ConfigError("load_imps: tensor matrix has wrong column count");
      for (int c = 0; c < s.bond_dim; ++c) {
        const auto& entry = row[c];
        if (!entry.is_array() || entry.size() != 2 || !entry[0].is_string() ||
            !entry[1].is_string())
          throw ConfigError("load_imps: entries must be [re, im] decimal-string pairs");
        try {
          m(r, c) = std::complex<double>(std::stod(entry[0].get<std::string>()),
                                         std::stod(entry[1].get<std::string>()));
        } catch (const std::exception&) {
          throw ConfigError("load_imps: cannot parse entry at (" + std::to_string(r) + "," +
                            std::to_string(c) + ")");
        }
      }
    }
    s.tensor.push_back(std::move(m));
  }
  return normalize_imps(std::move(s));
}

void save_imps(const IMPS& s, const std::string& path) {
  json j;
  j["version"] = 1;
  j["phys_dim"] = s.phys_dim;
  j["bond_dim"] = s.bond_dim;
  j["unit_cell_sites"] = s.unit_cell_sites;
  json tens = json::array();
  char buf[64];
  for (const auto& m : s.tensor) {
    json mat = json::array();
    for (int r = 0; r < s.bond_dim; ++r) {
      json row = json::array();
      for (int c = 0; c < s.bond_dim; ++c) {
        std::snprintf(buf, sizeof buf, "%.17g", m(r, c).real());
        std::string re = buf;
        std::snprintf(buf, sizeof buf, "%.17g", m(r, c).imag());
        row.push_back(json::array({re, std::string(buf)}));
      }
      mat.push_back(std::move(row));
    }
    tens.push_back(std::move(mat));
  }
  j["tensor"] = std::move(tens);
  std::ofstream out(path);
  if (!out) throw ConfigError("save_imps: cannot write " + path);
  out << j.dump(1) << "\n";
}

// ---------------------------------------------------------------------------
// reduced density matrices
// ---------------------------------------------------------------------------

namespace {

// all left row-vectors <l| M_{i_1 j_1} ... M_{i_n j_n} over the D^{2n}
// physical patterns; index = (I * D^n + J) with big-endian site order
std::vector<Eigen::RowVectorXcd> left_tree(const IMPS& s, const Eigen::RowVectorXcd& l, int n) {
  int d = s.phys_dim;
  std::vector<MatrixXcd> m(d * d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) m[i * d + j] = dm::kron(s.tensor[i], s.tensor[j].conjugate());
  std::vector<Eigen::RowVectorXcd> cur{l};
  for (int site = 0; site < n; ++site) {
    std::vector<Eigen::RowVectorXcd> next(cur.size() * d * d);
    for (size_t b = 0; b < cur.size(); ++b)
      for (int ij = 0; ij < d * d; ++ij) next[b * d * d + ij] = cur[b] * m[ij];
    cur = std::move(next);
  }
  // reorder from interleaved (i_1 j_1 i_2 j_2 ...) to (I, J)
  long dn = 1;
  for (int k = 0; k < n; ++k) dn *= d;
  std::vector<Eigen::RowVectorXcd> out(dn * dn);
  for (long flat = 0; flat < static_cast<long>(cur.size()); ++flat) {
    long rest = flat, ii = 0, jj = 0;
    std::vector<int> digits(n);
    for (int k = n - 1; k >= 0; --k) {
      digits[k] = static_cast<int>(rest % (d * d));
      rest /= d * d;
    }
    for (int k = 0; k < n; ++k) {
      ii = ii * d + digits[k] / d;
      jj = jj * d + digits[k] % d;
    }
    out[ii * dn + jj] = std::move(cur[flat]);
  }
  return out;
}

std::vector<VectorXcd> right_tree(const IMPS& s, const VectorXcd& r, int n) {
  int d = s.phys_dim;
  std::vector<MatrixXcd> m(d * d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) m[i * d + j] = dm::kron(s.tensor[i], s.tensor[j].conjugate());
  std::vector<VectorXcd> cur{r};
  for (int site = 0; site < n; ++site) {
    // prepend sites so the leftmost site is applied last
    std::vector<VectorXcd> next(cur.size() * d * d);
    for (size_t b = 0; b < cur.size(); ++b)
      for (int ij = 0; ij < d * d; ++ij) next[static_cast<size_t>(ij) * cur.size() + b] = m[ij] * cur[b];
    cur = std::move(next);
  }
  long dn = 1;
  for (int k = 0; k < n; ++k) dn *= d;
  std::vector<VectorXcd> out(dn * dn);
  for (long flat = 0; flat < static_cast<long>(cur.size()); ++flat) {
    long rest = flat, ii = 0, jj = 0;
    std::vector<int> digits(n);
    // prepending made the leftmost site the high digit, as in left_tree
    for (int k = n - 1; k >= 0; --k) {
      digits[k] = static_cast<int>(rest % (d * d));
      rest /= d * d;
    }
    for (int k = 0; k < n; ++k) {
      ii = ii * d + digits[k] / d;
      jj = jj * d + digits[k] % d;
    }
    out[ii * dn + jj] = std::move(cur[flat]);
  }
  return out;
}

long ipow(int base, int exp) {
  long r = 1;
  for (int k = 0; k < exp; ++k) r *= base;
  return r;
}

}  // namespace

dm::DensityMatrix rdm_interval(const IMPS& s, int n_tensors) {
  s.validate_shapes();
  if (n_tensors < 1) throw ConfigError("rdm_interval: need n_tensors >= 1");
  long dn = ipow(s.phys_dim, n_tensors);
  if (dn > 4096) throw ConfigError("rdm_interval: dense cap exceeded");
  TransferSpectrum ts = transfer_spectrum(s, 1);
  Eigen::RowVectorXcd l = ts.left.row(0);
  VectorXcd r = ts.right.col(0);
  // normalize <l|r> = 1 exactly (already biorthonormal, this is a no-op guard)
  std::complex<double> ip = l * r;
  l /= ip;
  auto rows = left_tree(s, l, n_tensors);
  MatrixXcd rho(dn, dn);
  for (long i = 0; i < dn; ++i)
    for (long j = 0; j < dn; ++j) rho(i, j) = rows[i * dn + j] * r;
  MatrixXcd herm = 0.5 * (rho + rho.adjoint());
  dm::DensityMatrix out;
  out.digits = 16;
  out.m = std::move(herm);
  out.validate();
  return out;
}

DisjointRdm rdm_disjoint(const IMPS& s, int n_a, int gap, int n_b) {
  s.validate_shapes();
  if (n_a < 1 || n_b < 1) throw ConfigError("rdm_disjoint: need n_a, n_b >= 1");
  if (gap < 1) throw ConfigError("rdm_disjoint: gap must be >= 1 tensor");
  long da = ipow(s.phys_dim, n_a), db = ipow(s.phys_dim, n_b);
  if (da * db > 4096) throw ConfigError("rdm_disjoint: dense cap exceeded");

  int chi2 = s.bond_dim * s.bond_dim;
  TransferSpectrum ts = transfer_spectrum(s, chi2);

  // retained eigenpairs
  std::vector<int> keep;
  double bound = 0.0;
  for (int a = 0; a < chi2; ++a) {
    double w = std::pow(std::abs(ts.eigenvalues(a)), gap);
    if (s.bond_dim <= 32 || w >= 1e-16)
      keep.push_back(a);
    else
      bound += w;
  }

  auto rows = left_tree(s, ts.left.row(0), n_a);               // <l1| M^(A)
  auto cols = right_tree(s, ts.right.col(0), n_b);             // M^(B) |r1>
  // P[(IA,JA), a] = <l1| M^(A) |r_a>, Q[a, (IB,JB)] = <l_a| M^(B) |r1>
  MatrixXcd p(da * da, static_cast<long>(keep.size()));
  MatrixXcd q(static_cast<long>(keep.size()), db * db);
  for (long ij = 0; ij < da * da; ++ij)
    for (size_t k = 0; k < keep.size(); ++k) p(ij, k) = rows[ij] * ts.right.col(keep[k]);
  for (long ij = 0; ij < db * db; ++ij)
    for (size_t k = 0; k < keep.size(); ++k) q(k, ij) = ts.left.row(keep[k]) * cols[ij];
  VectorXcd lam(keep.size());
  for (size_t k = 0; k < keep.size(); ++k) lam(k) = std::pow(ts.eigenvalues(keep[k]), gap);

  MatrixXcd flat = p * lam.asDiagonal() * q;  // indexed [(IA,JA), (IB,JB)]
  MatrixXcd rho(da * db, da * db);
  for (long ia = 0; ia < da; ++ia)
    for (long ja = 0; ja < da; ++ja)
      for (long ib = 0; ib < db; ++ib)
        for (long jb = 0; jb < db; ++jb)
          rho(ia * db + ib, ja * db + jb) = flat(ia * da + ja, ib * db + jb);

  DisjointRdm out;
  out.truncation_bound = bound;
  out.asymmetry = (rho - rho.adjoint()).cwiseAbs().maxCoeff();
  if (out.asymmetry > 1e-6)
    throw ConvergenceError("rdm_disjoint: Hermiticity deviation " +
                           std::to_string(out.asymmetry) + " exceeds 1e-6");
  out.rho.digits = 16;
  out.rho.m = 0.5 * (rho + rho.adjoint().eval());
  out.rho.validate();
  return out;
}

double correlation_length(const IMPS& s) {
  s.validate_shapes();
  if (s.bond_dim == 1) return 0.0;
  TransferSpectrum ts = transfer_spectrum(s, 2);
  double l1 = std::abs(ts.eigenvalues(0));
  double l2 = std::abs(ts.eigenvalues(1));
  if (!(l2 / l1 < 1.0))
    throw ConfigError("correlation_length: |lambda_2| >= lambda_1 after rescaling");
  if (l2 == 0.0) return 0.0;
  return -static_cast<double>(s.unit_cell_sites) / std::log(l2 / l1);
}

// ---------------------------------------------------------------------------
// finite-window oracles (plain matrix powers, no eigendecomposition)
// ---------------------------------------------------------------------------

namespace {

MatrixXcd mat_power(const MatrixXcd& t, int k) {
  MatrixXcd out = MatrixXcd::Identity(t.rows(), t.cols());
  for (int i = 0; i < k; ++i) out = out * t;
  return out;
}

}  // namespace

MatrixXcd finite_window_rdm_interval(const IMPS& s, int n_tensors, int n_window) {
  if (n_window <= n_tensors) throw ConfigError("finite_window_rdm_interval: window too small");
  MatrixXcd t = transfer_matrix(s);
  MatrixXcd env = mat_power(t, n_window - n_tensors);
  std::complex<double> norm = (mat_power(t, n_window)).trace();
  long dn = ipow(s.phys_dim, n_tensors);
  // rho[i][j] = Tr(M^(A) env) / Tr(T^N): evaluate with the left tree seeded by
  // each row of env
  MatrixXcd rho(dn, dn);
  int chi2 = s.bond_dim * s.bond_dim;
  // build M^(A) as explicit matrices through the tree of row vectors per env row
  std::vector<MatrixXcd> ma(dn * dn, MatrixXcd::Zero(chi2, chi2));
  {
    int d = s.phys_dim;
    std::vector<MatrixXcd> m(d * d);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) m[i * d + j] = dm::kron(s.tensor[i], s.tensor[j].conjugate());
    std::vector<MatrixXcd> cur{MatrixXcd::Identity(chi2, chi2)};
    for (int site = 0; site < n_tensors; ++site) {
      std::vector<MatrixXcd> next(cur.size() * d * d);
      for (size_t b = 0; b < cur.size(); ++b)
        for (int ij = 0; ij < d * d; ++ij) next[b * static_cast<size_t>(d * d) + ij] = cur[b] * m[ij];
      cur = std::move(next);
    }
    for (long flat = 0; flat < static_cast<long>(cur.size()); ++flat) {
      long rest = flat, ii = 0, jj = 0;
      std::vector<int> digits(n_tensors);
      for (int k = n_tensors - 1; k >= 0; --k) {
        digits[k] = static_cast<int>(rest % (s.phys_dim * s.phys_dim));
        rest /= s.phys_dim * s.phys_dim;
      }
      for (int k = 0; k < n_tensors; ++k) {
        ii = ii * s.phys_dim + digits[k] / s.phys_dim;
        jj = jj * s.phys_dim + digits[k] % s.phys_dim;
      }
      ma[ii * dn + jj] = std::move(cur[flat]);
    }
  }
  for (long i = 0; i < dn; ++i)
    for (long j = 0; j < dn; ++j) rho(i, j) = (ma[i * dn + j] * env).trace() / norm;
  return rho;
}

MatrixXcd finite_window_rdm_disjoint(const IMPS& s, int n_a, int gap, int n_b, int n_window) {
  int used = n_a + gap + n_b;
  if (n_window <= used) throw ConfigError("finite_window_rdm_disjoint: window too small");
  MatrixXcd t = transfer_matrix(s);
  MatrixXcd tg = mat_power(t, gap);
  MatrixXcd env = mat_power(t, n_window - used);
  std::complex<double> norm = (mat_power(t, n_window)).trace();
  long da = ipow(s.phys_dim, n_a), db = ipow(s.phys_dim, n_b);

  auto build_blocks = [&](int n) {
    int d = s.phys_dim;
    int chi2 = s.bond_dim * s.bond_dim;
    std::vector<MatrixXcd> m(d * d);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) m[i * d + j] = dm::kron(s.tensor[i], s.tensor[j].conjugate());
    std::vector<MatrixXcd> cur{MatrixXcd::Identity(chi2, chi2)};
    for (int site = 0; site < n; ++site) {
      std::vector<MatrixXcd> next(cur.size() * d * d);
      for (size_t b = 0; b < cur.size(); ++b)
        for (int ij = 0; ij < d * d; ++ij) next[b * static_cast<size_t>(d * d) + ij] = cur[b] * m[ij];
      cur = std::move(next);
    }
    long dn = ipow(d, n);
    std::vector<MatrixXcd> out(dn * dn);
    for (long flat = 0; flat < static_cast<long>(cur.size()); ++flat) {
      long rest = flat, ii = 0, jj = 0;
      std::vector<int> digits(n);
      for (int k = n - 1; k >= 0; --k) {
        digits[k] = static_cast<int>(rest % (d * d));
        rest /= d * d;
      }
      for (int k = 0; k < n; ++k) {
        ii = ii * d + digits[k] / d;
        jj = jj * d + digits[k] % d;
      }
      out[ii * dn + jj] = std::move(cur[flat]);
    }
    return out;
  };
  auto mas = build_blocks(n_a);
  auto mbs = build_blocks(n_b);

  MatrixXcd rho(da * db, da * db);
  for (long ia = 0; ia < da; ++ia)
    for (long ja = 0; ja < da; ++ja) {
      MatrixXcd mid = mas[ia * da + ja] * tg;
      for (long ib = 0; ib < db; ++ib)
        for (long jb = 0; jb < db; ++jb)
          rho(ia * db + ib, ja * db + jb) = (mid * mbs[ib * db + jb] * env).trace() / norm;
    }
  return rho;
}

IMPS random_imps(int phys_dim, int bond_dim, unsigned seed, int unit_cell_sites) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  IMPS s;
  s.phys_dim = phys_dim;
  s.bond_dim = bond_dim;
  s.unit_cell_sites = unit_cell_sites;
  for (int i = 0; i < phys_dim; ++i) {
    MatrixXcd a(bond_dim, bond_dim);
    for (int r = 0; r < bond_dim; ++r)
      for (int c = 0; c < bond_dim; ++c) a(r, c) = std::complex<double>(gauss(rng), gauss(rng));
    s.tensor.push_back(std::move(a));
  }
  return normalize_imps(std::move(s));
}

}  // namespace qmi::imps
