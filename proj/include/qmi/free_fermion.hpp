#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <tuple>
#include <vector>

#include "qmi/mp_linalg.hpp"
#include "qmi/precision.hpp"
#include "qmi/rational.hpp"

namespace qmi::ff {

// Two disjoint intervals of lA and lB sites separated by d sites, lengths in
// lattice units.
struct Partition {
  int ell_a = 1;
  int d = 0;
  int ell_b = 1;

  void validate() const {
    if (ell_a < 1 || ell_b < 1 || d < 0) throw ConfigError("Partition: need ell_a,ell_b >= 1 and d >= 0");
  }
  int dim() const { return ell_a + ell_b; }
  Rational cross_ratio() const {
    return Rational(static_cast<std::int64_t>(ell_a) * ell_b,
                    static_cast<std::int64_t>(ell_a + d) * (ell_b + d));
  }
};

struct RMIPoint {
  double alpha = 2.0;
  double z = 1.0;

  void validate() const {
    if (!(alpha > 0.0) || alpha == 1.0) throw ConfigError("RMIPoint: alpha must be > 0 and != 1");
    if (!(z > 0.0)) throw ConfigError("RMIPoint: z must be > 0");
  }
};

// Ground-state two-point correlation matrix restricted to A u B. Off-diagonal
// entries are purely imaginary: +i/pi at distance 1 (row index smaller), zero
// at even distances, with true lattice distances across the gap.
struct CorrMatrix {
  Partition partition;
  bool decoupled = false;  // AB blocks zeroed (describes rho_A (x) rho_B)
  bool analytic = false;   // built by build_corr_matrix (rebuildable at any precision)
  mp::CplxMat entries;
};

CorrMatrix build_corr_matrix(const Partition& part, int digits);
CorrMatrix decouple(const CorrMatrix& c);

// The diagonal phase rotation i^site maps the analytic C to a real symmetric
// matrix; valid for Hermitian matrices with real diagonal, zero entries at
// even site distances and purely imaginary ones at odd distances.
mp::RealMat corr_rotated_real(const CorrMatrix& c);
bool is_phase_rotatable(const CorrMatrix& c);

// Eigendata of one partition, shared by all (alpha, z) evaluations on it.
// l1 = logdet(1 - C) and l2 = logdet(1 - C') depend only on the spectra.
struct PartitionEigs {
  Partition partition;
  int digits = 0;
  mp::SymEigen full;    // rotated C
  mp::SymEigen block_a; // rotated C_AA
  mp::SymEigen block_b; // empty when blocks coincide (ell_a == ell_b)
  bool blocks_equal = false;
  mp::Real l1, l2;
};

PartitionEigs prepare_partition(const Partition& part, int digits);

// alpha-z RMI from prepared eigendata; throws SingularityError when an
// endpoint eigenvalue is unresolvable at these digits (caller escalates).
double azrmi_from_eigs(const PartitionEigs& pe, const RMIPoint& pt);

// Full operation with precision escalation along policy.schedule (entries
// >= policy.digits). Cp must be decouple(C).
double azrmi_ff(const CorrMatrix& c, const CorrMatrix& cp, const RMIPoint& pt,
                const PrecisionPolicy& policy);

// Same evaluation for a partition built analytically at each attempted precision.
double azrmi_ff(const Partition& part, const RMIPoint& pt, const PrecisionPolicy& policy,
                int* digits_used = nullptr);

// von Neumann entropy of the Gaussian state with correlation block C:
// -sum [nu log nu + (1-nu) log(1-nu)], 0 log 0 := 0.
double entropy_ff(const mp::CplxMat& c_block, const PrecisionPolicy& policy);
double entropy_ff(const mp::RealMat& c_block_rotated, const PrecisionPolicy& policy);

// von Neumann MI of a partition: S(A) + S(B) - S(AB).
double vn_mi_ff(const Partition& part, const PrecisionPolicy& policy);

// Calibrated working precision over an (alpha, z) grid: smallest schedule
// entry whose evaluation at ell_max agrees with the next entry to
// target_error, computed on a coarse subgrid, bilinearly interpolated and
// rounded up to multiples of 50 (floor PrecisionPolicy::floor_digits()).
struct PrecisionMap {
  std::vector<double> alphas, zs;
  std::vector<int> digits;  // row-major [alpha][z]
  int at(double alpha, double z) const;
};

PrecisionMap calibrate_precision(const std::vector<double>& alpha_grid,
                                 const std::vector<double>& z_grid, const Rational& x,
                                 int ell_max, const PrecisionPolicy& policy);

// Thread-safe cache of prepared partitions keyed by (partition, digits).
class PartitionCache {
 public:
  std::shared_ptr<const PartitionEigs> get(const Partition& part, int digits);
  void clear();

 private:
  std::mutex mu_;
  std::map<std::tuple<int, int, int, int>, std::shared_ptr<const PartitionEigs>> cache_;
};

}  // namespace qmi::ff
