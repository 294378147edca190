#pragma once

#include <Eigen/Dense>

#include "qmi/errors.hpp"

namespace qmi::dm {

// Transverse-field Ising chain H = -J sum sx_i sx_{i+1} - g sum sz_i in Pauli
// convention, so the critical point sits at g = J.
struct SpinChainSpec {
  int n_sites = 4;
  double coupling_j = 1.0;
  double field_g = 1.0;
  enum class Boundary { open, periodic } boundary = Boundary::periodic;

  void validate() const {
    if (n_sites < 2) throw ConfigError("SpinChainSpec: n_sites must be >= 2");
    int cap = boundary == Boundary::periodic ? 20 : 24;
    if (n_sites > cap)
      throw ConfigError("SpinChainSpec: n_sites exceeds the cap (" + std::to_string(cap) + ")");
  }
};

struct GroundState {
  Eigen::VectorXd psi;  // real amplitudes, largest-magnitude entry positive
  double energy = 0.0;
  int iterations = 0;
};

// Lowest eigenpair: dense solve below 12 sites, restarted Lanczos with
// matrix-free H application above. Deterministic for a fixed spec.
GroundState tfim_ground_state(const SpinChainSpec& spec);

// out = H * psi (matrix-free); exposed for tests
void tfim_apply(const SpinChainSpec& spec, const Eigen::VectorXd& psi, Eigen::VectorXd& out);

// Deterministic reductions: fixed-size blocks summed serially in index order,
// so the result is independent of the OpenMP thread count.
double det_dot(const Eigen::VectorXd& a, const Eigen::VectorXd& b);

namespace serial_ref {
double det_dot(const Eigen::VectorXd& a, const Eigen::VectorXd& b);
void tfim_apply(const SpinChainSpec& spec, const Eigen::VectorXd& psi, Eigen::VectorXd& out);
}  // namespace serial_ref

}  // namespace qmi::dm
