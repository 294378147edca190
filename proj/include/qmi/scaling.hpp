#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "qmi/rational.hpp"

namespace qmi::scaling {

// one MI evaluation at fixed cross-ratio
struct SeriesPoint {
  int ell = 0;
  int d = 0;
  double value = 0.0;
  bool odd() const { return ell % 2 != 0; }
};

// I(x, ell) samples at fixed (alpha, z) and fixed exact x
struct SeriesI {
  Rational x;
  std::string provenance;  // engine tag, e.g. "ff alpha=1.5 z=1"
  std::vector<SeriesPoint> points;

  void validate_cross_ratio() const;  // every point must satisfy x exactly
};

enum class Parity { odd, even, both };

struct FitResult {
  double estimate = 0.0;
  double stderror = 0.0;
  double r2 = 0.0;
  int window_lo = 0, window_hi = 0;
  int n_points = 0;
  std::string parity_tag;  // "joint", "odd", "even", "split"
  // per-parity results populated when the odd/even split is significant
  std::optional<double> odd_estimate, even_estimate;
  std::optional<double> odd_stderror, even_stderror;
};

// exact rational cross-ratio lA lB / ((lA+d)(lB+d))
Rational cross_ratio(int ell_a, int d, int ell_b);

// separation realizing x at ell_a = ell_b = ell; requires rational sqrt(x);
// throws naming the smallest valid ell when d is not integral
int separation_for_x(const CrossRatio& x, int ell);

// proxy ell * dI/dell via per-parity central differences with the uniform
// in-class step; boundary points dropped
SeriesI proxy_series(const SeriesI& series);

// slope of log|proxy| vs log ell on [window_lo, window_hi]; all proxy values
// in the window must share a sign. With Parity::both the joint fit is
// reported, split per parity when the class slopes differ by more than 3
// combined standard errors.
FitResult fit_scaling_exponent(const SeriesI& proxy, int window_lo, int window_hi, Parity parity);

// region classification from the scaling exponent
enum class Region { one, two, three, excluded };
const char* region_name(Region r);

struct PhaseDiagramNode {
  double alpha = 0.0, z = 0.0;
  FitResult fit;
  Region region = Region::excluded;
  std::string status = "ok";  // "ok" | error tag
};

// engine callback: I(x, ell) for this (alpha, z); evaluations may throw
using SeriesSource =
    std::function<SeriesI(double alpha, double z, const Rational& x, int ell_lo, int ell_hi)>;

std::vector<PhaseDiagramNode> phase_diagram(const SeriesSource& engine,
                                            const std::vector<double>& alphas,
                                            const std::vector<double>& zs, const Rational& x,
                                            int window_lo, int window_hi);

// linear-interpolated zero crossing of delta(alpha) at fixed z; also reports
// eta = z / (alpha_c - 1)
struct TransitionPoint {
  double alpha_c = 0.0;
  double eta = 0.0;
};
TransitionPoint transition_point(const std::vector<std::pair<double, double>>& delta_samples,
                                 double z);

// c (z + 1 - alpha) / (3 (z + 2 - 2 alpha)); pole at z = 2(alpha - 1)
double cft_prefactor(double alpha, double z, double central_charge);

// proxy / I with a divergence flag at |I| < 1e-14
struct QRatio {
  double q = 0.0;
  bool divergent = false;
};
QRatio q_ratio(double proxy_value, double i_value);

// resolution length from the proxy maxima per parity class
struct ResolutionLength {
  enum class Status { ok, zero, divergent, rejected } status = Status::rejected;
  double lstar = 0.0;
  std::string reason;
};
ResolutionLength resolution_length(const SeriesI& proxy);

// power-law fit lstar = lambda (alpha_c - alpha)^(-nu): golden-section search
// on alpha_c maximizing R^2 of the log-log linear fit
struct LstarFit {
  double lambda = 0.0, alpha_c = 0.0, nu = 0.0;
  double lambda_err = 0.0, alpha_c_err = 0.0, nu_err = 0.0;
  double r2 = 0.0;
};
LstarFit fit_lstar_powerlaw(const std::vector<std::pair<double, double>>& points);

// slope of log|I_chi - I_ref| vs log xi; near-converged points dropped
FitResult fit_convergence_exponent(const std::vector<std::pair<double, double>>& xi_and_value,
                                   double i_ref);

// plain least squares y = a + b x with stderr of the slope and R^2
struct LinFit {
  double slope = 0.0, intercept = 0.0, slope_err = 0.0, intercept_err = 0.0, r2 = 0.0;
  int n = 0;
};
LinFit linear_fit(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace qmi::scaling
