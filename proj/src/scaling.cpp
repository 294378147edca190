#include "qmi/scaling.hpp"

#include <algorithm>
#include <cmath>

namespace qmi::scaling {

void SeriesI::validate_cross_ratio() const {
  for (const auto& p : points) {
    Rational r = cross_ratio(p.ell, p.d, p.ell);
    if (!(r == x))
      throw AnalysisError("SeriesI: point (ell=" + std::to_string(p.ell) +
                          ", d=" + std::to_string(p.d) + ") has cross-ratio " + r.str() +
                          " != " + x.str());
  }
}

Rational cross_ratio(int ell_a, int d, int ell_b) {
  if (ell_a < 1 || ell_b < 1 || d < 0) throw ConfigError("cross_ratio: invalid partition");
  return Rational(static_cast<std::int64_t>(ell_a) * ell_b,
                  static_cast<std::int64_t>(ell_a + d) * (ell_b + d));
}

int separation_for_x(const CrossRatio& x, int ell) {
  if (!x.sqrt_rational)
    throw ConfigError("separation_for_x: sqrt(x) must be rational for equal intervals");
  // x = (lA lB)/((lA+d)(lB+d)) with lA = lB = ell gives sqrt(x) = ell/(ell+d),
  // so d = ell (p - q)/q for sqrt(x) = q/p in lowest terms
  std::int64_t q = x.sqrt_num, p = x.sqrt_den;
  std::int64_t num = static_cast<std::int64_t>(ell) * (p - q);
  if (num % q != 0) {
    std::int64_t ell0 = ((ell / q) + 1) * q;
    throw ConfigError("separation_for_x: ell=" + std::to_string(ell) +
                      " incompatible with x=" + x.x.str() + " (ell must be a multiple of " +
                      std::to_string(q) + "; next valid value is " + std::to_string(ell0) + ")");
  }
  return static_cast<int>(num / q);
}

SeriesI proxy_series(const SeriesI& series) {
  SeriesI out;
  out.x = series.x;
  out.provenance = series.provenance + " proxy";
  for (int parity = 0; parity < 2; ++parity) {
    std::vector<SeriesPoint> cls;
    for (const auto& p : series.points)
      if ((p.ell % 2 != 0) == (parity == 0)) cls.push_back(p);
    if (cls.empty()) continue;
    std::sort(cls.begin(), cls.end(),
              [](const SeriesPoint& a, const SeriesPoint& b) { return a.ell < b.ell; });
    if (cls.size() < 3)
      throw AnalysisError("proxy_series: need >= 3 points per parity class, have " +
                          std::to_string(cls.size()));
    int step = cls[1].ell - cls[0].ell;
    for (size_t i = 2; i < cls.size(); ++i)
      if (cls[i].ell - cls[i - 1].ell != step)
        throw AnalysisError("proxy_series: non-uniform ell step in parity class (" +
                            std::to_string(cls[i].ell - cls[i - 1].ell) + " vs " +
                            std::to_string(step) + ")");
    for (size_t i = 1; i + 1 < cls.size(); ++i) {
      SeriesPoint p;
      p.ell = cls[i].ell;
      p.d = cls[i].d;
      p.value = cls[i].ell * (cls[i + 1].value - cls[i - 1].value) / (2.0 * step);
      out.points.push_back(p);
    }
  }
  std::sort(out.points.begin(), out.points.end(),
            [](const SeriesPoint& a, const SeriesPoint& b) { return a.ell < b.ell; });
  return out;
}

LinFit linear_fit(const std::vector<double>& x, const std::vector<double>& y) {
  LinFit f;
  f.n = static_cast<int>(x.size());
  if (f.n < 2) throw AnalysisError("linear_fit: need at least 2 points");
  double sx = 0, sy = 0;
  for (int i = 0; i < f.n; ++i) {
    sx += x[i];
    sy += y[i];
  }
  double mx = sx / f.n, my = sy / f.n;
  double sxx = 0, sxy = 0, syy = 0;
  for (int i = 0; i < f.n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0) throw AnalysisError("linear_fit: degenerate abscissa");
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double ss_res = 0;
  for (int i = 0; i < f.n; ++i) {
    double r = y[i] - (f.intercept + f.slope * x[i]);
    ss_res += r * r;
  }
  f.r2 = syy > 0.0 ? 1.0 - ss_res / syy : 1.0;
  if (f.n > 2) {
    double s2 = ss_res / (f.n - 2);
    f.slope_err = std::sqrt(s2 / sxx);
    f.intercept_err = std::sqrt(s2 * (1.0 / f.n + mx * mx / sxx));
  }
  return f;
}

namespace {

LinFit loglog_fit(const std::vector<SeriesPoint>& pts) {
  std::vector<double> lx, ly;
  for (const auto& p : pts) {
    lx.push_back(std::log(static_cast<double>(p.ell)));
    ly.push_back(std::log(std::abs(p.value)));
  }
  return linear_fit(lx, ly);
}

}  // namespace

FitResult fit_scaling_exponent(const SeriesI& proxy, int window_lo, int window_hi, Parity parity) {
  std::vector<SeriesPoint> in_window;
  for (const auto& p : proxy.points) {
    if (p.ell < window_lo || p.ell > window_hi) continue;
    bool is_odd = p.ell % 2 != 0;
    if (parity == Parity::odd && !is_odd) continue;
    if (parity == Parity::even && is_odd) continue;
    in_window.push_back(p);
  }
  if (in_window.size() < 4)
    throw AnalysisError("fit_scaling_exponent: fewer than 4 points in window [" +
                        std::to_string(window_lo) + ", " + std::to_string(window_hi) + "]");
  int pos = 0, neg = 0;
  for (const auto& p : in_window) (p.value > 0 ? pos : neg)++;
  if (pos != 0 && neg != 0)
    throw AnalysisError("fit_scaling_exponent: proxy changes sign inside window [" +
                        std::to_string(window_lo) + ", " + std::to_string(window_hi) +
                        "]; no power law can be extracted");

  FitResult res;
  res.window_lo = window_lo;
  res.window_hi = window_hi;
  res.n_points = static_cast<int>(in_window.size());

  LinFit joint = loglog_fit(in_window);
  res.estimate = joint.slope;
  res.stderror = joint.slope_err;
  res.r2 = joint.r2;
  res.parity_tag = parity == Parity::odd ? "odd" : parity == Parity::even ? "even" : "joint";

  if (parity == Parity::both) {
    std::vector<SeriesPoint> odd, even;
    for (const auto& p : in_window) (p.ell % 2 != 0 ? odd : even).push_back(p);
    if (odd.size() >= 3 && even.size() >= 3) {
      LinFit fo = loglog_fit(odd), fe = loglog_fit(even);
      double sig = std::sqrt(fo.slope_err * fo.slope_err + fe.slope_err * fe.slope_err);
      if (sig > 0.0 && std::abs(fo.slope - fe.slope) > 3.0 * sig) {
        res.parity_tag = "split";
        res.odd_estimate = fo.slope;
        res.even_estimate = fe.slope;
        res.odd_stderror = fo.slope_err;
        res.even_stderror = fe.slope_err;
      }
    }
  }
  return res;
}

const char* region_name(Region r) {
  switch (r) {
    case Region::one:
      return "I";
    case Region::two:
      return "II";
    case Region::three:
      return "III";
    default:
      return "excluded";
  }
}

std::vector<PhaseDiagramNode> phase_diagram(const SeriesSource& engine,
                                            const std::vector<double>& alphas,
                                            const std::vector<double>& zs, const Rational& x,
                                            int window_lo, int window_hi) {
  std::vector<PhaseDiagramNode> nodes;
  for (double a : alphas)
    for (double z : zs) {
      PhaseDiagramNode node;
      node.alpha = a;
      node.z = z;
      try {
        SeriesI series = engine(a, z, x, window_lo - 2, window_hi + 2);
        SeriesI proxy = proxy_series(series);
        node.fit = fit_scaling_exponent(proxy, window_lo, window_hi, Parity::both);
        double d = node.fit.estimate;
        node.region = d < -0.5 ? Region::one : d > 0.5 ? Region::three : Region::two;
      } catch (const Error& e) {
        node.status = std::string("error: ") + e.what();
        node.region = Region::excluded;
      }
      nodes.push_back(std::move(node));
    }
  return nodes;
}

TransitionPoint transition_point(const std::vector<std::pair<double, double>>& delta_samples,
                                 double z) {
  if (delta_samples.size() < 2) throw AnalysisError("transition_point: need >= 2 samples");
  auto samples = delta_samples;
  std::sort(samples.begin(), samples.end());
  for (size_t i = 0; i + 1 < samples.size(); ++i) {
    double d0 = samples[i].second, d1 = samples[i + 1].second;
    if (d0 == 0.0) return {samples[i].first, z / (samples[i].first - 1.0)};
    if (d0 < 0.0 && d1 >= 0.0) {
      double a0 = samples[i].first, a1 = samples[i + 1].first;
      double ac = a0 + (a1 - a0) * (-d0) / (d1 - d0);
      return {ac, z / (ac - 1.0)};
    }
  }
  throw AnalysisError("transition_point: samples do not bracket a sign change");
}

double cft_prefactor(double alpha, double z, double central_charge) {
  double den = z + 2.0 - 2.0 * alpha;
  if (den == 0.0) throw SingularityError("cft_prefactor: pole at z = 2(alpha - 1)");
  return central_charge * (z + 1.0 - alpha) / (3.0 * den);
}

QRatio q_ratio(double proxy_value, double i_value) {
  if (std::abs(i_value) < 1e-14) {
    if (proxy_value == 0.0) return {0.0, false};
    return {0.0, true};
  }
  return {proxy_value / i_value, false};
}

namespace {

struct ClassMax {
  bool monotone_up = false, monotone_down = false;
  bool single_interior = false;
  double pos = 0.0;        // quadratic vertex
  double curvature = 0.0;  // second derivative at the maximum
};

ClassMax analyze_class(const std::vector<SeriesPoint>& cls) {
  ClassMax r;
  int n = static_cast<int>(cls.size());
  int maxima = 0, max_idx = -1;
  bool up = true, down = true;
  for (int i = 1; i < n; ++i) {
    if (cls[i].value <= cls[i - 1].value) up = false;
    if (cls[i].value >= cls[i - 1].value) down = false;
  }
  r.monotone_up = up;
  r.monotone_down = down;
  for (int i = 1; i + 1 < n; ++i)
    if (cls[i].value > cls[i - 1].value && cls[i].value > cls[i + 1].value) {
      ++maxima;
      max_idx = i;
    }
  if (maxima == 1) {
    r.single_interior = true;
    double x0 = cls[max_idx - 1].ell, x1 = cls[max_idx].ell;
    double y0 = cls[max_idx - 1].value, y1 = cls[max_idx].value, y2 = cls[max_idx + 1].value;
    double h = x1 - x0;  // uniform in-class step
    double a2 = (y0 - 2.0 * y1 + y2) / (2.0 * h * h);
    double b = (y2 - y0) / (2.0 * h);
    r.pos = a2 != 0.0 ? x1 - b / (2.0 * a2) : x1;
    r.curvature = 2.0 * a2;
  }
  return r;
}

}  // namespace

ResolutionLength resolution_length(const SeriesI& proxy) {
  ResolutionLength out;
  std::vector<SeriesPoint> odd, even;
  for (const auto& p : proxy.points) (p.ell % 2 != 0 ? odd : even).push_back(p);
  auto by_ell = [](const SeriesPoint& a, const SeriesPoint& b) { return a.ell < b.ell; };
  std::sort(odd.begin(), odd.end(), by_ell);
  std::sort(even.begin(), even.end(), by_ell);
  if (odd.size() < 5 || even.size() < 5) {
    out.reason = "need >= 5 points per parity class";
    return out;
  }
  ClassMax co = analyze_class(odd), ce = analyze_class(even);
  if (co.monotone_down && ce.monotone_down) {
    out.status = ResolutionLength::Status::zero;
    out.lstar = 0.0;
    return out;
  }
  if (co.monotone_up && ce.monotone_up) {
    out.status = ResolutionLength::Status::divergent;
    return out;
  }
  if (!co.single_interior || !ce.single_interior) {
    out.reason = "no single interior maximum in a parity class";
    return out;
  }
  if (std::abs(std::round(co.pos) - std::round(ce.pos)) > 1.0) {
    out.reason = "odd/even maxima positions differ by more than 1";
    return out;
  }
  if (!(co.curvature <= -1e-5) || !(ce.curvature <= -1e-5)) {
    out.reason = "curvature at the maximum above -1e-5";
    return out;
  }
  out.status = ResolutionLength::Status::ok;
  out.lstar = 0.5 * (co.pos + ce.pos);
  return out;
}

LstarFit fit_lstar_powerlaw(const std::vector<std::pair<double, double>>& points) {
  if (points.size() < 6) throw AnalysisError("fit_lstar_powerlaw: need >= 6 points");
  auto pts = points;
  std::sort(pts.begin(), pts.end());
  double a_max = pts.back().first;
  for (const auto& [a, l] : pts)
    if (!(l > 0.0)) throw AnalysisError("fit_lstar_powerlaw: nonpositive lstar");

  auto fit_at = [&](double ac, LinFit* out) -> double {
    std::vector<double> x, y;
    for (const auto& [a, l] : pts) {
      if (ac <= a) return -1e9;
      x.push_back(std::log(ac - a));
      y.push_back(std::log(l));
    }
    LinFit f = linear_fit(x, y);
    if (out) *out = f;
    return f.r2;
  };

  // golden-section maximization of R^2 over (a_max, a_max + 0.05]
  const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
  double lo = a_max + 1e-9, hi = a_max + 0.05;
  double x1 = hi - phi * (hi - lo), x2 = lo + phi * (hi - lo);
  double f1 = fit_at(x1, nullptr), f2 = fit_at(x2, nullptr);
  while (hi - lo > 1e-6) {
    if (f1 < f2) {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + phi * (hi - lo);
      f2 = fit_at(x2, nullptr);
    } else {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - phi * (hi - lo);
      f1 = fit_at(x1, nullptr);
    }
  }
  double ac = 0.5 * (lo + hi);
  LinFit best;
  double r2 = fit_at(ac, &best);
  double edge = fit_at(a_max + 0.05, nullptr);
  double inner = fit_at(a_max + 2e-9, nullptr);
  if (r2 < edge || r2 < inner)
    throw AnalysisError("fit_lstar_powerlaw: no interior R^2 maximum in the search window");

  LstarFit out;
  out.alpha_c = ac;
  out.nu = -best.slope;
  out.nu_err = best.slope_err;
  out.lambda = std::exp(best.intercept);
  out.lambda_err = out.lambda * best.intercept_err;
  out.r2 = r2;
  // alpha_c uncertainty from the curvature of R^2 near the optimum
  {
    double h = 2e-4;
    double rl = fit_at(ac - h, nullptr), rr = fit_at(ac + h, nullptr);
    double curv = (rl + rr - 2.0 * r2) / (h * h);
    if (curv < 0.0) {
      double n = static_cast<double>(pts.size());
      out.alpha_c_err = std::sqrt(std::max(0.0, (1.0 - r2) / (0.5 * std::abs(curv) * n)));
    }
  }
  return out;
}

FitResult fit_convergence_exponent(const std::vector<std::pair<double, double>>& xi_and_value,
                                   double i_ref) {
  std::vector<double> x, y;
  int dropped = 0;
  for (const auto& [xi, v] : xi_and_value) {
    double diff = std::abs(v - i_ref);
    if (diff < 1e-15) {
      ++dropped;
      continue;  // converged point carries no slope information
    }
    if (!(xi > 0.0)) throw AnalysisError("fit_convergence_exponent: nonpositive xi");
    x.push_back(std::log(xi));
    y.push_back(std::log(diff));
  }
  if (x.size() < 3)
    throw AnalysisError("fit_convergence_exponent: fewer than 3 usable points (" +
                        std::to_string(dropped) + " dropped as converged)");
  LinFit f = linear_fit(x, y);
  FitResult res;
  res.estimate = f.slope;
  res.stderror = f.slope_err;
  res.r2 = f.r2;
  res.n_points = f.n;
  res.parity_tag = "joint";
  return res;
}

}  // namespace qmi::scaling
