#pragma once

#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>

#include "qmi/errors.hpp"

namespace qmi {

// Exact rational arithmetic for cross-ratios; keeps lattice geometry free of
// floating-point x.
struct Rational {
  std::int64_t num = 0;
  std::int64_t den = 1;

  Rational() = default;
  Rational(std::int64_t n, std::int64_t d) : num(n), den(d) { normalize(); }

  void normalize() {
    if (den == 0) throw ConfigError("Rational: zero denominator");
    if (den < 0) {
      num = -num;
      den = -den;
    }
    std::int64_t g = std::gcd(num < 0 ? -num : num, den);
    if (g > 1) {
      num /= g;
      den /= g;
    }
  }

  bool operator==(const Rational& o) const { return num == o.num && den == o.den; }
  double to_double() const { return static_cast<double>(num) / static_cast<double>(den); }
  std::string str() const { return std::to_string(num) + "/" + std::to_string(den); }

  static Rational parse(const std::string& s) {
    auto slash = s.find('/');
    try {
      if (slash == std::string::npos) return Rational(std::stoll(s), 1);
      return Rational(std::stoll(s.substr(0, slash)), std::stoll(s.substr(slash + 1)));
    } catch (const std::exception&) {
      throw ConfigError("Rational: cannot parse '" + s + "'");
    }
  }
};

// Cross-ratio x = lA*lB / ((lA+d)(lB+d)) as an exact rational in (0, 1];
// x = 1 iff d = 0.
struct CrossRatio {
  Rational x;
  // whether sqrt(x) is rational: needed to realize x with integer partitions
  // at lA = lB
  bool sqrt_rational = false;
  std::int64_t sqrt_num = 0, sqrt_den = 1;

  static CrossRatio of(const Rational& r) {
    if (r.num <= 0 || r.num > r.den) throw ConfigError("CrossRatio: x must be in (0, 1]");
    CrossRatio c;
    c.x = r;
    auto isqrt = [](std::int64_t v) -> std::int64_t {
      std::int64_t r0 = static_cast<std::int64_t>(std::sqrt(static_cast<double>(v)));
      while (r0 * r0 > v) --r0;
      while ((r0 + 1) * (r0 + 1) <= v) ++r0;
      return r0;
    };
    std::int64_t sn = isqrt(r.num), sd = isqrt(r.den);
    if (sn * sn == r.num && sd * sd == r.den) {
      c.sqrt_rational = true;
      c.sqrt_num = sn;
      c.sqrt_den = sd;
    }
    return c;
  }
};

}  // namespace qmi
