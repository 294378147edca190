#pragma once

#include <cstdlib>
#include <vector>

#include "qmi/errors.hpp"

namespace qmi {

// Working precision for the multi-precision pipeline. Precision is always a
// per-call parameter; there is no global mutable precision state, so
// concurrent evaluations cannot interfere with each other.
struct PrecisionPolicy {
  int digits = 250;             // decimal working precision, >= 50
  double target_error = 1e-16;  // absolute output tolerance
  std::vector<int> schedule = default_schedule();

  static std::vector<int> default_schedule() {
    std::vector<int> s;
    for (int d = 250; d <= 600; d += 50) s.push_back(d);
    for (int d = 700; d <= 1000; d += 100) s.push_back(d);
    return s;
  }

  // Floor for calibrated precisions. QMI_PRECISION_FLOOR overrides for quick tests.
  static int floor_digits() {
    if (const char* env = std::getenv("QMI_PRECISION_FLOOR")) {
      int v = std::atoi(env);
      if (v >= 50) return v;
    }
    return 250;
  }

  void validate() const {
    if (digits < 50) throw ConfigError("PrecisionPolicy: digits must be >= 50");
    for (size_t i = 1; i < schedule.size(); ++i)
      if (schedule[i] <= schedule[i - 1])
        throw ConfigError("PrecisionPolicy: escalation schedule must be strictly increasing");
  }

  PrecisionPolicy with_digits(int d) const {
    PrecisionPolicy p = *this;
    p.digits = d;
    return p;
  }
};

}  // namespace qmi
