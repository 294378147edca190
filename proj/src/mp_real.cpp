#include "qmi/mp_real.hpp"

#include <cstdio>
#include <vector>

namespace qmi::mp {

std::string Real::str(int out_digits) const {
  if (mpfr_nan_p(v_)) return "nan";
  if (out_digits <= 0) out_digits = static_cast<int>(mpfr_get_prec(v_) / 3.32) + 2;
  char fmt[32];
  std::snprintf(fmt, sizeof fmt, "%%.%dRg", out_digits);
  int need = mpfr_snprintf(nullptr, 0, fmt, v_);
  std::vector<char> buf(static_cast<size_t>(need) + 1);
  mpfr_snprintf(buf.data(), buf.size(), fmt, v_);
  return std::string(buf.data());
}

}  // namespace qmi::mp
