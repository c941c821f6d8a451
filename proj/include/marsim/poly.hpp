#pragma once

#include <stdexcept>
#include <vector>

namespace marsim {

// Polynomial coefficients in ascending-power order: c[0] + c[1]*x + c[2]*x^2 + ...
using Poly = std::vector<double>;

inline double eval_poly(const Poly& coeffs, double x) {
  if (coeffs.empty()) {
    throw std::invalid_argument("eval_poly: empty coefficient list");
  }
  double acc = 0.0;
  for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) {
    acc = acc * x + *it;
  }
  return acc;
}

inline double eval_poly_deriv(const Poly& coeffs, double x) {
  if (coeffs.empty()) {
    throw std::invalid_argument("eval_poly_deriv: empty coefficient list");
  }
  double acc = 0.0;
  for (std::size_t i = coeffs.size(); i-- > 1;) {
    acc = acc * x + coeffs[i] * static_cast<double>(i);
  }
  return acc;
}

}  // namespace marsim
