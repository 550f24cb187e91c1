#pragma once

// Independent oracles for the unit tests. Everything here deliberately avoids
// the library's integration and norm paths: fixed-step classical RK4 instead
// of the adaptive embedded pair, eigenvalues of M^T M by direct bisection-free
// closed form on long doubles instead of the 2x2 SVD route, and plain
// contour sums for the Faber checks.

#include <array>
#include <cmath>
#include <complex>
#include <vector>

#include "qplab/potential.hpp"

namespace oracle {

struct Mat2 {
  double m00, m01, m10, m11;
  double log_scale = 0.0;
};

// Classical fixed-step RK4 on the full fundamental system, renormalized each
// unit of time.
inline Mat2 rk4_transfer(const qplab::AnalyticPotential& p, double a, double b,
                         const std::vector<double>& theta, const std::vector<double>& omega,
                         double E, double dt) {
  auto q = [&](double t) {
    std::vector<double> x(theta.size());
    for (size_t j = 0; j < x.size(); ++j) x[j] = theta[j] + t * omega[j];
    return p.eval(t, x) - E;
  };
  auto deriv = [&](double t, const std::array<double, 4>& y) {
    double qt = q(t);
    return std::array<double, 4>{y[1], qt * y[0], y[3], qt * y[2]};
  };
  std::array<double, 4> y = {1.0, 0.0, 0.0, 1.0};
  double log_scale = 0.0;
  long long steps = static_cast<long long>(std::ceil((b - a) / dt));
  double h = (b - a) / static_cast<double>(steps);
  double t = a;
  for (long long i = 0; i < steps; ++i) {
    auto k1 = deriv(t, y);
    std::array<double, 4> y2, y3, y4;
    for (int j = 0; j < 4; ++j) y2[j] = y[j] + 0.5 * h * k1[j];
    auto k2 = deriv(t + 0.5 * h, y2);
    for (int j = 0; j < 4; ++j) y3[j] = y[j] + 0.5 * h * k2[j];
    auto k3 = deriv(t + 0.5 * h, y3);
    for (int j = 0; j < 4; ++j) y4[j] = y[j] + h * k3[j];
    auto k4 = deriv(t + h, y4);
    for (int j = 0; j < 4; ++j) y[j] += h / 6.0 * (k1[j] + 2 * k2[j] + 2 * k3[j] + k4[j]);
    t = a + (i + 1) * h;
    double mx = 0.0;
    for (double v : y) mx = std::max(mx, std::abs(v));
    if (mx > 1e10) {
      for (double& v : y) v /= mx;
      log_scale += std::log(mx);
    }
  }
  return {y[0], y[2], y[1], y[3], log_scale};
}

// Spectral norm of an (unscaled) 2x2 real matrix through the eigenvalues of
// M^T M evaluated in long double.
inline double dense_norm2(double a, double b, double c, double d) {
  long double A = (long double)a * a + (long double)c * c;
  long double B = (long double)a * b + (long double)c * d;
  long double D = (long double)b * b + (long double)d * d;
  long double tr = A + D;
  long double det = A * D - B * B;
  long double disc = std::sqrt(std::max((long double)0.0, tr * tr - 4 * det));
  return std::sqrt((double)((tr + disc) / 2));
}

// Faber polynomial values by the contour integral at radius R (trapezoid).
inline double faber_value_contour(double L, int n, double R, double z, int quad = 8192) {
  std::complex<double> acc = 0.0;
  for (int j = 0; j < quad; ++j) {
    double ang = qplab::kTwoPi * (j + 0.5) / quad;
    std::complex<double> w = R * std::complex<double>(std::cos(ang), std::sin(ang));
    std::complex<double> zeta = 0.5 * L * (w + 1.0 / w);
    // d zeta / d ang = i w psi'(w), psi'(w) = (L/2)(1 - 1/w^2)
    std::complex<double> dz = std::complex<double>(0, 1) * w * 0.5 * L * (1.0 - 1.0 / (w * w));
    acc += std::pow(w, n) / (zeta - z) * dz;
  }
  // (1 / 2 pi i) * integral over ang in [0, 2pi)
  acc /= std::complex<double>(0, 1) * static_cast<double>(quad);
  return acc.real();
}

inline double horner(const std::vector<double>& coeffs, double z) {
  double acc = 0.0;
  for (size_t i = coeffs.size(); i-- > 0;) acc = acc * z + coeffs[i];
  return acc;
}

}  // namespace oracle
