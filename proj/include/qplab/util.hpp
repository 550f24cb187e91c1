#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace qplab {

inline constexpr double kTwoPi = 6.283185307179586476925286766559;

// Fractional part in [0, 1). Exact for u >= 1 by Sterbenz (floor(u) is within
// a factor of two of u), which is what makes periodicity checks bitwise.
inline double frac(double u) {
  double f = u - std::floor(u);
  if (f >= 1.0) f = 0.0;  // u just below an integer can round up
  return f;
}

inline std::vector<double> frac(std::span<const double> u) {
  std::vector<double> out(u.size());
  for (size_t i = 0; i < u.size(); ++i) out[i] = frac(u[i]);
  return out;
}

// sup-norm of a real vector
inline double sup_norm(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

// Pairwise (cascade) summation in a fixed order determined by index only, so
// reports are reproducible bit-for-bit regardless of how values were produced.
inline double pairwise_sum(std::span<const double> v) {
  if (v.empty()) return 0.0;
  if (v.size() == 1) return v[0];
  if (v.size() <= 8) {
    double s = v[0];
    for (size_t i = 1; i < v.size(); ++i) s += v[i];
    return s;
  }
  size_t half = v.size() / 2;
  return pairwise_sum(v.subspan(0, half)) + pairwise_sum(v.subspan(half));
}

inline double pairwise_mean(std::span<const double> v) {
  return v.empty() ? 0.0 : pairwise_sum(v) / static_cast<double>(v.size());
}

// FNV-1a, used for config/potential content hashes in cache keys.
inline uint64_t fnv1a64(std::string_view bytes, uint64_t seed = 1469598103934665603ull) {
  uint64_t h = seed;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

// A real number carried as mantissa * exp(log_scale); keeps Green's-function
// and Poisson arithmetic overflow-safe at scales like e^400.
struct ScaledReal {
  double mant = 0.0;      // finite, sign-carrying
  double log_scale = 0.0; // natural log of the factored-out scale

  static ScaledReal from_value(double v) { return {v, 0.0}; }

  bool is_zero() const { return mant == 0.0; }

  double log_abs() const {
    if (mant == 0.0) return -std::numeric_limits<double>::infinity();
    return std::log(std::abs(mant)) + log_scale;
  }

  double sign() const { return mant > 0 ? 1.0 : (mant < 0 ? -1.0 : 0.0); }

  // Value as a plain double; may overflow to +-inf for extreme scales.
  double value() const { return mant * std::exp(log_scale); }

  ScaledReal normalized() const {
    if (mant == 0.0) return {0.0, 0.0};
    double a = std::abs(mant);
    return {mant / a, log_scale + std::log(a)};
  }

  friend ScaledReal operator*(const ScaledReal& x, const ScaledReal& y) {
    return ScaledReal{x.mant * y.mant, x.log_scale + y.log_scale}.normalized();
  }

  friend ScaledReal operator/(const ScaledReal& x, const ScaledReal& y) {
    return ScaledReal{x.mant / y.mant, x.log_scale - y.log_scale}.normalized();
  }

  friend ScaledReal operator+(const ScaledReal& x, const ScaledReal& y) {
    if (x.mant == 0.0) return y;
    if (y.mant == 0.0) return x;
    double ls = std::max(x.log_scale, y.log_scale);
    double m = x.mant * std::exp(x.log_scale - ls) + y.mant * std::exp(y.log_scale - ls);
    return ScaledReal{m, ls}.normalized();
  }

  friend ScaledReal operator-(const ScaledReal& x, const ScaledReal& y) {
    return x + ScaledReal{-y.mant, y.log_scale};
  }
};

}  // namespace qplab
