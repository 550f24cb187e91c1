#pragma once

#include <complex>
#include <memory>
#include <span>
#include <vector>

#include "qplab/errors.hpp"
#include "qplab/potential.hpp"
#include "qplab/util.hpp"

namespace qplab {

struct Interval {
  double a = 0.0;
  double b = 1.0;

  Interval() = default;
  Interval(double a_, double b_) : a(a_), b(b_) {
    if (!(a < b)) throw PreconditionError("Interval: requires a < b");
  }
  double length() const { return b - a; }
  double max_endpoint() const { return std::max(std::abs(a), std::abs(b)); }
};

namespace detail {
template <class S>
double abs_of(const S& x) {
  return std::abs(x);
}
}  // namespace detail

// 2x2 matrix stored as unit-scale entries times e^{log_scale}. The represented
// matrix is unit * e^{log_scale}; for transfer matrices det = 1, so
// log|det unit| + 2 log_scale stays ~0 and serves as a drift diagnostic.
template <class S>
struct Mat2T {
  S m00{1}, m01{0}, m10{0}, m11{1};
  double log_scale = 0.0;

  static Mat2T identity() { return {}; }

  double max_abs() const {
    return std::max(std::max(detail::abs_of(m00), detail::abs_of(m01)),
                    std::max(detail::abs_of(m10), detail::abs_of(m11)));
  }

  // Factors the largest entry magnitude into log_scale (max entry becomes 1).
  Mat2T normalized() const {
    double mx = max_abs();
    if (mx == 0.0) return *this;
    Mat2T out = *this;
    out.m00 /= mx;
    out.m01 /= mx;
    out.m10 /= mx;
    out.m11 /= mx;
    out.log_scale += std::log(mx);
    return out;
  }

  S det_unit() const { return m00 * m11 - m01 * m10; }

  // log|det(represented)|; 0 up to drift for transfer matrices.
  double log_det_drift() const {
    return std::log(detail::abs_of(det_unit())) + 2.0 * log_scale;
  }

  // Adjugate; equals the inverse of the represented matrix when det = 1.
  Mat2T adjugate() const {
    Mat2T out = *this;
    out.m00 = m11;
    out.m11 = m00;
    out.m01 = -m01;
    out.m10 = -m10;
    return out.normalized();
  }
};

using ScaledMatrix2 = Mat2T<double>;
using ScaledMatrix2C = Mat2T<std::complex<double>>;

// log of the spectral norm (largest singular value) of the represented matrix,
// from the closed-form 2x2 singular values of the unit part plus log_scale.
template <class S>
double log_norm(const Mat2T<S>& M) {
  // Largest eigenvalue of M* M for the 2x2 unit block.
  double a = std::norm(std::complex<double>(M.m00)) + std::norm(std::complex<double>(M.m10));
  double d = std::norm(std::complex<double>(M.m01)) + std::norm(std::complex<double>(M.m11));
  std::complex<double> b = std::conj(std::complex<double>(M.m00)) * std::complex<double>(M.m01) +
                           std::conj(std::complex<double>(M.m10)) * std::complex<double>(M.m11);
  double tr = a + d;
  double disc = std::sqrt(std::max(0.0, (a - d) * (a - d) + 4.0 * std::norm(b)));
  double smax2 = 0.5 * (tr + disc);
  return 0.5 * std::log(smax2) + M.log_scale;
}

template <class S>
Mat2T<S> compose(const Mat2T<S>& M2, const Mat2T<S>& M1) {
  Mat2T<S> out;
  out.m00 = M2.m00 * M1.m00 + M2.m01 * M1.m10;
  out.m01 = M2.m00 * M1.m01 + M2.m01 * M1.m11;
  out.m10 = M2.m10 * M1.m00 + M2.m11 * M1.m10;
  out.m11 = M2.m10 * M1.m01 + M2.m11 * M1.m11;
  out.log_scale = M2.log_scale + M1.log_scale;
  return out.normalized();
}

// Relative entrywise distance between represented matrices, computed at the
// common scale of the larger one.
template <class S>
double relative_distance(const Mat2T<S>& A, const Mat2T<S>& B) {
  double ls = std::max(A.log_scale, B.log_scale);
  double fa = std::exp(A.log_scale - ls), fb = std::exp(B.log_scale - ls);
  double num = std::max(
      std::max(detail::abs_of(S(A.m00 * fa - B.m00 * fb)), detail::abs_of(S(A.m01 * fa - B.m01 * fb))),
      std::max(detail::abs_of(S(A.m10 * fa - B.m10 * fb)), detail::abs_of(S(A.m11 * fa - B.m11 * fb))));
  double den = std::max(A.max_abs() * fa, B.max_abs() * fb);
  return den == 0.0 ? 0.0 : num / den;
}

struct IntegratorConfig {
  double rel_tol = 1e-10;
  double abs_tol = 1e-12;
  double renorm_interval = 1.0;  // time between rescalings
  double max_step = 1.0;

  void validate() const {
    if (rel_tol <= 0 || abs_tol <= 0 || renorm_interval <= 0 || max_step <= 0)
      throw PreconditionError("IntegratorConfig: all fields must be > 0");
  }
};

// One recorded time sample of the fundamental system. u carries the
// (u_a, u_a') column, v the (v_a, v_a') column; all four share log_scale.
// det_drift is log|det| of the represented matrix, accumulated segment by
// segment so it stays accurate at scales where the unit-block determinant
// underflows.
template <class S>
struct SolutionSampleT {
  double t;
  S u, du, v, dv;
  double log_scale;
  double det_drift;
};

// Sampled fundamental solutions of -y'' + (V - E) y = 0 on [a, b], produced by
// integrate_transfer. Carries everything needed to re-integrate from a stored
// sample to an off-grid query point.
template <class S>
struct TransferSolutionT {
  Interval interval;
  std::vector<SolutionSampleT<S>> samples;  // ascending t, t_0 = a, t_N = b
  std::vector<S> theta;
  std::vector<S> omega;
  S energy{};
  IntegratorConfig cfg;
  std::shared_ptr<const AnalyticPotential> potential;
  double anchor = 0.0;  // time at which the system equals the identity

  const SolutionSampleT<S>& front() const { return samples.front(); }
  const SolutionSampleT<S>& back() const { return samples.back(); }

  // Fundamental matrix at t = interval.b relative to the anchor.
  Mat2T<S> final_matrix() const {
    const auto& s = samples.back();
    Mat2T<S> M;
    M.m00 = s.u;
    M.m01 = s.v;
    M.m10 = s.du;
    M.m11 = s.dv;
    M.log_scale = s.log_scale;
    return M.normalized();
  }

  // Sample at arbitrary t in [a, b]: nearest stored sample, then a short
  // re-integration. Exact (same integrator contract) at stored sample times.
  SolutionSampleT<S> sample_at(double t) const;

  // log|det M_I| accumulated over integration segments; 0 up to drift.
  double det_drift() const { return samples.back().det_drift; }

  // Worst |W(u,v) - 1| = |e^{det_drift} - 1| over the stored samples.
  double max_wronskian_drift() const;
};

using TransferSolution = TransferSolutionT<double>;
using TransferSolutionC = TransferSolutionT<std::complex<double>>;

// Integrates the first-order system Y' = A(t) Y, A = [[0,1],[V-E,0]], with an
// embedded adaptive Dormand-Prince 5(4) pair. Every renorm_interval of time
// the largest entry magnitude is factored into the running log scale. The
// returned solution records samples at a, b, every renormalization time, and
// every requested time in extra_samples.
TransferSolution integrate_transfer(const std::shared_ptr<const AnalyticPotential>& p,
                                    const Interval& I, std::span<const double> theta,
                                    std::span<const double> omega, double E,
                                    const IntegratorConfig& cfg,
                                    std::span<const double> extra_samples = {});

TransferSolutionC integrate_transfer_complex(
    const std::shared_ptr<const AnalyticPotential>& p, const Interval& I,
    std::span<const std::complex<double>> theta, std::span<const std::complex<double>> omega,
    std::complex<double> E, const IntegratorConfig& cfg,
    std::span<const double> extra_samples = {});

template <class S>
Mat2T<S> transfer_matrix(const TransferSolutionT<S>& sol) {
  return sol.final_matrix();
}

// M_{[a,b]} as a single matrix (convenience for the common case).
ScaledMatrix2 transfer_matrix(const std::shared_ptr<const AnalyticPotential>& p,
                              const Interval& I, std::span<const double> theta,
                              std::span<const double> omega, double E,
                              const IntegratorConfig& cfg);

ScaledMatrix2C transfer_matrix_complex(const std::shared_ptr<const AnalyticPotential>& p,
                                       const Interval& I,
                                       std::span<const std::complex<double>> theta,
                                       std::span<const std::complex<double>> omega,
                                       std::complex<double> E, const IntegratorConfig& cfg);

// Numerical stand-in for the Gronwall constant C(V,|E|): sup of ||A(t)|| =
// max(1, |V(t, theta + t omega) - E|) sampled on a grid over I.
double sup_coefficient_norm(const AnalyticPotential& p, const Interval& I,
                            std::span<const double> theta, std::span<const double> omega,
                            double E, int samples_per_unit = 64);

// Relative discrepancy between M_{n+[a,b]}(theta) and M_{[a,b]}(theta + n omega
// mod 1). n must be an integer value (the shift structure only holds there).
double shift_covariance_check(const std::shared_ptr<const AnalyticPotential>& p,
                              const Interval& I, std::span<const double> theta,
                              std::span<const double> omega, double E, double n,
                              const IntegratorConfig& cfg);

}  // namespace qplab
