#include "qplab/transfer.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace qplab {

namespace {

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                 a64 = 49.0 / 176, a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                 b5 = -2187.0 / 6784, b6 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                 e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

template <class S>
struct System {
  const AnalyticPotential* p;
  const std::vector<S>* theta;
  const std::vector<S>* omega;
  S energy;

  S coefficient(double t) const;  // q(t) = V(t, theta + t omega) - E
};

template <>
double System<double>::coefficient(double t) const {
  thread_local std::vector<double> x;
  x.resize(theta->size());
  for (size_t j = 0; j < x.size(); ++j) x[j] = (*theta)[j] + t * (*omega)[j];
  return p->eval(t, x) - energy;
}

template <>
std::complex<double> System<std::complex<double>>::coefficient(double t) const {
  thread_local std::vector<std::complex<double>> x;
  x.resize(theta->size());
  for (size_t j = 0; j < x.size(); ++j) x[j] = (*theta)[j] + t * (*omega)[j];
  return p->eval_complex(std::complex<double>(t, 0.0), x) - energy;
}

template <class S>
using State = std::array<S, 4>;  // (u, u', v, v')

template <class S>
State<S> deriv(const System<S>& sys, double t, const State<S>& y) {
  S q = sys.coefficient(t);
  return {y[1], q * y[0], y[3], q * y[2]};
}

template <class S>
double max_abs(const State<S>& y) {
  double m = 0.0;
  for (const S& v : y) m = std::max(m, detail::abs_of(v));
  return m;
}

// Advances (y, log_scale) from t0 to t1 (t0 < t1) under the adaptive
// controller. Renormalizes if entries threaten the double range.
template <class S>
void advance(const System<S>& sys, double t0, double t1, State<S>& y, double& log_scale,
             const IntegratorConfig& cfg) {
  if (t1 <= t0) return;
  const double span = t1 - t0;
  double t = t0;
  double scale0 = std::max(1.0, std::sqrt(detail::abs_of(sys.coefficient(t0))));
  double h = std::min({cfg.max_step, span, 0.1 / scale0});
  const double h_min_floor = std::max(span * 1e-14, 1e-300);

  State<S> k1 = deriv(sys, t, y), k2, k3, k4, k5, k6, k7;
  while (t < t1) {
    double h_min = std::max(h_min_floor, 8.0 * std::numeric_limits<double>::epsilon() * std::abs(t));
    bool clipped = false;
    if (t + h >= t1) {
      h = t1 - t;
      clipped = true;
    }
    State<S> yt;
    for (int i = 0; i < 4; ++i) yt[i] = y[i] + h * (a21 * k1[i]);
    k2 = deriv(sys, t + c2 * h, yt);
    for (int i = 0; i < 4; ++i) yt[i] = y[i] + h * (a31 * k1[i] + a32 * k2[i]);
    k3 = deriv(sys, t + c3 * h, yt);
    for (int i = 0; i < 4; ++i) yt[i] = y[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
    k4 = deriv(sys, t + c4 * h, yt);
    for (int i = 0; i < 4; ++i)
      yt[i] = y[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
    k5 = deriv(sys, t + c5 * h, yt);
    for (int i = 0; i < 4; ++i)
      yt[i] = y[i] + h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
    k6 = deriv(sys, t + h, yt);
    State<S> y5;
    for (int i = 0; i < 4; ++i)
      y5[i] = y[i] + h * (b1 * k1[i] + b3 * k3[i] + b4 * k4[i] + b5 * k5[i] + b6 * k6[i]);
    k7 = deriv(sys, t + h, y5);

    double err = 0.0;
    for (int i = 0; i < 4; ++i) {
      double ei = detail::abs_of(S(h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] +
                                        e6 * k6[i] + e7 * k7[i])));
      double sc = cfg.abs_tol + cfg.rel_tol * std::max(detail::abs_of(y[i]), detail::abs_of(y5[i]));
      err += (ei / sc) * (ei / sc);
    }
    err = std::sqrt(err / 4.0);

    if (err <= 1.0) {
      t = clipped ? t1 : t + h;
      y = y5;
      k1 = k7;  // FSAL
      if (max_abs(y) > 1e150) {  // overflow guard between renorm boundaries
        double mx = max_abs(y);
        for (auto& v : y) v /= mx;
        for (auto& v : k1) v /= mx;
        log_scale += std::log(mx);
      }
    }
    // On rejection t and y are unchanged, so k1 remains valid.
    double fac = 0.9 * std::pow(std::max(err, 1e-10), -0.2);
    h *= std::clamp(fac, 0.2, 5.0);
    h = std::min(h, cfg.max_step);
    if (h < h_min && t < t1) {
      if (err > 1.0)
        throw StepFailure("integrate_transfer: step controller stalled below minimum step");
      h = h_min;
    }
  }
}

template <class S>
TransferSolutionT<S> integrate_impl(const std::shared_ptr<const AnalyticPotential>& p,
                                    const Interval& I, std::span<const S> theta,
                                    std::span<const S> omega, S E, const IntegratorConfig& cfg,
                                    std::span<const double> extra_samples) {
  cfg.validate();
  if (!p) throw PreconditionError("integrate_transfer: null potential");
  if (static_cast<int>(theta.size()) != p->dim_d() ||
      static_cast<int>(omega.size()) != p->dim_d())
    throw PreconditionError("integrate_transfer: theta/omega dimension mismatch");

  TransferSolutionT<S> sol;
  sol.interval = I;
  sol.theta.assign(theta.begin(), theta.end());
  sol.omega.assign(omega.begin(), omega.end());
  sol.energy = E;
  sol.cfg = cfg;
  sol.potential = p;
  sol.anchor = I.a;

  // Breakpoints: renormalization times, requested samples, both endpoints.
  std::vector<double> brk;
  brk.push_back(I.a);
  brk.push_back(I.b);
  for (double t = I.a + cfg.renorm_interval; t < I.b; t += cfg.renorm_interval) brk.push_back(t);
  for (double t : extra_samples) {
    if (t < I.a - 1e-12 || t > I.b + 1e-12)
      throw PreconditionError("integrate_transfer: sample time outside interval");
    brk.push_back(std::clamp(t, I.a, I.b));
  }
  std::sort(brk.begin(), brk.end());
  brk.erase(std::unique(brk.begin(), brk.end(),
                        [](double x, double y) { return std::abs(x - y) < 1e-13; }),
            brk.end());

  System<S> sys{p.get(), &sol.theta, &sol.omega, E};
  // Segment-wise propagation: each segment integrates the fundamental system
  // from the identity, so its determinant is evaluated at a healthy scale;
  // the running state is updated by applying the segment matrix.
  State<S> g = {S(1), S(0), S(0), S(1)};
  double log_scale = 0.0, det_accum = 0.0;
  sol.samples.push_back({I.a, g[0], g[1], g[2], g[3], log_scale, det_accum});
  for (size_t i = 0; i + 1 < brk.size(); ++i) {
    State<S> seg = {S(1), S(0), S(0), S(1)};
    double seg_ls = 0.0;
    advance(sys, brk[i], brk[i + 1], seg, seg_ls, cfg);
    S det = seg[0] * seg[3] - seg[1] * seg[2];
    det_accum += std::log(detail::abs_of(det)) + 2.0 * seg_ls;
    State<S> next = {seg[0] * g[0] + seg[2] * g[1], seg[1] * g[0] + seg[3] * g[1],
                     seg[0] * g[2] + seg[2] * g[3], seg[1] * g[2] + seg[3] * g[3]};
    g = next;
    log_scale += seg_ls;
    double mx = max_abs(g);
    if (mx > 0.0) {
      for (auto& v : g) v /= mx;
      log_scale += std::log(mx);
    }
    sol.samples.push_back({brk[i + 1], g[0], g[1], g[2], g[3], log_scale, det_accum});
  }
  return sol;
}

}  // namespace

template <class S>
SolutionSampleT<S> TransferSolutionT<S>::sample_at(double t) const {
  if (t < interval.a - 1e-12 || t > interval.b + 1e-12)
    throw PreconditionError("sample_at: t outside interval");
  t = std::clamp(t, interval.a, interval.b);
  // Largest stored sample time <= t.
  auto it = std::upper_bound(samples.begin(), samples.end(), t,
                             [](double x, const SolutionSampleT<S>& s) { return x < s.t; });
  size_t idx = (it == samples.begin()) ? 0 : static_cast<size_t>(it - samples.begin()) - 1;
  const auto& s0 = samples[idx];
  if (std::abs(s0.t - t) < 1e-13) return s0;
  System<S> sys{potential.get(), &theta, &omega, energy};
  State<S> seg = {S(1), S(0), S(0), S(1)};
  double seg_ls = 0.0;
  advance(sys, s0.t, t, seg, seg_ls, cfg);
  S det = seg[0] * seg[3] - seg[1] * seg[2];
  SolutionSampleT<S> out;
  out.t = t;
  out.u = seg[0] * s0.u + seg[2] * s0.du;
  out.du = seg[1] * s0.u + seg[3] * s0.du;
  out.v = seg[0] * s0.v + seg[2] * s0.dv;
  out.dv = seg[1] * s0.v + seg[3] * s0.dv;
  out.log_scale = s0.log_scale + seg_ls;
  out.det_drift = s0.det_drift + std::log(detail::abs_of(det)) + 2.0 * seg_ls;
  return out;
}

template <class S>
double TransferSolutionT<S>::max_wronskian_drift() const {
  double worst = 0.0;
  for (const auto& s : samples) worst = std::max(worst, std::abs(std::expm1(s.det_drift)));
  return worst;
}

template struct TransferSolutionT<double>;
template struct TransferSolutionT<std::complex<double>>;

TransferSolution integrate_transfer(const std::shared_ptr<const AnalyticPotential>& p,
                                    const Interval& I, std::span<const double> theta,
                                    std::span<const double> omega, double E,
                                    const IntegratorConfig& cfg,
                                    std::span<const double> extra_samples) {
  return integrate_impl<double>(p, I, theta, omega, E, cfg, extra_samples);
}

TransferSolutionC integrate_transfer_complex(
    const std::shared_ptr<const AnalyticPotential>& p, const Interval& I,
    std::span<const std::complex<double>> theta, std::span<const std::complex<double>> omega,
    std::complex<double> E, const IntegratorConfig& cfg, std::span<const double> extra_samples) {
  return integrate_impl<std::complex<double>>(p, I, theta, omega, E, cfg, extra_samples);
}

ScaledMatrix2 transfer_matrix(const std::shared_ptr<const AnalyticPotential>& p,
                              const Interval& I, std::span<const double> theta,
                              std::span<const double> omega, double E,
                              const IntegratorConfig& cfg) {
  return integrate_transfer(p, I, theta, omega, E, cfg).final_matrix();
}

ScaledMatrix2C transfer_matrix_complex(const std::shared_ptr<const AnalyticPotential>& p,
                                       const Interval& I,
                                       std::span<const std::complex<double>> theta,
                                       std::span<const std::complex<double>> omega,
                                       std::complex<double> E, const IntegratorConfig& cfg) {
  return integrate_transfer_complex(p, I, theta, omega, E, cfg).final_matrix();
}

double sup_coefficient_norm(const AnalyticPotential& p, const Interval& I,
                            std::span<const double> theta, std::span<const double> omega,
                            double E, int samples_per_unit) {
  int n = std::max(2, static_cast<int>(std::ceil(I.length() * samples_per_unit)));
  std::vector<double> x(theta.size());
  double sup = 1.0;
  for (int i = 0; i <= n; ++i) {
    double t = I.a + (I.b - I.a) * (static_cast<double>(i) / n);
    for (size_t j = 0; j < x.size(); ++j) x[j] = theta[j] + t * omega[j];
    sup = std::max(sup, std::abs(p.eval(t, x) - E));
  }
  return sup;
}

double shift_covariance_check(const std::shared_ptr<const AnalyticPotential>& p,
                              const Interval& I, std::span<const double> theta,
                              std::span<const double> omega, double E, double n,
                              const IntegratorConfig& cfg) {
  if (n != std::floor(n)) throw PreconditionError("shift_covariance_check: n must be an integer");
  Interval shifted(I.a + n, I.b + n);
  ScaledMatrix2 lhs = transfer_matrix(p, shifted, theta, omega, E, cfg);
  std::vector<double> th2(theta.size());
  for (size_t j = 0; j < theta.size(); ++j) th2[j] = frac(theta[j] + n * omega[j]);
  ScaledMatrix2 rhs = transfer_matrix(p, I, th2, omega, E, cfg);
  return relative_distance(lhs, rhs);
}

}  // namespace qplab
