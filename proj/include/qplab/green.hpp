#pragma once

#include <span>
#include <utility>
#include <vector>

#include "qplab/transfer.hpp"

namespace qplab {

// G_I(s,t) value in scaled form: value may overflow to +-inf for extreme
// scales, log_magnitude and sign never do.
struct GreenValue {
  double value = 0.0;
  double log_magnitude = 0.0;
  double sign = 0.0;
};

// Dirichlet Green's function on I = [a,b], built from the solution v_a
// vanishing at a (forward branch) and v_b vanishing at b (backward branch,
// integrated in reversed time and flipped so v_b(b)=0, v_b'(b)=1).
struct GreenFunction {
  Interval interval;
  TransferSolution forward;   // fundamental system anchored at a
  TransferSolution backward;  // fundamental system anchored at b
  ScaledReal wronskian;       // W(v_a, v_b) = v_a(b)

  GreenValue eval(double s, double t) const;
  GreenValue partial_s(double s, double t) const;

  // |W(v_a,v_b) - (-v_b(a))| / |W|: the triple-identity drift.
  double wronskian_identity_drift() const;
};

// Integrates both branches. samples_per_unit controls the stored grid; query
// points between samples are handled by short re-integrations.
// Throws WronskianNearZero when |v_a(b)| < e^{-30} ||M_I|| (E is numerically a
// Dirichlet eigenvalue of the box).
GreenFunction build_green(const std::shared_ptr<const AnalyticPotential>& p, const Interval& I,
                          std::span<const double> theta, std::span<const double> omega,
                          double E, const IntegratorConfig& cfg, int samples_per_unit = 8);

// Max over interior samples of |y(t) - (y(b) d_s G(b,t) - y(a) d_s G(a,t))|
// relative to max |y|. y = c_u u + c_v v taken from y_sol, which must cover I.
double poisson_identity_check(const std::shared_ptr<const AnalyticPotential>& p,
                              const Interval& I, std::span<const double> theta,
                              std::span<const double> omega, double E,
                              const TransferSolution& y_sol, double c_u, double c_v,
                              const IntegratorConfig& cfg, int n_interior = 17);

struct DecayWindow {
  Interval J;
  double defect = 0.0;   // the deviation budget K
  double rate = 0.0;     // the L value used
  int case_id = 0;       // 1..4, which entry of M_I was dominant
  double worst_margin = 0.0;  // min over sampled pairs of bound - log|G| (>= 0 when verified)
};

// Case analysis of the Green's-function decay proposition: picks the dominant
// entry of M_I, shrinks the interval by at most 2K/gamma per affected end, and
// verifies |G_J|, |d_s G_J| <= exp(-|s-t| L_ref + 2K) on the sample grid.
DecayWindow decay_window_search(const std::shared_ptr<const AnalyticPotential>& p,
                                const Interval& I, std::span<const double> theta,
                                std::span<const double> omega, double E, double L_ref,
                                double K_budget, double gamma, const IntegratorConfig& cfg,
                                int samples_per_unit = 8);

struct LocalizationResult {
  double E_star = 0.0;
  double decay_rate = 0.0;
  std::vector<std::pair<double, double>> profile;  // (t, log|y(t)|)
  double profile_max_log = 0.0;
  double argmax_t = 0.0;
};

// Bisects a Dirichlet eigenvalue of the box from the sign change of v_a(b; E),
// integrates the eigenfunction, and fits the decay slope of log|y| against
// |t - argmax| over the window where log|y| is within 30 of its peak.
LocalizationResult localize_eigenfunction(const std::shared_ptr<const AnalyticPotential>& p,
                                          const Interval& box, std::span<const double> theta,
                                          std::span<const double> omega,
                                          std::pair<double, double> E_bracket,
                                          const IntegratorConfig& cfg,
                                          int samples_per_unit = 8);

}  // namespace qplab
