#pragma once

#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "qplab/lyapunov.hpp"
#include "qplab/transfer.hpp"

namespace qplab {

// Quantitative irrationality: ||k . omega|| >= c |k|^{-A} for 0 < |k| <= t.
struct DiophantineSpec {
  double c = 0.1;
  double A = 2.0;
  int d = 1;

  void validate() const {
    if (c <= 0) throw PreconditionError("DiophantineSpec: c must be > 0");
    if (!(A > d)) throw PreconditionError("DiophantineSpec: requires A > d");
  }
};

struct DcResult {
  bool ok = false;
  std::vector<int> worst_k;  // minimizer of ||k.omega|| |k|^A / c
  double margin = 0.0;       // min of that quotient; ok iff >= 1
};

// Exhaustive scan of the sup-norm ball 0 < |k| <= t. Throws BudgetExceeded
// when (2t+1)^d > 1e8 lattice points.
DcResult dc_membership(std::span<const double> omega, const DiophantineSpec& spec, double t);

struct DiscrepancyResult {
  long long count = 0;
  double error = 0.0;  // |count - N Vol(R)|
};

// Counts n <= N with frac(n omega) in the half-open box R = prod [a_i, b_i).
// Caller-verified precondition: omega passes dc_membership at t = N.
DiscrepancyResult discrepancy_count(std::span<const double> omega, long long N,
                                    std::span<const std::pair<double, double>> box);

struct OrbitCountReport {
  long long N = 0;
  long long hits = 0;
  double bound_exponent = 0.0;  // delta
  bool passes = false;          // hits < N^{1-delta}
};

// Counts orbit points theta0 + n omega (mod 1), n = 1..N, inside the sampled
// membership set.
OrbitCountReport orbit_hit_count(std::span<const double> omega, std::span<const double> theta0,
                                 long long N,
                                 const std::function<bool(std::span<const double>)>& membership,
                                 double delta);

struct ResonanceHit {
  double energy;
  long long n;
  double dev_J;  // |J| L_J - log||M_J(theta)||
  double dev_I;  // |I| L_I - log||M_I(theta + n omega)||
};

struct ResonanceScanReport {
  std::vector<ResonanceHit> hits;
  int energies_scanned = 0;
  int energies_below_gamma = 0;
  int energies_with_hit = 0;
  double fraction_with_hit = 0.0;
};

// Statement-level scan for double resonances: energies where
//   log||M_J(theta)|| <= |J| L_J - |J|^{1-sigma/2}   and, for some n in range,
//   log||M_I(theta+n omega)|| <= |I| L_I - |I|^{1-sigma}.
// A demonstration, not a verification: the paper's claim is measure-theoretic
// over omega, which a single-omega scan cannot assert.
ResonanceScanReport resonance_scan(const std::shared_ptr<const AnalyticPotential>& p,
                                   const Interval& I, const Interval& J,
                                   std::span<const double> theta, std::span<const double> omega,
                                   std::span<const double> E_grid, long long n_min,
                                   long long n_max, double gamma, double sigma,
                                   const PhaseGrid& grid, const IntegratorConfig& cfg);

}  // namespace qplab
