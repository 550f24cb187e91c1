#pragma once

#include <complex>
#include <span>
#include <vector>

#include "qplab/transfer.hpp"

namespace qplab {

// Uniform lattice on T^d used to discretize the phase average, enumerated in
// fixed lexicographic order so every estimate is reproducible bit-for-bit.
struct PhaseGrid {
  int points_per_dim = 32;
  int dim = 1;
  std::vector<double> offset;  // empty means 0

  int total_points() const {
    int n = 1;
    for (int j = 0; j < dim; ++j) n *= points_per_dim;
    return n;
  }
  std::vector<double> point(int index) const;
  PhaseGrid halved() const {
    PhaseGrid g = *this;
    g.points_per_dim = std::max(1, points_per_dim / 2);
    return g;
  }
  void validate() const {
    if (points_per_dim < 1 || dim < 1) throw PreconditionError("PhaseGrid: invalid sizes");
    if (!offset.empty() && static_cast<int>(offset.size()) != dim)
      throw PreconditionError("PhaseGrid: offset dimension mismatch");
  }
};

// Finite-scale Lyapunov exponent L_I with its grid metadata. spread is the
// half-difference between the full-grid and half-grid estimates, the error
// proxy every report carries.
struct LyapunovEstimate {
  double value = 0.0;
  Interval interval;
  PhaseGrid grid;
  std::vector<double> eta;
  double spread = 0.0;
  double gamma_floor = 0.0;
};

struct LdtParams {
  double epsilon = 0.5;
  double sigma = 0.25;       // must lie in (0,1)
  int sample_count = 1000;
  uint64_t seed = 0;         // scrambles the low-discrepancy sequence

  void validate() const {
    if (epsilon <= 0) throw PreconditionError("LdtParams: epsilon must be > 0");
    if (!(sigma > 0 && sigma < 1)) throw PreconditionError("LdtParams: sigma must be in (0,1)");
    if (sample_count < 100) throw PreconditionError("LdtParams: sample_count must be >= 100");
  }
};

struct ApReport {
  int n = 0;
  double mu = 0.0;
  bool hypothesis_min_ok = false;
  bool hypothesis_gap_ok = false;
  double residual = 0.0;  // |log||A_n...A_1|| + sum mids - sum pairs|
  double bound = 0.0;     // n / mu
};

struct SubadditivityRow {
  int n;
  double value;
  double spread;
};

struct SubadditivityTable {
  std::vector<SubadditivityRow> rows;
  double max_violation = 0.0;  // worst (m+n)L_{m+n} - mL_m - nL_n - slack
  bool ok = true;
};

struct BridgeReport {
  double difference = 0.0;  // |L_I - L_n|
  int n = 0;
  double bound = 0.0;  // C_num (| n - |I| | + 2) / |I|
};

struct ApMultiscaleResult {
  double value = 0.0;               // L_I estimate via the AP expansion
  double hypothesis_fail_fraction = 0.0;
};

struct UniformUpperReport {
  double sup_dev = 0.0;  // sup_theta log||M_I|| - |I| L_I
  double bound = 0.0;    // c_fit |I|^{1-sigma}
  bool ok = false;
};

struct ParamPoint {
  std::vector<double> theta;
  std::vector<double> omega;
  std::complex<double> energy;
};

struct StabilityRoughReport {
  double lhs = 0.0;
  double rhs = 0.0;
  bool conclusive = false;  // rhs < 0.1, the lemma's proviso
  bool ok = false;          // lhs <= rhs (meaningful when conclusive)
};

// Phase-averaged finite-scale exponent
//   L_I(eta) = (1/|I|) avg_theta log||M_I(theta + i eta)||
// over the grid, with deterministic pairwise summation. eta may be empty (0).
LyapunovEstimate finite_lyapunov(const std::shared_ptr<const AnalyticPotential>& p,
                                 const Interval& I, std::span<const double> omega, double E,
                                 const PhaseGrid& grid, std::span<const double> eta,
                                 const IntegratorConfig& cfg);

SubadditivityTable subadditivity_table(const std::shared_ptr<const AnalyticPotential>& p,
                                       std::span<const double> omega, double E, int n_max,
                                       const PhaseGrid& grid, const IntegratorConfig& cfg);

BridgeReport continuous_discrete_bridge(const std::shared_ptr<const AnalyticPotential>& p,
                                        const Interval& I, std::span<const double> omega,
                                        double E, const PhaseGrid& grid,
                                        const IntegratorConfig& cfg);

// Evaluates the Avalanche Principle hypotheses exactly as stated and reports
// the expansion residual together with n/mu. Hypothesis failure is data.
ApReport avalanche_check(std::span<const ScaledMatrix2> mats, double mu);

// |I| L_I estimated through the AP expansion over equal blocks of length ~ell;
// throws ApHypothesisFailure if >10% of grid phases fail the AP hypotheses.
ApMultiscaleResult ap_multiscale_lyapunov(const std::shared_ptr<const AnalyticPotential>& p,
                                          const Interval& I, std::span<const double> omega,
                                          double E, double block_len, const PhaseGrid& grid,
                                          const IntegratorConfig& cfg);

// Fraction of low-discrepancy phases with |log||M_I|| - |I| L_I| >= eps |I|^{1-sigma}.
double ldt_deviation_measure(const std::shared_ptr<const AnalyticPotential>& p,
                             const Interval& I, std::span<const double> omega, double E,
                             const LdtParams& params, const IntegratorConfig& cfg);

UniformUpperReport uniform_upper_check(const std::shared_ptr<const AnalyticPotential>& p,
                                       const Interval& I, std::span<const double> omega,
                                       double E, const PhaseGrid& grid, double gamma_floor,
                                       double c_fit, double sigma, const IntegratorConfig& cfg);

// max over consecutive eta pairs of |L_I(eta) - L_I(eta')| / ||eta - eta'||.
double eta_lipschitz_check(const std::shared_ptr<const AnalyticPotential>& p, const Interval& I,
                           std::span<const double> omega, double E,
                           std::span<const std::vector<double>> eta_list, const PhaseGrid& grid,
                           const IntegratorConfig& cfg);

StabilityRoughReport stability_rough_check(const std::shared_ptr<const AnalyticPotential>& p,
                                           const Interval& I, const ParamPoint& base,
                                           const ParamPoint& perturbed,
                                           const IntegratorConfig& cfg);

// Low-discrepancy phase sample (Halton with a seeded torus rotation);
// index is 1-based. Used by the LDT experiment and exposed for reuse.
std::vector<double> halton_point(int index, int dim, uint64_t seed);

}  // namespace qplab
