#pragma once

#include <array>
#include <functional>
#include <map>
#include <span>
#include <vector>

#include "qplab/arithmetic.hpp"
#include "qplab/lyapunov.hpp"
#include "qplab/transfer.hpp"

namespace qplab {

// Product of symmetric intervals K_i = [-L_i, L_i] with the Faber radii R
// (analyticity) and R' (evaluation/quadrature), shared across variables.
// The exterior maps are scaled Zhukowsky transforms psi(w) = (L/2)(w + 1/w).
struct FaberDomain {
  std::vector<double> half_lengths;
  double R = 1.5;
  double R_prime = 1.25;

  void validate() const {
    if (half_lengths.empty()) throw PreconditionError("FaberDomain: no variables");
    for (double L : half_lengths)
      if (L <= 0) throw PreconditionError("FaberDomain: half lengths must be > 0");
    if (!(1.0 < R_prime && R_prime < R))
      throw PreconditionError("FaberDomain: requires 1 < R_prime < R");
  }
  size_t dims() const { return half_lengths.size(); }

  std::complex<double> inverse_map(size_t i, std::complex<double> w) const {
    return 0.5 * half_lengths[i] * (w + 1.0 / w);
  }
  // ell(Gamma_{K_i,R'}) = pi L (R' + 1/R')
  double boundary_length(size_t i) const {
    return 3.14159265358979323846 * half_lengths[i] * (R_prime + 1.0 / R_prime);
  }
  // d(K_i, Gamma_{K_i,R'}) = (L/2)(R' + 1/R' - 2)
  double boundary_distance(size_t i) const {
    return 0.5 * half_lengths[i] * (R_prime + 1.0 / R_prime - 2.0);
  }
};

// Monomial coefficients (ascending degree) of the Faber polynomial
// Phi_{[-L,L],n}, via the three-term recurrence induced by the Zhukowsky map.
std::vector<double> faber_polynomial(double L, int n);

using MultiIndex = std::vector<int>;
using ProductFn = std::function<std::complex<double>(std::span<const std::complex<double>>)>;

// Faber coefficients a_n, |n| <= N, of f on the product domain, by iterated
// trapezoidal contour quadrature at radius rho_q = R' with quad_points nodes
// per dimension (a power of two >= 4N). Doubling quad_points must leave every
// |a_n| within 1e-8 * max|a_n|, else QuadratureUnresolved.
std::map<MultiIndex, double> faber_coefficients(const ProductFn& f, const FaberDomain& dom,
                                                int N, int quad_points);

// Truncated multivariate Faber series with per-dimension degree caps (dense
// tensor storage) plus the certified error bound recorded at construction.
struct FaberSurrogate {
  FaberDomain domain;
  int total_degree = 0;          // N: multi-indices satisfy |n| <= N
  std::vector<int> caps;         // per-dimension caps (n_i <= caps[i])
  std::vector<double> centers;   // model coordinate x_i = centers[i] + scales[i] * z_i
  std::vector<double> scales;
  std::vector<double> coeffs;    // dense tensor, row-major over caps
  double error_cert = 0.0;

  size_t dims() const { return domain.dims(); }
  size_t tensor_size() const;
  double& at(std::span<const int> n);
  double coeff(std::span<const int> n) const;

  // Clenshaw evaluation at a model-coordinate point.
  double eval(std::span<const double> x) const;
  // Monomial-conversion + Horner path; only for small degrees (caps <= 30).
  double eval_horner(std::span<const double> x) const;

  std::string to_json() const;
  static FaberSurrogate from_json(const std::string& text);
};

// Prop.-style product approximation: coefficients by contour quadrature, cert
// = C(m) (R'/R)^N prod(ell_i / d_i) sup|f| with C(m) = 1 and sup measured on
// the radius-R boundary product.
FaberSurrogate approximate_on_product(const ProductFn& f, const FaberDomain& dom, int N,
                                      int quad_points = 0);

// Degree from the paper-shaped scaling [(1+max(|a|,|b|))(1+|I|)(1+T)]^2 with a
// pinned multiplier.
int surrogate_degree(const Interval& I, double T, double c_scale);

struct TransferSurrogateParams {
  int theta_degree = 64;       // N for the phase variable (the headline degree)
  int omega_degree = 2;        // 0 freezes the variable at omega0
  int energy_degree = 16;      // 0 freezes the variable at energy_center
  double omega_halfwidth = 0.02;  // physical omega interval half width (<= 1)
  double energy_radius = 6.0;     // Faber R for the entire energy direction
  double energy_center = 0.0;     // center of K_E (0 for the lemma's table)
  double strip_fraction = 0.9;    // fraction of strip_rho the ellipses may use
  double theta_im_share = 0.75;   // share of the Im budget given to theta
  double deviation_budget = 1.0;
  int cert_theta = 33, cert_omega = 5, cert_energy = 9;  // certification grid
  IntegratorConfig quad_cfg{1e-5, 1e-8, 1.0, 1.0};       // node-solve tolerance
};

// Polynomial surrogates for the four entries of M_I in (theta, omega, E),
// with P_I = sum of squared entries evaluated lazily. d = 1 potentials only
// (2d+1 variables is beyond desk scale otherwise).
struct TransferSurrogate {
  std::array<FaberSurrogate, 4> entries;  // u_a(b), v_a(b), u_a'(b), v_a'(b)
  double observed_deviation = 0.0;        // measured sup |log||M|| - 0.5 log P|
  double error_cert = 0.0;                // sum of entry certs
  // Construction metadata, used by the sublevel sandwich check.
  std::shared_ptr<const AnalyticPotential> potential;
  Interval interval;
  double omega_center = 0.0;
  double energy_center = 0.0;
  IntegratorConfig cfg;

  double eval_P(double theta, double omega, double E) const;
  double half_log_P(double theta, double omega, double E) const;
};

TransferSurrogate transfer_surrogate(const std::shared_ptr<const AnalyticPotential>& p,
                                     const Interval& I, double T, double omega0,
                                     std::pair<double, double> E_range,
                                     const TransferSurrogateParams& params,
                                     const IntegratorConfig& cfg);

struct SublevelReport {
  double measure = 0.0;  // sampled measure of S_I(H)
  long long samples = 0;
  long long in_S = 0;
  int sandwich_left_violations = 0;   // theta in B(H) but not in S(H)
  int sandwich_right_violations = 0;  // theta in S(H) but not in B(H/2)
  double c0 = 0.0;                    // the measured constant used
};

// Sampled theta-measure of S_I(H) = {theta : 0.5 log|P_I| <= |I| L_ref - H + C0}
// at the surrogate's (omega, E) center, with the empirical sandwich check
// B(H) subset S(H) subset B(H/2) on the same samples.
SublevelReport surrogate_sublevel_measure(const TransferSurrogate& s, double H, double L_ref,
                                          long long samples);

struct OrbitAverageReport {
  double difference = 0.0;    // |avg_n log||M_I(theta+n omega)|| - |I| L_I|
  double lyapunov_ref = 0.0;  // the finite_lyapunov value used
};

// Phase-shift averaging check; requires omega in DC_{|I|} per the given spec.
OrbitAverageReport orbit_average_check(const std::shared_ptr<const AnalyticPotential>& p,
                                       const Interval& I, std::span<const double> theta,
                                       std::span<const double> omega, double E, int N_shifts,
                                       const DiophantineSpec& dc_spec, const PhaseGrid& grid,
                                       const IntegratorConfig& cfg);

}  // namespace qplab
