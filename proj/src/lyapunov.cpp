#include "qplab/lyapunov.hpp"

#include <algorithm>
#include <cmath>

namespace qplab {

namespace {

constexpr int kPrimes[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29};

double radical_inverse(uint64_t i, int base) {
  double inv = 1.0 / base, f = inv, x = 0.0;
  while (i > 0) {
    x += f * static_cast<double>(i % base);
    i /= base;
    f *= inv;
  }
  return x;
}

uint64_t splitmix64(uint64_t z) {
  z += 0x9e3779b97f4a7c15ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

// log||M_I(theta + i eta)|| at one phase, choosing the real or complex path.
double log_norm_at(const std::shared_ptr<const AnalyticPotential>& p, const Interval& I,
                   std::span<const double> theta, std::span<const double> omega, double E,
                   std::span<const double> eta, const IntegratorConfig& cfg) {
  bool complex_path = false;
  for (double e : eta)
    if (e != 0.0) complex_path = true;
  if (!complex_path) return log_norm(transfer_matrix(p, I, theta, omega, E, cfg));
  std::vector<std::complex<double>> th(theta.size()), om(omega.size());
  for (size_t j = 0; j < theta.size(); ++j)
    th[j] = std::complex<double>(theta[j], j < eta.size() ? eta[j] : 0.0);
  for (size_t j = 0; j < omega.size(); ++j) om[j] = omega[j];
  return log_norm(transfer_matrix_complex(p, I, th, om, std::complex<double>(E, 0.0), cfg));
}

double grid_average_log_norm(const std::shared_ptr<const AnalyticPotential>& p,
                             const Interval& I, std::span<const double> omega, double E,
                             const PhaseGrid& grid, std::span<const double> eta,
                             const IntegratorConfig& cfg) {
  int n = grid.total_points();
  std::vector<double> vals(n);
  for (int i = 0; i < n; ++i) {
    std::vector<double> theta = grid.point(i);
    vals[i] = log_norm_at(p, I, theta, omega, E, eta, cfg);
  }
  return pairwise_mean(vals);
}

void check_eta(const AnalyticPotential& p, std::span<const double> eta) {
  if (sup_norm(eta) > p.strip_rho() / 2.0 + 1e-15)
    throw DomainError("finite_lyapunov: ||eta|| exceeds strip_rho / 2");
}

}  // namespace

std::vector<double> PhaseGrid::point(int index) const {
  std::vector<double> x(dim);
  int rem = index;
  for (int j = dim - 1; j >= 0; --j) {
    int digit = rem % points_per_dim;
    rem /= points_per_dim;
    double off = offset.empty() ? 0.0 : offset[j];
    x[j] = frac(off + static_cast<double>(digit) / points_per_dim);
  }
  return x;
}

std::vector<double> halton_point(int index, int dim, uint64_t seed) {
  std::vector<double> x(dim);
  for (int j = 0; j < dim; ++j) {
    double shift = 0.0;
    if (seed != 0) {
      uint64_t h = splitmix64(seed * 1000003ull + static_cast<uint64_t>(j));
      shift = static_cast<double>(h >> 11) * 0x1.0p-53;
    }
    x[j] = frac(radical_inverse(static_cast<uint64_t>(index), kPrimes[j % 10]) + shift);
  }
  return x;
}

LyapunovEstimate finite_lyapunov(const std::shared_ptr<const AnalyticPotential>& p,
                                 const Interval& I, std::span<const double> omega, double E,
                                 const PhaseGrid& grid, std::span<const double> eta,
                                 const IntegratorConfig& cfg) {
  grid.validate();
  check_eta(*p, eta);
  double len = I.length();
  double full = grid_average_log_norm(p, I, omega, E, grid, eta, cfg) / len;
  double spread = 0.0;
  if (grid.points_per_dim >= 2) {
    double half = grid_average_log_norm(p, I, omega, E, grid.halved(), eta, cfg) / len;
    spread = 0.5 * std::abs(full - half);
  }
  LyapunovEstimate est;
  est.value = full;
  est.interval = I;
  est.grid = grid;
  est.eta.assign(eta.begin(), eta.end());
  est.spread = spread;
  return est;
}

SubadditivityTable subadditivity_table(const std::shared_ptr<const AnalyticPotential>& p,
                                       std::span<const double> omega, double E, int n_max,
                                       const PhaseGrid& grid, const IntegratorConfig& cfg) {
  if (n_max < 2) throw PreconditionError("subadditivity_table: n_max must be >= 2");
  SubadditivityTable table;
  std::vector<double> none;
  for (int n = 1; n <= n_max; ++n) {
    LyapunovEstimate est = finite_lyapunov(p, Interval(0.0, n), omega, E, grid, none, cfg);
    table.rows.push_back({n, est.value, est.spread});
  }
  for (int m = 1; m < n_max; ++m) {
    for (int n = m; m + n <= n_max; ++n) {
      const auto& rm = table.rows[m - 1];
      const auto& rn = table.rows[n - 1];
      const auto& rmn = table.rows[m + n - 1];
      // The spread proxy vanishes for phase-independent systems; floor it at
      // the integrator tolerance so the slack reflects all error sources.
      double proxy = std::max({rm.spread, rn.spread, rmn.spread, 10.0 * cfg.rel_tol});
      double slack = 2.0 * (m + n) * proxy;
      double viol = (m + n) * rmn.value - m * rm.value - n * rn.value - slack;
      table.max_violation = std::max(table.max_violation, viol);
    }
  }
  table.ok = table.max_violation <= 0.0;
  return table;
}

BridgeReport continuous_discrete_bridge(const std::shared_ptr<const AnalyticPotential>& p,
                                        const Interval& I, std::span<const double> omega,
                                        double E, const PhaseGrid& grid,
                                        const IntegratorConfig& cfg) {
  if (I.length() < 2.0) throw PreconditionError("continuous_discrete_bridge: |I| must be >= 2");
  int n = static_cast<int>(std::llround(I.length()));
  std::vector<double> none;
  LyapunovEstimate li = finite_lyapunov(p, I, omega, E, grid, none, cfg);
  LyapunovEstimate ln =
      (I.a == 0.0 && I.b == static_cast<double>(n))
          ? li
          : finite_lyapunov(p, Interval(0.0, n), omega, E, grid, none, cfg);
  BridgeReport rep;
  rep.n = n;
  rep.difference = std::abs(li.value - ln.value);
  // Gronwall stand-in over the hull of both intervals at the mean phase 0.
  Interval hull(std::min(I.a, 0.0), std::max(I.b, static_cast<double>(n)));
  std::vector<double> zero(omega.size(), 0.0);
  double c_num = sup_coefficient_norm(*p, hull, zero, omega, E);
  rep.bound = c_num * (std::abs(n - I.length()) + 2.0) / I.length();
  return rep;
}

ApReport avalanche_check(std::span<const ScaledMatrix2> mats, double mu) {
  int n = static_cast<int>(mats.size());
  if (n < 2) throw PreconditionError("avalanche_check: need at least 2 matrices");
  ApReport rep;
  rep.n = n;
  rep.mu = mu;

  double min_norm_log = std::numeric_limits<double>::infinity();
  for (const auto& m : mats) min_norm_log = std::min(min_norm_log, log_norm(m));
  rep.hypothesis_min_ok = (min_norm_log >= std::log(mu)) && (mu > n);

  double max_gap = -std::numeric_limits<double>::infinity();
  std::vector<double> pair_logs(n - 1);
  std::vector<double> single_logs(n);
  for (int j = 0; j < n; ++j) single_logs[j] = log_norm(mats[j]);
  for (int j = 0; j + 1 < n; ++j) {
    pair_logs[j] = log_norm(compose(mats[j + 1], mats[j]));
    max_gap = std::max(max_gap, single_logs[j + 1] + single_logs[j] - pair_logs[j]);
  }
  rep.hypothesis_gap_ok = max_gap < 0.5 * std::log(mu);

  ScaledMatrix2 prod = mats[0];
  for (int j = 1; j < n; ++j) prod = compose(mats[j], prod);
  double full = log_norm(prod);
  double mids = 0.0;
  for (int j = 1; j + 1 < n; ++j) mids += single_logs[j];
  double pairs = pairwise_sum(pair_logs);
  rep.residual = std::abs(full + mids - pairs);
  rep.bound = n / mu;
  return rep;
}

ApMultiscaleResult ap_multiscale_lyapunov(const std::shared_ptr<const AnalyticPotential>& p,
                                          const Interval& I, std::span<const double> omega,
                                          double E, double block_len, const PhaseGrid& grid,
                                          const IntegratorConfig& cfg) {
  if (block_len < 1.0) throw PreconditionError("ap_multiscale_lyapunov: block_len must be >= 1");
  if (I.length() / block_len < 3.0)
    throw PreconditionError("ap_multiscale_lyapunov: need at least 3 blocks");
  grid.validate();
  int n_blocks = static_cast<int>(std::llround(I.length() / block_len));
  double ell = I.length() / n_blocks;

  int n_phases = grid.total_points();
  std::vector<double> vals(n_phases);
  int fails = 0;
  for (int i = 0; i < n_phases; ++i) {
    std::vector<double> theta = grid.point(i);
    std::vector<ScaledMatrix2> blocks(n_blocks);
    for (int bi = 0; bi < n_blocks; ++bi) {
      Interval J(I.a + bi * ell, I.a + (bi + 1) * ell);
      blocks[bi] = transfer_matrix(p, J, theta, omega, E, cfg);
    }
    // AP hypotheses with the tightest admissible mu = min_j ||A_j||.
    double min_log = std::numeric_limits<double>::infinity();
    for (const auto& m : blocks) min_log = std::min(min_log, log_norm(m));
    double mu = std::exp(min_log);
    double sum_pairs = 0.0, sum_mids = 0.0, max_gap = -1e300;
    for (int j = 0; j + 1 < n_blocks; ++j) {
      double pl = log_norm(compose(blocks[j + 1], blocks[j]));
      sum_pairs += pl;
      max_gap = std::max(max_gap, log_norm(blocks[j + 1]) + log_norm(blocks[j]) - pl);
    }
    for (int j = 1; j + 1 < n_blocks; ++j) sum_mids += log_norm(blocks[j]);
    if (!(mu > n_blocks) || !(max_gap < 0.5 * min_log)) ++fails;
    vals[i] = (sum_pairs - sum_mids) / I.length();
  }
  double fail_fraction = static_cast<double>(fails) / n_phases;
  if (fail_fraction > 0.10)
    throw ApHypothesisFailure("ap_multiscale_lyapunov: AP hypotheses failed for " +
                              std::to_string(100.0 * fail_fraction) + "% of phases");
  return {pairwise_mean(vals), fail_fraction};
}

double ldt_deviation_measure(const std::shared_ptr<const AnalyticPotential>& p,
                             const Interval& I, std::span<const double> omega, double E,
                             const LdtParams& params, const IntegratorConfig& cfg) {
  params.validate();
  int n = params.sample_count;
  std::vector<double> logs(n);
  for (int i = 0; i < n; ++i) {
    std::vector<double> theta = halton_point(i + 1, p->dim_d(), params.seed);
    logs[i] = log_norm(transfer_matrix(p, I, theta, omega, E, cfg));
  }
  double mean = pairwise_mean(logs);  // |I| L_I on the same sample set
  double threshold = params.epsilon * std::pow(I.length(), 1.0 - params.sigma);
  int deviant = 0;
  for (double v : logs)
    if (std::abs(v - mean) >= threshold) ++deviant;
  return static_cast<double>(deviant) / n;
}

UniformUpperReport uniform_upper_check(const std::shared_ptr<const AnalyticPotential>& p,
                                       const Interval& I, std::span<const double> omega,
                                       double E, const PhaseGrid& grid, double gamma_floor,
                                       double c_fit, double sigma, const IntegratorConfig& cfg) {
  grid.validate();
  std::vector<double> none;
  LyapunovEstimate est = finite_lyapunov(p, I, omega, E, grid, none, cfg);
  if (est.value < gamma_floor)
    throw PositivityError("uniform_upper_check: estimate " + std::to_string(est.value) +
                          " below gamma floor " + std::to_string(gamma_floor));
  int n = grid.total_points();
  double sup_dev = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i) {
    std::vector<double> theta = grid.point(i);
    double v = log_norm(transfer_matrix(p, I, theta, omega, E, cfg));
    sup_dev = std::max(sup_dev, v - I.length() * est.value);
  }
  UniformUpperReport rep;
  rep.sup_dev = sup_dev;
  rep.bound = c_fit * std::pow(I.length(), 1.0 - sigma);
  rep.ok = sup_dev <= rep.bound;
  return rep;
}

double eta_lipschitz_check(const std::shared_ptr<const AnalyticPotential>& p, const Interval& I,
                           std::span<const double> omega, double E,
                           std::span<const std::vector<double>> eta_list, const PhaseGrid& grid,
                           const IntegratorConfig& cfg) {
  if (eta_list.size() < 2)
    throw PreconditionError("eta_lipschitz_check: need at least two eta points");
  double worst = 0.0;
  std::vector<LyapunovEstimate> ests;
  for (const auto& eta : eta_list)
    ests.push_back(finite_lyapunov(p, I, omega, E, grid, eta, cfg));
  for (size_t i = 0; i + 1 < eta_list.size(); ++i) {
    std::vector<double> diff(eta_list[i].size());
    for (size_t j = 0; j < diff.size(); ++j) diff[j] = eta_list[i + 1][j] - eta_list[i][j];
    double dist = sup_norm(diff);
    if (dist == 0.0)
      throw PreconditionError("eta_lipschitz_check: consecutive eta points must be distinct");
    worst = std::max(worst, std::abs(ests[i + 1].value - ests[i].value) / dist);
  }
  return worst;
}

StabilityRoughReport stability_rough_check(const std::shared_ptr<const AnalyticPotential>& p,
                                           const Interval& I, const ParamPoint& base,
                                           const ParamPoint& perturbed,
                                           const IntegratorConfig& cfg) {
  auto to_c = [](std::span<const double> v) {
    return std::vector<std::complex<double>>(v.begin(), v.end());
  };
  auto th1 = to_c(base.theta), om1 = to_c(base.omega);
  auto th2 = to_c(perturbed.theta), om2 = to_c(perturbed.omega);
  double l1 = log_norm(transfer_matrix_complex(p, I, th1, om1, base.energy, cfg));
  double l2 = log_norm(transfer_matrix_complex(p, I, th2, om2, perturbed.energy, cfg));

  std::vector<double> dth(base.theta.size()), dom(base.omega.size());
  for (size_t j = 0; j < dth.size(); ++j) dth[j] = perturbed.theta[j] - base.theta[j];
  for (size_t j = 0; j < dom.size(); ++j) dom[j] = perturbed.omega[j] - base.omega[j];
  double pert = sup_norm(dth) + I.max_endpoint() * sup_norm(dom) +
                std::abs(perturbed.energy - base.energy);

  double c_num = sup_coefficient_norm(*p, I, base.theta, base.omega, base.energy.real());
  double max_log_norm = std::max(l1, l2);
  // rhs = e^{C_num |I|} * pert / max ||M_I||, in log space to avoid overflow.
  double log_rhs = c_num * I.length() + (pert > 0 ? std::log(pert) : -1e300) - max_log_norm;
  StabilityRoughReport rep;
  rep.lhs = std::abs(l1 - l2);
  rep.rhs = log_rhs > 700.0 ? std::numeric_limits<double>::infinity() : std::exp(log_rhs);
  rep.conclusive = rep.rhs < 0.1;
  rep.ok = rep.lhs <= rep.rhs;
  return rep;
}

}  // namespace qplab
