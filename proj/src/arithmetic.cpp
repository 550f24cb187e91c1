#include "qplab/arithmetic.hpp"

#include <cmath>

namespace qplab {

namespace {

double dist_to_nearest_integer(double x) {
  double f = frac(x);
  return std::min(f, 1.0 - f);
}

}  // namespace

DcResult dc_membership(std::span<const double> omega, const DiophantineSpec& spec, double t) {
  spec.validate();
  if (t < 1.0) throw PreconditionError("dc_membership: t must be >= 1");
  int d = spec.d;
  if (static_cast<int>(omega.size()) != d)
    throw PreconditionError("dc_membership: omega dimension mismatch");
  int tmax = static_cast<int>(std::floor(t));
  double points = std::pow(2.0 * tmax + 1.0, d);
  if (points > 1e8) throw BudgetExceeded("dc_membership: lattice exceeds 1e8 points");

  DcResult res;
  res.margin = std::numeric_limits<double>::infinity();
  std::vector<int> k(d, -tmax);
  bool done = false;
  while (!done) {
    int sup = 0;
    for (int kj : k) sup = std::max(sup, std::abs(kj));
    if (sup > 0) {
      double dot = 0.0;
      for (int j = 0; j < d; ++j) dot += k[j] * omega[j];
      double q = dist_to_nearest_integer(dot) * std::pow(sup, spec.A) / spec.c;
      int worst_sup = 0;
      for (int kj : res.worst_k) worst_sup = std::max(worst_sup, std::abs(kj));
      if (q < res.margin || (q == res.margin && !res.worst_k.empty() && sup < worst_sup)) {
        res.margin = q;
        res.worst_k = k;
      }
    }
    // lexicographic advance
    int j = d - 1;
    while (j >= 0) {
      if (++k[j] <= tmax) break;
      k[j] = -tmax;
      --j;
    }
    done = (j < 0);
  }
  res.ok = res.margin >= 1.0;
  return res;
}

DiscrepancyResult discrepancy_count(std::span<const double> omega, long long N,
                                    std::span<const std::pair<double, double>> box) {
  if (N < 0) throw PreconditionError("discrepancy_count: N must be >= 0");
  if (box.size() != omega.size())
    throw PreconditionError("discrepancy_count: box dimension mismatch");
  double vol = 1.0;
  for (const auto& [a, b] : box) {
    if (!(a <= b && a >= 0.0 && b <= 1.0))
      throw PreconditionError("discrepancy_count: box sides must satisfy 0 <= a <= b <= 1");
    vol *= (b - a);
  }
  long long count = 0;
  for (long long n = 1; n <= N; ++n) {
    bool inside = true;
    for (size_t j = 0; j < omega.size(); ++j) {
      double x = frac(std::fma(static_cast<double>(n), omega[j], 0.0));
      const auto& [a, b] = box[j];
      if (!(x >= a && (x < b || (b == 1.0 && x < 1.0)))) {
        inside = false;
        break;
      }
    }
    if (inside) ++count;
  }
  return {count, std::abs(static_cast<double>(count) - static_cast<double>(N) * vol)};
}

OrbitCountReport orbit_hit_count(std::span<const double> omega, std::span<const double> theta0,
                                 long long N,
                                 const std::function<bool(std::span<const double>)>& membership,
                                 double delta) {
  if (theta0.size() != omega.size())
    throw PreconditionError("orbit_hit_count: theta0/omega dimension mismatch");
  long long hits = 0;
  std::vector<double> x(omega.size());
  for (long long n = 1; n <= N; ++n) {
    for (size_t j = 0; j < omega.size(); ++j)
      x[j] = frac(std::fma(static_cast<double>(n), omega[j], theta0[j]));
    if (membership(x)) ++hits;
  }
  OrbitCountReport rep;
  rep.N = N;
  rep.hits = hits;
  rep.bound_exponent = delta;
  rep.passes = static_cast<double>(hits) < std::pow(static_cast<double>(N), 1.0 - delta);
  return rep;
}

ResonanceScanReport resonance_scan(const std::shared_ptr<const AnalyticPotential>& p,
                                   const Interval& I, const Interval& J,
                                   std::span<const double> theta, std::span<const double> omega,
                                   std::span<const double> E_grid, long long n_min,
                                   long long n_max, double gamma, double sigma,
                                   const PhaseGrid& grid, const IntegratorConfig& cfg) {
  if (n_min < 1 || n_max < n_min)
    throw PreconditionError("resonance_scan: need 1 <= n_min <= n_max");
  ResonanceScanReport rep;
  std::vector<double> none;
  double thr_J_gap = std::pow(J.length(), 1.0 - sigma / 2.0);
  double thr_I_gap = std::pow(I.length(), 1.0 - sigma);
  for (double E : E_grid) {
    ++rep.energies_scanned;
    LyapunovEstimate lJ = finite_lyapunov(p, J, omega, E, grid, none, cfg);
    LyapunovEstimate lI = finite_lyapunov(p, I, omega, E, grid, none, cfg);
    if (lJ.value < gamma || lI.value < gamma) {
      ++rep.energies_below_gamma;
      continue;
    }
    double logJ = log_norm(transfer_matrix(p, J, theta, omega, E, cfg));
    double devJ = J.length() * lJ.value - logJ;
    if (devJ < thr_J_gap) continue;  // no deep J-resonance at this energy
    bool any = false;
    for (long long n = n_min; n <= n_max; ++n) {
      std::vector<double> th(theta.size());
      for (size_t j = 0; j < theta.size(); ++j)
        th[j] = frac(std::fma(static_cast<double>(n), omega[j], theta[j]));
      double logI = log_norm(transfer_matrix(p, I, th, omega, E, cfg));
      double devI = I.length() * lI.value - logI;
      if (devI >= thr_I_gap) {
        rep.hits.push_back({E, n, devJ, devI});
        any = true;
      }
    }
    if (any) ++rep.energies_with_hit;
  }
  rep.fraction_with_hit =
      rep.energies_scanned > 0
          ? static_cast<double>(rep.energies_with_hit) / rep.energies_scanned
          : 0.0;
  return rep;
}

}  // namespace qplab
