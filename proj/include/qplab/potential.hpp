#pragma once

#include <complex>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "qplab/errors.hpp"
#include "qplab/util.hpp"

namespace qplab {

// One Fourier mode of V(t, x): index m along the time circle, k in Z^d along
// the phase torus. Ordering is lexicographic in (m, k) so that summation order
// is fixed and evaluation is bit-reproducible.
struct ModeIndex {
  int m = 0;
  std::vector<int> k;

  friend bool operator<(const ModeIndex& a, const ModeIndex& b) {
    if (a.m != b.m) return a.m < b.m;
    return a.k < b.k;
  }
  friend bool operator==(const ModeIndex& a, const ModeIndex& b) = default;
};

// Finite trigonometric polynomial V(t, x) = sum v(m,k) e^{2pi i (m t + k.x)}
// on T x T^d, together with the strip width rho on which its complex
// extension is treated as controlled. Immutable after construction; safe to
// share across workers.
class AnalyticPotential {
 public:
  // Builds from a coefficient map; enforces conjugate symmetry
  // v(-m,-k) = conj(v(m,k)) by symmetrizing (average of the given pair).
  AnalyticPotential(std::map<ModeIndex, std::complex<double>> coeffs, int dim_d,
                    double strip_rho);

  // Zero potential of dimension d.
  static AnalyticPotential zero(int dim_d = 1, double strip_rho = 0.5);

  // V(t, x) = K^2 (cos 2 pi t + cos 2 pi x), d = 1.
  static AnalyticPotential cosine_model(double K, double strip_rho = 1.0 / kTwoPi);

  double eval(double t, std::span<const double> x) const;
  std::complex<double> eval_complex(std::complex<double> t,
                                    std::span<const std::complex<double>> x) const;

  int dim_d() const { return dim_d_; }
  double strip_rho() const { return strip_rho_; }
  const std::map<ModeIndex, std::complex<double>>& coeffs() const { return coeffs_; }

  // sum |v(m,k)|
  double coefficient_mass() const { return mass_; }
  // sum |v(m,k)| e^{2 pi rho (|m| + |k|_1)}: sup bound on the strip H_rho^{d+1}
  double strip_sup_bound(double rho) const;
  double strip_sup_bound() const { return strip_sup_bound(strip_rho_); }

  // Stable content hash (coefficients, d, rho); used as cache key component.
  uint64_t content_hash() const;

  // Potential description file round-trip:
  //   {"d": int, "rho": float, "coeffs": [[m, [k...], re, im], ...]}
  std::string to_json() const;
  static AnalyticPotential from_json(const std::string& text);
  // Accepts a JSON file path or the preset "cosine:K".
  static AnalyticPotential load(const std::string& file_or_preset);

 private:
  struct Term {
    int m;
    std::vector<int> k;
    std::complex<double> amp;
  };

  std::map<ModeIndex, std::complex<double>> coeffs_;
  std::vector<Term> terms_;  // lexicographic, for fixed-order summation
  int dim_d_;
  double strip_rho_;
  double mass_ = 0.0;
};

}  // namespace qplab
