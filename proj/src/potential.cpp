#include "qplab/potential.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace qplab {

AnalyticPotential::AnalyticPotential(std::map<ModeIndex, std::complex<double>> coeffs,
                                     int dim_d, double strip_rho)
    : dim_d_(dim_d), strip_rho_(strip_rho) {
  if (dim_d < 1) throw PreconditionError("potential: dim_d must be >= 1");
  if (strip_rho <= 0.0) throw PreconditionError("potential: strip_rho must be > 0");
  for (const auto& [idx, amp] : coeffs) {
    if (static_cast<int>(idx.k.size()) != dim_d)
      throw PreconditionError("potential: mode k has wrong dimension");
  }
  // Symmetrize so V is real on real arguments: v(-m,-k) = conj(v(m,k)).
  for (const auto& [idx, amp] : coeffs) {
    ModeIndex neg{-idx.m, idx.k};
    for (auto& kk : neg.k) kk = -kk;
    auto it = coeffs.find(neg);
    std::complex<double> mirror = (it != coeffs.end()) ? it->second : std::complex<double>(0.0);
    std::complex<double> sym = 0.5 * (amp + std::conj(mirror));
    coeffs_[idx] = sym;
    coeffs_[neg] = std::conj(sym);
  }
  for (const auto& [idx, amp] : coeffs_) {
    if (std::abs(amp) == 0.0) continue;
    terms_.push_back(Term{idx.m, idx.k, amp});
    mass_ += std::abs(amp);
  }
}

AnalyticPotential AnalyticPotential::zero(int dim_d, double strip_rho) {
  return AnalyticPotential({}, dim_d, strip_rho);
}

AnalyticPotential AnalyticPotential::cosine_model(double K, double strip_rho) {
  if (K <= 0.0) throw PreconditionError("cosine_model: K must be > 0");
  double a = K * K / 2.0;
  std::map<ModeIndex, std::complex<double>> c;
  c[ModeIndex{1, {0}}] = a;
  c[ModeIndex{-1, {0}}] = a;
  c[ModeIndex{0, {1}}] = a;
  c[ModeIndex{0, {-1}}] = a;
  return AnalyticPotential(std::move(c), 1, strip_rho);
}

double AnalyticPotential::eval(double t, std::span<const double> x) const {
  if (static_cast<int>(x.size()) != dim_d_)
    throw PreconditionError("potential eval: phase has wrong dimension");
  // Reduce to [0,1) first; the reduction is exact, which makes
  // eval(t+1, x) == eval(t, x) bitwise whenever t+1 is exactly representable.
  double tr = frac(t);
  std::vector<double> xr = frac(x);
  std::complex<double> acc = 0.0;
  for (const Term& term : terms_) {
    double arg = term.m * tr;
    for (int j = 0; j < dim_d_; ++j) arg += term.k[j] * xr[j];
    double phi = kTwoPi * frac(arg);
    acc += term.amp * std::complex<double>(std::cos(phi), std::sin(phi));
  }
  return acc.real();
}

std::complex<double> AnalyticPotential::eval_complex(
    std::complex<double> t, std::span<const std::complex<double>> x) const {
  if (static_cast<int>(x.size()) != dim_d_)
    throw PreconditionError("potential eval_complex: phase has wrong dimension");
  if (std::abs(t.imag()) > strip_rho_ * (1.0 + 1e-12))
    throw DomainError("eval_complex: |Im t| exceeds strip_rho");
  for (const auto& xi : x)
    if (std::abs(xi.imag()) > strip_rho_ * (1.0 + 1e-12))
      throw DomainError("eval_complex: |Im x| exceeds strip_rho");
  double tr = frac(t.real());
  std::vector<double> xr(x.size());
  for (size_t j = 0; j < x.size(); ++j) xr[j] = frac(x[j].real());
  std::complex<double> acc = 0.0;
  for (const Term& term : terms_) {
    double re = term.m * tr;
    double im = term.m * t.imag();
    for (int j = 0; j < dim_d_; ++j) {
      re += term.k[j] * xr[j];
      im += term.k[j] * x[j].imag();
    }
    // e^{2 pi i (re + i im)} = e^{-2 pi im} (cos 2 pi re + i sin 2 pi re)
    double phi = kTwoPi * frac(re);
    double damp = std::exp(-kTwoPi * im);
    acc += term.amp * std::complex<double>(std::cos(phi) * damp, std::sin(phi) * damp);
  }
  return acc;
}

double AnalyticPotential::strip_sup_bound(double rho) const {
  double s = 0.0;
  for (const Term& term : terms_) {
    int k1 = std::abs(term.m);
    for (int kj : term.k) k1 += std::abs(kj);
    s += std::abs(term.amp) * std::exp(kTwoPi * rho * k1);
  }
  return s;
}

uint64_t AnalyticPotential::content_hash() const { return fnv1a64(to_json()); }

std::string AnalyticPotential::to_json() const {
  nlohmann::json j;
  j["d"] = dim_d_;
  j["rho"] = strip_rho_;
  auto arr = nlohmann::json::array();
  for (const auto& [idx, amp] : coeffs_) {
    if (std::abs(amp) == 0.0) continue;
    arr.push_back({idx.m, idx.k, amp.real(), amp.imag()});
  }
  j["coeffs"] = arr;
  return j.dump();
}

AnalyticPotential AnalyticPotential::from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  if (!j.contains("d")) throw ConfigError("potential file: missing field 'd'");
  if (!j.contains("rho")) throw ConfigError("potential file: missing field 'rho'");
  if (!j.contains("coeffs")) throw ConfigError("potential file: missing field 'coeffs'");
  std::map<ModeIndex, std::complex<double>> c;
  for (const auto& e : j["coeffs"]) {
    if (!e.is_array() || e.size() != 4)
      throw ConfigError("potential file: coeffs entries must be [m,[k...],re,im]");
    ModeIndex idx{e[0].get<int>(), e[1].get<std::vector<int>>()};
    c[idx] = std::complex<double>(e[2].get<double>(), e[3].get<double>());
  }
  return AnalyticPotential(std::move(c), j["d"].get<int>(), j["rho"].get<double>());
}

AnalyticPotential AnalyticPotential::load(const std::string& file_or_preset) {
  if (file_or_preset.rfind("cosine:", 0) == 0) {
    std::string rest = file_or_preset.substr(7);
    double K = std::stod(rest);
    return cosine_model(K);
  }
  std::ifstream in(file_or_preset);
  if (!in) throw ConfigError("potential file not found: " + file_or_preset);
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json(ss.str());
}

}  // namespace qplab
