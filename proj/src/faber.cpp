#include "qplab/faber.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <json.hpp>

namespace qplab {

namespace {

int next_pow2(int n) {
  int q = 1;
  while (q < n) q *= 2;
  return q;
}

// In-place radix-2 DFT with kernel e^{-2 pi i jk / Q}; Q a power of two.
void fft(std::vector<std::complex<double>>& a) {
  size_t n = a.size();
  for (size_t i = 1, j = 0; i < n; ++i) {
    size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (size_t len = 2; len <= n; len <<= 1) {
    double ang = -kTwoPi / static_cast<double>(len);
    std::complex<double> wl(std::cos(ang), std::sin(ang));
    for (size_t i = 0; i < n; i += len) {
      std::complex<double> w(1.0);
      for (size_t j = 0; j < len / 2; ++j) {
        std::complex<double> u = a[i + j], v = a[i + j + len / 2] * w;
        a[i + j] = u + v;
        a[i + j + len / 2] = u - v;
        w *= wl;
      }
    }
  }
}

struct TensorShape {
  std::vector<int> caps;  // per-dim max degree

  size_t size() const {
    size_t s = 1;
    for (int c : caps) s *= static_cast<size_t>(c) + 1;
    return s;
  }
  size_t index(std::span<const int> n) const {
    size_t idx = 0;
    for (size_t i = 0; i < caps.size(); ++i) idx = idx * (caps[i] + 1) + n[i];
    return idx;
  }
};

using VecFn =
    std::function<void(std::span<const std::complex<double>>, std::span<std::complex<double>>)>;

// Iterated contour quadrature on the product of circles |w_i| = rho[i], with
// quads[i] nodes in dimension i (dimension 0 a power of two, handled by FFT).
// Model coordinates are centers[i] + scales[i] * psi_i(w_i). Returns one dense
// coefficient tensor (complex) per output of f.
std::vector<std::vector<std::complex<double>>> product_quadrature(
    const VecFn& f, const FaberDomain& dom, std::span<const double> centers,
    std::span<const double> scales, std::span<const double> rho, const TensorShape& shape,
    std::span<const int> quads, int n_out) {
  size_t m = dom.dims();
  std::vector<std::vector<std::complex<double>>> out(
      n_out, std::vector<std::complex<double>>(shape.size(), 0.0));

  // Twiddle tables for dims >= 1: tw[i][j][n] = e^{-2 pi i n j / Q_i} / (Q_i rho_i^n).
  std::vector<std::vector<std::vector<std::complex<double>>>> tw(m);
  for (size_t i = 1; i < m; ++i) {
    tw[i].assign(quads[i], std::vector<std::complex<double>>(shape.caps[i] + 1));
    for (int j = 0; j < quads[i]; ++j)
      for (int n = 0; n <= shape.caps[i]; ++n) {
        double ang = -kTwoPi * n * j / quads[i];
        tw[i][j][n] = std::complex<double>(std::cos(ang), std::sin(ang)) /
                      (quads[i] * std::pow(rho[i], n));
      }
  }

  int q0 = quads[0];
  std::vector<std::complex<double>> nodes0(q0);
  for (int j = 0; j < q0; ++j) {
    double ang = kTwoPi * j / q0;
    nodes0[j] = centers[0] + scales[0] * dom.inverse_map(
                                             0, rho[0] * std::complex<double>(std::cos(ang),
                                                                              std::sin(ang)));
  }

  std::vector<int> jrest(m > 1 ? m - 1 : 0, 0);
  std::vector<std::complex<double>> z(m), fval(n_out);
  std::vector<std::vector<std::complex<double>>> line(n_out,
                                                      std::vector<std::complex<double>>(q0));
  // Combined outer twiddle over dims >= 1 for the current j-rest, per
  // multi-index tail; rebuilt each line.
  size_t tail_size = shape.size() / (shape.caps[0] + 1);
  std::vector<std::complex<double>> outer(tail_size);

  bool done = false;
  while (!done) {
    for (size_t i = 1; i < m; ++i) {
      double ang = kTwoPi * jrest[i - 1] / quads[i];
      z[i] = centers[i] + scales[i] * dom.inverse_map(
                                          i, rho[i] * std::complex<double>(std::cos(ang),
                                                                           std::sin(ang)));
    }
    for (int j0 = 0; j0 < q0; ++j0) {
      z[0] = nodes0[j0];
      f(z, fval);
      for (int e = 0; e < n_out; ++e) line[e][j0] = fval[e];
    }
    // Outer twiddle tensor for this line.
    {
      std::vector<int> n_tail(m > 1 ? m - 1 : 0, 0);
      for (size_t t = 0; t < tail_size; ++t) {
        std::complex<double> w(1.0);
        for (size_t i = 1; i < m; ++i) w *= tw[i][jrest[i - 1]][n_tail[i - 1]];
        outer[t] = w;
        for (size_t i = m; i-- > 1;) {
          if (++n_tail[i - 1] <= shape.caps[i]) break;
          n_tail[i - 1] = 0;
        }
      }
    }
    for (int e = 0; e < n_out; ++e) {
      fft(line[e]);
      for (int n0 = 0; n0 <= shape.caps[0]; ++n0) {
        std::complex<double> c0 = line[e][n0] / (static_cast<double>(q0) * std::pow(rho[0], n0));
        std::complex<double>* dst = out[e].data() + static_cast<size_t>(n0) * tail_size;
        for (size_t t = 0; t < tail_size; ++t) dst[t] += c0 * outer[t];
      }
      // restore the line buffer for the next entry (fft was in-place)
    }
    if (m <= 1) break;
    size_t i = m - 1;
    while (true) {
      if (++jrest[i - 1] < quads[i]) break;
      jrest[i - 1] = 0;
      if (i == 1) {
        done = true;
        break;
      }
      --i;
    }
  }
  return out;
}

double sup_on_boundary(const ProductFn& f, const FaberDomain& dom, int scan_per_dim) {
  size_t m = dom.dims();
  std::vector<int> j(m, 0);
  std::vector<std::complex<double>> z(m);
  double sup = 0.0;
  while (true) {
    for (size_t i = 0; i < m; ++i) {
      double ang = kTwoPi * j[i] / scan_per_dim;
      z[i] = dom.inverse_map(i, dom.R * std::complex<double>(std::cos(ang), std::sin(ang)));
    }
    sup = std::max(sup, std::abs(f(z)));
    size_t i = m;
    while (i-- > 0) {
      if (++j[i] < scan_per_dim) break;
      j[i] = 0;
      if (i == 0) return sup;
    }
  }
}

long double clenshaw(std::span<const long double> beta, long double tau) {
  // sum_k beta_k T_k(tau) with beta_0 unhalved.
  long double b1 = 0.0L, b2 = 0.0L;
  for (size_t k = beta.size(); k-- > 1;) {
    long double bk = beta[k] + 2.0L * tau * b1 - b2;
    b2 = b1;
    b1 = bk;
  }
  return beta[0] + tau * b1 - b2;
}

}  // namespace

std::vector<double> faber_polynomial(double L, int n) {
  if (L <= 0) throw PreconditionError("faber_polynomial: L must be > 0");
  if (n < 0) throw PreconditionError("faber_polynomial: n must be >= 0");
  // Phi_0 = 1, Phi_1 = 2z/L, Phi_2 = (2z/L) Phi_1 - 2 Phi_0,
  // Phi_{k+1} = (2z/L) Phi_k - Phi_{k-1} for k >= 2.
  std::vector<double> prev = {1.0};
  if (n == 0) return prev;
  std::vector<double> cur = {0.0, 2.0 / L};
  for (int k = 1; k < n; ++k) {
    std::vector<double> next(k + 2, 0.0);
    for (int i = 0; i <= k; ++i) next[i + 1] = (2.0 / L) * cur[i];
    double wrap = (k == 1) ? 2.0 : 1.0;
    for (int i = 0; i < static_cast<int>(prev.size()); ++i) next[i] -= wrap * prev[i];
    prev = std::move(cur);
    cur = std::move(next);
  }
  return cur;
}

std::map<MultiIndex, double> faber_coefficients(const ProductFn& f, const FaberDomain& dom,
                                                int N, int quad_points) {
  dom.validate();
  if (N < 0) throw PreconditionError("faber_coefficients: N must be >= 0");
  if (quad_points == 0) quad_points = std::max(8, next_pow2(4 * std::max(1, N)));
  if (quad_points != next_pow2(quad_points) || quad_points < 4 * N || quad_points < 4)
    throw PreconditionError("faber_coefficients: quad_points must be a power of two >= 4N");

  size_t m = dom.dims();
  TensorShape shape{std::vector<int>(m, N)};
  std::vector<double> centers(m, 0.0), scales(m, 1.0), rho(m, dom.R_prime);

  auto run = [&](int q) {
    std::vector<int> quads(m, q);
    VecFn vf = [&](std::span<const std::complex<double>> z,
                   std::span<std::complex<double>> outv) { outv[0] = f(z); };
    return product_quadrature(vf, dom, centers, scales, rho, shape, quads, 1)[0];
  };
  auto coarse = run(quad_points);
  auto fine = run(2 * quad_points);

  double max_abs = 0.0;
  for (const auto& c : fine) max_abs = std::max(max_abs, std::abs(c));
  std::map<MultiIndex, double> result;
  std::vector<int> n(m, 0);
  for (size_t idx = 0; idx < shape.size(); ++idx) {
    int total = 0;
    for (int ni : n) total += ni;
    if (total <= N) {
      if (std::abs(std::abs(coarse[idx]) - std::abs(fine[idx])) > 1e-8 * std::max(max_abs, 1e-300))
        throw QuadratureUnresolved("faber_coefficients: doubling quad_points moved |a_n| at n=" +
                                   std::to_string(n[0]));
      result[n] = fine[idx].real();
    }
    for (size_t i = m; i-- > 0;) {
      if (++n[i] <= shape.caps[i]) break;
      n[i] = 0;
    }
  }
  return result;
}

size_t FaberSurrogate::tensor_size() const {
  size_t s = 1;
  for (int c : caps) s *= static_cast<size_t>(c) + 1;
  return s;
}

double& FaberSurrogate::at(std::span<const int> n) {
  size_t idx = 0;
  for (size_t i = 0; i < caps.size(); ++i) idx = idx * (caps[i] + 1) + n[i];
  return coeffs[idx];
}

double FaberSurrogate::coeff(std::span<const int> n) const {
  size_t idx = 0;
  for (size_t i = 0; i < caps.size(); ++i) {
    if (n[i] < 0 || n[i] > caps[i]) return 0.0;
    idx = idx * (caps[i] + 1) + n[i];
  }
  return coeffs[idx];
}

double FaberSurrogate::eval(std::span<const double> x) const {
  size_t m = dims();
  if (x.size() != m) throw PreconditionError("FaberSurrogate::eval: dimension mismatch");
  std::vector<long double> tau(m);
  for (size_t i = 0; i < m; ++i) {
    double z = (x[i] - centers[i]) / scales[i];
    tau[i] = static_cast<long double>(z / domain.half_lengths[i]);
  }
  // Reduce dimension by dimension from the innermost (contiguous) axis.
  std::vector<long double> work(coeffs.begin(), coeffs.end());
  size_t size = work.size();
  for (size_t i = m; i-- > 0;) {
    size_t width = static_cast<size_t>(caps[i]) + 1;
    size_t rows = size / width;
    std::vector<long double> beta(width);
    for (size_t r = 0; r < rows; ++r) {
      const long double* src = work.data() + r * width;
      beta[0] = src[0];
      for (size_t k = 1; k < width; ++k) beta[k] = 2.0L * src[k];  // Phi_k = 2 T_k, k >= 1
      work[r] = clenshaw(beta, tau[i]);
    }
    size = rows;
  }
  return static_cast<double>(work[0]);
}

double FaberSurrogate::eval_horner(std::span<const double> x) const {
  size_t m = dims();
  for (int c : caps)
    if (c > 30) throw PreconditionError("eval_horner: only available for caps <= 30");
  // Convert per-dimension to monomials in tau_i, then nested Horner.
  std::vector<std::vector<std::vector<double>>> cheb(m);  // cheb[i][k] = monomial coeffs of T_k
  for (size_t i = 0; i < m; ++i) {
    int c = caps[i];
    cheb[i].resize(c + 1);
    cheb[i][0] = {1.0};
    if (c >= 1) cheb[i][1] = {0.0, 1.0};
    for (int k = 2; k <= c; ++k) {
      std::vector<double> t(k + 1, 0.0);
      for (int j = 0; j <= k - 1; ++j) t[j + 1] += 2.0 * cheb[i][k - 1][j];
      for (int j = 0; j < static_cast<int>(cheb[i][k - 2].size()); ++j) t[j] -= cheb[i][k - 2][j];
      cheb[i][k] = std::move(t);
    }
  }
  // Transform axis by axis, honoring the row-major strides.
  std::vector<double> cur(coeffs.begin(), coeffs.end());
  size_t total = cur.size();
  for (size_t i = m; i-- > 0;) {
    size_t width = static_cast<size_t>(caps[i]) + 1;
    size_t stride = 1;
    for (size_t a = i + 1; a < m; ++a) stride *= static_cast<size_t>(caps[a]) + 1;
    std::vector<double> next(total, 0.0);
    for (size_t base = 0; base < total; base += width * stride)
      for (size_t off = 0; off < stride; ++off)
        for (size_t k = 0; k < width; ++k) {
          double a = cur[base + k * stride + off] * (k >= 1 ? 2.0 : 1.0);
          if (a == 0.0) continue;
          const auto& tk = cheb[i][k];
          for (size_t j = 0; j < tk.size(); ++j) next[base + j * stride + off] += a * tk[j];
        }
    cur = std::move(next);
  }
  const std::vector<double>& mono = cur;
  std::vector<double> tau(m);
  for (size_t i = 0; i < m; ++i)
    tau[i] = (x[i] - centers[i]) / scales[i] / domain.half_lengths[i];
  // Nested Horner, innermost axis first.
  std::function<double(const double*, size_t)> horner = [&](const double* data,
                                                            size_t dim) -> double {
    size_t width = static_cast<size_t>(caps[dim]) + 1;
    if (dim == m - 1) {
      double acc = 0.0;
      for (size_t k = width; k-- > 0;) acc = acc * tau[dim] + data[k];
      return acc;
    }
    size_t stride = 1;
    for (size_t i = dim + 1; i < m; ++i) stride *= static_cast<size_t>(caps[i]) + 1;
    double acc = 0.0;
    for (size_t k = width; k-- > 0;) acc = acc * tau[dim] + horner(data + k * stride, dim + 1);
    return acc;
  };
  return horner(mono.data(), 0);
}

std::string FaberSurrogate::to_json() const {
  nlohmann::json j;
  j["domain"] = {{"half_lengths", domain.half_lengths},
                 {"R", domain.R},
                 {"R_prime", domain.R_prime}};
  j["N"] = total_degree;
  j["caps"] = caps;
  j["centers"] = centers;
  j["scales"] = scales;
  j["error_cert"] = error_cert;
  auto arr = nlohmann::json::array();
  std::vector<int> n(caps.size(), 0);
  for (size_t idx = 0; idx < coeffs.size(); ++idx) {
    if (coeffs[idx] != 0.0) {
      nlohmann::json row = n;
      row.push_back(coeffs[idx]);
      arr.push_back(row);
    }
    for (size_t i = caps.size(); i-- > 0;) {
      if (++n[i] <= caps[i]) break;
      n[i] = 0;
    }
  }
  j["coeffs"] = arr;
  return j.dump();
}

FaberSurrogate FaberSurrogate::from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  FaberSurrogate s;
  s.domain.half_lengths = j.at("domain").at("half_lengths").get<std::vector<double>>();
  s.domain.R = j.at("domain").at("R").get<double>();
  s.domain.R_prime = j.at("domain").at("R_prime").get<double>();
  s.total_degree = j.at("N").get<int>();
  s.caps = j.at("caps").get<std::vector<int>>();
  s.centers = j.at("centers").get<std::vector<double>>();
  s.scales = j.at("scales").get<std::vector<double>>();
  s.error_cert = j.at("error_cert").get<double>();
  s.coeffs.assign(s.tensor_size(), 0.0);
  for (const auto& row : j.at("coeffs")) {
    std::vector<int> n(s.caps.size());
    for (size_t i = 0; i < n.size(); ++i) n[i] = row[i].get<int>();
    s.at(n) = row[n.size()].get<double>();
  }
  return s;
}

FaberSurrogate approximate_on_product(const ProductFn& f, const FaberDomain& dom, int N,
                                      int quad_points) {
  auto coeff_map = faber_coefficients(f, dom, N, quad_points);
  FaberSurrogate s;
  s.domain = dom;
  s.total_degree = N;
  s.caps.assign(dom.dims(), N);
  s.centers.assign(dom.dims(), 0.0);
  s.scales.assign(dom.dims(), 1.0);
  s.coeffs.assign(s.tensor_size(), 0.0);
  for (const auto& [n, v] : coeff_map) s.at(n) = v;

  int scan = dom.dims() >= 3 ? 24 : 64;
  double sup = sup_on_boundary(f, dom, scan);
  double quotient = 1.0;
  for (size_t i = 0; i < dom.dims(); ++i)
    quotient *= dom.boundary_length(i) / dom.boundary_distance(i);
  s.error_cert = std::pow(dom.R_prime / dom.R, N) * quotient * sup;  // C(m) = 1
  return s;
}

int surrogate_degree(const Interval& I, double T, double c_scale) {
  double base = (1.0 + I.max_endpoint()) * (1.0 + I.length()) * (1.0 + T);
  return static_cast<int>(std::ceil(c_scale * base * base));
}

double TransferSurrogate::eval_P(double theta, double omega, double E) const {
  double x[3] = {theta, omega, E};
  long double acc = 0.0L;
  for (const auto& e : entries) {
    long double v = e.eval(x);
    acc += v * v;
  }
  return static_cast<double>(acc);
}

double TransferSurrogate::half_log_P(double theta, double omega, double E) const {
  double P = eval_P(theta, omega, E);
  if (!(P > 0.0)) return -std::numeric_limits<double>::infinity();
  return 0.5 * std::log(P);
}

TransferSurrogate transfer_surrogate(const std::shared_ptr<const AnalyticPotential>& p,
                                     const Interval& I, double T, double omega0,
                                     std::pair<double, double> E_range,
                                     const TransferSurrogateParams& params,
                                     const IntegratorConfig& cfg) {
  if (p->dim_d() != 1)
    throw PreconditionError("transfer_surrogate: only d = 1 potentials are supported");
  if (T < 0) throw PreconditionError("transfer_surrogate: T must be >= 0");
  double L_theta = 1.0 + T;
  double e_center = params.energy_center;
  double L_E = std::max(std::abs(E_range.first - e_center), std::abs(E_range.second - e_center));
  if (L_E <= 0) L_E = 1e-9;  // point range: the variable is frozen at its center

  // Imaginary budget: theta and omega ellipses must keep theta + t omega
  // inside the potential strip for |t| <= max(|a|,|b|).
  double usable = params.strip_fraction * p->strip_rho();
  double im_theta = params.theta_im_share * usable;
  double im_omega = (1.0 - params.theta_im_share) * usable / std::max(1.0, I.max_endpoint());
  auto radius_for = [](double im, double L) {
    double s = im / L;
    return s + std::sqrt(s * s + 1.0);
  };
  double R_theta = radius_for(im_theta, L_theta);
  double R_omega = std::min(16.0, radius_for(im_omega / params.omega_halfwidth, 1.0));
  double R_E = params.energy_radius;

  TensorShape shape{{params.theta_degree, params.omega_degree, params.energy_degree}};
  auto quad_for = [](int cap) { return cap == 0 ? 1 : std::max(8, next_pow2(4 * cap)); };
  std::vector<int> quads = {std::max(8, next_pow2(4 * params.theta_degree)),
                            quad_for(params.omega_degree), quad_for(params.energy_degree)};
  std::vector<double> rho = {(1.0 + R_theta) / 2.0, (1.0 + R_omega) / 2.0, (1.0 + R_E) / 2.0};
  std::vector<double> centers = {0.0, omega0, e_center};
  std::vector<double> scales = {1.0, params.omega_halfwidth, 1.0};

  FaberDomain dom;
  dom.half_lengths = {L_theta, 1.0, L_E};
  dom.R = std::min({R_theta, R_omega, R_E});
  dom.R_prime = (1.0 + dom.R) / 2.0;
  dom.validate();

  VecFn nodes_fn = [&](std::span<const std::complex<double>> z,
                       std::span<std::complex<double>> outv) {
    std::vector<std::complex<double>> th = {z[0]};
    std::vector<std::complex<double>> om = {z[1]};
    ScaledMatrix2C M = transfer_matrix_complex(p, I, th, om, z[2], params.quad_cfg);
    double s = std::exp(M.log_scale);
    outv[0] = M.m00 * s;
    outv[1] = M.m01 * s;
    outv[2] = M.m10 * s;
    outv[3] = M.m11 * s;
  };
  auto tensors = product_quadrature(nodes_fn, dom, centers, scales, rho, shape, quads, 4);

  // sup |entries| on the radius-R boundary product (coarse scan) for the cert.
  double sup = 0.0;
  {
    std::vector<double> rr = {R_theta, R_omega, R_E};
    int sj[3] = {24, 6, 8};
    std::vector<std::complex<double>> z(3), fv(4);
    for (int j0 = 0; j0 < sj[0]; ++j0)
      for (int j1 = 0; j1 < sj[1]; ++j1)
        for (int j2 = 0; j2 < sj[2]; ++j2) {
          int jj[3] = {j0, j1, j2};
          for (int i = 0; i < 3; ++i) {
            double ang = kTwoPi * jj[i] / sj[i];
            z[i] = centers[i] +
                   scales[i] * dom.inverse_map(
                                   i, rr[i] * std::complex<double>(std::cos(ang), std::sin(ang)));
          }
          nodes_fn(z, fv);
          for (const auto& v : fv) sup = std::max(sup, std::abs(v));
        }
  }

  TransferSurrogate ts;
  ts.potential = p;
  ts.interval = I;
  ts.omega_center = omega0;
  ts.energy_center = 0.5 * (E_range.first + E_range.second);
  ts.cfg = cfg;
  double quotient = 1.0;
  for (size_t i = 0; i < 3; ++i)
    quotient *= dom.boundary_length(i) / dom.boundary_distance(i);
  for (int e = 0; e < 4; ++e) {
    FaberSurrogate& s = ts.entries[e];
    s.domain = dom;
    s.total_degree = params.theta_degree + params.omega_degree + params.energy_degree;
    s.caps = shape.caps;
    s.centers = centers;
    s.scales = scales;
    s.coeffs.resize(shape.size());
    for (size_t i = 0; i < shape.size(); ++i) s.coeffs[i] = tensors[e][i].real();
    s.error_cert = std::pow(dom.R_prime / dom.R, params.theta_degree) * quotient * sup;
    ts.error_cert += s.error_cert;
  }

  // A-posteriori certification by dense sampling of the real box.
  double worst = 0.0, worst_theta = 0, worst_omega = 0, worst_E = 0;
  for (int it = 0; it < params.cert_theta; ++it)
    for (int io = 0; io < params.cert_omega; ++io)
      for (int ie = 0; ie < params.cert_energy; ++ie) {
        double theta = -L_theta + 2.0 * L_theta * (it + 0.5) / params.cert_theta;
        double omega = omega0 - params.omega_halfwidth +
                       2.0 * params.omega_halfwidth * (io + 0.5) / params.cert_omega;
        double E = E_range.first +
                   (E_range.second - E_range.first) * (ie + 0.5) / std::max(1, params.cert_energy);
        std::vector<double> th = {frac(theta)};
        std::vector<double> om = {omega};
        double truth = log_norm(transfer_matrix(p, I, th, om, E, cfg));
        double hs = ts.half_log_P(theta, omega, E);
        double dev = std::abs(truth - hs);
        if (dev > worst) {
          worst = dev;
          worst_theta = theta;
          worst_omega = omega;
          worst_E = E;
        }
      }
  ts.observed_deviation = worst;
  if (worst > params.deviation_budget) {
    std::ostringstream msg;
    msg << "transfer_surrogate: sampled deviation " << worst << " exceeds budget "
        << params.deviation_budget << " at (theta,omega,E)=(" << worst_theta << ","
        << worst_omega << "," << worst_E << ")";
    throw SurrogateInaccurate(msg.str());
  }
  return ts;
}

SublevelReport surrogate_sublevel_measure(const TransferSurrogate& s, double H, double L_ref,
                                          long long samples) {
  if (samples < 1) throw PreconditionError("surrogate_sublevel_measure: samples must be >= 1");
  double lenL = s.interval.length() * L_ref;
  double c0 = s.observed_deviation;
  SublevelReport rep;
  rep.samples = samples;
  rep.c0 = c0;
  std::vector<double> om = {s.omega_center};
  for (long long i = 0; i < samples; ++i) {
    double theta = (i + 0.5) / static_cast<double>(samples);
    std::vector<double> th = {theta};
    double truth = log_norm(transfer_matrix(s.potential, s.interval, th, om, s.energy_center, s.cfg));
    double hlp = s.half_log_P(theta, s.omega_center, s.energy_center);
    bool in_B = truth <= lenL - H;
    bool in_S = hlp <= lenL - H + c0;
    bool in_B_half = truth <= lenL - H / 2.0;
    if (in_S) ++rep.in_S;
    if (in_B && !in_S) ++rep.sandwich_left_violations;
    if (in_S && !in_B_half) ++rep.sandwich_right_violations;
  }
  rep.measure = static_cast<double>(rep.in_S) / static_cast<double>(samples);
  return rep;
}

OrbitAverageReport orbit_average_check(const std::shared_ptr<const AnalyticPotential>& p,
                                       const Interval& I, std::span<const double> theta,
                                       std::span<const double> omega, double E, int N_shifts,
                                       const DiophantineSpec& dc_spec, const PhaseGrid& grid,
                                       const IntegratorConfig& cfg) {
  if (N_shifts < 1) throw PreconditionError("orbit_average_check: N_shifts must be >= 1");
  DcResult dc = dc_membership(omega, dc_spec, std::max(1.0, I.length()));
  if (!dc.ok)
    throw PreconditionError("orbit_average_check: omega fails the Diophantine condition DC_|I|");
  std::vector<double> none;
  LyapunovEstimate est = finite_lyapunov(p, I, omega, E, grid, none, cfg);
  std::vector<double> vals(N_shifts);
  for (int n = 1; n <= N_shifts; ++n) {
    std::vector<double> th(theta.size());
    for (size_t j = 0; j < theta.size(); ++j)
      th[j] = frac(std::fma(static_cast<double>(n), omega[j], theta[j]));
    vals[n - 1] = log_norm(transfer_matrix(p, I, th, omega, E, cfg));
  }
  OrbitAverageReport rep;
  rep.lyapunov_ref = est.value;
  rep.difference = std::abs(pairwise_mean(vals) - I.length() * est.value);
  return rep;
}

}  // namespace qplab
