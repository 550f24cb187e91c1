#include "qplab/labcli.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "qplab/arithmetic.hpp"
#include "qplab/faber.hpp"
#include "qplab/green.hpp"
#include "qplab/lyapunov.hpp"
#include "qplab/potential.hpp"
#include "qplab/transfer.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace qplab {

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// Field access that names the offending field on failure.
template <class T>
T get_field(const json& j, const std::string& key) {
  if (!j.contains(key)) throw ConfigError("config: missing field '" + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError("config: field '" + key + "' has the wrong type");
  }
}

template <class T>
T get_or(const json& j, const std::string& key, T def) {
  if (!j.contains(key)) return def;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError("config: field '" + key + "' has the wrong type");
  }
}

std::shared_ptr<const AnalyticPotential> load_potential(const json& j) {
  if (!j.contains("potential")) throw ConfigError("config: missing field 'potential'");
  const auto& p = j.at("potential");
  if (p.is_string()) {
    std::string s = p.get<std::string>();
    auto pot = std::make_shared<AnalyticPotential>(AnalyticPotential::load(s));
    if (j.contains("strip_rho")) {
      // rebuild with the override
      auto base = AnalyticPotential::load(s);
      return std::make_shared<AnalyticPotential>(base.coeffs(), base.dim_d(),
                                                 get_field<double>(j, "strip_rho"));
    }
    return pot;
  }
  if (p.is_object()) return std::make_shared<AnalyticPotential>(AnalyticPotential::from_json(p.dump()));
  throw ConfigError("config: field 'potential' must be a preset string, path, or object");
}

IntegratorConfig load_tol(const json& j) {
  IntegratorConfig cfg;
  if (j.contains("tol")) {
    const auto& t = j.at("tol");
    cfg.rel_tol = get_or<double>(t, "rel_tol", cfg.rel_tol);
    cfg.abs_tol = get_or<double>(t, "abs_tol", cfg.abs_tol);
    cfg.renorm_interval = get_or<double>(t, "renorm_interval", cfg.renorm_interval);
    cfg.max_step = get_or<double>(t, "max_step", cfg.max_step);
  }
  cfg.validate();
  return cfg;
}

PhaseGrid load_grid(const json& j, int dim) {
  PhaseGrid g;
  g.dim = dim;
  if (j.contains("grid")) {
    const auto& gj = j.at("grid");
    g.points_per_dim = get_or<int>(gj, "points_per_dim", 32);
    g.offset = get_or<std::vector<double>>(gj, "offset", {});
  }
  g.validate();
  return g;
}

std::vector<Interval> load_intervals(const json& j) {
  std::vector<Interval> out;
  if (!j.contains("intervals")) throw ConfigError("config: missing field 'intervals'");
  for (const auto& e : j.at("intervals")) {
    if (e.is_number()) {
      out.emplace_back(0.0, e.get<double>());
    } else if (e.is_array() && e.size() == 2) {
      out.emplace_back(e[0].get<double>(), e[1].get<double>());
    } else {
      throw ConfigError("config: field 'intervals' entries must be lengths or [a,b] pairs");
    }
  }
  if (out.empty()) throw ConfigError("config: field 'intervals' is empty");
  return out;
}

struct CsvWriter {
  std::ostringstream out;
  explicit CsvWriter(const std::vector<std::string>& cols) {
    for (size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i];
    out << "\n";
  }
  void row(const std::vector<double>& vals) {
    for (size_t i = 0; i < vals.size(); ++i) {
      if (i) out << ",";
      if (!std::isnan(vals[i])) out << fmt(vals[i]);
    }
    out << "\n";
  }
};

void write_file_atomic(const fs::path& path, const std::string& content) {
  fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary);
    f << content;
  }
  fs::rename(tmp, path);
}

std::string iso_timestamp_now() {
  auto now = std::chrono::system_clock::now();
  std::time_t t = std::chrono::system_clock::to_time_t(now);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  return buf;
}

// The shared CSV layout for the Lyapunov experiment family.
const std::vector<std::string> kLyapunovCols = {"interval_len", "grid_points", "eta",
                                                "value",        "spread",      "sup_dev",
                                                "ldt_measure"};

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

}  // namespace

std::string ReportRecord::to_json() const {
  json j;
  j["experiment"] = experiment;
  j["timestamp"] = timestamp;
  j["config_hash"] = config_hash;
  j["results"] = results;
  j["artifacts"] = artifacts;
  return j.dump(2);
}

ReportRecord ReportRecord::from_json(const std::string& text) {
  json j = json::parse(text);
  ReportRecord r;
  r.experiment = get_field<std::string>(j, "experiment");
  r.timestamp = get_field<std::string>(j, "timestamp");
  r.config_hash = get_field<std::string>(j, "config_hash");
  r.results = get_field<std::map<std::string, double>>(j, "results");
  r.artifacts = get_field<std::vector<std::string>>(j, "artifacts");
  return r;
}

std::string config_hash_hex(const std::string& config_json_text) {
  json j;
  try {
    j = json::parse(config_json_text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: invalid JSON: ") + e.what());
  }
  uint64_t h = fnv1a64(j.dump());  // nlohmann objects iterate key-sorted
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

ReportRecord run_experiment(const std::string& config_json_text) {
  json j;
  try {
    j = json::parse(config_json_text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: invalid JSON: ") + e.what());
  }
  std::string experiment = get_field<std::string>(j, "experiment");
  std::string outdir = get_or<std::string>(j, "outdir", "qplab_out");
  std::string hash = config_hash_hex(config_json_text);

  const char* cache_env = std::getenv("QPLAB_CACHE");
  fs::path cache_dir = cache_env ? fs::path(cache_env) : fs::path(outdir) / ".cache";
  fs::path cache_file = cache_dir / (hash + ".json");
  if (fs::exists(cache_file)) {
    std::ifstream in(cache_file);
    std::stringstream ss;
    ss << in.rdbuf();
    return ReportRecord::from_json(ss.str());
  }

  ReportRecord rec;
  rec.experiment = experiment;
  rec.config_hash = hash;
  rec.timestamp = iso_timestamp_now();

  auto artifact = [&](const std::string& name, const std::string& content) {
    fs::path path = fs::path(outdir) / (experiment + "_" + hash.substr(0, 8) + "_" + name);
    write_file_atomic(path, content);
    rec.artifacts.push_back(path.string());
    return path.string();
  };

  IntegratorConfig cfg = load_tol(j);

  if (experiment == "transfer") {
    auto p = load_potential(j);
    auto ivs = load_intervals(j);
    auto theta = get_field<std::vector<double>>(j, "theta");
    auto omega = get_field<std::vector<double>>(j, "omega");
    double E = get_field<double>(j, "energy");
    ScaledMatrix2 M = transfer_matrix(p, ivs[0], theta, omega, E, cfg);
    json out;
    out["matrix"] = {{M.m00, M.m01}, {M.m10, M.m11}};
    out["log_scale"] = M.log_scale;
    out["log_norm"] = log_norm(M);
    out["det_drift"] = M.log_det_drift();
    artifact("matrix.json", out.dump(2));
    rec.results["log_norm"] = log_norm(M);
    rec.results["det_drift"] = M.log_det_drift();
  } else if (experiment == "lyapunov") {
    auto p = load_potential(j);
    auto ivs = load_intervals(j);
    auto omega = get_field<std::vector<double>>(j, "omega");
    double E = get_field<double>(j, "energy");
    auto eta = get_or<std::vector<double>>(j, "eta", {});
    PhaseGrid grid = load_grid(j, p->dim_d());
    CsvWriter csv(kLyapunovCols);
    double last = 0, last_spread = 0;
    for (const auto& I : ivs) {
      LyapunovEstimate est = finite_lyapunov(p, I, omega, E, grid, eta, cfg);
      csv.row({I.length(), static_cast<double>(grid.total_points()), sup_norm(eta), est.value,
               est.spread, kNaN, kNaN});
      last = est.value;
      last_spread = est.spread;
    }
    artifact("lyapunov.csv", csv.out.str());
    rec.results["value"] = last;
    rec.results["spread"] = last_spread;
  } else if (experiment == "ldt") {
    auto p = load_potential(j);
    auto ivs = load_intervals(j);
    auto omega = get_field<std::vector<double>>(j, "omega");
    double E = get_field<double>(j, "energy");
    LdtParams params;
    if (j.contains("ldt")) {
      const auto& l = j.at("ldt");
      params.epsilon = get_or<double>(l, "epsilon", params.epsilon);
      params.sigma = get_or<double>(l, "sigma", params.sigma);
      params.sample_count = get_or<int>(l, "samples", params.sample_count);
      params.seed = get_or<uint64_t>(l, "seed", params.seed);
    }
    CsvWriter csv(kLyapunovCols);
    double last = 0;
    for (const auto& I : ivs) {
      double m = ldt_deviation_measure(p, I, omega, E, params, cfg);
      csv.row({I.length(), static_cast<double>(params.sample_count), 0.0, kNaN, kNaN, kNaN, m});
      last = m;
    }
    artifact("ldt.csv", csv.out.str());
    rec.results["ldt_measure"] = last;
  } else if (experiment == "ap") {
    auto p = load_potential(j);
    auto ivs = load_intervals(j);
    auto omega = get_field<std::vector<double>>(j, "omega");
    double E = get_field<double>(j, "energy");
    double block_len = get_field<double>(j, "block_len");
    PhaseGrid grid = load_grid(j, p->dim_d());
    CsvWriter csv({"interval_len", "grid_points", "ap_value", "direct_value", "difference"});
    for (const auto& I : ivs) {
      ApMultiscaleResult ap = ap_multiscale_lyapunov(p, I, omega, E, block_len, grid, cfg);
      LyapunovEstimate direct = finite_lyapunov(p, I, omega, E, grid, {}, cfg);
      csv.row({I.length(), static_cast<double>(grid.total_points()), ap.value, direct.value,
               std::abs(ap.value - direct.value)});
      rec.results["ap_value"] = ap.value;
      rec.results["direct_value"] = direct.value;
      rec.results["difference"] = std::abs(ap.value - direct.value);
    }
    artifact("ap.csv", csv.out.str());
  } else if (experiment == "green") {
    auto p = load_potential(j);
    auto ivs = load_intervals(j);
    auto theta = get_field<std::vector<double>>(j, "theta");
    auto omega = get_field<std::vector<double>>(j, "omega");
    double E = get_field<double>(j, "energy");
    const Interval& I = ivs[0];
    GreenFunction g = build_green(p, I, theta, omega, E, cfg);
    rec.results["wronskian_drift"] = g.wronskian_identity_drift();
    Interval sup_I(I.a - 1.0, I.b + 1.0);
    TransferSolution y = integrate_transfer(p, sup_I, theta, omega, E, cfg);
    rec.results["poisson_residual"] =
        poisson_identity_check(p, I, theta, omega, E, y, 1.0, 0.0, cfg);
    if (j.contains("k_budget")) {
      double K = get_field<double>(j, "k_budget");
      double gamma = get_or<double>(j, "gamma", 0.1);
      PhaseGrid grid = load_grid(j, p->dim_d());
      LyapunovEstimate L = finite_lyapunov(p, I, omega, E, grid, {}, cfg);
      DecayWindow w = decay_window_search(p, I, theta, omega, E, L.value, K, gamma, cfg);
      rec.results["window_case"] = w.case_id;
      rec.results["window_len"] = w.J.length();
      rec.results["worst_margin"] = w.worst_margin;
    }
  } else if (experiment == "localize") {
    auto p = load_potential(j);
    auto ivs = load_intervals(j);
    auto theta = get_field<std::vector<double>>(j, "theta");
    auto omega = get_field<std::vector<double>>(j, "omega");
    auto bracket = get_field<std::vector<double>>(j, "bracket");
    if (bracket.size() != 2) throw ConfigError("config: field 'bracket' must be [E1,E2]");
    LocalizationResult loc = localize_eigenfunction(p, ivs[0], theta, omega,
                                                    {bracket[0], bracket[1]}, cfg);
    CsvWriter csv({"t", "log_abs_y"});
    for (const auto& [t, ly] : loc.profile) csv.row({t, ly});
    std::string csv_path = artifact("profile.csv", csv.out.str());
    json slope;
    slope["E_star"] = loc.E_star;
    slope["decay_rate"] = loc.decay_rate;
    slope["argmax_t"] = loc.argmax_t;
    artifact("slope.json", slope.dump(2));
    rec.results["E_star"] = loc.E_star;
    rec.results["decay_rate"] = loc.decay_rate;
    if (get_or<bool>(j, "emit_svg", false)) rec.artifacts.push_back(emit_plot(csv_path, "profile"));
  } else if (experiment == "faber") {
    auto p = load_potential(j);
    auto ivs = load_intervals(j);
    double T = get_or<double>(j, "T", 1.0);
    double omega0 = get_field<std::vector<double>>(j, "omega")[0];
    auto ew = get_field<std::vector<double>>(j, "energy_window");
    if (ew.size() != 2) throw ConfigError("config: field 'energy_window' must be [E1,E2]");
    TransferSurrogateParams params;
    params.theta_degree = get_or<int>(j, "theta_degree",
                                      surrogate_degree(ivs[0], T, get_or<double>(j, "c_scale", 0.16)));
    params.omega_degree = get_or<int>(j, "omega_degree", params.omega_degree);
    params.energy_degree = get_or<int>(j, "energy_degree", params.energy_degree);
    params.omega_halfwidth = get_or<double>(j, "omega_halfwidth", params.omega_halfwidth);
    params.deviation_budget = get_or<double>(j, "deviation_budget", params.deviation_budget);
    TransferSurrogate s = transfer_surrogate(p, ivs[0], T, omega0, {ew[0], ew[1]}, params, cfg);
    json sj;
    for (int e = 0; e < 4; ++e) sj["entries"].push_back(json::parse(s.entries[e].to_json()));
    sj["observed_deviation"] = s.observed_deviation;
    sj["error_cert"] = s.error_cert;
    sj["omega_center"] = s.omega_center;
    sj["energy_center"] = s.energy_center;
    sj["interval"] = {s.interval.a, s.interval.b};
    sj["potential"] = json::parse(p->to_json());
    artifact("surrogate.json", sj.dump());
    rec.results["observed_deviation"] = s.observed_deviation;
    rec.results["error_cert"] = s.error_cert;
    rec.results["theta_degree"] = params.theta_degree;
  } else if (experiment == "dc") {
    auto omega = get_field<std::vector<double>>(j, "omega");
    DiophantineSpec spec;
    spec.c = get_or<double>(j, "c", spec.c);
    spec.A = get_or<double>(j, "A", spec.A);
    spec.d = static_cast<int>(omega.size());
    double t = get_field<double>(j, "t");
    DcResult r = dc_membership(omega, spec, t);
    rec.results["ok"] = r.ok ? 1.0 : 0.0;
    rec.results["margin"] = r.margin;
    for (size_t i = 0; i < r.worst_k.size(); ++i)
      rec.results["worst_k_" + std::to_string(i)] = r.worst_k[i];
  } else if (experiment == "discrepancy") {
    auto omega = get_field<std::vector<double>>(j, "omega");
    long long N = get_field<long long>(j, "N");
    auto box_j = get_field<std::vector<std::vector<double>>>(j, "box");
    std::vector<std::pair<double, double>> box;
    for (const auto& b : box_j) {
      if (b.size() != 2) throw ConfigError("config: field 'box' entries must be [a,b]");
      box.emplace_back(b[0], b[1]);
    }
    DiscrepancyResult r = discrepancy_count(omega, N, box);
    rec.results["count"] = static_cast<double>(r.count);
    rec.results["error"] = r.error;
  } else if (experiment == "orbitcount") {
    auto omega = get_field<std::vector<double>>(j, "omega");
    auto theta0 = get_field<std::vector<double>>(j, "theta");
    long long N = get_field<long long>(j, "N");
    double delta = get_or<double>(j, "delta", 0.1);
    const auto& mem = j.at("membership");
    std::function<bool(std::span<const double>)> membership;
    std::string type = get_field<std::string>(mem, "type");
    if (type == "box") {
      auto box_j = get_field<std::vector<std::vector<double>>>(mem, "box");
      membership = [box_j](std::span<const double> x) {
        for (size_t i = 0; i < box_j.size(); ++i)
          if (!(x[i] >= box_j[i][0] && x[i] < box_j[i][1])) return false;
        return true;
      };
    } else if (type == "sublevel") {
      std::ifstream in(get_field<std::string>(mem, "surrogate"));
      if (!in) throw ConfigError("config: membership surrogate file not found");
      std::stringstream ss;
      ss << in.rdbuf();
      json sj = json::parse(ss.str());
      auto entries = std::make_shared<std::array<FaberSurrogate, 4>>();
      for (int e = 0; e < 4; ++e)
        (*entries)[e] = FaberSurrogate::from_json(sj.at("entries")[e].dump());
      double oc = sj.at("omega_center").get<double>();
      double ec = sj.at("energy_center").get<double>();
      double threshold = get_field<double>(mem, "threshold");
      membership = [entries, oc, ec, threshold](std::span<const double> x) {
        long double acc = 0.0L;
        double pt[3] = {x[0], oc, ec};
        for (const auto& s : *entries) {
          long double v = s.eval(pt);
          acc += v * v;
        }
        double hlp = acc > 0 ? 0.5 * std::log(static_cast<double>(acc))
                             : -std::numeric_limits<double>::infinity();
        return hlp <= threshold;
      };
    } else {
      throw ConfigError("config: membership 'type' must be 'box' or 'sublevel'");
    }
    OrbitCountReport r = orbit_hit_count(omega, theta0, N, membership, delta);
    rec.results["hits"] = static_cast<double>(r.hits);
    rec.results["passes"] = r.passes ? 1.0 : 0.0;
  } else if (experiment == "resonance-scan") {
    auto p = load_potential(j);
    auto ivs = load_intervals(j);
    if (ivs.size() < 2)
      throw ConfigError("config: field 'intervals' must list [I, J] for resonance-scan");
    auto theta = get_field<std::vector<double>>(j, "theta");
    auto omega = get_field<std::vector<double>>(j, "omega");
    auto ew = get_field<std::vector<double>>(j, "energy_window");
    int n_energies = get_or<int>(j, "n_energies", 16);
    std::vector<double> E_grid(n_energies);
    for (int i = 0; i < n_energies; ++i)
      E_grid[i] = ew[0] + (ew[1] - ew[0]) * (i + 0.5) / n_energies;
    long long n_min = get_or<long long>(j, "n_min", 1);
    long long n_max = get_or<long long>(j, "n_max", 100);
    double gamma = get_or<double>(j, "gamma", 0.1);
    double sigma = get_or<double>(j, "sigma", 0.25);
    PhaseGrid grid = load_grid(j, p->dim_d());
    ResonanceScanReport r = resonance_scan(p, ivs[0], ivs[1], theta, omega, E_grid, n_min,
                                           n_max, gamma, sigma, grid, cfg);
    CsvWriter csv({"energy", "n", "dev_J", "dev_I"});
    for (const auto& h : r.hits) csv.row({h.energy, static_cast<double>(h.n), h.dev_J, h.dev_I});
    artifact("resonances.csv", csv.out.str());
    rec.results["fraction_with_hit"] = r.fraction_with_hit;
    rec.results["energies_scanned"] = r.energies_scanned;
    rec.results["double_resonances"] = static_cast<double>(r.hits.size());
    rec.results["note_demonstration_only"] = 1.0;
  } else {
    throw ConfigError("config: unknown experiment '" + experiment + "'");
  }

  write_file_atomic(cache_file, rec.to_json());
  return rec;
}

namespace {

struct Csv {
  std::vector<std::string> cols;
  std::vector<std::vector<double>> rows;
};

Csv parse_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw MissingColumn("emit_plot: cannot open CSV " + path);
  Csv csv;
  std::string line;
  if (!std::getline(in, line)) throw MissingColumn("emit_plot: empty CSV " + path);
  std::stringstream hs(line);
  std::string cell;
  while (std::getline(hs, cell, ',')) csv.cols.push_back(cell);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ls(line);
    while (std::getline(ls, cell, ','))
      row.push_back(cell.empty() ? std::numeric_limits<double>::quiet_NaN() : std::stod(cell));
    row.resize(csv.cols.size(), std::numeric_limits<double>::quiet_NaN());
    csv.rows.push_back(row);
  }
  return csv;
}

size_t find_col(const Csv& csv, const std::string& name) {
  for (size_t i = 0; i < csv.cols.size(); ++i)
    if (csv.cols[i] == name) return i;
  throw MissingColumn("emit_plot: CSV lacks column '" + name + "'");
}

}  // namespace

std::string emit_plot(const std::string& csv_path, const std::string& kind) {
  Csv csv = parse_csv(csv_path);
  std::string xcol, ycol;
  if (kind == "profile") {
    xcol = "t";
    ycol = "log_abs_y";
  } else if (kind == "trend") {
    xcol = csv.cols.size() > 0 && csv.cols[0] == "n" ? "n" : "interval_len";
    ycol = "value";
  } else if (kind == "ldt") {
    xcol = "interval_len";
    ycol = "ldt_measure";
  } else {
    throw PreconditionError("emit_plot: unknown kind '" + kind + "'");
  }
  size_t xi = find_col(csv, xcol), yi = find_col(csv, ycol);
  std::vector<std::pair<double, double>> pts;
  for (const auto& r : csv.rows)
    if (!std::isnan(r[xi]) && !std::isnan(r[yi])) pts.emplace_back(r[xi], r[yi]);
  if (pts.empty()) throw MissingColumn("emit_plot: no data rows for columns " + xcol + "," + ycol);

  double xmin = pts[0].first, xmax = pts[0].first, ymin = pts[0].second, ymax = pts[0].second;
  for (const auto& [x, y] : pts) {
    xmin = std::min(xmin, x);
    xmax = std::max(xmax, x);
    ymin = std::min(ymin, y);
    ymax = std::max(ymax, y);
  }
  if (xmax == xmin) xmax = xmin + 1;
  if (ymax == ymin) ymax = ymin + 1;
  const double W = 640, H = 480, m = 60;
  auto X = [&](double x) { return m + (x - xmin) / (xmax - xmin) * (W - 2 * m); };
  auto Y = [&](double y) { return H - m - (y - ymin) / (ymax - ymin) * (H - 2 * m); };

  std::ostringstream svg;
  svg << "<svg xmlns='http://www.w3.org/2000/svg' width='" << W << "' height='" << H
      << "' viewBox='0 0 " << W << " " << H << "'>\n";
  svg << "<rect width='100%' height='100%' fill='white'/>\n";
  svg << "<line x1='" << m << "' y1='" << H - m << "' x2='" << W - m << "' y2='" << H - m
      << "' stroke='black'/>\n";
  svg << "<line x1='" << m << "' y1='" << m << "' x2='" << m << "' y2='" << H - m
      << "' stroke='black'/>\n";
  svg << "<text x='" << W / 2 << "' y='" << H - 20 << "' font-size='12' text-anchor='middle'>"
      << xcol << "</text>\n";
  svg << "<text x='15' y='" << H / 2 << "' font-size='12' transform='rotate(-90 15 " << H / 2
      << ")' text-anchor='middle'>" << ycol << "</text>\n";
  svg << "<text x='" << m << "' y='" << H - m + 15 << "' font-size='10'>" << fmt(xmin)
      << "</text>\n<text x='" << W - m << "' y='" << H - m + 15
      << "' font-size='10' text-anchor='end'>" << fmt(xmax) << "</text>\n";
  svg << "<text x='" << m - 5 << "' y='" << H - m << "' font-size='10' text-anchor='end'>"
      << fmt(ymin) << "</text>\n<text x='" << m - 5 << "' y='" << m
      << "' font-size='10' text-anchor='end'>" << fmt(ymax) << "</text>\n";
  svg << "<polyline fill='none' stroke='steelblue' stroke-width='1.5' points='";
  for (const auto& [x, y] : pts) svg << X(x) << "," << Y(y) << " ";
  svg << "'/>\n";

  if (kind == "profile") {
    // Fitted-slope overlay: wedge from the peak with the least-squares rate.
    double peak_x = pts[0].first, peak_y = pts[0].second;
    for (const auto& [x, y] : pts)
      if (y > peak_y) {
        peak_y = y;
        peak_x = x;
      }
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int n = 0;
    for (const auto& [x, y] : pts) {
      if (y < peak_y - 30.0) continue;
      double u = std::abs(x - peak_x);
      sx += u;
      sy += y;
      sxx += u * u;
      sxy += u * y;
      ++n;
    }
    double denom = n * sxx - sx * sx;
    double slope = (n >= 2 && denom > 0) ? (n * sxy - sx * sy) / denom : 0.0;
    auto clipy = [&](double y) { return std::max(ymin, y); };
    svg << "<polyline fill='none' stroke='crimson' stroke-dasharray='6 3' points='"
        << X(xmin) << "," << Y(clipy(peak_y + slope * (peak_x - xmin))) << " " << X(peak_x)
        << "," << Y(peak_y) << " " << X(xmax) << ","
        << Y(clipy(peak_y + slope * (xmax - peak_x))) << "'/>\n";
  }
  svg << "</svg>\n";

  std::string out_path = csv_path.substr(0, csv_path.find_last_of('.')) + "_" + kind + ".svg";
  write_file_atomic(out_path, svg.str());
  return out_path;
}

}  // namespace qplab
