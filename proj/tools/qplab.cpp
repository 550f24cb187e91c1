#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "qplab/labcli.hpp"
#include "qplab/suite.hpp"

using nlohmann::json;

namespace {

int run_config(const json& cfg, bool print_artifacts) {
  qplab::ReportRecord rec = qplab::run_experiment(cfg.dump());
  std::cout << rec.to_json() << "\n";
  if (print_artifacts) {
    for (const auto& a : rec.artifacts) {
      std::ifstream in(a);
      if (in && a.size() > 5 && a.substr(a.size() - 5) == ".json") {
        std::stringstream ss;
        ss << in.rdbuf();
        std::cout << ss.str() << "\n";
      }
    }
  }
  return 0;
}

json base_config(const std::string& experiment, const std::string& config_file) {
  json cfg;
  if (!config_file.empty()) {
    std::ifstream in(config_file);
    if (!in) throw qplab::ConfigError("config file not found: " + config_file);
    std::stringstream ss;
    ss << in.rdbuf();
    cfg = json::parse(ss.str(), nullptr, false);
    if (cfg.is_discarded()) throw qplab::ConfigError("config file is not valid JSON");
  }
  cfg["experiment"] = experiment;
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"qplab: a numerical laboratory for quasiperiodic Schrodinger cocycles"};
  app.require_subcommand(1);

  // Shared flag storage; each subcommand wires only the flags it uses.
  std::string config_file, potential = "cosine:2", interval_str, outdir;
  std::vector<double> theta{0.0}, omega{0.61803398874989484820}, eta;
  double energy = 0.0, rel_tol = 1e-10, shift_n = 0;
  std::vector<double> energy_window{-1.0, 1.0};
  int grid_points = 32;

  auto add_common = [&](CLI::App* sub, bool needs_energy = true) {
    sub->add_option("--config", config_file, "JSON config file (flags override)");
    sub->add_option("--potential", potential, "preset 'cosine:K' or JSON file path");
    sub->add_option("--interval", interval_str, "interval as 'a,b' or length");
    sub->add_option("--theta", theta, "phase vector");
    sub->add_option("--omega", omega, "frequency vector");
    if (needs_energy) sub->add_option("--energy", energy, "spectral parameter E");
    sub->add_option("--rel-tol", rel_tol, "integrator relative tolerance");
    sub->add_option("--grid-points", grid_points, "phase-grid points per dimension");
    sub->add_option("--outdir", outdir, "output directory");
  };

  std::map<std::string, CLI::App*> subs;
  for (const char* name : {"transfer", "lyapunov", "ldt", "ap", "green", "localize", "faber",
                           "dc", "discrepancy", "orbitcount", "resonance-scan"})
    subs[name] = app.add_subcommand(name, std::string("run the ") + name + " experiment");
  for (auto& [name, sub] : subs) add_common(sub);
  subs["transfer"]->add_option("--shift-n", shift_n, "integer shift for the covariance check");
  subs["lyapunov"]->add_option("--eta", eta, "imaginary phase shift");
  subs["localize"]->add_option("--bracket", energy_window, "energy bracket [E1,E2]");
  subs["faber"]->add_option("--energy-window", energy_window, "energy window [E1,E2]");
  subs["resonance-scan"]->add_option("--energy-window", energy_window, "energy window [E1,E2]");

  auto* suite = app.add_subcommand("suite", "run the acceptance criteria");
  std::vector<int> only;
  suite->add_option("--only", only, "criterion ids to run (default: all)");

  auto* plot = app.add_subcommand("plot", "render a CSV artifact to SVG");
  std::string csv_path, kind = "trend";
  plot->add_option("csv", csv_path, "CSV file")->required();
  plot->add_option("--kind", kind, "profile | trend | ldt");

  CLI11_PARSE(app, argc, argv);

  try {
    if (suite->parsed()) {
      auto results = qplab::run_acceptance(only, std::cout);
      bool all_pass = !results.empty();
      for (const auto& r : results) all_pass = all_pass && r.pass;
      return all_pass ? 0 : 1;
    }
    if (plot->parsed()) {
      std::cout << qplab::emit_plot(csv_path, kind) << "\n";
      return 0;
    }
    for (auto& [name, sub] : subs) {
      if (!sub->parsed()) continue;
      json cfg = base_config(name, config_file);
      if (sub->count("--potential") || !cfg.contains("potential")) cfg["potential"] = potential;
      if (!interval_str.empty()) {
        auto comma = interval_str.find(',');
        if (comma == std::string::npos) {
          cfg["intervals"] = {std::stod(interval_str)};
        } else {
          cfg["intervals"] = {
              {std::stod(interval_str.substr(0, comma)), std::stod(interval_str.substr(comma + 1))}};
        }
      }
      if (sub->count("--theta") || !cfg.contains("theta")) cfg["theta"] = theta;
      if (sub->count("--omega") || !cfg.contains("omega")) cfg["omega"] = omega;
      if (sub->count("--energy") || !cfg.contains("energy")) cfg["energy"] = energy;
      if (sub->count("--eta")) cfg["eta"] = eta;
      if (sub->count("--rel-tol")) cfg["tol"]["rel_tol"] = rel_tol;
      if (sub->count("--grid-points")) cfg["grid"]["points_per_dim"] = grid_points;
      if (sub->count("--outdir")) cfg["outdir"] = outdir;
      if (name == "localize" && sub->count("--bracket")) cfg["bracket"] = energy_window;
      if ((name == "faber" || name == "resonance-scan") && sub->count("--energy-window"))
        cfg["energy_window"] = energy_window;
      if (name == "transfer" && sub->count("--shift-n")) cfg["shift_n"] = shift_n;
      if (!cfg.contains("intervals")) cfg["intervals"] = {{0.0, 10.0}};
      return run_config(cfg, name == "transfer");
    }
  } catch (const qplab::ConfigError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const qplab::PreconditionError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const qplab::Error& e) {
    std::cerr << "failure: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
