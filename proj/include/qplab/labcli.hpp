#pragma once

#include <map>
#include <string>
#include <vector>

#include "qplab/errors.hpp"

namespace qplab {

// One experiment's outcome: named scalar results plus artifact file paths,
// bound to the exact inputs through the canonical config hash.
struct ReportRecord {
  std::string experiment;
  std::string timestamp;
  std::string config_hash;
  std::map<std::string, double> results;
  std::vector<std::string> artifacts;

  std::string to_json() const;
  static ReportRecord from_json(const std::string& text);
};

// Canonical content hash of a config (key-sorted JSON dump, FNV-1a), as hex.
std::string config_hash_hex(const std::string& config_json_text);

// Parses, validates, dispatches, persists. Identical configs are served from
// the cache (env QPLAB_CACHE, else <outdir>/.cache), which makes reruns
// byte-identical including the original timestamp.
ReportRecord run_experiment(const std::string& config_json_text);

// Renders a CSV into a static SVG. kind: "profile" (t, log_abs_y with fitted
// slope overlay), "trend" (n or interval_len vs value), "ldt" (interval_len
// vs ldt_measure). Throws MissingColumn when the CSV lacks a declared column.
std::string emit_plot(const std::string& csv_path, const std::string& kind);

}  // namespace qplab
