#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace apfb {

// Configuration or schema problem; the CLI maps this to exit code 2.
struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Numerical failure (non-convergence, step underflow, ...): exit code 3.
struct SolverError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Shortest decimal with 17 significant digits (round-trips a double).
std::string format_g17(double x);

// Write via temp file + rename so readers never observe partial output.
void write_file_atomic(const std::string& path, const std::string& content);

std::uint64_t fnv1a64(const std::string& bytes);
std::string file_digest_hex(const std::string& path);

// One experiment = one config. Unknown keys are rejected so a typo cannot
// silently fall back to a default.
struct RunConfig {
  int schema_version = 1;
  std::string command;
  std::optional<double> gamma;  // exactly one of gamma/alpha may be given
  std::optional<double> alpha;
  int n = 3;
  double h = 1.0 / 128.0;
  double tol = 1e-8;
  double tau_max = 1.0;
  double z_min = -1.0;
  double z_max = 1.0;
  double r0 = 1.0;
  double r_max = 5.0;
  double length = 1.0;          // 1D profile extent
  std::vector<double> ladder;   // epsilon ladder; empty = default
  int probes = 50;
  double h0_lo = 1e-2;
  double h0_hi = 10.0;
  int h0_count = 200;
  double theta = 0.0;
  std::uint64_t seed = 0;       // 0 = use APFB_SEED or built-in default
  int threads = 1;
  std::string out = "out";
};

RunConfig load_config(const std::string& path);
RunConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const RunConfig& cfg);

// Resolved gamma for a config (from gamma or alpha; gamma=0 default).
double config_gamma(const RunConfig& cfg);

// Effective seed: explicit config value, else APFB_SEED, else a constant.
std::uint64_t resolve_seed(std::uint64_t config_seed);

// Collects output files for one run and emits run_manifest.json listing
// every file with its digest.
class OutputWriter {
 public:
  explicit OutputWriter(std::string dir);
  void add(const std::string& name, const std::string& content);
  // returns the manifest path
  std::string finish(const RunConfig& cfg, double wall_seconds);

 private:
  std::string dir_;
  std::vector<std::pair<std::string, std::string>> files_;  // name, digest
};

}  // namespace apfb
