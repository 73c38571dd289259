#include "apfb/io.hpp"

#include <cinttypes>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

namespace fs = std::filesystem;
using nlohmann::json;

namespace apfb {

std::string format_g17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void write_file_atomic(const std::string& path, const std::string& content) {
  const fs::path target(path);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  const fs::path tmp = target.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << content;
  }
  fs::rename(tmp, target);
}

std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t hash = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    hash ^= c;
    hash *= 0x100000001b3ull;
  }
  return hash;
}

std::string file_digest_hex(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  char buf[24];
  std::snprintf(buf, sizeof buf, "fnv1a64:%016" PRIx64, fnv1a64(ss.str()));
  return buf;
}

namespace {

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys{
      "schema_version", "command", "gamma",  "alpha",    "n",
      "h",              "tol",     "tau_max", "z_min",   "z_max",
      "r0",             "r_max",   "length",  "ladder",  "probes",
      "h0_lo",          "h0_hi",   "h0_count", "theta",  "seed",
      "threads",        "out"};
  return keys;
}

}  // namespace

RunConfig config_from_json(const json& j) {
  if (!j.is_object()) throw ValidationError("config: expected a JSON object");
  std::string unknown;
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!known_keys().count(it.key()))
      unknown += (unknown.empty() ? "" : ", ") + it.key();
  if (!unknown.empty())
    throw ValidationError("config: unknown key(s): " + unknown);

  RunConfig cfg;
  if (j.contains("schema_version")) cfg.schema_version = j["schema_version"];
  if (cfg.schema_version != 1)
    throw ValidationError("config: unsupported schema_version");
  if (j.contains("command")) cfg.command = j["command"];
  if (j.contains("gamma")) cfg.gamma = j["gamma"].get<double>();
  if (j.contains("alpha")) cfg.alpha = j["alpha"].get<double>();
  if (cfg.gamma && cfg.alpha)
    throw ValidationError("config: gamma and alpha are mutually exclusive");
  if (j.contains("n")) cfg.n = j["n"];
  if (j.contains("h")) cfg.h = j["h"];
  if (j.contains("tol")) cfg.tol = j["tol"];
  if (j.contains("tau_max")) cfg.tau_max = j["tau_max"];
  if (j.contains("z_min")) cfg.z_min = j["z_min"];
  if (j.contains("z_max")) cfg.z_max = j["z_max"];
  if (j.contains("r0")) cfg.r0 = j["r0"];
  if (j.contains("r_max")) cfg.r_max = j["r_max"];
  if (j.contains("length")) cfg.length = j["length"];
  if (j.contains("ladder")) cfg.ladder = j["ladder"].get<std::vector<double>>();
  if (j.contains("probes")) cfg.probes = j["probes"];
  if (j.contains("h0_lo")) cfg.h0_lo = j["h0_lo"];
  if (j.contains("h0_hi")) cfg.h0_hi = j["h0_hi"];
  if (j.contains("h0_count")) cfg.h0_count = j["h0_count"];
  if (j.contains("theta")) cfg.theta = j["theta"];
  if (j.contains("seed")) cfg.seed = j["seed"].get<std::uint64_t>();
  if (j.contains("threads")) cfg.threads = j["threads"];
  if (j.contains("out")) cfg.out = j["out"];

  if (!(cfg.h > 0.0)) throw ValidationError("config: h must be positive");
  if (!(cfg.tol > 0.0)) throw ValidationError("config: tol must be positive");
  if (cfg.threads < 1) throw ValidationError("config: threads must be >= 1");
  for (double e : cfg.ladder)
    if (!(e > 0.0)) throw ValidationError("config: ladder entries must be > 0");
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("config: cannot open " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ValidationError(std::string("config: parse error: ") + e.what());
  }
  return config_from_json(j);
}

json config_to_json(const RunConfig& cfg) {
  json j;
  j["schema_version"] = cfg.schema_version;
  j["command"] = cfg.command;
  if (cfg.gamma) j["gamma"] = *cfg.gamma;
  if (cfg.alpha) j["alpha"] = *cfg.alpha;
  j["n"] = cfg.n;
  j["h"] = cfg.h;
  j["tol"] = cfg.tol;
  j["tau_max"] = cfg.tau_max;
  j["z_min"] = cfg.z_min;
  j["z_max"] = cfg.z_max;
  j["r0"] = cfg.r0;
  j["r_max"] = cfg.r_max;
  j["length"] = cfg.length;
  j["ladder"] = cfg.ladder;
  j["probes"] = cfg.probes;
  j["h0_lo"] = cfg.h0_lo;
  j["h0_hi"] = cfg.h0_hi;
  j["h0_count"] = cfg.h0_count;
  j["theta"] = cfg.theta;
  j["seed"] = cfg.seed;
  j["threads"] = cfg.threads;
  j["out"] = cfg.out;
  return j;
}

double config_gamma(const RunConfig& cfg) {
  if (cfg.gamma) return *cfg.gamma;
  if (cfg.alpha) return 2.0 * *cfg.alpha / (*cfg.alpha + 2.0);
  return 0.0;
}

std::uint64_t resolve_seed(std::uint64_t config_seed) {
  if (config_seed != 0) return config_seed;
  if (const char* env = std::getenv("APFB_SEED")) {
    char* end = nullptr;
    const std::uint64_t s = std::strtoull(env, &end, 10);
    if (end && *end == '\0' && s != 0) return s;
  }
  return 0x5eedf00dcafe17ull;
}

OutputWriter::OutputWriter(std::string dir) : dir_(std::move(dir)) {
  fs::create_directories(dir_);
}

void OutputWriter::add(const std::string& name, const std::string& content) {
  const std::string path = dir_ + "/" + name;
  write_file_atomic(path, content);
  char buf[24];
  std::snprintf(buf, sizeof buf, "fnv1a64:%016" PRIx64, fnv1a64(content));
  files_.emplace_back(name, buf);
}

std::string OutputWriter::finish(const RunConfig& cfg, double wall_seconds) {
  json m;
  m["artifact_version"] = "apfb 1.0.0";
  m["config"] = config_to_json(cfg);
  m["wall_time_s"] = wall_seconds;
  json files = json::array();
  for (const auto& [name, digest] : files_)
    files.push_back({{"file", name}, {"digest", digest}});
  m["files"] = files;
  const std::string path = dir_ + "/run_manifest.json";
  write_file_atomic(path, m.dump(2) + "\n");
  return path;
}

}  // namespace apfb
