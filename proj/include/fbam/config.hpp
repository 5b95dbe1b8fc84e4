#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "fbam/halanay.hpp"
#include "fbam/model.hpp"
#include "fbam/solver.hpp"
#include "fbam/sync.hpp"

// Experiment configuration: flat "key = value" files with dotted keys for
// indexed data (a.1 = 5, d.1.1.1 = 1.3).  '#' starts a comment; blank lines
// are ignored.  Every key may be overridden through the environment: the
// variable name is the key uppercased with dots replaced by underscores and
// prefixed FBAM_ (solver.t_end -> FBAM_SOLVER_T_END).

namespace fbam {

class config_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ExperimentConfig {
  std::string mode;           // simulate | certify | sync | halanay
  std::string out_dir = "out";

  BamNetwork network;         // every mode except halanay
  SolverConfig solver;
  SyncConfig sync;            // mode == sync
  HalanayProblem halanay;     // mode == halanay

  // Effective key-value pairs after overrides; snapshot for the manifest.
  std::map<std::string, std::string> raw;
};

// Key-value pairs in file order of last assignment.  Throws config_error on
// malformed lines (no '=', empty key).
std::map<std::string, std::string> parse_config_text(const std::string& text);

// Replaces values whose derived FBAM_* environment variable is set.
void apply_env_overrides(std::map<std::string, std::string>& kv);

// Typed construction + validation.  Throws config_error with the offending
// key in the message; network/solver invariants surface as config_error too.
ExperimentConfig build_config(std::map<std::string, std::string> kv);

// parse + env overrides + build.
ExperimentConfig load_config(const std::string& path);

// Scalar keys accepted by the sweep runner.
bool sweepable_key(const std::string& key);

// FNV-1a (64-bit) over the raw bytes of a file.
std::uint64_t fnv1a64_file(const std::string& path);

// Manifest: tool version, wall-clock, the config snapshot, and one checksum
// line per emitted artifact (paths relative to the manifest's directory).
void write_manifest(const ExperimentConfig& cfg,
                    const std::vector<std::string>& artifacts,
                    double wall_seconds, const std::string& path);

// Recomputes every artifact checksum recorded in a manifest.
bool verify_manifest(const std::string& manifest_path);

}  // namespace fbam
