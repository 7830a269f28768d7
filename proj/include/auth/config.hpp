#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "auth/eval.hpp"
#include "auth/synthgen.hpp"

namespace auth {

// Every tunable of the pipeline in one place; defaults are the constants the
// pipeline is specified with. Loaded from a JSON file with nested sections,
// where missing keys keep their defaults and unknown keys are rejected.
struct RunConfig {
  std::uint64_t seed = 42;
  std::vector<Algorithm> algorithms{Algorithm::kLogReg, Algorithm::kMlp, Algorithm::kKnn,
                                    Algorithm::kSvm, Algorithm::kForest};
  std::size_t jobs = 0;  // worker threads for per-user work, 0 = hardware default
  EvalConfig eval;
  std::vector<double> removal_fractions{0.05, 0.10, 0.15};
  std::size_t synth_users = 8;
  double distinctiveness = 0.8;
  PopulationParams population;
};

RunConfig load_config(const std::string& path);

// Throws ConfigError naming the offending key, e.g. "context.k".
void validate_config(const RunConfig& config);

// Canonical JSON form; the manifest embeds it and the run hash covers it.
std::string config_to_json(const RunConfig& config);

// FNV-1a over the canonical JSON form.
std::uint64_t config_hash(const RunConfig& config);

}  // namespace auth
