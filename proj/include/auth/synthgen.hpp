#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "auth/preprocess.hpp"
#include "auth/trace.hpp"

namespace auth {

struct Sinusoid {
  double freq_hz = 0.0;
  double amplitude = 0.0;
  double phase = 0.0;  // radians
};

struct AxisSpec {
  double offset = 0.0;  // relative to the unattended box center of the axis
  std::vector<Sinusoid> sinusoids;  // 2 or 3 components
};

struct ContextSpec {
  double weight = 1.0;
  AxisSpec x, y, z;
  double noise_std = 0.0;
  double screen_on_prob = 0.5;
};

struct SynthUserSpec {
  std::string user_id;
  std::uint64_t seed = 0;
  std::vector<ContextSpec> contexts;
  double unattended_fraction = 0.5;  // in [0, 1)
  std::int64_t total_duration_ms = 0;
  double rate_hz = 24.0;  // in [4, 40]
  std::int64_t mean_bout_ms = 60000;
};

struct GroundTruthRow {
  std::int64_t t_ms = 0;
  bool attended = false;
  int context = -1;  // -1 while unattended
};

struct SynthTrace {
  AccelTrace trace;
  std::vector<GroundTruthRow> truth;  // one row per sample
};

// Alternates attended context bouts with motionless bouts whose samples sit
// strictly inside the unattended boxes. Bout lengths are exponential with
// the configured mean, rescaled so the unattended share matches
// unattended_fraction; sample spacing is 1/rate_hz jittered by +-10%.
// Attended samples are box-center + offset + sinusoids + gaussian noise.
// Deterministic given spec.seed.
SynthTrace generate_trace(const SynthUserSpec& spec);

struct PopulationParams {
  std::size_t n_contexts = 3;
  std::int64_t total_duration_ms = 7200000;
  double unattended_fraction = 0.5;
  double base_rate_hz = 24.0;
  double rate_spread_hz = 16.0;  // full inter-user span at distinctiveness 1
  std::int64_t mean_bout_ms = 60000;
};

// Per-user specs whose frequency/amplitude/offset separation scales linearly
// with distinctiveness, so 0 yields identical specs (seeds aside) and values
// near 1 yield well-separated users. The construction is deterministic; the
// master seed only derives the per-user noise seeds.
std::vector<SynthUserSpec> generate_population(std::size_t n_users, double distinctiveness,
                                               std::uint64_t master_seed,
                                               const PopulationParams& params = {});

// Sidecar format: header "t_ms,attended,context", context -1 when unattended.
void save_ground_truth(const std::vector<GroundTruthRow>& truth, const std::string& path);

}  // namespace auth
