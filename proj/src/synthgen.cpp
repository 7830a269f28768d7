#include "auth/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>

#include "auth/error.hpp"
#include "auth/rng.hpp"

namespace auth {

namespace {

void validate_spec(const SynthUserSpec& spec) {
  if (spec.contexts.empty()) throw Error(ErrorCode::InvalidSpec, "spec needs >= 1 context");
  if (spec.unattended_fraction < 0.0 || spec.unattended_fraction >= 1.0) {
    throw Error(ErrorCode::InvalidSpec, "unattended_fraction outside [0, 1)");
  }
  if (spec.total_duration_ms <= 0) throw Error(ErrorCode::InvalidSpec, "non-positive duration");
  if (spec.rate_hz < 4.0 || spec.rate_hz > 40.0) {
    throw Error(ErrorCode::InvalidSpec, "rate_hz outside [4, 40]");
  }
  if (spec.mean_bout_ms <= 0) throw Error(ErrorCode::InvalidSpec, "non-positive bout length");

  double weight_sum = 0.0;
  for (const auto& ctx : spec.contexts) {
    if (ctx.weight <= 0.0) throw Error(ErrorCode::InvalidSpec, "context weight must be positive");
    weight_sum += ctx.weight;
    if (ctx.noise_std < 0.0) throw Error(ErrorCode::InvalidSpec, "negative noise std");
    if (ctx.screen_on_prob < 0.0 || ctx.screen_on_prob > 1.0) {
      throw Error(ErrorCode::InvalidSpec, "screen_on_prob outside [0, 1]");
    }
    for (const AxisSpec* axis : {&ctx.x, &ctx.y, &ctx.z}) {
      if (axis->sinusoids.size() < 2 || axis->sinusoids.size() > 3) {
        throw Error(ErrorCode::InvalidSpec, "each axis needs 2 or 3 sinusoids");
      }
      for (const auto& s : axis->sinusoids) {
        if (s.amplitude < 0.0) throw Error(ErrorCode::InvalidSpec, "negative amplitude");
        if (s.freq_hz <= 0.0 || s.freq_hz >= spec.rate_hz / 2.0) {
          throw Error(ErrorCode::InvalidSpec, "sinusoid frequency outside (0, rate/2)");
        }
      }
    }
  }
  if (std::fabs(weight_sum - 1.0) > 1e-9) {
    throw Error(ErrorCode::InvalidSpec, "context weights must sum to 1");
  }
}

struct Bout {
  double start_ms = 0.0;
  double end_ms = 0.0;
  int context = -1;  // -1 for unattended
};

std::vector<double> draw_rescaled(Rng& rng, std::size_t count, double mean, double target_sum) {
  std::vector<double> lengths(count);
  double sum = 0.0;
  for (double& v : lengths) {
    v = rng.exponential(mean);
    sum += v;
  }
  const double scale = target_sum / sum;
  for (double& v : lengths) v *= scale;
  return lengths;
}

std::vector<Bout> build_schedule(const SynthUserSpec& spec, Rng& rng) {
  const double total = static_cast<double>(spec.total_duration_ms);
  const double unattended_total = spec.unattended_fraction * total;
  const double attended_total = total - unattended_total;
  const double mean = static_cast<double>(spec.mean_bout_ms);

  const auto pairs = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::llround(total / (2.0 * mean))));
  const auto attended = draw_rescaled(rng, pairs, mean, attended_total);
  std::vector<double> unattended;
  if (unattended_total > 0.0) unattended = draw_rescaled(rng, pairs, mean, unattended_total);

  auto pick_context = [&spec, &rng]() {
    const double r = rng.uniform();
    double cum = 0.0;
    for (std::size_t c = 0; c < spec.contexts.size(); ++c) {
      cum += spec.contexts[c].weight;
      if (r < cum) return static_cast<int>(c);
    }
    return static_cast<int>(spec.contexts.size() - 1);
  };

  std::vector<Bout> schedule;
  double t = 0.0;
  for (std::size_t i = 0; i < pairs; ++i) {
    schedule.push_back({t, t + attended[i], pick_context()});
    t += attended[i];
    if (!unattended.empty()) {
      schedule.push_back({t, t + unattended[i], -1});
      t += unattended[i];
    }
  }
  schedule.back().end_ms = total;  // absorb rounding drift
  return schedule;
}

}  // namespace

SynthTrace generate_trace(const SynthUserSpec& spec) {
  validate_spec(spec);
  Rng rng(spec.seed);

  const UnattendedThresholds box;
  const double cx = 0.5 * (box.lx + box.ux);
  const double cy = 0.5 * (box.ly + box.uy);
  const double cz = 0.5 * (box.lz + box.uz);
  const double hx = 0.5 * (box.ux - box.lx);
  const double hy = 0.5 * (box.uy - box.ly);
  const double hz = 0.5 * (box.uz - box.lz);

  const auto schedule = build_schedule(spec, rng);
  const double dt_nominal = 1000.0 / spec.rate_hz;

  SynthTrace out;
  out.trace.user_id = spec.user_id;
  out.trace.nominal_rate_hz = spec.rate_hz;

  auto axis_value = [](const AxisSpec& axis, double center, double t_sec) {
    double v = center + axis.offset;
    for (const auto& s : axis.sinusoids) {
      v += s.amplitude * std::sin(2.0 * std::numbers::pi * s.freq_hz * t_sec + s.phase);
    }
    return v;
  };

  double t = 0.0;
  std::int64_t prev_ms = -1;
  for (const auto& bout : schedule) {
    while (t < bout.end_ms) {
      const auto t_ms = std::max<std::int64_t>(prev_ms + 1, std::llround(t));
      AccelSample sample;
      sample.t_ms = t_ms;
      if (bout.context >= 0) {
        const auto& ctx = spec.contexts[static_cast<std::size_t>(bout.context)];
        const double t_sec = t / 1000.0;
        sample.x = axis_value(ctx.x, cx, t_sec) + rng.gauss() * ctx.noise_std;
        sample.y = axis_value(ctx.y, cy, t_sec) + rng.gauss() * ctx.noise_std;
        sample.z = axis_value(ctx.z, cz, t_sec) + rng.gauss() * ctx.noise_std;
        sample.screen_on = rng.uniform() < ctx.screen_on_prob;
      } else {
        // Motionless: small jitter that keeps every reading strictly inside
        // the unattended box on each axis.
        sample.x = cx + 0.5 * hx * (2.0 * rng.uniform() - 1.0);
        sample.y = cy + 0.5 * hy * (2.0 * rng.uniform() - 1.0);
        sample.z = cz + 0.5 * hz * (2.0 * rng.uniform() - 1.0);
        sample.screen_on = false;
      }
      out.trace.samples.push_back(sample);
      out.truth.push_back({t_ms, bout.context >= 0, bout.context});
      prev_ms = t_ms;
      t += dt_nominal * (1.0 + 0.1 * (2.0 * rng.uniform() - 1.0));
    }
  }

  if (out.trace.samples.empty()) {
    throw Error(ErrorCode::InvalidSpec, "spec produced no samples");
  }
  return out;
}

std::vector<SynthUserSpec> generate_population(std::size_t n_users, double distinctiveness,
                                               std::uint64_t master_seed,
                                               const PopulationParams& params) {
  if (n_users < 2) throw Error(ErrorCode::InvalidSpec, "population needs >= 2 users");
  if (distinctiveness < 0.0 || distinctiveness > 1.0) {
    throw Error(ErrorCode::InvalidSpec, "distinctiveness outside [0, 1]");
  }
  if (params.n_contexts == 0) throw Error(ErrorCode::InvalidSpec, "n_contexts must be positive");

  const auto k = params.n_contexts;
  std::vector<SynthUserSpec> specs;
  specs.reserve(n_users);

  for (std::size_t i = 0; i < n_users; ++i) {
    // Lead frequencies sit on a monotone grid so any two users stay apart in
    // at least one dimension; every other trait is drawn independently per
    // user so no single feature-space direction orders the population.
    // Distinctiveness scales both kinds of spread.
    const double centered =
        n_users == 1 ? 0.0
                     : 2.0 * static_cast<double>(i) / static_cast<double>(n_users - 1) - 1.0;
    const double grid = static_cast<double>(i) - 0.5 * static_cast<double>(n_users - 1);
    Rng trait_rng(derive_seed(master_seed, "traits", i));

    SynthUserSpec spec;
    char name[32];
    std::snprintf(name, sizeof(name), "user%02zu", i + 1);
    spec.user_id = name;
    spec.seed = derive_seed(master_seed, "user", i);
    spec.unattended_fraction = params.unattended_fraction;
    spec.total_duration_ms = params.total_duration_ms;
    spec.mean_bout_ms = params.mean_bout_ms;
    spec.rate_hz = params.base_rate_hz + distinctiveness * 0.5 * params.rate_spread_hz * centered;

    for (std::size_t j = 0; j < k; ++j) {
      ContextSpec ctx;
      ctx.weight = 1.0 / static_cast<double>(k);

      const double amp_trait = trait_rng.uniform(-1.0, 1.0);
      const double offset_trait = trait_rng.uniform(-1.0, 1.0);
      const double noise_trait = trait_rng.uniform(-1.0, 1.0);
      const double screen_trait = trait_rng.uniform(-1.0, 1.0);

      // Adjacent users end up 0.6 * distinctiveness Hz apart per context.
      // Extreme populations would push the edge bands outside (0, rate / 2),
      // so the clamp trades the exact gap for validity there.
      const double base_freq =
          k == 1 ? 4.5 : 2.5 + 4.0 * static_cast<double>(j) / static_cast<double>(k - 1);
      const double freq =
          std::clamp(base_freq + 0.6 * distinctiveness * grid, 0.12, 0.45 * spec.rate_hz);
      const double second_freq = 0.5 * freq + 0.25;

      const double base_amp = 0.35 + 0.1 * static_cast<double>(j % 3);
      const double amp = base_amp * (1.0 + 0.7 * distinctiveness * amp_trait);

      const double offset_scale = 1.0 + 0.6 * distinctiveness * offset_trait;
      const double sign = j % 2 == 0 ? 1.0 : -1.0;
      const double jd = static_cast<double>(j);

      ctx.x.offset = sign * (0.10 + 0.03 * static_cast<double>(j % 4)) * offset_scale;
      ctx.y.offset = -sign * (0.12 + 0.025 * static_cast<double>(j % 3)) * offset_scale;
      ctx.z.offset = sign * (0.30 + 0.08 * static_cast<double>(j % 5)) * offset_scale;

      ctx.x.sinusoids = {{freq, amp, 0.7 * jd}, {second_freq, 0.3 * amp, 0.7 * jd + 0.9}};
      ctx.y.sinusoids = {{freq, 0.8 * amp, 0.7 * jd + 1.8},
                         {second_freq, 0.25 * amp, 0.7 * jd + 2.7}};
      ctx.z.sinusoids = {{freq, 0.6 * amp, 0.7 * jd + 3.6},
                         {second_freq, 0.2 * amp, 0.7 * jd + 4.5}};

      ctx.noise_std = (0.05 + 0.01 * static_cast<double>(j % 3)) *
                      (1.0 + 0.3 * distinctiveness * noise_trait);
      const double base_prob = j % 3 == 0 ? 0.8 : (j % 3 == 1 ? 0.35 : 0.6);
      ctx.screen_on_prob =
          std::clamp(base_prob + 0.25 * distinctiveness * screen_trait, 0.05, 0.95);
      spec.contexts.push_back(std::move(ctx));
    }
    specs.push_back(std::move(spec));
  }
  return specs;
}

void save_ground_truth(const std::vector<GroundTruthRow>& truth, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::SerializationError, "cannot open " + path);
  std::string body = "t_ms,attended,context\n";
  for (const auto& row : truth) {
    body += std::to_string(row.t_ms);
    body += ',';
    body += row.attended ? '1' : '0';
    body += ',';
    body += std::to_string(row.context);
    body += '\n';
  }
  out << body;
  if (!out) throw Error(ErrorCode::SerializationError, "write failed for " + path);
}

}  // namespace auth
