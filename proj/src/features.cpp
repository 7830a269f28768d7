#include "auth/features.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <complex>
#include <fstream>
#include <set>
#include <utility>

#include "auth/error.hpp"
#include "auth/fft.hpp"
#include "auth/stats.hpp"

namespace auth {

const std::vector<std::string>& feature_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> n;
    const char* axes[] = {"x", "y", "z", "m"};
    const char* descr[] = {"mean",   "std",        "iqr",         "range", "energy",
                           "p2rms",  "band_power", "median_freq", "spec_entropy"};
    for (const char* axis : axes) {
      for (const char* d : descr) n.push_back(std::string(axis) + "_" + d);
      for (std::size_t b = 0; b < kHistogramBins; ++b)
        n.push_back(std::string(axis) + "_hist" + (b < 10 ? "0" : "") + std::to_string(b));
    }
    const char* pairs[] = {"xy", "xz", "yz"};
    for (const char* p : pairs) {
      n.push_back(std::string(p) + "_dtw");
      n.push_back(std::string(p) + "_mi");
      n.push_back(std::string(p) + "_corr");
    }
    n.push_back("screen_on_frac");
    return n;
  }();
  return names;
}

std::vector<Window> window_trace(const AccelTrace& trace, const FeatureParams& params) {
  std::vector<Window> windows;
  if (trace.samples.empty()) return windows;
  const std::int64_t t_last = trace.samples.back().t_ms;
  const auto& samples = trace.samples;

  std::size_t lo = 0;
  for (std::int64_t start = 0; start + params.window_ms <= t_last; start += params.step_ms) {
    const std::int64_t end = start + params.window_ms;
    while (lo < samples.size() && samples[lo].t_ms < start) ++lo;
    std::size_t hi = lo;
    while (hi < samples.size() && samples[hi].t_ms < end) ++hi;
    // overlapping windows restart the scan from the previous start
    std::size_t first = lo;

    const std::size_t count = hi - first;
    if (count < params.min_samples) continue;

    bool gap_ok = samples[first].t_ms - start <= params.max_gap_ms &&
                  end - samples[hi - 1].t_ms <= params.max_gap_ms;
    for (std::size_t i = first + 1; gap_ok && i < hi; ++i)
      gap_ok = samples[i].t_ms - samples[i - 1].t_ms <= params.max_gap_ms;
    if (!gap_ok) continue;

    Window w;
    w.user_id = trace.user_id;
    w.start_ms = start;
    w.end_ms = end;
    w.x.reserve(count);
    w.y.reserve(count);
    w.z.reserve(count);
    w.m.reserve(count);
    w.screen.reserve(count);
    for (std::size_t i = first; i < hi; ++i) {
      const auto& s = samples[i];
      w.x.push_back(s.x);
      w.y.push_back(s.y);
      w.z.push_back(s.z);
      w.m.push_back(std::sqrt(s.x * s.x + s.y * s.y + s.z * s.z));
      w.screen.push_back(s.screen_on);
    }
    windows.push_back(std::move(w));
  }
  return windows;
}

PowerSpectrum power_spectrum(std::span<const double> series, std::int64_t duration_ms) {
  const std::size_t n = series.size();
  if (n < 8) throw Error(ErrorCode::TooFewSamples, "power_spectrum needs >= 8 samples");

  double mean = 0.0;
  for (double v : series) mean += v;
  mean /= static_cast<double>(n);

  const std::size_t padded = next_pow2(n);
  std::vector<std::complex<double>> buf(padded, {0.0, 0.0});
  for (std::size_t i = 0; i < n; ++i) buf[i] = {series[i] - mean, 0.0};
  fft_inplace(buf);

  const double fs = static_cast<double>(n) / (static_cast<double>(duration_ms) / 1000.0);
  PowerSpectrum ps;
  const std::size_t half = padded / 2;
  ps.freqs.resize(half + 1);
  ps.powers.resize(half + 1);
  for (std::size_t k = 0; k <= half; ++k) {
    ps.freqs[k] = fs * static_cast<double>(k) / static_cast<double>(padded);
    ps.powers[k] = std::norm(buf[k]);
  }
  return ps;
}

SpectralFeatures spectral_features(std::span<const double> series, std::int64_t duration_ms) {
  PowerSpectrum ps = power_spectrum(series, duration_ms);
  const std::size_t bins = ps.powers.size() - 1;  // DC excluded

  double total = 0.0;
  for (std::size_t k = 1; k < ps.powers.size(); ++k) total += ps.powers[k];
  if (total <= 0.0) return {};

  SpectralFeatures out;
  out.band_power = total / static_cast<double>(bins);

  double cum = 0.0;
  for (std::size_t k = 1; k < ps.powers.size(); ++k) {
    cum += ps.powers[k];
    if (cum >= 0.5 * total) {
      out.median_frequency = ps.freqs[k];
      break;
    }
  }

  double entropy = 0.0;
  for (std::size_t k = 1; k < ps.powers.size(); ++k) {
    double p = ps.powers[k] / total;
    if (p > 0.0) entropy -= p * std::log(p);
  }
  out.spectral_entropy = entropy / std::log(static_cast<double>(bins));
  return out;
}

double dtw_distance(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw Error(ErrorCode::EmptySequence, "dtw on empty sequence");
  const std::size_t n = a.size();
  const std::size_t m = b.size();
  constexpr double inf = std::numeric_limits<double>::infinity();

  // two-row DP over the cost matrix
  std::vector<double> prev(m + 1, inf), cur(m + 1, inf);
  prev[0] = 0.0;
  for (std::size_t i = 1; i <= n; ++i) {
    cur[0] = inf;
    for (std::size_t j = 1; j <= m; ++j) {
      double cost = std::abs(a[i - 1] - b[j - 1]);
      cur[j] = cost + std::min({prev[j], cur[j - 1], prev[j - 1]});
    }
    std::swap(prev, cur);
  }
  return prev[m];
}

namespace {

std::vector<std::size_t> bin16(std::span<const double> v) {
  double lo = v[0], hi = v[0];
  for (double x : v) {
    lo = std::min(lo, x);
    hi = std::max(hi, x);
  }
  std::vector<std::size_t> bins(v.size(), 0);
  if (hi > lo) {
    const double scale = static_cast<double>(kHistogramBins) / (hi - lo);
    for (std::size_t i = 0; i < v.size(); ++i) {
      auto b = static_cast<std::size_t>((v[i] - lo) * scale);
      bins[i] = std::min(b, kHistogramBins - 1);
    }
  }
  return bins;
}

}  // namespace

double mutual_information(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size())
    throw Error(ErrorCode::LengthMismatch, "mutual_information length mismatch");
  if (a.empty()) throw Error(ErrorCode::LengthMismatch, "mutual_information on empty input");
  const double n = static_cast<double>(a.size());

  auto ba = bin16(a);
  auto bb = bin16(b);
  double joint[kHistogramBins][kHistogramBins] = {};
  double pa[kHistogramBins] = {};
  double pb[kHistogramBins] = {};
  for (std::size_t i = 0; i < a.size(); ++i) {
    joint[ba[i]][bb[i]] += 1.0;
    pa[ba[i]] += 1.0;
    pb[bb[i]] += 1.0;
  }
  double mi = 0.0;
  for (std::size_t i = 0; i < kHistogramBins; ++i) {
    if (pa[i] == 0.0) continue;
    for (std::size_t j = 0; j < kHistogramBins; ++j) {
      double pij = joint[i][j];
      if (pij == 0.0) continue;
      mi += (pij / n) * std::log2(pij * n / (pa[i] * pb[j]));
    }
  }
  return std::max(mi, 0.0);
}

namespace {

double interp_quantile(std::vector<double>& sorted, double q) {
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(pos);
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

}  // namespace

DescriptiveFeatures descriptive_features(std::span<const double> series) {
  DescriptiveFeatures f;
  if (series.empty()) return f;
  const double n = static_cast<double>(series.size());

  double sum = 0.0, sumsq = 0.0, peak = 0.0;
  double lo = series[0], hi = series[0];
  for (double v : series) {
    sum += v;
    sumsq += v * v;
    peak = std::max(peak, std::abs(v));
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  f.mean = sum / n;
  f.energy = sumsq / n;
  f.stddev = std::sqrt(std::max(0.0, f.energy - f.mean * f.mean));
  f.range = hi - lo;

  std::vector<double> sorted(series.begin(), series.end());
  std::sort(sorted.begin(), sorted.end());
  f.iqr = interp_quantile(sorted, 0.75) - interp_quantile(sorted, 0.25);

  const double rms = std::sqrt(f.energy);
  f.peak_to_rms = rms > 0.0 ? peak / rms : 0.0;
  return f;
}

std::vector<double> histogram16(std::span<const double> series) {
  std::vector<double> hist(kHistogramBins, 0.0);
  if (series.empty()) return hist;
  auto bins = bin16(series);
  const double w = 1.0 / static_cast<double>(series.size());
  for (std::size_t b : bins) hist[b] += w;
  return hist;
}

double screen_on_fraction(const Window& window) {
  if (window.screen.empty()) return 0.0;
  std::size_t on = 0;
  for (bool s : window.screen) on += s ? 1 : 0;
  return static_cast<double>(on) / static_cast<double>(window.screen.size());
}

double pearson_correlation(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size() || a.empty())
    throw Error(ErrorCode::LengthMismatch, "correlation length mismatch");
  const double n = static_cast<double>(a.size());
  double ma = 0.0, mb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= n;
  mb /= n;
  double cov = 0.0, va = 0.0, vb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double da = a[i] - ma;
    const double db = b[i] - mb;
    cov += da * db;
    va += da * da;
    vb += db * db;
  }
  if (va <= 0.0 || vb <= 0.0) return 0.0;
  return cov / std::sqrt(va * vb);
}

namespace {

std::vector<double> zscore(std::span<const double> v) {
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double var = 0.0;
  for (double x : v) var += (x - mean) * (x - mean);
  var /= static_cast<double>(v.size());
  const double sd = std::sqrt(var);
  std::vector<double> out(v.size());
  if (sd > 0.0) {
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = (v[i] - mean) / sd;
  }
  return out;
}

std::vector<double> mean_pool(std::span<const double> v, std::size_t max_points) {
  if (v.size() <= max_points) return {v.begin(), v.end()};
  const std::size_t group =
      (v.size() + max_points - 1) / max_points;  // ceil, keeps size <= max_points
  std::vector<double> out;
  out.reserve(v.size() / group + 1);
  for (std::size_t i = 0; i < v.size(); i += group) {
    const std::size_t end = std::min(i + group, v.size());
    double s = 0.0;
    for (std::size_t j = i; j < end; ++j) s += v[j];
    out.push_back(s / static_cast<double>(end - i));
  }
  return out;
}

}  // namespace

WindowFeatures extract_features(const Window& window, const FeatureParams& params) {
  WindowFeatures wf;
  wf.user_id = window.user_id;
  wf.start_ms = window.start_ms;
  wf.values.reserve(kFeatureCount);

  const std::int64_t duration = window.end_ms - window.start_ms;
  const std::span<const double> axes[] = {window.x, window.y, window.z, window.m};
  for (const auto& axis : axes) {
    DescriptiveFeatures d = descriptive_features(axis);
    SpectralFeatures s = spectral_features(axis, duration);
    wf.values.insert(wf.values.end(), {d.mean, d.stddev, d.iqr, d.range, d.energy, d.peak_to_rms,
                                       s.band_power, s.median_frequency, s.spectral_entropy});
    auto hist = histogram16(axis);
    wf.values.insert(wf.values.end(), hist.begin(), hist.end());
  }

  const std::pair<std::size_t, std::size_t> pairs[] = {{0, 1}, {0, 2}, {1, 2}};
  for (auto [i, j] : pairs) {
    auto a = mean_pool(zscore(axes[i]), params.dtw_max_points);
    auto b = mean_pool(zscore(axes[j]), params.dtw_max_points);
    wf.values.push_back(dtw_distance(a, b));
    wf.values.push_back(mutual_information(axes[i], axes[j]));
    wf.values.push_back(pearson_correlation(axes[i], axes[j]));
  }
  wf.values.push_back(screen_on_fraction(window));
  return wf;
}

std::vector<WindowFeatures> extract_features_all(const std::vector<Window>& windows,
                                                 const FeatureParams& params) {
  std::vector<WindowFeatures> out(windows.size());
  const std::int64_t n = static_cast<std::int64_t>(windows.size());
#pragma omp parallel for schedule(dynamic)
  for (std::int64_t i = 0; i < n; ++i) {
    out[static_cast<std::size_t>(i)] = extract_features(windows[static_cast<std::size_t>(i)], params);
  }
  return out;
}

std::vector<WindowFeatures> extract_features_all_serial(const std::vector<Window>& windows,
                                                        const FeatureParams& params) {
  std::vector<WindowFeatures> out(windows.size());
  for (std::size_t i = 0; i < windows.size(); ++i) out[i] = extract_features(windows[i], params);
  return out;
}

MinMaxNormalizer fit_minmax(const std::vector<std::vector<double>>& train) {
  if (train.empty()) throw Error(ErrorCode::TooFewVectors, "fit_minmax on empty training set");
  MinMaxNormalizer norm;
  norm.lo = train[0];
  norm.hi = train[0];
  for (const auto& v : train) {
    for (std::size_t i = 0; i < v.size(); ++i) {
      norm.lo[i] = std::min(norm.lo[i], v[i]);
      norm.hi[i] = std::max(norm.hi[i], v[i]);
    }
  }
  return norm;
}

std::vector<double> apply_minmax(const MinMaxNormalizer& norm, std::span<const double> v) {
  if (v.size() != norm.lo.size())
    throw Error(ErrorCode::DimensionMismatch, "apply_minmax dimension mismatch");
  std::vector<double> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double span = norm.hi[i] - norm.lo[i];
    out[i] = span > 0.0 ? std::clamp((v[i] - norm.lo[i]) / span, 0.0, 1.0) : 0.0;
  }
  return out;
}

std::vector<bool> ks_normality_screen(const std::vector<std::vector<double>>& columns) {
  std::vector<bool> reject(columns.size(), false);
  for (std::size_t c = 0; c < columns.size(); ++c) {
    const auto& col = columns[c];
    double mean = 0.0;
    for (double v : col) mean += v;
    mean /= static_cast<double>(col.size());
    double var = 0.0;
    for (double v : col) var += (v - mean) * (v - mean);
    var = col.size() > 1 ? var / static_cast<double>(col.size() - 1) : 0.0;
    const double sd = std::sqrt(var);

    std::vector<double> standardized(col.size(), 0.0);
    if (sd > 0.0) {
      for (std::size_t i = 0; i < col.size(); ++i) standardized[i] = (col[i] - mean) / sd;
    }
    TestOutcome t = ks_test_standard_normal(standardized);
    reject[c] = t.p_value < 0.05;
  }
  return reject;
}

namespace {

struct CfsContext {
  std::vector<double> corr_label;              // |corr(feature, label)|
  std::vector<std::vector<double>> corr_ff;    // |corr(feature_i, feature_j)|

  double merit(const std::vector<std::size_t>& subset) const {
    const double k = static_cast<double>(subset.size());
    double rcf = 0.0;
    for (std::size_t f : subset) rcf += corr_label[f];
    rcf /= k;
    double rff = 0.0;
    if (subset.size() > 1) {
      std::size_t pairs = 0;
      for (std::size_t i = 0; i < subset.size(); ++i)
        for (std::size_t j = i + 1; j < subset.size(); ++j) {
          rff += corr_ff[subset[i]][subset[j]];
          ++pairs;
        }
      rff /= static_cast<double>(pairs);
    }
    return k * rcf / std::sqrt(k + k * (k - 1.0) * rff);
  }
};

}  // namespace

FeatureSubset cfs_select(const std::vector<std::vector<double>>& vectors,
                         const std::vector<bool>& labels) {
  if (vectors.size() < 2 || vectors.size() != labels.size())
    throw Error(ErrorCode::DegenerateLabels, "cfs_select needs >= 2 labeled vectors");
  bool any_true = false, any_false = false;
  for (bool l : labels) (l ? any_true : any_false) = true;
  if (!any_true || !any_false)
    throw Error(ErrorCode::DegenerateLabels, "cfs_select needs both classes");

  const std::size_t d = vectors[0].size();
  const std::size_t n = vectors.size();
  std::vector<double> label_col(n);
  for (std::size_t i = 0; i < n; ++i) label_col[i] = labels[i] ? 1.0 : 0.0;

  std::vector<std::vector<double>> cols(d, std::vector<double>(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t f = 0; f < d; ++f) cols[f][i] = vectors[i][f];

  CfsContext ctx;
  ctx.corr_label.resize(d);
  for (std::size_t f = 0; f < d; ++f)
    ctx.corr_label[f] = std::abs(pearson_correlation(cols[f], label_col));
  ctx.corr_ff.assign(d, std::vector<double>(d, 0.0));
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = i + 1; j < d; ++j)
      ctx.corr_ff[i][j] = ctx.corr_ff[j][i] = std::abs(pearson_correlation(cols[i], cols[j]));

  constexpr std::size_t kFrontier = 5;
  constexpr std::size_t kMaxStale = 5;

  struct State {
    double merit;
    std::vector<std::size_t> subset;
  };
  auto better_than = [](const State& a, const State& b) {
    if (a.merit != b.merit) return a.merit > b.merit;
    if (a.subset.size() != b.subset.size()) return a.subset.size() < b.subset.size();
    return a.subset < b.subset;
  };

  State best{ctx.corr_label[0], {0}};
  std::vector<State> frontier;
  for (std::size_t f = 0; f < d; ++f) {
    State s{ctx.corr_label[f], {f}};
    if (s.merit > best.merit) best = s;
    frontier.push_back(std::move(s));
  }
  std::sort(frontier.begin(), frontier.end(), better_than);
  if (frontier.size() > kFrontier) frontier.resize(kFrontier);

  std::set<std::vector<std::size_t>> visited;
  std::size_t stale = 0;
  while (stale < kMaxStale && !frontier.empty()) {
    State state = frontier.front();
    frontier.erase(frontier.begin());
    if (!visited.insert(state.subset).second) continue;

    bool improved = false;
    for (std::size_t f = 0; f < d; ++f) {
      if (std::binary_search(state.subset.begin(), state.subset.end(), f)) continue;
      State child;
      child.subset = state.subset;
      child.subset.insert(std::upper_bound(child.subset.begin(), child.subset.end(), f), f);
      if (visited.count(child.subset)) continue;
      child.merit = ctx.merit(child.subset);
      if (child.merit > best.merit) {
        best = child;
        improved = true;
      }
      frontier.push_back(std::move(child));
    }
    std::sort(frontier.begin(), frontier.end(), better_than);
    if (frontier.size() > kFrontier) frontier.resize(kFrontier);
    stale = improved ? 0 : stale + 1;
  }

  return FeatureSubset{best.subset, best.merit};
}

std::vector<double> apply_subset(const FeatureSubset& subset, std::span<const double> v) {
  std::vector<double> out;
  out.reserve(subset.indices.size());
  for (std::size_t i : subset.indices) {
    if (i >= v.size()) throw Error(ErrorCode::DimensionMismatch, "feature subset out of range");
    out.push_back(v[i]);
  }
  return out;
}

void write_features_csv(const std::string& path, const std::vector<WindowFeatures>& features) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::SerializationError, "cannot open " + path);
  out << "user_id,start_ms";
  for (const auto& name : feature_names()) out << ',' << name;
  out << '\n';
  char buf[64];
  for (const auto& wf : features) {
    out << wf.user_id << ',' << wf.start_ms;
    for (double v : wf.values) {
      auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
      (void)ec;
      out << ',';
      out.write(buf, ptr - buf);
    }
    out << '\n';
  }
}

}  // namespace auth
