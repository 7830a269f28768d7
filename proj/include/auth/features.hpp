#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "auth/trace.hpp"

namespace auth {

// Layout of one feature vector: 25 per-axis features for each of x, y, z and
// the resultant magnitude m, then dtw/mi/correlation for the pairs (x,y),
// (x,z), (y,z), then the screen-on fraction.
inline constexpr std::size_t kPerAxisFeatures = 25;
inline constexpr std::size_t kHistogramBins = 16;
inline constexpr std::size_t kFeatureCount = 110;

const std::vector<std::string>& feature_names();

struct FeatureParams {
  std::int64_t window_ms = 10000;
  std::int64_t step_ms = 5000;
  std::size_t min_samples = 8;
  std::int64_t max_gap_ms = 2500;
  std::size_t dtw_max_points = 200;
};

struct Window {
  std::string user_id;
  std::int64_t start_ms = 0;
  std::int64_t end_ms = 0;
  std::vector<double> x, y, z, m;
  std::vector<bool> screen;

  std::size_t size() const { return x.size(); }
};

struct WindowFeatures {
  std::string user_id;
  std::int64_t start_ms = 0;
  std::vector<double> values;  // kFeatureCount, all finite
};

// Window k covers [k*step_ms, k*step_ms + window_ms). Windows with fewer than
// min_samples samples, or with any gap above max_gap_ms (gaps to the window
// edges included, so windows straddling removed segments are dropped), are
// discarded, as is a trailing partial window.
std::vector<Window> window_trace(const AccelTrace& trace, const FeatureParams& params = {});

struct PowerSpectrum {
  std::vector<double> freqs;   // bins 0..N/2, Hz
  std::vector<double> powers;  // |X[k]|^2
};

// Mean-removes, zero-pads to the next power of two, and returns the one-sided
// power spectrum. The frequency axis uses the window's effective sampling
// rate, i.e. sample count over duration.
PowerSpectrum power_spectrum(std::span<const double> series, std::int64_t duration_ms);

struct SpectralFeatures {
  double band_power = 0.0;
  double median_frequency = 0.0;
  double spectral_entropy = 0.0;  // in [0, 1]
};

SpectralFeatures spectral_features(std::span<const double> series, std::int64_t duration_ms);

// Classic dynamic-programming DTW, absolute-difference local cost, steps
// insert/delete/match, no band constraint.
double dtw_distance(std::span<const double> a, std::span<const double> b);

// Histogram plug-in estimate in bits; each series binned into 16 equal-width
// bins over its own range.
double mutual_information(std::span<const double> a, std::span<const double> b);

struct DescriptiveFeatures {
  double mean = 0.0;
  double stddev = 0.0;  // population form
  double iqr = 0.0;     // linear-interpolation quantiles
  double range = 0.0;
  double energy = 0.0;  // mean of squares
  double peak_to_rms = 0.0;
};

DescriptiveFeatures descriptive_features(std::span<const double> series);

// Fractions summing to 1 over 16 equal-width bins spanning the series' own
// range; a degenerate range puts all mass in bin 0.
std::vector<double> histogram16(std::span<const double> series);

double screen_on_fraction(const Window& window);

double pearson_correlation(std::span<const double> a, std::span<const double> b);

WindowFeatures extract_features(const Window& window, const FeatureParams& params = {});

std::vector<WindowFeatures> extract_features_all(const std::vector<Window>& windows,
                                                 const FeatureParams& params = {});
// Serial reference for the OpenMP kernel above; outputs are bit-identical.
std::vector<WindowFeatures> extract_features_all_serial(const std::vector<Window>& windows,
                                                        const FeatureParams& params = {});

struct MinMaxNormalizer {
  std::vector<double> lo;
  std::vector<double> hi;
};

MinMaxNormalizer fit_minmax(const std::vector<std::vector<double>>& train);
// (v - lo) / (hi - lo), clamped to [0, 1]; components with lo == hi map to 0.
std::vector<double> apply_minmax(const MinMaxNormalizer& norm, std::span<const double> v);

// Advisory normality screen: standardizes each column and rejects when the
// one-sample KS test against the standard normal has p < 0.05.
std::vector<bool> ks_normality_screen(const std::vector<std::vector<double>>& columns);

struct FeatureSubset {
  std::vector<std::size_t> indices;  // unique, ascending
  double merit = 0.0;
};

// Correlation-based subset selection: merit(S) = k*rcf / sqrt(k + k(k-1)*rff)
// searched by greedy forward best-first expansion with a frontier of 5,
// stopping after 5 consecutive non-improving expansions. Never empty.
FeatureSubset cfs_select(const std::vector<std::vector<double>>& vectors,
                         const std::vector<bool>& labels);

std::vector<double> apply_subset(const FeatureSubset& subset, std::span<const double> v);

void write_features_csv(const std::string& path, const std::vector<WindowFeatures>& features);

}  // namespace auth
