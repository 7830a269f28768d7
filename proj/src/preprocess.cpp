#include "auth/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "auth/error.hpp"

namespace auth {

double compute_magnitude(double x, double y, double z) {
  return std::sqrt(x * x + y * y + z * z);
}

namespace {

double median_of(std::vector<double>& v) {
  std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + mid, v.end());
  double m = v[mid];
  if (v.size() % 2 == 0) {
    std::nth_element(v.begin(), v.begin() + mid - 1, v.end());
    m = 0.5 * (m + v[mid - 1]);
  }
  return m;
}

double median3(double a, double b, double c) {
  return std::max(std::min(a, b), std::min(std::max(a, b), c));
}

}  // namespace

AccelTrace remove_unattended(const AccelTrace& trace, const UnattendedThresholds& th) {
  AccelTrace out;
  out.user_id = trace.user_id;
  out.nominal_rate_hz = trace.nominal_rate_hz;
  out.duplicate_rows = trace.duplicate_rows;

  const auto& samples = trace.samples;
  std::vector<double> xs, ys, zs;
  std::size_t i = 0;
  while (i < samples.size()) {
    std::int64_t seg_index = samples[i].t_ms / th.segment_len_ms;
    std::int64_t seg_end = (seg_index + 1) * th.segment_len_ms;
    std::size_t j = i;
    xs.clear();
    ys.clear();
    zs.clear();
    while (j < samples.size() && samples[j].t_ms < seg_end) {
      xs.push_back(samples[j].x);
      ys.push_back(samples[j].y);
      zs.push_back(samples[j].z);
      ++j;
    }
    SegmentMedians m{median_of(xs), median_of(ys), median_of(zs)};
    bool unattended = (th.lx < m.mx && m.mx < th.ux) && (th.ly < m.my && m.my < th.uy) &&
                      (th.lz < m.mz && m.mz < th.uz);
    if (!unattended) {
      out.samples.insert(out.samples.end(), samples.begin() + i, samples.begin() + j);
    }
    i = j;
  }
  if (out.samples.empty())
    throw Error(ErrorCode::EmptyAfterFilter, "whole trace is unattended: " + trace.user_id);
  return out;
}

AccelTrace median_filter(const AccelTrace& trace, int span) {
  if (span < 1 || span % 2 == 0)
    throw Error(ErrorCode::InvalidSpec, "median filter span must be odd and positive");
  AccelTrace out = trace;
  const std::size_t n = trace.samples.size();
  const std::size_t half = static_cast<std::size_t>(span / 2);
  if (n < static_cast<std::size_t>(span)) return out;

  if (span == 3) {
    for (std::size_t k = 1; k + 1 < n; ++k) {
      const auto& a = trace.samples[k - 1];
      const auto& b = trace.samples[k];
      const auto& c = trace.samples[k + 1];
      out.samples[k].x = median3(a.x, b.x, c.x);
      out.samples[k].y = median3(a.y, b.y, c.y);
      out.samples[k].z = median3(a.z, b.z, c.z);
    }
    return out;
  }

  std::vector<double> window;
  window.reserve(span);
  for (std::size_t k = half; k + half < n; ++k) {
    for (int axis = 0; axis < 3; ++axis) {
      window.clear();
      for (std::size_t w = k - half; w <= k + half; ++w) {
        const auto& s = trace.samples[w];
        window.push_back(axis == 0 ? s.x : axis == 1 ? s.y : s.z);
      }
      double m = median_of(window);
      if (axis == 0)
        out.samples[k].x = m;
      else if (axis == 1)
        out.samples[k].y = m;
      else
        out.samples[k].z = m;
    }
  }
  return out;
}

}  // namespace auth
