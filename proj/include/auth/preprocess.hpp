#pragma once

#include "auth/trace.hpp"

namespace auth {

// Per-axis median boxes marking the motionless (unattended) phone state.
// A 2.5 s segment whose x/y/z medians all fall strictly inside the boxes is
// discarded. Units follow the sensor output and are treated as opaque.
struct UnattendedThresholds {
  double lx = -0.036;
  double ux = 0.035;
  double ly = -0.02;
  double uy = 0.06;
  double lz = -0.22;
  double uz = -0.13;
  std::int64_t segment_len_ms = 2500;

  bool valid() const { return lx < ux && ly < uy && lz < uz && segment_len_ms > 0; }
};

struct SegmentMedians {
  double mx = 0.0;
  double my = 0.0;
  double mz = 0.0;
};

double compute_magnitude(double x, double y, double z);

// Partitions the trace into consecutive segments of segment_len_ms by
// timestamp, drops every segment whose medians sit inside all three boxes,
// and concatenates the survivors with original timestamps. The trailing
// partial segment is judged by the same rule. Throws EmptyAfterFilter when
// nothing survives.
AccelTrace remove_unattended(const AccelTrace& trace, const UnattendedThresholds& th);

// Running median per axis over an odd span; the first and last span/2
// samples pass through unchanged. Timestamps and screen flags are untouched.
AccelTrace median_filter(const AccelTrace& trace, int span = 3);

}  // namespace auth
