#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace auth {

struct AccelSample {
  std::int64_t t_ms = 0;  // milliseconds since trace start, strictly increasing
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
  bool screen_on = false;
};

struct AccelTrace {
  std::string user_id;
  std::vector<AccelSample> samples;   // sorted by t_ms, no duplicates
  double nominal_rate_hz = 0.0;       // metadata only, never used for windowing
  std::size_t duplicate_rows = 0;     // duplicate timestamps collapsed on load

  std::int64_t duration_ms() const {
    return samples.empty() ? 0 : samples.back().t_ms - samples.front().t_ms;
  }
};

// CSV format: header "t_ms,x,y,z,screen_on", UTF-8, LF, '.' decimal separator.
// Duplicate timestamps collapse to the last occurrence (counted in the result);
// any unparseable row fails the whole file. user_id defaults to the file stem.
AccelTrace load_trace(const std::string& path);

void save_trace(const AccelTrace& trace, const std::string& path);

}  // namespace auth
