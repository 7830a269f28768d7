#include "auth/trace.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "auth/error.hpp"

namespace auth {

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::FileNotFound: return "FileNotFound";
    case ErrorCode::MalformedRow: return "MalformedRow";
    case ErrorCode::EmptyTrace: return "EmptyTrace";
    case ErrorCode::NonMonotonicTime: return "NonMonotonicTime";
    case ErrorCode::SerializationError: return "SerializationError";
    case ErrorCode::SchemaVersionMismatch: return "SchemaVersionMismatch";
    case ErrorCode::EmptyAfterFilter: return "EmptyAfterFilter";
    case ErrorCode::TooFewSamples: return "TooFewSamples";
    case ErrorCode::EmptySequence: return "EmptySequence";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::DegenerateLabels: return "DegenerateLabels";
    case ErrorCode::TooFewVectors: return "TooFewVectors";
    case ErrorCode::InsufficientImpostors: return "InsufficientImpostors";
    case ErrorCode::SingleClassDataset: return "SingleClassDataset";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::EmptyScores: return "EmptyScores";
    case ErrorCode::EnrollmentFailure: return "EnrollmentFailure";
    case ErrorCode::NoTestSamples: return "NoTestSamples";
    case ErrorCode::EmptySample: return "EmptySample";
    case ErrorCode::DegenerateMatrix: return "DegenerateMatrix";
    case ErrorCode::AllZeroDifferences: return "AllZeroDifferences";
    case ErrorCode::InvalidSpec: return "InvalidSpec";
    case ErrorCode::ConfigError: return "ConfigError";
  }
  return "UnknownError";
}

namespace {

bool parse_double(std::string_view field, double& out) {
  const char* begin = field.data();
  const char* end = begin + field.size();
  auto [ptr, ec] = std::from_chars(begin, end, out);
  return ec == std::errc() && ptr == end && std::isfinite(out);
}

bool parse_int64(std::string_view field, std::int64_t& out) {
  const char* begin = field.data();
  const char* end = begin + field.size();
  auto [ptr, ec] = std::from_chars(begin, end, out);
  return ec == std::errc() && ptr == end;
}

std::vector<std::string_view> split_csv(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  return fields;
}

}  // namespace

AccelTrace load_trace(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::FileNotFound, path);

  AccelTrace trace;
  trace.user_id = std::filesystem::path(path).stem().string();

  std::string line;
  std::size_t line_no = 0;
  bool saw_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (!saw_header) {
      if (line != "t_ms,x,y,z,screen_on")
        throw Error(ErrorCode::MalformedRow, "bad header in " + path, line_no);
      saw_header = true;
      continue;
    }
    auto fields = split_csv(line);
    AccelSample s;
    std::int64_t screen = 0;
    if (fields.size() != 5 || !parse_int64(fields[0], s.t_ms) ||
        !parse_double(fields[1], s.x) || !parse_double(fields[2], s.y) ||
        !parse_double(fields[3], s.z) || !parse_int64(fields[4], screen) ||
        (screen != 0 && screen != 1) || s.t_ms < 0) {
      throw Error(ErrorCode::MalformedRow, path + " line " + std::to_string(line_no), line_no);
    }
    s.screen_on = screen == 1;
    if (!trace.samples.empty()) {
      if (s.t_ms < trace.samples.back().t_ms)
        throw Error(ErrorCode::NonMonotonicTime, path + " line " + std::to_string(line_no),
                    line_no);
      if (s.t_ms == trace.samples.back().t_ms) {
        trace.samples.back() = s;  // last occurrence wins
        ++trace.duplicate_rows;
        continue;
      }
    }
    trace.samples.push_back(s);
  }
  if (trace.samples.empty()) throw Error(ErrorCode::EmptyTrace, path);

  if (trace.samples.size() >= 2 && trace.duration_ms() > 0) {
    trace.nominal_rate_hz = 1000.0 * static_cast<double>(trace.samples.size() - 1) /
                            static_cast<double>(trace.duration_ms());
  } else {
    trace.nominal_rate_hz = 1.0;
  }
  return trace;
}

void save_trace(const AccelTrace& trace, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::SerializationError, "cannot open " + path);
  out << "t_ms,x,y,z,screen_on\n";
  char buf[128];
  for (const auto& s : trace.samples) {
    auto write_field = [&](double v) {
      auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
      (void)ec;
      out.write(buf, ptr - buf);
    };
    out << s.t_ms << ',';
    write_field(s.x);
    out << ',';
    write_field(s.y);
    out << ',';
    write_field(s.z);
    out << ',' << (s.screen_on ? 1 : 0) << '\n';
  }
  if (!out) throw Error(ErrorCode::SerializationError, "write failed for " + path);
}

}  // namespace auth
