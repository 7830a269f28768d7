#include <functional>
#include <string>

#include "auth/error.hpp"
#include "auth/trace.hpp"
#include "doctest.h"
#include "helpers.hpp"

using auth::AccelTrace;
using auth::Error;
using auth::ErrorCode;
using testutil::TempDir;

namespace {

bool throws_code(ErrorCode code, const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code() == code;
  }
  return false;
}

}  // namespace

TEST_CASE("trace csv round trip preserves every field bit for bit") {
  TempDir dir("trace_rt");
  AccelTrace trace;
  trace.user_id = "alice";
  trace.samples = {
      {0, 0.1, -0.2, 9.81, true},
      {41, 0.30000000000000004, -0.1999999999999999, -9.80665, false},
      {83, 1e-17, 2.5e300, -2.5e-300, true},
      {1000, -0.0, 0.0, 123456.789, false},
  };
  auth::save_trace(trace, dir.file("alice.csv"));
  const AccelTrace loaded = auth::load_trace(dir.file("alice.csv"));

  REQUIRE(loaded.samples.size() == trace.samples.size());
  CHECK(loaded.user_id == "alice");
  for (std::size_t i = 0; i < trace.samples.size(); ++i) {
    CHECK(loaded.samples[i].t_ms == trace.samples[i].t_ms);
    CHECK(loaded.samples[i].x == trace.samples[i].x);
    CHECK(loaded.samples[i].y == trace.samples[i].y);
    CHECK(loaded.samples[i].z == trace.samples[i].z);
    CHECK(loaded.samples[i].screen_on == trace.samples[i].screen_on);
  }
}

TEST_CASE("user id defaults to the file stem") {
  TempDir dir("trace_stem");
  testutil::write_file(dir.file("bob.csv"), "t_ms,x,y,z,screen_on\n0,1,2,3,0\n");
  CHECK(auth::load_trace(dir.file("bob.csv")).user_id == "bob");
}

TEST_CASE("missing file reports FileNotFound") {
  CHECK(throws_code(ErrorCode::FileNotFound, [] { auth::load_trace("/nonexistent/x.csv"); }));
}

TEST_CASE("malformed rows name the line") {
  TempDir dir("trace_bad");

  SUBCASE("wrong header") {
    testutil::write_file(dir.file("t.csv"), "time,x,y,z,screen\n0,1,2,3,0\n");
    CHECK(throws_code(ErrorCode::MalformedRow, [&] { auth::load_trace(dir.file("t.csv")); }));
  }
  SUBCASE("non-numeric field") {
    testutil::write_file(dir.file("t.csv"), "t_ms,x,y,z,screen_on\n0,abc,2,3,0\n");
    try {
      auth::load_trace(dir.file("t.csv"));
      FAIL("expected throw");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::MalformedRow);
      CHECK(e.line() == 2);
    }
  }
  SUBCASE("missing field") {
    testutil::write_file(dir.file("t.csv"), "t_ms,x,y,z,screen_on\n0,1,2,3\n");
    CHECK(throws_code(ErrorCode::MalformedRow, [&] { auth::load_trace(dir.file("t.csv")); }));
  }
  SUBCASE("screen flag outside 0/1") {
    testutil::write_file(dir.file("t.csv"), "t_ms,x,y,z,screen_on\n0,1,2,3,2\n");
    CHECK(throws_code(ErrorCode::MalformedRow, [&] { auth::load_trace(dir.file("t.csv")); }));
  }
  SUBCASE("negative timestamp") {
    testutil::write_file(dir.file("t.csv"), "t_ms,x,y,z,screen_on\n-5,1,2,3,0\n");
    CHECK(throws_code(ErrorCode::MalformedRow, [&] { auth::load_trace(dir.file("t.csv")); }));
  }
  SUBCASE("non-finite value") {
    testutil::write_file(dir.file("t.csv"), "t_ms,x,y,z,screen_on\n0,inf,2,3,0\n");
    CHECK(throws_code(ErrorCode::MalformedRow, [&] { auth::load_trace(dir.file("t.csv")); }));
  }
}

TEST_CASE("decreasing timestamps report NonMonotonicTime") {
  TempDir dir("trace_mono");
  testutil::write_file(dir.file("t.csv"), "t_ms,x,y,z,screen_on\n10,1,2,3,0\n5,1,2,3,0\n");
  CHECK(throws_code(ErrorCode::NonMonotonicTime, [&] { auth::load_trace(dir.file("t.csv")); }));
}

TEST_CASE("duplicate timestamps collapse to the last occurrence") {
  TempDir dir("trace_dup");
  testutil::write_file(dir.file("t.csv"),
                       "t_ms,x,y,z,screen_on\n0,1,1,1,0\n0,9,9,9,1\n40,2,2,2,0\n");
  const AccelTrace t = auth::load_trace(dir.file("t.csv"));
  REQUIRE(t.samples.size() == 2);
  CHECK(t.duplicate_rows == 1);
  CHECK(t.samples[0].x == 9.0);
  CHECK(t.samples[0].screen_on == true);
}

TEST_CASE("empty data reports EmptyTrace") {
  TempDir dir("trace_empty");
  testutil::write_file(dir.file("t.csv"), "t_ms,x,y,z,screen_on\n");
  CHECK(throws_code(ErrorCode::EmptyTrace, [&] { auth::load_trace(dir.file("t.csv")); }));
}

TEST_CASE("blank lines and trailing CR are tolerated") {
  TempDir dir("trace_crlf");
  testutil::write_file(dir.file("t.csv"),
                       "t_ms,x,y,z,screen_on\r\n0,1,2,3,0\r\n\r\n40,4,5,6,1\r\n");
  const AccelTrace t = auth::load_trace(dir.file("t.csv"));
  REQUIRE(t.samples.size() == 2);
  CHECK(t.samples[1].y == 5.0);
  CHECK(t.samples[1].screen_on == true);
}

TEST_CASE("nominal rate is derived from span and count") {
  TempDir dir("trace_rate");
  testutil::write_file(dir.file("t.csv"),
                       "t_ms,x,y,z,screen_on\n0,0,0,0,0\n500,0,0,0,0\n1000,0,0,0,0\n");
  const AccelTrace t = auth::load_trace(dir.file("t.csv"));
  CHECK(t.duration_ms() == 1000);
  CHECK(t.nominal_rate_hz == doctest::Approx(2.0));
}
