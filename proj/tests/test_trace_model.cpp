// SPDX-License-Identifier: Apache-2.0

#include <sstream>

#include "doctest.h"
#include "fixtures.hpp"
#include "h2mux/synth.hpp"
#include "h2mux/trace_model.hpp"

using namespace h2mux;

namespace {

std::vector<Capture> reparse(const std::vector<Capture>& caps) {
  std::istringstream in(write_trace_string(caps));
  return parse_trace(in);
}

}  // namespace

TEST_CASE("write/parse round-trips the toy capture exactly") {
  const std::vector<Capture> caps = {fixtures::toy_capture()};
  CHECK(reparse(caps) == caps);
}

TEST_CASE("record lines use the fixed key order and 6-digit timestamps") {
  const std::string text = write_trace_string({fixtures::toy_capture()});
  CHECK(text.find("{\"kind\":\"capture\",\"capture_id\":\"toy\",\"site\":") == 0);
  CHECK(text.find("{\"kind\":\"conn\",\"capture_id\":\"toy\",\"conn_id\":\"toy-c0\","
                  "\"server\":\"srv0:443\",\"protocol\":\"http2_tls\"}") !=
        std::string::npos);
  CHECK(text.find("{\"kind\":\"rec\",\"conn_id\":\"toy-c0\",\"dir\":\"c2s\","
                  "\"t\":0.050000,\"wire_len\":44,\"content_len\":39,\"segs\":"
                  "[{\"stream\":0,\"ftype\":\"SETTINGS\",\"frame_len\":15,"
                  "\"off\":0,\"len\":15}]}") != std::string::npos);
}

TEST_CASE("parser rejects malformed input with the line number") {
  auto expect_failure = [](const std::string& text, const std::string& needle) {
    std::istringstream in(text);
    try {
      parse_trace(in);
      FAIL_CHECK("expected parse failure for: " << text);
    } catch (const TraceError& e) {
      CHECK(std::string(e.what()).find(needle) != std::string::npos);
    }
  };

  expect_failure("not json\n", "line 1");
  expect_failure(R"({"kind":"widget"})" "\n", "kind");
  expect_failure(
      R"({"kind":"conn","capture_id":"x","conn_id":"c","server":"s","protocol":"http2_tls"})"
      "\n",
      "capture");
  const std::string cap =
      R"({"kind":"capture","capture_id":"x","site":"s","day":"2017-05-01"})" "\n";
  const std::string conn =
      R"({"kind":"conn","capture_id":"x","conn_id":"c","server":"s","protocol":"http2_tls"})"
      "\n";
  expect_failure(cap + cap, "duplicate");
  expect_failure(cap + conn + conn, "duplicate");
  expect_failure(
      cap + conn +
          R"({"kind":"rec","conn_id":"nope","dir":"s2c","t":0.1,"wire_len":10,"content_len":5,"segs":[]})"
          "\n",
      "unknown conn");
  expect_failure(
      cap + conn +
          R"({"kind":"rec","conn_id":"c","dir":"s2c","t":0.2,"wire_len":10,"content_len":5,"segs":[]})"
          "\n" +
          R"({"kind":"rec","conn_id":"c","dir":"s2c","t":0.1,"wire_len":10,"content_len":5,"segs":[]})"
          "\n",
      "regression");
}

TEST_CASE("validation rejects impossible records") {
  using namespace fixtures;

  SUBCASE("content larger than wire") {
    Capture c = capture("v", {conn("v-c0", Protocol::Http2Tls,
                                   {rec(Direction::S2C, 0.1, 10, 11)})});
    CHECK_THROWS_AS(validate_capture(c), IntegrityError);
  }
  SUBCASE("segment bytes exceed record content") {
    Capture c = capture(
        "v", {conn("v-c0", Protocol::Http2Tls,
                   {rec(Direction::S2C, 0.1, 100, 50,
                        {seg(1, FrameType::Data, 60, 0, 60)})})});
    CHECK_THROWS_AS(validate_capture(c), IntegrityError);
  }
  SUBCASE("segments on a non-http2 connection") {
    Capture c = capture(
        "v", {conn("v-c0", Protocol::Http1Tls,
                   {rec(Direction::S2C, 0.1, 100, 50,
                        {seg(1, FrameType::Data, 10, 0, 10)})})});
    CHECK_THROWS_AS(validate_capture(c), IntegrityError);
  }
  SUBCASE("frame pieces must tile the frame in order") {
    Capture c = capture(
        "v", {conn("v-c0", Protocol::Http2Tls,
                   {rec(Direction::S2C, 0.1, 100, 50,
                        {seg(1, FrameType::Data, 20, 5, 10)})})});
    CHECK_THROWS_AS(validate_capture(c), IntegrityError);
  }
  SUBCASE("frame left dangling at end of connection") {
    Capture c = capture(
        "v", {conn("v-c0", Protocol::Http2Tls,
                   {rec(Direction::S2C, 0.1, 100, 50,
                        {seg(1, FrameType::Data, 20, 0, 10)})})});
    CHECK_THROWS_AS(validate_capture(c), IntegrityError);
  }
  SUBCASE("split frames are fine when the pieces tile") {
    Capture c = capture(
        "v", {conn("v-c0", Protocol::Http2Tls,
                   {rec(Direction::S2C, 0.1, 100, 34,
                        {seg(1, FrameType::Data, 20, 0, 10)}),
                    rec(Direction::S2C, 0.2, 100, 34,
                        {seg(1, FrameType::Data, 20, 10, 10)})})});
    CHECK_NOTHROW(validate_capture(c));
  }
}

TEST_CASE("attacker view strips frame metadata and hides the protocol") {
  const Capture full = fixtures::toy_capture();
  const Capture stripped = attacker_view(full);
  REQUIRE(stripped.connections.size() == 1);
  const ConnectionTrace& c = stripped.connections[0];
  CHECK(c.protocol == Protocol::Tls);
  REQUIRE(c.records.size() == full.connections[0].records.size());
  for (size_t i = 0; i < c.records.size(); ++i) {
    const TlsRecordEvent& a = c.records[i];
    const TlsRecordEvent& b = full.connections[0].records[i];
    CHECK(a.segments.empty());
    CHECK(a.dir == b.dir);
    CHECK(a.t == b.t);
    CHECK(a.wire_len == b.wire_len);
    CHECK(a.content_len == b.content_len);
  }

  Capture plain = fixtures::capture(
      "p", {fixtures::conn("p-c0", Protocol::Plain,
                           {fixtures::rec(Direction::S2C, 0.1, 10, 10)})});
  CHECK(attacker_view(plain).connections[0].protocol == Protocol::Plain);
}

TEST_CASE("build_objects extracts the toy capture's three responses") {
  const Capture cap = fixtures::toy_capture();
  const std::vector<WebObject> objs = build_objects(cap.connections[0]);
  REQUIRE(objs.size() == 3);

  CHECK(objs[0].stream_id == 1);
  CHECK(objs[0].data_size == 3000);
  CHECK(objs[0].resp_header_size == 100);
  REQUIRE(objs[0].req_record_time.has_value());
  CHECK(*objs[0].req_record_time == doctest::Approx(0.10));
  CHECK(objs[0].first_byte_time == doctest::Approx(0.20));
  CHECK(objs[0].last_byte_time == doctest::Approx(0.40));
  CHECK(objs[0].record_refs == std::vector<size_t>{3, 4, 7});

  CHECK(objs[1].stream_id == 2);
  CHECK(objs[1].data_size == 2000);
  CHECK(objs[1].resp_header_size == 90);
  CHECK(objs[1].record_refs == std::vector<size_t>{8, 9, 12});
  CHECK(objs[1].first_byte_time == doctest::Approx(0.45));
  CHECK(objs[1].last_byte_time == doctest::Approx(0.65));

  CHECK(objs[2].stream_id == 3);
  CHECK(objs[2].data_size == 1500);
  CHECK(objs[2].record_refs == std::vector<size_t>{10, 11, 13});
}

TEST_CASE("objects exist only for streams with response bytes") {
  using namespace fixtures;
  // Request on stream 5 never answered; stream 7 answered with headers only.
  Capture c = capture(
      "o", {conn("o-c0", Protocol::Http2Tls,
                 {rec(Direction::C2S, 0.1, 60, 55,
                      {seg(5, FrameType::Headers, 20, 0, 20)}),
                  rec(Direction::C2S, 0.2, 60, 55,
                      {seg(7, FrameType::Headers, 20, 0, 20)}),
                  rec(Direction::S2C, 0.3, 80, 73,
                      {seg(7, FrameType::Headers, 40, 0, 40)})})});
  const std::vector<WebObject> objs = build_objects(c.connections[0]);
  REQUIRE(objs.size() == 1);
  CHECK(objs[0].stream_id == 7);
  CHECK(objs[0].data_size == 0);
  CHECK(objs[0].resp_header_size == 40);
}

TEST_CASE("generator output survives write/parse unchanged") {
  SynthConfig cfg;
  cfg.n_connections = 2;
  cfg.objects_per_connection = DistSpec::uniform_int(1, 4);
  cfg.object_size = DistSpec::loguniform(10, 20000);
  for (uint64_t seed : {11u, 12u, 13u}) {
    cfg.seed = seed;
    cfg.policy = seed % 2 ? Policy::RoundRobin : Policy::Pipelined;
    const std::vector<Capture> caps = {generate_capture(cfg)};
    CHECK(reparse(caps) == caps);
    CHECK(write_trace_string(reparse(caps)) == write_trace_string(caps));
  }
}
