// SPDX-License-Identifier: Apache-2.0
//
// Hand-written captures with fully worked-out expectations, plus small
// builders for constructing traces inline in tests.

#pragma once

#include <string>
#include <vector>

#include "h2mux/trace_model.hpp"

namespace fixtures {

using namespace h2mux;

inline FrameSegment seg(uint32_t stream, FrameType ftype, uint64_t frame_len,
                        uint64_t off, uint64_t len) {
  FrameSegment s;
  s.stream_id = stream;
  s.frame_type = ftype;
  s.frame_len = frame_len;
  s.seg_offset = off;
  s.seg_len = len;
  return s;
}

inline TlsRecordEvent rec(Direction dir, double t, uint64_t wire,
                          uint64_t content,
                          std::vector<FrameSegment> segs = {}) {
  TlsRecordEvent r;
  r.dir = dir;
  r.t = t;
  r.wire_len = wire;
  r.content_len = content;
  r.segments = std::move(segs);
  return r;
}

inline ConnectionTrace conn(std::string id, Protocol proto,
                            std::vector<TlsRecordEvent> records,
                            std::string server = "srv0:443") {
  ConnectionTrace c;
  c.conn_id = std::move(id);
  c.server = std::move(server);
  c.protocol = proto;
  c.records = std::move(records);
  return c;
}

inline Capture capture(std::string id, std::vector<ConnectionTrace> conns,
                       std::string site = "site-0.example",
                       std::string day = "2017-05-01") {
  Capture c;
  c.capture_id = std::move(id);
  c.site = std::move(site);
  c.day = std::move(day);
  c.connections = std::move(conns);
  return c;
}

// Three responses on one connection: stream 1 alone first, then streams 2
// and 3 with overlapping extents. Worked out by hand:
//   response byte space (s2c records with HEADERS/DATA, signaling excluded):
//     [0,33) ovh   [33,133) hdr1    [133,157) ovh  [157,1657) data1
//     [1657,1681) ovh [1681,3181) data1
//     [3181,3214) ovh [3214,3304) hdr2  [3304,3328) ovh [3328,4328) data2
//     [4328,4361) ovh [4361,4431) hdr3  [4431,4455) ovh [4455,5155) data3
//     [5155,5179) ovh [5179,6179) data2 [6179,6203) ovh [6203,7003) data3
//   extents: s1 [33,3180], s2 [3214,6178], s3 [4361,7002]
//   data sizes: 3000 / 2000 / 1500
//   one pipelining segment [33,7003), streams {1,2,3}, size 6970
//     (requests 2 and 3 are pending when stream 1 finishes at byte 3180)
//   one multiplexing segment [4361,6179), streams {2,3}, size 1818, parent 0
//   no multi-stream records; classes: 1 pipelined, 2 and 3 multiplexed
inline Capture toy_capture() {
  const uint64_t kWirePad = 5;
  auto w = [&](uint64_t content) { return content + kWirePad; };
  std::vector<TlsRecordEvent> rs = {
      rec(Direction::C2S, 0.05, w(39), 39, {seg(0, FrameType::Settings, 15, 0, 15)}),
      rec(Direction::C2S, 0.10, w(83), 83, {seg(1, FrameType::Headers, 50, 0, 50)}),
      rec(Direction::S2C, 0.11, w(39), 39, {seg(0, FrameType::Settings, 15, 0, 15)}),
      rec(Direction::S2C, 0.20, w(133), 133, {seg(1, FrameType::Headers, 100, 0, 100)}),
      rec(Direction::S2C, 0.30, w(1524), 1524, {seg(1, FrameType::Data, 1500, 0, 1500)}),
      rec(Direction::C2S, 0.35, w(83), 83, {seg(2, FrameType::Headers, 50, 0, 50)}),
      rec(Direction::C2S, 0.36, w(83), 83, {seg(3, FrameType::Headers, 50, 0, 50)}),
      rec(Direction::S2C, 0.40, w(1524), 1524, {seg(1, FrameType::Data, 1500, 0, 1500)}),
      rec(Direction::S2C, 0.45, w(123), 123, {seg(2, FrameType::Headers, 90, 0, 90)}),
      rec(Direction::S2C, 0.50, w(1024), 1024, {seg(2, FrameType::Data, 1000, 0, 1000)}),
      rec(Direction::S2C, 0.55, w(103), 103, {seg(3, FrameType::Headers, 70, 0, 70)}),
      rec(Direction::S2C, 0.60, w(724), 724, {seg(3, FrameType::Data, 700, 0, 700)}),
      rec(Direction::S2C, 0.65, w(1024), 1024, {seg(2, FrameType::Data, 1000, 0, 1000)}),
      rec(Direction::S2C, 0.70, w(824), 824, {seg(3, FrameType::Data, 800, 0, 800)}),
  };
  return capture("toy", {conn("toy-c0", Protocol::Http2Tls, std::move(rs))});
}

// Two connections built for exact byte-share ratios. All records have zero
// framing overhead (content equals carried bytes) so every count is exact:
//   http1_tls: one 1000-byte s2c record        -> encrypted 2000 total
//   http2_tls: 1000 s2c bytes; segment [0,200) is stream 1 alone, segment
//   [200,1000) carries streams 3 and 5 whose extents overlap on [520,680)
//   -> h2/enc = 1000/2000, pipelined/h2 = 800/1000, mux/pipelined = 160/800.
inline Capture byte_shares_capture() {
  std::vector<TlsRecordEvent> h1 = {
      rec(Direction::S2C, 0.2, 1000, 1000),
  };
  std::vector<TlsRecordEvent> h2 = {
      rec(Direction::C2S, 0.5, 50, 50, {seg(1, FrameType::Headers, 50, 0, 50)}),
      rec(Direction::S2C, 1.0, 200, 200, {seg(1, FrameType::Data, 200, 0, 200)}),
      rec(Direction::C2S, 2.0, 50, 50, {seg(3, FrameType::Headers, 50, 0, 50)}),
      rec(Direction::C2S, 2.1, 50, 50, {seg(5, FrameType::Headers, 50, 0, 50)}),
      rec(Direction::S2C, 3.0, 320, 320, {seg(3, FrameType::Data, 320, 0, 320)}),
      rec(Direction::S2C, 3.2, 160, 160,
          {seg(5, FrameType::Data, 80, 0, 80), seg(3, FrameType::Data, 80, 0, 80)}),
      rec(Direction::S2C, 3.4, 320, 320, {seg(5, FrameType::Data, 320, 0, 320)}),
  };
  return capture("shares", {conn("shares-c0", Protocol::Http1Tls, std::move(h1)),
                            conn("shares-c1", Protocol::Http2Tls, std::move(h2))});
}

}  // namespace fixtures
