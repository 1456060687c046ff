// SPDX-License-Identifier: Apache-2.0
//
// Pipelining/multiplexing structure of one HTTP/2 connection, derived from
// ground-truth frame segments.
//
// All byte offsets live in the connection's response byte space: the
// concatenated content bytes of server-to-client records that carry at least
// one response (HEADERS or DATA) segment, each record laid out as
// [record overhead][segments in record order].  Records carrying only
// signaling frames contribute no bytes to this space.

#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "h2mux/trace_model.hpp"

namespace h2mux {

// ---------------------------------------------------------------------------
// Response byte space

enum class ByteKind { Overhead, Header, Data, Signal };

// A maximal run of bytes with one label: a record's overhead bytes or one
// frame segment.  Runs appear in byte-space order.
struct ByteRun {
  uint64_t start = 0;
  uint64_t len = 0;
  size_t record_idx = 0;  // index into ConnectionTrace::records
  double t = 0.0;         // that record's timestamp
  ByteKind kind = ByteKind::Overhead;
  uint32_t owner = 0;     // stream id for Header/Data runs, 0 otherwise

  bool owned() const { return kind == ByteKind::Header || kind == ByteKind::Data; }
  uint64_t end() const { return start + len; }
};

// The span of one stream's response bytes.
struct StreamExtent {
  uint32_t stream_id = 0;
  uint64_t first = 0;  // offset of the first Header/Data byte
  uint64_t last = 0;   // offset of the last Header/Data byte (inclusive)
  bool has_request = false;
  double req_t = 0.0;  // time of the last c2s record carrying request HEADERS
};

struct ResponseByteSpace {
  uint64_t total = 0;  // content bytes of all response-carrying s2c records
  std::vector<ByteRun> runs;
  std::vector<StreamExtent> extents;          // sorted by first byte
  std::vector<std::pair<double, uint32_t>> requests;  // (req_t, stream), sorted
  std::vector<uint32_t> streams_without_request;      // responses with no request

  // Data bytes within [start, end); owner 0 means any stream.
  uint64_t data_bytes_in(uint64_t start, uint64_t end, uint32_t owner = 0) const;
};

// Requires protocol == Http2Tls (PreconditionError otherwise).
ResponseByteSpace build_response_byte_space(const ConnectionTrace& conn);

// ---------------------------------------------------------------------------
// Segments

// A maximal interval over which the server is continuously answering: it
// opens at a response byte arriving when nothing was in flight, and closes
// after a byte at which no stream is mid-response and no sent request still
// awaits its first response byte.  Requests that never receive a response
// hold the segment open to the end of the connection.
struct PipeliningSegment {
  uint64_t start = 0;
  uint64_t end = 0;  // half-open
  std::set<uint32_t> streams;
  uint64_t size = 0;  // end - start

  bool operator==(const PipeliningSegment&) const = default;
};

// A maximal interval with an unchanging set of two or more active streams
// (a stream is active between its first and last response byte, inclusive).
// Always nested in one pipelining segment.
struct MultiplexingSegment {
  uint64_t start = 0;
  uint64_t end = 0;
  std::set<uint32_t> streams;  // |streams| >= 2
  size_t parent = 0;           // index into pipelining_segments
  uint64_t size = 0;

  bool operator==(const MultiplexingSegment&) const = default;
};

enum class ObjectClass { Plain, Pipelined, Multiplexed };

const char* to_string(ObjectClass c);

struct SegmentationResult {
  std::vector<PipeliningSegment> pipelining_segments;
  std::vector<MultiplexingSegment> multiplexing_segments;
  // s2c records whose segments span >= 2 distinct stream ids (0 included).
  std::vector<size_t> multiplexing_record_ids;
  std::map<uint32_t, ObjectClass> per_object_class;
  std::vector<uint32_t> streams_without_request;

  bool operator==(const SegmentationResult&) const = default;
};

// Requires ground-truth segments and protocol == Http2Tls.  Deterministic.
// Every response byte falls in exactly one pipelining segment; multiplexing
// segments are change-point intervals of the active-stream set.
SegmentationResult detect_segments(const ConnectionTrace& conn);

// multiplexed: appears in some multiplexing segment; pipelined: shares its
// pipelining segment with another stream but is never multiplexed;
// plain: alone in its pipelining segment.
std::map<uint32_t, ObjectClass> classify_objects(const SegmentationResult& seg);

}  // namespace h2mux
