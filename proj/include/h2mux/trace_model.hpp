// SPDX-License-Identifier: Apache-2.0
//
// Core data model for client-side TLS record traces of HTTP/2 traffic.
//
// A trace file is line-delimited: one JSON object per line, with three
// record kinds:
//
//   {"kind":"capture","capture_id":...,"site":...,"day":...}
//   {"kind":"conn","capture_id":...,"conn_id":...,"server":...,"protocol":...}
//   {"kind":"rec","conn_id":...,"dir":"c2s"|"s2c","t":...,"wire_len":...,
//    "content_len":...,"segs":[{"stream":..,"ftype":..,"frame_len":..,
//    "off":..,"len":..},...]}
//
// "segs" is the ground-truth mapping from the encrypted record to the HTTP/2
// frame segments it carries.  An eavesdropper's view of the same trace has
// empty "segs" arrays and protocol "tls" (see attacker_view).

#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace h2mux {

// ---------------------------------------------------------------------------
// Errors

// Malformed or inconsistent trace input (bad line, bad reference, bad time).
class TraceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Structurally valid input whose frame bookkeeping is self-contradictory
// (frame segments that overlap, leave gaps, or never complete).
class IntegrityError : public TraceError {
 public:
  using TraceError::TraceError;
};

// An operation was invoked on data that violates its stated precondition.
class PreconditionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid configuration (generator or attack parameters).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Enums

enum class Direction { C2S, S2C };

enum class Protocol { Plain, Http1Tls, Http2Tls, Tls };

enum class FrameType { Data, Headers, Settings, WindowUpdate, RstStream, Other };

const char* to_string(Direction d);
const char* to_string(Protocol p);
const char* to_string(FrameType f);

Direction direction_from_string(const std::string& s);
Protocol protocol_from_string(const std::string& s);
FrameType frame_type_from_string(const std::string& s);

// ---------------------------------------------------------------------------
// Trace types

// One contiguous piece of an HTTP/2 frame as carried inside a TLS record.
// A frame of frame_len bytes may be split across records; its segments,
// ordered by record time, tile [0, frame_len) exactly.
struct FrameSegment {
  uint32_t stream_id = 0;
  FrameType frame_type = FrameType::Other;
  uint64_t frame_len = 0;   // length of the whole frame payload
  uint64_t seg_offset = 0;  // offset of this piece inside the frame
  uint64_t seg_len = 0;     // length of this piece

  bool operator==(const FrameSegment&) const = default;
};

// One TLS record as observed at the client.
struct TlsRecordEvent {
  Direction dir = Direction::S2C;
  double t = 0.0;            // capture-relative seconds (serialized at 1us)
  uint64_t wire_len = 0;     // bytes on the wire
  uint64_t content_len = 0;  // plaintext record length (<= wire_len)
  std::vector<FrameSegment> segments;  // empty when ground truth is withheld

  bool operator==(const TlsRecordEvent&) const = default;
};

struct ConnectionTrace {
  std::string conn_id;
  std::string server;  // endpoint label, e.g. "host:port"
  Protocol protocol = Protocol::Tls;
  std::vector<TlsRecordEvent> records;  // non-decreasing t

  bool operator==(const ConnectionTrace&) const = default;
};

struct Capture {
  std::string capture_id;
  std::string site;
  std::string day;  // calendar date string, e.g. "2017-05-01"
  std::vector<ConnectionTrace> connections;

  bool operator==(const Capture&) const = default;
};

// One web object: the response carried by a single HTTP/2 stream.
struct WebObject {
  uint32_t stream_id = 0;
  uint64_t data_size = 0;         // actual size: response DATA payload bytes
  uint64_t resp_header_size = 0;  // response HEADERS payload bytes
  std::optional<double> req_record_time;  // last c2s record with request HEADERS
  double first_byte_time = 0.0;   // first s2c record carrying response bytes
  double last_byte_time = 0.0;    // last s2c record carrying response bytes
  std::vector<size_t> record_refs;  // s2c record indices carrying this stream

  bool operator==(const WebObject&) const = default;
};

// ---------------------------------------------------------------------------
// Operations

// Parses a line-delimited trace.  Blank lines are skipped; unknown object
// fields are ignored.  Throws TraceError naming the offending line and field,
// and IntegrityError for broken frame tiling.  Empty input yields {}.
std::vector<Capture> parse_trace(std::istream& in);
std::vector<Capture> parse_trace_file(const std::string& path);

// Serializes captures in the canonical field order with timestamps printed
// at microsecond precision.  Output is deterministic: serializing the same
// value twice yields byte-identical text, and parse(write(x)) == x for any
// value whose timestamps are microsecond-aligned.
void write_trace(const std::vector<Capture>& captures, std::ostream& out);
std::string write_trace_string(const std::vector<Capture>& captures);
void write_trace_file(const std::vector<Capture>& captures, const std::string& path);

// Checks structural invariants: unique connection ids, content_len <= wire_len,
// segment sums <= content_len, non-decreasing timestamps, segments only on
// http2_tls connections, and exact frame tiling per (direction, stream).
void validate_capture(const Capture& capture);

// What an on-path observer of the ciphertext sees: identical metadata,
// timestamps and lengths, but no frame segments and no protocol knowledge
// beyond "encrypted" vs "plain".
Capture attacker_view(const Capture& capture);

// Reconstructs the web objects of one HTTP/2 connection from ground truth.
// An object exists for every stream that carried response HEADERS or DATA
// bytes; data_size counts each DATA frame's payload once even when the frame
// spans several records.  Objects are ordered by (first_byte_time, stream_id).
// Requires protocol == Http2Tls (PreconditionError otherwise); throws
// IntegrityError on broken frame tiling.
std::vector<WebObject> build_objects(const ConnectionTrace& conn);

}  // namespace h2mux
