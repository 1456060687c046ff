// SPDX-License-Identifier: Apache-2.0
//
// Synthetic HTTP/2-over-TLS capture generator.  Produces client-side record
// traces with full ground truth (frame segments on every record) under
// configurable request scheduling, object sizes, and timing.

#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "h2mux/trace_model.hpp"

namespace h2mux {

// ---------------------------------------------------------------------------
// Distributions

enum class DistKind { Constant, UniformInt, UniformReal, LogUniform, LogNormal, Exponential };

// A small closed family of scalar distributions, sampled with explicit
// transforms over a shared mt19937_64 so results are reproducible across
// platforms.  LogNormal consumes two engine draws, everything else one.
struct DistSpec {
  DistKind kind = DistKind::Constant;
  double a = 0.0;  // value | lo | mu | mean
  double b = 0.0;  // hi | sigma

  static DistSpec constant(double v) { return {DistKind::Constant, v, 0.0}; }
  static DistSpec uniform_int(double lo, double hi) { return {DistKind::UniformInt, lo, hi}; }
  static DistSpec uniform_real(double lo, double hi) { return {DistKind::UniformReal, lo, hi}; }
  static DistSpec loguniform(double lo, double hi) { return {DistKind::LogUniform, lo, hi}; }
  static DistSpec lognormal(double mu, double sigma) { return {DistKind::LogNormal, mu, sigma}; }
  static DistSpec exponential(double mean) { return {DistKind::Exponential, mean, 0.0}; }

  void validate(const std::string& what) const;  // ConfigError on bad parameters
  double sample(std::mt19937_64& rng) const;
  // Rounds to the nearest integer and clamps below at zero.
  uint64_t sample_count(std::mt19937_64& rng) const;

  bool operator==(const DistSpec&) const = default;
};

// ---------------------------------------------------------------------------
// Configuration

enum class Policy { Sequential, Pipelined, RoundRobin };

const char* to_string(Policy p);
Policy policy_from_string(const std::string& s);

// All byte quantities are plaintext record content unless noted.  Signal
// lengths (end_signal_len, pre_signal_len) are full record content lengths;
// zero disables the record.
struct SynthConfig {
  // Traffic shape.
  uint64_t n_connections = 1;
  DistSpec objects_per_connection = DistSpec::constant(1);
  DistSpec object_size = DistSpec::loguniform(100, 1e6);
  Policy policy = Policy::Sequential;

  // Record geometry.
  uint64_t max_frame = 16384;          // largest DATA frame payload
  uint64_t data_seg_target = 1381;     // record-sized slice of a DATA frame
  uint64_t data_record_overhead = 24;  // content_len - payload for DATA records
  uint64_t header_record_overhead = 33;  // content_len - payload for HEADERS records
  DistSpec header_size = DistSpec::uniform_int(70, 280);  // HEADERS payload bytes

  // Timing.
  double rtt = 0.03;                     // request-to-first-response floor, seconds
  DistSpec think_time = DistSpec::constant(0);  // client gap before a request, seconds
  double bandwidth = 2.5e6;              // link rate, bytes/second, both directions
  uint64_t seed = 1;

  // Signaling and labeling.
  uint64_t n_endpoints = 2;       // connections cycle over this many server labels
  uint64_t end_signal_len = 41;   // content of the per-response trailing signal record
  uint64_t pre_signal_len = 0;    // content of an optional signal before each response
  bool mix_records = false;       // fold the end signal into the last response record
  std::string capture_id = "cap-0";
  std::string site = "site-0.example";
  std::string day = "2017-05-01";
};

void validate_config(const SynthConfig& cfg);  // ConfigError with the offending field

// Parses a config given as one JSON object.  Numbers may stand in for
// constant distributions; distribution objects use
// {"kind":"uniform_int","lo":..,"hi":..} and kind-appropriate parameter
// names.  Unknown keys are rejected.
SynthConfig synth_config_from_json(const std::string& text);
SynthConfig synth_config_from_file(const std::string& path);
std::string synth_config_to_json(const SynthConfig& cfg);

// ---------------------------------------------------------------------------
// Generation

// How one object's DATA bytes split into frames and record-sized segments.
struct FramePlan {
  uint64_t frame_len = 0;
  std::vector<uint64_t> seg_lens;  // sums to frame_len, each <= data_seg_target

  bool operator==(const FramePlan&) const = default;
};

// Splits `size` payload bytes into frames of at most max_frame bytes, each
// tiled by segments of at most data_seg_target bytes; remainders ride in the
// final frame and final segment.  size 0 yields no frames.
std::vector<FramePlan> packetize_object(uint64_t size, const SynthConfig& cfg);

struct ObjectTruth {
  uint32_t stream_id = 0;
  uint64_t size = 0;          // DATA payload bytes
  double req_send_t = 0.0;    // client-side request record time
  double first_resp_t = 0.0;  // response HEADERS record time
  double last_resp_t = 0.0;   // last record carrying response bytes
};

struct ConnTruth {
  std::string conn_id;
  std::vector<ObjectTruth> objects;
};

struct GroundTruth {
  std::vector<ConnTruth> connections;
};

struct SynthResult {
  Capture capture;
  GroundTruth truth;
};

// Deterministic in cfg (including seed).  The emitted capture always passes
// validate_capture; every DATA-bearing record satisfies
// content_len - sum(seg_len) == data_record_overhead unless mix_records
// folded a signal frame into it.
SynthResult generate_with_truth(const SynthConfig& cfg);
Capture generate_capture(const SynthConfig& cfg);

}  // namespace h2mux
