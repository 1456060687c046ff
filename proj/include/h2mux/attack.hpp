// SPDX-License-Identifier: Apache-2.0
//
// Eavesdropper-side response detection: from TLS record sizes and timing
// alone (no frame metadata), guess where responses start and end inside a
// connection, estimate their sizes, and score the guesses against ground
// truth. Server deployments differ, so every threshold is a parameter.

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "h2mux/estimators.hpp"
#include "h2mux/trace_model.hpp"

namespace h2mux {

struct AttackParams {
  double abs_gap = 0.5;        // seconds: a gap this large always splits
  double gap_factor = 20.0;    // multiple of the mean normalized gap that splits
  uint64_t norm_record = 1500; // gap normalization reference record size
  uint64_t signal_max = 60;    // content below this (exclusive) is signaling
  uint64_t end_marker = 41;    // content equal to this ends a response
  uint64_t header_lo = 70;     // inclusive band of response-header record sizes
  uint64_t header_hi = 350;
  // Expected initial s2c content lengths; empty matches every connection.
  std::vector<uint64_t> fingerprint;

  bool operator==(const AttackParams&) const = default;
};

void validate_params(const AttackParams& p);
AttackParams attack_params_from_json(const std::string& text);
AttackParams attack_params_from_file(const std::string& path);
std::string attack_params_to_json(const AttackParams& p);

// How a record reads to the eavesdropper, by content length alone.
enum class RecordClass { Signal, End, Header, Body };
RecordClass classify_record(uint64_t content_len, const AttackParams& p);

// One guessed response. Positions index the connection's s2c record
// subsequence (0-based). An overlapped finding shares its [start, end] span
// with another; its size is judged unreliable and withheld from outputs.
struct AttackFinding {
  std::string conn_id;
  uint64_t est_size = 0;
  size_t start_pos = 0;
  size_t end_pos = 0;
  double header_time = 0.0;  // timestamp of the start record
  bool overlapped = false;

  bool operator==(const AttackFinding&) const = default;
};

// True iff the first s2c content lengths equal the fingerprint.
bool fingerprint_match(const ConnectionTrace& conn, const AttackParams& p);

// Inclusive s2c-position ranges split at timing gaps. A boundary falls
// between consecutive s2c records when the gap exceeds abs_gap, or exceeds
// gap_factor times the connection's mean normalized gap (each gap scaled by
// norm_record / wire length of the earlier record).
struct RecordRange {
  size_t first = 0;
  size_t last = 0;

  bool operator==(const RecordRange&) const = default;
};
std::vector<RecordRange> segment_by_gaps(const ConnectionTrace& conn,
                                         const AttackParams& p);

// Detect responses inside each gap range. A header-band record opens a
// response when the previous record was signaling or an end marker (or at
// the range start); ends close the oldest open response; responses still
// open at the range end close there. est_size sums the content of
// non-signaling records strictly between the start record and the closing
// end marker (through the range end, inclusive, when unterminated).
std::vector<AttackFinding> find_responses(const ConnectionTrace& conn,
                                          const AttackParams& p);

// find_responses over every fingerprint-matched TLS connection.
std::map<std::string, std::vector<AttackFinding>> attack_corpus(
    const std::vector<Capture>& captures, const AttackParams& p);

struct ConnOutcome {
  std::string conn_id;
  uint64_t found = 0;
  uint64_t actual = 0;
  int64_t count_diff = 0;  // found - actual
  uint64_t pipelined = 0;  // objects in >= 2-stream pipelining segments, not multiplexed
  uint64_t multiplexed = 0;
};

struct AttackEval {
  std::vector<ConnOutcome> connections;
  // Size errors for connections whose found count equals the actual count:
  // the i-th finding (by header_time) is paired with the i-th object (by
  // first response byte); overlapped findings and empty objects are skipped.
  std::vector<ErrorSample> errors;
  // Pearson correlation of count_diff with the per-connection pipelined and
  // multiplexed object counts; absent when degenerate (constant input).
  std::optional<double> count_vs_pipelined;
  std::optional<double> count_vs_multiplexed;
};

// Scores findings against the ground-truth corpus the attacker-view traces
// came from. Only connections present in `findings` are evaluated.
AttackEval evaluate_attack(
    const std::map<std::string, std::vector<AttackFinding>>& findings,
    const std::vector<Capture>& truth);

}  // namespace h2mux
