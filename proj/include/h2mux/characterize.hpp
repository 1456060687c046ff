// SPDX-License-Identifier: Apache-2.0
//
// Corpus-level distributional reports over ground-truth traces: how objects
// map to frames, segments, and records, and how far pipelining and
// multiplexing reach per capture and per object-size range.

#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "h2mux/indicators.hpp"
#include "h2mux/segmenter.hpp"
#include "h2mux/trace_model.hpp"

namespace h2mux {

using Histogram = std::map<uint64_t, uint64_t>;
// Multiset of sample values (value -> count); an exact ECDF source.
using ValueCounts = std::map<double, uint64_t>;
// Distributions keyed by an exact integer attribute (e.g. frame count).
using CdfFamily = std::map<uint64_t, ValueCounts>;

// defaults to merging maps by summing counts
void merge_into(Histogram& into, const Histogram& from);
void merge_into(ValueCounts& into, const ValueCounts& from);
void merge_into(CdfFamily& into, const CdfFamily& from);

// ECDF points (value, cumulative fraction) of a value-count multiset.
std::vector<std::pair<double, double>> ecdf_points(const ValueCounts& counts);

// ---------------------------------------------------------------------------
// Structure report

struct CharacterizationReport {
  Histogram connections_per_endpoint;  // HTTP/2 connections per (capture, server)
  Histogram objects_per_connection;
  Histogram frames_per_object;    // DATA frames per object
  Histogram segments_per_frame;   // segments per DATA frame
  CdfFamily object_size_cdf_by_frames;   // object DATA bytes, keyed by frame count
  CdfFamily frame_size_cdf_by_segments;  // DATA frame length, keyed by segment count
  // content_len minus carried segment bytes, for s2c records with a DATA
  // segment (data) or only HEADERS/signaling with at least one HEADERS
  // segment (header); signaling-only records are not counted.
  Histogram data_record_overhead;
  Histogram header_record_overhead;

  CharacterizationReport& merge(const CharacterizationReport& o);
  bool operator==(const CharacterizationReport&) const = default;
};

// Exact recount over all http2_tls connections; other protocols are skipped.
CharacterizationReport characterize(const std::vector<Capture>& captures);

// ---------------------------------------------------------------------------
// Extent report

// Object-size buckets: (0,10] (including empty objects), (10,100],
// (100,1k], (1k,10k], >10k bytes of response DATA.
inline constexpr size_t kSizeRanges = 5;
size_t size_range_index(uint64_t size);
const char* size_range_label(size_t idx);

struct SizeRangeStats {
  uint64_t objects = 0;
  uint64_t pipelined = 0;       // in a >= 2-stream pipelining segment (includes multiplexed)
  uint64_t multiplexed = 0;
  uint64_t single_segment = 0;  // carried in at most one DATA frame segment
  Histogram conn_mates;         // objects-in-same-connection count, per object

  SizeRangeStats& merge(const SizeRangeStats& o);
  bool operator==(const SizeRangeStats&) const = default;
};

struct ExtentReport {
  // Per-capture byte-share values; a ratio whose denominator is zero
  // contributes 0 (a capture with no HTTP/2 bytes has no pipelined bytes).
  ValueCounts h2_share, pipe_share, mux_share;
  std::array<SizeRangeStats, kSizeRanges> ranges;
  Histogram pipelining_stream_counts;    // |streams| per pipelining segment
  Histogram multiplexing_stream_counts;  // |streams| per multiplexing segment

  ExtentReport& merge(const ExtentReport& o);
  bool operator==(const ExtentReport&) const = default;
};

// Corpus segmentation keyed capture_id -> conn_id.
using CorpusSegmentation = std::map<std::string, std::map<std::string, SegmentationResult>>;
CorpusSegmentation segment_corpus(const std::vector<Capture>& captures);

ExtentReport extent_report(const std::vector<Capture>& captures,
                           const CorpusSegmentation& segs);

}  // namespace h2mux
