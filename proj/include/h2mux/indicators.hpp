// SPDX-License-Identifier: Apache-2.0
//
// Per-capture byte-share indicators of HTTP/2 adoption, pipelining, and
// multiplexing, plus their per-day and per-site aggregation.

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "h2mux/segmenter.hpp"
#include "h2mux/stats.hpp"
#include "h2mux/trace_model.hpp"

namespace h2mux {

struct ByteTotals {
  uint64_t enc_http_bytes = 0;   // s2c content on encrypted connections
  uint64_t h2_bytes = 0;         // s2c content of records carrying HTTP/2 frames
  uint64_t pipelined_bytes = 0;  // bytes of pipelining segments with >= 2 streams
  uint64_t multiplexed_bytes = 0;  // bytes of multiplexing segments

  ByteTotals& operator+=(const ByteTotals& o);
  bool operator==(const ByteTotals&) const = default;
};

// Each ratio divides adjacent totals; a 0/0 quotient is reported absent.
struct NpoIndicators {
  std::optional<double> h2_over_enc;
  std::optional<double> pipe_over_h2;
  std::optional<double> mux_over_pipe;
  ByteTotals byte_totals;

  bool operator==(const NpoIndicators&) const = default;
};

// Segmentation for every http2_tls connection of the capture, keyed by
// conn_id (the form npo_indicators and extent_report consume).
std::map<std::string, SegmentationResult> segment_capture(const Capture& capture);

// PreconditionError if an http2_tls connection is missing from segs.
NpoIndicators npo_indicators(const Capture& capture,
                             const std::map<std::string, SegmentationResult>& segs);

struct IndicatorRow {
  std::string site;
  std::string day;
  NpoIndicators indicators;
};

struct DailyAggregate {
  std::string day;
  size_t captures = 0;
  size_t sites = 0;                 // distinct sites seen this day
  double capture_proportion = 0.0;  // captures / max captures on any day
  double site_proportion = 0.0;     // sites / distinct sites in the corpus
  ByteTotals totals;                // summed, so ratios are byte-weighted
  std::optional<double> h2_over_enc;
  std::optional<double> pipe_over_h2;
  std::optional<double> mux_over_pipe;
};

struct SiteSummary {
  struct RatioStats {
    size_t n = 0;  // captures where the ratio was defined
    double mean = 0.0;
    Quartiles q;
  };
  std::string site;
  size_t captures = 0;
  RatioStats h2_over_enc, pipe_over_h2, mux_over_pipe;
};

struct AggregatedIndicators {
  std::vector<DailyAggregate> days;   // sorted by day
  std::vector<SiteSummary> sites;     // sorted by site
};

// Permutation-invariant over rows; throws PreconditionError on empty input.
AggregatedIndicators aggregate_indicators(const std::vector<IndicatorRow>& rows);

}  // namespace h2mux
