// SPDX-License-Identifier: Apache-2.0

#include "h2mux/indicators.hpp"

#include <algorithm>
#include <set>

namespace h2mux {

ByteTotals& ByteTotals::operator+=(const ByteTotals& o) {
  enc_http_bytes += o.enc_http_bytes;
  h2_bytes += o.h2_bytes;
  pipelined_bytes += o.pipelined_bytes;
  multiplexed_bytes += o.multiplexed_bytes;
  return *this;
}

std::map<std::string, SegmentationResult> segment_capture(const Capture& capture) {
  std::map<std::string, SegmentationResult> out;
  for (const ConnectionTrace& conn : capture.connections)
    if (conn.protocol == Protocol::Http2Tls) out[conn.conn_id] = detect_segments(conn);
  return out;
}

namespace {

std::optional<double> ratio(uint64_t num, uint64_t den) {
  if (den == 0 && num == 0) return std::nullopt;
  return static_cast<double>(num) / static_cast<double>(den);
}

}  // namespace

NpoIndicators npo_indicators(const Capture& capture,
                             const std::map<std::string, SegmentationResult>& segs) {
  NpoIndicators ind;
  ByteTotals& t = ind.byte_totals;

  for (const ConnectionTrace& conn : capture.connections) {
    if (conn.protocol == Protocol::Plain) continue;
    for (const TlsRecordEvent& rec : conn.records) {
      if (rec.dir != Direction::S2C) continue;
      t.enc_http_bytes += rec.content_len;
      if (!rec.segments.empty()) t.h2_bytes += rec.content_len;
    }
    if (conn.protocol != Protocol::Http2Tls) continue;
    auto it = segs.find(conn.conn_id);
    if (it == segs.end())
      throw PreconditionError("missing segmentation for connection '" + conn.conn_id + "'");
    for (const PipeliningSegment& p : it->second.pipelining_segments)
      if (p.streams.size() >= 2) t.pipelined_bytes += p.size;
    for (const MultiplexingSegment& m : it->second.multiplexing_segments)
      t.multiplexed_bytes += m.size;
  }

  ind.h2_over_enc = ratio(t.h2_bytes, t.enc_http_bytes);
  ind.pipe_over_h2 = ratio(t.pipelined_bytes, t.h2_bytes);
  ind.mux_over_pipe = ratio(t.multiplexed_bytes, t.pipelined_bytes);
  return ind;
}

AggregatedIndicators aggregate_indicators(const std::vector<IndicatorRow>& rows) {
  if (rows.empty()) throw PreconditionError("aggregate_indicators needs at least one row");

  std::set<std::string> all_sites;
  for (const IndicatorRow& r : rows) all_sites.insert(r.site);

  // Per day: summed totals and distinct sites.
  std::map<std::string, DailyAggregate> days;
  std::map<std::string, std::set<std::string>> day_sites;
  for (const IndicatorRow& r : rows) {
    DailyAggregate& d = days[r.day];
    d.day = r.day;
    d.captures += 1;
    d.totals += r.indicators.byte_totals;
    day_sites[r.day].insert(r.site);
  }
  size_t max_daily = 0;
  for (const auto& [day, d] : days) max_daily = std::max(max_daily, d.captures);

  AggregatedIndicators agg;
  for (auto& [day, d] : days) {
    d.sites = day_sites[day].size();
    d.capture_proportion = static_cast<double>(d.captures) / static_cast<double>(max_daily);
    d.site_proportion = static_cast<double>(d.sites) / static_cast<double>(all_sites.size());
    auto ratio = [](uint64_t num, uint64_t den) -> std::optional<double> {
      if (den == 0 && num == 0) return std::nullopt;
      return static_cast<double>(num) / static_cast<double>(den);
    };
    d.h2_over_enc = ratio(d.totals.h2_bytes, d.totals.enc_http_bytes);
    d.pipe_over_h2 = ratio(d.totals.pipelined_bytes, d.totals.h2_bytes);
    d.mux_over_pipe = ratio(d.totals.multiplexed_bytes, d.totals.pipelined_bytes);
    agg.days.push_back(d);
  }

  // Per site: mean and quartiles over captures where each ratio is defined.
  std::map<std::string, std::vector<const IndicatorRow*>> by_site;
  for (const IndicatorRow& r : rows) by_site[r.site].push_back(&r);
  for (const auto& [site, site_rows] : by_site) {
    SiteSummary s;
    s.site = site;
    s.captures = site_rows.size();
    auto fill = [&](auto member) {
      SiteSummary::RatioStats st;
      std::vector<double> vals;
      for (const IndicatorRow* r : site_rows)
        if (auto v = r->indicators.*member) vals.push_back(*v);
      st.n = vals.size();
      if (!vals.empty()) {
        double sum = 0;
        for (double v : vals) sum += v;
        st.mean = sum / static_cast<double>(vals.size());
        st.q = quartiles(vals);
      }
      return st;
    };
    s.h2_over_enc = fill(&NpoIndicators::h2_over_enc);
    s.pipe_over_h2 = fill(&NpoIndicators::pipe_over_h2);
    s.mux_over_pipe = fill(&NpoIndicators::mux_over_pipe);
    agg.sites.push_back(std::move(s));
  }
  return agg;
}

}  // namespace h2mux
