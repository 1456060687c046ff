// SPDX-License-Identifier: Apache-2.0

#include "h2mux/estimators.hpp"

#include <algorithm>
#include <cmath>

namespace h2mux {

const char* to_string(AssumptionLevel level) {
  switch (level) {
    case AssumptionLevel::A1: return "A1";
    case AssumptionLevel::A2: return "A2";
    case AssumptionLevel::A3: return "A3";
  }
  return "?";
}

AssumptionLevel assumption_from_string(const std::string& s) {
  if (s == "A1" || s == "a1") return AssumptionLevel::A1;
  if (s == "A2" || s == "a2") return AssumptionLevel::A2;
  if (s == "A3" || s == "a3") return AssumptionLevel::A3;
  throw ConfigError("unknown assumption level '" + s + "'");
}

// ---------------------------------------------------------------------------
// Baseline

std::vector<ErrorSample> baseline_estimate(const ConnectionTrace& conn) {
  const SegmentationResult seg = detect_segments(conn);
  for (const PipeliningSegment& p : seg.pipelining_segments)
    if (p.streams.size() >= 2)
      throw PreconditionError("baseline estimate requires unshared responses; stream " +
                              std::to_string(*p.streams.begin()) +
                              " shares a pipelining segment with " +
                              std::to_string(p.streams.size() - 1) + " other stream(s)");

  std::vector<ErrorSample> out;
  for (const WebObject& obj : build_objects(conn)) {
    if (obj.data_size == 0) continue;
    uint64_t s_est = 0;
    for (size_t idx : obj.record_refs) s_est += conn.records[idx].content_len;
    ErrorSample s;
    s.stream_id = obj.stream_id;
    s.s_act = obj.data_size;
    s.s_est = s_est;
    s.e = (static_cast<double>(s_est) - static_cast<double>(obj.data_size)) /
          static_cast<double>(obj.data_size);
    out.push_back(s);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Worst-case bounds

namespace {

uint64_t measure(const ResponseByteSpace& space, uint64_t start, uint64_t end, bool adjusted) {
  if (end <= start) return 0;
  return adjusted ? space.data_bytes_in(start, end) : end - start;
}

std::vector<SizeBounds> bounds_a1(const ResponseByteSpace& space, const SegmentationResult& seg,
                                  bool adjusted) {
  std::vector<SizeBounds> out;
  for (const PipeliningSegment& p : seg.pipelining_segments) {
    const uint64_t size = measure(space, p.start, p.end, adjusted);
    for (uint32_t sid : p.streams) {
      SizeBounds b;
      b.stream_id = sid;
      b.level = AssumptionLevel::A1;
      b.adjusted = adjusted;
      b.high = size;
      b.low = p.streams.size() == 1 ? size : 0;
      out.push_back(b);
    }
  }
  return out;
}

std::vector<SizeBounds> bounds_a2(const ResponseByteSpace& space, const SegmentationResult& seg,
                                  bool adjusted) {
  std::vector<SizeBounds> out;
  for (const StreamExtent& ext : space.extents) {
    SizeBounds b;
    b.stream_id = ext.stream_id;
    b.level = AssumptionLevel::A2;
    b.adjusted = adjusted;

    // Sole-active bytes: the extent minus multiplexing segments; those
    // segments are exactly where a second stream is active alongside it.
    uint64_t cursor = ext.first;
    const uint64_t extent_end = ext.last + 1;
    uint64_t shared = 0;
    for (const MultiplexingSegment& m : seg.multiplexing_segments) {
      if (!m.streams.count(ext.stream_id)) continue;
      b.low += measure(space, cursor, m.start, adjusted);
      cursor = m.end;
      shared += measure(space, m.start, m.end, adjusted);
    }
    b.low += measure(space, cursor, extent_end, adjusted);
    b.high = b.low + shared;
    out.push_back(b);
  }
  return out;
}

std::vector<SizeBounds> bounds_a3(const ConnectionTrace& conn, const ResponseByteSpace& space,
                                  const SegmentationResult& seg, bool adjusted) {
  std::vector<bool> is_mux(conn.records.size(), false);
  for (size_t idx : seg.multiplexing_record_ids) is_mux[idx] = true;

  std::vector<SizeBounds> out;
  for (const StreamExtent& ext : space.extents) {
    SizeBounds b;
    b.stream_id = ext.stream_id;
    b.level = AssumptionLevel::A3;
    b.adjusted = adjusted;
    for (size_t i = 0; i < conn.records.size(); ++i) {
      const TlsRecordEvent& rec = conn.records[i];
      if (rec.dir != Direction::S2C || rec.segments.empty()) continue;
      bool carries = false;
      bool exclusive = true;
      uint64_t data = 0;
      for (const FrameSegment& s : rec.segments) {
        if (s.stream_id == ext.stream_id) {
          carries = true;
          if (s.frame_type == FrameType::Data) data += s.seg_len;
        } else {
          exclusive = false;
        }
      }
      if (!carries) continue;
      if (exclusive) b.low += adjusted ? data : rec.content_len;
      else if (is_mux[i]) b.high += rec.content_len;
    }
    b.high += b.low;
    out.push_back(b);
  }
  return out;
}

}  // namespace

std::vector<SizeBounds> worst_case_bounds(const ConnectionTrace& conn,
                                          const SegmentationResult& seg, AssumptionLevel level,
                                          bool adjusted) {
  const ResponseByteSpace space = build_response_byte_space(conn);
  std::vector<SizeBounds> out;
  switch (level) {
    case AssumptionLevel::A1: out = bounds_a1(space, seg, adjusted); break;
    case AssumptionLevel::A2: out = bounds_a2(space, seg, adjusted); break;
    case AssumptionLevel::A3: out = bounds_a3(conn, space, seg, adjusted); break;
  }
  std::sort(out.begin(), out.end(),
            [](const SizeBounds& a, const SizeBounds& b) { return a.stream_id < b.stream_id; });
  return out;
}

ErrorSample relative_error(const SizeBounds& bounds, uint64_t s_act) {
  if (s_act == 0)
    throw PreconditionError("relative error undefined for zero-size object; stream " +
                            std::to_string(bounds.stream_id));
  const uint64_t d_low = bounds.low > s_act ? bounds.low - s_act : s_act - bounds.low;
  const uint64_t d_high = bounds.high > s_act ? bounds.high - s_act : s_act - bounds.high;
  const uint64_t s_est = d_high >= d_low ? bounds.high : bounds.low;
  ErrorSample s;
  s.stream_id = bounds.stream_id;
  s.s_act = s_act;
  s.s_est = s_est;
  s.e = (static_cast<double>(s_est) - static_cast<double>(s_act)) / static_cast<double>(s_act);
  return s;
}

std::vector<ErrorSample> worst_case_errors(const ConnectionTrace& conn, AssumptionLevel level,
                                           bool adjusted) {
  const SegmentationResult seg = detect_segments(conn);
  const ResponseByteSpace space = build_response_byte_space(conn);
  std::vector<ErrorSample> out;
  for (const SizeBounds& b : worst_case_bounds(conn, seg, level, adjusted)) {
    const uint64_t s_act = space.data_bytes_in(0, space.total, b.stream_id);
    if (s_act == 0) continue;
    out.push_back(relative_error(b, s_act));
  }
  return out;
}

}  // namespace h2mux
