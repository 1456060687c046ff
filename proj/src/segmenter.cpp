// SPDX-License-Identifier: Apache-2.0

#include "h2mux/segmenter.hpp"

#include <algorithm>

namespace h2mux {

const char* to_string(ObjectClass c) {
  switch (c) {
    case ObjectClass::Plain: return "plain";
    case ObjectClass::Pipelined: return "pipelined";
    case ObjectClass::Multiplexed: return "multiplexed";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// Byte space

uint64_t ResponseByteSpace::data_bytes_in(uint64_t start, uint64_t end, uint32_t owner) const {
  // Runs are sorted by start; find the first run that may overlap.
  auto it = std::partition_point(runs.begin(), runs.end(),
                                 [&](const ByteRun& r) { return r.end() <= start; });
  uint64_t sum = 0;
  for (; it != runs.end() && it->start < end; ++it) {
    if (it->kind != ByteKind::Data) continue;
    if (owner != 0 && it->owner != owner) continue;
    const uint64_t lo = std::max(start, it->start);
    const uint64_t hi = std::min(end, it->end());
    if (hi > lo) sum += hi - lo;
  }
  return sum;
}

ResponseByteSpace build_response_byte_space(const ConnectionTrace& conn) {
  if (conn.protocol != Protocol::Http2Tls)
    throw PreconditionError("segment detection requires an http2_tls connection, got '" +
                            std::string(to_string(conn.protocol)) + "' on '" + conn.conn_id +
                            "'");

  ResponseByteSpace space;
  std::map<uint32_t, StreamExtent> extents;
  std::map<uint32_t, double> req_time;

  for (size_t i = 0; i < conn.records.size(); ++i) {
    const TlsRecordEvent& rec = conn.records[i];
    if (rec.dir == Direction::C2S) {
      for (const FrameSegment& seg : rec.segments)
        if (seg.frame_type == FrameType::Headers) req_time[seg.stream_id] = rec.t;
      continue;
    }
    bool carries_response = false;
    uint64_t seg_sum = 0;
    for (const FrameSegment& seg : rec.segments) {
      seg_sum += seg.seg_len;
      if (seg.frame_type == FrameType::Headers || seg.frame_type == FrameType::Data)
        carries_response = true;
    }
    if (!carries_response) continue;

    auto push_run = [&](uint64_t len, ByteKind kind, uint32_t owner) {
      if (len == 0) return;
      ByteRun run;
      run.start = space.total;
      run.len = len;
      run.record_idx = i;
      run.t = rec.t;
      run.kind = kind;
      run.owner = owner;
      space.total += len;
      space.runs.push_back(run);
    };

    push_run(rec.content_len - seg_sum, ByteKind::Overhead, 0);
    for (const FrameSegment& seg : rec.segments) {
      ByteKind kind = ByteKind::Signal;
      uint32_t owner = 0;
      if (seg.frame_type == FrameType::Data) {
        kind = ByteKind::Data;
        owner = seg.stream_id;
      } else if (seg.frame_type == FrameType::Headers) {
        kind = ByteKind::Header;
        owner = seg.stream_id;
      }
      const uint64_t run_start = space.total;
      push_run(seg.seg_len, kind, owner);
      if ((kind == ByteKind::Data || kind == ByteKind::Header) && seg.seg_len > 0) {
        auto [it, fresh] = extents.try_emplace(seg.stream_id);
        if (fresh) {
          it->second.stream_id = seg.stream_id;
          it->second.first = run_start;
        }
        it->second.last = run_start + seg.seg_len - 1;
      }
    }
  }

  for (auto& [sid, ext] : extents) {
    auto rt = req_time.find(sid);
    if (rt != req_time.end()) {
      ext.has_request = true;
      ext.req_t = rt->second;
    } else {
      space.streams_without_request.push_back(sid);
    }
    space.extents.push_back(ext);
  }
  std::sort(space.extents.begin(), space.extents.end(),
            [](const StreamExtent& a, const StreamExtent& b) { return a.first < b.first; });

  for (auto& [sid, t] : req_time) space.requests.emplace_back(t, sid);
  std::sort(space.requests.begin(), space.requests.end());

  return space;
}

// ---------------------------------------------------------------------------
// Segment detection

namespace {

// For the pending-request test: pending_horizon[i] is the furthest first
// response byte over the first i requests in time order; infinity when some
// request never gets a response.  A request is "pending at (p, t_r)" when it
// was sent at or before t_r and its response starts after byte p.
std::vector<uint64_t> pending_horizons(const ResponseByteSpace& space) {
  constexpr uint64_t kNever = UINT64_MAX;
  std::map<uint32_t, uint64_t> first_byte;
  for (const StreamExtent& e : space.extents) first_byte[e.stream_id] = e.first;

  std::vector<uint64_t> horizons;
  horizons.reserve(space.requests.size() + 1);
  horizons.push_back(0);
  uint64_t running = 0;
  for (const auto& [t, sid] : space.requests) {
    auto it = first_byte.find(sid);
    const uint64_t h = it == first_byte.end() ? kNever : it->second;
    running = std::max(running, h);
    horizons.push_back(running);
  }
  return horizons;
}

}  // namespace

SegmentationResult detect_segments(const ConnectionTrace& conn) {
  const ResponseByteSpace space = build_response_byte_space(conn);
  SegmentationResult result;
  result.streams_without_request = space.streams_without_request;

  const std::vector<uint64_t> horizons = pending_horizons(space);
  auto pending_after = [&](uint64_t p, double t_r) {
    // Number of requests with req_t <= t_r.
    const size_t n = std::partition_point(space.requests.begin(), space.requests.end(),
                                          [&](const auto& rq) { return rq.first <= t_r; }) -
                     space.requests.begin();
    return horizons[n] > p;
  };

  // Sweep owned runs, tracking how far the started streams extend.
  size_t next_extent = 0;
  uint64_t active_until = 0;  // max inclusive last byte of started streams
  bool open = false;
  PipeliningSegment cur;

  for (const ByteRun& run : space.runs) {
    if (!run.owned()) continue;
    if (!open) {
      open = true;
      cur = PipeliningSegment{};
      cur.start = run.start;
    }
    cur.streams.insert(run.owner);
    const uint64_t p = run.end() - 1;
    while (next_extent < space.extents.size() && space.extents[next_extent].first <= p) {
      active_until = std::max(active_until, space.extents[next_extent].last);
      ++next_extent;
    }
    if (active_until <= p && !pending_after(p, run.t)) {
      cur.end = p + 1;
      cur.size = cur.end - cur.start;
      result.pipelining_segments.push_back(std::move(cur));
      open = false;
    }
  }
  if (open) {
    // Unanswered requests hold the final segment open; close at the last
    // response byte so coverage stays total.
    uint64_t last_owned = cur.start;
    for (auto it = space.runs.rbegin(); it != space.runs.rend(); ++it)
      if (it->owned()) {
        last_owned = it->end();
        break;
      }
    cur.end = last_owned;
    cur.size = cur.end - cur.start;
    result.pipelining_segments.push_back(std::move(cur));
  }

  // Multiplexing segments: change points of the active-stream set.
  std::vector<std::pair<uint64_t, std::pair<bool, uint32_t>>> events;  // (pos, (is_add, sid))
  for (const StreamExtent& e : space.extents) {
    events.push_back({e.first, {true, e.stream_id}});
    events.push_back({e.last + 1, {false, e.stream_id}});
  }
  std::sort(events.begin(), events.end());

  std::set<uint32_t> active;
  size_t ei = 0;
  size_t parent = 0;
  while (ei < events.size()) {
    const uint64_t pos = events[ei].first;
    while (ei < events.size() && events[ei].first == pos) {
      if (events[ei].second.first) active.insert(events[ei].second.second);
      else active.erase(events[ei].second.second);
      ++ei;
    }
    if (active.size() < 2) continue;
    const uint64_t next_pos = events[ei].first;  // a removal event always remains
    while (parent + 1 < result.pipelining_segments.size() &&
           result.pipelining_segments[parent].end <= pos)
      ++parent;
    MultiplexingSegment m;
    m.start = pos;
    m.end = next_pos;
    m.streams = active;
    m.parent = parent;
    m.size = m.end - m.start;
    result.multiplexing_segments.push_back(std::move(m));
  }

  // Records whose segments span two or more distinct stream ids.
  for (size_t i = 0; i < conn.records.size(); ++i) {
    const TlsRecordEvent& rec = conn.records[i];
    if (rec.dir != Direction::S2C || rec.segments.empty()) continue;
    uint32_t first_sid = rec.segments.front().stream_id;
    bool multi = false;
    for (const FrameSegment& seg : rec.segments)
      if (seg.stream_id != first_sid) {
        multi = true;
        break;
      }
    if (multi) result.multiplexing_record_ids.push_back(i);
  }

  result.per_object_class = classify_objects(result);
  return result;
}

std::map<uint32_t, ObjectClass> classify_objects(const SegmentationResult& seg) {
  std::map<uint32_t, ObjectClass> out;
  for (const PipeliningSegment& p : seg.pipelining_segments) {
    const ObjectClass base = p.streams.size() >= 2 ? ObjectClass::Pipelined : ObjectClass::Plain;
    for (uint32_t sid : p.streams) out[sid] = base;
  }
  for (const MultiplexingSegment& m : seg.multiplexing_segments)
    for (uint32_t sid : m.streams) out[sid] = ObjectClass::Multiplexed;
  return out;
}

}  // namespace h2mux
