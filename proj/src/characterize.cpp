// SPDX-License-Identifier: Apache-2.0

#include "h2mux/characterize.hpp"

#include <algorithm>

namespace h2mux {

void merge_into(Histogram& into, const Histogram& from) {
  for (const auto& [k, n] : from) into[k] += n;
}

void merge_into(ValueCounts& into, const ValueCounts& from) {
  for (const auto& [v, n] : from) into[v] += n;
}

void merge_into(CdfFamily& into, const CdfFamily& from) {
  for (const auto& [k, vc] : from) merge_into(into[k], vc);
}

std::vector<std::pair<double, double>> ecdf_points(const ValueCounts& counts) {
  uint64_t total = 0;
  for (const auto& [v, n] : counts) total += n;
  std::vector<std::pair<double, double>> pts;
  pts.reserve(counts.size());
  uint64_t seen = 0;
  for (const auto& [v, n] : counts) {
    seen += n;
    pts.emplace_back(v, static_cast<double>(seen) / static_cast<double>(total));
  }
  return pts;
}

CharacterizationReport& CharacterizationReport::merge(const CharacterizationReport& o) {
  merge_into(connections_per_endpoint, o.connections_per_endpoint);
  merge_into(objects_per_connection, o.objects_per_connection);
  merge_into(frames_per_object, o.frames_per_object);
  merge_into(segments_per_frame, o.segments_per_frame);
  merge_into(object_size_cdf_by_frames, o.object_size_cdf_by_frames);
  merge_into(frame_size_cdf_by_segments, o.frame_size_cdf_by_segments);
  merge_into(data_record_overhead, o.data_record_overhead);
  merge_into(header_record_overhead, o.header_record_overhead);
  return *this;
}

namespace {

struct DataFrame {
  uint64_t frame_len = 0;
  uint64_t segments = 0;
};

}  // namespace

CharacterizationReport characterize(const std::vector<Capture>& captures) {
  CharacterizationReport rep;
  for (const Capture& cap : captures) {
    std::map<std::string, uint64_t> per_endpoint;
    for (const ConnectionTrace& conn : cap.connections) {
      if (conn.protocol != Protocol::Http2Tls) continue;
      per_endpoint[conn.server] += 1;

      std::map<uint32_t, std::vector<DataFrame>> frames;
      for (const TlsRecordEvent& rec : conn.records) {
        if (rec.dir != Direction::S2C) continue;
        uint64_t carried = 0;
        bool has_data = false, has_header = false;
        for (const FrameSegment& seg : rec.segments) {
          carried += seg.seg_len;
          if (seg.frame_type == FrameType::Data) {
            has_data = true;
            auto& fs = frames[seg.stream_id];
            if (seg.seg_offset == 0) fs.push_back({seg.frame_len, 0});
            fs.back().segments += 1;
          } else if (seg.frame_type == FrameType::Headers) {
            has_header = true;
          }
        }
        if (has_data) {
          rep.data_record_overhead[rec.content_len - carried] += 1;
        } else if (has_header) {
          rep.header_record_overhead[rec.content_len - carried] += 1;
        }
      }

      std::vector<WebObject> objects = build_objects(conn);
      rep.objects_per_connection[objects.size()] += 1;
      for (const WebObject& obj : objects) {
        const auto it = frames.find(obj.stream_id);
        const size_t n_frames = it == frames.end() ? 0 : it->second.size();
        rep.frames_per_object[n_frames] += 1;
        rep.object_size_cdf_by_frames[n_frames]
                                     [static_cast<double>(obj.data_size)] += 1;
      }
      for (const auto& [stream, fs] : frames) {
        for (const DataFrame& f : fs) {
          rep.segments_per_frame[f.segments] += 1;
          rep.frame_size_cdf_by_segments[f.segments]
                                        [static_cast<double>(f.frame_len)] += 1;
        }
      }
    }
    for (const auto& [server, n] : per_endpoint)
      rep.connections_per_endpoint[n] += 1;
  }
  return rep;
}

// ---------------------------------------------------------------------------

size_t size_range_index(uint64_t size) {
  if (size <= 10) return 0;
  if (size <= 100) return 1;
  if (size <= 1000) return 2;
  if (size <= 10000) return 3;
  return 4;
}

const char* size_range_label(size_t idx) {
  static const char* kLabels[kSizeRanges] = {"(0,10]", "(10,100]", "(100,1k]",
                                             "(1k,10k]", ">10k"};
  return kLabels[idx];
}

SizeRangeStats& SizeRangeStats::merge(const SizeRangeStats& o) {
  objects += o.objects;
  pipelined += o.pipelined;
  multiplexed += o.multiplexed;
  single_segment += o.single_segment;
  merge_into(conn_mates, o.conn_mates);
  return *this;
}

ExtentReport& ExtentReport::merge(const ExtentReport& o) {
  merge_into(h2_share, o.h2_share);
  merge_into(pipe_share, o.pipe_share);
  merge_into(mux_share, o.mux_share);
  for (size_t i = 0; i < kSizeRanges; ++i) ranges[i].merge(o.ranges[i]);
  merge_into(pipelining_stream_counts, o.pipelining_stream_counts);
  merge_into(multiplexing_stream_counts, o.multiplexing_stream_counts);
  return *this;
}

CorpusSegmentation segment_corpus(const std::vector<Capture>& captures) {
  CorpusSegmentation out;
  for (const Capture& cap : captures) out[cap.capture_id] = segment_capture(cap);
  return out;
}

ExtentReport extent_report(const std::vector<Capture>& captures,
                           const CorpusSegmentation& segs) {
  ExtentReport rep;
  for (const Capture& cap : captures) {
    const auto cap_it = segs.find(cap.capture_id);
    if (cap_it == segs.end())
      throw PreconditionError("no segmentation for capture " + cap.capture_id);

    NpoIndicators ind = npo_indicators(cap, cap_it->second);
    const ByteTotals& bt = ind.byte_totals;
    auto share = [](uint64_t num, uint64_t den) {
      return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
    };
    rep.h2_share[share(bt.h2_bytes, bt.enc_http_bytes)] += 1;
    rep.pipe_share[share(bt.pipelined_bytes, bt.h2_bytes)] += 1;
    rep.mux_share[share(bt.multiplexed_bytes, bt.pipelined_bytes)] += 1;

    for (const ConnectionTrace& conn : cap.connections) {
      if (conn.protocol != Protocol::Http2Tls) continue;
      const SegmentationResult& sr = cap_it->second.at(conn.conn_id);

      for (const PipeliningSegment& ps : sr.pipelining_segments)
        rep.pipelining_stream_counts[ps.streams.size()] += 1;
      for (const MultiplexingSegment& ms : sr.multiplexing_segments)
        rep.multiplexing_stream_counts[ms.streams.size()] += 1;

      std::map<uint32_t, uint64_t> data_segs;
      for (const TlsRecordEvent& rec : conn.records) {
        if (rec.dir != Direction::S2C) continue;
        for (const FrameSegment& seg : rec.segments)
          if (seg.frame_type == FrameType::Data) data_segs[seg.stream_id] += 1;
      }

      std::vector<WebObject> objects = build_objects(conn);
      for (const WebObject& obj : objects) {
        SizeRangeStats& rs = rep.ranges[size_range_index(obj.data_size)];
        rs.objects += 1;
        const auto cls_it = sr.per_object_class.find(obj.stream_id);
        const ObjectClass cls = cls_it == sr.per_object_class.end()
                                    ? ObjectClass::Plain
                                    : cls_it->second;
        if (cls != ObjectClass::Plain) rs.pipelined += 1;
        if (cls == ObjectClass::Multiplexed) rs.multiplexed += 1;
        const auto ds_it = data_segs.find(obj.stream_id);
        if (ds_it == data_segs.end() || ds_it->second <= 1) rs.single_segment += 1;
        rs.conn_mates[objects.size()] += 1;
      }
    }
  }
  return rep;
}

}  // namespace h2mux
