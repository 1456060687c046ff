// SPDX-License-Identifier: Apache-2.0

#include "h2mux/trace_model.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <unordered_map>

#include "json.hpp"

namespace h2mux {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Enum <-> string

const char* to_string(Direction d) {
  return d == Direction::C2S ? "c2s" : "s2c";
}

const char* to_string(Protocol p) {
  switch (p) {
    case Protocol::Plain: return "plain";
    case Protocol::Http1Tls: return "http1_tls";
    case Protocol::Http2Tls: return "http2_tls";
    case Protocol::Tls: return "tls";
  }
  return "?";
}

const char* to_string(FrameType f) {
  switch (f) {
    case FrameType::Data: return "DATA";
    case FrameType::Headers: return "HEADERS";
    case FrameType::Settings: return "SETTINGS";
    case FrameType::WindowUpdate: return "WINDOW_UPDATE";
    case FrameType::RstStream: return "RST_STREAM";
    case FrameType::Other: return "OTHER";
  }
  return "?";
}

Direction direction_from_string(const std::string& s) {
  if (s == "c2s") return Direction::C2S;
  if (s == "s2c") return Direction::S2C;
  throw TraceError("unknown direction '" + s + "'");
}

Protocol protocol_from_string(const std::string& s) {
  if (s == "plain") return Protocol::Plain;
  if (s == "http1_tls") return Protocol::Http1Tls;
  if (s == "http2_tls") return Protocol::Http2Tls;
  if (s == "tls") return Protocol::Tls;
  throw TraceError("unknown protocol '" + s + "'");
}

FrameType frame_type_from_string(const std::string& s) {
  if (s == "DATA") return FrameType::Data;
  if (s == "HEADERS") return FrameType::Headers;
  if (s == "SETTINGS") return FrameType::Settings;
  if (s == "WINDOW_UPDATE") return FrameType::WindowUpdate;
  if (s == "RST_STREAM") return FrameType::RstStream;
  if (s == "OTHER") return FrameType::Other;
  throw TraceError("unknown frame type '" + s + "'");
}

// ---------------------------------------------------------------------------
// Parsing

namespace {

[[noreturn]] void fail_line(size_t line_no, const std::string& what) {
  throw TraceError("line " + std::to_string(line_no) + ": " + what);
}

const json& need_field(const json& j, const char* field, size_t line_no) {
  auto it = j.find(field);
  if (it == j.end()) fail_line(line_no, std::string("missing field '") + field + "'");
  return *it;
}

std::string get_string(const json& j, const char* field, size_t line_no) {
  const json& v = need_field(j, field, line_no);
  if (!v.is_string()) fail_line(line_no, std::string("field '") + field + "' must be a string");
  return v.get<std::string>();
}

uint64_t get_u64(const json& j, const char* field, size_t line_no) {
  const json& v = need_field(j, field, line_no);
  if (!v.is_number_unsigned() && !v.is_number_integer())
    fail_line(line_no, std::string("field '") + field + "' must be a non-negative integer");
  if (v.is_number_integer() && v.get<int64_t>() < 0)
    fail_line(line_no, std::string("field '") + field + "' must be non-negative");
  return v.get<uint64_t>();
}

double get_double(const json& j, const char* field, size_t line_no) {
  const json& v = need_field(j, field, line_no);
  if (!v.is_number()) fail_line(line_no, std::string("field '") + field + "' must be a number");
  return v.get<double>();
}

}  // namespace

std::vector<Capture> parse_trace(std::istream& in) {
  std::vector<Capture> captures;
  std::unordered_map<std::string, size_t> capture_index;
  // conn_id -> (capture index, connection index); ids must be file-unique so
  // that record lines resolve unambiguously.
  std::unordered_map<std::string, std::pair<size_t, size_t>> conn_index;

  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      fail_line(line_no, std::string("malformed JSON: ") + e.what());
    }
    if (!j.is_object()) fail_line(line_no, "expected a JSON object");
    const std::string kind = get_string(j, "kind", line_no);

    if (kind == "capture") {
      Capture cap;
      cap.capture_id = get_string(j, "capture_id", line_no);
      cap.site = get_string(j, "site", line_no);
      cap.day = get_string(j, "day", line_no);
      if (capture_index.count(cap.capture_id))
        fail_line(line_no, "duplicate capture_id '" + cap.capture_id + "'");
      capture_index[cap.capture_id] = captures.size();
      captures.push_back(std::move(cap));
    } else if (kind == "conn") {
      const std::string capture_id = get_string(j, "capture_id", line_no);
      auto cit = capture_index.find(capture_id);
      if (cit == capture_index.end())
        fail_line(line_no, "conn references unknown capture_id '" + capture_id + "'");
      ConnectionTrace conn;
      conn.conn_id = get_string(j, "conn_id", line_no);
      conn.server = get_string(j, "server", line_no);
      try {
        conn.protocol = protocol_from_string(get_string(j, "protocol", line_no));
      } catch (const TraceError& e) {
        fail_line(line_no, std::string("field 'protocol': ") + e.what());
      }
      if (conn_index.count(conn.conn_id))
        fail_line(line_no, "duplicate conn_id '" + conn.conn_id + "'");
      Capture& cap = captures[cit->second];
      conn_index[conn.conn_id] = {cit->second, cap.connections.size()};
      cap.connections.push_back(std::move(conn));
    } else if (kind == "rec") {
      const std::string conn_id = get_string(j, "conn_id", line_no);
      auto it = conn_index.find(conn_id);
      if (it == conn_index.end())
        fail_line(line_no, "rec references unknown conn_id '" + conn_id + "'");
      ConnectionTrace& conn = captures[it->second.first].connections[it->second.second];

      TlsRecordEvent rec;
      try {
        rec.dir = direction_from_string(get_string(j, "dir", line_no));
      } catch (const TraceError& e) {
        fail_line(line_no, std::string("field 'dir': ") + e.what());
      }
      rec.t = get_double(j, "t", line_no);
      rec.wire_len = get_u64(j, "wire_len", line_no);
      rec.content_len = get_u64(j, "content_len", line_no);
      const json& segs = need_field(j, "segs", line_no);
      if (!segs.is_array()) fail_line(line_no, "field 'segs' must be an array");
      for (const json& s : segs) {
        if (!s.is_object()) fail_line(line_no, "field 'segs' entries must be objects");
        FrameSegment seg;
        seg.stream_id = static_cast<uint32_t>(get_u64(s, "stream", line_no));
        try {
          seg.frame_type = frame_type_from_string(get_string(s, "ftype", line_no));
        } catch (const TraceError& e) {
          fail_line(line_no, std::string("field 'ftype': ") + e.what());
        }
        seg.frame_len = get_u64(s, "frame_len", line_no);
        seg.seg_offset = get_u64(s, "off", line_no);
        seg.seg_len = get_u64(s, "len", line_no);
        rec.segments.push_back(seg);
      }
      if (!conn.records.empty() && rec.t < conn.records.back().t)
        fail_line(line_no, "timestamp regression on connection '" + conn_id + "'");
      conn.records.push_back(std::move(rec));
    } else {
      fail_line(line_no, "field 'kind': unknown value '" + kind + "'");
    }
  }

  for (const Capture& cap : captures) validate_capture(cap);
  return captures;
}

std::vector<Capture> parse_trace_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw TraceError("cannot open trace file '" + path + "'");
  return parse_trace(in);
}

// ---------------------------------------------------------------------------
// Serialization

namespace {

std::string json_str(const std::string& s) { return json(s).dump(); }

void write_record(const TlsRecordEvent& rec, const std::string& conn_id, std::string& out) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", rec.t);
  out += "{\"kind\":\"rec\",\"conn_id\":";
  out += json_str(conn_id);
  out += ",\"dir\":\"";
  out += to_string(rec.dir);
  out += "\",\"t\":";
  out += buf;
  out += ",\"wire_len\":";
  out += std::to_string(rec.wire_len);
  out += ",\"content_len\":";
  out += std::to_string(rec.content_len);
  out += ",\"segs\":[";
  bool first = true;
  for (const FrameSegment& seg : rec.segments) {
    if (!first) out += ',';
    first = false;
    out += "{\"stream\":";
    out += std::to_string(seg.stream_id);
    out += ",\"ftype\":\"";
    out += to_string(seg.frame_type);
    out += "\",\"frame_len\":";
    out += std::to_string(seg.frame_len);
    out += ",\"off\":";
    out += std::to_string(seg.seg_offset);
    out += ",\"len\":";
    out += std::to_string(seg.seg_len);
    out += '}';
  }
  out += "]}\n";
}

}  // namespace

void write_trace(const std::vector<Capture>& captures, std::ostream& out) {
  out << write_trace_string(captures);
}

std::string write_trace_string(const std::vector<Capture>& captures) {
  std::string out;
  for (const Capture& cap : captures) {
    out += "{\"kind\":\"capture\",\"capture_id\":" + json_str(cap.capture_id) +
           ",\"site\":" + json_str(cap.site) + ",\"day\":" + json_str(cap.day) + "}\n";
    for (const ConnectionTrace& conn : cap.connections) {
      out += "{\"kind\":\"conn\",\"capture_id\":" + json_str(cap.capture_id) +
             ",\"conn_id\":" + json_str(conn.conn_id) + ",\"server\":" + json_str(conn.server) +
             ",\"protocol\":\"" + to_string(conn.protocol) + "\"}\n";
      for (const TlsRecordEvent& rec : conn.records) write_record(rec, conn.conn_id, out);
    }
  }
  return out;
}

void write_trace_file(const std::vector<Capture>& captures, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw TraceError("cannot open output file '" + path + "'");
  write_trace(captures, out);
}

// ---------------------------------------------------------------------------
// Validation

namespace {

// Tracks one in-flight frame per (direction, stream) and enforces that
// segments tile [0, frame_len) in record order.  on_frame_start fires once
// per frame, at its first segment.
class FrameWalker {
 public:
  explicit FrameWalker(const std::string& conn_id) : conn_id_(conn_id) {}

  template <typename F>
  void step(Direction dir, const FrameSegment& seg, F&& on_frame_start) {
    if (seg.seg_offset + seg.seg_len > seg.frame_len)
      throw IntegrityError("connection '" + conn_id_ + "': stream " +
                           std::to_string(seg.stream_id) + " segment exceeds frame length");
    Key key{dir, seg.stream_id};
    auto it = open_.find(key);
    if (it == open_.end()) {
      if (seg.seg_offset != 0)
        throw IntegrityError("connection '" + conn_id_ + "': stream " +
                             std::to_string(seg.stream_id) +
                             " frame begins at non-zero offset");
      on_frame_start(seg);
      if (seg.seg_len < seg.frame_len)
        open_[key] = Open{seg.frame_type, seg.frame_len, seg.seg_len};
    } else {
      Open& open = it->second;
      if (seg.seg_offset != open.next || seg.frame_len != open.frame_len ||
          seg.frame_type != open.type)
        throw IntegrityError("connection '" + conn_id_ + "': stream " +
                             std::to_string(seg.stream_id) + " frame tiling mismatch");
      open.next += seg.seg_len;
      if (open.next == open.frame_len) open_.erase(it);
    }
  }

  void finish() const {
    if (!open_.empty())
      throw IntegrityError("connection '" + conn_id_ + "': stream " +
                           std::to_string(open_.begin()->first.second) +
                           " frame is incomplete at end of trace");
  }

 private:
  struct Open {
    FrameType type;
    uint64_t frame_len;
    uint64_t next;
  };
  using Key = std::pair<Direction, uint32_t>;
  struct KeyLess {
    bool operator()(const Key& a, const Key& b) const {
      return a.first != b.first ? a.first < b.first : a.second < b.second;
    }
  };
  std::string conn_id_;
  std::map<Key, Open, KeyLess> open_;
};

}  // namespace

void validate_capture(const Capture& capture) {
  std::unordered_map<std::string, bool> seen;
  for (const ConnectionTrace& conn : capture.connections) {
    if (seen.count(conn.conn_id))
      throw IntegrityError("capture '" + capture.capture_id + "': duplicate conn_id '" +
                       conn.conn_id + "'");
    seen[conn.conn_id] = true;

    double prev_t = -1.0;
    FrameWalker walker(conn.conn_id);
    for (const TlsRecordEvent& rec : conn.records) {
      if (rec.t < prev_t)
        throw IntegrityError("connection '" + conn.conn_id + "': timestamp regression");
      prev_t = rec.t;
      if (rec.content_len > rec.wire_len)
        throw IntegrityError("connection '" + conn.conn_id + "': content_len exceeds wire_len");
      uint64_t seg_sum = 0;
      for (const FrameSegment& seg : rec.segments) seg_sum += seg.seg_len;
      if (seg_sum > rec.content_len)
        throw IntegrityError("connection '" + conn.conn_id +
                         "': segment lengths exceed content_len");
      if (!rec.segments.empty() && conn.protocol != Protocol::Http2Tls)
        throw IntegrityError("connection '" + conn.conn_id +
                         "': frame segments on a non-http2_tls connection");
      for (const FrameSegment& seg : rec.segments)
        walker.step(rec.dir, seg, [](const FrameSegment&) {});
    }
    walker.finish();
  }
}

// ---------------------------------------------------------------------------
// Attacker view

Capture attacker_view(const Capture& capture) {
  Capture out = capture;
  for (ConnectionTrace& conn : out.connections) {
    if (conn.protocol != Protocol::Plain) conn.protocol = Protocol::Tls;
    for (TlsRecordEvent& rec : conn.records) rec.segments.clear();
  }
  return out;
}

// ---------------------------------------------------------------------------
// Object reconstruction

std::vector<WebObject> build_objects(const ConnectionTrace& conn) {
  if (conn.protocol != Protocol::Http2Tls)
    throw PreconditionError("build_objects requires an http2_tls connection, got '" +
                            std::string(to_string(conn.protocol)) + "' on '" + conn.conn_id +
                            "'");

  // Streams that carried response HEADERS or DATA bytes become objects;
  // record_refs also include records whose only segments for the stream are
  // signaling frames.
  std::map<uint32_t, WebObject> by_stream;
  std::map<uint32_t, bool> seen_response;
  std::map<uint32_t, double> req_time;
  std::map<uint32_t, std::vector<size_t>> refs;
  FrameWalker walker(conn.conn_id);

  for (size_t i = 0; i < conn.records.size(); ++i) {
    const TlsRecordEvent& rec = conn.records[i];
    std::vector<uint32_t> touched;

    for (const FrameSegment& seg : rec.segments) {
      walker.step(rec.dir, seg, [&](const FrameSegment& start) {
        if (rec.dir != Direction::S2C) return;
        if (start.frame_type == FrameType::Data)
          by_stream[start.stream_id].data_size += start.frame_len;
        else if (start.frame_type == FrameType::Headers)
          by_stream[start.stream_id].resp_header_size += start.frame_len;
      });
      if (rec.dir == Direction::C2S) {
        if (seg.frame_type == FrameType::Headers) req_time[seg.stream_id] = rec.t;
        continue;
      }
      touched.push_back(seg.stream_id);
      if (seg.frame_type == FrameType::Headers || seg.frame_type == FrameType::Data) {
        WebObject& obj = by_stream[seg.stream_id];
        if (!seen_response[seg.stream_id]) {
          obj.first_byte_time = rec.t;
          seen_response[seg.stream_id] = true;
        }
        obj.last_byte_time = rec.t;
      }
    }
    std::sort(touched.begin(), touched.end());
    touched.erase(std::unique(touched.begin(), touched.end()), touched.end());
    for (uint32_t sid : touched) refs[sid].push_back(i);
  }
  walker.finish();

  std::vector<WebObject> objects;
  for (auto& [sid, obj] : by_stream) {
    obj.stream_id = sid;
    obj.record_refs = std::move(refs[sid]);
    auto rt = req_time.find(sid);
    if (rt != req_time.end()) obj.req_record_time = rt->second;
    objects.push_back(std::move(obj));
  }
  std::sort(objects.begin(), objects.end(), [](const WebObject& a, const WebObject& b) {
    if (a.first_byte_time != b.first_byte_time) return a.first_byte_time < b.first_byte_time;
    return a.stream_id < b.stream_id;
  });
  return objects;
}

}  // namespace h2mux
