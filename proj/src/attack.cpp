// SPDX-License-Identifier: Apache-2.0

#include "h2mux/attack.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "h2mux/segmenter.hpp"
#include "h2mux/stats.hpp"

namespace h2mux {

using nlohmann::json;

void validate_params(const AttackParams& p) {
  if (!(p.abs_gap > 0)) throw ConfigError("abs_gap must be > 0");
  if (!(p.gap_factor > 0)) throw ConfigError("gap_factor must be > 0");
  if (p.norm_record == 0) throw ConfigError("norm_record must be > 0");
  if (p.header_lo > p.header_hi)
    throw ConfigError("header range is empty: lo > hi");
}

AttackParams attack_params_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad params json: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("params must be a json object");
  AttackParams p;
  for (const auto& [key, val] : j.items()) {
    try {
      if (key == "abs_gap") p.abs_gap = val.get<double>();
      else if (key == "gap_factor") p.gap_factor = val.get<double>();
      else if (key == "norm_record") p.norm_record = val.get<uint64_t>();
      else if (key == "signal_max") p.signal_max = val.get<uint64_t>();
      else if (key == "end_marker") p.end_marker = val.get<uint64_t>();
      else if (key == "header_range") {
        if (!val.is_array() || val.size() != 2)
          throw ConfigError("header_range must be [lo, hi]");
        p.header_lo = val[0].get<uint64_t>();
        p.header_hi = val[1].get<uint64_t>();
      } else if (key == "fingerprint") {
        p.fingerprint = val.get<std::vector<uint64_t>>();
      } else {
        throw ConfigError("unknown params key: " + key);
      }
    } catch (const json::exception& e) {
      throw ConfigError("bad value for " + key + ": " + e.what());
    }
  }
  validate_params(p);
  return p;
}

AttackParams attack_params_from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open params file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return attack_params_from_json(ss.str());
}

std::string attack_params_to_json(const AttackParams& p) {
  json j;
  j["abs_gap"] = p.abs_gap;
  j["gap_factor"] = p.gap_factor;
  j["norm_record"] = p.norm_record;
  j["signal_max"] = p.signal_max;
  j["end_marker"] = p.end_marker;
  j["header_range"] = {p.header_lo, p.header_hi};
  j["fingerprint"] = p.fingerprint;
  return j.dump(2);
}

RecordClass classify_record(uint64_t content_len, const AttackParams& p) {
  if (content_len == p.end_marker) return RecordClass::End;
  if (content_len < p.signal_max) return RecordClass::Signal;
  if (content_len >= p.header_lo && content_len <= p.header_hi)
    return RecordClass::Header;
  return RecordClass::Body;
}

namespace {

std::vector<const TlsRecordEvent*> s2c_records(const ConnectionTrace& conn) {
  std::vector<const TlsRecordEvent*> out;
  for (const TlsRecordEvent& rec : conn.records)
    if (rec.dir == Direction::S2C) out.push_back(&rec);
  return out;
}

}  // namespace

bool fingerprint_match(const ConnectionTrace& conn, const AttackParams& p) {
  if (p.fingerprint.empty()) return true;
  const auto recs = s2c_records(conn);
  if (recs.size() < p.fingerprint.size()) return false;
  for (size_t i = 0; i < p.fingerprint.size(); ++i)
    if (recs[i]->content_len != p.fingerprint[i]) return false;
  return true;
}

std::vector<RecordRange> segment_by_gaps(const ConnectionTrace& conn,
                                         const AttackParams& p) {
  const auto recs = s2c_records(conn);
  if (recs.empty()) return {};
  if (recs.size() == 1) return {{0, 0}};

  double norm_sum = 0.0;
  for (size_t i = 0; i + 1 < recs.size(); ++i) {
    const double dt = recs[i + 1]->t - recs[i]->t;
    const double wire = recs[i]->wire_len > 0
                            ? static_cast<double>(recs[i]->wire_len)
                            : 1.0;
    norm_sum += dt * static_cast<double>(p.norm_record) / wire;
  }
  const double mean_norm = norm_sum / static_cast<double>(recs.size() - 1);

  std::vector<RecordRange> ranges;
  size_t first = 0;
  for (size_t i = 0; i + 1 < recs.size(); ++i) {
    const double dt = recs[i + 1]->t - recs[i]->t;
    if (dt > p.abs_gap || dt > p.gap_factor * mean_norm) {
      ranges.push_back({first, i});
      first = i + 1;
    }
  }
  ranges.push_back({first, recs.size() - 1});
  return ranges;
}

std::vector<AttackFinding> find_responses(const ConnectionTrace& conn,
                                          const AttackParams& p) {
  const auto recs = s2c_records(conn);
  std::vector<RecordClass> cls(recs.size());
  for (size_t i = 0; i < recs.size(); ++i)
    cls[i] = classify_record(recs[i]->content_len, p);

  // body_prefix[i] = content bytes of non-signaling records before position i
  std::vector<uint64_t> body_prefix(recs.size() + 1, 0);
  for (size_t i = 0; i < recs.size(); ++i) {
    const bool counted =
        cls[i] == RecordClass::Header || cls[i] == RecordClass::Body;
    body_prefix[i + 1] = body_prefix[i] + (counted ? recs[i]->content_len : 0);
  }

  std::vector<AttackFinding> findings;
  for (const RecordRange& range : segment_by_gaps(conn, p)) {
    std::vector<size_t> open;  // indices into findings, oldest first
    bool start_enabled = true;
    for (size_t pos = range.first; pos <= range.last; ++pos) {
      switch (cls[pos]) {
        case RecordClass::End:
          if (!open.empty()) {
            AttackFinding& f = findings[open.front()];
            f.end_pos = pos;
            f.est_size = body_prefix[pos] - body_prefix[f.start_pos + 1];
            open.erase(open.begin());
          }
          start_enabled = true;
          break;
        case RecordClass::Signal:
          start_enabled = true;
          break;
        case RecordClass::Header:
          if (start_enabled) {
            AttackFinding f;
            f.conn_id = conn.conn_id;
            f.start_pos = pos;
            f.header_time = recs[pos]->t;
            open.push_back(findings.size());
            findings.push_back(std::move(f));
          }
          start_enabled = false;
          break;
        case RecordClass::Body:
          start_enabled = false;
          break;
      }
    }
    for (size_t idx : open) {
      AttackFinding& f = findings[idx];
      f.end_pos = range.last;
      f.est_size = body_prefix[range.last + 1] - body_prefix[f.start_pos + 1];
    }
  }

  for (size_t i = 0; i < findings.size(); ++i) {
    for (size_t j = i + 1; j < findings.size(); ++j) {
      if (findings[i].start_pos <= findings[j].end_pos &&
          findings[j].start_pos <= findings[i].end_pos) {
        findings[i].overlapped = true;
        findings[j].overlapped = true;
      }
    }
  }

  std::sort(findings.begin(), findings.end(),
            [](const AttackFinding& a, const AttackFinding& b) {
              if (a.header_time != b.header_time)
                return a.header_time < b.header_time;
              return a.start_pos < b.start_pos;
            });
  return findings;
}

std::map<std::string, std::vector<AttackFinding>> attack_corpus(
    const std::vector<Capture>& captures, const AttackParams& p) {
  std::map<std::string, std::vector<AttackFinding>> out;
  for (const Capture& cap : captures) {
    for (const ConnectionTrace& conn : cap.connections) {
      if (conn.protocol == Protocol::Plain) continue;
      if (!fingerprint_match(conn, p)) continue;
      out[conn.conn_id] = find_responses(conn, p);
    }
  }
  return out;
}

AttackEval evaluate_attack(
    const std::map<std::string, std::vector<AttackFinding>>& findings,
    const std::vector<Capture>& truth) {
  AttackEval eval;
  std::vector<double> diffs, pipes, muxes;
  for (const Capture& cap : truth) {
    for (const ConnectionTrace& conn : cap.connections) {
      const auto it = findings.find(conn.conn_id);
      if (it == findings.end()) continue;

      std::vector<WebObject> objects;
      SegmentationResult seg;
      if (conn.protocol == Protocol::Http2Tls) {
        objects = build_objects(conn);
        seg = detect_segments(conn);
      }

      ConnOutcome out;
      out.conn_id = conn.conn_id;
      out.found = it->second.size();
      out.actual = objects.size();
      out.count_diff =
          static_cast<int64_t>(out.found) - static_cast<int64_t>(out.actual);
      for (const auto& [stream, c] : seg.per_object_class) {
        if (c == ObjectClass::Pipelined) out.pipelined += 1;
        if (c == ObjectClass::Multiplexed) out.multiplexed += 1;
      }
      diffs.push_back(static_cast<double>(out.count_diff));
      pipes.push_back(static_cast<double>(out.pipelined));
      muxes.push_back(static_cast<double>(out.multiplexed));

      if (out.found == out.actual) {
        for (size_t i = 0; i < objects.size(); ++i) {
          const AttackFinding& f = it->second[i];
          const WebObject& obj = objects[i];
          if (f.overlapped || obj.data_size == 0) continue;
          ErrorSample s;
          s.stream_id = obj.stream_id;
          s.s_act = obj.data_size;
          s.s_est = f.est_size;
          s.e = (static_cast<double>(f.est_size) -
                 static_cast<double>(obj.data_size)) /
                static_cast<double>(obj.data_size);
          eval.errors.push_back(s);
        }
      }
      eval.connections.push_back(std::move(out));
    }
  }

  auto corr = [&](const std::vector<double>& xs) -> std::optional<double> {
    try {
      return pearson(diffs, xs);
    } catch (const StatError&) {
      return std::nullopt;
    }
  };
  eval.count_vs_pipelined = corr(pipes);
  eval.count_vs_multiplexed = corr(muxes);
  return eval;
}

}  // namespace h2mux
