// SPDX-License-Identifier: Apache-2.0

#include "h2mux/synth.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace h2mux {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Distributions

namespace {

// 53-bit uniform double in [0, 1).
double u53(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * (1.0 / 9007199254740992.0);
}

}  // namespace

void DistSpec::validate(const std::string& what) const {
  auto bad = [&](const std::string& why) { throw ConfigError(what + ": " + why); };
  switch (kind) {
    case DistKind::Constant:
      if (!std::isfinite(a)) bad("constant value must be finite");
      break;
    case DistKind::UniformInt:
      if (a != std::floor(a) || b != std::floor(b)) bad("uniform_int bounds must be integers");
      if (a > b) bad("uniform_int needs lo <= hi");
      break;
    case DistKind::UniformReal:
      if (a > b) bad("uniform_real needs lo <= hi");
      break;
    case DistKind::LogUniform:
      if (a <= 0) bad("loguniform needs lo > 0");
      if (a > b) bad("loguniform needs lo <= hi");
      break;
    case DistKind::LogNormal:
      if (b < 0) bad("lognormal needs sigma >= 0");
      break;
    case DistKind::Exponential:
      if (a < 0) bad("exponential needs mean >= 0");
      break;
  }
}

double DistSpec::sample(std::mt19937_64& rng) const {
  switch (kind) {
    case DistKind::Constant:
      return a;
    case DistKind::UniformInt: {
      const double u = u53(rng);
      double v = std::floor(a + u * (b - a + 1.0));
      return std::min(v, b);
    }
    case DistKind::UniformReal:
      return a + u53(rng) * (b - a);
    case DistKind::LogUniform: {
      const double la = std::log(a), lb = std::log(b);
      return std::exp(la + u53(rng) * (lb - la));
    }
    case DistKind::LogNormal: {
      const double u1 = 1.0 - u53(rng);  // (0, 1]
      const double u2 = u53(rng);
      const double z = std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
      return std::exp(a + b * z);
    }
    case DistKind::Exponential:
      return -a * std::log(1.0 - u53(rng));
  }
  return 0.0;
}

uint64_t DistSpec::sample_count(std::mt19937_64& rng) const {
  const double v = sample(rng);
  if (v <= 0.0) return 0;
  return static_cast<uint64_t>(std::llround(v));
}

// ---------------------------------------------------------------------------
// Config

const char* to_string(Policy p) {
  switch (p) {
    case Policy::Sequential: return "sequential";
    case Policy::Pipelined: return "pipelined";
    case Policy::RoundRobin: return "round_robin";
  }
  return "?";
}

Policy policy_from_string(const std::string& s) {
  if (s == "sequential") return Policy::Sequential;
  if (s == "pipelined") return Policy::Pipelined;
  if (s == "round_robin") return Policy::RoundRobin;
  throw ConfigError("unknown policy '" + s + "'");
}

void validate_config(const SynthConfig& cfg) {
  auto bad = [](const std::string& why) { throw ConfigError(why); };
  if (cfg.n_connections < 1) bad("n_connections must be >= 1");
  if (cfg.max_frame < 1 || cfg.max_frame > 16384) bad("max_frame must be in [1, 16384]");
  if (cfg.data_seg_target < 1) bad("data_seg_target must be >= 1");
  if (cfg.data_seg_target + cfg.data_record_overhead > 16408)
    bad("data_seg_target + data_record_overhead must be <= 16408");
  if (cfg.data_record_overhead < 1) bad("data_record_overhead must be >= 1");
  if (cfg.header_record_overhead < 1) bad("header_record_overhead must be >= 1");
  if (cfg.rtt < 0) bad("rtt must be >= 0");
  if (!(cfg.bandwidth > 0)) bad("bandwidth must be > 0");
  if (cfg.n_endpoints < 1) bad("n_endpoints must be >= 1");
  if (cfg.end_signal_len != 0 && cfg.end_signal_len <= cfg.data_record_overhead)
    bad("end_signal_len must exceed data_record_overhead (or be 0 to disable)");
  if (cfg.pre_signal_len != 0 && cfg.pre_signal_len <= cfg.data_record_overhead)
    bad("pre_signal_len must exceed data_record_overhead (or be 0 to disable)");
  cfg.objects_per_connection.validate("objects_per_connection");
  cfg.object_size.validate("object_size");
  cfg.header_size.validate("header_size");
  cfg.think_time.validate("think_time");
}

namespace {

DistSpec dist_from_json(const json& j, const std::string& what) {
  if (j.is_number()) return DistSpec::constant(j.get<double>());
  if (!j.is_object()) throw ConfigError(what + ": expected a number or a distribution object");
  auto need = [&](const char* k) -> double {
    auto it = j.find(k);
    if (it == j.end() || !it->is_number())
      throw ConfigError(what + ": distribution needs numeric field '" + k + "'");
    return it->get<double>();
  };
  auto it = j.find("kind");
  if (it == j.end() || !it->is_string())
    throw ConfigError(what + ": distribution needs string field 'kind'");
  const std::string kind = it->get<std::string>();
  DistSpec d;
  if (kind == "constant") d = DistSpec::constant(need("value"));
  else if (kind == "uniform_int") d = DistSpec::uniform_int(need("lo"), need("hi"));
  else if (kind == "uniform_real") d = DistSpec::uniform_real(need("lo"), need("hi"));
  else if (kind == "loguniform") d = DistSpec::loguniform(need("lo"), need("hi"));
  else if (kind == "lognormal") d = DistSpec::lognormal(need("mu"), need("sigma"));
  else if (kind == "exponential") d = DistSpec::exponential(need("mean"));
  else throw ConfigError(what + ": unknown distribution kind '" + kind + "'");
  for (auto& [k, v] : j.items()) {
    (void)v;
    static const char* allowed[] = {"kind", "value", "lo", "hi", "mu", "sigma", "mean"};
    if (std::find_if(std::begin(allowed), std::end(allowed),
                     [&](const char* s) { return k == s; }) == std::end(allowed))
      throw ConfigError(what + ": unknown distribution field '" + k + "'");
  }
  d.validate(what);
  return d;
}

json dist_to_json(const DistSpec& d) {
  switch (d.kind) {
    case DistKind::Constant: return {{"kind", "constant"}, {"value", d.a}};
    case DistKind::UniformInt: return {{"kind", "uniform_int"}, {"lo", d.a}, {"hi", d.b}};
    case DistKind::UniformReal: return {{"kind", "uniform_real"}, {"lo", d.a}, {"hi", d.b}};
    case DistKind::LogUniform: return {{"kind", "loguniform"}, {"lo", d.a}, {"hi", d.b}};
    case DistKind::LogNormal: return {{"kind", "lognormal"}, {"mu", d.a}, {"sigma", d.b}};
    case DistKind::Exponential: return {{"kind", "exponential"}, {"mean", d.a}};
  }
  return {};
}

uint64_t get_count(const json& j, const char* field, uint64_t fallback) {
  auto it = j.find(field);
  if (it == j.end()) return fallback;
  if (!it->is_number() || it->get<double>() < 0 ||
      it->get<double>() != std::floor(it->get<double>()))
    throw ConfigError(std::string("field '") + field + "' must be a non-negative integer");
  return it->get<uint64_t>();
}

}  // namespace

SynthConfig synth_config_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("malformed config JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config must be a JSON object");

  static const char* known[] = {
      "n_connections", "objects_per_connection", "object_size",  "policy",
      "max_frame",     "data_seg_target",        "data_record_overhead",
      "header_record_overhead", "header_size",   "rtt",          "think_time",
      "bandwidth",     "seed",                   "n_endpoints",  "end_signal_len",
      "pre_signal_len", "mix_records",           "capture_id",   "site",
      "day"};
  for (auto& [k, v] : j.items()) {
    (void)v;
    if (std::find_if(std::begin(known), std::end(known),
                     [&](const char* s) { return k == s; }) == std::end(known))
      throw ConfigError("unknown config field '" + k + "'");
  }

  SynthConfig cfg;
  cfg.n_connections = get_count(j, "n_connections", cfg.n_connections);
  if (j.count("objects_per_connection"))
    cfg.objects_per_connection = dist_from_json(j["objects_per_connection"], "objects_per_connection");
  if (j.count("object_size")) cfg.object_size = dist_from_json(j["object_size"], "object_size");
  if (j.count("policy")) {
    if (!j["policy"].is_string()) throw ConfigError("field 'policy' must be a string");
    cfg.policy = policy_from_string(j["policy"].get<std::string>());
  }
  cfg.max_frame = get_count(j, "max_frame", cfg.max_frame);
  cfg.data_seg_target = get_count(j, "data_seg_target", cfg.data_seg_target);
  cfg.data_record_overhead = get_count(j, "data_record_overhead", cfg.data_record_overhead);
  cfg.header_record_overhead = get_count(j, "header_record_overhead", cfg.header_record_overhead);
  if (j.count("header_size")) cfg.header_size = dist_from_json(j["header_size"], "header_size");
  if (j.count("rtt")) {
    if (!j["rtt"].is_number()) throw ConfigError("field 'rtt' must be a number");
    cfg.rtt = j["rtt"].get<double>();
  }
  if (j.count("think_time")) cfg.think_time = dist_from_json(j["think_time"], "think_time");
  if (j.count("bandwidth")) {
    if (!j["bandwidth"].is_number()) throw ConfigError("field 'bandwidth' must be a number");
    cfg.bandwidth = j["bandwidth"].get<double>();
  }
  cfg.seed = get_count(j, "seed", cfg.seed);
  cfg.n_endpoints = get_count(j, "n_endpoints", cfg.n_endpoints);
  cfg.end_signal_len = get_count(j, "end_signal_len", cfg.end_signal_len);
  cfg.pre_signal_len = get_count(j, "pre_signal_len", cfg.pre_signal_len);
  if (j.count("mix_records")) {
    if (!j["mix_records"].is_boolean()) throw ConfigError("field 'mix_records' must be a boolean");
    cfg.mix_records = j["mix_records"].get<bool>();
  }
  auto get_str = [&](const char* field, std::string& out) {
    auto it = j.find(field);
    if (it == j.end()) return;
    if (!it->is_string()) throw ConfigError(std::string("field '") + field + "' must be a string");
    out = it->get<std::string>();
  };
  get_str("capture_id", cfg.capture_id);
  get_str("site", cfg.site);
  get_str("day", cfg.day);

  validate_config(cfg);
  return cfg;
}

SynthConfig synth_config_from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return synth_config_from_json(ss.str());
}

std::string synth_config_to_json(const SynthConfig& cfg) {
  json j{{"n_connections", cfg.n_connections},
         {"objects_per_connection", dist_to_json(cfg.objects_per_connection)},
         {"object_size", dist_to_json(cfg.object_size)},
         {"policy", to_string(cfg.policy)},
         {"max_frame", cfg.max_frame},
         {"data_seg_target", cfg.data_seg_target},
         {"data_record_overhead", cfg.data_record_overhead},
         {"header_record_overhead", cfg.header_record_overhead},
         {"header_size", dist_to_json(cfg.header_size)},
         {"rtt", cfg.rtt},
         {"think_time", dist_to_json(cfg.think_time)},
         {"bandwidth", cfg.bandwidth},
         {"seed", cfg.seed},
         {"n_endpoints", cfg.n_endpoints},
         {"end_signal_len", cfg.end_signal_len},
         {"pre_signal_len", cfg.pre_signal_len},
         {"mix_records", cfg.mix_records},
         {"capture_id", cfg.capture_id},
         {"site", cfg.site},
         {"day", cfg.day}};
  return j.dump(2);
}

// ---------------------------------------------------------------------------
// Packetization

std::vector<FramePlan> packetize_object(uint64_t size, const SynthConfig& cfg) {
  std::vector<FramePlan> frames;
  uint64_t left = size;
  while (left > 0) {
    FramePlan f;
    f.frame_len = std::min(left, cfg.max_frame);
    uint64_t seg_left = f.frame_len;
    while (seg_left > 0) {
      const uint64_t s = std::min(seg_left, cfg.data_seg_target);
      f.seg_lens.push_back(s);
      seg_left -= s;
    }
    left -= f.frame_len;
    frames.push_back(std::move(f));
  }
  return frames;
}

// ---------------------------------------------------------------------------
// Generation

namespace {

constexpr uint64_t kConnStaggerUs = 10000;

struct PlannedRecord {
  uint64_t content = 0;
  std::vector<FrameSegment> segments;
};

// Records a scheduler emits back-to-back: one HTTP/2 frame (or the
// pre-signal + HEADERS pair, or a trailing signal rider).
using Unit = std::vector<PlannedRecord>;

struct PlannedObject {
  uint32_t stream_id = 0;
  uint64_t size = 0;
  uint64_t resp_header_payload = 0;
  uint64_t req_header_payload = 0;
  uint64_t think_us = 0;
  std::deque<Unit> units;       // response records in emission order
  uint64_t req_t_us = 0;        // set when the request is emitted
  uint64_t earliest_us = 0;     // req_t + rtt
  bool started = false;
  ObjectTruth truth;
};

struct ConnBuilder {
  const SynthConfig& cfg;
  uint64_t rtt_us = 0;
  uint64_t up_free = 0;
  uint64_t down_free = 0;
  std::vector<std::pair<uint64_t, TlsRecordEvent>> recs;  // (t_us, record)

  explicit ConnBuilder(const SynthConfig& c, uint64_t start_us) : cfg(c) {
    rtt_us = static_cast<uint64_t>(std::llround(cfg.rtt * 1e6));
    up_free = down_free = start_us;
  }

  uint64_t dur_us(uint64_t wire) const {
    const double d = std::ceil(static_cast<double>(wire) * 1e6 / cfg.bandwidth);
    return std::max<uint64_t>(1, static_cast<uint64_t>(d));
  }

  uint64_t emit(Direction dir, uint64_t earliest, const PlannedRecord& pr) {
    uint64_t& free = dir == Direction::C2S ? up_free : down_free;
    const uint64_t wire = pr.content + 5;
    const uint64_t t = std::max(free, earliest) + dur_us(wire);
    free = t;
    TlsRecordEvent rec;
    rec.dir = dir;
    rec.t = static_cast<double>(t) / 1e6;
    rec.wire_len = wire;
    rec.content_len = pr.content;
    rec.segments = pr.segments;
    recs.emplace_back(t, std::move(rec));
    return t;
  }

  // Emits one unit on the downlink, tracking the object's response times.
  void emit_unit(PlannedObject& obj, const Unit& unit) {
    for (const PlannedRecord& pr : unit) {
      const uint64_t earliest = obj.started ? 0 : obj.earliest_us;
      const uint64_t t = emit(Direction::S2C, earliest, pr);
      obj.started = true;
      for (const FrameSegment& seg : pr.segments) {
        if (seg.stream_id != obj.stream_id) continue;
        if (seg.frame_type != FrameType::Headers && seg.frame_type != FrameType::Data) continue;
        const double ts = static_cast<double>(t) / 1e6;
        if (obj.truth.first_resp_t == 0.0) obj.truth.first_resp_t = ts;
        obj.truth.last_resp_t = ts;
      }
    }
  }
};

FrameSegment signal_seg(uint64_t frame_len, FrameType type = FrameType::WindowUpdate) {
  return FrameSegment{0, type, frame_len, 0, frame_len};
}

// Response records for one object, grouped into units the scheduler
// interleaves per frame.
std::deque<Unit> plan_response(const PlannedObject& obj, const SynthConfig& cfg) {
  std::deque<Unit> units;

  Unit head;
  if (cfg.pre_signal_len != 0) {
    PlannedRecord pre;
    pre.content = cfg.pre_signal_len;
    pre.segments.push_back(signal_seg(cfg.pre_signal_len - cfg.data_record_overhead));
    head.push_back(std::move(pre));
  }
  PlannedRecord hdr;
  hdr.content = obj.resp_header_payload + cfg.header_record_overhead;
  hdr.segments.push_back(FrameSegment{obj.stream_id, FrameType::Headers,
                                      obj.resp_header_payload, 0, obj.resp_header_payload});
  head.push_back(std::move(hdr));
  units.push_back(std::move(head));

  for (const FramePlan& frame : packetize_object(obj.size, cfg)) {
    Unit u;
    uint64_t off = 0;
    for (uint64_t seg_len : frame.seg_lens) {
      PlannedRecord pr;
      pr.content = seg_len + cfg.data_record_overhead;
      pr.segments.push_back(
          FrameSegment{obj.stream_id, FrameType::Data, frame.frame_len, off, seg_len});
      off += seg_len;
      u.push_back(std::move(pr));
    }
    units.push_back(std::move(u));
  }

  if (cfg.end_signal_len != 0) {
    const uint64_t f = cfg.end_signal_len - cfg.data_record_overhead;
    if (cfg.mix_records) {
      PlannedRecord& last = units.back().back();
      last.segments.push_back(signal_seg(f));
      last.content += f;
    } else {
      PlannedRecord end;
      end.content = cfg.end_signal_len;
      end.segments.push_back(signal_seg(f));
      units.back().push_back(std::move(end));
    }
  }
  return units;
}

ConnTruth build_connection(const SynthConfig& cfg, std::mt19937_64& rng, size_t conn_idx,
                           ConnectionTrace& out) {
  const uint64_t start_us = conn_idx * kConnStaggerUs;
  ConnBuilder b(cfg, start_us);

  // Connection preface: client SETTINGS, then server SETTINGS + WINDOW_UPDATE.
  {
    PlannedRecord cs;
    cs.content = 15 + cfg.data_record_overhead;
    cs.segments.push_back(signal_seg(15, FrameType::Settings));
    const uint64_t t = b.emit(Direction::C2S, start_us, cs);

    PlannedRecord ss;
    ss.content = 15 + cfg.data_record_overhead;
    ss.segments.push_back(signal_seg(15, FrameType::Settings));
    b.emit(Direction::S2C, t + b.rtt_us, ss);

    PlannedRecord wu;
    wu.content = 13 + cfg.data_record_overhead;
    wu.segments.push_back(signal_seg(13));
    b.emit(Direction::S2C, 0, wu);
  }

  const uint64_t k = std::max<uint64_t>(1, cfg.objects_per_connection.sample_count(rng));
  std::vector<PlannedObject> objs(k);
  for (uint64_t j = 0; j < k; ++j) {
    PlannedObject& o = objs[j];
    o.stream_id = static_cast<uint32_t>(1 + 2 * j);
    o.size = cfg.object_size.sample_count(rng);
    o.resp_header_payload = std::max<uint64_t>(1, cfg.header_size.sample_count(rng));
    o.req_header_payload = std::max<uint64_t>(1, cfg.header_size.sample_count(rng));
    const double think = cfg.think_time.sample(rng);
    o.think_us = think <= 0 ? 0 : static_cast<uint64_t>(std::llround(think * 1e6));
    o.truth.stream_id = o.stream_id;
    o.truth.size = o.size;
    o.units = plan_response(o, cfg);
  }

  auto emit_request = [&](PlannedObject& o, uint64_t earliest) {
    PlannedRecord req;
    req.content = o.req_header_payload + cfg.header_record_overhead;
    req.segments.push_back(FrameSegment{o.stream_id, FrameType::Headers, o.req_header_payload,
                                        0, o.req_header_payload});
    o.req_t_us = b.emit(Direction::C2S, earliest, req);
    o.earliest_us = o.req_t_us + b.rtt_us;
    o.truth.req_send_t = static_cast<double>(o.req_t_us) / 1e6;
  };

  if (cfg.policy == Policy::Sequential) {
    for (uint64_t j = 0; j < k; ++j) {
      PlannedObject& o = objs[j];
      const uint64_t gap = std::max<uint64_t>(1, o.think_us);
      const uint64_t earliest = j == 0 ? start_us + o.think_us : b.down_free + gap;
      emit_request(o, earliest);
      while (!o.units.empty()) {
        b.emit_unit(o, o.units.front());
        o.units.pop_front();
      }
    }
  } else {
    for (uint64_t j = 0; j < k; ++j) {
      PlannedObject& o = objs[j];
      const uint64_t earliest = (j == 0 ? start_us : objs[j - 1].req_t_us) + o.think_us;
      emit_request(o, earliest);
    }
    if (cfg.policy == Policy::Pipelined) {
      for (PlannedObject& o : objs) {
        while (!o.units.empty()) {
          b.emit_unit(o, o.units.front());
          o.units.pop_front();
        }
      }
    } else {  // round_robin with batch activation
      std::deque<PlannedObject*> pending;
      for (PlannedObject& o : objs) pending.push_back(&o);
      while (!pending.empty()) {
        const uint64_t anchor = std::max(b.down_free, pending.front()->earliest_us);
        std::vector<PlannedObject*> active;
        while (!pending.empty() && pending.front()->earliest_us <= anchor) {
          active.push_back(pending.front());
          pending.pop_front();
        }
        while (!active.empty()) {
          for (auto it = active.begin(); it != active.end();) {
            PlannedObject* o = *it;
            b.emit_unit(*o, o->units.front());
            o->units.pop_front();
            it = o->units.empty() ? active.erase(it) : it + 1;
          }
        }
      }
    }
  }

  std::stable_sort(b.recs.begin(), b.recs.end(),
                   [](const auto& x, const auto& y) { return x.first < y.first; });
  out.records.reserve(b.recs.size());
  for (auto& [t, rec] : b.recs) out.records.push_back(std::move(rec));

  ConnTruth truth;
  truth.conn_id = out.conn_id;
  for (PlannedObject& o : objs) truth.objects.push_back(o.truth);
  return truth;
}

}  // namespace

SynthResult generate_with_truth(const SynthConfig& cfg) {
  validate_config(cfg);
  std::mt19937_64 rng(cfg.seed);

  SynthResult res;
  res.capture.capture_id = cfg.capture_id;
  res.capture.site = cfg.site;
  res.capture.day = cfg.day;

  for (uint64_t c = 0; c < cfg.n_connections; ++c) {
    ConnectionTrace conn;
    conn.conn_id = cfg.capture_id + "-c" + std::to_string(c);
    conn.server = "srv" + std::to_string(c % cfg.n_endpoints) + ":443";
    conn.protocol = Protocol::Http2Tls;
    res.truth.connections.push_back(build_connection(cfg, rng, c, conn));
    res.capture.connections.push_back(std::move(conn));
  }

  validate_capture(res.capture);
  return res;
}

Capture generate_capture(const SynthConfig& cfg) { return generate_with_truth(cfg).capture; }

}  // namespace h2mux
