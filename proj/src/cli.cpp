// SPDX-License-Identifier: Apache-2.0

#include "h2mux/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>

#include "CLI11.hpp"
#include "json.hpp"

#include "h2mux/attack.hpp"
#include "h2mux/characterize.hpp"
#include "h2mux/estimators.hpp"
#include "h2mux/indicators.hpp"
#include "h2mux/segmenter.hpp"
#include "h2mux/stats.hpp"
#include "h2mux/synth.hpp"
#include "h2mux/table.hpp"
#include "h2mux/trace_model.hpp"

namespace h2mux {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::vector<Capture> load_corpus(const std::vector<std::string>& paths) {
  std::vector<Capture> all;
  std::set<std::string> ids;
  for (const std::string& p : paths) {
    std::vector<Capture> caps = parse_trace_file(p);
    for (Capture& c : caps) {
      if (!ids.insert(c.capture_id).second)
        throw IntegrityError("duplicate capture id across inputs: " +
                             c.capture_id);
      all.push_back(std::move(c));
    }
  }
  return all;
}

fs::path out_file(const std::string& dir, const std::string& name) {
  fs::create_directories(dir);
  return fs::path(dir) / name;
}

void write_table(const std::string& dir, const std::string& stem,
                 const std::string& format, const Table& t) {
  const fs::path p =
      out_file(dir, stem + (format == "jsonl" ? ".jsonl" : ".csv"));
  std::ofstream os(p);
  if (!os) throw ConfigError("cannot write " + p.string());
  if (format == "jsonl") write_jsonl(os, t);
  else write_csv(os, t);
}

void write_json_file(const std::string& dir, const std::string& name,
                     const json& j) {
  const fs::path p = out_file(dir, name);
  std::ofstream os(p);
  if (!os) throw ConfigError("cannot write " + p.string());
  os << j.dump(2) << "\n";
}

json opt_cell(const std::optional<double>& v) {
  return v ? json(*v) : json();
}

json hist_json(const Histogram& h) {
  json a = json::array();
  for (const auto& [k, n] : h) a.push_back({k, n});
  return a;
}

json counts_json(const ValueCounts& c) {
  json a = json::array();
  for (const auto& [v, n] : c) a.push_back({v, n});
  return a;
}

json family_json(const CdfFamily& f) {
  json a = json::array();
  for (const auto& [key, counts] : f) {
    json pts = json::array();
    for (const auto& [v, frac] : ecdf_points(counts)) pts.push_back({v, frac});
    a.push_back({{"key", key}, {"ecdf", pts}});
  }
  return a;
}

struct CommonOpts {
  std::vector<std::string> in;
  std::string out;
  std::string format = "csv";
};

void add_common(CLI::App* cmd, CommonOpts& o, bool needs_out = true) {
  cmd->add_option("--in", o.in, "input trace file(s), jsonl")
      ->required()
      ->expected(-1);
  auto* out = cmd->add_option("--out", o.out, "output directory");
  if (needs_out) out->required();
  cmd->add_option("--format", o.format, "table format")
      ->check(CLI::IsMember({"csv", "jsonl"}));
}

// ---------------------------------------------------------------------------

void cmd_gen(const std::string& config_path, int64_t seed, bool seed_set,
             uint64_t count, const std::string& out) {
  SynthConfig base = synth_config_from_file(config_path);
  std::vector<Capture> captures;
  captures.reserve(count);
  for (uint64_t i = 0; i < count; ++i) {
    SynthConfig cfg = base;
    if (seed_set) cfg.seed = static_cast<uint64_t>(seed) + i;
    else cfg.seed = base.seed + i;
    if (count > 1) cfg.capture_id = base.capture_id + "-" + std::to_string(i);
    captures.push_back(generate_capture(cfg));
  }
  write_trace_file(captures, out_file(out, "trace.jsonl").string());
}

void cmd_validate(const std::vector<std::string>& in) {
  const std::vector<Capture> caps = load_corpus(in);
  size_t conns = 0, recs = 0;
  for (const Capture& c : caps) {
    conns += c.connections.size();
    for (const ConnectionTrace& t : c.connections) recs += t.records.size();
  }
  std::cout << "ok: " << caps.size() << " captures, " << conns
            << " connections, " << recs << " records\n";
}

void cmd_strip(const CommonOpts& o) {
  std::vector<Capture> caps = load_corpus(o.in);
  for (Capture& c : caps) c = attacker_view(c);
  write_trace_file(caps, out_file(o.out, "attacker_view.jsonl").string());
}

void cmd_segments(const CommonOpts& o) {
  Table t;
  t.columns = {"capture_id", "conn_id", "kind",    "idx",   "start",
               "end",        "size",    "streams", "parent", "object_class"};
  auto streams_cell = [](const std::set<uint32_t>& s) {
    std::string out;
    for (uint32_t id : s) {
      if (!out.empty()) out += ";";
      out += std::to_string(id);
    }
    return out;
  };
  for (const Capture& cap : load_corpus(o.in)) {
    for (const auto& [conn_id, seg] : segment_capture(cap)) {
      for (size_t i = 0; i < seg.pipelining_segments.size(); ++i) {
        const PipeliningSegment& ps = seg.pipelining_segments[i];
        t.rows.push_back({cap.capture_id, conn_id, "pipelining", i, ps.start,
                          ps.end, ps.size, streams_cell(ps.streams), json(),
                          json()});
      }
      for (size_t i = 0; i < seg.multiplexing_segments.size(); ++i) {
        const MultiplexingSegment& ms = seg.multiplexing_segments[i];
        t.rows.push_back({cap.capture_id, conn_id, "multiplexing", i, ms.start,
                          ms.end, ms.size, streams_cell(ms.streams), ms.parent,
                          json()});
      }
      for (const auto& [stream, cls] : seg.per_object_class) {
        t.rows.push_back({cap.capture_id, conn_id, "object", json(), json(),
                          json(), json(), std::to_string(stream), json(),
                          to_string(cls)});
      }
    }
  }
  write_table(o.out, "segments", o.format, t);
}

void cmd_indicators(const CommonOpts& o) {
  const std::vector<Capture> caps = load_corpus(o.in);
  Table per_cap;
  per_cap.columns = {"capture_id",       "site",
                     "day",              "enc_http_bytes",
                     "h2_bytes",         "pipelined_bytes",
                     "multiplexed_bytes", "h2_over_enc",
                     "pipe_over_h2",     "mux_over_pipe"};
  std::vector<IndicatorRow> rows;
  for (const Capture& cap : caps) {
    const NpoIndicators ind = npo_indicators(cap, segment_capture(cap));
    const ByteTotals& bt = ind.byte_totals;
    per_cap.rows.push_back({cap.capture_id, cap.site, cap.day,
                            bt.enc_http_bytes, bt.h2_bytes, bt.pipelined_bytes,
                            bt.multiplexed_bytes, opt_cell(ind.h2_over_enc),
                            opt_cell(ind.pipe_over_h2),
                            opt_cell(ind.mux_over_pipe)});
    rows.push_back({cap.site, cap.day, ind});
  }
  write_table(o.out, "indicators", o.format, per_cap);
  if (rows.empty()) return;

  const AggregatedIndicators agg = aggregate_indicators(rows);
  Table daily;
  daily.columns = {"day",           "captures",
                   "sites",         "capture_proportion",
                   "site_proportion", "h2_over_enc",
                   "pipe_over_h2",  "mux_over_pipe"};
  for (const DailyAggregate& d : agg.days) {
    daily.rows.push_back({d.day, d.captures, d.sites, d.capture_proportion,
                          d.site_proportion, opt_cell(d.h2_over_enc),
                          opt_cell(d.pipe_over_h2), opt_cell(d.mux_over_pipe)});
  }
  write_table(o.out, "daily", o.format, daily);

  Table sites;
  sites.columns = {"site", "captures"};
  for (const char* ratio : {"h2_over_enc", "pipe_over_h2", "mux_over_pipe"}) {
    for (const char* stat : {"n", "mean", "min", "q1", "median", "q3", "max"})
      sites.columns.push_back(std::string(ratio) + "_" + stat);
  }
  for (const SiteSummary& s : agg.sites) {
    std::vector<json> row = {s.site, s.captures};
    for (const SiteSummary::RatioStats* rs :
         {&s.h2_over_enc, &s.pipe_over_h2, &s.mux_over_pipe}) {
      row.push_back(rs->n);
      if (rs->n == 0) {
        for (int i = 0; i < 6; ++i) row.push_back(json());
      } else {
        row.push_back(rs->mean);
        row.push_back(rs->q.min);
        row.push_back(rs->q.q1);
        row.push_back(rs->q.median);
        row.push_back(rs->q.q3);
        row.push_back(rs->q.max);
      }
    }
    sites.rows.push_back(std::move(row));
  }
  write_table(o.out, "sites", o.format, sites);
}

void cmd_characterize(const CommonOpts& o) {
  const CharacterizationReport rep = characterize(load_corpus(o.in));
  json j;
  j["connections_per_endpoint"] = hist_json(rep.connections_per_endpoint);
  j["objects_per_connection"] = hist_json(rep.objects_per_connection);
  j["frames_per_object"] = hist_json(rep.frames_per_object);
  j["segments_per_frame"] = hist_json(rep.segments_per_frame);
  j["object_size_cdf_by_frames"] = family_json(rep.object_size_cdf_by_frames);
  j["frame_size_cdf_by_segments"] =
      family_json(rep.frame_size_cdf_by_segments);
  j["data_record_overhead"] = hist_json(rep.data_record_overhead);
  j["header_record_overhead"] = hist_json(rep.header_record_overhead);
  write_json_file(o.out, "characterize.json", j);
}

void cmd_extent(const CommonOpts& o) {
  const std::vector<Capture> caps = load_corpus(o.in);
  const ExtentReport rep = extent_report(caps, segment_corpus(caps));
  json j;
  j["h2_share"] = counts_json(rep.h2_share);
  j["pipe_share"] = counts_json(rep.pipe_share);
  j["mux_share"] = counts_json(rep.mux_share);
  json ranges = json::array();
  for (size_t i = 0; i < kSizeRanges; ++i) {
    const SizeRangeStats& rs = rep.ranges[i];
    ranges.push_back({{"label", size_range_label(i)},
                      {"objects", rs.objects},
                      {"pipelined", rs.pipelined},
                      {"multiplexed", rs.multiplexed},
                      {"single_segment", rs.single_segment},
                      {"conn_mates", hist_json(rs.conn_mates)}});
  }
  j["ranges"] = ranges;
  j["pipelining_stream_counts"] = hist_json(rep.pipelining_stream_counts);
  j["multiplexing_stream_counts"] = hist_json(rep.multiplexing_stream_counts);
  write_json_file(o.out, "extent.json", j);
}

void cmd_worstcase(const CommonOpts& o, const std::string& level_str,
                   bool raw) {
  const AssumptionLevel level = assumption_from_string(level_str);
  Table t;
  t.columns = {"capture_id", "conn_id", "stream_id", "level", "adjusted",
               "low",        "high",    "s_act",     "s_est", "e"};
  for (const Capture& cap : load_corpus(o.in)) {
    for (const ConnectionTrace& conn : cap.connections) {
      if (conn.protocol != Protocol::Http2Tls) continue;
      const SegmentationResult seg = detect_segments(conn);
      const std::vector<SizeBounds> bounds =
          worst_case_bounds(conn, seg, level, !raw);
      std::map<uint32_t, const SizeBounds*> by_stream;
      for (const SizeBounds& b : bounds) by_stream[b.stream_id] = &b;
      for (const ErrorSample& s : worst_case_errors(conn, level, !raw)) {
        const SizeBounds* b = by_stream.at(s.stream_id);
        t.rows.push_back({cap.capture_id, conn.conn_id, s.stream_id,
                          to_string(level), !raw, b->low, b->high, s.s_act,
                          s.s_est, s.e});
      }
    }
  }
  write_table(o.out, "worstcase", o.format, t);
}

AttackParams load_params(const std::string& path) {
  if (path.empty()) return AttackParams{};
  return attack_params_from_file(path);
}

void cmd_attack(const CommonOpts& o, const std::string& params_path) {
  const AttackParams params = load_params(params_path);
  Table t;
  t.columns = {"conn_id",     "start_pos",  "end_pos",
               "header_time", "overlapped", "est_size"};
  for (const auto& [conn_id, findings] :
       attack_corpus(load_corpus(o.in), params)) {
    for (const AttackFinding& f : findings) {
      t.rows.push_back({conn_id, f.start_pos, f.end_pos, f.header_time,
                        f.overlapped,
                        f.overlapped ? json() : json(f.est_size)});
    }
  }
  write_table(o.out, "findings", o.format, t);
}

void cmd_attack_eval(const CommonOpts& o,
                     const std::vector<std::string>& observed_paths,
                     const std::string& params_path) {
  const AttackParams params = load_params(params_path);
  const std::vector<Capture> truth = load_corpus(o.in);
  std::map<std::string, std::vector<AttackFinding>> findings;
  if (observed_paths.empty()) {
    std::vector<Capture> stripped;
    stripped.reserve(truth.size());
    for (const Capture& c : truth) stripped.push_back(attacker_view(c));
    findings = attack_corpus(stripped, params);
  } else {
    findings = attack_corpus(load_corpus(observed_paths), params);
  }
  const AttackEval eval = evaluate_attack(findings, truth);

  Table counts;
  counts.columns = {"conn_id",    "found",     "actual",
                    "count_diff", "pipelined", "multiplexed"};
  for (const ConnOutcome& c : eval.connections) {
    counts.rows.push_back(
        {c.conn_id, c.found, c.actual, c.count_diff, c.pipelined,
         c.multiplexed});
  }
  write_table(o.out, "attack_counts", o.format, counts);

  Table errors;
  errors.columns = {"stream_id", "s_act", "s_est", "e"};
  for (const ErrorSample& s : eval.errors)
    errors.rows.push_back({s.stream_id, s.s_act, s.s_est, s.e});
  write_table(o.out, "attack_errors", o.format, errors);

  json j;
  j["connections"] = eval.connections.size();
  size_t equal = 0;
  for (const ConnOutcome& c : eval.connections)
    if (c.count_diff == 0) equal += 1;
  j["equal_count_connections"] = equal;
  j["error_samples"] = eval.errors.size();
  j["count_vs_pipelined"] = opt_cell(eval.count_vs_pipelined);
  j["count_vs_multiplexed"] = opt_cell(eval.count_vs_multiplexed);
  write_json_file(o.out, "attack_eval.json", j);
}

}  // namespace

int run_command(const std::vector<std::string>& args) {
  CLI::App app{"HTTP/2 TLS record trace toolkit"};
  app.require_subcommand(1);

  // gen
  auto* gen = app.add_subcommand("gen", "generate a synthetic trace corpus");
  std::string gen_config, gen_out;
  int64_t gen_seed = 0;
  uint64_t gen_count = 1;
  gen->add_option("--config", gen_config, "generator config json")->required();
  auto* seed_opt = gen->add_option("--seed", gen_seed, "seed override");
  gen->add_option("--count", gen_count, "number of captures")
      ->check(CLI::PositiveNumber);
  gen->add_option("--out", gen_out, "output directory")->required();

  // validate
  auto* validate = app.add_subcommand("validate", "parse and check traces");
  std::vector<std::string> validate_in;
  validate->add_option("--in", validate_in, "input trace file(s)")
      ->required()
      ->expected(-1);

  CommonOpts strip_o, seg_o, ind_o, chr_o, ext_o, wc_o, atk_o, ae_o;
  auto* strip = app.add_subcommand("strip", "reduce traces to attacker view");
  add_common(strip, strip_o);
  auto* segments =
      app.add_subcommand("segments", "pipelining/multiplexing segmentation");
  add_common(segments, seg_o);
  auto* indicators =
      app.add_subcommand("indicators", "per-capture byte-share indicators");
  add_common(indicators, ind_o);
  auto* characterize_cmd =
      app.add_subcommand("characterize", "structure histograms and CDFs");
  add_common(characterize_cmd, chr_o);
  auto* extent =
      app.add_subcommand("extent", "per-size-range pipelining/mux extent");
  add_common(extent, ext_o);

  auto* worstcase =
      app.add_subcommand("worstcase", "worst-case size bounds and errors");
  add_common(worstcase, wc_o);
  std::string wc_level = "A3";
  bool wc_raw = false;
  worstcase->add_option("--level", wc_level, "assumption level")
      ->check(CLI::IsMember({"A1", "A2", "A3"}));
  worstcase->add_flag("--raw", wc_raw, "count raw bytes, no overhead removal");

  auto* attack = app.add_subcommand("attack", "detect responses from sizes");
  add_common(attack, atk_o);
  std::string atk_params;
  attack->add_option("--params", atk_params, "attack params json");

  auto* attack_eval =
      app.add_subcommand("attack-eval", "score the attack against truth");
  add_common(attack_eval, ae_o);
  std::vector<std::string> ae_observed;
  std::string ae_params;
  attack_eval->add_option("--observed", ae_observed,
                          "attacker-view trace file(s); default strips --in")
      ->expected(-1);
  attack_eval->add_option("--params", ae_params, "attack params json");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
    if (gen->parsed())
      cmd_gen(gen_config, gen_seed, seed_opt->count() > 0, gen_count, gen_out);
    else if (validate->parsed()) cmd_validate(validate_in);
    else if (strip->parsed()) cmd_strip(strip_o);
    else if (segments->parsed()) cmd_segments(seg_o);
    else if (indicators->parsed()) cmd_indicators(ind_o);
    else if (characterize_cmd->parsed()) cmd_characterize(chr_o);
    else if (extent->parsed()) cmd_extent(ext_o);
    else if (worstcase->parsed()) cmd_worstcase(wc_o, wc_level, wc_raw);
    else if (attack->parsed()) cmd_attack(atk_o, atk_params);
    else if (attack_eval->parsed()) cmd_attack_eval(ae_o, ae_observed, ae_params);
    return 0;
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  } catch (const TraceError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const StatError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

int run_command(int argc, const char* const* argv) {
  std::vector<std::string> args;
  args.reserve(static_cast<size_t>(argc > 0 ? argc - 1 : 0));
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run_command(args);
}

}  // namespace h2mux
