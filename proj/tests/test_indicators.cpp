// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <random>

#include "doctest.h"
#include "fixtures.hpp"
#include "h2mux/indicators.hpp"
#include "h2mux/synth.hpp"

using namespace h2mux;

TEST_CASE("byte-shares capture hits exact ratios") {
  const Capture cap = fixtures::byte_shares_capture();
  const NpoIndicators ind = npo_indicators(cap, segment_capture(cap));
  CHECK(ind.byte_totals.enc_http_bytes == 2000);
  CHECK(ind.byte_totals.h2_bytes == 1000);
  CHECK(ind.byte_totals.pipelined_bytes == 800);
  CHECK(ind.byte_totals.multiplexed_bytes == 160);
  CHECK(ind.h2_over_enc == 0.5);
  CHECK(ind.pipe_over_h2 == 0.8);
  CHECK(ind.mux_over_pipe == 0.2);
}

TEST_CASE("toy capture: everything pipelined, the overlap multiplexed") {
  const Capture cap = fixtures::toy_capture();
  const NpoIndicators ind = npo_indicators(cap, segment_capture(cap));
  CHECK(ind.byte_totals.enc_http_bytes == 7042);  // 7003 response + 39 signaling
  CHECK(ind.byte_totals.h2_bytes == 7042);        // the signals carry frames too
  CHECK(ind.byte_totals.pipelined_bytes == 6970);
  CHECK(ind.byte_totals.multiplexed_bytes == 1818);
}

TEST_CASE("plain connections count toward no total") {
  using namespace fixtures;
  const Capture cap = capture(
      "p", {conn("p-c0", Protocol::Plain, {rec(Direction::S2C, 0.1, 900, 900)}),
            conn("p-c1", Protocol::Http1Tls, {rec(Direction::S2C, 0.2, 600, 550)}),
            conn("p-c2", Protocol::Http1Tls, {rec(Direction::C2S, 0.3, 400, 390)})});
  const NpoIndicators ind = npo_indicators(cap, segment_capture(cap));
  CHECK(ind.byte_totals.enc_http_bytes == 550);  // content, s2c, tls only
  CHECK(ind.byte_totals.h2_bytes == 0);
  CHECK(ind.h2_over_enc == 0.0);
  CHECK_FALSE(ind.pipe_over_h2.has_value());  // 0/0
  CHECK_FALSE(ind.mux_over_pipe.has_value());
}

TEST_CASE("an all-plain capture has every ratio absent or zero") {
  using namespace fixtures;
  const Capture cap = capture(
      "z", {conn("z-c0", Protocol::Plain, {rec(Direction::S2C, 0.1, 100, 100)})});
  const NpoIndicators ind = npo_indicators(cap, segment_capture(cap));
  CHECK_FALSE(ind.h2_over_enc.has_value());
  CHECK_FALSE(ind.pipe_over_h2.has_value());
  CHECK_FALSE(ind.mux_over_pipe.has_value());
}

TEST_CASE("missing segmentation for an h2 connection is rejected") {
  const Capture cap = fixtures::toy_capture();
  CHECK_THROWS_AS(npo_indicators(cap, {}), PreconditionError);
}

TEST_CASE("totals chain on random corpora; sequential never pipelines") {
  for (uint64_t seed = 500; seed < 540; ++seed) {
    SynthConfig cfg;
    cfg.n_connections = 2;
    cfg.policy = static_cast<Policy>(seed % 3);
    cfg.objects_per_connection = DistSpec::uniform_int(1, 5);
    cfg.object_size = DistSpec::loguniform(10, 30000);
    cfg.think_time = DistSpec::constant(0);
    cfg.seed = seed;
    const Capture cap = generate_capture(cfg);
    const NpoIndicators ind = npo_indicators(cap, segment_capture(cap));
    const ByteTotals& t = ind.byte_totals;
    CHECK(t.multiplexed_bytes <= t.pipelined_bytes);
    CHECK(t.pipelined_bytes <= t.h2_bytes);
    CHECK(t.h2_bytes <= t.enc_http_bytes);
    if (cfg.policy == Policy::Sequential) {
      CHECK(t.pipelined_bytes == 0);
      CHECK(ind.pipe_over_h2 == 0.0);
    }
  }
}

namespace {

IndicatorRow row(const std::string& site, const std::string& day, uint64_t enc,
                 uint64_t h2, uint64_t pipe, uint64_t mux) {
  IndicatorRow r;
  r.site = site;
  r.day = day;
  r.indicators.byte_totals = {enc, h2, pipe, mux};
  if (enc) r.indicators.h2_over_enc = double(h2) / double(enc);
  if (h2) r.indicators.pipe_over_h2 = double(pipe) / double(h2);
  if (pipe) r.indicators.mux_over_pipe = double(mux) / double(pipe);
  return r;
}

}  // namespace

TEST_CASE("daily aggregation is byte-weighted, not a mean of ratios") {
  // Day d1: shares 1000/100 and 100/100 -> byte-weighted 200/1100.
  const std::vector<IndicatorRow> rows = {
      row("a.example", "2017-05-01", 1000, 100, 0, 0),
      row("b.example", "2017-05-01", 100, 100, 0, 0),
      row("a.example", "2017-05-02", 500, 0, 0, 0),
  };
  const AggregatedIndicators agg = aggregate_indicators(rows);
  REQUIRE(agg.days.size() == 2);
  const DailyAggregate& d1 = agg.days[0];
  CHECK(d1.day == "2017-05-01");
  CHECK(d1.captures == 2);
  CHECK(d1.sites == 2);
  CHECK(d1.capture_proportion == 1.0);  // 2 captures vs max 2
  CHECK(d1.site_proportion == 1.0);     // both of the corpus' sites
  CHECK(d1.totals.enc_http_bytes == 1100);
  CHECK(*d1.h2_over_enc == doctest::Approx(200.0 / 1100.0));
  CHECK(*d1.pipe_over_h2 == 0.0);
  CHECK_FALSE(d1.mux_over_pipe.has_value());

  const DailyAggregate& d2 = agg.days[1];
  CHECK(d2.captures == 1);
  CHECK(d2.capture_proportion == 0.5);
  CHECK(d2.site_proportion == 0.5);
  CHECK(*d2.h2_over_enc == 0.0);
  CHECK_FALSE(d2.pipe_over_h2.has_value());
}

TEST_CASE("site summaries pool only captures where a ratio is defined") {
  const std::vector<IndicatorRow> rows = {
      row("a.example", "2017-05-01", 1000, 500, 100, 0),
      row("a.example", "2017-05-02", 1000, 0, 0, 0),    // pipe/h2 undefined
      row("a.example", "2017-05-03", 1000, 1000, 0, 0),
  };
  const AggregatedIndicators agg = aggregate_indicators(rows);
  REQUIRE(agg.sites.size() == 1);
  const SiteSummary& s = agg.sites[0];
  CHECK(s.captures == 3);
  CHECK(s.h2_over_enc.n == 3);
  CHECK(s.h2_over_enc.mean == doctest::Approx(0.5));
  CHECK(s.h2_over_enc.q.median == 0.5);
  CHECK(s.pipe_over_h2.n == 2);  // the undefined capture is left out
  CHECK(s.pipe_over_h2.mean == doctest::Approx(0.1));
  CHECK(s.mux_over_pipe.n == 1);
  CHECK(s.mux_over_pipe.mean == 0.0);
}

TEST_CASE("aggregation ignores row order and rejects empty input") {
  std::vector<IndicatorRow> rows = {
      row("a.example", "2017-05-01", 10, 5, 1, 0),
      row("c.example", "2017-05-02", 20, 6, 2, 1),
      row("b.example", "2017-05-01", 30, 7, 3, 2),
      row("a.example", "2017-05-03", 40, 8, 4, 3),
  };
  const AggregatedIndicators base = aggregate_indicators(rows);
  std::mt19937_64 rng(7);
  for (int i = 0; i < 5; ++i) {
    std::shuffle(rows.begin(), rows.end(), rng);
    const AggregatedIndicators agg = aggregate_indicators(rows);
    REQUIRE(agg.days.size() == base.days.size());
    for (size_t d = 0; d < base.days.size(); ++d) {
      CHECK(agg.days[d].day == base.days[d].day);
      CHECK(agg.days[d].totals == base.days[d].totals);
      CHECK(agg.days[d].captures == base.days[d].captures);
    }
    REQUIRE(agg.sites.size() == base.sites.size());
    for (size_t s = 0; s < base.sites.size(); ++s) {
      CHECK(agg.sites[s].site == base.sites[s].site);
      CHECK(agg.sites[s].h2_over_enc.n == base.sites[s].h2_over_enc.n);
      CHECK(agg.sites[s].h2_over_enc.mean ==
            doctest::Approx(base.sites[s].h2_over_enc.mean));
    }
  }
  CHECK_THROWS_AS(aggregate_indicators({}), PreconditionError);
}
