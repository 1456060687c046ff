// SPDX-License-Identifier: Apache-2.0

#include "doctest.h"
#include "fixtures.hpp"
#include "h2mux/characterize.hpp"
#include "h2mux/synth.hpp"

using namespace h2mux;

TEST_CASE("toy capture structure report, recounted by hand") {
  const CharacterizationReport rep = characterize({fixtures::toy_capture()});
  CHECK(rep.connections_per_endpoint == Histogram{{1, 1}});
  CHECK(rep.objects_per_connection == Histogram{{3, 1}});
  CHECK(rep.frames_per_object == Histogram{{2, 3}});   // every object: 2 DATA frames
  CHECK(rep.segments_per_frame == Histogram{{1, 6}});  // every frame: 1 segment
  CHECK(rep.data_record_overhead == Histogram{{24, 6}});
  CHECK(rep.header_record_overhead == Histogram{{33, 3}});

  REQUIRE(rep.object_size_cdf_by_frames.count(2));
  const ValueCounts& sizes = rep.object_size_cdf_by_frames.at(2);
  CHECK(sizes == ValueCounts{{1500.0, 1}, {2000.0, 1}, {3000.0, 1}});
  const ValueCounts& frames = rep.frame_size_cdf_by_segments.at(1);
  CHECK(frames ==
        ValueCounts{{700.0, 1}, {800.0, 1}, {1000.0, 2}, {1500.0, 2}});
}

TEST_CASE("multi-segment frames and multi-frame objects from the generator") {
  SynthConfig cfg;
  cfg.objects_per_connection = DistSpec::constant(1);
  cfg.object_size = DistSpec::constant(5000);
  cfg.max_frame = 2000;        // -> frames 2000,2000,1000
  cfg.data_seg_target = 900;   // -> segments 900,900,200 / ... / 900,100
  const CharacterizationReport rep = characterize({generate_capture(cfg)});
  CHECK(rep.frames_per_object == Histogram{{3, 1}});
  CHECK(rep.segments_per_frame == Histogram{{2, 1}, {3, 2}});
  CHECK(rep.object_size_cdf_by_frames.at(3) == ValueCounts{{5000.0, 1}});
  CHECK(rep.frame_size_cdf_by_segments.at(3) == ValueCounts{{2000.0, 2}});
  CHECK(rep.frame_size_cdf_by_segments.at(2) == ValueCounts{{1000.0, 1}});
  CHECK(rep.data_record_overhead == Histogram{{24, 8}});
}

TEST_CASE("endpoint counting groups h2 connections by capture and server") {
  using namespace fixtures;
  auto h2conn = [](const std::string& id, const std::string& server) {
    ConnectionTrace c = conn(id, Protocol::Http2Tls, {});
    c.server = server;
    return c;
  };
  Capture a = capture("a", {h2conn("a-c0", "s0"), h2conn("a-c1", "s0"),
                            h2conn("a-c2", "s1"),
                            conn("a-c3", Protocol::Http1Tls, {})});
  Capture b = capture("b", {h2conn("b-c0", "s0")});
  const CharacterizationReport rep = characterize({a, b});
  // (a,s0) -> 2 connections; (a,s1) -> 1; (b,s0) -> 1.
  CHECK(rep.connections_per_endpoint == Histogram{{1, 2}, {2, 1}});
  CHECK(rep.objects_per_connection == Histogram{{0, 4}});
}

TEST_CASE("reports merge like recomputing over the union") {
  SynthConfig cfg;
  cfg.n_connections = 2;
  cfg.objects_per_connection = DistSpec::uniform_int(1, 4);
  cfg.object_size = DistSpec::loguniform(10, 40000);
  std::vector<Capture> caps;
  for (uint64_t seed = 900; seed < 905; ++seed) {
    cfg.seed = seed;
    cfg.policy = static_cast<Policy>(seed % 3);
    cfg.capture_id = "m-" + std::to_string(seed);
    caps.push_back(generate_capture(cfg));
  }
  CharacterizationReport left = characterize({caps[0], caps[1]});
  const CharacterizationReport right = characterize({caps[2], caps[3], caps[4]});
  CHECK(left.merge(right) == characterize(caps));

  // Merging an empty report is a no-op, and merge order does not matter.
  CharacterizationReport empty;
  CharacterizationReport both = characterize(caps);
  CHECK(both.merge(empty) == characterize(caps));
  CharacterizationReport ab = characterize({caps[0]});
  ab.merge(characterize({caps[1]}));
  CharacterizationReport ba = characterize({caps[1]});
  ba.merge(characterize({caps[0]}));
  CHECK(ab == ba);

  const CorpusSegmentation segs = segment_corpus(caps);
  ExtentReport eleft = extent_report({caps[0], caps[1]}, segs);
  const ExtentReport eright = extent_report({caps[2], caps[3], caps[4]}, segs);
  CHECK(eleft.merge(eright) == extent_report(caps, segs));
}

TEST_CASE("size ranges bucket by response data bytes") {
  CHECK(size_range_index(0) == 0);
  CHECK(size_range_index(10) == 0);
  CHECK(size_range_index(11) == 1);
  CHECK(size_range_index(100) == 1);
  CHECK(size_range_index(101) == 2);
  CHECK(size_range_index(1000) == 2);
  CHECK(size_range_index(10000) == 3);
  CHECK(size_range_index(10001) == 4);
  CHECK(std::string(size_range_label(0)) == "(0,10]");
  CHECK(std::string(size_range_label(4)) == ">10k");
}

TEST_CASE("extent report on the byte-shares capture") {
  const Capture cap = fixtures::byte_shares_capture();
  const std::vector<Capture> caps = {cap};
  const ExtentReport rep = extent_report(caps, segment_corpus(caps));
  CHECK(rep.h2_share == ValueCounts{{0.5, 1}});
  CHECK(rep.pipe_share == ValueCounts{{0.8, 1}});
  CHECK(rep.mux_share == ValueCounts{{0.2, 1}});
  // Objects 200/400/400 data bytes, all in (100,1k].
  const SizeRangeStats& r = rep.ranges[2];
  CHECK(r.objects == 3);
  CHECK(r.pipelined == 2);    // streams 3 and 5
  CHECK(r.multiplexed == 2);  // the same two
  CHECK(r.single_segment == 1);  // stream 1; 3 and 5 split across segments
  CHECK(r.conn_mates == Histogram{{3, 3}});
  for (size_t i : {0u, 1u, 3u, 4u}) CHECK(rep.ranges[i] == SizeRangeStats{});
  CHECK(rep.pipelining_stream_counts == Histogram{{1, 1}, {2, 1}});
  CHECK(rep.multiplexing_stream_counts == Histogram{{2, 1}});
}

TEST_CASE("extent report on the toy capture") {
  const std::vector<Capture> caps = {fixtures::toy_capture()};
  const ExtentReport rep = extent_report(caps, segment_corpus(caps));
  const SizeRangeStats& r = rep.ranges[3];  // 3000/2000/1500 all in (1k,10k]
  CHECK(r.objects == 3);
  CHECK(r.pipelined == 3);
  CHECK(r.multiplexed == 2);
  CHECK(r.single_segment == 0);  // each object spans two DATA segments
  CHECK(r.conn_mates == Histogram{{3, 3}});
  CHECK(rep.pipelining_stream_counts == Histogram{{3, 1}});
  CHECK(rep.multiplexing_stream_counts == Histogram{{2, 1}});
}

TEST_CASE("extent report demands segmentation for every capture") {
  const std::vector<Capture> caps = {fixtures::toy_capture()};
  CHECK_THROWS_AS(extent_report(caps, {}), PreconditionError);
}

TEST_CASE("a capture with no h2 bytes contributes zero shares") {
  using namespace fixtures;
  const Capture cap = capture(
      "n", {conn("n-c0", Protocol::Http1Tls, {rec(Direction::S2C, 0.1, 70, 70)})});
  const std::vector<Capture> caps = {cap};
  const ExtentReport rep = extent_report(caps, segment_corpus(caps));
  CHECK(rep.h2_share == ValueCounts{{0.0, 1}});
  CHECK(rep.pipe_share == ValueCounts{{0.0, 1}});
  CHECK(rep.mux_share == ValueCounts{{0.0, 1}});
}

TEST_CASE("ecdf points accumulate value counts") {
  const ValueCounts vc = {{1.0, 1}, {2.0, 3}};
  const auto pts = ecdf_points(vc);
  REQUIRE(pts.size() == 2);
  CHECK(pts[0] == std::pair<double, double>{1.0, 0.25});
  CHECK(pts[1] == std::pair<double, double>{2.0, 1.0});
  CHECK(ecdf_points({}).empty());
}
