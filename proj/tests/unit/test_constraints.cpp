#include <algorithm>
#include <random>
#include <set>
#include <sstream>
#include <tuple>

#include "doctest.h"
#include "spatialkit/constraints.hpp"
#include "support.hpp"

using namespace spatialkit;

namespace {

struct Fixture {
  ImageRecord image{1, 100, 100, "a.jpg"};
  ObjectInstance s{1, 1, 1, "cup", {}, false};
  ObjectInstance o{2, 1, 2, "couch", {}, false};
  CandidatePair pair(const Rect& a, const Rect& b) {
    s.bbox = a;
    o.bbox = b;
    return CandidatePair{1, 0, &s, &o, classify_relation(a, b).token, false};
  }
};

using SurvivorKey = std::tuple<ImageId, std::uint32_t>;

std::set<SurvivorKey> survivor_keys(const PipelineResult& r) {
  std::set<SurvivorKey> keys;
  for (const auto& d : r.descriptors) keys.emplace(d.image_id, d.pair_index);
  return keys;
}

}  // namespace

TEST_CASE("visual significance") {
  Fixture f;
  const Fraction tau(2, 10);
  CHECK_FALSE(visual_significance(f.pair({0, 0, 30, 30}, {50, 50, 30, 30}), f.image, tau).pass);  // 0.18
  CHECK(visual_significance(f.pair({0, 0, 100, 100}, {0, 0, 50, 50}), f.image, tau).pass);
  CHECK_FALSE(visual_significance(f.pair({0, 0, 20, 50}, {50, 0, 20, 50}), f.image, tau).pass);  // exactly 0.2
  CHECK(visual_significance(f.pair({0, 0, 20, 50}, {50, 0, 20, 51}), f.image, tau).pass);
  // overlapping boxes: exact union 175 vs enclosing box 225 of a 1000 px image
  ImageRecord small{2, 40, 25, "b.jpg"};
  auto p = f.pair({0, 0, 10, 10}, {5, 5, 10, 10});
  CHECK_FALSE(visual_significance(p, small, tau, UnionMode::exact).pass);
  CHECK(visual_significance(p, small, tau, UnionMode::enclosing_box).pass);
  ImageRecord empty{3, 0, 10, "c.jpg"};
  CHECK_THROWS_AS(visual_significance(p, empty, tau), std::invalid_argument);
}

TEST_CASE("semantic distinction uses ids") {
  Fixture f;
  auto p = f.pair({0, 0, 1, 1}, {5, 5, 1, 1});
  CHECK(semantic_distinction(p).pass);
  f.o.category_id = 1;
  CHECK_FALSE(semantic_distinction(p).pass);
  f.o.category_name = "cup";
  f.o.category_id = 9;
  CHECK(semantic_distinction(p).pass);
}

TEST_CASE("spatial clarity") {
  Fixture f;
  const Fraction tau(2, 1);
  CHECK(spatial_clarity(f.pair({0, 0, 10, 10}, {0, 0, 10, 10}), tau).pass);
  CHECK_FALSE(spatial_clarity(f.pair({0, 0, 3, 4}, {20, 0, 3, 4}), tau).pass);  // 20 / 5
  CHECK_FALSE(spatial_clarity(f.pair({0, 0, 3, 4}, {6, 8, 3, 4}), tau).pass);   // 10 / 5 exactly
  CHECK(spatial_clarity(f.pair({0, 0, 3, 4}, {6, 7, 3, 4}), tau).pass);
  const auto degenerate = spatial_clarity(f.pair({0, 0, 0, 0}, {5, 5, 0, 0}), tau);
  CHECK_FALSE(degenerate.pass);
  CHECK(degenerate.degenerate);
}

TEST_CASE("minimal overlap") {
  Fixture f;
  const Fraction tau(3, 10);
  CHECK_FALSE(minimal_overlap(f.pair({0, 0, 10, 10}, {0, 0, 10, 10}), tau).pass);
  CHECK(minimal_overlap(f.pair({0, 0, 10, 10}, {20, 0, 10, 10}), tau).pass);
  CHECK(minimal_overlap(f.pair({0, 0, 10, 10}, {5, 5, 10, 10}), tau).pass);  // 0.25
  CHECK_FALSE(minimal_overlap(f.pair({0, 0, 10, 10}, {7, 0, 10, 10}), tau).pass);  // 0.3 exactly
  const auto degenerate = minimal_overlap(f.pair({0, 0, 0, 10}, {0, 0, 10, 10}), tau);
  CHECK_FALSE(degenerate.pass);
  CHECK(degenerate.degenerate);
}

TEST_CASE("size balance") {
  Fixture f;
  const Fraction tau(5, 10);
  CHECK(size_balance(f.pair({0, 0, 30, 30}, {40, 40, 30, 30}), tau).pass);
  CHECK_FALSE(size_balance(f.pair({0, 0, 10, 10}, {40, 40, 30, 30}), tau).pass);
  CHECK_FALSE(size_balance(f.pair({0, 0, 15, 30}, {40, 40, 30, 30}), tau).pass);  // 450 / 900
  CHECK(size_balance(f.pair({0, 0, 16, 30}, {40, 40, 30, 30}), tau).pass);
  const auto degenerate = size_balance(f.pair({0, 0, 0, 10}, {0, 0, 10, 0}), tau);
  CHECK_FALSE(degenerate.pass);
  CHECK(degenerate.degenerate);
}

TEST_CASE("thresholds validation") {
  Thresholds t;
  CHECK_NOTHROW(t.validate());
  t.tau_v = Fraction(1, 1);
  CHECK_THROWS_AS(t.validate(), std::invalid_argument);
  t = {};
  t.tau_u = Fraction(0, 1);
  CHECK_THROWS_AS(t.validate(), std::invalid_argument);
  t = {};
  t.tau_o = Fraction(11, 10);
  CHECK_THROWS_AS(t.validate(), std::invalid_argument);
  t = {};
  t.tau_s = Fraction(0, 1);
  CHECK_THROWS_AS(t.validate(), std::invalid_argument);
  t.tau_s = Fraction(1, 1);
  CHECK_NOTHROW(t.validate());
}

TEST_CASE("pipeline on hand-built datasets") {
  CHECK(run_pipeline(DatasetIndex{}, Thresholds{}).stats == StageStats{});

  // 100x100 image, 40x40 and 40x20 side by side: passes everything but size balance (800/1600 = 0.5)
  std::vector<DatasetIndex::Entry> entries(1);
  entries[0].image = {1, 100, 100, "a.jpg"};
  entries[0].instances = {{1, 1, 1, "cup", {0, 0, 40, 40}, false}, {2, 1, 2, "couch", {45, 10, 40, 20}, false}};
  const auto r = run_pipeline(DatasetIndex(entries, {{1, "cup"}, {2, "couch"}}), Thresholds{});
  CHECK(r.stats.candidates_in == 1);
  CHECK(r.stats.dropped_at(Stage::size_balance) == 1);
  CHECK(r.stats.total_dropped() == 1);
  CHECK(r.stats.survivors == 0);

  entries[0].instances[1].bbox = {45, 0, 40, 40};
  const auto kept = run_pipeline(DatasetIndex(entries, {{1, "cup"}, {2, "couch"}}), Thresholds{});
  REQUIRE(kept.descriptors.size() == 1);
  CHECK(kept.descriptors[0].relation == RelationToken::left);
  CHECK(kept.descriptors[0].subject.category_name == "cup");
  CHECK(kept.descriptors[0].object.bbox == Rect{45, 0, 40, 40});
}

TEST_CASE("conservation on random datasets") {
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    const auto ds = testsupport::synthetic_dataset(seed, {.images = 30});
    const auto r = run_pipeline(ds, Thresholds{});
    REQUIRE(r.stats.conserved());
    REQUIRE(r.stats.candidates_in == ds.pair_count());
    REQUIRE(r.stats.survivors == r.descriptors.size());
  }
}

TEST_CASE("stage order changes attribution only") {
  // Dense layout so that every stage drops something.
  const auto ds = testsupport::synthetic_dataset(17, {.images = 400, .max_instances = 8, .categories = 3});
  const auto base = run_pipeline(ds, Thresholds{});
  for (int s = 0; s < 5; ++s) CHECK(base.stats.dropped[s] > 0);
  CHECK(base.stats.survivors > 0);

  std::array<Stage, kStageCount> order = kDefaultStageOrder;
  std::sort(order.begin(), order.end());
  std::mt19937_64 rng(3);
  bool attribution_changed = false;
  for (int i = 0; i < 12; ++i) {
    std::shuffle(order.begin(), order.end(), rng);
    PipelineOptions opt;
    opt.stage_order = order;
    const auto r = run_pipeline(ds, Thresholds{}, opt);
    REQUIRE(survivor_keys(r) == survivor_keys(base));
    REQUIRE(r.stats.conserved());
    attribution_changed |= r.stats.dropped != base.stats.dropped;
  }
  CHECK(attribution_changed);
}

TEST_CASE("threshold monotonicity") {
  const auto ds = testsupport::synthetic_dataset(23, {.images = 300});
  const auto survivors = [&](const Thresholds& t) { return run_pipeline(ds, t).stats.survivors; };
  const Thresholds base;
  const auto n = survivors(base);
  Thresholds t = base;
  t.tau_v = Fraction(3, 10);
  CHECK(survivors(t) <= n);
  t = base;
  t.tau_s = Fraction(7, 10);
  CHECK(survivors(t) <= n);
  t = base;
  t.tau_u = Fraction(3, 2);
  CHECK(survivors(t) <= n);
  t = base;
  t.tau_o = Fraction(1, 10);
  CHECK(survivors(t) <= n);

  // chain of increasing tau_v values
  std::uint64_t prev = UINT64_MAX;
  for (int k = 1; k < 10; ++k) {
    t = base;
    t.tau_v = Fraction(k, 10);
    const auto s = survivors(t);
    CHECK(s <= prev);
    prev = s;
  }
}

TEST_CASE("pipeline is deterministic across thread counts") {
  const auto ds = testsupport::synthetic_dataset(31, {.images = 3000});
  PipelineOptions one;
  const auto a = run_pipeline(ds, Thresholds{}, one);
  for (unsigned threads : {2u, 3u, 8u}) {
    PipelineOptions opt;
    opt.threads = threads;
    const auto b = run_pipeline(ds, Thresholds{}, opt);
    CHECK(b.stats == a.stats);
    CHECK(b.descriptors == a.descriptors);
  }
  std::ostringstream j1, j2;
  write_stats_json(a.stats, Thresholds{}, one, j1);
  write_stats_json(run_pipeline(ds, Thresholds{}, one).stats, Thresholds{}, one, j2);
  CHECK(j1.str() == j2.str());
}

TEST_CASE("stats report") {
  StageStats s;
  s.candidates_in = 10;
  s.dropped = {1, 2, 3, 1, 1};
  s.survivors = 2;
  CHECK(s.conserved());
  std::ostringstream out;
  write_stats_json(s, Thresholds{}, PipelineOptions{}, out);
  const auto doc = nlohmann::json::parse(out.str());
  CHECK(doc["candidates"] == 10);
  CHECK(doc["drops"]["spatial_clarity"] == 3);
  CHECK(doc["survivors"] == 2);
  CHECK(doc["union_mode"] == "exact");
  std::ostringstream table;
  write_stats_table(s, table);
  CHECK(table.str().find("minimal_overlap") != std::string::npos);
  CHECK(parse_stage("size_balance") == Stage::size_balance);
  CHECK_FALSE(parse_stage("nope").has_value());
}
