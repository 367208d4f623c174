#include "spatialkit/constraints.hpp"

#include <iomanip>
#include <numeric>
#include <stdexcept>
#include <string>

#include "json.hpp"
#include "spatialkit/parallel.hpp"

namespace spatialkit {

namespace {

constexpr std::array<std::string_view, kStageCount> kStageNames = {
    "visual_significance", "semantic_distinction", "spatial_clarity", "minimal_overlap", "size_balance",
};

using i128 = WideInt;

}  // namespace

void Thresholds::validate() const {
  const Fraction zero(0, 1);
  const Fraction one(1, 1);
  if (!(tau_v > zero && tau_v < one)) throw std::invalid_argument("tau_v must lie in (0, 1), got " + tau_v.to_string());
  if (!(tau_u > zero)) throw std::invalid_argument("tau_u must be positive, got " + tau_u.to_string());
  if (!(tau_o >= zero && tau_o <= one)) throw std::invalid_argument("tau_o must lie in [0, 1], got " + tau_o.to_string());
  if (!(tau_s > zero && tau_s <= one)) throw std::invalid_argument("tau_s must lie in (0, 1], got " + tau_s.to_string());
}

std::string_view to_string(Stage s) { return kStageNames[static_cast<std::size_t>(s)]; }

std::optional<Stage> parse_stage(std::string_view name) {
  for (std::size_t i = 0; i < kStageCount; ++i) {
    if (kStageNames[i] == name) return static_cast<Stage>(i);
  }
  return std::nullopt;
}

PredicateResult visual_significance(const CandidatePair& pair, const ImageRecord& image, const Fraction& tau_v,
                                    UnionMode mode) {
  const Area image_area = image.area();
  if (image_area <= 0) throw std::invalid_argument("visual_significance: image has zero area");
  const Area u = union_area(pair.subject->bbox, pair.object->bbox, mode);
  return {tau_v.ratio_above(u, image_area), false};
}

PredicateResult semantic_distinction(const CandidatePair& pair) {
  return {pair.subject->category_id != pair.object->category_id, false};
}

PredicateResult spatial_clarity(const CandidatePair& pair, const Fraction& tau_u) {
  const Rect& a = pair.subject->bbox;
  const Rect& b = pair.object->bbox;
  const Area min_diag_sq = std::min(diagonal_sq(a), diagonal_sq(b));
  if (min_diag_sq == 0) return {false, true};
  // d / l < n / m  with d^2 = D4 / 4  <=>  D4 * m^2 < 4 * n^2 * l^2
  const i128 d4 = centroid_distance_sq4(a, b);
  const i128 n = tau_u.num();
  const i128 m = tau_u.den();
  return {d4 * m * m < 4 * n * n * static_cast<i128>(min_diag_sq), false};
}

PredicateResult minimal_overlap(const CandidatePair& pair, const Fraction& tau_o) {
  const Rect& a = pair.subject->bbox;
  const Rect& b = pair.object->bbox;
  const Area min_area = std::min(area(a), area(b));
  if (min_area == 0) return {false, true};
  return {tau_o.ratio_below(intersection_area(a, b), min_area), false};
}

PredicateResult size_balance(const CandidatePair& pair, const Fraction& tau_s) {
  const Area sa = area(pair.subject->bbox);
  const Area sb = area(pair.object->bbox);
  const Area hi = std::max(sa, sb);
  if (hi == 0) return {false, true};
  return {tau_s.ratio_above(std::min(sa, sb), hi), false};
}

std::uint64_t StageStats::total_dropped() const {
  return std::accumulate(dropped.begin(), dropped.end(), std::uint64_t{0});
}

StageStats& StageStats::operator+=(const StageStats& o) {
  candidates_in += o.candidates_in;
  for (std::size_t i = 0; i < kStageCount; ++i) dropped[i] += o.dropped[i];
  survivors += o.survivors;
  degenerate_relations += o.degenerate_relations;
  degenerate_predicates += o.degenerate_predicates;
  return *this;
}

std::optional<Stage> first_failing_stage(const CandidatePair& pair, const ImageRecord& image,
                                         const Thresholds& thresholds, const PipelineOptions& options,
                                         bool* degenerate) {
  for (Stage s : options.stage_order) {
    PredicateResult r;
    switch (s) {
      case Stage::visual_significance:
        r = visual_significance(pair, image, thresholds.tau_v, options.union_mode);
        break;
      case Stage::semantic_distinction:
        r = semantic_distinction(pair);
        break;
      case Stage::spatial_clarity:
        r = spatial_clarity(pair, thresholds.tau_u);
        break;
      case Stage::minimal_overlap:
        r = minimal_overlap(pair, thresholds.tau_o);
        break;
      case Stage::size_balance:
        r = size_balance(pair, thresholds.tau_s);
        break;
    }
    if (!r.pass) {
      if (degenerate) *degenerate = r.degenerate;
      return s;
    }
  }
  return std::nullopt;
}

namespace {

struct ChunkResult {
  std::vector<SpatialDescriptor> descriptors;
  StageStats stats;
};

DescribedObject describe(const ObjectInstance& o) {
  return {o.instance_id, o.category_id, o.category_name, o.bbox};
}

}  // namespace

PipelineResult run_pipeline(const DatasetIndex& dataset, const Thresholds& thresholds,
                            const PipelineOptions& options) {
  thresholds.validate();
  const auto entries = dataset.entries();
  constexpr std::size_t kImagesPerChunk = 512;

  auto chunks = parallel_chunks<ChunkResult>(
      entries.size(), kImagesPerChunk, options.threads, [&](std::size_t begin, std::size_t end) {
        ChunkResult out;
        for (std::size_t i = begin; i < end; ++i) {
          const auto& entry = entries[i];
          for (const auto& pair : enumerate_pairs(entry.image, entry.instances, options.relation_rule)) {
            ++out.stats.candidates_in;
            if (pair.degenerate_relation) ++out.stats.degenerate_relations;
            bool degenerate = false;
            if (auto failed = first_failing_stage(pair, entry.image, thresholds, options, &degenerate)) {
              ++out.stats.dropped[static_cast<std::size_t>(*failed)];
              if (degenerate) ++out.stats.degenerate_predicates;
              continue;
            }
            ++out.stats.survivors;
            out.descriptors.push_back(
                {entry.image.image_id, pair.pair_index, describe(*pair.subject), pair.relation, describe(*pair.object)});
          }
        }
        return out;
      });

  PipelineResult result;
  std::size_t total = 0;
  for (const auto& c : chunks) total += c.descriptors.size();
  result.descriptors.reserve(total);
  for (auto& c : chunks) {
    result.stats += c.stats;
    std::move(c.descriptors.begin(), c.descriptors.end(), std::back_inserter(result.descriptors));
  }
  return result;
}

void write_stats_json(const StageStats& stats, const Thresholds& thresholds, const PipelineOptions& options,
                      std::ostream& out) {
  nlohmann::ordered_json drops = nlohmann::ordered_json::object();
  for (Stage s : options.stage_order) drops[std::string(to_string(s))] = stats.dropped_at(s);
  nlohmann::ordered_json doc = {
      {"candidates", stats.candidates_in},
      {"drops", drops},
      {"survivors", stats.survivors},
      {"degenerate_relations", stats.degenerate_relations},
      {"degenerate_predicates", stats.degenerate_predicates},
      {"thresholds",
       {{"tau_v", thresholds.tau_v.value()},
        {"tau_u", thresholds.tau_u.value()},
        {"tau_o", thresholds.tau_o.value()},
        {"tau_s", thresholds.tau_s.value()}}},
      {"union_mode", options.union_mode == UnionMode::exact ? "exact" : "enclosing_box"},
      {"relation_rule", options.relation_rule == RelationRule::octant ? "octant" : "axis_dominant"},
  };
  out << doc.dump(2) << '\n';
}

void write_stats_table(const StageStats& stats, std::ostream& out) {
  auto row = [&](std::string_view label, std::uint64_t v) {
    out << std::left << std::setw(24) << label << std::right << std::setw(12) << v << '\n';
  };
  row("candidates", stats.candidates_in);
  for (std::size_t i = 0; i < kStageCount; ++i) row(kStageNames[i], stats.dropped[i]);
  row("survivors", stats.survivors);
}

}  // namespace spatialkit
