#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <ostream>
#include <string_view>
#include <vector>

#include "spatialkit/coco.hpp"
#include "spatialkit/descriptor.hpp"
#include "spatialkit/fraction.hpp"
#include "spatialkit/pairing.hpp"

namespace spatialkit {

struct Thresholds {
  Fraction tau_v = Fraction(2, 10);   // union area / image area must exceed
  Fraction tau_u = Fraction(2, 1);    // centroid distance / min diagonal must stay below
  Fraction tau_o = Fraction(3, 10);   // overlap / smaller area must stay below
  Fraction tau_s = Fraction(5, 10);   // smaller area / larger area must exceed

  /// Throws std::invalid_argument when a value is outside its range.
  void validate() const;
};

enum class Stage : std::uint8_t {
  visual_significance,
  semantic_distinction,
  spatial_clarity,
  minimal_overlap,
  size_balance,
};

inline constexpr std::size_t kStageCount = 5;
inline constexpr std::array<Stage, kStageCount> kDefaultStageOrder = {
    Stage::visual_significance, Stage::semantic_distinction, Stage::spatial_clarity,
    Stage::minimal_overlap,     Stage::size_balance,
};

std::string_view to_string(Stage s);
std::optional<Stage> parse_stage(std::string_view name);

struct PredicateResult {
  bool pass = false;
  bool degenerate = false;  // the ratio was undefined (zero denominator)
};

// Each predicate is the strict inequality printed next to its threshold.
// Area ratios are compared exactly; distance ratios by squaring both sides.

/// union / image area > tau_v. Throws on a zero-area image.
PredicateResult visual_significance(const CandidatePair& pair, const ImageRecord& image, const Fraction& tau_v,
                                    UnionMode mode = UnionMode::exact);
/// Category ids differ; names are not consulted.
PredicateResult semantic_distinction(const CandidatePair& pair);
/// centroid distance / min(diagonal) < tau_u.
PredicateResult spatial_clarity(const CandidatePair& pair, const Fraction& tau_u);
/// intersection / min(area) < tau_o.
PredicateResult minimal_overlap(const CandidatePair& pair, const Fraction& tau_o);
/// min(area) / max(area) > tau_s.
PredicateResult size_balance(const CandidatePair& pair, const Fraction& tau_s);

struct StageStats {
  std::uint64_t candidates_in = 0;
  std::array<std::uint64_t, kStageCount> dropped{};  // indexed by Stage
  std::uint64_t survivors = 0;
  std::uint64_t degenerate_relations = 0;   // coincident centroids among candidates
  std::uint64_t degenerate_predicates = 0;  // undefined ratios, counted as failures

  std::uint64_t dropped_at(Stage s) const { return dropped[static_cast<std::size_t>(s)]; }
  std::uint64_t total_dropped() const;
  bool conserved() const { return candidates_in == total_dropped() + survivors; }
  StageStats& operator+=(const StageStats& o);
  friend bool operator==(const StageStats&, const StageStats&) = default;
};

struct PipelineOptions {
  UnionMode union_mode = UnionMode::exact;
  RelationRule relation_rule = RelationRule::octant;
  std::array<Stage, kStageCount> stage_order = kDefaultStageOrder;
  unsigned threads = 1;
};

struct PipelineResult {
  std::vector<SpatialDescriptor> descriptors;  // ascending (image_id, pair_index)
  StageStats stats;
};

/// Evaluates one pair in `order`, stopping at the first failure.
/// Returns the failing stage, or nothing when the pair survives.
std::optional<Stage> first_failing_stage(const CandidatePair& pair, const ImageRecord& image,
                                         const Thresholds& thresholds, const PipelineOptions& options,
                                         bool* degenerate = nullptr);

PipelineResult run_pipeline(const DatasetIndex& dataset, const Thresholds& thresholds,
                            const PipelineOptions& options = {});

void write_stats_json(const StageStats& stats, const Thresholds& thresholds, const PipelineOptions& options,
                      std::ostream& out);
void write_stats_table(const StageStats& stats, std::ostream& out);

}  // namespace spatialkit
