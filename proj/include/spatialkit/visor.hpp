#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <istream>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "spatialkit/geometry.hpp"
#include "spatialkit/proxy.hpp"

namespace spatialkit::visor {

using proxy::Relation;

struct Detection {
  std::string category;
  Rect bbox;
  double confidence = 0.0;
};

struct Expectation {
  std::string a;
  Relation relation = Relation::left;
  std::string b;
};

/// One generated image for one prompt; VISOR uses four per prompt.
struct TrialRecord {
  std::string prompt_id;
  int image_index = 0;
  std::vector<Detection> detections;
  Expectation expected;
};

struct Judgment {
  bool objects_present = false;
  bool relation_correct = false;
};

/// Does box `a` stand in `relation` to box `b`? Strict centroid comparison
/// on the single relevant axis (x for left/right, y-down for above/below).
bool relation_holds(const Rect& a, Relation relation, const Rect& b);

/// Both categories detected at or above `conf_threshold`; the relation is
/// then checked between the highest-confidence box of each.
Judgment judge_trial(const TrialRecord& t, double conf_threshold = 0.1);

struct VisorScores {
  double oa = 0.0;      // images with both objects present
  double uncond = 0.0;  // images with the correct relation
  double cond = 0.0;    // correct among object-present images
  std::array<double, 4> visor_n{};  // prompts with at least n correct images
  std::uint64_t prompts = 0;
  std::uint64_t images = 0;
  std::uint64_t present = 0;
  std::uint64_t correct = 0;
  std::array<std::uint64_t, 4> at_least{};  // prompt counts behind visor_n
};

/// Thrown when a prompt does not have exactly four images.
class IncompletePromptError : public std::runtime_error {
 public:
  IncompletePromptError(const std::string& what, std::vector<std::string> ids)
      : std::runtime_error(what), prompt_ids(std::move(ids)) {}
  std::vector<std::string> prompt_ids;
};

/// Per-image outcome already decided, keyed by prompt.
struct ImageOutcome {
  std::string prompt_id;
  int image_index = 0;
  Judgment judgment;
};

VisorScores aggregate(std::span<const TrialRecord> trials, double conf_threshold = 0.1);
VisorScores aggregate_outcomes(std::span<const ImageOutcome> outcomes);

std::vector<TrialRecord> read_trials(std::istream& in);
void write_trials(std::span<const TrialRecord> trials, std::ostream& out);

/// Columns uncond, cond, 1, 2, 3, 4, OA in percent.
void write_scores_table(const VisorScores& s, std::string_view method, std::ostream& out);
void write_scores_json(const VisorScores& s, std::ostream& out);

/// Reflects every box about the vertical axis x = image_width / 2.
TrialRecord mirror_horizontally(const TrialRecord& t, Coord image_width);

}  // namespace spatialkit::visor
