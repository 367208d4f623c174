#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "spatialkit/coco.hpp"
#include "spatialkit/geometry.hpp"

namespace spatialkit {

/// Position of a subject relative to an object. `and_` is the neutral
/// token substituted at decode time.
enum class RelationToken : std::uint8_t {
  left,
  right,
  above,
  below,
  left_above,
  right_above,
  left_below,
  right_below,
  and_,
};

inline constexpr std::array<RelationToken, 8> kDirectionalTokens = {
    RelationToken::left,       RelationToken::right,       RelationToken::above,
    RelationToken::below,      RelationToken::left_above,  RelationToken::right_above,
    RelationToken::left_below, RelationToken::right_below,
};

inline constexpr std::array<RelationToken, 9> kAllTokens = {
    RelationToken::left,       RelationToken::right,       RelationToken::above,
    RelationToken::below,      RelationToken::left_above,  RelationToken::right_above,
    RelationToken::left_below, RelationToken::right_below, RelationToken::and_,
};

/// "<left>", "<right+above>", "<and>", ...
std::string_view to_string(RelationToken t);
std::optional<RelationToken> parse_relation_token(std::string_view text);

/// 180-degree rotation; an involution with <and> fixed.
constexpr RelationToken opposite(RelationToken t) {
  switch (t) {
    case RelationToken::left: return RelationToken::right;
    case RelationToken::right: return RelationToken::left;
    case RelationToken::above: return RelationToken::below;
    case RelationToken::below: return RelationToken::above;
    case RelationToken::left_above: return RelationToken::right_below;
    case RelationToken::right_above: return RelationToken::left_below;
    case RelationToken::left_below: return RelationToken::right_above;
    case RelationToken::right_below: return RelationToken::left_above;
    case RelationToken::and_: return RelationToken::and_;
  }
  return t;
}

enum class RelationRule {
  octant,         // 8 sectors of 45 degrees, cardinal sectors span +-22.5
  axis_dominant,  // the larger of |dx|, |dy| wins; exact diagonals stay diagonal
};

struct Classification {
  RelationToken token = RelationToken::and_;
  bool degenerate = false;  // coincident centroids
};

/// Token for where `subject` sits relative to `object`, from the centroid
/// displacement subject - object (image coordinates, y down). Exact integer
/// arithmetic; odd multiples of 22.5 degrees resolve to the diagonal token.
Classification classify_relation(const Rect& subject, const Rect& object, RelationRule rule = RelationRule::octant);

/// Ordered pair drawn from one image's instance list. Points into the
/// DatasetIndex it was enumerated from, which must outlive it.
struct CandidatePair {
  ImageId image_id = 0;
  std::uint32_t pair_index = 0;  // position in the image's canonical enumeration
  const ObjectInstance* subject = nullptr;
  const ObjectInstance* object = nullptr;
  RelationToken relation = RelationToken::and_;
  bool degenerate_relation = false;
};

/// All n(n-1)/2 pairs (i < j by instance_id) with their relation token.
std::vector<CandidatePair> enumerate_pairs(const ImageRecord& image, std::span<const ObjectInstance> instances,
                                           RelationRule rule = RelationRule::octant);

}  // namespace spatialkit
