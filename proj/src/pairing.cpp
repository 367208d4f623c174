#include "spatialkit/pairing.hpp"

#include <cstdlib>
#include <stdexcept>
#include <string>

#include "spatialkit/fraction.hpp"

namespace spatialkit {

namespace {

constexpr std::array<std::string_view, 9> kNames = {
    "<left>",       "<right>",      "<above>",      "<below>", "<left+above>",
    "<right+above>", "<left+below>", "<right+below>", "<and>",
};

RelationToken diagonal(bool right, bool below) {
  if (right) return below ? RelationToken::right_below : RelationToken::right_above;
  return below ? RelationToken::left_below : RelationToken::left_above;
}

}  // namespace

std::string_view to_string(RelationToken t) { return kNames[static_cast<std::size_t>(t)]; }

std::optional<RelationToken> parse_relation_token(std::string_view text) {
  for (auto t : kAllTokens) {
    if (kNames[static_cast<std::size_t>(t)] == text) return t;
  }
  return std::nullopt;
}

Classification classify_relation(const Rect& subject, const Rect& object, RelationRule rule) {
  const auto s = doubled_centroid(subject);
  const auto o = doubled_centroid(object);
  const Coord dx = s.x2 - o.x2;
  const Coord dy = s.y2 - o.y2;
  if (dx == 0 && dy == 0) return {RelationToken::and_, true};

  const WideInt ax = std::llabs(dx);
  const WideInt ay = std::llabs(dy);
  const bool right = dx > 0;
  const bool below = dy > 0;

  if (rule == RelationRule::axis_dominant) {
    if (ax > ay) return {right ? RelationToken::right : RelationToken::left, false};
    if (ay > ax) return {below ? RelationToken::below : RelationToken::above, false};
    return {diagonal(right, below), false};
  }

  // Horizontal sector: ay < tan(22.5) * ax = (sqrt2 - 1) * ax,
  // i.e. (ax + ay)^2 < 2 ax^2. Equality is the sector edge and goes diagonal.
  const WideInt sum = ax + ay;
  if (sum * sum < 2 * ax * ax) return {right ? RelationToken::right : RelationToken::left, false};
  if (sum * sum < 2 * ay * ay) return {below ? RelationToken::below : RelationToken::above, false};
  return {diagonal(right, below), false};
}

std::vector<CandidatePair> enumerate_pairs(const ImageRecord& image, std::span<const ObjectInstance> instances,
                                           RelationRule rule) {
  std::vector<CandidatePair> out;
  const std::size_t n = instances.size();
  if (n < 2) return out;
  out.reserve(n * (n - 1) / 2);
  std::uint32_t index = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (instances[i].image_id != image.image_id) {
      throw std::invalid_argument("instance " + std::to_string(instances[i].instance_id) + " is not in image " +
                                  std::to_string(image.image_id));
    }
    for (std::size_t j = i + 1; j < n; ++j) {
      const auto c = classify_relation(instances[i].bbox, instances[j].bbox, rule);
      out.push_back({image.image_id, index++, &instances[i], &instances[j], c.token, c.degenerate});
    }
  }
  return out;
}

}  // namespace spatialkit
