// Test-only helpers: independent oracles and synthetic data.
#pragma once

#include <algorithm>
#include <cstdint>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "spatialkit/coco.hpp"
#include "spatialkit/geometry.hpp"

namespace testsupport {

using spatialkit::Rect;

// Pixel (px, py) is covered by r when x <= px < x + w and y <= py < y + h.
inline bool covers(const Rect& r, std::int64_t px, std::int64_t py) {
  return px >= r.x && px < r.x + r.w && py >= r.y && py < r.y + r.h;
}

struct RasterCounts {
  std::int64_t intersection = 0;
  std::int64_t union_ = 0;
};

// Counts covered pixels one by one. Shares no code with the library.
inline RasterCounts rasterize_pair(const Rect& a, const Rect& b) {
  const auto x0 = std::min(a.x, b.x), y0 = std::min(a.y, b.y);
  const auto x1 = std::max(a.x + a.w, b.x + b.w), y1 = std::max(a.y + a.h, b.y + b.h);
  RasterCounts c;
  for (auto py = y0; py < y1; ++py) {
    for (auto px = x0; px < x1; ++px) {
      const bool in_a = covers(a, px, py);
      const bool in_b = covers(b, px, py);
      c.intersection += in_a && in_b;
      c.union_ += in_a || in_b;
    }
  }
  return c;
}

inline Rect random_rect(std::mt19937_64& rng, int max_coord = 40, int max_size = 20) {
  std::uniform_int_distribution<int> pos(0, max_coord), size(0, max_size);
  return Rect{pos(rng), pos(rng), size(rng), size(rng)};
}

// Box strictly inside a w x h image with positive area.
inline Rect random_box_in(std::mt19937_64& rng, std::int64_t w, std::int64_t h) {
  std::uniform_int_distribution<std::int64_t> bw(1, w), bh(1, h);
  const auto bw_ = bw(rng), bh_ = bh(rng);
  std::uniform_int_distribution<std::int64_t> x(0, w - bw_), y(0, h - bh_);
  return Rect{x(rng), y(rng), bw_, bh_};
}

struct SyntheticSpec {
  int images = 50;
  int max_instances = 8;
  int categories = 5;
  std::int64_t min_side = 40;
  std::int64_t max_side = 200;
};

inline spatialkit::DatasetIndex synthetic_dataset(std::uint64_t seed, const SyntheticSpec& spec = {}) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::int64_t> side(spec.min_side, spec.max_side);
  std::uniform_int_distribution<int> count(0, spec.max_instances), cat(1, spec.categories);
  std::vector<spatialkit::Category> cats;
  for (int c = 1; c <= spec.categories; ++c) cats.push_back({c, "thing" + std::to_string(c)});
  std::vector<spatialkit::DatasetIndex::Entry> entries;
  std::int64_t next_id = 1;
  for (int i = 0; i < spec.images; ++i) {
    spatialkit::DatasetIndex::Entry e;
    e.image = {i + 1, side(rng), side(rng), "img" + std::to_string(i + 1) + ".jpg"};
    const int n = count(rng);
    for (int k = 0; k < n; ++k) {
      const int c = cat(rng);
      e.instances.push_back({next_id++, e.image.image_id, c, "thing" + std::to_string(c),
                             random_box_in(rng, e.image.width, e.image.height), false});
    }
    entries.push_back(std::move(e));
  }
  return spatialkit::DatasetIndex(std::move(entries), std::move(cats));
}

// COCO-format JSON text for a synthetic dataset (float boxes, shuffled annotations).
inline std::string to_coco_json(const spatialkit::DatasetIndex& ds, std::uint64_t shuffle_seed = 0) {
  nlohmann::json images = nlohmann::json::array(), anns = nlohmann::json::array(),
                 cats = nlohmann::json::array();
  for (const auto& c : ds.categories()) cats.push_back({{"id", c.id}, {"name", c.name}, {"supercategory", "x"}});
  for (const auto& e : ds.entries()) {
    images.push_back({{"id", e.image.image_id}, {"width", e.image.width}, {"height", e.image.height},
                      {"file_name", e.image.file_name}});
    for (const auto& o : e.instances) {
      anns.push_back({{"id", o.instance_id},
                      {"image_id", o.image_id},
                      {"category_id", o.category_id},
                      {"bbox", {double(o.bbox.x), double(o.bbox.y), double(o.bbox.w), double(o.bbox.h)}},
                      {"area", double(o.bbox.w * o.bbox.h)},
                      {"segmentation", {{1.0, 2.0, 3.0, 4.0, 5.0, 6.0}}},
                      {"iscrowd", o.is_crowd ? 1 : 0}});
    }
  }
  if (shuffle_seed) {
    std::mt19937_64 rng(shuffle_seed);
    std::vector<nlohmann::json> v(anns.begin(), anns.end());
    std::shuffle(v.begin(), v.end(), rng);
    anns = v;
  }
  return nlohmann::json{{"info", {{"year", 2017}}}, {"images", images}, {"annotations", anns}, {"categories", cats}}
      .dump();
}

inline spatialkit::LoadResult load_string(const std::string& text, const spatialkit::ValidityFilter& f = {}) {
  std::istringstream in(text);
  return spatialkit::load_dataset(in, f);
}

// The 80 COCO 2017 detection category names, in category-id order.
inline const std::vector<std::string>& coco80() {
  static const std::vector<std::string> names = {
      "person",        "bicycle",      "car",           "motorcycle",    "airplane",     "bus",
      "train",         "truck",        "boat",          "traffic light", "fire hydrant", "stop sign",
      "parking meter", "bench",        "bird",          "cat",           "dog",          "horse",
      "sheep",         "cow",          "elephant",      "bear",          "zebra",        "giraffe",
      "backpack",      "umbrella",     "handbag",       "tie",           "suitcase",     "frisbee",
      "skis",          "snowboard",    "sports ball",   "kite",          "baseball bat", "baseball glove",
      "skateboard",    "surfboard",    "tennis racket", "bottle",        "wine glass",   "cup",
      "fork",          "knife",        "spoon",         "bowl",          "banana",       "apple",
      "sandwich",      "orange",       "broccoli",      "carrot",        "hot dog",      "pizza",
      "donut",         "cake",         "chair",         "couch",         "potted plant", "bed",
      "dining table",  "toilet",       "tv",            "laptop",        "mouse",        "remote",
      "keyboard",      "cell phone",   "microwave",     "oven",          "toaster",      "sink",
      "refrigerator",  "book",         "clock",         "vase",          "scissors",     "teddy bear",
      "hair drier",    "toothbrush"};
  return names;
}

}  // namespace testsupport
