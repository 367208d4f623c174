#include <set>
#include <sstream>

#include "doctest.h"
#include "spatialkit/coco.hpp"
#include "support.hpp"

using namespace spatialkit;
using testsupport::load_string;

namespace {

const char* kSmall = R"({
  "info": {"description": "tiny", "nested": {"bbox": [9, 9, 9, 9]}},
  "images": [
    {"id": 2, "width": 50, "height": 40, "file_name": "b.jpg", "license": 1},
    {"id": 1, "width": 100, "height": 80, "file_name": "a.jpg"}
  ],
  "annotations": [
    {"id": 12, "image_id": 1, "category_id": 3, "bbox": [12.3, 4.6, 10.2, 8.9], "iscrowd": 0,
     "segmentation": [[1, 2, 3, 4]], "area": 90.0},
    {"id": 11, "image_id": 1, "category_id": 1, "bbox": [90.0, 70.0, 20.0, 20.0], "iscrowd": 0},
    {"id": 13, "image_id": 1, "category_id": 1, "bbox": [0, 0, 5, 5], "iscrowd": 1,
     "segmentation": {"counts": [1, 2], "size": [80, 100]}},
    {"id": 14, "image_id": 9, "category_id": 1, "bbox": [0, 0, 5, 5], "iscrowd": 0},
    {"id": 15, "image_id": 2, "category_id": 77, "bbox": [0, 0, 5, 5], "iscrowd": 0},
    {"id": 16, "image_id": 2, "category_id": 1, "bbox": [3.2, 3.2, 0.4, 8], "iscrowd": 0},
    {"id": 17, "image_id": 2, "category_id": 3, "iscrowd": 0},
    {"id": 18, "image_id": 2, "category_id": 3, "bbox": [1, 1, 4, 4]}
  ],
  "categories": [
    {"id": 3, "name": "couch", "supercategory": "furniture"},
    {"id": 1, "name": "cup", "supercategory": "kitchen"},
    {"id": 1, "name": "mug", "supercategory": "kitchen"}
  ]
})";

std::set<InstanceId> instance_ids(const DatasetIndex& ds) {
  std::set<InstanceId> ids;
  for (const auto& e : ds.entries())
    for (const auto& o : e.instances) ids.insert(o.instance_id);
  return ids;
}

}  // namespace

TEST_CASE("loads and normalizes a small file") {
  const auto r = load_string(kSmall);
  const auto& ds = r.dataset;
  REQUIRE(ds.image_count() == 2);
  CHECK(ds.entries()[0].image.image_id == 1);
  CHECK(ds.entries()[0].image.file_name == "a.jpg");
  const auto* e1 = ds.find(1);
  REQUIRE(e1 != nullptr);
  REQUIRE(e1->instances.size() == 2);
  CHECK(e1->instances[0].instance_id == 11);
  CHECK(e1->instances[0].bbox == Rect{90, 70, 10, 10});  // clamped to the image
  CHECK(e1->instances[1].bbox == Rect{12, 5, 10, 9});
  CHECK(area(e1->instances[1].bbox) == 90);
  CHECK(e1->instances[1].category_name == "couch");
  CHECK(e1->instances[0].category_name == "cup");  // first definition wins

  const auto* e2 = ds.find(2);
  REQUIRE(e2 != nullptr);
  REQUIRE(e2->instances.size() == 1);
  CHECK(e2->instances[0].instance_id == 18);  // iscrowd absent means not crowd
  CHECK(ds.find(5) == nullptr);

  REQUIRE(r.rejects.size() == 5);
  CHECK(r.rejects[0].instance_id == 13);
  CHECK(r.rejects[0].reason == "crowd");
  CHECK(r.rejects[1].reason == "unknown_image");
  CHECK(r.rejects[2].reason == "unknown_category");
  CHECK(r.rejects[3].reason == "empty_box");  // width rounds to 0
  CHECK(r.rejects[4].reason == "missing_field");

  const auto cats = category_table(ds);
  REQUIRE(cats.size() == 2);
  CHECK(cats[0] == Category{1, "cup"});
  CHECK(cats[1] == Category{3, "couch"});
  CHECK(ds.instance_count() == 3);
  CHECK(ds.pair_count() == 1);
}

TEST_CASE("crowd instances can be kept") {
  ValidityFilter f;
  f.exclude_crowd = false;
  const auto r = load_string(kSmall, f);
  const auto* e1 = r.dataset.find(1);
  REQUIRE(e1->instances.size() == 3);
  CHECK(e1->instances[2].is_crowd);
}

TEST_CASE("reject log is JSONL") {
  const auto r = load_string(kSmall);
  std::ostringstream out;
  write_rejects(r.rejects, out);
  std::istringstream in(out.str());
  std::string line;
  int n = 0;
  while (std::getline(in, line)) {
    const auto j = nlohmann::json::parse(line);
    CHECK(j.contains("instance_id"));
    CHECK(j.contains("reason"));
    ++n;
  }
  CHECK(n == 5);
}

TEST_CASE("empty annotations give empty pair lists") {
  const auto r = load_string(R"({"images": [{"id": 1, "width": 10, "height": 10, "file_name": "a"}],
                                 "annotations": [], "categories": []})");
  CHECK(r.dataset.image_count() == 1);
  CHECK(r.dataset.instance_count() == 0);
  CHECK(r.dataset.pair_count() == 0);
  CHECK(r.rejects.empty());
}

TEST_CASE("malformed input reports a byte offset") {
  const std::string text = R"({"images": [{"id": 1, "width": 10, "height": 10, "file_name": "a"}], "annotations": [ {"id": 1,, }]})";
  try {
    load_string(text);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.byte() > 60);
    CHECK(e.byte() <= text.size());
    CHECK(std::string(e.what()).find("byte") != std::string::npos);
  }
  CHECK_THROWS_AS(load_string("[1, 2]"), ParseError);
  CHECK_THROWS_AS(load_string("5"), ParseError);
  CHECK_THROWS_AS(load_string(R"({"images": {"id": 1}})"), ParseError);
  CHECK_THROWS_AS(load_string(R"({"images": [{"id": 1, "width": 10}]})"), ParseError);
  CHECK_THROWS_AS(load_string(R"({"images": [{"id": 1, "width": 10, "height": 10, "file_name": "a"},
                                             {"id": 1, "width": 10, "height": 10, "file_name": "b"}]})"),
                  ParseError);
}

TEST_CASE("annotation order does not matter") {
  const auto ds = testsupport::synthetic_dataset(8, {.images = 60});
  const auto a = load_string(testsupport::to_coco_json(ds));
  const auto b = load_string(testsupport::to_coco_json(ds, 12345));
  CHECK(a.dataset == b.dataset);
  CHECK(a.dataset == ds);
  CHECK(a.rejects.empty());
}

TEST_CASE("stricter filters keep subsets") {
  const auto ds = testsupport::synthetic_dataset(9, {.images = 80});
  const auto text = testsupport::to_coco_json(ds);
  std::set<InstanceId> prev;
  bool first = true;
  for (Area min_area : {1, 10, 100, 1000, 5000}) {
    ValidityFilter f;
    f.min_area = min_area;
    const auto ids = instance_ids(load_string(text, f).dataset);
    if (!first) CHECK(std::includes(prev.begin(), prev.end(), ids.begin(), ids.end()));
    prev = ids;
    first = false;
  }
}

TEST_CASE("normalized form round-trips") {
  const auto ds = load_string(kSmall).dataset;
  std::stringstream buf;
  save_normalized(ds, buf);
  CHECK(load_normalized(buf) == ds);

  const auto big = testsupport::synthetic_dataset(10, {.images = 40});
  std::stringstream buf2;
  save_normalized(big, buf2);
  CHECK(load_normalized(buf2) == big);
}
