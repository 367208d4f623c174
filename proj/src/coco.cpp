#include "spatialkit/coco.hpp"

#include <algorithm>
#include <fstream>
#include <optional>
#include <unordered_map>

#include "json.hpp"

namespace spatialkit {

using nlohmann::json;

DatasetIndex::DatasetIndex(std::vector<Entry> entries, std::vector<Category> categories)
    : entries_(std::move(entries)), categories_(std::move(categories)) {
  std::sort(entries_.begin(), entries_.end(),
            [](const Entry& a, const Entry& b) { return a.image.image_id < b.image.image_id; });
  for (auto& e : entries_) {
    std::sort(e.instances.begin(), e.instances.end(),
              [](const ObjectInstance& a, const ObjectInstance& b) { return a.instance_id < b.instance_id; });
  }
  std::sort(categories_.begin(), categories_.end(),
            [](const Category& a, const Category& b) { return a.id < b.id; });
}

const DatasetIndex::Entry* DatasetIndex::find(ImageId id) const {
  auto it = std::lower_bound(entries_.begin(), entries_.end(), id,
                             [](const Entry& e, ImageId v) { return e.image.image_id < v; });
  return it != entries_.end() && it->image.image_id == id ? &*it : nullptr;
}

std::size_t DatasetIndex::instance_count() const {
  std::size_t n = 0;
  for (const auto& e : entries_) n += e.instances.size();
  return n;
}

std::uint64_t DatasetIndex::pair_count() const {
  std::uint64_t n = 0;
  for (const auto& e : entries_) {
    const std::uint64_t k = e.instances.size();
    n += k * (k - (k > 0 ? 1 : 0)) / 2;
  }
  return n;
}

namespace {

struct RawAnnotation {
  InstanceId id = 0;
  ImageId image_id = 0;
  CategoryId category_id = 0;
  double box[4] = {0, 0, 0, 0};
  int box_len = 0;
  bool crowd = false;
  unsigned seen = 0;  // bit per required field
};

enum Section { kNone, kImages, kAnnotations, kCategories };

// SAX consumer. Only scalars directly under a record object (and the four
// numbers of "bbox") are kept; segmentation polygons and everything else
// are skipped without being materialized.
class CocoSax {
 public:
  explicit CocoSax(std::istream& in) : in_(in) {}

  std::vector<ImageRecord> images;
  std::vector<RawAnnotation> annotations;
  std::vector<Category> categories;
  bool saw_root = false;

  bool null() { return true; }
  bool boolean(bool v) { return number(v ? 1.0 : 0.0); }
  bool number_integer(json::number_integer_t v) { return number(static_cast<double>(v), v); }
  bool number_unsigned(json::number_unsigned_t v) {
    return number(static_cast<double>(v), static_cast<std::int64_t>(v));
  }
  bool number_float(json::number_float_t v, const json::string_t&) { return number(v); }
  bool binary(json::binary_t&) { return true; }

  bool string(json::string_t& v) {
    if (depth_ == 3 && (field_ == "file_name" || field_ == "name")) {
      if (section_ == kImages && field_ == "file_name") image_.file_name = std::move(v);
      if (section_ == kCategories && field_ == "name") {
        category_.name = std::move(v);
        category_seen_ |= 2;
      }
    }
    return true;
  }

  bool start_object(std::size_t) {
    if (depth_ == 1 && section_ != kNone) fail("section must be an array");
    if (depth_ == 0) saw_root = true;
    ++depth_;
    if (depth_ == 3) begin_record();
    return true;
  }

  bool end_object() {
    if (depth_ == 3) end_record();
    --depth_;
    return true;
  }

  bool start_array(std::size_t) {
    if (depth_ == 0) fail("top level must be an object");
    ++depth_;
    if (depth_ == 4 && section_ == kAnnotations && field_ == "bbox") {
      in_bbox_ = true;
      ann_.box_len = 0;
    }
    return true;
  }

  bool end_array() {
    if (depth_ == 4 && in_bbox_) {
      in_bbox_ = false;
      if (ann_.box_len == 4) ann_.seen |= kBbox;
    }
    if (depth_ == 2) section_ = kNone;
    --depth_;
    return true;
  }

  bool key(json::string_t& k) {
    if (depth_ == 1) {
      section_ = k == "images" ? kImages : k == "annotations" ? kAnnotations : k == "categories" ? kCategories : kNone;
    } else if (depth_ == 3) {
      field_ = std::move(k);
    }
    return true;
  }

  bool parse_error(std::size_t position, const std::string&, const nlohmann::detail::exception& ex) {
    throw ParseError(std::string("malformed annotation JSON at byte ") + std::to_string(position) + ": " + ex.what(),
                     position);
  }

 private:
  enum : unsigned { kId = 1, kImageId = 2, kCategoryId = 4, kBbox = 8 };

  bool number(double v, std::optional<std::int64_t> as_int = std::nullopt) {
    const std::int64_t iv = as_int ? *as_int : static_cast<std::int64_t>(v);
    if (depth_ == 4 && in_bbox_) {
      if (ann_.box_len < 4) ann_.box[ann_.box_len] = v;
      ++ann_.box_len;
      return true;
    }
    if (depth_ != 3) return true;
    switch (section_) {
      case kImages:
        if (field_ == "id") image_.image_id = iv, image_seen_ |= 1;
        else if (field_ == "width") image_.width = iv, image_seen_ |= 2;
        else if (field_ == "height") image_.height = iv, image_seen_ |= 4;
        break;
      case kAnnotations:
        if (field_ == "id") ann_.id = iv, ann_.seen |= kId;
        else if (field_ == "image_id") ann_.image_id = iv, ann_.seen |= kImageId;
        else if (field_ == "category_id") ann_.category_id = iv, ann_.seen |= kCategoryId;
        else if (field_ == "iscrowd") ann_.crowd = v != 0.0;
        break;
      case kCategories:
        if (field_ == "id") category_.id = iv, category_seen_ |= 1;
        break;
      case kNone:
        break;
    }
    return true;
  }

  void begin_record() {
    field_.clear();
    image_ = {};
    image_seen_ = 0;
    ann_ = {};
    category_ = {};
    category_seen_ = 0;
  }

  void end_record() {
    switch (section_) {
      case kImages:
        if (image_seen_ != 7) fail("image record missing id/width/height");
        if (image_.width <= 0 || image_.height <= 0) {
          fail("image " + std::to_string(image_.image_id) + " has non-positive size");
        }
        images.push_back(std::move(image_));
        break;
      case kAnnotations:
        annotations.push_back(ann_);
        break;
      case kCategories:
        if (category_seen_ != 3) fail("category record missing id/name");
        categories.push_back(std::move(category_));
        break;
      case kNone:
        break;
    }
  }

  [[noreturn]] void fail(const std::string& what) {
    const auto pos = in_.tellg();
    const std::size_t byte = pos < 0 ? 0 : static_cast<std::size_t>(pos);
    throw ParseError(what + " (near byte " + std::to_string(byte) + ")", byte);
  }

  std::istream& in_;
  int depth_ = 0;
  Section section_ = kNone;
  std::string field_;
  bool in_bbox_ = false;

  ImageRecord image_;
  unsigned image_seen_ = 0;
  RawAnnotation ann_;
  Category category_;
  unsigned category_seen_ = 0;
};

}  // namespace

LoadResult load_dataset(std::istream& in, const ValidityFilter& filter) {
  CocoSax sax(in);
  json::sax_parse(in, &sax);
  if (!sax.saw_root) throw ParseError("top level must be an object", 0);

  std::vector<Category> cats;
  {
    std::unordered_map<CategoryId, std::size_t> seen;
    for (auto& c : sax.categories) {
      if (seen.emplace(c.id, cats.size()).second) cats.push_back(std::move(c));
    }
  }
  std::unordered_map<CategoryId, std::string_view> cat_names;
  for (const auto& c : cats) cat_names.emplace(c.id, c.name);

  std::vector<DatasetIndex::Entry> entries;
  entries.reserve(sax.images.size());
  std::unordered_map<ImageId, std::size_t> slot;
  for (auto& img : sax.images) {
    if (!slot.emplace(img.image_id, entries.size()).second) {
      throw ParseError("duplicate image id " + std::to_string(img.image_id), 0);
    }
    entries.push_back({std::move(img), {}});
  }

  LoadResult result;
  for (const auto& a : sax.annotations) {
    auto reject = [&](const char* reason) { result.rejects.push_back({a.id, reason}); };
    if ((a.seen & 15u) != 15u) {
      reject("missing_field");
      continue;
    }
    auto where = slot.find(a.image_id);
    if (where == slot.end()) {
      reject("unknown_image");
      continue;
    }
    auto name = cat_names.find(a.category_id);
    if (name == cat_names.end()) {
      reject("unknown_category");
      continue;
    }
    if (filter.exclude_crowd && a.crowd) {
      reject("crowd");
      continue;
    }
    auto& entry = entries[where->second];
    const Coord x0 = round_half_up(a.box[0]);
    const Coord y0 = round_half_up(a.box[1]);
    const Coord x1 = x0 + round_half_up(a.box[2]);
    const Coord y1 = y0 + round_half_up(a.box[3]);
    const Coord cx0 = std::clamp<Coord>(x0, 0, entry.image.width);
    const Coord cy0 = std::clamp<Coord>(y0, 0, entry.image.height);
    const Coord cx1 = std::clamp<Coord>(x1, 0, entry.image.width);
    const Coord cy1 = std::clamp<Coord>(y1, 0, entry.image.height);
    const Rect box{cx0, cy0, std::max<Coord>(cx1 - cx0, 0), std::max<Coord>(cy1 - cy0, 0)};
    if (area(box) < std::max<Area>(filter.min_area, 1)) {
      reject("empty_box");
      continue;
    }
    entry.instances.push_back({a.id, a.image_id, a.category_id, std::string(name->second), box, a.crowd});
  }

  std::sort(result.rejects.begin(), result.rejects.end(),
            [](const Reject& x, const Reject& y) { return x.instance_id < y.instance_id; });
  result.dataset = DatasetIndex(std::move(entries), std::move(cats));
  return result;
}

LoadResult load_dataset(const std::filesystem::path& annotation_path, const ValidityFilter& filter) {
  std::ifstream in(annotation_path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open annotation file " + annotation_path.string());
  return load_dataset(in, filter);
}

std::vector<Category> category_table(const DatasetIndex& dataset) {
  std::vector<Category> out(dataset.categories().begin(), dataset.categories().end());
  std::stable_sort(out.begin(), out.end(), [](const Category& a, const Category& b) { return a.id < b.id; });
  out.erase(std::unique(out.begin(), out.end(), [](const Category& a, const Category& b) { return a.id == b.id; }),
            out.end());
  return out;
}

void write_rejects(std::span<const Reject> rejects, std::ostream& out) {
  for (const auto& r : rejects) {
    out << json{{"instance_id", r.instance_id}, {"reason", r.reason}}.dump() << '\n';
  }
}

void save_normalized(const DatasetIndex& dataset, std::ostream& out) {
  json cats = json::array();
  for (const auto& c : dataset.categories()) cats.push_back({{"id", c.id}, {"name", c.name}});
  json images = json::array();
  for (const auto& e : dataset.entries()) {
    json inst = json::array();
    for (const auto& o : e.instances) {
      inst.push_back({{"id", o.instance_id},
                      {"category_id", o.category_id},
                      {"bbox", {o.bbox.x, o.bbox.y, o.bbox.w, o.bbox.h}},
                      {"iscrowd", o.is_crowd}});
    }
    images.push_back({{"id", e.image.image_id},
                      {"width", e.image.width},
                      {"height", e.image.height},
                      {"file_name", e.image.file_name},
                      {"instances", std::move(inst)}});
  }
  out << json{{"categories", std::move(cats)}, {"images", std::move(images)}}.dump() << '\n';
}

DatasetIndex load_normalized(std::istream& in) {
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError(e.what(), e.byte);
  }
  std::vector<Category> cats;
  std::unordered_map<CategoryId, std::string> names;
  for (const auto& c : doc.at("categories")) {
    cats.push_back({c.at("id").get<CategoryId>(), c.at("name").get<std::string>()});
    names.emplace(cats.back().id, cats.back().name);
  }
  std::vector<DatasetIndex::Entry> entries;
  for (const auto& img : doc.at("images")) {
    DatasetIndex::Entry e;
    e.image = {img.at("id").get<ImageId>(), img.at("width").get<Coord>(), img.at("height").get<Coord>(),
               img.at("file_name").get<std::string>()};
    for (const auto& o : img.at("instances")) {
      const auto& b = o.at("bbox");
      const auto cat = o.at("category_id").get<CategoryId>();
      e.instances.push_back({o.at("id").get<InstanceId>(), e.image.image_id, cat, names.at(cat),
                             Rect{b.at(0).get<Coord>(), b.at(1).get<Coord>(), b.at(2).get<Coord>(),
                                  b.at(3).get<Coord>()},
                             o.at("iscrowd").get<bool>()});
    }
    entries.push_back(std::move(e));
  }
  return DatasetIndex(std::move(entries), std::move(cats));
}

}  // namespace spatialkit
