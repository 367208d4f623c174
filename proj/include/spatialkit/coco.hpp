#pragma once

#include <cstdint>
#include <filesystem>
#include <istream>
#include <map>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "spatialkit/geometry.hpp"

namespace spatialkit {

using ImageId = std::int64_t;
using InstanceId = std::int64_t;
using CategoryId = std::int64_t;

struct ImageRecord {
  ImageId image_id = 0;
  Coord width = 0;
  Coord height = 0;
  std::string file_name;

  Area area() const { return width * height; }
  friend bool operator==(const ImageRecord&, const ImageRecord&) = default;
};

struct ObjectInstance {
  InstanceId instance_id = 0;
  ImageId image_id = 0;
  CategoryId category_id = 0;
  std::string category_name;
  Rect bbox;
  bool is_crowd = false;

  friend bool operator==(const ObjectInstance&, const ObjectInstance&) = default;
};

struct Category {
  CategoryId id = 0;
  std::string name;
  friend bool operator==(const Category&, const Category&) = default;
};

/// Annotation dropped during ingest, reported as JSONL {instance_id, reason}.
struct Reject {
  InstanceId instance_id = 0;
  std::string reason;
};

/// Which instances count as "valid". The defaults drop crowd regions and
/// boxes that are empty after rounding and clamping.
struct ValidityFilter {
  bool exclude_crowd = true;
  Area min_area = 1;
};

/// Malformed annotation file. `byte()` is the offset where parsing stopped.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t byte) : std::runtime_error(what), byte_(byte) {}
  std::size_t byte() const { return byte_; }

 private:
  std::size_t byte_;
};

/// Immutable per-image view of a COCO instances file. Images are ordered by
/// ascending image_id and their instances by ascending instance_id.
class DatasetIndex {
 public:
  struct Entry {
    ImageRecord image;
    std::vector<ObjectInstance> instances;
    friend bool operator==(const Entry&, const Entry&) = default;
  };

  DatasetIndex() = default;
  DatasetIndex(std::vector<Entry> entries, std::vector<Category> categories);

  std::span<const Entry> entries() const { return entries_; }
  std::span<const Category> categories() const { return categories_; }
  const Entry* find(ImageId id) const;

  std::size_t image_count() const { return entries_.size(); }
  std::size_t instance_count() const;
  /// Sum of n(n-1)/2 over images.
  std::uint64_t pair_count() const;

  friend bool operator==(const DatasetIndex& a, const DatasetIndex& b) {
    return a.entries_ == b.entries_ && a.categories_ == b.categories_;
  }

 private:
  std::vector<Entry> entries_;
  std::vector<Category> categories_;
};

struct LoadResult {
  DatasetIndex dataset;
  std::vector<Reject> rejects;
};

/// Single pass over a COCO instances JSON. Throws ParseError on malformed
/// JSON or missing required fields; record-level problems (unknown
/// category or image, crowd, empty box) go to `rejects`.
LoadResult load_dataset(const std::filesystem::path& annotation_path, const ValidityFilter& filter = {});
LoadResult load_dataset(std::istream& in, const ValidityFilter& filter = {});

/// Deduplicated, sorted by id.
std::vector<Category> category_table(const DatasetIndex& dataset);

void write_rejects(std::span<const Reject> rejects, std::ostream& out);

/// Normalized form: integer boxes, validity already applied.
void save_normalized(const DatasetIndex& dataset, std::ostream& out);
DatasetIndex load_normalized(std::istream& in);

}  // namespace spatialkit
