#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "spatialkit/coco.hpp"
#include "spatialkit/descriptor.hpp"
#include "spatialkit/templates.hpp"

namespace spatialkit {

struct DecodeConfig {
  double and_probability = 0.1;
  double max_expansion = 0.10;
  std::uint64_t global_seed = 0;

  void validate() const;
};

/// Counter-based generator for one record. Seeded from
/// (global_seed, image_id, pair_index) so draws do not depend on scheduling.
class RecordRng {
 public:
  RecordRng(std::uint64_t global_seed, ImageId image_id, std::uint32_t pair_index);
  std::uint64_t next();
  /// Uniform on [0, 1) with 53 random bits.
  double uniform();

 private:
  std::uint64_t state_;
};

struct ManifestObject {
  std::string category;
  Rect bbox;
  friend bool operator==(const ManifestObject&, const ManifestObject&) = default;
};

struct ManifestRecord {
  ImageId image_id = 0;
  std::uint32_t pair_index = 0;
  std::string file_name;
  Rect crop;
  double expansion = 0.0;  // drawn growth fraction before fitting to the image
  std::string prompt;
  RelationToken relation = RelationToken::and_;           // token the caption expresses
  RelationToken source_relation = RelationToken::and_;    // token from pairing
  ManifestObject subject;
  ManifestObject object;
  std::uint64_t global_seed = 0;
  std::vector<std::string> flags;  // sorted: "and_substituted", "crop_truncated"

  bool has_flag(std::string_view f) const;
  friend bool operator==(const ManifestRecord&, const ManifestRecord&) = default;
};

/// Descriptor -> crop + caption. Throws ConfigError when the pool lacks a
/// template for the token that is needed.
ManifestRecord decode(const SpatialDescriptor& d, const ImageRecord& image, const TemplatePool& pool,
                      const DecodeConfig& cfg);

/// decode() over every descriptor, in input order.
std::vector<ManifestRecord> decode_all(std::span<const SpatialDescriptor> descriptors, const DatasetIndex& dataset,
                                       const TemplatePool& pool, const DecodeConfig& cfg, unsigned threads = 1);

std::string to_json_line(const ManifestRecord& r);
ManifestRecord manifest_record_from_json(std::string_view line);

/// JSONL, one record per line, keys sorted. Returns the number of lines.
std::size_t emit_manifest(std::span<const ManifestRecord> records, std::ostream& out);
std::size_t emit_manifest(std::span<const ManifestRecord> records, const std::filesystem::path& out_path);

struct CropOutcome {
  std::size_t written = 0;
  std::vector<std::string> warnings;
  bool skipped = false;  // no images directory: metadata-only mode
};

/// Writes <image_id>_<pair_index>.png plus a .json sidecar carrying the
/// record's flags into `out_dir`. A missing source image is a warning.
/// Skipped entirely when `images_dir` does not exist.
CropOutcome crop_pixels(std::span<const ManifestRecord> records, const std::filesystem::path& images_dir,
                        const std::filesystem::path& out_dir);

bool image_support_available();

}  // namespace spatialkit
