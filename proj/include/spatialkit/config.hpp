#pragma once

#include <filesystem>
#include <istream>
#include <string>
#include <string_view>

#include "spatialkit/constraints.hpp"
#include "spatialkit/decoder.hpp"
#include "spatialkit/proxy.hpp"

namespace spatialkit {

/// Everything a run can be configured with. Values come from defaults, then
/// a `key = value` file, then command-line overrides, each layer replacing
/// the previous one.
struct Config {
  Thresholds thresholds;
  ValidityFilter validity;
  DecodeConfig decode;
  UnionMode union_mode = UnionMode::exact;
  RelationRule relation_rule = RelationRule::octant;
  proxy::PairingMode proxy_mode = proxy::PairingMode::paper;
  proxy::Metric metric = proxy::Metric::cosine;
  double conf_threshold = 0.1;
  std::filesystem::path template_pool;  // empty: built-in pool
  std::filesystem::path images_dir;     // empty: metadata only
  unsigned threads = 0;                 // 0: default_thread_count()

  /// Sets one key. Throws ConfigError for unknown keys or unparsable values.
  void set(std::string_view key, std::string_view value);
  /// Reads `key = value` lines; `#` starts a comment.
  void load(std::istream& in, std::string_view source = "config");
  void load_file(const std::filesystem::path& path);
  /// Range checks owned by each module.
  void validate() const;

  PipelineOptions pipeline_options() const;
  unsigned effective_threads() const;
};

}  // namespace spatialkit
