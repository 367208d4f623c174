#pragma once

#include <filesystem>
#include <ostream>
#include <string>

#include "spatialkit/config.hpp"
#include "spatialkit/proxy.hpp"
#include "spatialkit/visor.hpp"

namespace spatialkit::commands {

namespace fs = std::filesystem;

/// Outcome of curate/stats: counts for callers that want them.
struct CurateSummary {
  StageStats stats;
  std::size_t manifest_lines = 0;
  std::size_t rejects = 0;
  std::size_t crops_written = 0;
};

/// ingest -> pairing -> constraints -> decoder. Writes manifest.jsonl,
/// stats.json, stats.txt and rejects.jsonl under `out_dir`. Files are
/// written to temporaries and renamed only once everything succeeded.
CurateSummary curate(const fs::path& annotations, const Config& cfg, const fs::path& out_dir, std::ostream& log);

/// Filtering statistics only. `json_out` may be empty.
StageStats stats(const fs::path& annotations, const Config& cfg, const fs::path& json_out, std::ostream& table);

/// Categories come from a COCO file (categories array) or a text file with
/// one name per line.
std::size_t prompts(const fs::path& categories_source, const Config& cfg, const fs::path& out);

/// Reference embeddings for a prompts file ("bow" or "ordered").
std::size_t embed(const fs::path& prompts_file, std::string_view oracle, int dim, const fs::path& out);

proxy::RetrievalReport retrieve(const fs::path& prompts_file, const fs::path& embeddings_file, const Config& cfg,
                                std::string_view encoder, const fs::path& json_out, std::ostream& table);

visor::VisorScores visor(const fs::path& detections, const Config& cfg, const fs::path& json_out,
                         std::string_view method, std::ostream& table);

/// Returns true when every check passed.
bool tenor_check(std::ostream& out);

/// Writes `content` to `path` through a sibling temporary and a rename.
void write_atomically(const fs::path& path, const std::string& content);

}  // namespace spatialkit::commands
