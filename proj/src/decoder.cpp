#include "spatialkit/decoder.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include "json.hpp"
#include "spatialkit/parallel.hpp"

#ifdef SPATIALKIT_HAVE_OPENCV
#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>
#endif

namespace spatialkit {

using nlohmann::json;

namespace {

constexpr std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

json rect_json(const Rect& r) { return {{"x", r.x}, {"y", r.y}, {"w", r.w}, {"h", r.h}}; }

Rect rect_from(const json& j) {
  return {j.at("x").get<Coord>(), j.at("y").get<Coord>(), j.at("w").get<Coord>(), j.at("h").get<Coord>()};
}

}  // namespace

void DecodeConfig::validate() const {
  if (!(and_probability >= 0.0 && and_probability <= 1.0)) {
    throw ConfigError("and_probability must lie in [0, 1]");
  }
  if (!(max_expansion >= 0.0 && max_expansion <= 0.10)) {
    throw ConfigError("max_expansion must lie in [0, 0.10]");
  }
}

RecordRng::RecordRng(std::uint64_t global_seed, ImageId image_id, std::uint32_t pair_index)
    : state_(mix64(mix64(mix64(global_seed + kGolden) ^ static_cast<std::uint64_t>(image_id)) + pair_index)) {}

std::uint64_t RecordRng::next() {
  state_ += kGolden;
  return mix64(state_);
}

double RecordRng::uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

bool ManifestRecord::has_flag(std::string_view f) const {
  return std::find(flags.begin(), flags.end(), f) != flags.end();
}

ManifestRecord decode(const SpatialDescriptor& d, const ImageRecord& image, const TemplatePool& pool,
                      const DecodeConfig& cfg) {
  if (d.image_id != image.image_id) throw std::invalid_argument("decode: descriptor belongs to another image");
  RecordRng rng(cfg.global_seed, d.image_id, d.pair_index);

  // Fixed draw order: substitution, template, expansion.
  const double u_and = rng.uniform();
  const double u_template = rng.uniform();
  const double u_expand = rng.uniform();

  ManifestRecord r;
  r.image_id = d.image_id;
  r.pair_index = d.pair_index;
  r.file_name = image.file_name;
  r.source_relation = d.relation;
  r.relation = u_and < cfg.and_probability ? RelationToken::and_ : d.relation;
  if (r.relation != r.source_relation) r.flags.emplace_back("and_substituted");

  const auto choices = pool.templates(r.relation);
  if (choices.empty()) throw ConfigError("no template for " + std::string(to_string(r.relation)));
  const auto pick = std::min(choices.size() - 1, static_cast<std::size_t>(u_template * static_cast<double>(choices.size())));
  r.prompt = render_template(choices[pick], d.subject.category_name, d.object.category_name);

  r.expansion = u_expand * cfg.max_expansion;
  const auto crop = enclosing_square(d.subject.bbox, d.object.bbox, image.width, image.height, r.expansion);
  r.crop = crop.rect;
  if (crop.truncated) r.flags.emplace_back("crop_truncated");
  std::sort(r.flags.begin(), r.flags.end());

  r.subject = {d.subject.category_name, d.subject.bbox};
  r.object = {d.object.category_name, d.object.bbox};
  r.global_seed = cfg.global_seed;
  return r;
}

std::vector<ManifestRecord> decode_all(std::span<const SpatialDescriptor> descriptors, const DatasetIndex& dataset,
                                       const TemplatePool& pool, const DecodeConfig& cfg, unsigned threads) {
  cfg.validate();
  pool.validate();
  auto chunks = parallel_chunks<std::vector<ManifestRecord>>(
      descriptors.size(), 4096, threads, [&](std::size_t begin, std::size_t end) {
        std::vector<ManifestRecord> out;
        out.reserve(end - begin);
        for (std::size_t i = begin; i < end; ++i) {
          const auto* entry = dataset.find(descriptors[i].image_id);
          if (!entry) throw std::invalid_argument("decode: unknown image " + std::to_string(descriptors[i].image_id));
          out.push_back(decode(descriptors[i], entry->image, pool, cfg));
        }
        return out;
      });
  std::vector<ManifestRecord> records;
  records.reserve(descriptors.size());
  for (auto& c : chunks) std::move(c.begin(), c.end(), std::back_inserter(records));
  return records;
}

std::string to_json_line(const ManifestRecord& r) {
  json j = {
      {"image_id", r.image_id},
      {"pair_index", r.pair_index},
      {"file_name", r.file_name},
      {"crop", rect_json(r.crop)},
      {"expansion", r.expansion},
      {"prompt", r.prompt},
      {"relation", to_string(r.relation)},
      {"source_relation", to_string(r.source_relation)},
      {"subject", {{"category", r.subject.category}, {"bbox", rect_json(r.subject.bbox)}}},
      {"object", {{"category", r.object.category}, {"bbox", rect_json(r.object.bbox)}}},
      {"seed_material", {{"global_seed", r.global_seed}, {"image_id", r.image_id}, {"pair_index", r.pair_index}}},
      {"flags", r.flags},
  };
  return j.dump();  // std::map-backed object: keys come out sorted
}

ManifestRecord manifest_record_from_json(std::string_view line) {
  const json j = json::parse(line);
  ManifestRecord r;
  r.image_id = j.at("image_id").get<ImageId>();
  r.pair_index = j.at("pair_index").get<std::uint32_t>();
  r.file_name = j.at("file_name").get<std::string>();
  r.crop = rect_from(j.at("crop"));
  r.expansion = j.at("expansion").get<double>();
  r.prompt = j.at("prompt").get<std::string>();
  auto token = [](const json& v) {
    auto t = parse_relation_token(v.get<std::string>());
    if (!t) throw std::invalid_argument("manifest: bad relation token");
    return *t;
  };
  r.relation = token(j.at("relation"));
  r.source_relation = token(j.at("source_relation"));
  r.subject = {j.at("subject").at("category").get<std::string>(), rect_from(j.at("subject").at("bbox"))};
  r.object = {j.at("object").at("category").get<std::string>(), rect_from(j.at("object").at("bbox"))};
  r.global_seed = j.at("seed_material").at("global_seed").get<std::uint64_t>();
  r.flags = j.at("flags").get<std::vector<std::string>>();
  return r;
}

std::size_t emit_manifest(std::span<const ManifestRecord> records, std::ostream& out) {
  for (const auto& r : records) out << to_json_line(r) << '\n';
  if (!out) throw std::runtime_error("manifest write failed");
  return records.size();
}

std::size_t emit_manifest(std::span<const ManifestRecord> records, const std::filesystem::path& out_path) {
  std::ofstream out(out_path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + out_path.string() + " for writing");
  const auto n = emit_manifest(records, out);
  out.flush();
  if (!out) throw std::runtime_error("write failed: " + out_path.string());
  return n;
}

bool image_support_available() {
#ifdef SPATIALKIT_HAVE_OPENCV
  return true;
#else
  return false;
#endif
}

CropOutcome crop_pixels(std::span<const ManifestRecord> records, const std::filesystem::path& images_dir,
                        const std::filesystem::path& out_dir) {
  CropOutcome outcome;
  if (images_dir.empty() || !std::filesystem::is_directory(images_dir)) {
    outcome.skipped = true;
    return outcome;
  }
#ifdef SPATIALKIT_HAVE_OPENCV
  std::filesystem::create_directories(out_dir);
  for (const auto& r : records) {
    const auto src = images_dir / r.file_name;
    cv::Mat image = cv::imread(src.string(), cv::IMREAD_UNCHANGED);
    if (image.empty()) {
      outcome.warnings.push_back("missing or unreadable image " + src.string());
      continue;
    }
    const cv::Rect bounds(0, 0, image.cols, image.rows);
    const cv::Rect roi = cv::Rect(static_cast<int>(r.crop.x), static_cast<int>(r.crop.y), static_cast<int>(r.crop.w),
                                  static_cast<int>(r.crop.h)) &
                         bounds;
    if (roi.area() == 0) {
      outcome.warnings.push_back("empty crop for " + src.string());
      continue;
    }
    const std::string stem = std::to_string(r.image_id) + "_" + std::to_string(r.pair_index);
    if (!cv::imwrite((out_dir / (stem + ".png")).string(), image(roi))) {
      outcome.warnings.push_back("cannot write crop " + stem + ".png");
      continue;
    }
    std::ofstream sidecar(out_dir / (stem + ".json"));
    sidecar << json{{"image_id", r.image_id}, {"pair_index", r.pair_index}, {"crop", rect_json(r.crop)},
                    {"prompt", r.prompt}, {"flags", r.flags}}
                   .dump()
            << '\n';
    ++outcome.written;
  }
#else
  (void)records;
  (void)out_dir;
  outcome.warnings.push_back("built without image support; crops not written");
#endif
  return outcome;
}

}  // namespace spatialkit
