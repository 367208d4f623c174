#include "spatialkit/commands.hpp"

#include <fstream>
#include <sstream>

#include "spatialkit/tenor.hpp"

namespace spatialkit::commands {

namespace {

std::ifstream open_in(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + p.string());
  return in;
}

TemplatePool pool_for(const Config& cfg) {
  return cfg.template_pool.empty() ? TemplatePool::defaults() : TemplatePool::from_file(cfg.template_pool);
}

}  // namespace

void write_atomically(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
    out << content;
    out.flush();
    if (!out) throw std::runtime_error("write failed: " + tmp.string());
  }
  fs::rename(tmp, path);
}

CurateSummary curate(const fs::path& annotations, const Config& cfg, const fs::path& out_dir, std::ostream& log) {
  cfg.validate();
  const auto pool = pool_for(cfg);
  pool.validate();

  auto loaded = load_dataset(annotations, cfg.validity);
  const auto options = cfg.pipeline_options();
  auto result = run_pipeline(loaded.dataset, cfg.thresholds, options);
  const auto records = decode_all(result.descriptors, loaded.dataset, pool, cfg.decode, options.threads);

  std::ostringstream manifest, stats_json, stats_txt, rejects;
  CurateSummary summary;
  summary.stats = result.stats;
  summary.manifest_lines = emit_manifest(records, manifest);
  summary.rejects = loaded.rejects.size();
  write_stats_json(result.stats, cfg.thresholds, options, stats_json);
  write_stats_table(result.stats, stats_txt);
  write_rejects(loaded.rejects, rejects);

  fs::create_directories(out_dir);
  write_atomically(out_dir / "manifest.jsonl", manifest.str());
  write_atomically(out_dir / "stats.json", stats_json.str());
  write_atomically(out_dir / "stats.txt", stats_txt.str());
  write_atomically(out_dir / "rejects.jsonl", rejects.str());

  if (!cfg.images_dir.empty()) {
    const auto crops = crop_pixels(records, cfg.images_dir, out_dir / "crops");
    summary.crops_written = crops.written;
    if (crops.skipped) log << "images directory " << cfg.images_dir << " not found; metadata only\n";
    for (const auto& w : crops.warnings) log << "warning: " << w << '\n';
  }
  log << stats_txt.str();
  return summary;
}

StageStats stats(const fs::path& annotations, const Config& cfg, const fs::path& json_out, std::ostream& table) {
  cfg.validate();
  const auto loaded = load_dataset(annotations, cfg.validity);
  const auto options = cfg.pipeline_options();
  const auto result = run_pipeline(loaded.dataset, cfg.thresholds, options);
  if (!json_out.empty()) {
    std::ostringstream js;
    write_stats_json(result.stats, cfg.thresholds, options, js);
    write_atomically(json_out, js.str());
  }
  write_stats_table(result.stats, table);
  return result.stats;
}

std::size_t prompts(const fs::path& categories_source, const Config& cfg, const fs::path& out) {
  std::vector<std::string> names;
  if (categories_source.extension() == ".json") {
    for (const auto& c : category_table(load_dataset(categories_source).dataset)) names.push_back(c.name);
  } else {
    auto in = open_in(categories_source);
    for (std::string line; std::getline(in, line);) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (!line.empty()) names.push_back(line);
    }
  }
  const auto groups = proxy::generate_groups(names, cfg.proxy_mode);
  std::ostringstream os;
  proxy::write_groups(groups, os);
  write_atomically(out, os.str());
  return groups.size();
}

std::size_t embed(const fs::path& prompts_file, std::string_view oracle, int dim, const fs::path& out) {
  proxy::Oracle which;
  if (oracle == "bow") which = proxy::Oracle::bag_of_words;
  else if (oracle == "ordered") which = proxy::Oracle::order_sensitive;
  else throw ConfigError("unknown oracle '" + std::string(oracle) + "' (bow, ordered)");
  auto in = open_in(prompts_file);
  const auto groups = proxy::read_groups(in);
  const auto records = proxy::embed_groups(groups, which, dim);
  std::ostringstream os;
  proxy::write_embeddings(records, os);
  write_atomically(out, os.str());
  return records.size();
}

proxy::RetrievalReport retrieve(const fs::path& prompts_file, const fs::path& embeddings_file, const Config& cfg,
                                std::string_view encoder, const fs::path& json_out, std::ostream& table) {
  auto pin = open_in(prompts_file);
  const auto groups = proxy::read_groups(pin);
  auto ein = open_in(embeddings_file);
  const auto embeddings = proxy::read_embeddings(ein);
  const auto report = proxy::retrieve(groups, embeddings, cfg.metric);
  if (!json_out.empty()) {
    std::ostringstream js;
    proxy::write_report_json(report, js);
    write_atomically(json_out, js.str());
  }
  proxy::write_report_table(report, encoder, table);
  return report;
}

visor::VisorScores visor(const fs::path& detections, const Config& cfg, const fs::path& json_out,
                         std::string_view method, std::ostream& table) {
  cfg.validate();
  auto in = open_in(detections);
  const auto trials = visor::read_trials(in);
  const auto scores = visor::aggregate(trials, cfg.conf_threshold);
  if (!json_out.empty()) {
    std::ostringstream js;
    visor::write_scores_json(scores, js);
    write_atomically(json_out, js.str());
  }
  visor::write_scores_table(scores, method, table);
  return scores;
}

bool tenor_check(std::ostream& out) {
  bool all = true;
  for (const auto& r : tenor::run_property_checks()) {
    out << (r.passed ? "PASS  " : "FAIL  ") << r.name << "  measured=" << r.measured << "  (" << r.criterion
        << ")\n";
    all = all && r.passed;
  }
  return all;
}

}  // namespace spatialkit::commands
