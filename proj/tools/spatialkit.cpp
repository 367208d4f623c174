// spatialkit: curation, proxy-task, VISOR and attention-injection tooling.

#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "spatialkit/commands.hpp"

namespace fs = std::filesystem;
using namespace spatialkit;

namespace {

struct CommonOptions {
  std::string config_file;
  std::vector<std::string> overrides;
  unsigned threads = 0;

  void attach(CLI::App* cmd) {
    cmd->add_option("-c,--config", config_file, "key = value config file")->check(CLI::ExistingFile);
    cmd->add_option("--set", overrides, "override a config key (key=value), repeatable");
    cmd->add_option("--threads", threads, "worker threads (default: SPATIALKIT_THREADS or all cores)");
  }

  Config build() const {
    Config cfg;
    if (!config_file.empty()) cfg.load_file(config_file);
    for (const auto& kv : overrides) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + kv + "'");
      cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
    }
    if (threads > 0) cfg.threads = threads;
    cfg.validate();
    return cfg;
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spatial-relationship data curation and evaluation toolkit"};
  app.require_subcommand(1);

  CommonOptions common;

  std::string annotations, out_dir;
  auto* curate = app.add_subcommand("curate", "filter COCO pairs and write a training manifest");
  curate->add_option("annotations", annotations, "COCO instances JSON")->required()->check(CLI::ExistingFile);
  curate->add_option("-o,--out", out_dir, "output directory")->required();
  common.attach(curate);

  std::string stats_json;
  auto* stats = app.add_subcommand("stats", "per-stage filtering statistics");
  stats->add_option("annotations", annotations, "COCO instances JSON")->required()->check(CLI::ExistingFile);
  stats->add_option("--json", stats_json, "also write the JSON report here");
  common.attach(stats);

  std::string categories, prompts_out;
  auto* prompts = app.add_subcommand("prompts", "generate proxy-task prompt groups");
  prompts->add_option("categories", categories, "COCO JSON or text file with one category per line")
      ->required()
      ->check(CLI::ExistingFile);
  prompts->add_option("-o,--out", prompts_out, "prompt groups JSONL")->required();
  common.attach(prompts);

  std::string embed_prompts, oracle = "bow", embed_out;
  int dim = 8;
  auto* embed = app.add_subcommand("embed", "reference embeddings for a prompts file");
  embed->add_option("prompts", embed_prompts, "prompt groups JSONL")->required()->check(CLI::ExistingFile);
  embed->add_option("--oracle", oracle, "bow | ordered")->check(CLI::IsMember({"bow", "ordered"}));
  embed->add_option("--dim", dim, "embedding dimension");
  embed->add_option("-o,--out", embed_out, "embeddings JSONL")->required();

  std::string retrieve_prompts, embeddings, encoder = "encoder", retrieve_json;
  auto* retrieve = app.add_subcommand("retrieve", "most similar prompt variation per group");
  retrieve->add_option("prompts", retrieve_prompts, "prompt groups JSONL")->required()->check(CLI::ExistingFile);
  retrieve->add_option("embeddings", embeddings, "embeddings JSONL")->required()->check(CLI::ExistingFile);
  retrieve->add_option("--encoder", encoder, "label for the report row");
  retrieve->add_option("--json", retrieve_json, "also write the JSON report here");
  common.attach(retrieve);

  std::string detections, method = "model", visor_json;
  auto* visor = app.add_subcommand("visor", "VISOR scores from detection files");
  visor->add_option("detections", detections, "detections JSONL")->required()->check(CLI::ExistingFile);
  visor->add_option("--method", method, "label for the report row");
  visor->add_option("--json", visor_json, "also write the JSON report here");
  common.attach(visor);

  auto* tenor_check = app.add_subcommand("tenor-check", "order-injection attention property checks");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*curate) {
      const auto summary = commands::curate(annotations, common.build(), out_dir, std::cerr);
      std::cout << "wrote " << summary.manifest_lines << " manifest records to " << fs::path(out_dir) / "manifest.jsonl"
                << '\n';
    } else if (*stats) {
      commands::stats(annotations, common.build(), stats_json, std::cout);
    } else if (*prompts) {
      std::cout << "wrote " << commands::prompts(categories, common.build(), prompts_out) << " prompt groups\n";
    } else if (*embed) {
      std::cout << "wrote " << commands::embed(embed_prompts, oracle, dim, embed_out) << " embeddings\n";
    } else if (*retrieve) {
      commands::retrieve(retrieve_prompts, embeddings, common.build(), encoder, retrieve_json, std::cout);
    } else if (*visor) {
      commands::visor(detections, common.build(), visor_json, method, std::cout);
    } else if (*tenor_check) {
      return commands::tenor_check(std::cout) ? 0 : 1;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
