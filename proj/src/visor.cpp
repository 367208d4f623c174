#include "spatialkit/visor.hpp"

#include <algorithm>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>

#include "json.hpp"

namespace spatialkit::visor {

using nlohmann::json;

bool relation_holds(const Rect& a, Relation relation, const Rect& b) {
  const auto ca = doubled_centroid(a);
  const auto cb = doubled_centroid(b);
  switch (relation) {
    case Relation::left: return ca.x2 < cb.x2;
    case Relation::right: return ca.x2 > cb.x2;
    case Relation::above: return ca.y2 < cb.y2;
    case Relation::below: return ca.y2 > cb.y2;
  }
  return false;
}

namespace {

const Detection* best_detection(const std::vector<Detection>& dets, const std::string& category, double threshold) {
  const Detection* best = nullptr;
  for (const auto& d : dets) {
    if (d.category != category || d.confidence < threshold) continue;
    if (!best || d.confidence > best->confidence) best = &d;
  }
  return best;
}

double ratio(std::uint64_t num, std::uint64_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

}  // namespace

Judgment judge_trial(const TrialRecord& t, double conf_threshold) {
  const auto* a = best_detection(t.detections, t.expected.a, conf_threshold);
  const auto* b = best_detection(t.detections, t.expected.b, conf_threshold);
  Judgment j;
  j.objects_present = a && b;
  j.relation_correct = j.objects_present && relation_holds(a->bbox, t.expected.relation, b->bbox);
  return j;
}

VisorScores aggregate_outcomes(std::span<const ImageOutcome> outcomes) {
  struct PerPrompt {
    std::set<int> indices;
    int images = 0;
    int correct = 0;
  };
  std::map<std::string, PerPrompt> prompts;
  VisorScores s;
  for (const auto& o : outcomes) {
    auto& p = prompts[o.prompt_id];
    ++p.images;
    p.indices.insert(o.image_index);
    if (o.judgment.relation_correct) ++p.correct;
    ++s.images;
    if (o.judgment.objects_present) ++s.present;
    if (o.judgment.relation_correct) ++s.correct;
  }

  std::vector<std::string> bad;
  for (const auto& [id, p] : prompts) {
    const bool full = p.images == 4 && p.indices == std::set<int>{0, 1, 2, 3};
    if (!full) bad.push_back(id);
  }
  if (!bad.empty()) {
    std::string msg = "prompts without exactly four images (indices 0..3):";
    for (const auto& id : bad) msg += " " + id;
    throw IncompletePromptError(msg, std::move(bad));
  }

  auto& at_least = s.at_least;
  for (const auto& [id, p] : prompts) {
    for (int n = 1; n <= 4; ++n) {
      if (p.correct >= n) ++at_least[static_cast<std::size_t>(n - 1)];
    }
  }
  s.prompts = prompts.size();
  s.oa = ratio(s.present, s.images);
  s.uncond = ratio(s.correct, s.images);
  s.cond = ratio(s.correct, s.present);
  for (std::size_t n = 0; n < 4; ++n) s.visor_n[n] = ratio(at_least[n], s.prompts);
  return s;
}

VisorScores aggregate(std::span<const TrialRecord> trials, double conf_threshold) {
  std::vector<ImageOutcome> outcomes;
  outcomes.reserve(trials.size());
  for (const auto& t : trials) outcomes.push_back({t.prompt_id, t.image_index, judge_trial(t, conf_threshold)});
  return aggregate_outcomes(outcomes);
}

std::vector<TrialRecord> read_trials(std::istream& in) {
  std::vector<TrialRecord> out;
  std::size_t line_no = 0;
  for (std::string line; std::getline(in, line);) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const json j = json::parse(line);
      TrialRecord t;
      const auto& pid = j.at("prompt_id");
      t.prompt_id = pid.is_string() ? pid.get<std::string>() : pid.dump();
      t.image_index = j.at("image_index").get<int>();
      if (t.image_index < 0 || t.image_index > 3) throw std::invalid_argument("image_index must be 0..3");
      const auto& e = j.at("expected");
      auto rel = proxy::parse_relation(e.at("relation").get<std::string>());
      if (!rel) throw std::invalid_argument("unknown relation");
      t.expected = {e.at("a").get<std::string>(), *rel, e.at("b").get<std::string>()};
      for (const auto& d : j.at("detections")) {
        const auto& b = d.at("bbox");
        Detection det{d.at("category").get<std::string>(),
                      Rect{b.at("x").get<Coord>(), b.at("y").get<Coord>(), b.at("w").get<Coord>(),
                           b.at("h").get<Coord>()},
                      d.at("confidence").get<double>()};
        if (!(det.confidence >= 0.0 && det.confidence <= 1.0)) throw std::invalid_argument("confidence outside [0, 1]");
        t.detections.push_back(std::move(det));
      }
      out.push_back(std::move(t));
    } catch (const std::exception& e) {
      throw std::runtime_error("detections line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

void write_trials(std::span<const TrialRecord> trials, std::ostream& out) {
  for (const auto& t : trials) {
    json dets = json::array();
    for (const auto& d : t.detections) {
      dets.push_back({{"category", d.category},
                      {"bbox", {{"x", d.bbox.x}, {"y", d.bbox.y}, {"w", d.bbox.w}, {"h", d.bbox.h}}},
                      {"confidence", d.confidence}});
    }
    out << json{{"prompt_id", t.prompt_id},
                {"image_index", t.image_index},
                {"expected", {{"a", t.expected.a}, {"relation", proxy::to_string(t.expected.relation)}, {"b", t.expected.b}}},
                {"detections", std::move(dets)}}
               .dump()
        << '\n';
  }
}

void write_scores_table(const VisorScores& s, std::string_view method, std::ostream& out) {
  out << std::left << std::setw(16) << "method" << std::right;
  for (const char* col : {"uncond", "cond", "1", "2", "3", "4", "OA"}) out << std::setw(8) << col;
  out << '\n' << std::left << std::setw(16) << method << std::right << std::fixed << std::setprecision(2);
  for (double v : {s.uncond, s.cond, s.visor_n[0], s.visor_n[1], s.visor_n[2], s.visor_n[3], s.oa}) {
    out << std::setw(8) << v * 100.0;
  }
  out << '\n';
}

void write_scores_json(const VisorScores& s, std::ostream& out) {
  nlohmann::ordered_json doc = {
      {"uncond", s.uncond},   {"cond", s.cond},       {"visor_1", s.visor_n[0]}, {"visor_2", s.visor_n[1]},
      {"visor_3", s.visor_n[2]}, {"visor_4", s.visor_n[3]}, {"oa", s.oa},          {"prompts", s.prompts},
      {"images", s.images},   {"present", s.present}, {"correct", s.correct},
  };
  out << doc.dump(2) << '\n';
}

TrialRecord mirror_horizontally(const TrialRecord& t, Coord image_width) {
  TrialRecord m = t;
  for (auto& d : m.detections) d.bbox.x = image_width - d.bbox.x - d.bbox.w;
  return m;
}

}  // namespace spatialkit::visor
