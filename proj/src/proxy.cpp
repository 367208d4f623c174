#include "spatialkit/proxy.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <set>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

#include "json.hpp"
#include "spatialkit/templates.hpp"

namespace spatialkit::proxy {

using nlohmann::json;

namespace {

constexpr std::array<std::string_view, 4> kRelationNames = {"left", "right", "above", "below"};
constexpr std::array<std::string_view, 4> kPhrases = {"to the left of", "to the right of", "above", "below"};
constexpr std::array<std::string_view, 4> kVariantNames = {"base", "rephrased", "negated", "swapped"};

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t splitmix(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Deterministic pseudo-random vector in [-1, 1)^dim for one token.
std::vector<double> token_vector(std::string_view token, int dim) {
  std::uint64_t state = fnv1a(token);
  std::vector<double> v(static_cast<std::size_t>(dim));
  for (auto& x : v) x = static_cast<double>(splitmix(state) >> 11) * 0x1.0p-52 - 1.0;
  return v;
}

std::vector<std::string> tokenize(std::string_view prompt) {
  std::vector<std::string> out;
  std::istringstream in{std::string(prompt)};
  for (std::string t; in >> t;) {
    std::transform(t.begin(), t.end(), t.begin(), [](unsigned char c) { return std::tolower(c); });
    out.push_back(std::move(t));
  }
  return out;
}

void check_dim(int dim, int minimum) {
  if (dim < minimum) throw std::invalid_argument("embedding dimension must be at least " + std::to_string(minimum));
}

}  // namespace

std::string_view to_string(Relation r) { return kRelationNames[static_cast<std::size_t>(r)]; }

std::optional<Relation> parse_relation(std::string_view s) {
  for (std::size_t i = 0; i < kRelationNames.size(); ++i) {
    if (kRelationNames[i] == s) return static_cast<Relation>(i);
  }
  return std::nullopt;
}

Relation opposite(Relation r) {
  switch (r) {
    case Relation::left: return Relation::right;
    case Relation::right: return Relation::left;
    case Relation::above: return Relation::below;
    case Relation::below: return Relation::above;
  }
  return r;
}

std::string_view phrase(Relation r) { return kPhrases[static_cast<std::size_t>(r)]; }

std::string_view to_string(Variant v) { return kVariantNames[static_cast<std::size_t>(v)]; }

std::optional<Variant> parse_variant(std::string_view s) {
  for (std::size_t i = 0; i < kVariantNames.size(); ++i) {
    if (kVariantNames[i] == s) return static_cast<Variant>(i);
  }
  return std::nullopt;
}

const std::string& PromptGroup::text(Variant v) const {
  switch (v) {
    case Variant::base: return base;
    case Variant::rephrased: return rephrased;
    case Variant::negated: return negated;
    case Variant::swapped: return swapped;
  }
  return base;
}

std::string render_prompt(std::string_view a, Relation r, std::string_view b) {
  return with_article(a) + " " + std::string(phrase(r)) + " " + with_article(b);
}

PromptGroup make_group(std::int64_t group_id, std::string_view a, std::string_view b, Relation r) {
  PromptGroup g;
  g.group_id = group_id;
  g.base = render_prompt(a, r, b);
  g.rephrased = render_prompt(b, opposite(r), a);
  g.negated = render_prompt(a, opposite(r), b);
  g.swapped = render_prompt(b, r, a);
  g.category_a = a;
  g.category_b = b;
  g.relation = r;
  return g;
}

std::vector<PromptGroup> generate_groups(std::span<const std::string> categories, PairingMode mode) {
  if (categories.size() < 2) throw std::invalid_argument("need at least two categories");
  std::set<std::string_view> seen;
  for (const auto& c : categories) {
    if (!seen.insert(c).second) throw std::invalid_argument("duplicate category name '" + c + "'");
  }
  std::vector<PromptGroup> out;
  const std::size_t n = categories.size();
  out.reserve(n * (n - 1) * (mode == PairingMode::full ? 4 : 1));
  std::int64_t id = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      if (mode == PairingMode::paper) {
        out.push_back(make_group(id, categories[i], categories[j], static_cast<Relation>(id % 4)));
        ++id;
      } else {
        for (int r = 0; r < 4; ++r, ++id) {
          out.push_back(make_group(id, categories[i], categories[j], static_cast<Relation>(r)));
        }
      }
    }
  }
  return out;
}

void write_groups(std::span<const PromptGroup> groups, std::ostream& out) {
  for (const auto& g : groups) {
    out << json{{"group_id", g.group_id},
                {"base", g.base},
                {"rephrased", g.rephrased},
                {"negated", g.negated},
                {"swapped", g.swapped},
                {"categories", {g.category_a, g.category_b}},
                {"relation", to_string(g.relation)}}
               .dump()
        << '\n';
  }
}

std::vector<PromptGroup> read_groups(std::istream& in) {
  std::vector<PromptGroup> out;
  std::size_t line_no = 0;
  for (std::string line; std::getline(in, line);) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const json j = json::parse(line);
      PromptGroup g;
      g.group_id = j.at("group_id").get<std::int64_t>();
      g.base = j.at("base").get<std::string>();
      g.rephrased = j.at("rephrased").get<std::string>();
      g.negated = j.at("negated").get<std::string>();
      g.swapped = j.at("swapped").get<std::string>();
      g.category_a = j.at("categories").at(0).get<std::string>();
      g.category_b = j.at("categories").at(1).get<std::string>();
      auto r = parse_relation(j.at("relation").get<std::string>());
      if (!r) throw std::invalid_argument("unknown relation");
      g.relation = *r;
      out.push_back(std::move(g));
    } catch (const std::exception& e) {
      throw std::runtime_error("prompts line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

std::vector<EmbeddingRecord> read_embeddings(std::istream& in) {
  std::vector<EmbeddingRecord> out;
  std::optional<std::size_t> dim;
  std::size_t line_no = 0;
  for (std::string line; std::getline(in, line);) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    auto fail = [&](const std::string& what) {
      throw std::runtime_error("embeddings line " + std::to_string(line_no) + ": " + what);
    };
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      fail(e.what());
    }
    EmbeddingRecord r;
    try {
      r.group_id = j.at("group_id").get<std::int64_t>();
      auto v = parse_variant(j.at("variant").get<std::string>());
      if (!v) fail("unknown variant");
      r.variant = *v;
      const auto& vec = j.at("vector");
      if (!vec.is_array()) fail("vector must be an array");
      r.vector.reserve(vec.size());
      for (const auto& x : vec) {
        if (!x.is_number()) fail("vector entries must be numbers");
        const double d = x.get<double>();
        const float f = static_cast<float>(d);
        if (!std::isfinite(f)) fail("non-finite vector entry");
        r.vector.push_back(f);
      }
    } catch (const json::exception& e) {
      fail(e.what());
    }
    if (r.vector.empty()) fail("empty vector");
    if (dim && *dim != r.vector.size()) fail("dimension changed within file");
    dim = r.vector.size();
    out.push_back(std::move(r));
  }
  return out;
}

void write_embeddings(std::span<const EmbeddingRecord> records, std::ostream& out) {
  for (const auto& r : records) {
    out << json{{"group_id", r.group_id}, {"variant", to_string(r.variant)}, {"vector", r.vector}}.dump() << '\n';
  }
}

std::optional<Metric> parse_metric(std::string_view s) {
  if (s == "cosine") return Metric::cosine;
  if (s == "dot") return Metric::dot;
  if (s == "euclidean") return Metric::euclidean;
  return std::nullopt;
}

double similarity(std::span<const float> a, std::span<const float> b, Metric metric) {
  if (a.size() != b.size()) throw std::invalid_argument("similarity: dimension mismatch");
  double dot = 0.0, na = 0.0, nb = 0.0, dist = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double x = a[i];
    const double y = b[i];
    dot += x * y;
    na += x * x;
    nb += y * y;
    dist += (x - y) * (x - y);
  }
  switch (metric) {
    case Metric::cosine: return dot / (std::sqrt(na) * std::sqrt(nb));
    case Metric::dot: return dot;
    case Metric::euclidean: return -std::sqrt(dist);
  }
  return dot;
}

std::uint64_t RetrievalReport::wins_for(Variant v) const {
  return v == Variant::base ? 0 : wins[static_cast<std::size_t>(v) - 1];
}

double RetrievalReport::correct_rate() const {
  return groups_evaluated == 0 ? 0.0
                               : static_cast<double>(wins_for(Variant::rephrased)) / static_cast<double>(groups_evaluated);
}

RetrievalReport retrieve(std::span<const PromptGroup> groups, std::span<const EmbeddingRecord> embeddings,
                         Metric metric) {
  std::unordered_map<std::int64_t, std::array<const EmbeddingRecord*, 4>> by_group;
  for (const auto& e : embeddings) by_group[e.group_id][static_cast<std::size_t>(e.variant)] = &e;

  RetrievalReport report;
  for (const auto& g : groups) {
    auto it = by_group.find(g.group_id);
    if (it == by_group.end()) {
      ++report.skipped;
      continue;
    }
    const auto& slots = it->second;
    const bool usable = std::all_of(slots.begin(), slots.end(), [&](const EmbeddingRecord* e) {
      if (!e || e->vector.size() != slots[0]->vector.size()) return false;
      return std::any_of(e->vector.begin(), e->vector.end(), [](float x) { return x != 0.0f; });
    });
    if (!usable) {
      ++report.skipped;
      continue;
    }
    const auto& base = slots[0]->vector;
    std::size_t best = 1;
    double best_score = similarity(base, slots[1]->vector, metric);
    for (std::size_t v = 2; v < 4; ++v) {
      const double s = similarity(base, slots[v]->vector, metric);
      if (s > best_score) {
        best_score = s;
        best = v;
      }
    }
    ++report.wins[best - 1];
    ++report.groups_evaluated;
  }
  return report;
}

std::string format_percent(double fraction) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(2) << fraction * 100.0;
  std::string s = os.str();
  s.erase(s.find_last_not_of('0') + 1);
  if (s.back() == '.') s.pop_back();
  return s + "%";
}

void write_report_json(const RetrievalReport& r, std::ostream& out) {
  nlohmann::ordered_json doc = {
      {"groups_evaluated", r.groups_evaluated},
      {"skipped", r.skipped},
      {"wins", {{"rephrased", r.wins[0]}, {"negated", r.wins[1]}, {"swapped", r.wins[2]}}},
      {"correct_rate", r.correct_rate()},
  };
  out << doc.dump(2) << '\n';
}

void write_report_table(const RetrievalReport& r, std::string_view encoder, std::ostream& out) {
  out << std::left << std::setw(20) << "encoder" << std::right << std::setw(11) << "rephrased" << std::setw(18)
      << "negated relation" << std::setw(18) << "swapped entities" << std::setw(10) << "Correct" << '\n';
  out << std::left << std::setw(20) << encoder << std::right << std::setw(11) << r.wins[0] << std::setw(18)
      << r.wins[1] << std::setw(18) << r.wins[2] << std::setw(10) << format_percent(r.correct_rate()) << '\n';
  if (r.skipped) out << "skipped groups: " << r.skipped << '\n';
}

std::vector<float> bag_of_words_embedding(std::string_view prompt, int dim) {
  check_dim(dim, 1);
  std::map<std::string, int> counts;
  for (auto& t : tokenize(prompt)) ++counts[t];
  std::vector<double> acc(static_cast<std::size_t>(dim), 0.0);
  for (const auto& [token, n] : counts) {
    const auto v = token_vector(token, dim);
    for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += n * v[i];
  }
  return {acc.begin(), acc.end()};
}

std::vector<float> order_sensitive_embedding(std::string_view prompt, int dim) {
  check_dim(dim, 8);
  if (dim % 2 != 0) throw std::invalid_argument("order-sensitive embedding needs an even dimension");
  const auto tokens = tokenize(prompt);
  std::vector<double> acc(static_cast<std::size_t>(dim), 0.0);
  for (std::size_t pos = 0; pos < tokens.size(); ++pos) {
    const auto v = token_vector(tokens[pos], dim);
    // Rotate each (2i, 2i+1) pair by the sinusoidal angle of this position.
    for (int i = 0; i < dim / 2; ++i) {
      const double angle = static_cast<double>(pos) / std::pow(10000.0, 2.0 * i / dim);
      const double c = std::cos(angle);
      const double s = std::sin(angle);
      acc[2 * i] += c * v[2 * i] - s * v[2 * i + 1];
      acc[2 * i + 1] += s * v[2 * i] + c * v[2 * i + 1];
    }
  }
  return {acc.begin(), acc.end()};
}

std::vector<EmbeddingRecord> embed_groups(std::span<const PromptGroup> groups, Oracle oracle, int dim) {
  std::vector<EmbeddingRecord> out;
  out.reserve(groups.size() * 4);
  for (const auto& g : groups) {
    for (auto v : {Variant::base, Variant::rephrased, Variant::negated, Variant::swapped}) {
      out.push_back({g.group_id, v,
                     oracle == Oracle::bag_of_words ? bag_of_words_embedding(g.text(v), dim)
                                                    : order_sensitive_embedding(g.text(v), dim)});
    }
  }
  return out;
}

}  // namespace spatialkit::proxy
