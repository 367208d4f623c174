#include "spatialkit/templates.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>

#include "json.hpp"

namespace spatialkit {

namespace {

constexpr std::string_view kSubjectSlot = "{subject}";
constexpr std::string_view kObjectSlot = "{object}";

// Leading-letter heuristics get these wrong.
constexpr std::array<std::string_view, 8> kAnExceptions = {"hour", "honest", "honor", "heir",
                                                           "herb", "hourglass", "honey badger", "x-ray"};
constexpr std::array<std::string_view, 8> kAExceptions = {"one", "once", "unicorn", "uniform",
                                                          "university", "user", "european", "unit"};

bool starts_with_word(std::string_view noun, std::string_view word) {
  if (noun.size() < word.size()) return false;
  for (std::size_t i = 0; i < word.size(); ++i) {
    if (std::tolower(static_cast<unsigned char>(noun[i])) != word[i]) return false;
  }
  return noun.size() == word.size() || !std::isalpha(static_cast<unsigned char>(noun[word.size()]));
}

std::size_t count(std::string_view s, std::string_view needle) {
  std::size_t n = 0;
  for (auto pos = s.find(needle); pos != std::string_view::npos; pos = s.find(needle, pos + needle.size())) ++n;
  return n;
}

}  // namespace

std::string with_article(std::string_view noun) {
  bool an = false;
  if (!noun.empty()) {
    const char c = static_cast<char>(std::tolower(static_cast<unsigned char>(noun.front())));
    an = std::string_view("aeiou").find(c) != std::string_view::npos;
  }
  for (auto w : kAnExceptions) {
    if (starts_with_word(noun, w)) an = true;
  }
  for (auto w : kAExceptions) {
    if (starts_with_word(noun, w)) an = false;
  }
  return std::string(an ? "an " : "a ") + std::string(noun);
}

TemplatePool TemplatePool::defaults() {
  TemplatePool p;
  using T = RelationToken;
  p.pool_[static_cast<std::size_t>(T::left)] = {
      "{subject} to the left of {object}", "{subject} on the left side of {object}",
      "{object} to the right of {subject}"};
  p.pool_[static_cast<std::size_t>(T::right)] = {
      "{subject} to the right of {object}", "{subject} on the right side of {object}",
      "{object} to the left of {subject}"};
  p.pool_[static_cast<std::size_t>(T::above)] = {
      "{subject} on top of {object}", "{subject} above {object}", "an image of {object} below {subject}"};
  p.pool_[static_cast<std::size_t>(T::below)] = {
      "{subject} below {object}", "{subject} underneath {object}", "an image of {object} above {subject}"};
  p.pool_[static_cast<std::size_t>(T::left_above)] = {
      "{subject} above and to the left of {object}", "{subject} to the upper left of {object}",
      "{object} below and to the right of {subject}"};
  p.pool_[static_cast<std::size_t>(T::right_above)] = {
      "{subject} above and to the right of {object}", "{subject} to the upper right of {object}",
      "{object} below and to the left of {subject}"};
  p.pool_[static_cast<std::size_t>(T::left_below)] = {
      "{subject} below and to the left of {object}", "{subject} to the lower left of {object}",
      "{object} above and to the right of {subject}"};
  p.pool_[static_cast<std::size_t>(T::right_below)] = {
      "{subject} below and to the right of {object}", "{subject} to the lower right of {object}",
      "{object} above and to the left of {subject}"};
  p.pool_[static_cast<std::size_t>(T::and_)] = {
      "{subject} and {object}", "a photo of {subject} and {object}", "{subject} together with {object}"};
  return p;
}

void TemplatePool::add(RelationToken token, std::string text) {
  if (count(text, kSubjectSlot) != 1 || count(text, kObjectSlot) != 1) {
    throw ConfigError("template must contain {subject} and {object} exactly once: '" + text + "'");
  }
  pool_[static_cast<std::size_t>(token)].push_back(std::move(text));
}

std::span<const std::string> TemplatePool::templates(RelationToken token) const {
  return pool_[static_cast<std::size_t>(token)];
}

void TemplatePool::validate() const {
  for (auto t : kAllTokens) {
    if (templates(t).empty()) throw ConfigError("template pool has no template for " + std::string(to_string(t)));
  }
}

TemplatePool TemplatePool::from_json(std::istream& in) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("template pool: ") + e.what());
  }
  if (!doc.is_object()) throw ConfigError("template pool must be a JSON object");
  TemplatePool p;
  for (const auto& [key, list] : doc.items()) {
    auto token = parse_relation_token(key);
    if (!token) throw ConfigError("template pool: unknown token '" + key + "'");
    if (!list.is_array()) throw ConfigError("template pool: '" + key + "' must map to an array");
    for (const auto& t : list) {
      if (!t.is_string()) throw ConfigError("template pool: '" + key + "' holds a non-string");
      p.add(*token, t.get<std::string>());
    }
  }
  p.validate();
  return p;
}

TemplatePool TemplatePool::from_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open template pool " + path.string());
  return from_json(in);
}

void TemplatePool::to_json(std::ostream& out) const {
  nlohmann::ordered_json doc = nlohmann::ordered_json::object();
  for (auto t : kAllTokens) doc[std::string(to_string(t))] = templates(t);
  out << doc.dump(2) << '\n';
}

std::string render_template(std::string_view tmpl, std::string_view subject, std::string_view object) {
  std::string out;
  out.reserve(tmpl.size() + subject.size() + object.size() + 8);
  std::size_t i = 0;
  while (i < tmpl.size()) {
    if (tmpl.substr(i, kSubjectSlot.size()) == kSubjectSlot) {
      out += with_article(subject);
      i += kSubjectSlot.size();
    } else if (tmpl.substr(i, kObjectSlot.size()) == kObjectSlot) {
      out += with_article(object);
      i += kObjectSlot.size();
    } else {
      out += tmpl[i++];
    }
  }
  return out;
}

std::vector<ParsedPrompt> parse_prompt(std::string_view prompt, const TemplatePool& pool,
                                       std::span<const std::string> vocabulary) {
  std::vector<std::pair<std::string, std::string>> phrases;  // rendered phrase, name
  for (const auto& name : vocabulary) phrases.emplace_back(with_article(name), name);

  std::set<std::tuple<int, std::string, std::string>> found;
  for (auto token : kAllTokens) {
    for (const auto& tmpl : pool.templates(token)) {
      const auto s = tmpl.find(kSubjectSlot);
      const auto o = tmpl.find(kObjectSlot);
      const bool subject_first = s < o;
      const auto first = std::min(s, o);
      const auto second = std::max(s, o);
      const auto first_len = subject_first ? kSubjectSlot.size() : kObjectSlot.size();
      const auto second_len = subject_first ? kObjectSlot.size() : kSubjectSlot.size();
      const std::string_view head = std::string_view(tmpl).substr(0, first);
      const std::string_view mid = std::string_view(tmpl).substr(first + first_len, second - first - first_len);
      const std::string_view tail = std::string_view(tmpl).substr(second + second_len);

      if (prompt.size() < head.size() + mid.size() + tail.size()) continue;
      if (!prompt.starts_with(head) || !prompt.ends_with(tail)) continue;
      const std::string_view body = prompt.substr(head.size(), prompt.size() - head.size() - tail.size());
      for (const auto& [p1, n1] : phrases) {
        if (!body.starts_with(p1) || body.substr(p1.size(), mid.size()) != mid) continue;
        const std::string_view rest = body.substr(p1.size() + mid.size());
        for (const auto& [p2, n2] : phrases) {
          if (rest != p2) continue;
          found.emplace(static_cast<int>(token), subject_first ? n1 : n2, subject_first ? n2 : n1);
        }
      }
    }
  }
  std::vector<ParsedPrompt> out;
  for (const auto& [t, s, o] : found) out.push_back({static_cast<RelationToken>(t), s, o});
  return out;
}

}  // namespace spatialkit
