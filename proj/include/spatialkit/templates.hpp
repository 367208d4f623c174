#pragma once

#include <array>
#include <filesystem>
#include <istream>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "spatialkit/pairing.hpp"

namespace spatialkit {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// "a cup", "an apple": vowel-initial nouns take "an", with a small table of
/// exceptions ("an hour", "a unicorn").
std::string with_article(std::string_view noun);

/// Caption templates per relation token. A template holds exactly one
/// `{subject}` and one `{object}` slot; each slot expands to article + noun.
class TemplatePool {
 public:
  TemplatePool() = default;

  /// Three templates per directional token plus three for <and>.
  static TemplatePool defaults();
  /// JSON object {"<left>": ["...", ...], ...}. Throws ConfigError.
  static TemplatePool from_json(std::istream& in);
  static TemplatePool from_file(const std::filesystem::path& path);
  void to_json(std::ostream& out) const;

  void add(RelationToken token, std::string text);
  std::span<const std::string> templates(RelationToken token) const;

  /// Every token (all 8 plus <and>) has at least one template.
  void validate() const;

 private:
  std::array<std::vector<std::string>, kAllTokens.size()> pool_;
};

std::string render_template(std::string_view tmpl, std::string_view subject, std::string_view object);

struct ParsedPrompt {
  RelationToken token;
  std::string subject;
  std::string object;
  friend bool operator==(const ParsedPrompt&, const ParsedPrompt&) = default;
};

/// Every (token, subject, object) reading of `prompt` under `pool` whose
/// slots are category names from `vocabulary`.
std::vector<ParsedPrompt> parse_prompt(std::string_view prompt, const TemplatePool& pool,
                                       std::span<const std::string> vocabulary);

}  // namespace spatialkit
