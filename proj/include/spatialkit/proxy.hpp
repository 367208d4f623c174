#pragma once

#include <array>
#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace spatialkit::proxy {

enum class Relation : std::uint8_t { left, right, above, below };

std::string_view to_string(Relation r);
std::optional<Relation> parse_relation(std::string_view s);
Relation opposite(Relation r);
/// "to the left of", "to the right of", "above", "below".
std::string_view phrase(Relation r);

enum class Variant : std::uint8_t { base, rephrased, negated, swapped };
std::string_view to_string(Variant v);
std::optional<Variant> parse_variant(std::string_view s);

/// Base prompt "A rel B" and its three variations:
///   rephrased  "B opposite(rel) A"  (logically equivalent)
///   negated    "A opposite(rel) B"
///   swapped    "B rel A"
struct PromptGroup {
  std::int64_t group_id = 0;
  std::string base;
  std::string rephrased;
  std::string negated;
  std::string swapped;
  std::string category_a;
  std::string category_b;
  Relation relation = Relation::left;

  const std::string& text(Variant v) const;
  friend bool operator==(const PromptGroup&, const PromptGroup&) = default;
};

enum class PairingMode {
  paper,  // one group per ordered pair, relation cycling with the group index
  full,   // every ordered pair with each of the four relations
};

std::string render_prompt(std::string_view a, Relation r, std::string_view b);
PromptGroup make_group(std::int64_t group_id, std::string_view a, std::string_view b, Relation r);

/// Throws std::invalid_argument on fewer than two or duplicate names.
std::vector<PromptGroup> generate_groups(std::span<const std::string> categories, PairingMode mode);

void write_groups(std::span<const PromptGroup> groups, std::ostream& out);
std::vector<PromptGroup> read_groups(std::istream& in);

struct EmbeddingRecord {
  std::int64_t group_id = 0;
  Variant variant = Variant::base;
  std::vector<float> vector;
};

/// Streams JSONL {group_id, variant, vector}. Throws on non-finite values or
/// when the dimension changes within the file.
std::vector<EmbeddingRecord> read_embeddings(std::istream& in);
void write_embeddings(std::span<const EmbeddingRecord> records, std::ostream& out);

enum class Metric { cosine, dot, euclidean };
std::optional<Metric> parse_metric(std::string_view s);

/// Higher is more similar. Euclidean is returned negated. Accumulates in double.
double similarity(std::span<const float> a, std::span<const float> b, Metric metric);

struct RetrievalReport {
  std::array<std::uint64_t, 3> wins{};  // rephrased, negated, swapped
  std::uint64_t groups_evaluated = 0;
  std::uint64_t skipped = 0;

  std::uint64_t wins_for(Variant v) const;
  double correct_rate() const;
};

/// Per group, the variation most similar to the base prompt; ties resolve to
/// rephrased, then negated, then swapped. Groups with a missing variant,
/// mismatched dimension or zero-norm vector (cosine) are skipped.
RetrievalReport retrieve(std::span<const PromptGroup> groups, std::span<const EmbeddingRecord> embeddings,
                         Metric metric = Metric::cosine);

/// "0.02%" style: percent with two decimals, trailing zeros trimmed.
std::string format_percent(double fraction);
void write_report_json(const RetrievalReport& r, std::ostream& out);
void write_report_table(const RetrievalReport& r, std::string_view encoder, std::ostream& out);

// Reference embedders. Both tokenize on whitespace, lower-cased.

/// Sum of hashed per-token vectors: blind to word order.
std::vector<float> bag_of_words_embedding(std::string_view prompt, int dim);
/// Per-token hashed vector modulated by a sinusoidal code of its position:
/// reordering tokens changes the result. dim >= 8.
std::vector<float> order_sensitive_embedding(std::string_view prompt, int dim);

enum class Oracle { bag_of_words, order_sensitive };
std::vector<EmbeddingRecord> embed_groups(std::span<const PromptGroup> groups, Oracle oracle, int dim);

}  // namespace spatialkit::proxy
