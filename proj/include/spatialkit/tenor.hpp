#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace spatialkit::tenor {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Where token-order codes are added inside text-image attention.
enum class InjectionMode {
  none,      // vanilla cross-attention
  unet_k,    // cross-attention, codes added to the text keys
  mmdit_qk,  // joint attention, codes added to text queries and text keys
};

std::string_view to_string(InjectionMode m);
std::optional<InjectionMode> parse_injection_mode(std::string_view s);

/// Entry 2i = sin(pos / 10000^(2i/dim)), entry 2i+1 = cos(same). Throws on
/// odd dim or negative position.
Vector sinusoidal_pe(int position, int dim);
/// Rows 0..tokens-1 of sinusoidal_pe.
Matrix sinusoidal_table(int tokens, int dim);

/// Deterministic entries in [-1, 1) scaled by 1/sqrt(rows).
Matrix seeded_matrix(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed);

/// Fixed projections into a shared head dimension. Image-side key/value and
/// text-side query projections are only used by joint attention.
struct Projections {
  Matrix image_q;  // d_image x d_head
  Matrix image_k;
  Matrix image_v;
  Matrix text_q;   // d_text x d_head
  Matrix text_k;
  Matrix text_v;

  static Projections seeded(Eigen::Index d_image, Eigen::Index d_text, Eigen::Index d_head, std::uint64_t seed);
  Eigen::Index head_dim() const { return image_q.cols(); }
};

enum class Layout {
  cross,  // image queries attend over text keys/values
  joint,  // image and text tokens attend over their concatenation
};

struct AttentionResult {
  Matrix output;   // cross: n_image x d_head; joint: (n_image + n_text) x d_head
  Matrix weights;  // softmax rows
};

/// softmax(Q K^T / sqrt(d)) V. When `text_codes` is given (n_text x d_head)
/// it is added after projection to the text keys, and in the joint layout
/// also to the text queries.
AttentionResult attention(const Matrix& image_tokens, const Matrix& text_tokens, const Projections& proj,
                          Layout layout, const Matrix* text_codes = nullptr);

Layout layout_for(InjectionMode mode);

/// Mode-driven entry point; injected codes default to the sinusoidal table.
AttentionResult attention_with_injection(const Matrix& image_tokens, const Matrix& text_tokens, InjectionMode mode,
                                         const Projections& proj, const Matrix* codes_override = nullptr);

/// Rows of `m` reordered so that row i of the result is row perm[i] of `m`.
Matrix permute_rows(const Matrix& m, const std::vector<int>& perm);

struct CheckResult {
  std::string name;
  bool passed = false;
  double measured = 0.0;
  std::string criterion;  // e.g. "< 1e-12"
};

struct CheckConfig {
  int image_tokens = 6;
  int text_tokens = 7;
  int d_image = 16;
  int d_text = 12;
  int d_head = 8;
  std::uint64_t seed = 7;
};

/// Order-sensitivity, softmax normalization and degenerate-case checks for
/// every injection mode.
std::vector<CheckResult> run_property_checks(const CheckConfig& cfg = {});

}  // namespace spatialkit::tenor
