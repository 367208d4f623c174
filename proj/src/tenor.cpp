#include "spatialkit/tenor.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace spatialkit::tenor {

std::string_view to_string(InjectionMode m) {
  switch (m) {
    case InjectionMode::none: return "none";
    case InjectionMode::unet_k: return "unet_k";
    case InjectionMode::mmdit_qk: return "mmdit_qk";
  }
  return "none";
}

std::optional<InjectionMode> parse_injection_mode(std::string_view s) {
  for (auto m : {InjectionMode::none, InjectionMode::unet_k, InjectionMode::mmdit_qk}) {
    if (to_string(m) == s) return m;
  }
  return std::nullopt;
}

Vector sinusoidal_pe(int position, int dim) {
  if (dim <= 0 || dim % 2 != 0) throw std::invalid_argument("sinusoidal_pe: dim must be even and positive");
  if (position < 0) throw std::invalid_argument("sinusoidal_pe: negative position");
  Vector pe(dim);
  for (int i = 0; i < dim / 2; ++i) {
    const double angle = position / std::pow(10000.0, 2.0 * i / dim);
    pe[2 * i] = std::sin(angle);
    pe[2 * i + 1] = std::cos(angle);
  }
  return pe;
}

Matrix sinusoidal_table(int tokens, int dim) {
  Matrix t(tokens, dim);
  for (int p = 0; p < tokens; ++p) t.row(p) = sinusoidal_pe(p, dim).transpose();
  return t;
}

Matrix seeded_matrix(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed) {
  std::uint64_t state = seed;
  auto next = [&] {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  };
  const double scale = 1.0 / std::sqrt(static_cast<double>(std::max<Eigen::Index>(rows, 1)));
  Matrix m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) {
      m(r, c) = (static_cast<double>(next() >> 11) * 0x1.0p-52 - 1.0) * scale;
    }
  }
  return m;
}

Projections Projections::seeded(Eigen::Index d_image, Eigen::Index d_text, Eigen::Index d_head, std::uint64_t seed) {
  return {seeded_matrix(d_image, d_head, seed * 6 + 1), seeded_matrix(d_image, d_head, seed * 6 + 2),
          seeded_matrix(d_image, d_head, seed * 6 + 3), seeded_matrix(d_text, d_head, seed * 6 + 4),
          seeded_matrix(d_text, d_head, seed * 6 + 5), seeded_matrix(d_text, d_head, seed * 6 + 6)};
}

namespace {

Matrix softmax_rows(const Matrix& scores) {
  Matrix out(scores.rows(), scores.cols());
  for (Eigen::Index r = 0; r < scores.rows(); ++r) {
    const double m = scores.row(r).maxCoeff();
    out.row(r) = (scores.row(r).array() - m).exp().matrix();
    out.row(r) /= out.row(r).sum();
  }
  return out;
}

void require(bool ok, const char* what) {
  if (!ok) throw std::invalid_argument(std::string("attention: ") + what);
}

}  // namespace

AttentionResult attention(const Matrix& image_tokens, const Matrix& text_tokens, const Projections& proj,
                          Layout layout, const Matrix* text_codes) {
  const auto d = proj.head_dim();
  require(image_tokens.cols() == proj.image_q.rows(), "image token width does not match projections");
  require(text_tokens.cols() == proj.text_k.rows(), "text token width does not match projections");
  require(proj.text_k.cols() == d && proj.text_v.cols() == d, "projection head dims differ");
  require(text_tokens.rows() > 0, "empty text sequence");
  if (text_codes) {
    require(text_codes->rows() == text_tokens.rows() && text_codes->cols() == d, "code table shape mismatch");
  }
  require(image_tokens.allFinite() && text_tokens.allFinite(), "non-finite input");

  Matrix q, k, v;
  if (layout == Layout::cross) {
    q = image_tokens * proj.image_q;
    k = text_tokens * proj.text_k;
    v = text_tokens * proj.text_v;
    if (text_codes) k += *text_codes;
  } else {
    require(proj.image_k.rows() == image_tokens.cols() && proj.text_q.rows() == text_tokens.cols(),
            "joint projections missing");
    Matrix text_q = text_tokens * proj.text_q;
    Matrix text_k = text_tokens * proj.text_k;
    if (text_codes) {
      text_q += *text_codes;
      text_k += *text_codes;
    }
    const auto n_img = image_tokens.rows();
    const auto n_txt = text_tokens.rows();
    q.resize(n_img + n_txt, d);
    k.resize(n_img + n_txt, d);
    v.resize(n_img + n_txt, d);
    q << image_tokens * proj.image_q, text_q;
    k << image_tokens * proj.image_k, text_k;
    v << image_tokens * proj.image_v, text_tokens * proj.text_v;
  }
  AttentionResult r;
  r.weights = softmax_rows((q * k.transpose()) / std::sqrt(static_cast<double>(d)));
  r.output = r.weights * v;
  return r;
}

Layout layout_for(InjectionMode mode) { return mode == InjectionMode::mmdit_qk ? Layout::joint : Layout::cross; }

AttentionResult attention_with_injection(const Matrix& image_tokens, const Matrix& text_tokens, InjectionMode mode,
                                         const Projections& proj, const Matrix* codes_override) {
  if (mode == InjectionMode::none) return attention(image_tokens, text_tokens, proj, Layout::cross);
  if (codes_override) return attention(image_tokens, text_tokens, proj, layout_for(mode), codes_override);
  const Matrix codes = sinusoidal_table(static_cast<int>(text_tokens.rows()), static_cast<int>(proj.head_dim()));
  return attention(image_tokens, text_tokens, proj, layout_for(mode), &codes);
}

Matrix permute_rows(const Matrix& m, const std::vector<int>& perm) {
  if (static_cast<Eigen::Index>(perm.size()) != m.rows()) throw std::invalid_argument("permute_rows: size mismatch");
  Matrix out(m.rows(), m.cols());
  for (std::size_t i = 0; i < perm.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = m.row(perm[i]);
  return out;
}

std::vector<CheckResult> run_property_checks(const CheckConfig& cfg) {
  std::vector<CheckResult> out;
  const auto proj = Projections::seeded(cfg.d_image, cfg.d_text, cfg.d_head, cfg.seed);
  const Matrix image = seeded_matrix(cfg.image_tokens, cfg.d_image, cfg.seed + 100) * std::sqrt(double(cfg.image_tokens));
  const Matrix text = seeded_matrix(cfg.text_tokens, cfg.d_text, cfg.seed + 200) * std::sqrt(double(cfg.text_tokens));

  // Reversal moves every token except possibly the middle one.
  std::vector<int> perm(static_cast<std::size_t>(cfg.text_tokens));
  std::iota(perm.begin(), perm.end(), 0);
  std::reverse(perm.begin(), perm.end());
  const Matrix shuffled = permute_rows(text, perm);
  const auto n_img = cfg.image_tokens;

  auto add = [&](std::string name, bool passed, double measured, std::string criterion) {
    out.push_back({std::move(name), passed, measured, std::move(criterion)});
  };

  // Baselines are permutation invariant: a set function of the text tokens.
  {
    const auto a = attention(image, text, proj, Layout::cross).output;
    const auto b = attention(image, shuffled, proj, Layout::cross).output;
    const double diff = (a - b).cwiseAbs().maxCoeff();
    add("none: cross-attention ignores token order", diff < 1e-12, diff, "max |diff| < 1e-12");
  }
  {
    const auto a = attention(image, text, proj, Layout::joint).output;
    const auto b = attention(image, shuffled, proj, Layout::joint).output;
    const double diff = (a.topRows(n_img) - b.topRows(n_img)).cwiseAbs().maxCoeff();
    add("none: joint attention ignores token order (image rows)", diff < 1e-12, diff, "max |diff| < 1e-12");
  }

  for (auto mode : {InjectionMode::unet_k, InjectionMode::mmdit_qk}) {
    const auto a = attention_with_injection(image, text, mode, proj).output;
    const auto b = attention_with_injection(image, shuffled, mode, proj).output;
    const double diff = (a.topRows(n_img) - b.topRows(n_img)).norm();
    add(std::string(to_string(mode)) + ": output depends on token order", diff > 1e-3, diff, "||diff|| > 1e-3");
  }

  for (auto mode : {InjectionMode::none, InjectionMode::unet_k, InjectionMode::mmdit_qk}) {
    const auto w = attention_with_injection(image, text, mode, proj).weights;
    const double dev = (w.rowwise().sum().array() - 1.0).abs().maxCoeff();
    add(std::string(to_string(mode)) + ": softmax rows sum to 1", dev < 1e-12, dev, "max |sum - 1| < 1e-12");
  }

  {
    const Matrix zero = Matrix::Zero(cfg.text_tokens, cfg.d_head);
    for (auto mode : {InjectionMode::unet_k, InjectionMode::mmdit_qk}) {
      const auto injected = attention_with_injection(image, text, mode, proj, &zero).output;
      const auto baseline = attention(image, text, proj, layout_for(mode)).output;
      const double diff = (injected - baseline).cwiseAbs().maxCoeff();
      add(std::string(to_string(mode)) + ": zero codes reproduce the baseline", diff == 0.0, diff, "max |diff| == 0");
    }
  }

  {
    // Every token at position 0: one shared code shifts each logit row by a constant.
    const Matrix same = sinusoidal_pe(0, cfg.d_head).transpose().replicate(cfg.text_tokens, 1);
    const auto injected = attention_with_injection(image, text, InjectionMode::unet_k, proj, &same).output;
    const auto baseline = attention(image, text, proj, Layout::cross).output;
    const double diff = (injected - baseline).cwiseAbs().maxCoeff();
    add("unet_k: a code shared by all keys changes nothing", diff < 1e-12, diff, "max |diff| < 1e-12");
  }

  {
    const Matrix one = text.topRows(1);
    const auto injected = attention_with_injection(image, one, InjectionMode::unet_k, proj).output;
    const auto baseline = attention_with_injection(image, one, InjectionMode::none, proj).output;
    const double diff = (injected - baseline).cwiseAbs().maxCoeff();
    add("unet_k: single key gets weight 1 regardless of its code", diff < 1e-12, diff, "max |diff| < 1e-12");
  }
  return out;
}

}  // namespace spatialkit::tenor
