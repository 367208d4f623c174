#include <cmath>
#include <numeric>
#include <random>

#include "doctest.h"
#include "spatialkit/tenor.hpp"

using namespace spatialkit::tenor;

namespace {

// Softmax attention written out with loops, for comparison with the Eigen path.
Matrix naive_cross(const Matrix& q, const Matrix& k, const Matrix& v) {
  Matrix out = Matrix::Zero(q.rows(), v.cols());
  for (Eigen::Index i = 0; i < q.rows(); ++i) {
    std::vector<double> logits(static_cast<std::size_t>(k.rows()));
    double hi = -INFINITY;
    for (Eigen::Index j = 0; j < k.rows(); ++j) {
      double dot = 0;
      for (Eigen::Index c = 0; c < q.cols(); ++c) dot += q(i, c) * k(j, c);
      logits[j] = dot / std::sqrt(double(q.cols()));
      hi = std::max(hi, logits[j]);
    }
    double z = 0;
    for (auto& l : logits) z += (l = std::exp(l - hi));
    for (Eigen::Index j = 0; j < k.rows(); ++j)
      for (Eigen::Index c = 0; c < v.cols(); ++c) out(i, c) += logits[j] / z * v(j, c);
  }
  return out;
}

struct Setup {
  Projections proj = Projections::seeded(10, 6, 8, 3);
  Matrix image = seeded_matrix(5, 10, 11) * 3.0;
  Matrix text = seeded_matrix(4, 6, 12) * 3.0;
};

}  // namespace

TEST_CASE("sinusoidal codes") {
  const auto p0 = sinusoidal_pe(0, 6);
  for (int i = 0; i < 6; ++i) CHECK(p0[i] == (i % 2 == 0 ? 0.0 : 1.0));
  const auto p1 = sinusoidal_pe(1, 4);
  CHECK(p1[0] == doctest::Approx(std::sin(1.0)).epsilon(1e-15));
  CHECK(p1[1] == doctest::Approx(std::cos(1.0)).epsilon(1e-15));
  CHECK(p1[2] == doctest::Approx(std::sin(0.01)).epsilon(1e-15));
  CHECK(p1[3] == doctest::Approx(std::cos(0.01)).epsilon(1e-15));
  CHECK_THROWS_AS(sinusoidal_pe(1, 5), std::invalid_argument);
  CHECK_THROWS_AS(sinusoidal_pe(-1, 4), std::invalid_argument);

  const auto table = sinusoidal_table(3, 4);
  CHECK(table.rows() == 3);
  CHECK((table.row(1).transpose() - p1).norm() == 0.0);
}

TEST_CASE("codes are distinct for positions up to 10000") {
  for (int dim : {2, 8, 64}) {
    const auto table = sinusoidal_table(10001, dim);
    // Sort rows lexicographically; adjacent equal rows would mean a collision.
    std::vector<int> order(10001);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
      for (int c = 0; c < dim; ++c)
        if (table(a, c) != table(b, c)) return table(a, c) < table(b, c);
      return false;
    });
    double min_gap = INFINITY;
    for (std::size_t i = 1; i < order.size(); ++i)
      min_gap = std::min(min_gap, (table.row(order[i]) - table.row(order[i - 1])).norm());
    CHECK(min_gap > 0.0);
  }
}

TEST_CASE("attention matches a loop implementation") {
  Setup s;
  const auto r = attention(s.image, s.text, s.proj, Layout::cross);
  const Matrix expect = naive_cross(s.image * s.proj.image_q, s.text * s.proj.text_k, s.text * s.proj.text_v);
  CHECK((r.output - expect).cwiseAbs().maxCoeff() < 1e-12);

  const Matrix codes = sinusoidal_table(4, 8);
  const auto inj = attention_with_injection(s.image, s.text, InjectionMode::unet_k, s.proj);
  const Matrix expect_k =
      naive_cross(s.image * s.proj.image_q, s.text * s.proj.text_k + codes, s.text * s.proj.text_v);
  CHECK((inj.output - expect_k).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((inj.output - r.output).norm() > 1e-6);
}

TEST_CASE("joint layout shapes and normalization") {
  Setup s;
  for (auto mode : {InjectionMode::none, InjectionMode::unet_k, InjectionMode::mmdit_qk}) {
    const auto r = attention_with_injection(s.image, s.text, mode, s.proj);
    const auto rows = mode == InjectionMode::mmdit_qk ? 9 : 5;
    CHECK(r.output.rows() == rows);
    CHECK(r.weights.rows() == rows);
    CHECK((r.weights.rowwise().sum().array() - 1.0).abs().maxCoeff() < 1e-12);
    CHECK(r.weights.minCoeff() >= 0.0);
  }
  CHECK(layout_for(InjectionMode::mmdit_qk) == Layout::joint);
  CHECK(parse_injection_mode("unet_k") == InjectionMode::unet_k);
  CHECK_FALSE(parse_injection_mode("other").has_value());
  CHECK_THROWS(attention(s.image, seeded_matrix(4, 7, 1), s.proj, Layout::cross));
}

TEST_CASE("order sensitivity on random inputs") {
  std::mt19937_64 rng(9);
  for (std::uint64_t seed = 1; seed <= 25; ++seed) {
    const auto proj = Projections::seeded(12, 10, 8, seed);
    const Matrix image = seeded_matrix(6, 12, seed * 31) * 3.0;
    const Matrix text = seeded_matrix(5, 10, seed * 37) * 3.0;
    std::vector<int> perm(5);
    std::iota(perm.begin(), perm.end(), 0);
    do std::shuffle(perm.begin(), perm.end(), rng);
    while (perm[0] == 0 && perm[1] == 1 && perm[2] == 2 && perm[3] == 3);
    const Matrix shuffled = permute_rows(text, perm);

    const auto none_a = attention_with_injection(image, text, InjectionMode::none, proj).output;
    const auto none_b = attention_with_injection(image, shuffled, InjectionMode::none, proj).output;
    CHECK((none_a - none_b).cwiseAbs().maxCoeff() < 1e-12);

    for (auto mode : {InjectionMode::unet_k, InjectionMode::mmdit_qk}) {
      const Matrix a = attention_with_injection(image, text, mode, proj).output.topRows(6);
      const Matrix b = attention_with_injection(image, shuffled, mode, proj).output.topRows(6);
      CHECK((a - b).norm() > 1e-3);
    }
  }
}

TEST_CASE("identical tokens make every mode order invariant") {
  // With equal value rows any convex combination is that row, codes or not.
  Setup s;
  const Matrix same = s.text.topRows(1).replicate(4, 1);
  const std::vector<int> rev = {3, 2, 1, 0};
  for (auto mode : {InjectionMode::none, InjectionMode::unet_k}) {
    const auto a = attention_with_injection(s.image, same, mode, s.proj).output;
    const auto b = attention_with_injection(s.image, permute_rows(same, rev), mode, s.proj).output;
    CHECK((a - b).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("degenerate code tables") {
  Setup s;
  const Matrix zero = Matrix::Zero(4, 8);
  for (auto mode : {InjectionMode::unet_k, InjectionMode::mmdit_qk}) {
    const auto a = attention_with_injection(s.image, s.text, mode, s.proj, &zero).output;
    const auto b = attention(s.image, s.text, s.proj, layout_for(mode)).output;
    CHECK((a - b).cwiseAbs().maxCoeff() == 0.0);
  }
  const auto one = s.text.topRows(1);
  const auto a = attention_with_injection(s.image, one, InjectionMode::unet_k, s.proj).output;
  const auto b = attention_with_injection(s.image, one, InjectionMode::none, s.proj).output;
  CHECK((a - b).cwiseAbs().maxCoeff() < 1e-12);
  // single key: the output is exactly that key's value row
  const Matrix v = one * s.proj.text_v;
  for (Eigen::Index i = 0; i < a.rows(); ++i) CHECK((a.row(i) - v.row(0)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("property suite passes") {
  for (const CheckConfig& cfg : {CheckConfig{}, CheckConfig{3, 2, 8, 4, 4, 1}, CheckConfig{16, 12, 32, 24, 16, 99}}) {
    const auto checks = run_property_checks(cfg);
    CHECK(checks.size() == 11);
    for (const auto& c : checks) CHECK_MESSAGE(c.passed, c.name << " measured " << c.measured);
  }
}
