#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "subprompt/attention.hpp"

using namespace subprompt;

namespace {

Mat row_mat(std::vector<double> row) {
  Mat m(1, row.size());
  m.v = std::move(row);
  return m;
}

Mat random_rows(std::mt19937_64& rng, std::size_t t, std::size_t n, bool normalized) {
  Mat m(t, n);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (std::size_t i = 0; i < t; ++i) {
    double sum = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      m.at(i, j) = u(rng) + 1e-6;
      sum += m.at(i, j);
    }
    if (normalized)
      for (std::size_t j = 0; j < n; ++j) m.at(i, j) /= sum;
  }
  return m;
}

}  // namespace

TEST_CASE("gini closed-form cases") {
  CHECK(gini_weights(row_mat({0.25, 0.25, 0.25, 0.25})).g[0] == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(gini_weights(row_mat({0.0, 0.0, 0.0, 1.0})).g[0] == doctest::Approx(0.75));
  CHECK(gini_weights(row_mat({0.1, 0.2, 0.3, 0.4})).g[0] == doctest::Approx(0.25));
}

TEST_CASE("gini equals the mean-absolute-difference oracle") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 500; ++trial) {
    std::size_t n = 2 + rng() % 30;
    Mat rows = random_rows(rng, 3, n, false);
    auto g = gini_weights(rows);
    for (std::size_t i = 0; i < rows.rows; ++i) {
      std::vector<double> x(rows.row(i), rows.row(i) + n);
      CHECK(g.g[i] == doctest::Approx(oracles::gini_mad(x)).epsilon(1e-9));
    }
  }
}

TEST_CASE("gini scale and permutation invariance, bounds") {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 200; ++trial) {
    std::size_t n = 2 + rng() % 16;
    Mat rows = random_rows(rng, 1, n, false);
    double g0 = gini_weights(rows).g[0];

    Mat scaled = rows;
    double c = std::uniform_real_distribution<double>(0.1, 9.0)(rng);
    for (double& x : scaled.v) x *= c;
    // scale invariance holds bit-level after sorting only up to fp rounding
    CHECK(gini_weights(scaled).g[0] == doctest::Approx(g0).epsilon(1e-12));

    Mat permuted = rows;
    std::shuffle(permuted.v.begin(), permuted.v.end(), rng);
    CHECK(gini_weights(permuted).g[0] == g0);  // bit-level: same sorted sequence

    CHECK(g0 >= 0.0);
    CHECK(g0 <= (static_cast<double>(n) - 1.0) / static_cast<double>(n));
  }
}

TEST_CASE("gini transfer principle: concentrating mass never decreases g") {
  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 500; ++trial) {
    std::size_t n = 3 + rng() % 12;
    Mat rows = random_rows(rng, 1, n, true);
    double mean = 1.0 / static_cast<double>(n);
    std::size_t lo = 0, hi = 0;
    for (std::size_t j = 0; j < n; ++j) {
      if (rows.at(0, j) < rows.at(0, lo)) lo = j;
      if (rows.at(0, j) > rows.at(0, hi)) hi = j;
    }
    if (rows.at(0, lo) >= mean || rows.at(0, hi) <= mean) continue;
    double eps = std::min(rows.at(0, lo), 0.3 * (mean - rows.at(0, lo)));
    double before = gini_weights(rows).g[0];
    rows.at(0, lo) -= eps;
    rows.at(0, hi) += eps;
    CHECK(gini_weights(rows).g[0] >= before - 1e-12);
  }
}

TEST_CASE("gini rejects an all-zero row") {
  CHECK_THROWS(gini_weights(row_mat({0.0, 0.0, 0.0})));
}

TEST_CASE("max and entropy weights") {
  CHECK(max_weights(row_mat({0.0, 0.0, 1.0, 0.0})).g[0] == doctest::Approx(1.0));
  CHECK(entropy_weights(row_mat({0.0, 0.0, 1.0, 0.0})).g[0] == doctest::Approx(1.0));
  CHECK(max_weights(row_mat({0.25, 0.25, 0.25, 0.25})).g[0] == doctest::Approx(0.25));
  CHECK(entropy_weights(row_mat({0.25, 0.25, 0.25, 0.25})).g[0] == doctest::Approx(0.0));
  CHECK(entropy_weights(row_mat({0.5, 0.5, 0.0, 0.0})).g[0] == doctest::Approx(0.5));
  CHECK(entropy_weights(row_mat({1.0})).g[0] == doctest::Approx(1.0));  // N == 1 degenerate
}

TEST_CASE("weighted_kv") {
  Mat kp = row_mat({2.0, 4.0});
  Mat kt(2, 2, 1.0);
  RelevanceWeights g{{0.5}, WaStrategy::gini};
  auto [k, v] = weighted_kv(g, kp, kt, kp, kt);
  CHECK(k.rows == 3);
  CHECK(k.at(0, 0) == 1.0);
  CHECK(k.at(0, 1) == 2.0);
  CHECK(k.at(1, 0) == 1.0);

  RelevanceWeights ones{{1.0}, WaStrategy::none};
  auto [k1, v1] = weighted_kv(ones, kp, kt, kp, kt);
  CHECK(k1.at(0, 0) == 2.0);  // bit-equal to plain concatenation
  CHECK(k1.at(0, 1) == 4.0);

  RelevanceWeights zeros{{0.0}, WaStrategy::gini};
  auto [k0, v0] = weighted_kv(zeros, kp, kt, kp, kt);
  CHECK(k0.at(0, 0) == 0.0);
  CHECK(v0.at(0, 1) == 0.0);

  RelevanceWeights bad{{0.5, 0.5}, WaStrategy::gini};
  CHECK_THROWS(weighted_kv(bad, kp, kt, kp, kt));
}

TEST_CASE("attention basics") {
  Mat unit = row_mat({1.0, 0.0});
  Mat h = attention(unit, unit, unit, {1});
  CHECK(h.at(0, 0) == doctest::Approx(1.0));
  CHECK(h.at(0, 1) == doctest::Approx(0.0));
}

TEST_CASE("attention matches the reference implementation") {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 50; ++trial) {
    std::size_t t = 1 + rng() % 5, d = 1 + rng() % 6;
    Mat q = random_rows(rng, t, d, false), k = random_rows(rng, t, d, false),
        v = random_rows(rng, t, d, false);
    std::vector<std::uint8_t> mask(t * t, 0);
    for (std::size_t i = 0; i < t; ++i)
      for (std::size_t j = 0; j <= i; ++j) mask[i * t + j] = 1;
    Mat got = attention(q, k, v, mask);
    Mat want = oracles::attention_reference(q, k, v, mask);
    for (std::size_t i = 0; i < got.size(); ++i)
      CHECK(got.v[i] == doctest::Approx(want.v[i]).epsilon(1e-12));
  }
}

TEST_CASE("attention rows are convex combinations of allowed value rows") {
  std::mt19937_64 rng(9);
  Mat q = random_rows(rng, 4, 3, false), k = random_rows(rng, 4, 3, false),
      v = random_rows(rng, 4, 3, false);
  std::vector<std::uint8_t> mask(16, 1);
  Mat h = attention(q, k, v, mask);
  for (std::size_t i = 0; i < h.rows; ++i)
    for (std::size_t c = 0; c < h.cols; ++c) {
      double lo = 1e300, hi = -1e300;
      for (std::size_t j = 0; j < v.rows; ++j) {
        lo = std::min(lo, v.at(j, c));
        hi = std::max(hi, v.at(j, c));
      }
      CHECK(h.at(i, c) >= lo - 1e-12);
      CHECK(h.at(i, c) <= hi + 1e-12);
    }

  // identical value rows collapse every output row to that value
  Mat v_same(4, 3);
  for (std::size_t j = 0; j < 4; ++j)
    for (std::size_t c = 0; c < 3; ++c) v_same.at(j, c) = 1.0 + static_cast<double>(c);
  Mat h_same = attention(q, k, v_same, mask);
  for (std::size_t i = 0; i < h_same.rows; ++i)
    for (std::size_t c = 0; c < 3; ++c)
      CHECK(h_same.at(i, c) == doctest::Approx(1.0 + static_cast<double>(c)).epsilon(1e-12));
}

TEST_CASE("fully masked row rejected") {
  Mat q = row_mat({1.0});
  CHECK_THROWS(attention(q, q, q, {0}));
}
