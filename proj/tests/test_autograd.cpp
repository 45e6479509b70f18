#include <functional>
#include <random>

#include "doctest.h"
#include "subprompt/autograd.hpp"

using namespace subprompt;
using namespace subprompt::ag;

namespace {

Mat random_mat(std::mt19937_64& rng, std::size_t r, std::size_t c) {
  Mat m(r, c);
  std::normal_distribution<double> n(0.0, 1.0);
  for (double& x : m.v) x = n(rng);
  return m;
}

// central finite differences of a scalar-valued graph w.r.t. one leaf
void check_grads(const std::function<Var(const Var&)>& f, Mat x0, double tol = 1e-6) {
  Var x = leaf(x0, true);
  Var y = f(x);
  backward(y);
  const double eps = 1e-5;
  for (std::size_t i = 0; i < x0.size(); ++i) {
    Mat plus = x0, minus = x0;
    plus.v[i] += eps;
    minus.v[i] -= eps;
    double fd = (f(leaf(plus, false))->val.at(0, 0) - f(leaf(minus, false))->val.at(0, 0)) /
                (2.0 * eps);
    CHECK(x->grad.v[i] == doctest::Approx(fd).epsilon(tol).scale(1.0));
  }
}

Var sum_all(const Var& v) {
  Var ones_col = leaf(Mat(v->val.cols, 1, 1.0));
  Var ones_row = leaf(Mat(1, v->val.rows, 1.0));
  return matmul(ones_row, matmul(v, ones_col));
}

}  // namespace

TEST_CASE("matmul and add grads match finite differences") {
  std::mt19937_64 rng(1);
  Mat a = random_mat(rng, 3, 4), b = random_mat(rng, 4, 2);
  check_grads([&](const Var& x) { return sum_all(matmul(x, leaf(b))); }, a);
  check_grads([&](const Var& x) { return sum_all(matmul(leaf(a), x)); }, b);
  check_grads([&](const Var& x) { return sum_all(add(x, x)); }, a);
  Mat c = random_mat(rng, 3, 2);
  check_grads([&](const Var& x) { return sum_all(matmul_nt(leaf(c), x)); }, b);
}

TEST_CASE("gelu, softmax, layernorm grads") {
  std::mt19937_64 rng(2);
  Mat a = random_mat(rng, 2, 5);
  check_grads([&](const Var& x) { return sum_all(gelu(x)); }, a);

  // weight the softmax output so the gradient is not trivially zero
  Mat w = random_mat(rng, 2, 5);
  check_grads(
      [&](const Var& x) {
        Var s = softmax_rows(x);
        Var prod = matmul_nt(s, leaf(w));  // 2x2
        return sum_all(slice_cols(prod, 0, 1));
      },
      a);

  Mat gain = random_mat(rng, 1, 5), bias = random_mat(rng, 1, 5);
  check_grads([&](const Var& x) { return sum_all(matmul_nt(layernorm(x, leaf(gain), leaf(bias)),
                                                           leaf(w))); },
              a);
  check_grads([&](const Var& g) { return sum_all(layernorm(leaf(a), g, leaf(bias))); }, gain);
}

TEST_CASE("masked softmax blocks masked positions") {
  Mat scores(1, 3);
  scores.v = {1.0, 5.0, 2.0};
  Mat mask(1, 3);
  mask.v = {0.0, -std::numeric_limits<double>::infinity(), 0.0};
  Var s = softmax_rows(leaf(scores), &mask);
  CHECK(s->val.at(0, 1) == 0.0);
  CHECK(s->val.at(0, 0) + s->val.at(0, 2) == doctest::Approx(1.0));
}

TEST_CASE("embed gathers rows and scatter-adds grads") {
  Mat table(4, 2);
  for (std::size_t i = 0; i < table.size(); ++i) table.v[i] = static_cast<double>(i);
  Var t = leaf(table, true);
  Var e = embed(t, {2, 0, 2});
  CHECK(e->val.at(0, 0) == 4.0);
  CHECK(e->val.at(1, 1) == 1.0);
  backward(sum_all(e));
  CHECK(t->grad.at(2, 0) == 2.0);  // row 2 gathered twice
  CHECK(t->grad.at(0, 0) == 1.0);
  CHECK(t->grad.at(3, 0) == 0.0);
}

TEST_CASE("rowscale, slice and concat grads") {
  std::mt19937_64 rng(3);
  Mat a = random_mat(rng, 3, 4);
  check_grads([&](const Var& x) { return sum_all(rowscale_const(x, {0.5, 2.0, 0.0})); }, a);
  check_grads([&](const Var& x) { return sum_all(slice_cols(x, 1, 3)); }, a);
  check_grads([&](const Var& x) { return sum_all(concat_cols({slice_cols(x, 0, 2),
                                                              slice_cols(x, 2, 4)})); },
              a);
  check_grads([&](const Var& x) { return sum_all(concat_rows(x, x)); }, a);
}

TEST_CASE("masked cross entropy value and grads") {
  // uniform logits: loss = ln(vocab)
  Mat logits(3, 7, 0.42);
  Var l = leaf(logits, false);
  Var loss = masked_cross_entropy(l, {1, 2, 3}, {1, 1, 0});
  CHECK(loss->val.at(0, 0) == doctest::Approx(std::log(7.0)));

  std::mt19937_64 rng(4);
  Mat rnd = random_mat(rng, 3, 5);
  check_grads([&](const Var& x) { return masked_cross_entropy(x, {1, 0, 4}, {1, 0, 1}); }, rnd);

  // masked rows contribute no gradient
  Var x = leaf(rnd, true);
  backward(masked_cross_entropy(x, {1, 0, 4}, {1, 0, 1}));
  for (std::size_t j = 0; j < 5; ++j) CHECK(x->grad.at(1, j) == 0.0);

  CHECK_THROWS(masked_cross_entropy(leaf(rnd), {0, 0, 0}, {0, 0, 0}));
}
