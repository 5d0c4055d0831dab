#include <doctest.h>

#include <cmath>
#include <vector>

#include "mim/core/grad_check.hpp"
#include "mim/core/kernels.hpp"
#include "mim/core/param_store.hpp"
#include "mim/core/rng.hpp"
#include "mim/core/tensor.hpp"

using mim::core::finite_diff_check;
using mim::core::Graph;
using mim::core::Param;
using mim::core::ParamStore;
using mim::core::Rng;
using mim::core::Shape;
using mim::core::Tensor;

namespace {

void fill_random(Param<double>& p, Rng& rng, double scale = 1.0) {
  for (auto& x : p.value) x = rng.uniform(-scale, scale);
}

}  // namespace

TEST_CASE("backward of dot-with-itself gives 2x") {
  ParamStore<double> store;
  Param<double>& x = store.create("x", {5});
  Rng rng(1);
  fill_random(x, rng);

  Graph<double> g;
  auto xt = g.param(x);
  auto loss = g.sum(g.mul(xt, xt));
  g.backward(loss);

  for (std::size_t i = 0; i < x.size(); ++i) {
    CHECK(x.grad[i] == 2.0 * x.value[i]);
  }
}

TEST_CASE("softmax NLL gradient equals p - onehot") {
  ParamStore<double> store;
  Param<double>& logits = store.create("logits", {7});
  Rng rng(2);
  fill_random(logits, rng, 3.0);
  const int target = 4;

  Graph<double> g;
  auto z = g.param(logits);
  auto loss = g.sub(g.logsumexp(z), g.pick(z, target));
  g.backward(loss);

  std::vector<double> probs(7);
  mim::kernels::softmax(logits.value.data(), probs.data(), 7);
  for (int i = 0; i < 7; ++i) {
    const double want = probs[static_cast<std::size_t>(i)] - (i == target ? 1.0 : 0.0);
    CHECK(logits.grad[static_cast<std::size_t>(i)] ==
          doctest::Approx(want).epsilon(1e-12));
  }

  // The same gradient must agree with central differences.
  auto loss_fn = [&]() {
    Graph<double> gg;
    auto zz = gg.param(logits);
    return gg.sub(gg.logsumexp(zz), gg.pick(zz, target)).item();
  };
  Rng coords(3);
  auto report = finite_diff_check<double>(loss_fn, store, 1e-5, 64, coords);
  CHECK(report.max_rel_err < 1e-7);
}

TEST_CASE("parameter not used by the loss keeps a zero gradient") {
  ParamStore<double> store;
  Param<double>& used = store.create("used", {3});
  Param<double>& unused = store.create("unused", {4});
  Rng rng(4);
  fill_random(used, rng);
  fill_random(unused, rng);

  store.zero_grad();
  Graph<double> g;
  auto u = g.param(used);
  g.backward(g.sum(g.mul(u, u)));

  for (double gv : unused.grad) CHECK(gv == 0.0);
  bool any = false;
  for (double gv : used.grad) any = any || gv != 0.0;
  CHECK(any);
}

TEST_CASE("gradient accumulation is additive across backward passes") {
  ParamStore<double> store;
  Param<double>& x = store.create("x", {6});
  Rng rng(5);
  fill_random(x, rng);

  // Each loss contributes exactly once per coordinate, so the sums are
  // bit-exact.
  auto grad_of_l1 = [&]() {
    store.zero_grad();
    Graph<double> g;
    auto xt = g.param(x);
    g.backward(g.sum(g.mul(xt, xt)));
    return x.grad;
  };
  auto grad_of_l2 = [&]() {
    store.zero_grad();
    Graph<double> g;
    auto xt = g.param(x);
    g.backward(g.scale(g.sum(xt), 3.0));
    return x.grad;
  };
  const auto g1 = grad_of_l1();
  const auto g2 = grad_of_l2();

  store.zero_grad();
  {
    Graph<double> g;
    auto xt = g.param(x);
    g.backward(g.sum(g.mul(xt, xt)));
    g.backward(g.scale(g.sum(xt), 3.0));
  }
  for (std::size_t i = 0; i < x.size(); ++i) {
    CHECK(x.grad[i] == g1[i] + g2[i]);
  }

  // backward on L1 + L2 equals the sum of the separate passes.
  store.zero_grad();
  {
    Graph<double> g;
    auto xt = g.param(x);
    auto l1 = g.sum(g.mul(xt, xt));
    auto l2 = g.scale(g.sum(xt), 3.0);
    g.backward(g.add(l1, l2));
  }
  for (std::size_t i = 0; i < x.size(); ++i) {
    CHECK(x.grad[i] == doctest::Approx(g1[i] + g2[i]).epsilon(1e-15));
  }
}

TEST_CASE("backward rejects non-scalar losses") {
  ParamStore<double> store;
  Param<double>& x = store.create("x", {3});
  Graph<double> g;
  auto xt = g.param(x);
  CHECK_THROWS_AS(g.backward(g.mul(xt, xt)), std::logic_error);
}

TEST_CASE("finite differences on a quadratic are tight") {
  ParamStore<double> store;
  Param<double>& x = store.create("x", {8});
  Rng rng(6);
  fill_random(x, rng);

  auto loss_fn = [&]() {
    Graph<double> g;
    auto xt = g.param(x);
    return g.sum(g.mul(xt, xt)).item();
  };
  store.zero_grad();
  {
    Graph<double> g;
    auto xt = g.param(x);
    g.backward(g.sum(g.mul(xt, xt)));
  }
  Rng coords(7);
  auto report = finite_diff_check<double>(loss_fn, store, 1e-5, 64, coords);
  CHECK(report.coords_checked == 8);
  CHECK(report.max_rel_err < 1e-8);
}

TEST_CASE("finite differences of the zero function are exactly zero") {
  ParamStore<double> store;
  Param<double>& x = store.create("x", {4});
  Rng rng(8);
  fill_random(x, rng);

  auto loss_fn = [&]() {
    Graph<double> g;
    auto xt = g.param(x);
    return g.scale(g.sum(xt), 0.0).item();
  };
  store.zero_grad();
  {
    Graph<double> g;
    auto xt = g.param(x);
    g.backward(g.scale(g.sum(xt), 0.0));
  }
  Rng coords(9);
  auto report = finite_diff_check<double>(loss_fn, store, 1e-5, 64, coords);
  CHECK(report.max_rel_err == 0.0);
  for (double gv : x.grad) CHECK(gv == 0.0);
}

TEST_CASE("finite_diff_check detects non-deterministic losses") {
  ParamStore<double> store;
  store.create("x", {2});
  int calls = 0;
  auto loss_fn = [&]() { return static_cast<double>(++calls); };
  Rng coords(10);
  CHECK_THROWS_AS(finite_diff_check<double>(loss_fn, store, 1e-5, 4, coords),
                  std::runtime_error);
}

TEST_CASE("layer_norm forward statistics") {
  Graph<double> g;
  const int d = 16;

  SUBCASE("constant input maps to zero") {
    std::vector<double> data(d, 3.25);
    auto x = g.input({1, d}, data);
    auto gamma = g.input({d}, std::vector<double>(d, 1.0));
    auto beta = g.input({d}, std::vector<double>(d, 0.0));
    auto y = g.layer_norm(x, gamma, beta, 1e-5);
    for (double v : y.value()) CHECK(v == 0.0);
  }

  SUBCASE("unit gamma, zero beta: output mean is ~0") {
    Rng rng(11);
    std::vector<double> data(d);
    for (auto& v : data) v = rng.uniform(-4.0, 4.0);
    auto x = g.input({1, d}, data);
    auto gamma = g.input({d}, std::vector<double>(d, 1.0));
    auto beta = g.input({d}, std::vector<double>(d, 0.0));
    auto y = g.layer_norm(x, gamma, beta, 1e-5);
    double mean = 0.0;
    for (double v : y.value()) mean += v;
    mean /= d;
    CHECK(std::abs(mean) < 1e-10);
    // Variance ~1 when input variance >> eps.
    double var = 0.0;
    for (double v : y.value()) var += v * v;
    var /= d;
    CHECK(var == doctest::Approx(1.0).epsilon(1e-4));
  }

  SUBCASE("adding beta shifts the output by exactly beta") {
    Rng rng(12);
    std::vector<double> data(d);
    for (auto& v : data) v = rng.uniform(-4.0, 4.0);
    const double shift = 0.75;
    auto x = g.input({1, d}, data);
    auto gamma = g.input({d}, std::vector<double>(d, 1.0));
    auto beta0 = g.input({d}, std::vector<double>(d, 0.0));
    auto beta1 = g.input({d}, std::vector<double>(d, shift));
    auto y0 = g.layer_norm(x, gamma, beta0, 1e-5);
    auto y1 = g.layer_norm(x, gamma, beta1, 1e-5);
    for (int i = 0; i < d; ++i) {
      CHECK(y1.value()[static_cast<std::size_t>(i)] ==
            y0.value()[static_cast<std::size_t>(i)] + shift);
    }
  }
}

// Every composite op is checked against central differences on a randomly
// wired loss that touches it.
TEST_CASE("per-op gradients match finite differences") {
  Rng rng(13);
  ParamStore<double> store;
  Param<double>& table = store.create("table", {6, 4});
  Param<double>& w = store.create("w", {3, 4});
  Param<double>& b = store.create("b", {3});
  Param<double>& gamma = store.create("gamma", {4});
  Param<double>& beta = store.create("beta", {4});
  Param<double>& q = store.create("q", {5, 4});
  Param<double>& kv = store.create("kv", {5, 4});
  fill_random(table, rng);
  fill_random(w, rng);
  fill_random(b, rng);
  fill_random(q, rng);
  fill_random(kv, rng);
  for (auto& x : gamma.value) x = rng.uniform(0.5, 1.5);
  fill_random(beta, rng);

  std::vector<std::uint8_t> mask(25, 1);
  mask[3] = 0;
  mask[7] = 0;
  mask[12] = 0;
  mask[24] = 0;

  auto build = [&](Graph<double>& g) {
    auto tab = g.param(table);
    auto rows = g.gather_rows(tab, {0, 2, 5, 2, 1});
    auto ln = g.layer_norm(rows, g.param(gamma), g.param(beta), 1e-5);
    auto att = g.attention(g.param(q), ln, g.param(kv), 2, mask.data());
    auto lin = g.linear(g.gelu(att), g.param(w), g.param(b));
    auto scores = g.matmul_nt(lin, lin);
    // Same tensor twice: exercises repeated accumulation into one parent.
    std::vector<Tensor<double>> picked = {g.mean_rows(lin), g.mean_rows(lin)};
    auto stacked = g.stack_rows(picked);
    auto lse = g.logsumexp(stacked);
    auto bce = g.bce_with_logits(g.pick(stacked, 1), 1.0);
    return g.add(g.add(lse, bce), g.scale(g.mean(scores), 0.5));
  };

  auto loss_fn = [&]() {
    Graph<double> g;
    return build(g).item();
  };

  store.zero_grad();
  {
    Graph<double> g;
    g.backward(build(g));
  }
  Rng coords(14);
  auto report = finite_diff_check<double>(loss_fn, store, 1e-6, 24, coords);
  CHECK(report.max_rel_err < 1e-6);
}

TEST_CASE("dropout: p=0 is the identity, p>0 rescales kept entries") {
  Graph<double> g;
  Rng rng(15);
  std::vector<double> data(64);
  for (auto& v : data) v = rng.uniform(-1.0, 1.0);
  auto x = g.input({8, 8}, data);
  auto same = g.dropout(x, 0.0, rng);
  CHECK(same.node() == x.node());

  auto dropped = g.dropout(x, 0.5, rng);
  int zeros = 0;
  for (std::size_t i = 0; i < 64; ++i) {
    const double v = dropped.value()[i];
    if (v == 0.0) {
      ++zeros;
    } else {
      CHECK(v == doctest::Approx(data[i] * 2.0));
    }
  }
  CHECK(zeros > 8);
  CHECK(zeros < 56);
}

TEST_CASE("attention with an empty visible row yields a zero row") {
  Graph<double> g;
  Rng rng(16);
  std::vector<double> qd(2 * 4), kd(3 * 4), vd(3 * 4);
  for (auto& v : qd) v = rng.uniform(-1.0, 1.0);
  for (auto& v : kd) v = rng.uniform(-1.0, 1.0);
  for (auto& v : vd) v = rng.uniform(-1.0, 1.0);
  std::vector<std::uint8_t> mask(2 * 3, 0);
  mask[1 * 3 + 2] = 1;  // row 1 sees key 2 only; row 0 sees nothing
  auto out = g.attention(g.input({2, 4}, qd), g.input({3, 4}, kd),
                         g.input({3, 4}, vd), 2, mask.data());
  for (int j = 0; j < 4; ++j) {
    CHECK(out.value()[static_cast<std::size_t>(j)] == 0.0);
    // Row 1 attends to exactly one key, so it returns that value row.
    CHECK(out.value()[static_cast<std::size_t>(4 + j)] ==
          vd[static_cast<std::size_t>(2 * 4 + j)]);
  }
}
