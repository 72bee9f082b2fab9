#include <catch_amalgamated.hpp>

#include <cmath>
#include <filesystem>

#include "glickformer/checkpoint.hpp"
#include "glickformer/gradcheck_suites.hpp"
#include "glickformer/nn.hpp"

using namespace glick;
using namespace glick::nn;

TEST_CASE("rng streams are deterministic and independent") {
  Rng a = Rng(42).stream("init");
  Rng b = Rng(42).stream("init");
  Rng c = Rng(42).stream("batch");
  bool all_equal = true, any_equal_cross = false;
  for (int i = 0; i < 100; ++i) {
    auto x = a.next_u64(), y = b.next_u64(), z = c.next_u64();
    all_equal = all_equal && (x == y);
    any_equal_cross = any_equal_cross || (x == z);
  }
  CHECK(all_equal);
  CHECK_FALSE(any_equal_cross);
}

TEST_CASE("matmul against hand arithmetic") {
  Graph g;
  Node* x = g.constant(Tensor({1, 2}, {1.0, 1.0}));
  Node* w = g.constant(Tensor({2, 1}, {2.0, 3.0}));
  Node* y = g.matmul(x, w);
  CHECK(y->val().v[0] == Catch::Approx(5.0));

  Node* id = g.constant(Tensor({2, 2}, {1.0, 0.0, 0.0, 1.0}));
  Node* v = g.constant(Tensor({1, 2}, {1.0, 2.0}));
  Node* same = g.matmul(v, id);
  CHECK(same->val().v[0] == Catch::Approx(1.0));
  CHECK(same->val().v[1] == Catch::Approx(2.0));
}

TEST_CASE("matmul rejects mismatched shapes") {
  Graph g;
  Node* a = g.constant(Tensor({2, 3}));
  Node* b = g.constant(Tensor({2, 3}));
  CHECK_THROWS_AS(g.matmul(a, b), ShapeError);
}

TEST_CASE("layer_norm normalizes rows") {
  ParameterStore store;
  Rng rng(1);
  LayerNormParams ln = make_layer_norm(store, "ln", 8, rng);
  Graph g;
  Tensor x({4, 8});
  Rng vals(9);
  for (double& v : x.v) v = vals.next_uniform(-3.0, 3.0);
  Node* y = layer_norm(g, g.constant(x), ln);
  for (std::size_t i = 0; i < 4; ++i) {
    double mean = 0.0, var = 0.0;
    for (std::size_t j = 0; j < 8; ++j) mean += y->val().at(i, j);
    mean /= 8.0;
    for (std::size_t j = 0; j < 8; ++j) {
      double d = y->val().at(i, j) - mean;
      var += d * d;
    }
    var /= 8.0;
    CHECK(std::abs(mean) < 1e-6);
    CHECK(var == Catch::Approx(1.0).margin(1e-4));
  }
}

TEST_CASE("layer_norm is safe on constant rows") {
  ParameterStore store;
  Rng rng(1);
  LayerNormParams ln = make_layer_norm(store, "ln", 4, rng);
  Graph g;
  Node* y = layer_norm(g, g.constant(Tensor({1, 4}, {5.0, 5.0, 5.0, 5.0})), ln);
  for (double v : y->val().v) CHECK(v == Catch::Approx(0.0).margin(1e-12));
}

TEST_CASE("softmax basics") {
  Graph g;
  Node* y = g.softmax_rows(g.constant(Tensor({1, 2}, {0.0, 0.0})));
  CHECK(y->val().v[0] == Catch::Approx(0.5));
  CHECK(y->val().v[1] == Catch::Approx(0.5));

  Node* big = g.softmax_rows(g.constant(Tensor({1, 2}, {1000.0, 0.0})));
  CHECK(std::isfinite(big->val().v[0]));
  CHECK(big->val().v[0] == Catch::Approx(1.0));
  CHECK(big->val().v[1] == Catch::Approx(0.0).margin(1e-300));
}

TEST_CASE("softmax rows over kept columns sum to one") {
  Graph g;
  Rng rng(4);
  Tensor x({6, 5});
  for (double& v : x.v) v = rng.next_uniform(-4.0, 4.0);
  std::vector<std::uint8_t> keep = {1, 0, 1, 1, 0};
  Node* y = g.softmax_rows(g.constant(x), keep);
  for (std::size_t i = 0; i < 6; ++i) {
    double sum = 0.0;
    for (std::size_t j = 0; j < 5; ++j) {
      if (!keep[j]) CHECK(y->val().at(i, j) == 0.0);
      CHECK(y->val().at(i, j) >= 0.0);
      sum += y->val().at(i, j);
    }
    CHECK(sum == Catch::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("softmax maps -inf sentinels and fully masked rows to zero") {
  Graph g;
  const double ninf = -std::numeric_limits<double>::infinity();
  Node* y = g.softmax_rows(g.constant(Tensor({1, 3}, {1.0, ninf, 2.0})));
  CHECK(y->val().v[1] == 0.0);
  CHECK(y->val().v[0] + y->val().v[2] == Catch::Approx(1.0));

  Node* dead = g.softmax_rows(g.constant(Tensor({1, 3}, {ninf, ninf, ninf})));
  for (double v : dead->val().v) CHECK(v == 0.0);

  std::vector<std::uint8_t> none = {0, 0, 0};
  Node* masked = g.softmax_rows(g.constant(Tensor({1, 3}, {1.0, 2.0, 3.0})), none);
  for (double v : masked->val().v) CHECK(v == 0.0);
}

TEST_CASE("mish reference values") {
  Graph g;
  Node* y = g.mish(g.constant(
      Tensor({1, 5}, {0.0, 1.0, 20.0, -1.0, -5.0})));
  CHECK(y->val().v[0] == Catch::Approx(0.0).margin(1e-15));
  CHECK(y->val().v[1] == Catch::Approx(0.86509838826731035).epsilon(1e-12));
  CHECK(y->val().v[2] == Catch::Approx(20.0).margin(1e-6));
  CHECK(y->val().v[3] == Catch::Approx(-0.30340146137410891).epsilon(1e-12));
  CHECK(y->val().v[4] == Catch::Approx(-0.033576237730161704).epsilon(1e-9));
}

TEST_CASE("attention with a single token returns the projected value row") {
  ParameterStore store;
  Rng rng(5);
  AttentionParams p = make_attention(store, "attn", 3, 1, 3, 3, rng);
  // Identity value/output paths isolate the softmax-of-one behavior.
  p.wv[0]->value = Tensor({3, 3}, {1, 0, 0, 0, 1, 0, 0, 0, 1});
  p.wo->value = Tensor({3, 3}, {1, 0, 0, 0, 1, 0, 0, 0, 1});
  Graph g;
  Node* x = g.constant(Tensor({1, 3}, {0.3, -1.2, 2.0}));
  Node* y = multi_head_attention(g, x, x, x, p);
  for (int j = 0; j < 3; ++j) {
    CHECK(y->val().v[j] == Catch::Approx(x->val().v[j]));
  }
}

TEST_CASE("zero projections give uniform attention") {
  ParameterStore store;
  Rng rng(6);
  AttentionParams p = make_attention(store, "attn", 2, 1, 2, 2, rng);
  p.wq[0]->value.fill(0.0);
  p.wk[0]->value.fill(0.0);
  p.wv[0]->value = Tensor({2, 2}, {1, 0, 0, 1});
  p.wo->value = Tensor({2, 2}, {1, 0, 0, 1});
  Graph g;
  Node* x = g.constant(Tensor({4, 2}, {4, 0, 0, 4, 2, 2, -2, 2}));
  Node* y = multi_head_attention(g, x, x, x, p);
  // Uniform weights average the value rows.
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK(y->val().at(i, 0) == Catch::Approx(1.0));
    CHECK(y->val().at(i, 1) == Catch::Approx(2.0));
  }
}

TEST_CASE("a large bias column concentrates attention") {
  ParameterStore store;
  Rng rng(7);
  AttentionParams p = make_attention(store, "attn", 2, 1, 2, 2, rng);
  p.wq[0]->value.fill(0.0);
  p.wk[0]->value.fill(0.0);
  p.wv[0]->value = Tensor({2, 2}, {1, 0, 0, 1});
  p.wo->value = Tensor({2, 2}, {1, 0, 0, 1});
  Graph g;
  Node* x = g.constant(Tensor({3, 2}, {10, 0, 0, 10, -7, 3}));
  Tensor bias({3, 3});
  for (std::size_t i = 0; i < 3; ++i) bias.at(i, 2) = 50.0;  // column c = 2
  std::vector<Node*> b = {g.constant(bias)};
  Node* y = multi_head_attention(g, x, x, x, p, b);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(y->val().at(i, 0) == Catch::Approx(-7.0).margin(1e-6));
    CHECK(y->val().at(i, 1) == Catch::Approx(3.0).margin(1e-6));
  }
}

TEST_CASE("attention rejects a bias of the wrong shape") {
  ParameterStore store;
  Rng rng(8);
  AttentionParams p = make_attention(store, "attn", 2, 1, 2, 2, rng);
  Graph g;
  Node* x = g.constant(Tensor({3, 2}));
  std::vector<Node*> b = {g.constant(Tensor({2, 2}))};
  CHECK_THROWS_AS(multi_head_attention(g, x, x, x, p, b), ShapeError);
}

TEST_CASE("init schemes") {
  Rng rng(11);
  ParameterStore store;
  Parameter* z = store.create("z", {4, 4}, Init::zeros, rng);
  for (double v : z->value.v) CHECK(v == 0.0);
  Parameter* o = store.create("o", {3}, Init::ones, rng);
  for (double v : o->value.v) CHECK(v == 1.0);

  Parameter* w = store.create("w", {100, 100}, Init::glorot_uniform, rng);
  double bound = std::sqrt(6.0 / 200.0);
  double var = 0.0, mean = 0.0;
  for (double v : w->value.v) {
    CHECK(std::abs(v) <= bound);
    mean += v;
  }
  mean /= w->value.size();
  for (double v : w->value.v) var += (v - mean) * (v - mean);
  var /= w->value.size();
  CHECK(var == Catch::Approx(bound * bound / 3.0).epsilon(0.10));

  // Same seed, same draws.
  Rng r1(77), r2(77);
  ParameterStore s1, s2;
  Parameter* a = s1.create("a", {20, 20}, Init::glorot_uniform, r1);
  Parameter* b = s2.create("a", {20, 20}, Init::glorot_uniform, r2);
  CHECK(a->value.v == b->value.v);
}

TEST_CASE("parameter names must be unique") {
  Rng rng(1);
  ParameterStore store;
  store.create("dup", {2}, Init::zeros, rng);
  CHECK_THROWS_AS(store.create("dup", {2}, Init::zeros, rng), DataError);
}

TEST_CASE("grad_check is exact on a sum of squares") {
  ParameterStore store;
  Rng rng(13);
  Parameter* w = store.create("w", {5}, Init::zeros, rng);
  for (double& v : w->value.v) v = rng.next_uniform(-2.0, 2.0);
  DifferentiableFn f = [&](GradVec* sink) {
    double acc = 0.0;
    for (double v : w->value.v) acc += v * v;
    if (sink) {
      (*sink)[0] = Tensor({5});
      for (std::size_t i = 0; i < 5; ++i) (*sink)[0].v[i] = 2.0 * w->value.v[i];
    }
    return acc;
  };
  auto report = grad_check(f, store, {.tolerance = 1e-9});
  CHECK(report.passed());
  CHECK(report.max_rel_err < 1e-9);
}

TEST_CASE("grad_check catches a corrupted backward pass") {
  ParameterStore store;
  Rng rng(14);
  Parameter* w = store.create("w", {5}, Init::zeros, rng);
  for (double& v : w->value.v) v = rng.next_uniform(0.5, 2.0);
  DifferentiableFn f = [&](GradVec* sink) {
    double acc = 0.0;
    for (double v : w->value.v) acc += v * v;
    if (sink) {
      (*sink)[0] = Tensor({5});
      for (std::size_t i = 0; i < 5; ++i) {
        (*sink)[0].v[i] = 2.0 * w->value.v[i] * 1.01;  // 1% corruption
      }
    }
    return acc;
  };
  auto report = grad_check(f, store, {.tolerance = 1e-4});
  CHECK_FALSE(report.passed());
}

TEST_CASE("grad_check flags non-finite computations") {
  ParameterStore store;
  Rng rng(15);
  store.create("w", {2}, Init::zeros, rng);
  DifferentiableFn f = [&](GradVec*) {
    return std::numeric_limits<double>::quiet_NaN();
  };
  auto report = grad_check(f, store, {});
  CHECK_FALSE(report.finite);
  CHECK_FALSE(report.passed());
}

TEST_CASE("every layer passes finite-difference checks") {
  for (const auto& suite : checks::run_layer_checks(7)) {
    INFO(suite.name << " max_rel_err=" << suite.report.max_rel_err);
    CHECK(suite.report.passed());
  }
}

TEST_CASE("checkpoints round-trip and validate") {
  Rng rng(16);
  ParameterStore store;
  store.create("a.w", {3, 4}, Init::glorot_uniform, rng);
  store.create("a.b", {4}, Init::zeros, rng);
  store.at(1).value.v[2] = -1.5;
  auto path =
      (std::filesystem::temp_directory_path() / "glkf_ckpt.glkw").string();
  save_checkpoint(store, path);

  Rng rng2(99);
  ParameterStore loaded;
  loaded.create("a.w", {3, 4}, Init::glorot_uniform, rng2);
  loaded.create("a.b", {4}, Init::zeros, rng2);
  load_checkpoint(loaded, path);
  CHECK(loaded.at(0).value.v == store.at(0).value.v);
  CHECK(loaded.at(1).value.v == store.at(1).value.v);

  ParameterStore wrong_shape;
  Rng rng3(1);
  wrong_shape.create("a.w", {4, 3}, Init::zeros, rng3);
  wrong_shape.create("a.b", {4}, Init::zeros, rng3);
  CHECK_THROWS_WITH(load_checkpoint(wrong_shape, path),
                    Catch::Matchers::ContainsSubstring("shape mismatch"));

  ParameterStore missing;
  Rng rng4(1);
  missing.create("a.w", {3, 4}, Init::zeros, rng4);
  missing.create("a.b", {4}, Init::zeros, rng4);
  missing.create("extra", {2}, Init::zeros, rng4);
  CHECK_THROWS_WITH(load_checkpoint(missing, path),
                    Catch::Matchers::ContainsSubstring("missing parameter"));

  std::filesystem::remove(path);
  CHECK_THROWS_AS(load_checkpoint(loaded, path), DataError);
}

TEST_CASE("graph accumulates gradients through shared leaves") {
  // y = sum(w) + sum(w) uses the leaf twice; gradient must be 2 everywhere.
  ParameterStore store;
  Rng rng(17);
  Parameter* w = store.create("w", {1, 3}, Init::zeros, rng);
  for (double& v : w->value.v) v = rng.next_uniform(-1.0, 1.0);
  Graph g;
  Node* leaf = g.leaf(w);
  Node* doubled = g.add(leaf, leaf);
  Node* y = g.weighted_sum(doubled, Tensor({1, 3}, {1.0, 1.0, 1.0}));
  GradVec sink = make_grad_vec(store);
  g.backward(y, 1.0, sink);
  for (double v : sink[0].v) CHECK(v == Catch::Approx(2.0));
}
