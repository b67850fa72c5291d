#include <doctest.h>

#include <cmath>
#include <fstream>

#include "gradcheck.hpp"
#include "support.hpp"
#include "wavecomp/error.hpp"
#include "wavecomp/layers.hpp"
#include "wavecomp/loss.hpp"
#include "wavecomp/model.hpp"
#include "wavecomp/optim.hpp"
#include "wavecomp/parallel.hpp"

using namespace wavecomp;
using namespace wavecomp::nn;

namespace {

template <typename T>
double max_abs_diff(const Tensor<T>& a, const Tensor<T>& b) {
  REQUIRE(a.shape() == b.shape());
  double d = 0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(static_cast<double>(a[i]) - static_cast<double>(b[i])));
  return d;
}

ModelSpec tiny_spec(std::size_t side = 8, std::size_t classes = 3) {
  ModelSpec s;
  s.input_height = s.input_width = side;
  s.layers = {LayerSpec::conv(3, 1, 4), LayerSpec::of(LayerKind::ReLU), LayerSpec::of(LayerKind::MaxPool2x2),
              LayerSpec::dropout(0.25), LayerSpec::of(LayerKind::Flatten), LayerSpec::dense((side / 2) * (side / 2) * 4, classes),
              LayerSpec::of(LayerKind::Softmax)};
  return s;
}

}  // namespace

TEST_CASE("conv2d GEMM path equals the direct reference") {
  Rng rng(3);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t b = gradcheck::dim(rng, 1, 3), h = gradcheck::dim(rng, 1, 9), w = gradcheck::dim(rng, 1, 9);
    const std::size_t ci = gradcheck::dim(rng, 1, 4), co = gradcheck::dim(rng, 1, 5), k = 2 * gradcheck::dim(rng, 0, 2) + 1;
    const auto x = gradcheck::random_tensor({b, h, w, ci}, rng);
    const auto kern = gradcheck::random_tensor({k, k, ci, co}, rng);
    const auto bias = gradcheck::random_tensor({co}, rng);
    const auto y = conv2d_forward(x, kern, bias);
    CHECK(y.shape() == Shape{b, h, w, co});
    CHECK(max_abs_diff(y, reference::conv2d_forward(x, kern, bias)) < 1e-12);
    const auto go = gradcheck::random_tensor(y.shape(), rng);
    const auto g = conv2d_backward(x, kern, go), gr = reference::conv2d_backward(x, kern, go);
    CHECK(max_abs_diff(g.input, gr.input) < 1e-12);
    CHECK(max_abs_diff(g.kernels, gr.kernels) < 1e-12);
    CHECK(max_abs_diff(g.bias, gr.bias) < 1e-12);
  }
}

TEST_CASE("conv2d on a hand example") {
  // 3x3 single channel, all-ones 3x3 kernel: each output sums its zero-padded neighbourhood.
  Tensor<double> x({1, 3, 3, 1}, {1, 2, 3, 4, 5, 6, 7, 8, 9});
  Tensor<double> k({3, 3, 1, 1}, 1.0), b({1}, 0.5);
  const auto y = conv2d_forward(x, k, b);
  CHECK(y.values() == std::vector<double>{12.5, 21.5, 16.5, 27.5, 45.5, 33.5, 24.5, 39.5, 28.5});
  CHECK_THROWS_AS(conv2d_forward(x, Tensor<double>({2, 2, 1, 1}), b), NnError);
  CHECK_THROWS_AS(conv2d_forward(x, Tensor<double>({3, 3, 2, 1}), b), NnError);
}

TEST_CASE("dense matches the reference and a hand example") {
  Tensor<double> x({1, 2}, {1, 2}), w({2, 3}, {1, 2, 3, 4, 5, 6}), b({3}, {0.5, 0, -1});
  CHECK(dense_forward(x, w, b).values() == std::vector<double>{9.5, 12, 14});
  Rng rng(8);
  const auto xr = gradcheck::random_tensor({5, 17}, rng), wr = gradcheck::random_tensor({17, 6}, rng), br = gradcheck::random_tensor({6}, rng);
  CHECK(max_abs_diff(dense_forward(xr, wr, br), reference::dense_forward(xr, wr, br)) < 1e-12);
}

TEST_CASE("gradient checks for every layer") {
  for (const auto& c : gradcheck::kChecks) {
    for (std::uint64_t seed = 1; seed <= 8; ++seed) {
      INFO(c.name << " seed " << seed);
      CHECK(c.run(seed) < 1e-4);
    }
  }
}

TEST_CASE("maxpool: odd extents round up, ties pick the first element") {
  Tensor<double> x({1, 3, 3, 1}, {1, 5, 2, 5, 3, 9, 7, 8, 4});
  const auto r = maxpool2x2_forward(x);
  CHECK(r.output.shape() == Shape{1, 2, 2, 1});
  CHECK(r.output.values() == std::vector<double>{5, 9, 8, 4});
  CHECK(r.argmax == std::vector<std::uint32_t>{1, 5, 7, 8});
  const auto g = maxpool2x2_backward(Tensor<double>({1, 2, 2, 1}, {1, 2, 3, 4}), r.argmax, x.shape());
  CHECK(g.values() == std::vector<double>{0, 1, 0, 0, 0, 2, 0, 3, 4});
  // All-equal window routes to its top-left cell.
  Tensor<double> flat({1, 2, 2, 2}, 1.0);
  const auto f = maxpool2x2_forward(flat);
  CHECK(f.argmax == std::vector<std::uint32_t>{0, 1});
  // Negative values are not beaten by the out-of-range cells.
  Tensor<double> neg({1, 1, 1, 1}, -3.0);
  CHECK(maxpool2x2_forward(neg).output[0] == -3.0);
}

TEST_CASE("relu and softmax") {
  Tensor<double> x({1, 4}, {-1, 0, 2, -0.5});
  CHECK(relu_forward(x).values() == std::vector<double>{0, 0, 2, 0});
  CHECK(relu_backward(x, Tensor<double>({1, 4}, 1.0)).values() == std::vector<double>{0, 0, 1, 0});
  Tensor<double> z({2, 3}, {1000, 1001, 1002, -5, 0, 5});
  const auto p = softmax(z);
  for (int r = 0; r < 2; ++r) CHECK(p[3 * r] + p[3 * r + 1] + p[3 * r + 2] == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(p[2] == doctest::Approx(std::exp(2.0) / (1 + std::exp(1.0) + std::exp(2.0))));
  check_finite(p, "softmax");
  Tensor<float> inf({1, 2}, {1.0f, INFINITY});
  CHECK_THROWS_AS(check_finite(inf, "x"), NnError);
}

TEST_CASE("dropout is inverted and the identity in eval mode") {
  Rng rng(1);
  Tensor<double> x({100, 100}, 1.0), mask;
  const auto e = dropout_forward(x, 0.4, rng, false, mask);
  CHECK(e == x);
  for (auto m : mask.values()) CHECK(m == 1.0);
  const auto y = dropout_forward(x, 0.4, rng, true, mask);
  std::size_t kept = 0;
  double sum = 0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    CHECK((y[i] == 0.0 || std::abs(y[i] - 1.0 / 0.6) < 1e-12));
    kept += y[i] != 0.0;
    sum += y[i];
  }
  CHECK(kept > 5700);
  CHECK(kept < 6300);
  CHECK(sum / 1e4 == doctest::Approx(1.0).epsilon(0.05));
  CHECK(dropout_forward(x, 0.0, rng, true, mask) == x);
  CHECK_THROWS_AS(dropout_forward(x, 1.0, rng, true, mask), NnError);
}

TEST_CASE("cross entropy formula and its gradients") {
  // One sample, two classes, p = (0.8, 0.2), a = (1, 0):
  // -(1/2)[log 0.8 + log 0.8] = -log 0.8.
  Tensor<double> a({1, 2}, {1, 0}), p({1, 2}, {0.8, 0.2});
  CHECK(cross_entropy(a, p) == doctest::Approx(-std::log(0.8)));
  // Clamp keeps log(0) finite.
  Tensor<double> hard({1, 2}, {0, 1});
  CHECK(std::isfinite(cross_entropy(a, hard)));
  CHECK(cross_entropy(a, hard) == doctest::Approx(-std::log(1e-12)).epsilon(1e-6));

  // The logits form agrees with the probability-space chain rule where neither saturates.
  Rng rng(4);
  for (int t = 0; t < 20; ++t) {
    const auto z = gradcheck::random_tensor({3, 5}, rng, -2, 2);
    const auto act = gradcheck::one_hot_rows(3, 5, rng);
    CHECK(max_abs_diff(cross_entropy_logits_grad(act, z), softmax_cross_entropy_grad(act, softmax(z))) < 1e-12);
  }
  // Saturated softmax: the logits gradient still points at the true class.
  Tensor<double> zs({1, 3}, {80, 0, -80}), as({1, 3}, {0, 1, 0});
  const auto gs = cross_entropy_logits_grad(as, zs);
  CHECK(gs[1] < 0);
  CHECK(gs[0] > 0);
  CHECK(std::isfinite(gs[0] + gs[1] + gs[2]));
}

TEST_CASE("Adam matches a hand computation") {
  Tensor<double> w({2}, {1.0, -2.0}), g({2}, {0.5, -0.1});
  std::vector<ParamRef<double>> ps = {{&w, &g, "w"}};
  Adam<double> opt({0.1, 0.9, 0.999, 1e-8});
  opt.step(ps);
  // Step 1: m_hat = g and v_hat = g^2, so each weight moves by about lr * sign(g).
  const double w0 = 1.0 - 0.1 * 0.5 / (0.5 + 1e-8);
  CHECK(w[0] == doctest::Approx(w0).epsilon(1e-14));
  CHECK(w[1] == doctest::Approx(-2.0 + 0.1 * 0.1 / (0.1 + 1e-8)).epsilon(1e-14));
  g[0] = -0.25;
  opt.step(ps);
  const double m = 0.9 * 0.05 + 0.1 * -0.25, v = 0.999 * 0.00025 + 0.001 * 0.0625;
  const double mh = m / (1 - 0.81), vh = v / (1 - 0.999 * 0.999);
  CHECK(w[0] == doctest::Approx(w0 - 0.1 * mh / (std::sqrt(vh) + 1e-8)).epsilon(1e-12));
  CHECK(opt.steps() == 2);
  CHECK(opt.first_moments()[0][0] == doctest::Approx(m));
  std::vector<ParamRef<double>> more = {{&w, &g, "w"}, {&w, &g, "w2"}};
  CHECK_THROWS_AS(opt.step(more), NnError);
}

TEST_CASE("model shape flow and errors") {
  const auto spec = tiny_spec();
  const auto flow = spec.shape_flow();
  CHECK(flow.front() == Shape{1, 8, 8, 4});
  CHECK(flow.back() == Shape{1, 3});
  CHECK(spec.output_units() == 3);
  CHECK(spec.parameter_count() == 3 * 3 * 4 + 4 + 64 * 3 + 3);
  auto bad = spec;
  bad.layers[5] = LayerSpec::dense(10, 3);
  CHECK_THROWS_AS(bad.shape_flow(), NnError);
  auto zero = spec;
  zero.input_height = 0;
  try {
    zero.shape_flow();
    FAIL("expected InputTooSmall");
  } catch (const NnError& e) {
    CHECK(e.code() == NnErrc::InputTooSmall);
  }
  Model<float> m(spec, 1);
  CHECK_THROWS_AS(m.forward(Tensor<float>({1, 7, 8, 1}), Mode::Eval), NnError);
  const auto p = m.predict(Tensor<float>({2, 8, 8, 1}, 0.5f));
  CHECK(p.shape() == Shape{2, 3});
  CHECK(p[0] + p[1] + p[2] == doctest::Approx(1.0f));
}

TEST_CASE("initialization is seeded") {
  Model<double> a(tiny_spec(), 5), b(tiny_spec(), 5), c(tiny_spec(), 6);
  CHECK(*a.params()[0].value == *b.params()[0].value);
  CHECK(!(*a.params()[0].value == *c.params()[0].value));
  // He-uniform bound for the conv layer: sqrt(6 / 9).
  for (auto v : a.params()[0].value->values()) CHECK(std::abs(v) <= std::sqrt(6.0 / 9.0));
  for (auto v : a.params()[1].value->values()) CHECK(v == 0.0);
}

TEST_CASE("checkpoint round trip") {
  testing::TempDir dir("nn_ckpt");
  Model<float> m(tiny_spec(), 9);
  const CheckpointMeta meta{2, 3, {"a", "b", "c"}};
  save_checkpoint(dir / "m.wcnn", m, meta);
  auto loaded = load_checkpoint<float>(dir / "m.wcnn");
  CHECK(loaded.meta == meta);
  CHECK(loaded.model.spec() == m.spec());
  Rng rng(2);
  Tensor<float> x({2, 8, 8, 1});
  for (auto& v : x.values()) v = static_cast<float>(uniform01(rng));
  CHECK(loaded.model.predict(x) == m.predict(x));
  auto widened = load_checkpoint<double>(dir / "m.wcnn");
  for (std::size_t i = 0; i < m.params().size(); ++i)
    for (std::size_t k = 0; k < m.params()[i].value->size(); ++k)
      REQUIRE(widened.model.params()[i].value->values()[k] == static_cast<double>(m.params()[i].value->values()[k]));

  std::ifstream in(dir / "m.wcnn", std::ios::binary);
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  auto expect_bad = [&](const std::string& content) {
    std::ofstream(dir / "bad.wcnn", std::ios::binary) << content;
    try {
      load_checkpoint<float>(dir / "bad.wcnn");
      FAIL("expected BadCheckpoint");
    } catch (const NnError& e) {
      CHECK(e.code() == NnErrc::BadCheckpoint);
    }
  };
  expect_bad(bytes.substr(0, bytes.size() - 1));
  expect_bad(bytes + "x");
  expect_bad("XXXX" + bytes.substr(4));
  expect_bad("");
  CHECK_THROWS_AS(load_checkpoint<float>(dir / "absent.wcnn"), NnError);
}

TEST_CASE("kernels are independent of the worker count") {
  Rng rng(12);
  const auto x = gradcheck::random_tensor({4, 16, 16, 3}, rng);
  const auto k = gradcheck::random_tensor({3, 3, 3, 8}, rng), b = gradcheck::random_tensor({8}, rng);
  set_worker_threads(1);
  const auto y1 = conv2d_forward(x, k, b);
  const auto g1 = conv2d_backward(x, k, y1);
  const auto p1 = maxpool2x2_forward(y1).output;
  set_worker_threads(3);
  CHECK(conv2d_forward(x, k, b) == y1);
  CHECK(conv2d_backward(x, k, y1).kernels == g1.kernels);
  CHECK(conv2d_backward(x, k, y1).input == g1.input);
  CHECK(maxpool2x2_forward(y1).output == p1);
  set_worker_threads(0);
}

TEST_CASE("a training step lowers the loss") {
  Model<double> m(tiny_spec(), 3);
  Adam<double> opt({0.01});
  Rng rng(7);
  Tensor<double> x({6, 8, 8, 1});
  for (auto& v : x.values()) v = uniform01(rng);
  const auto a = gradcheck::one_hot_rows(6, 3, rng);
  const double before = cross_entropy(a, m.predict(x));
  for (int i = 0; i < 20; ++i) {
    m.zero_grad();
    m.backward(cross_entropy_logits_grad(a, m.forward(x, Mode::Eval)));
    const auto ps = m.params();
    opt.step(ps);
  }
  CHECK(cross_entropy(a, m.predict(x)) < before);
}
