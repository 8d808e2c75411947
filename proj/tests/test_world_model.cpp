// World-model checks: a hand-rolled forward pass as the oracle, finite
// differences against backprop, the exact first Adam step on a scalar net,
// and bit-exact checkpoint round trips.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <vector>

#include "vqsense/world_model.hpp"

using namespace vqsense;

namespace {

NetParams random_net(const std::vector<int>& dims, std::uint64_t seed) {
  Rng rng(seed);
  return NetParams::glorot(dims, rng);
}

ModelInput random_input(Eigen::Index dim, std::uint64_t seed) {
  Rng rng(seed);
  ModelInput in(dim);
  for (Eigen::Index i = 0; i < dim; ++i) in[i] = gaussian(rng);
  return in;
}

// Forward pass written with plain loops, no Eigen products.
std::vector<double> plain_forward(const NetParams& net, const ModelInput& input) {
  std::vector<double> z(input.data(), input.data() + input.size());
  for (std::size_t l = 0; l < net.weights.size(); ++l) {
    const auto& w = net.weights[l];
    std::vector<double> next(w.rows());
    for (Eigen::Index r = 0; r < w.rows(); ++r) {
      double acc = net.biases[l][r];
      for (Eigen::Index c = 0; c < w.cols(); ++c) acc += w(r, c) * z[c];
      next[r] = (l + 1 < net.weights.size() && acc < 0.0) ? 0.0 : acc;
    }
    z = std::move(next);
  }
  return z;
}

bool same_coeffs(const RMatrix& a, const RMatrix& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() &&
         (a.array() == b.array()).all();
}

bool nets_equal(const NetParams& a, const NetParams& b) {
  if (a.weights.size() != b.weights.size()) return false;
  for (std::size_t l = 0; l < a.weights.size(); ++l) {
    if (!same_coeffs(a.weights[l], b.weights[l])) return false;
    if (!same_coeffs(a.biases[l], b.biases[l])) return false;
  }
  return true;
}

double loss_value(const NetParams& net, const ModelInput& in, double target,
                  LossKind kind) {
  const RVector out = forward(net, in);
  if (kind == LossKind::kSquared) {
    const double r = target - out[0];
    return r * r;
  }
  const double r = target - out[0];
  return 0.5 * (r * r * std::exp(-out[1]) + out[1]);
}

}  // namespace

TEST_CASE("forward matches a plain-loop implementation") {
  const NetParams net = random_net({3, 7, 5, 2}, 101);
  for (int rep = 0; rep < 5; ++rep) {
    const ModelInput in = random_input(3, 200 + rep);
    const RVector got = forward(net, in);
    const std::vector<double> want = plain_forward(net, in);
    REQUIRE(got.size() == 2);
    CHECK(std::abs(got[0] - want[0]) < 1e-13);
    CHECK(std::abs(got[1] - want[1]) < 1e-13);
  }
}

TEST_CASE("glorot init is seeded, bounded and zero-biased") {
  const std::vector<int> dims{4, 9, 2};
  const NetParams a = random_net(dims, 7);
  const NetParams b = random_net(dims, 7);
  const NetParams c = random_net(dims, 8);
  CHECK(nets_equal(a, b));
  CHECK_FALSE(nets_equal(a, c));
  for (std::size_t l = 0; l < a.weights.size(); ++l) {
    const double limit =
        std::sqrt(6.0 / double(a.weights[l].cols() + a.weights[l].rows()));
    CHECK(a.weights[l].cwiseAbs().maxCoeff() <= limit);
    CHECK(a.biases[l].norm() == 0.0);
  }
  CHECK_THROWS_AS(random_net({5}, 1), std::invalid_argument);
}

TEST_CASE("predict reports the mean head and handles the std head") {
  NetParams net;
  net.weights.push_back(RMatrix::Zero(2, 3));
  net.biases.push_back(RVector::Zero(2));
  const ModelInput in = RVector::Zero(3);

  SUBCASE("two outputs: std is exp(half log variance), clamped") {
    net.biases[0] << 1.5, 0.0;
    Belief belief = predict(net, in);
    CHECK(belief.mean == 1.5);
    CHECK(belief.std == 1.0);
    net.biases[0][1] = 50.0;
    CHECK(predict(net, in).std == kStdCeil);
    net.biases[0][1] = -50.0;
    CHECK(predict(net, in).std == kStdFloor);
  }

  SUBCASE("one output requires a positive fixed std") {
    NetParams one;
    one.weights.push_back(RMatrix::Zero(1, 3));
    one.biases.push_back(RVector::Zero(1));
    CHECK(predict(one, in, 0.25).std == 0.25);
    CHECK_THROWS_AS(predict(one, in), std::invalid_argument);
    CHECK_THROWS_AS(predict(one, in, -1.0), std::invalid_argument);
  }
}

TEST_CASE("gaussian nll evaluates to the closed form") {
  const NetParams net = random_net({3, 6, 2}, 31);
  const ModelInput in = random_input(3, 32);
  const double target = 0.4;
  const RVector out = forward(net, in);
  const LossGrad g = loss_gradient(net, in, target, LossKind::kGaussianNll);
  const double r = target - out[0];
  CHECK(std::abs(g.loss - 0.5 * (r * r * std::exp(-out[1]) + out[1])) < 1e-13);
}

TEST_CASE("backprop agrees with finite differences on both losses") {
  const NetParams net = random_net({5, 8, 6, 2}, 55);
  const ModelInput in = random_input(5, 56);
  const double target = -0.8;
  const double h = 1e-5;
  Rng pick(57);

  for (const LossKind kind : {LossKind::kSquared, LossKind::kGaussianNll}) {
    const LossGrad g = loss_gradient(net, in, target, kind);
    for (int probe = 0; probe < 60; ++probe) {
      const std::size_t l = pick() % net.weights.size();
      NetParams up = net, dn = net;
      double analytic = 0.0;
      if (pick() % 2 == 0) {
        const Eigen::Index r = Eigen::Index(pick() % net.weights[l].rows());
        const Eigen::Index c = Eigen::Index(pick() % net.weights[l].cols());
        up.weights[l](r, c) += h;
        dn.weights[l](r, c) -= h;
        analytic = g.d_w[l](r, c);
      } else {
        const Eigen::Index r = Eigen::Index(pick() % net.biases[l].size());
        up.biases[l][r] += h;
        dn.biases[l][r] -= h;
        analytic = g.d_b[l][r];
      }
      const double fd =
          (loss_value(up, in, target, kind) - loss_value(dn, in, target, kind)) / (2 * h);
      CHECK(std::abs(analytic - fd) < 1e-4 * std::max(1.0, std::abs(fd)));
    }
  }
}

TEST_CASE("first adam step on a scalar net matches the hand computation") {
  NetParams net;
  net.weights.push_back(RMatrix::Constant(1, 1, 0.5));
  net.biases.push_back(RVector::Constant(1, 0.1));
  AdamConfig cfg;  // defaults: beta 0.9 / 0.999, eps 1e-8, lr 1e-3
  AdamState adam = AdamState::zeros_like(net, cfg);

  ModelInput in(1);
  in << 2.0;
  const double target = 3.0;
  // out = 0.5 * 2 + 0.1 = 1.1, residual 1.9, loss 3.61,
  // d/dw = -2 * 1.9 * 2 = -7.6, d/db = -3.8.
  const double loss = online_update(net, adam, in, target, LossKind::kSquared);
  CHECK(std::abs(loss - 3.61) < 1e-12);
  CHECK(adam.step == 1);
  // Bias correction makes the first step lr * g / (|g| + eps).
  const double expect_w = 0.5 + 0.001 * 7.6 / (7.6 + 1e-8);
  const double expect_b = 0.1 + 0.001 * 3.8 / (3.8 + 1e-8);
  CHECK(std::abs(net.weights[0](0, 0) - expect_w) < 1e-12);
  CHECK(std::abs(net.biases[0][0] - expect_b) < 1e-12);
}

TEST_CASE("zero betas reduce adam to normalized gradient steps") {
  NetParams net;
  net.weights.push_back(RMatrix::Constant(1, 1, 1.0));
  net.biases.push_back(RVector::Zero(1));
  AdamConfig cfg;
  cfg.beta1 = 0.0;
  cfg.beta2 = 0.0;
  cfg.lr = 0.01;
  AdamState adam = AdamState::zeros_like(net, cfg);
  ModelInput in(1);
  in << 1.0;

  for (int step = 0; step < 3; ++step) {
    const double w = net.weights[0](0, 0);
    const double b = net.biases[0][0];
    const double g_w = -2.0 * (2.0 - (w + b)) * 1.0;
    const double g_b = -2.0 * (2.0 - (w + b));
    online_update(net, adam, in, 2.0, LossKind::kSquared);
    CHECK(std::abs(net.weights[0](0, 0) - (w - 0.01 * g_w / (std::abs(g_w) + 1e-8))) < 1e-12);
    CHECK(std::abs(net.biases[0][0] - (b - 0.01 * g_b / (std::abs(g_b) + 1e-8))) < 1e-12);
  }
}

TEST_CASE("updates with zero learning rate or zero residual change nothing") {
  NetParams net = random_net({2, 4, 1}, 91);
  AdamConfig cfg;
  cfg.lr = 0.0;
  AdamState adam = AdamState::zeros_like(net, cfg);
  const ModelInput in = random_input(2, 92);
  const NetParams before = net;
  online_update(net, adam, in, 5.0, LossKind::kSquared);
  CHECK(nets_equal(net, before));
  CHECK(adam.step == 1);

  // Exact fit: gradient is zero, so even a live learning rate is a no-op.
  NetParams net2 = random_net({2, 4, 1}, 93);
  AdamState adam2 = AdamState::zeros_like(net2, AdamConfig{});
  const double target = forward(net2, in)[0];
  const NetParams before2 = net2;
  const double loss = online_update(net2, adam2, in, target, LossKind::kSquared);
  CHECK(loss == 0.0);
  CHECK(nets_equal(net2, before2));
}

TEST_CASE("non-finite losses throw and leave everything untouched") {
  NetParams net = random_net({2, 4, 1}, 94);
  AdamState adam = AdamState::zeros_like(net, AdamConfig{});
  const ModelInput in = random_input(2, 95);
  const NetParams before = net;

  CHECK_THROWS_AS(online_update(net, adam, in, std::nan(""), LossKind::kSquared),
                  NumericalError);
  CHECK_THROWS_AS(online_update(net, adam, in, 1e200, LossKind::kSquared),
                  NumericalError);
  CHECK(nets_equal(net, before));
  CHECK(adam.step == 0);
  CHECK(adam.m_w[0].norm() == 0.0);

  AdamState mismatched = AdamState::zeros_like(random_net({3, 3, 1}, 96), AdamConfig{});
  CHECK_THROWS_AS(online_update(net, mismatched, in, 0.0, LossKind::kSquared),
                  std::invalid_argument);
}

TEST_CASE("belief sampling is seeded and statistically sane") {
  Belief belief{1.5, 0.5};
  Rng r1(5), r2(5);
  const std::vector<double> a = sample_belief(belief, 20000, r1);
  const std::vector<double> b = sample_belief(belief, 20000, r2);
  CHECK(a == b);

  double mean = 0.0;
  for (const double v : a) mean += v;
  mean /= double(a.size());
  double var = 0.0;
  for (const double v : a) var += (v - mean) * (v - mean);
  var /= double(a.size());
  CHECK(std::abs(mean - 1.5) < 0.02);
  CHECK(std::abs(std::sqrt(var) - 0.5) < 0.02);

  CHECK_THROWS_AS(sample_belief(belief, 0, r1), std::invalid_argument);
  CHECK_THROWS_AS(sample_belief(Belief{0.0, 0.0}, 3, r1), std::invalid_argument);
  CHECK_THROWS_AS(sample_belief(Belief{std::nan(""), 1.0}, 3, r1), std::invalid_argument);
}

TEST_CASE("checkpoints round-trip bit for bit") {
  NetParams net = random_net({3, 5, 2}, 97);
  AdamState adam = AdamState::zeros_like(net, AdamConfig{});
  const ModelInput in = random_input(3, 98);
  for (int i = 0; i < 4; ++i)
    online_update(net, adam, in, 0.3 * i, LossKind::kGaussianNll);

  const std::string path =
      (std::filesystem::temp_directory_path() / "vqsense_ckpt_test.json").string();
  save_checkpoint(path, net, adam);
  const auto [net2, adam2] = load_checkpoint(path);
  std::remove(path.c_str());

  CHECK(nets_equal(net, net2));
  CHECK(adam2.step == adam.step);
  CHECK(adam2.cfg.lr == adam.cfg.lr);
  CHECK(adam2.cfg.beta2 == adam.cfg.beta2);
  for (std::size_t l = 0; l < adam.m_w.size(); ++l) {
    CHECK(same_coeffs(adam.m_w[l], adam2.m_w[l]));
    CHECK(same_coeffs(adam.v_w[l], adam2.v_w[l]));
    CHECK(same_coeffs(adam.m_b[l], adam2.m_b[l]));
    CHECK(same_coeffs(adam.v_b[l], adam2.v_b[l]));
  }
  CHECK_THROWS(load_checkpoint("/nonexistent/vqsense.json"));
}
