#include <cmath>
#include <vector>

#include "doctest.h"

#include "csense/mlp.hpp"

using namespace csense;

namespace {

Mlp zero_net(std::vector<LayerSpec> specs, double lr = 0.01) {
  std::vector<Layer> layers;
  for (const auto& spec : specs) {
    Layer layer;
    layer.spec = spec;
    layer.weights.assign(static_cast<std::size_t>(spec.input_dim * spec.output_dim), 0.0);
    layer.biases.assign(static_cast<std::size_t>(spec.output_dim), 0.0);
    layers.push_back(std::move(layer));
  }
  return Mlp::from_layers(std::move(layers), lr);
}

std::vector<double> flatten(const Gradients& grads) {
  std::vector<double> flat;
  for (const auto& layer : grads.layers) {
    flat.insert(flat.end(), layer.weights.begin(), layer.weights.end());
    flat.insert(flat.end(), layer.biases.begin(), layer.biases.end());
  }
  return flat;
}

}  // namespace

TEST_CASE("a zero network's softmax head is uniform") {
  auto net = zero_net({{3, 8, Activation::Rectifier}, {8, 7, Activation::Softmax}});
  const auto out = net.forward(std::vector<double>{0.2, 0.3, 0.5});
  REQUIRE(out.size() == 7);
  double sum = 0.0;
  for (double p : out) {
    CHECK(p == doctest::Approx(1.0 / 7.0).epsilon(1e-12));
    sum += p;
  }
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("an identity-weight linear layer passes its input through") {
  auto net = zero_net({{3, 3, Activation::Identity}});
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      net.set_parameter(static_cast<std::size_t>(i * 3 + j), i == j ? 1.0 : 0.0);
  const std::vector<double> x{0.1, -2.0, 3.5};
  const auto out = net.forward(x);
  for (int i = 0; i < 3; ++i) CHECK(out[static_cast<std::size_t>(i)] == x[static_cast<std::size_t>(i)]);
}

TEST_CASE("forward rejects inputs of the wrong width") {
  auto net = zero_net({{3, 2, Activation::Identity}});
  CHECK_THROWS_AS(net.forward(std::vector<double>{1.0, 2.0}), std::invalid_argument);
}

TEST_CASE("construction is deterministic in the seed") {
  const std::vector<LayerSpec> specs{{4, 5, Activation::Rectifier}, {5, 3, Activation::Softmax}};
  Rng a(99), b(99), c(100);
  const Mlp na(specs, 0.01, a);
  const Mlp nb(specs, 0.01, b);
  const Mlp nc(specs, 0.01, c);
  REQUIRE(na.parameter_count() == nb.parameter_count());
  bool all_equal_c = true;
  for (std::size_t i = 0; i < na.parameter_count(); ++i) {
    CHECK(na.get_parameter(i) == nb.get_parameter(i));
    all_equal_c = all_equal_c && (na.get_parameter(i) == nc.get_parameter(i));
  }
  CHECK_FALSE(all_equal_c);
}

TEST_CASE("init draws stay inside the fan-scaled range and biases start at zero") {
  const std::vector<LayerSpec> specs{{8, 32, Activation::Rectifier}};
  Rng rng(3);
  const Mlp net(specs, 0.01, rng);
  const double r = std::sqrt(6.0 / (8 + 32));
  for (double w : net.layers()[0].weights) CHECK(std::abs(w) <= r);
  for (double b : net.layers()[0].biases) CHECK(b == 0.0);
}

TEST_CASE("zero upstream yields zero gradients") {
  const std::vector<LayerSpec> specs{{3, 4, Activation::Rectifier}, {4, 2, Activation::Identity}};
  Rng rng(17);
  const Mlp net(specs, 0.01, rng);
  const auto trace = net.forward_trace(std::vector<double>{0.3, -0.2, 0.9});
  const auto grads = net.backward(trace, std::vector<double>{0.0, 0.0});
  for (double g : flatten(grads)) CHECK(g == 0.0);
}

TEST_CASE("a single linear output's gradients are the input and one") {
  auto net = zero_net({{3, 1, Activation::Identity}});
  const std::vector<double> x{0.4, -1.5, 2.0};
  const auto trace = net.forward_trace(x);
  const auto grads = net.backward(trace, std::vector<double>{1.0});
  for (int i = 0; i < 3; ++i)
    CHECK(grads.layers[0].weights[static_cast<std::size_t>(i)] == x[static_cast<std::size_t>(i)]);
  CHECK(grads.layers[0].biases[0] == 1.0);
}

TEST_CASE("log-probability gradients match finite differences") {
  const std::vector<LayerSpec> specs{{4, 6, Activation::Rectifier}, {6, 5, Activation::Softmax}};
  Rng rng(31);
  Mlp net(specs, 0.01, rng);
  const std::vector<double> x{0.1, 0.4, 0.2, 0.3};
  const int target = 3;

  const auto analytic = flatten(net.log_prob_gradient(net.forward_trace(x), target));
  const double h = 1e-6;
  for (std::size_t i = 0; i < net.parameter_count(); ++i) {
    const double saved = net.get_parameter(i);
    net.set_parameter(i, saved + h);
    const double above = std::log(net.forward(x)[target]);
    net.set_parameter(i, saved - h);
    const double below = std::log(net.forward(x)[target]);
    net.set_parameter(i, saved);
    const double numeric = (above - below) / (2.0 * h);
    CHECK(std::abs(analytic[i] - numeric) <=
          1e-5 * std::max({1.0, std::abs(analytic[i]), std::abs(numeric)}));
  }
}

TEST_CASE("sgd step moves parameters by sign * lr * gradient") {
  auto net = zero_net({{1, 1, Activation::Identity}}, 0.005);
  net.set_parameter(0, 1.0);

  Gradients grads;
  grads.layers.resize(1);
  grads.layers[0].weights = {2.0};
  grads.layers[0].biases = {0.0};

  net.apply_step(grads, +1.0);
  CHECK(net.get_parameter(0) == doctest::Approx(1.01).epsilon(1e-15));
  net.set_parameter(0, 1.0);
  net.apply_step(grads, -1.0);
  CHECK(net.get_parameter(0) == doctest::Approx(0.99).epsilon(1e-15));
}

TEST_CASE("sgd step with zero gradients is a no-op") {
  const std::vector<LayerSpec> specs{{2, 3, Activation::Rectifier}, {3, 2, Activation::Softmax}};
  Rng rng(8);
  Mlp net(specs, 0.01, rng);
  std::vector<double> before(net.parameter_count());
  for (std::size_t i = 0; i < before.size(); ++i) before[i] = net.get_parameter(i);

  Gradients zero;
  zero.layers.resize(2);
  zero.layers[0].weights.assign(6, 0.0);
  zero.layers[0].biases.assign(3, 0.0);
  zero.layers[1].weights.assign(6, 0.0);
  zero.layers[1].biases.assign(2, 0.0);
  net.apply_step(zero, +1.0);
  for (std::size_t i = 0; i < before.size(); ++i) CHECK(net.get_parameter(i) == before[i]);
}

TEST_CASE("sgd step rejects non-finite gradients and bad signs") {
  auto net = zero_net({{1, 1, Activation::Identity}});
  Gradients grads;
  grads.layers.resize(1);
  grads.layers[0].weights = {std::nan("")};
  grads.layers[0].biases = {0.0};
  CHECK_THROWS_AS(net.apply_step(grads, +1.0), std::runtime_error);
  grads.layers[0].weights = {1.0};
  CHECK_THROWS_AS(net.apply_step(grads, 0.5), std::invalid_argument);
}

TEST_CASE("gradient check is tight for a purely linear network") {
  const std::vector<LayerSpec> specs{{4, 3, Activation::Identity}};
  Rng rng(12);
  const Mlp net(specs, 0.01, rng);
  const auto report = gradient_check(net, std::vector<double>{0.4, -0.7, 1.2, 0.1}, 1e-10);
  CHECK(report.pass);
  CHECK_FALSE(report.kink_excluded);
  CHECK(report.max_rel_error <= 1e-10);
}

TEST_CASE("gradient check passes for 20 random nets of each head type") {
  for (int i = 0; i < 20; ++i) {
    Rng rng(static_cast<std::uint64_t>(1000 + i));
    const std::vector<LayerSpec> actor_specs{
        {8, 16, Activation::Rectifier}, {16, 16, Activation::Rectifier}, {16, 7, Activation::Softmax}};
    const std::vector<LayerSpec> critic_specs{
        {8, 16, Activation::Rectifier}, {16, 16, Activation::Rectifier}, {16, 1, Activation::Identity}};
    Mlp actor(actor_specs, 0.01, rng);
    Mlp critic(critic_specs, 0.01, rng);

    std::vector<double> x(8);
    double sum = 0.0;
    for (auto& v : x) {
      v = rng.next_unit() + 1e-3;
      sum += v;
    }
    for (auto& v : x) v /= sum;

    const auto actor_report = gradient_check(actor, x, 1e-5);
    const auto critic_report = gradient_check(critic, x, 1e-5);
    CHECK((actor_report.pass || actor_report.kink_excluded));
    CHECK((critic_report.pass || critic_report.kink_excluded));
    CHECK_FALSE(actor_report.kink_excluded);  // measure: kinks should not occur here
    CHECK_FALSE(critic_report.kink_excluded);
  }
}

TEST_CASE("gradient check flags rectifier inputs sitting exactly on the kink") {
  auto net = zero_net({{2, 3, Activation::Rectifier}, {3, 2, Activation::Identity}});
  const auto report = gradient_check(net, std::vector<double>{0.5, 0.5}, 1e-5);
  CHECK(report.kink_excluded);
}

TEST_CASE("gradient shape mismatches are rejected") {
  auto net = zero_net({{2, 2, Activation::Identity}});
  Gradients wrong;
  wrong.layers.resize(2);
  CHECK_THROWS_AS(net.apply_step(wrong, +1.0), std::invalid_argument);
}

TEST_CASE("seed-0 initialization and forward pass are frozen") {
  Rng rng(0);
  const std::vector<LayerSpec> specs{{2, 3, Activation::Rectifier}, {3, 2, Activation::Softmax}};
  const Mlp net(specs, 0.01, rng);
  const std::vector<double> x{0.25, 0.75};
  const auto out = net.forward(x);

  // Independent straight-line recomputation from the drawn parameters.
  const auto& l0 = net.layers()[0];
  const auto& l1 = net.layers()[1];
  double h[3];
  for (int j = 0; j < 3; ++j) {
    double z = l0.biases[static_cast<std::size_t>(j)];
    for (int i = 0; i < 2; ++i)
      z += l0.weights[static_cast<std::size_t>(j * 2 + i)] * x[static_cast<std::size_t>(i)];
    h[j] = z > 0.0 ? z : 0.0;
  }
  double logits[2];
  for (int j = 0; j < 2; ++j) {
    double z = l1.biases[static_cast<std::size_t>(j)];
    for (int i = 0; i < 3; ++i) z += l1.weights[static_cast<std::size_t>(j * 3 + i)] * h[i];
    logits[j] = z;
  }
  const double denom = std::exp(logits[0]) + std::exp(logits[1]);
  CHECK(out[0] == doctest::Approx(std::exp(logits[0]) / denom).epsilon(1e-12));
  CHECK(out[1] == doctest::Approx(std::exp(logits[1]) / denom).epsilon(1e-12));

  // Frozen values pin the generator and the arithmetic across platforms.
  CHECK(out[0] == doctest::Approx(0.40741884307952664).epsilon(1e-14));
  CHECK(out[1] == doctest::Approx(0.59258115692047342).epsilon(1e-14));
  CHECK(net.get_parameter(0) == doctest::Approx(-0.74535539637984771).epsilon(1e-14));
  CHECK(net.get_parameter(9) == doctest::Approx(0.28816423068435038).epsilon(1e-14));
  CHECK(net.get_parameter(16) == 0.0);  // biases start at zero
}
