#include "csense/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace csense {

namespace {

void apply_activation(Activation activation, const std::vector<double>& pre,
                      std::vector<double>& post) {
  post.resize(pre.size());
  switch (activation) {
    case Activation::Rectifier:
      for (std::size_t i = 0; i < pre.size(); ++i) post[i] = pre[i] > 0.0 ? pre[i] : 0.0;
      break;
    case Activation::Identity:
      post = pre;
      break;
    case Activation::Softmax: {
      const double peak = *std::max_element(pre.begin(), pre.end());
      double sum = 0.0;
      for (std::size_t i = 0; i < pre.size(); ++i) {
        post[i] = std::exp(pre[i] - peak);
        sum += post[i];
      }
      for (auto& p : post) p /= sum;
      break;
    }
  }
}

// dL/d(pre) from dL/d(post) at one layer.
std::vector<double> activation_backward(Activation activation, const std::vector<double>& pre,
                                        const std::vector<double>& post,
                                        const std::vector<double>& g_post) {
  std::vector<double> g_pre(pre.size());
  switch (activation) {
    case Activation::Rectifier:
      for (std::size_t i = 0; i < pre.size(); ++i) g_pre[i] = pre[i] > 0.0 ? g_post[i] : 0.0;
      break;
    case Activation::Identity:
      g_pre = g_post;
      break;
    case Activation::Softmax: {
      // Full Jacobian: d post_j / d pre_i = post_j (delta_ij - post_i).
      double dot = 0.0;
      for (std::size_t j = 0; j < post.size(); ++j) dot += g_post[j] * post[j];
      for (std::size_t i = 0; i < post.size(); ++i) g_pre[i] = post[i] * (g_post[i] - dot);
      break;
    }
  }
  return g_pre;
}

}  // namespace

void Gradients::scale(double factor) {
  for (auto& layer : layers) {
    for (auto& w : layer.weights) w *= factor;
    for (auto& b : layer.biases) b *= factor;
  }
}

bool Gradients::finite() const {
  for (const auto& layer : layers) {
    for (double w : layer.weights)
      if (!std::isfinite(w)) return false;
    for (double b : layer.biases)
      if (!std::isfinite(b)) return false;
  }
  return true;
}

Mlp::Mlp(std::vector<LayerSpec> specs, double learning_rate, Rng& init_rng)
    : learning_rate_(learning_rate) {
  if (specs.empty()) throw std::invalid_argument("network needs at least one layer");
  if (!(learning_rate > 0.0)) throw std::invalid_argument("learning rate must be positive");
  for (std::size_t l = 0; l < specs.size(); ++l) {
    if (specs[l].input_dim < 1 || specs[l].output_dim < 1)
      throw std::invalid_argument("layer dimensions must be positive");
    if (l > 0 && specs[l].input_dim != specs[l - 1].output_dim)
      throw std::invalid_argument("layer " + std::to_string(l) +
                                  " input does not match previous output");
  }

  layers_.reserve(specs.size());
  for (const auto& spec : specs) {
    Layer layer;
    layer.spec = spec;
    const auto fan_in = static_cast<std::size_t>(spec.input_dim);
    const auto fan_out = static_cast<std::size_t>(spec.output_dim);
    const double r = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    layer.weights.resize(fan_in * fan_out);
    for (auto& w : layer.weights) w = init_rng.next_uniform(-r, r);
    layer.biases.assign(fan_out, 0.0);
    layers_.push_back(std::move(layer));
  }
}

Mlp Mlp::from_layers(std::vector<Layer> layers, double learning_rate) {
  if (layers.empty()) throw std::invalid_argument("network needs at least one layer");
  if (!(learning_rate > 0.0)) throw std::invalid_argument("learning rate must be positive");
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const auto& spec = layers[l].spec;
    const auto fan_in = static_cast<std::size_t>(spec.input_dim);
    const auto fan_out = static_cast<std::size_t>(spec.output_dim);
    if (spec.input_dim < 1 || spec.output_dim < 1)
      throw std::invalid_argument("layer dimensions must be positive");
    if (layers[l].weights.size() != fan_in * fan_out || layers[l].biases.size() != fan_out)
      throw std::invalid_argument("layer " + std::to_string(l) +
                                  " parameter counts do not match its dimensions");
    if (l > 0 && spec.input_dim != layers[l - 1].spec.output_dim)
      throw std::invalid_argument("layer " + std::to_string(l) +
                                  " input does not match previous output");
  }
  Mlp net;
  net.layers_ = std::move(layers);
  net.learning_rate_ = learning_rate;
  return net;
}

ForwardTrace Mlp::forward_trace(std::span<const double> input) const {
  if (static_cast<int>(input.size()) != input_dim())
    throw std::invalid_argument("input size " + std::to_string(input.size()) +
                                " does not match network input " + std::to_string(input_dim()));
  ForwardTrace trace;
  trace.input.assign(input.begin(), input.end());
  trace.pre.resize(layers_.size());
  trace.post.resize(layers_.size());

  const std::vector<double>* current = &trace.input;
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const auto& layer = layers_[l];
    const auto in = static_cast<std::size_t>(layer.spec.input_dim);
    const auto out = static_cast<std::size_t>(layer.spec.output_dim);
    auto& pre = trace.pre[l];
    pre.assign(out, 0.0);
    for (std::size_t o = 0; o < out; ++o) {
      double z = layer.biases[o];
      const double* row = layer.weights.data() + o * in;
      for (std::size_t i = 0; i < in; ++i) z += row[i] * (*current)[i];
      pre[o] = z;
    }
    apply_activation(layer.spec.activation, pre, trace.post[l]);
    current = &trace.post[l];
  }
  return trace;
}

std::vector<double> Mlp::forward(std::span<const double> input) const {
  return forward_trace(input).output();
}

Gradients Mlp::backprop(const ForwardTrace& trace, std::vector<double> g_pre_head) const {
  Gradients grads;
  grads.layers.resize(layers_.size());

  std::vector<double> g_pre = std::move(g_pre_head);
  for (std::size_t l = layers_.size(); l-- > 0;) {
    const auto& layer = layers_[l];
    const auto in = static_cast<std::size_t>(layer.spec.input_dim);
    const auto out = static_cast<std::size_t>(layer.spec.output_dim);
    const auto& below = (l == 0) ? trace.input : trace.post[l - 1];

    auto& lg = grads.layers[l];
    lg.weights.resize(in * out);
    lg.biases.resize(out);
    for (std::size_t o = 0; o < out; ++o) {
      lg.biases[o] = g_pre[o];
      double* row = lg.weights.data() + o * in;
      for (std::size_t i = 0; i < in; ++i) row[i] = g_pre[o] * below[i];
    }

    if (l > 0) {
      std::vector<double> g_below(in, 0.0);
      for (std::size_t o = 0; o < out; ++o) {
        const double* row = layer.weights.data() + o * in;
        for (std::size_t i = 0; i < in; ++i) g_below[i] += row[i] * g_pre[o];
      }
      g_pre = activation_backward(layers_[l - 1].spec.activation, trace.pre[l - 1],
                                  trace.post[l - 1], g_below);
    }
  }
  return grads;
}

Gradients Mlp::backward(const ForwardTrace& trace, std::span<const double> upstream) const {
  if (static_cast<int>(upstream.size()) != output_dim())
    throw std::invalid_argument("upstream size does not match network output");
  const std::vector<double> g_post(upstream.begin(), upstream.end());
  const std::size_t head = layers_.size() - 1;
  return backprop(trace, activation_backward(layers_[head].spec.activation, trace.pre[head],
                                             trace.post[head], g_post));
}

Gradients Mlp::log_prob_gradient(const ForwardTrace& trace, int output_index) const {
  if (layers_.back().spec.activation != Activation::Softmax)
    throw std::invalid_argument("log-probability gradient requires a softmax head");
  if (output_index < 0 || output_index >= output_dim())
    throw std::invalid_argument("output index out of range");

  // d log p_a / d pre_j = 1{j = a} - p_j; seeding the head directly keeps this
  // path exact even when the selected probability is tiny.
  const auto& p = trace.output();
  std::vector<double> g_pre_head(p.size());
  for (std::size_t j = 0; j < p.size(); ++j)
    g_pre_head[j] = (static_cast<int>(j) == output_index ? 1.0 : 0.0) - p[j];
  return backprop(trace, std::move(g_pre_head));
}

void Mlp::apply_step(const Gradients& grads, double direction_sign) {
  if (grads.layers.size() != layers_.size())
    throw std::invalid_argument("gradient shape does not match network");
  if (direction_sign != 1.0 && direction_sign != -1.0)
    throw std::invalid_argument("direction sign must be +1 or -1");
  if (!grads.finite()) throw std::runtime_error("non-finite gradients in sgd step");

  const double scale = direction_sign * learning_rate_;
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    auto& layer = layers_[l];
    const auto& lg = grads.layers[l];
    if (lg.weights.size() != layer.weights.size() || lg.biases.size() != layer.biases.size())
      throw std::invalid_argument("gradient shape does not match layer " + std::to_string(l));
    for (std::size_t i = 0; i < layer.weights.size(); ++i) layer.weights[i] += scale * lg.weights[i];
    for (std::size_t i = 0; i < layer.biases.size(); ++i) layer.biases[i] += scale * lg.biases[i];
  }
}

std::size_t Mlp::parameter_count() const {
  std::size_t count = 0;
  for (const auto& layer : layers_) count += layer.weights.size() + layer.biases.size();
  return count;
}

double Mlp::get_parameter(std::size_t i) const {
  for (const auto& layer : layers_) {
    if (i < layer.weights.size()) return layer.weights[i];
    i -= layer.weights.size();
    if (i < layer.biases.size()) return layer.biases[i];
    i -= layer.biases.size();
  }
  throw std::invalid_argument("parameter index out of range");
}

void Mlp::set_parameter(std::size_t i, double value) {
  for (auto& layer : layers_) {
    if (i < layer.weights.size()) {
      layer.weights[i] = value;
      return;
    }
    i -= layer.weights.size();
    if (i < layer.biases.size()) {
      layer.biases[i] = value;
      return;
    }
    i -= layer.biases.size();
  }
  throw std::invalid_argument("parameter index out of range");
}

bool Mlp::parameters_finite() const {
  for (const auto& layer : layers_) {
    for (double w : layer.weights)
      if (!std::isfinite(w)) return false;
    for (double b : layer.biases)
      if (!std::isfinite(b)) return false;
  }
  return true;
}

GradientCheckReport gradient_check(const Mlp& net, std::span<const double> input,
                                   double tolerance) {
  constexpr double kStep = 1e-6;
  constexpr double kKinkWindow = 1e-8;

  // Fixed, sign-alternating upstream; a constant one would make a softmax
  // head's scalar identically 1 and hide its gradients entirely.
  std::vector<double> upstream(static_cast<std::size_t>(net.output_dim()));
  for (std::size_t j = 0; j < upstream.size(); ++j)
    upstream[j] = (j % 2 == 0 ? 1.0 : -1.0) * (1.0 + 0.1 * static_cast<double>(j));

  GradientCheckReport report;
  const auto trace = net.forward_trace(input);
  for (std::size_t l = 0; l < net.layers().size(); ++l) {
    if (net.layers()[l].spec.activation != Activation::Rectifier) continue;
    for (double z : trace.pre[l])
      if (std::abs(z) <= kKinkWindow) report.kink_excluded = true;
  }

  const auto analytic = net.backward(trace, upstream);
  std::vector<double> flat;
  for (const auto& layer : analytic.layers) {
    flat.insert(flat.end(), layer.weights.begin(), layer.weights.end());
    flat.insert(flat.end(), layer.biases.begin(), layer.biases.end());
  }

  Mlp probe = net;
  const auto scalar = [&](void) {
    const auto out = probe.forward(input);
    double s = 0.0;
    for (std::size_t j = 0; j < out.size(); ++j) s += upstream[j] * out[j];
    return s;
  };

  report.parameters_checked = probe.parameter_count();
  for (std::size_t i = 0; i < report.parameters_checked; ++i) {
    const double saved = probe.get_parameter(i);
    probe.set_parameter(i, saved + kStep);
    const double above = scalar();
    probe.set_parameter(i, saved - kStep);
    const double below = scalar();
    probe.set_parameter(i, saved);

    const double numeric = (above - below) / (2.0 * kStep);
    const double rel = std::abs(flat[i] - numeric) /
                       std::max({1.0, std::abs(flat[i]), std::abs(numeric)});
    report.max_rel_error = std::max(report.max_rel_error, rel);
  }
  report.pass = report.max_rel_error <= tolerance;
  return report;
}

}  // namespace csense
