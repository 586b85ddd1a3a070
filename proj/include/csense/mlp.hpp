#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "csense/rng.hpp"

namespace csense {

enum class Activation { Rectifier, Softmax, Identity };

struct LayerSpec {
  int input_dim = 0;
  int output_dim = 0;
  Activation activation = Activation::Identity;

  bool operator==(const LayerSpec&) const = default;
};

// Dense layer. Weights are row-major: weights[o * input_dim + i] multiplies
// input i into output o.
struct Layer {
  LayerSpec spec;
  std::vector<double> weights;
  std::vector<double> biases;
};

// Per-layer pre-activations and activations of one forward pass, kept so the
// backward pass can be computed without re-running the network.
struct ForwardTrace {
  std::vector<double> input;
  std::vector<std::vector<double>> pre;
  std::vector<std::vector<double>> post;

  const std::vector<double>& output() const { return post.back(); }
};

struct Gradients {
  struct LayerGrads {
    std::vector<double> weights;
    std::vector<double> biases;
  };
  std::vector<LayerGrads> layers;

  void scale(double factor);
  bool finite() const;
};

// Fully connected network with hand-written forward and backward passes.
// Weight init is uniform(-r, r) with r = sqrt(6 / (fan_in + fan_out)) drawn
// from the given stream; biases start at zero. Construction is deterministic:
// the same seed always yields the same parameters.
class Mlp {
 public:
  Mlp(std::vector<LayerSpec> specs, double learning_rate, Rng& init_rng);

  std::vector<double> forward(std::span<const double> input) const;
  ForwardTrace forward_trace(std::span<const double> input) const;

  // Gradients of sum_j upstream[j] * output[j] with respect to every parameter.
  Gradients backward(const ForwardTrace& trace, std::span<const double> upstream) const;

  // Gradients of log(output[output_index]); requires a softmax head. Folding
  // the log through the softmax keeps this path exact even when the selected
  // probability is tiny.
  Gradients log_prob_gradient(const ForwardTrace& trace, int output_index) const;

  // params += direction_sign * learning_rate * grads. Rejects non-finite
  // gradients so a divergence is reported where it happens.
  void apply_step(const Gradients& grads, double direction_sign);

  double learning_rate() const { return learning_rate_; }
  int input_dim() const { return layers_.front().spec.input_dim; }
  int output_dim() const { return layers_.back().spec.output_dim; }
  const std::vector<Layer>& layers() const { return layers_; }

  // Flat parameter view (layer by layer, weights then biases) used by the
  // finite-difference checker and by checkpointing.
  std::size_t parameter_count() const;
  double get_parameter(std::size_t i) const;
  void set_parameter(std::size_t i, double value);
  bool parameters_finite() const;

  // Constructs a network directly from stored layers (checkpoint restore).
  static Mlp from_layers(std::vector<Layer> layers, double learning_rate);

 private:
  Mlp() = default;

  // Shared backward core; g_pre_head is dL/d(pre-activation) at the top layer.
  Gradients backprop(const ForwardTrace& trace, std::vector<double> g_pre_head) const;

  std::vector<Layer> layers_;
  double learning_rate_ = 0.0;
};

struct GradientCheckReport {
  double max_rel_error = 0.0;
  bool pass = false;
  // True when some rectifier pre-activation sat on the kink (|z| <= 1e-8);
  // finite differences straddle the non-differentiable point there, so the
  // comparison is void and the caller should re-draw the input.
  bool kink_excluded = false;
  std::size_t parameters_checked = 0;
};

// Central finite differences (step 1e-6) against the analytic backward pass,
// parameter by parameter, on the scalar sum_j u_j * output[j] for a fixed
// deterministic upstream u.
GradientCheckReport gradient_check(const Mlp& net, std::span<const double> input, double tolerance);

}  // namespace csense
