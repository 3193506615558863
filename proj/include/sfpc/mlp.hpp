// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "sfpc/float_format.hpp"
#include "sfpc/rng.hpp"

namespace sfpc::nn {

// Dense ReLU network with a softmax cross-entropy head, trained by plain
// SGD. Compute runs in float; the storage pipeline narrows tensors to the
// configured format and masks mantissas to a per-tensor width on every use.
// Weights keep a full-precision master copy; the forward pass consumes the
// quantized view and gradients flow straight through the quantization node.
// Backward consumes the stashed quantized activations, and the ReLU gradient
// gate tests the stashed (quantized) activation.
//
// Controlled tensors per L-layer network: L weight matrices and L layer
// inputs (the batch itself plus each hidden output). Biases stay in float.

struct Linear {
  int in = 0;
  int out = 0;
  std::vector<float> w; // out x in, row-major
  std::vector<float> b; // out
};

enum class Head : std::uint8_t {
  SoftmaxCE, // mean cross entropy over softmax logits
  Squared,   // mean 0.5 * ||logits - onehot||^2
};

struct Mlp {
  std::vector<Linear> layers;
  Head head = Head::SoftmaxCE;

  // dims = {input, hidden..., classes}; He-style init, biases zero.
  static Mlp init(const std::vector<int>& dims, CounterRng& rng);

  int num_layers() const { return static_cast<int>(layers.size()); }
  std::size_t param_count() const;
  std::vector<float> flat_weights() const; // weights then biases, layer order
};

struct QuantSpec {
  FloatFormat fmt = FloatFormat::fp32();
  std::vector<int> weight_widths; // one per layer
  std::vector<int> act_widths;    // one per layer input a_0 .. a_{L-1}
  NonFinitePolicy policy = NonFinitePolicy::Reject;

  static QuantSpec full_width(const FloatFormat& f, int layers);
};

// Everything a training step produces besides the loss: the format-narrowed
// unmasked patterns (pre), the masked patterns the math consumed (q), and
// the gradients at each controlled tensor.
struct Stash {
  std::vector<std::vector<std::uint32_t>> w_pre, w_q, a_pre, a_q;
  std::vector<std::vector<float>> a_val; // quantized activation values
  std::vector<std::vector<float>> w_grad, b_grad, a_grad;
};

struct StepResult {
  double loss = 0;
  int correct = 0;
};

// Forward and backward over one batch; fills the stash, touches no weights.
// x is batch-major (batch x d0), y holds class indices. Throws NumericError
// on a non-finite loss or activation.
StepResult forward_backward(const Mlp& model, std::span<const float> x,
                            std::span<const int> y, std::size_t batch,
                            const QuantSpec& spec, Stash& stash);

// Forward only (loss and argmax accuracy), same quantization semantics.
StepResult evaluate(const Mlp& model, std::span<const float> x,
                    std::span<const int> y, std::size_t batch,
                    const QuantSpec& spec);

// w <- w - lr * (dw + weight_decay * w); bias updates skip the decay term.
void apply_sgd(Mlp& model, const Stash& stash, double lr, double weight_decay);

} // namespace sfpc::nn
