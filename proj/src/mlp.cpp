// SPDX-License-Identifier: Apache-2.0
#include "sfpc/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>

#include "sfpc/error.hpp"

namespace sfpc::nn {

Mlp Mlp::init(const std::vector<int>& dims, CounterRng& rng) {
  if (dims.size() < 2) throw std::invalid_argument("network needs at least input and output dims");
  for (int d : dims)
    if (d <= 0) throw std::invalid_argument("layer dims must be positive");
  Mlp model;
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    Linear lin;
    lin.in = dims[l];
    lin.out = dims[l + 1];
    lin.w.resize(static_cast<std::size_t>(lin.in) * lin.out);
    lin.b.assign(static_cast<std::size_t>(lin.out), 0.0f);
    const double scale = std::sqrt(2.0 / lin.in);
    for (auto& v : lin.w) v = static_cast<float>(rng.normal() * scale);
    model.layers.push_back(std::move(lin));
  }
  return model;
}

std::size_t Mlp::param_count() const {
  std::size_t n = 0;
  for (const auto& l : layers) n += l.w.size() + l.b.size();
  return n;
}

std::vector<float> Mlp::flat_weights() const {
  std::vector<float> out;
  out.reserve(param_count());
  for (const auto& l : layers) out.insert(out.end(), l.w.begin(), l.w.end());
  for (const auto& l : layers) out.insert(out.end(), l.b.begin(), l.b.end());
  return out;
}

QuantSpec QuantSpec::full_width(const FloatFormat& f, int layers) {
  QuantSpec spec;
  spec.fmt = f;
  spec.weight_widths.assign(static_cast<std::size_t>(layers), static_cast<int>(f.mantissa_bits));
  spec.act_widths.assign(static_cast<std::size_t>(layers), static_cast<int>(f.mantissa_bits));
  return spec;
}

namespace {

// Narrows each value to the storage format, masks the mantissa to `width`
// bits, and reports both raw patterns alongside the value the math will use.
void quantize_tensor(std::span<const float> src, const FloatFormat& fmt, int width,
                     NonFinitePolicy policy, std::vector<std::uint32_t>& pre,
                     std::vector<std::uint32_t>& q, std::vector<float>& val) {
  pre.resize(src.size());
  q.resize(src.size());
  val.resize(src.size());
  for (std::size_t i = 0; i < src.size(); ++i) {
    const std::uint32_t raw = to_raw(src[i], fmt);
    pre[i] = raw;
    const std::uint32_t qr = quantize_value(raw, static_cast<unsigned>(width), fmt, policy);
    q[i] = qr;
    val[i] = from_raw(qr, fmt);
  }
}

void check_spec(const Mlp& model, const QuantSpec& spec) {
  const auto layers = static_cast<std::size_t>(model.num_layers());
  if (spec.weight_widths.size() != layers || spec.act_widths.size() != layers)
    throw std::invalid_argument("quantization widths must list one entry per layer");
  const int m = static_cast<int>(spec.fmt.mantissa_bits);
  for (int w : spec.weight_widths)
    if (w < 0 || w > m) throw std::invalid_argument("weight width out of range");
  for (int w : spec.act_widths)
    if (w < 0 || w > m) throw std::invalid_argument("activation width out of range");
}

struct ForwardState {
  std::vector<std::vector<float>> w_val; // quantized weights per layer
  std::vector<float> logits;             // batch x classes
  std::vector<float> probs;              // batch x classes (softmax head only)
  StepResult result;
};

// Shared forward pass. When `stash` is non-null the raw patterns and
// quantized activations land there for the backward pass and controllers.
ForwardState forward(const Mlp& model, std::span<const float> x, std::span<const int> y,
                     std::size_t batch, const QuantSpec& spec, Stash* stash) {
  check_spec(model, spec);
  const auto L = static_cast<std::size_t>(model.num_layers());
  if (batch == 0) throw std::invalid_argument("empty batch");
  if (x.size() != batch * static_cast<std::size_t>(model.layers[0].in))
    throw std::invalid_argument("input size does not match batch x input_dim");
  if (y.size() != batch) throw std::invalid_argument("label count does not match batch");

  ForwardState st;
  st.w_val.resize(L);
  std::vector<std::uint32_t> scratch_pre, scratch_q;
  std::vector<float> cur;

  if (stash) {
    stash->w_pre.assign(L, {});
    stash->w_q.assign(L, {});
    stash->a_pre.assign(L, {});
    stash->a_q.assign(L, {});
    stash->a_val.assign(L, {});
    stash->w_grad.assign(L, {});
    stash->b_grad.assign(L, {});
    stash->a_grad.assign(L, {});
  }

  // a_0: the batch itself through the storage pipeline.
  {
    std::vector<std::uint32_t>& pre = stash ? stash->a_pre[0] : scratch_pre;
    std::vector<std::uint32_t>& q = stash ? stash->a_q[0] : scratch_q;
    std::vector<float> val;
    quantize_tensor(x, spec.fmt, spec.act_widths[0], spec.policy, pre, q, val);
    if (stash) stash->a_val[0] = val;
    cur = std::move(val);
  }

  std::vector<float> z;
  for (std::size_t l = 0; l < L; ++l) {
    const Linear& lin = model.layers[l];
    {
      std::vector<std::uint32_t>& pre = stash ? stash->w_pre[l] : scratch_pre;
      std::vector<std::uint32_t>& q = stash ? stash->w_q[l] : scratch_q;
      quantize_tensor(lin.w, spec.fmt, spec.weight_widths[l], spec.policy, pre, q,
                      st.w_val[l]);
    }
    const auto& wv = st.w_val[l];
    z.assign(batch * static_cast<std::size_t>(lin.out), 0.0f);
    for (std::size_t n = 0; n < batch; ++n) {
      const float* row = cur.data() + n * lin.in;
      float* zr = z.data() + n * lin.out;
      for (int o = 0; o < lin.out; ++o) {
        float acc = lin.b[static_cast<std::size_t>(o)];
        const float* wr = wv.data() + static_cast<std::size_t>(o) * lin.in;
        for (int i = 0; i < lin.in; ++i) acc += wr[i] * row[i];
        zr[o] = acc;
      }
    }
    if (l + 1 < L) {
      for (auto& v : z) v = std::max(v, 0.0f);
      std::vector<std::uint32_t>& pre = stash ? stash->a_pre[l + 1] : scratch_pre;
      std::vector<std::uint32_t>& q = stash ? stash->a_q[l + 1] : scratch_q;
      std::vector<float> val;
      quantize_tensor(z, spec.fmt, spec.act_widths[l + 1], spec.policy, pre, q, val);
      if (stash) stash->a_val[l + 1] = val;
      cur = std::move(val);
    }
  }

  const int classes = model.layers.back().out;
  st.logits = std::move(z);
  double loss = 0;
  int correct = 0;
  if (model.head == Head::SoftmaxCE) {
    st.probs.resize(batch * static_cast<std::size_t>(classes));
    for (std::size_t n = 0; n < batch; ++n) {
      const float* zr = st.logits.data() + n * classes;
      float* pr = st.probs.data() + n * classes;
      float zmax = zr[0];
      int arg = 0;
      for (int c = 1; c < classes; ++c)
        if (zr[c] > zmax) { zmax = zr[c]; arg = c; }
      double denom = 0;
      for (int c = 0; c < classes; ++c) denom += std::exp(static_cast<double>(zr[c]) - zmax);
      const int label = y[n];
      if (label < 0 || label >= classes) throw std::invalid_argument("label out of range");
      for (int c = 0; c < classes; ++c)
        pr[c] = static_cast<float>(std::exp(static_cast<double>(zr[c]) - zmax) / denom);
      loss += -(static_cast<double>(zr[label]) - zmax - std::log(denom));
      if (arg == label) ++correct;
    }
  } else {
    for (std::size_t n = 0; n < batch; ++n) {
      const float* zr = st.logits.data() + n * classes;
      const int label = y[n];
      if (label < 0 || label >= classes) throw std::invalid_argument("label out of range");
      int arg = 0;
      for (int c = 1; c < classes; ++c)
        if (zr[c] > zr[arg]) arg = c;
      for (int c = 0; c < classes; ++c) {
        const double d = static_cast<double>(zr[c]) - (c == label ? 1.0 : 0.0);
        loss += 0.5 * d * d;
      }
      if (arg == label) ++correct;
    }
  }
  loss /= static_cast<double>(batch);
  if (!std::isfinite(loss)) throw NumericError("training loss is not finite");
  st.result.loss = loss;
  st.result.correct = correct;
  return st;
}

} // namespace

StepResult forward_backward(const Mlp& model, std::span<const float> x,
                            std::span<const int> y, std::size_t batch,
                            const QuantSpec& spec, Stash& stash) {
  ForwardState st = forward(model, x, y, batch, spec, &stash);
  const auto L = static_cast<std::size_t>(model.num_layers());
  const int classes = model.layers.back().out;

  // Head gradient: both heads reduce to (head_out - onehot) / batch.
  std::vector<float> dz(batch * static_cast<std::size_t>(classes));
  const float* head_out = model.head == Head::SoftmaxCE ? st.probs.data() : st.logits.data();
  for (std::size_t n = 0; n < batch; ++n)
    for (int c = 0; c < classes; ++c) {
      const std::size_t k = n * classes + c;
      dz[k] = (head_out[k] - (y[n] == c ? 1.0f : 0.0f)) / static_cast<float>(batch);
    }

  std::vector<float> da;
  for (std::size_t l = L; l-- > 0;) {
    const Linear& lin = model.layers[l];
    const auto& a_in = stash.a_val[l];
    auto& wg = stash.w_grad[l];
    auto& bg = stash.b_grad[l];
    wg.assign(lin.w.size(), 0.0f);
    bg.assign(lin.b.size(), 0.0f);
    for (std::size_t n = 0; n < batch; ++n) {
      const float* dzr = dz.data() + n * lin.out;
      const float* ar = a_in.data() + n * lin.in;
      for (int o = 0; o < lin.out; ++o) {
        const float g = dzr[o];
        bg[static_cast<std::size_t>(o)] += g;
        float* wr = wg.data() + static_cast<std::size_t>(o) * lin.in;
        for (int i = 0; i < lin.in; ++i) wr[i] += g * ar[i];
      }
    }
    // Gradient at this layer's input, also the width-controller signal.
    da.assign(batch * static_cast<std::size_t>(lin.in), 0.0f);
    const auto& wv = st.w_val[l];
    for (std::size_t n = 0; n < batch; ++n) {
      const float* dzr = dz.data() + n * lin.out;
      float* dar = da.data() + n * lin.in;
      for (int o = 0; o < lin.out; ++o) {
        const float g = dzr[o];
        const float* wr = wv.data() + static_cast<std::size_t>(o) * lin.in;
        for (int i = 0; i < lin.in; ++i) dar[i] += g * wr[i];
      }
    }
    stash.a_grad[l] = da;
    if (l > 0) {
      // ReLU gate keyed off the stashed quantized activation.
      dz.assign(da.size(), 0.0f);
      const auto& av = stash.a_val[l];
      for (std::size_t k = 0; k < da.size(); ++k) dz[k] = av[k] > 0.0f ? da[k] : 0.0f;
    }
  }
  return st.result;
}

StepResult evaluate(const Mlp& model, std::span<const float> x, std::span<const int> y,
                    std::size_t batch, const QuantSpec& spec) {
  return forward(model, x, y, batch, spec, nullptr).result;
}

void apply_sgd(Mlp& model, const Stash& stash, double lr, double weight_decay) {
  if (lr < 0) throw std::invalid_argument("learning rate must be non-negative");
  if (stash.w_grad.size() != model.layers.size() || stash.b_grad.size() != model.layers.size())
    throw std::invalid_argument("stash does not match model layout");
  for (std::size_t l = 0; l < model.layers.size(); ++l) {
    Linear& lin = model.layers[l];
    const auto& wg = stash.w_grad[l];
    const auto& bg = stash.b_grad[l];
    if (wg.size() != lin.w.size() || bg.size() != lin.b.size())
      throw std::invalid_argument("gradient shape mismatch");
    for (std::size_t i = 0; i < lin.w.size(); ++i)
      lin.w[i] -= static_cast<float>(lr * (wg[i] + weight_decay * lin.w[i]));
    for (std::size_t i = 0; i < lin.b.size(); ++i)
      lin.b[i] -= static_cast<float>(lr * bg[i]);
  }
}

} // namespace sfpc::nn
