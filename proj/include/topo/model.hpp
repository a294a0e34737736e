// model.hpp
//
// A small fully-convolutional segmentation network with hand-implemented
// forward and backward passes, the Dice and binary cross-entropy losses,
// and the Adam optimiser.
//
// Architecture (all convolutions zero-padded to preserve spatial size):
//
//   conv 3x3 (1 -> 8)  + ReLU
//   conv 3x3 (8 -> 8)  + ReLU          -> skip activations
//   2x mean-pool down
//   conv 3x3 (8 -> 16) + ReLU
//   2x nearest-neighbour up
//   concat [upsampled(16), skip(8)] -> 24 channels
//   conv 3x3 (24 -> 8) + ReLU
//   conv 1x1 (8 -> 1)  + sigmoid
//
// 3577 parameters in a single flat buffer; the layer table below fixes the
// layout. Input height and width must be divisible by 2.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "topo/grid.hpp"
#include "topo/rng.hpp"

namespace topo {

struct Tensor {
  int ch = 0;
  int h = 0;
  int w = 0;
  std::vector<double> v;

  Tensor() = default;
  Tensor(int c, int hh, int ww)
      : ch(c), h(hh), w(ww), v(static_cast<std::size_t>(c) * hh * ww, 0.0) {}

  double* plane(int c) { return v.data() + static_cast<std::size_t>(c) * h * w; }
  const double* plane(int c) const { return v.data() + static_cast<std::size_t>(c) * h * w; }
  double& at(int c, int i, int j) { return v[(static_cast<std::size_t>(c) * h + i) * w + j]; }
  double at(int c, int i, int j) const { return v[(static_cast<std::size_t>(c) * h + i) * w + j]; }
};

struct LayerSpec {
  const char* name;
  int in_ch;
  int out_ch;
  int k;
  std::size_t w_off;
  std::size_t b_off;

  std::size_t w_len() const { return static_cast<std::size_t>(out_ch) * in_ch * k * k; }
  std::size_t b_len() const { return out_ch; }
};

inline const std::array<LayerSpec, 5>& tinynet_layers() {
  static const std::array<LayerSpec, 5> layers = [] {
    std::array<LayerSpec, 5> ls{{{"conv1", 1, 8, 3, 0, 0},
                                 {"conv2", 8, 8, 3, 0, 0},
                                 {"conv3", 8, 16, 3, 0, 0},
                                 {"conv4", 24, 8, 3, 0, 0},
                                 {"conv5", 8, 1, 1, 0, 0}}};
    std::size_t off = 0;
    for (auto& l : ls) {
      l.w_off = off;
      off += l.w_len();
      l.b_off = off;
      off += l.b_len();
    }
    return ls;
  }();
  return layers;
}

inline std::size_t tinynet_param_count() {
  const auto& last = tinynet_layers().back();
  return last.b_off + last.b_len();  // 3577
}

struct TinyNet {
  std::vector<double> params;

  TinyNet() : params(tinynet_param_count(), 0.0) {}

  /// He-style uniform initialisation scaled by fan-in; biases zero.
  static TinyNet initialized(std::uint64_t seed) {
    TinyNet net;
    Rng rng(seed);
    for (const auto& layer : tinynet_layers()) {
      const double bound = std::sqrt(6.0 / (layer.in_ch * layer.k * layer.k));
      for (std::size_t i = 0; i < layer.w_len(); ++i)
        net.params[layer.w_off + i] = rng.uniform(-bound, bound);
    }
    return net;
  }

  bool operator==(const TinyNet& o) const { return params == o.params; }
};

namespace model_detail {

/// Zero-padded convolution; k is 1 or 3, pad = k / 2.
inline void conv_forward(const Tensor& in, const double* w, const double* b, int out_ch, int k,
                         Tensor& out) {
  const int h = in.h, wd = in.w, pad = k / 2;
  out = Tensor(out_ch, h, wd);
  for (int oc = 0; oc < out_ch; ++oc) {
    double* op = out.plane(oc);
    const double bias = b[oc];
    for (int n = 0; n < h * wd; ++n) op[n] = bias;
    for (int ic = 0; ic < in.ch; ++ic) {
      const double* ip = in.plane(ic);
      for (int di = -pad; di <= pad; ++di)
        for (int dj = -pad; dj <= pad; ++dj) {
          const double wv = w[((static_cast<std::size_t>(oc) * in.ch + ic) * k + (di + pad)) * k +
                              (dj + pad)];
          const int i0 = std::max(0, -di), i1 = h - std::max(0, di);
          const int j0 = std::max(0, -dj), j1 = wd - std::max(0, dj);
          for (int i = i0; i < i1; ++i) {
            double* orow = op + static_cast<std::size_t>(i) * wd;
            const double* irow = ip + static_cast<std::size_t>(i + di) * wd + dj;
            for (int j = j0; j < j1; ++j) orow[j] += wv * irow[j];
          }
        }
    }
  }
}

/// Gradients of the convolution: accumulates into dw/db, overwrites din.
inline void conv_backward(const Tensor& in, const double* w, const Tensor& dout, int k, double* dw,
                          double* db, Tensor& din) {
  const int h = in.h, wd = in.w, pad = k / 2, out_ch = dout.ch;
  din = Tensor(in.ch, h, wd);
  for (int oc = 0; oc < out_ch; ++oc) {
    const double* gp = dout.plane(oc);
    double acc = 0.0;
    for (int n = 0; n < h * wd; ++n) acc += gp[n];
    db[oc] += acc;
    for (int ic = 0; ic < in.ch; ++ic) {
      const double* ip = in.plane(ic);
      double* dip = din.plane(ic);
      for (int di = -pad; di <= pad; ++di)
        for (int dj = -pad; dj <= pad; ++dj) {
          const std::size_t widx =
              ((static_cast<std::size_t>(oc) * in.ch + ic) * k + (di + pad)) * k + (dj + pad);
          const double wv = w[widx];
          const int i0 = std::max(0, -di), i1 = h - std::max(0, di);
          const int j0 = std::max(0, -dj), j1 = wd - std::max(0, dj);
          double wacc = 0.0;
          for (int i = i0; i < i1; ++i) {
            const double* grow = gp + static_cast<std::size_t>(i) * wd;
            const double* irow = ip + static_cast<std::size_t>(i + di) * wd + dj;
            double* drow = dip + static_cast<std::size_t>(i + di) * wd + dj;
            for (int j = j0; j < j1; ++j) {
              wacc += grow[j] * irow[j];
              drow[j] += wv * grow[j];
            }
          }
          dw[widx] += wacc;
        }
    }
  }
}

inline void relu_forward(const Tensor& pre, Tensor& act) {
  act = pre;
  for (double& x : act.v) x = x > 0.0 ? x : 0.0;
}

inline void relu_backward(const Tensor& pre, Tensor& grad) {
  for (std::size_t n = 0; n < grad.v.size(); ++n)
    if (pre.v[n] <= 0.0) grad.v[n] = 0.0;
}

inline void meanpool2_forward(const Tensor& in, Tensor& out) {
  out = Tensor(in.ch, in.h / 2, in.w / 2);
  for (int c = 0; c < in.ch; ++c)
    for (int i = 0; i < out.h; ++i)
      for (int j = 0; j < out.w; ++j)
        out.at(c, i, j) = 0.25 * (in.at(c, 2 * i, 2 * j) + in.at(c, 2 * i, 2 * j + 1) +
                                  in.at(c, 2 * i + 1, 2 * j) + in.at(c, 2 * i + 1, 2 * j + 1));
}

inline void meanpool2_backward(const Tensor& dout, Tensor& din, int h, int w) {
  din = Tensor(dout.ch, h, w);
  for (int c = 0; c < dout.ch; ++c)
    for (int i = 0; i < dout.h; ++i)
      for (int j = 0; j < dout.w; ++j) {
        const double g = 0.25 * dout.at(c, i, j);
        din.at(c, 2 * i, 2 * j) = g;
        din.at(c, 2 * i, 2 * j + 1) = g;
        din.at(c, 2 * i + 1, 2 * j) = g;
        din.at(c, 2 * i + 1, 2 * j + 1) = g;
      }
}

inline void upsample2_forward(const Tensor& in, Tensor& out) {
  out = Tensor(in.ch, in.h * 2, in.w * 2);
  for (int c = 0; c < in.ch; ++c)
    for (int i = 0; i < out.h; ++i)
      for (int j = 0; j < out.w; ++j) out.at(c, i, j) = in.at(c, i / 2, j / 2);
}

inline void upsample2_backward(const Tensor& dout, Tensor& din) {
  din = Tensor(dout.ch, dout.h / 2, dout.w / 2);
  for (int c = 0; c < dout.ch; ++c)
    for (int i = 0; i < dout.h; ++i)
      for (int j = 0; j < dout.w; ++j) din.at(c, i / 2, j / 2) += dout.at(c, i, j);
}

}  // namespace model_detail

/// Everything the backward pass needs from one forward pass.
struct Tape {
  Tensor x0;
  Tensor pre1, act1;
  Tensor pre2, act2;
  Tensor pooled;
  Tensor pre3, act3;
  Tensor up;
  Tensor cat;
  Tensor pre4, act4;
  Tensor pre5;
  Tensor sig;
};

/// Runs the network on an H x W image (H, W divisible by 2). Returns the
/// probability map, values in (0, 1), plus the activation tape.
inline std::pair<ProbabilityGrid, Tape> forward(const TinyNet& net, const ProbabilityGrid& image) {
  if (image.height <= 0 || image.width <= 0)
    throw std::invalid_argument("forward: empty image");
  if (image.height % 2 != 0 || image.width % 2 != 0)
    throw std::invalid_argument("forward: height and width must be divisible by 2");
  if (net.params.size() != tinynet_param_count())
    throw std::invalid_argument("forward: parameter buffer has the wrong size");

  using namespace model_detail;
  const auto& L = tinynet_layers();
  const double* p = net.params.data();
  Tape t;

  t.x0 = Tensor(1, image.height, image.width);
  std::copy(image.values.begin(), image.values.end(), t.x0.v.begin());

  conv_forward(t.x0, p + L[0].w_off, p + L[0].b_off, L[0].out_ch, L[0].k, t.pre1);
  relu_forward(t.pre1, t.act1);
  conv_forward(t.act1, p + L[1].w_off, p + L[1].b_off, L[1].out_ch, L[1].k, t.pre2);
  relu_forward(t.pre2, t.act2);
  meanpool2_forward(t.act2, t.pooled);
  conv_forward(t.pooled, p + L[2].w_off, p + L[2].b_off, L[2].out_ch, L[2].k, t.pre3);
  relu_forward(t.pre3, t.act3);
  upsample2_forward(t.act3, t.up);

  t.cat = Tensor(t.up.ch + t.act2.ch, image.height, image.width);
  std::copy(t.up.v.begin(), t.up.v.end(), t.cat.v.begin());
  std::copy(t.act2.v.begin(), t.act2.v.end(), t.cat.v.begin() + t.up.v.size());

  conv_forward(t.cat, p + L[3].w_off, p + L[3].b_off, L[3].out_ch, L[3].k, t.pre4);
  relu_forward(t.pre4, t.act4);
  conv_forward(t.act4, p + L[4].w_off, p + L[4].b_off, L[4].out_ch, L[4].k, t.pre5);

  t.sig = t.pre5;
  for (double& x : t.sig.v) x = 1.0 / (1.0 + std::exp(-x));

  ProbabilityGrid out(image.height, image.width);
  std::copy(t.sig.v.begin(), t.sig.v.end(), out.values.begin());
  return {out, std::move(t)};
}

/// Exact gradients of sum_ij dL_dS[i,j] * S[i,j] contributions w.r.t. every
/// parameter, via the chain rule through the tape.
inline std::vector<double> backward(const TinyNet& net, const Tape& tape, const GradientMap& dL_dS) {
  if (tape.sig.h != dL_dS.height || tape.sig.w != dL_dS.width)
    throw std::invalid_argument("backward: tape does not match the output gradient shape");

  using namespace model_detail;
  const auto& L = tinynet_layers();
  const double* p = net.params.data();
  std::vector<double> grads(tinynet_param_count(), 0.0);

  Tensor d(1, dL_dS.height, dL_dS.width);
  for (std::size_t n = 0; n < d.v.size(); ++n) {
    const double s = tape.sig.v[n];
    d.v[n] = dL_dS.values[n] * s * (1.0 - s);
  }

  Tensor dact4;
  conv_backward(tape.act4, p + L[4].w_off, d, L[4].k, grads.data() + L[4].w_off,
                grads.data() + L[4].b_off, dact4);
  relu_backward(tape.pre4, dact4);

  Tensor dcat;
  conv_backward(tape.cat, p + L[3].w_off, dact4, L[3].k, grads.data() + L[3].w_off,
                grads.data() + L[3].b_off, dcat);

  Tensor dup(tape.up.ch, tape.up.h, tape.up.w);
  std::copy(dcat.v.begin(), dcat.v.begin() + dup.v.size(), dup.v.begin());
  Tensor dact2_skip(tape.act2.ch, tape.act2.h, tape.act2.w);
  std::copy(dcat.v.begin() + dup.v.size(), dcat.v.end(), dact2_skip.v.begin());

  Tensor dact3;
  upsample2_backward(dup, dact3);
  relu_backward(tape.pre3, dact3);

  Tensor dpooled;
  conv_backward(tape.pooled, p + L[2].w_off, dact3, L[2].k, grads.data() + L[2].w_off,
                grads.data() + L[2].b_off, dpooled);

  Tensor dact2;
  meanpool2_backward(dpooled, dact2, tape.act2.h, tape.act2.w);
  for (std::size_t n = 0; n < dact2.v.size(); ++n) dact2.v[n] += dact2_skip.v[n];
  relu_backward(tape.pre2, dact2);

  Tensor dact1;
  conv_backward(tape.act1, p + L[1].w_off, dact2, L[1].k, grads.data() + L[1].w_off,
                grads.data() + L[1].b_off, dact1);
  relu_backward(tape.pre1, dact1);

  Tensor dx0;
  conv_backward(tape.x0, p + L[0].w_off, dact1, L[0].k, grads.data() + L[0].w_off,
                grads.data() + L[0].b_off, dx0);

  return grads;
}

// ---------------------------------------------------------------------------
// Losses. Both return the scalar loss and its gradient w.r.t. S.
// ---------------------------------------------------------------------------

/// Dice loss 1 - (2 sum(S*Y) + s) / (sum(S) + sum(Y) + s), smoothing s = 1.
inline std::pair<double, GradientMap> dice_loss(const ProbabilityGrid& s, const BinaryMask& y) {
  if (s.height != y.height || s.width != y.width)
    throw std::invalid_argument("dice_loss: shape mismatch");
  const double smooth = 1.0;
  double inter = 0.0, sum_s = 0.0, sum_y = 0.0;
  for (std::size_t n = 0; n < s.values.size(); ++n) {
    const double yv = y.values[n] ? 1.0 : 0.0;
    inter += s.values[n] * yv;
    sum_s += s.values[n];
    sum_y += yv;
  }
  const double num = 2.0 * inter + smooth;
  const double den = sum_s + sum_y + smooth;
  GradientMap grad(s.height, s.width);
  for (std::size_t n = 0; n < s.values.size(); ++n) {
    const double yv = y.values[n] ? 1.0 : 0.0;
    grad.values[n] = (num - 2.0 * yv * den) / (den * den);
  }
  return {1.0 - num / den, std::move(grad)};
}

/// Mean binary cross-entropy with probabilities clipped to
/// [1e-7, 1 - 1e-7]; the gradient is zero where the clip is active.
inline std::pair<double, GradientMap> bce_loss(const ProbabilityGrid& s, const BinaryMask& y) {
  if (s.height != y.height || s.width != y.width)
    throw std::invalid_argument("bce_loss: shape mismatch");
  const double clip = 1e-7;
  const double inv_n = 1.0 / static_cast<double>(s.values.size());
  double loss = 0.0;
  GradientMap grad(s.height, s.width);
  for (std::size_t n = 0; n < s.values.size(); ++n) {
    const double sv = std::clamp(s.values[n], clip, 1.0 - clip);
    const double yv = y.values[n] ? 1.0 : 0.0;
    loss -= yv * std::log(sv) + (1.0 - yv) * std::log(1.0 - sv);
    const bool clipped = s.values[n] < clip || s.values[n] > 1.0 - clip;
    grad.values[n] = clipped ? 0.0 : inv_n * ((1.0 - yv) / (1.0 - sv) - yv / sv);
  }
  return {loss * inv_n, std::move(grad)};
}

// ---------------------------------------------------------------------------
// Adam.
// ---------------------------------------------------------------------------

struct AdamState {
  std::vector<double> m;
  std::vector<double> v;
  long step = 0;
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  explicit AdamState(double learning_rate = 1e-4)
      : m(tinynet_param_count(), 0.0), v(tinynet_param_count(), 0.0), lr(learning_rate) {}
};

/// Standard Adam update with bias correction.
inline void adam_step(TinyNet& net, const std::vector<double>& grads, AdamState& state) {
  if (grads.size() != net.params.size() || state.m.size() != net.params.size())
    throw std::invalid_argument("adam_step: buffer size mismatch");
  ++state.step;
  const double c1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
  for (std::size_t i = 0; i < net.params.size(); ++i) {
    state.m[i] = state.beta1 * state.m[i] + (1.0 - state.beta1) * grads[i];
    state.v[i] = state.beta2 * state.v[i] + (1.0 - state.beta2) * grads[i] * grads[i];
    const double mhat = state.m[i] / c1;
    const double vhat = state.v[i] / c2;
    net.params[i] -= state.lr * mhat / (std::sqrt(vhat) + state.eps);
  }
}

// ---------------------------------------------------------------------------
// Checkpoints: JSON with named tensors and shape headers, versioned.
// ---------------------------------------------------------------------------

inline void save_checkpoint(const TinyNet& net, const std::string& path) {
  nlohmann::json layers = nlohmann::json::array();
  for (const auto& l : tinynet_layers()) {
    layers.push_back(
        {{"name", l.name},
         {"shape", {l.out_ch, l.in_ch, l.k, l.k}},
         {"w", std::vector<double>(net.params.begin() + l.w_off,
                                   net.params.begin() + l.w_off + l.w_len())},
         {"b", std::vector<double>(net.params.begin() + l.b_off,
                                   net.params.begin() + l.b_off + l.b_len())}});
  }
  const nlohmann::json j{{"format", "topoprior-model"}, {"version", 1}, {"layers", layers}};
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write checkpoint: " + path);
  out << j.dump() << '\n';
}

inline TinyNet load_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open checkpoint: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw std::runtime_error("malformed checkpoint " + path + ": " + e.what());
  }
  if (j.value("format", "") != "topoprior-model" || j.value("version", 0) != 1)
    throw std::runtime_error("unsupported checkpoint format in " + path);
  TinyNet net;
  const auto& layers = j.at("layers");
  const auto& specs = tinynet_layers();
  if (layers.size() != specs.size()) throw std::runtime_error("checkpoint layer count mismatch");
  for (std::size_t li = 0; li < specs.size(); ++li) {
    const auto& l = specs[li];
    const auto& jl = layers[li];
    const std::vector<int> shape = jl.at("shape").get<std::vector<int>>();
    if (jl.at("name").get<std::string>() != l.name ||
        shape != std::vector<int>{l.out_ch, l.in_ch, l.k, l.k})
      throw std::runtime_error("checkpoint architecture mismatch at layer " + std::string(l.name));
    const auto w = jl.at("w").get<std::vector<double>>();
    const auto b = jl.at("b").get<std::vector<double>>();
    if (w.size() != l.w_len() || b.size() != l.b_len())
      throw std::runtime_error("checkpoint tensor size mismatch at layer " + std::string(l.name));
    std::copy(w.begin(), w.end(), net.params.begin() + l.w_off);
    std::copy(b.begin(), b.end(), net.params.begin() + l.b_off);
  }
  return net;
}

}  // namespace topo
