#include "layers.hpp"

#include <algorithm>
#include <cmath>

#include "asaukit/error.hpp"

namespace asaukit::detail {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

[[noreturn]] void shape_fail(std::size_t index, const std::string& kind, const std::string& expected,
                             const Shape& got) {
  throw ShapeError("layer " + std::to_string(index) + " (" + kind + "): expected input " + expected + ", got " +
                   shape_to_string(got));
}

Shape batched(std::size_t n, const Shape& sample) {
  Shape s;
  s.reserve(sample.size() + 1);
  s.push_back(n);
  s.insert(s.end(), sample.begin(), sample.end());
  return s;
}

void fan_uniform(std::span<double> w, std::size_t fan_in, std::size_t fan_out, SplitMix64& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  for (double& v : w) v = rng.uniform(-limit, limit);
}

class Dense final : public Layer {
 public:
  Dense(const DenseSpec& spec, std::size_t index, const Shape& in, ParamStore& store) : spec_(spec) {
    if (spec.in_dim == 0 || spec.out_dim == 0) throw ShapeError("dense layer dims must be positive");
    if (in.size() != 1 || in[0] != spec.in_dim) {
      shape_fail(index, "dense", shape_to_string(Shape{spec.in_dim}), in);
    }
    in_ = in;
    out_ = {spec.out_dim};
    const std::string prefix = "layer" + std::to_string(index) + ".dense";
    w_ = store.add_block(prefix + ".weight", spec.in_dim * spec.out_dim, true);
    b_ = store.add_block(prefix + ".bias", spec.out_dim, true);
  }

  std::string describe() const override {
    return "dense(" + std::to_string(spec_.in_dim) + "," + std::to_string(spec_.out_dim) + ")";
  }

  void initialize(ParamStore& store, SplitMix64& rng) const override {
    auto v = store.mutable_values();
    fan_uniform(v.subspan(w_, spec_.in_dim * spec_.out_dim), spec_.in_dim, spec_.out_dim, rng);
    std::fill_n(v.begin() + static_cast<std::ptrdiff_t>(b_), spec_.out_dim, 0.0);
  }

  Tensor forward(const ParamStore& store, const Tensor& in, LayerCache& cache) const override {
    const std::size_t n = in.dim(0);
    const std::size_t din = spec_.in_dim;
    const std::size_t dout = spec_.out_dim;
    const auto p = store.values();
    Tensor out({n, dout});
    for (std::size_t r = 0; r < n; ++r) {
      const double* x = in.data().data() + r * din;
      for (std::size_t o = 0; o < dout; ++o) {
        const double* w = p.data() + w_ + o * din;
        double acc = p[b_ + o];
        for (std::size_t i = 0; i < din; ++i) acc += w[i] * x[i];
        out[r * dout + o] = acc;
      }
    }
    cache.input = in;
    return out;
  }

  Tensor backward(ParamStore& store, const LayerCache& cache, const Tensor& g) const override {
    const Tensor& in = cache.input;
    const std::size_t n = in.dim(0);
    const std::size_t din = spec_.in_dim;
    const std::size_t dout = spec_.out_dim;
    const auto p = store.values();
    auto grads = store.grads();
    Tensor dx(in.shape());
    for (std::size_t r = 0; r < n; ++r) {
      const double* x = in.data().data() + r * din;
      double* gx = dx.data().data() + r * din;
      for (std::size_t o = 0; o < dout; ++o) {
        const double go = g[r * dout + o];
        if (go == 0.0) continue;
        const double* w = p.data() + w_ + o * din;
        double* gw = grads.data() + w_ + o * din;
        for (std::size_t i = 0; i < din; ++i) {
          gw[i] += go * x[i];
          gx[i] += go * w[i];
        }
        grads[b_ + o] += go;
      }
    }
    return dx;
  }

 private:
  DenseSpec spec_;
  std::size_t w_ = 0;
  std::size_t b_ = 0;
};

class Conv2d final : public Layer {
 public:
  Conv2d(const Conv2dSpec& spec, std::size_t index, const Shape& in, ParamStore& store) : spec_(spec) {
    if (spec.in_channels == 0 || spec.out_channels == 0) throw ShapeError("conv2d channel counts must be positive");
    if (in.size() != 3 || in[0] != spec.in_channels) {
      shape_fail(index, "conv2d", "[" + std::to_string(spec.in_channels) + "xHxW]", in);
    }
    in_ = in;
    out_ = {spec.out_channels, in[1], in[2]};
    const std::string prefix = "layer" + std::to_string(index) + ".conv2d";
    w_ = store.add_block(prefix + ".weight", spec.out_channels * spec.in_channels * 9, true);
    b_ = store.add_block(prefix + ".bias", spec.out_channels, true);
  }

  std::string describe() const override {
    return "conv2d(" + std::to_string(spec_.in_channels) + "," + std::to_string(spec_.out_channels) + ",k3,s1,p1)";
  }

  void initialize(ParamStore& store, SplitMix64& rng) const override {
    auto v = store.mutable_values();
    fan_uniform(v.subspan(w_, spec_.out_channels * spec_.in_channels * 9), spec_.in_channels * 9,
                spec_.out_channels * 9, rng);
    std::fill_n(v.begin() + static_cast<std::ptrdiff_t>(b_), spec_.out_channels, 0.0);
  }

  Tensor forward(const ParamStore& store, const Tensor& in, LayerCache& cache) const override {
    const std::size_t n = in.dim(0);
    const std::size_t cin = spec_.in_channels;
    const std::size_t cout = spec_.out_channels;
    const std::size_t h = in_[1];
    const std::size_t w = in_[2];
    const std::size_t plane = h * w;
    const auto p = store.values();
    Tensor out(batched(n, out_));
    for (std::size_t s = 0; s < n; ++s) {
      for (std::size_t oc = 0; oc < cout; ++oc) {
        double* o = out.data().data() + (s * cout + oc) * plane;
        std::fill_n(o, plane, p[b_ + oc]);
        for (std::size_t ic = 0; ic < cin; ++ic) {
          const double* x = in.data().data() + (s * cin + ic) * plane;
          const double* k = p.data() + w_ + (oc * cin + ic) * 9;
          for (int ky = 0; ky < 3; ++ky) {
            for (int kx = 0; kx < 3; ++kx) {
              const double wv = k[ky * 3 + kx];
              const int dy = ky - 1;
              const int dx = kx - 1;
              const std::size_t y0 = dy < 0 ? 1 : 0;
              const std::size_t y1 = dy > 0 ? h - 1 : h;
              const std::size_t x0 = dx < 0 ? 1 : 0;
              const std::size_t x1 = dx > 0 ? w - 1 : w;
              for (std::size_t y = y0; y < y1; ++y) {
                double* orow = o + y * w;
                const double* xrow = x + (y + dy) * w + dx;
                for (std::size_t xi = x0; xi < x1; ++xi) orow[xi] += wv * xrow[xi];
              }
            }
          }
        }
      }
    }
    cache.input = in;
    return out;
  }

  Tensor backward(ParamStore& store, const LayerCache& cache, const Tensor& g) const override {
    const Tensor& in = cache.input;
    const std::size_t n = in.dim(0);
    const std::size_t cin = spec_.in_channels;
    const std::size_t cout = spec_.out_channels;
    const std::size_t h = in_[1];
    const std::size_t w = in_[2];
    const std::size_t plane = h * w;
    const auto p = store.values();
    auto grads = store.grads();
    Tensor dxt(in.shape());
    for (std::size_t s = 0; s < n; ++s) {
      for (std::size_t oc = 0; oc < cout; ++oc) {
        const double* go = g.data().data() + (s * cout + oc) * plane;
        double bsum = 0.0;
        for (std::size_t i = 0; i < plane; ++i) bsum += go[i];
        grads[b_ + oc] += bsum;
        for (std::size_t ic = 0; ic < cin; ++ic) {
          const double* x = in.data().data() + (s * cin + ic) * plane;
          double* gx = dxt.data().data() + (s * cin + ic) * plane;
          const double* k = p.data() + w_ + (oc * cin + ic) * 9;
          double* gk = grads.data() + w_ + (oc * cin + ic) * 9;
          for (int ky = 0; ky < 3; ++ky) {
            for (int kx = 0; kx < 3; ++kx) {
              const double wv = k[ky * 3 + kx];
              const int dy = ky - 1;
              const int dx = kx - 1;
              const std::size_t y0 = dy < 0 ? 1 : 0;
              const std::size_t y1 = dy > 0 ? h - 1 : h;
              const std::size_t x0 = dx < 0 ? 1 : 0;
              const std::size_t x1 = dx > 0 ? w - 1 : w;
              double acc = 0.0;
              for (std::size_t y = y0; y < y1; ++y) {
                const double* grow = go + y * w;
                const double* xrow = x + (y + dy) * w + dx;
                double* gxrow = gx + (y + dy) * w + dx;
                for (std::size_t xi = x0; xi < x1; ++xi) {
                  acc += grow[xi] * xrow[xi];
                  gxrow[xi] += wv * grow[xi];
                }
              }
              gk[ky * 3 + kx] += acc;
            }
          }
        }
      }
    }
    return dxt;
  }

 private:
  Conv2dSpec spec_;
  std::size_t w_ = 0;
  std::size_t b_ = 0;
};

class MaxPool2x2 final : public Layer {
 public:
  MaxPool2x2(std::size_t index, const Shape& in) {
    if (in.size() != 3 || in[1] % 2 != 0 || in[2] % 2 != 0) {
      shape_fail(index, "maxpool2x2", "[CxHxW] with even H and W", in);
    }
    in_ = in;
    out_ = {in[0], in[1] / 2, in[2] / 2};
  }

  std::string describe() const override { return "maxpool2x2"; }

  Tensor forward(const ParamStore&, const Tensor& in, LayerCache& cache) const override {
    const std::size_t n = in.dim(0);
    const std::size_t c = in_[0];
    const std::size_t h = in_[1];
    const std::size_t w = in_[2];
    const std::size_t oh = h / 2;
    const std::size_t ow = w / 2;
    Tensor out(batched(n, out_));
    cache.argmax.assign(out.size(), 0);
    cache.tied.assign(out.size(), 0);
    std::size_t o = 0;
    for (std::size_t plane = 0; plane < n * c; ++plane) {
      const std::size_t base = plane * h * w;
      for (std::size_t y = 0; y < oh; ++y) {
        for (std::size_t x = 0; x < ow; ++x, ++o) {
          const std::size_t cand[4] = {base + (2 * y) * w + 2 * x, base + (2 * y) * w + 2 * x + 1,
                                       base + (2 * y + 1) * w + 2 * x, base + (2 * y + 1) * w + 2 * x + 1};
          std::size_t best = cand[0];
          bool tie = false;
          for (int k = 1; k < 4; ++k) {
            if (in[cand[k]] > in[best]) {
              best = cand[k];
              tie = false;
            } else if (in[cand[k]] == in[best]) {
              tie = true;
            }
          }
          out[o] = in[best];
          cache.argmax[o] = static_cast<std::uint32_t>(best);
          cache.tied[o] = tie ? 1 : 0;
        }
      }
    }
    cache.input = Tensor(in.shape());  // only the shape is needed for backward
    return out;
  }

  Tensor backward(ParamStore&, const LayerCache& cache, const Tensor& g) const override {
    Tensor dx(cache.input.shape());
    for (std::size_t o = 0; o < g.size(); ++o) dx[cache.argmax[o]] += g[o];
    return dx;
  }
};

class Flatten final : public Layer {
 public:
  Flatten(std::size_t, const Shape& in) {
    in_ = in;
    out_ = {shape_volume(in)};
  }

  std::string describe() const override { return "flatten"; }

  Tensor forward(const ParamStore&, const Tensor& in, LayerCache& cache) const override {
    cache.input = Tensor(in.shape());
    return in.reshaped(batched(in.dim(0), out_));
  }

  Tensor backward(ParamStore&, const LayerCache& cache, const Tensor& g) const override {
    return g.reshaped(cache.input.shape());
  }
};

class Upsample2x final : public Layer {
 public:
  Upsample2x(std::size_t index, const Shape& in) {
    if (in.size() != 3) shape_fail(index, "upsample2x", "[CxHxW]", in);
    in_ = in;
    out_ = {in[0], in[1] * 2, in[2] * 2};
  }

  std::string describe() const override { return "upsample2x"; }

  Tensor forward(const ParamStore&, const Tensor& in, LayerCache& cache) const override {
    const std::size_t planes = in.dim(0) * in_[0];
    const std::size_t h = in_[1];
    const std::size_t w = in_[2];
    Tensor out(batched(in.dim(0), out_));
    for (std::size_t p = 0; p < planes; ++p) {
      const double* x = in.data().data() + p * h * w;
      double* o = out.data().data() + p * 4 * h * w;
      for (std::size_t y = 0; y < 2 * h; ++y) {
        for (std::size_t xi = 0; xi < 2 * w; ++xi) o[y * 2 * w + xi] = x[(y / 2) * w + xi / 2];
      }
    }
    cache.input = Tensor(in.shape());
    return out;
  }

  Tensor backward(ParamStore&, const LayerCache& cache, const Tensor& g) const override {
    const std::size_t planes = cache.input.dim(0) * in_[0];
    const std::size_t h = in_[1];
    const std::size_t w = in_[2];
    Tensor dx(cache.input.shape());
    for (std::size_t p = 0; p < planes; ++p) {
      const double* go = g.data().data() + p * 4 * h * w;
      double* gx = dx.data().data() + p * h * w;
      for (std::size_t y = 0; y < 2 * h; ++y) {
        for (std::size_t xi = 0; xi < 2 * w; ++xi) gx[(y / 2) * w + xi / 2] += go[y * 2 * w + xi];
      }
    }
    return dx;
  }
};

// Element i of a sample belongs to channel i / inner, where inner is the
// product of the sample dims after the first.
std::size_t inner_size(const Shape& in) {
  std::size_t inner = 1;
  for (std::size_t d = 1; d < in.size(); ++d) inner *= in[d];
  return inner;
}

class AsauLayer final : public Layer {
 public:
  AsauLayer(const AsauActivation& spec, std::size_t index, const Shape& in, ParamStore& store) : spec_(spec) {
    in_ = in;
    out_ = in;
    inner_ = inner_size(in);
    channels_ = 1;
    if (spec.granularity == Granularity::per_channel) {
      channels_ = in[0];
      if (spec.channels != 0 && spec.channels != channels_) {
        shape_fail(index, "asau", std::to_string(spec.channels) + " channels", in);
      }
    }
    const std::string prefix = "layer" + std::to_string(index) + ".asau";
    a_ = store.add_block(prefix + ".a", channels_, spec.trainable.a, spec.params.a);
    b_ = store.add_block(prefix + ".b", channels_, spec.trainable.b, spec.params.b);
    alpha_ = store.add_block(prefix + ".alpha", channels_, spec.trainable.alpha, spec.params.alpha, kAsauGainFloor);
    beta_ = store.add_block(prefix + ".beta", channels_, spec.trainable.beta, spec.params.beta, kAsauGainFloor);
  }

  std::string describe() const override {
    const auto& m = spec_.trainable;
    std::string mask;
    for (bool f : {m.a, m.b, m.alpha, m.beta}) mask += f ? '1' : '0';
    return std::string("asau(") + (spec_.granularity == Granularity::per_channel ? "channel" : "layer") +
           ",mask=" + mask + ")";
  }

  Tensor forward(const ParamStore& store, const Tensor& in, LayerCache& cache) const override {
    const auto p = store.values();
    const std::size_t per_sample = in.row_size();
    Tensor out(in.shape());
    for (std::size_t i = 0; i < in.size(); ++i) {
      out[i] = asau_forward(in[i], params_at(p, channel_of(i, per_sample)));
    }
    cache.input = in;
    return out;
  }

  Tensor backward(ParamStore& store, const LayerCache& cache, const Tensor& g) const override {
    const Tensor& in = cache.input;
    const auto p = store.values();
    auto grads = store.grads();
    const auto& m = spec_.trainable;
    const std::size_t per_sample = in.row_size();
    Tensor dx(in.shape());
    for (std::size_t i = 0; i < in.size(); ++i) {
      const std::size_t c = channel_of(i, per_sample);
      const AsauGrad pg = asau_partials(in[i], params_at(p, c));
      const double go = g[i];
      dx[i] = pg.d_x * go;
      if (m.a) grads[a_ + c] += pg.d_a * go;
      if (m.b) grads[b_ + c] += pg.d_b * go;
      if (m.alpha) grads[alpha_ + c] += pg.d_alpha * go;
      if (m.beta) grads[beta_ + c] += pg.d_beta * go;
    }
    return dx;
  }

 private:
  std::size_t channel_of(std::size_t flat, std::size_t per_sample) const noexcept {
    return channels_ == 1 ? 0 : (flat % per_sample) / inner_;
  }

  AsauParams params_at(std::span<const double> p, std::size_t c) const noexcept {
    // Plain member assignment: training may legitimately pass through values
    // the validating constructor would reject, and those must propagate as NaN.
    AsauParams q;
    q.a = p[a_ + c];
    q.b = p[b_ + c];
    q.alpha = p[alpha_ + c];
    q.beta = p[beta_ + c];
    return q;
  }

  AsauActivation spec_;
  std::size_t inner_ = 1;
  std::size_t channels_ = 1;
  std::size_t a_ = 0, b_ = 0, alpha_ = 0, beta_ = 0;
};

class BaselineLayer final : public Layer {
 public:
  BaselineLayer(const BaselineActivation& spec, std::size_t index, const Shape& in, ParamStore& store)
      : spec_(spec) {
    in_ = in;
    out_ = in;
    const bool has_slope = std::holds_alternative<LeakyRelu>(spec.kind) || std::holds_alternative<PRelu>(spec.kind);
    if (spec.slope_trainable && has_slope) {
      const double init = std::visit(Overloaded{[](const LeakyRelu& k) { return k.slope; },
                                                [](const PRelu& k) { return k.slope; },
                                                [](const auto&) { return 0.0; }},
                                     spec.kind);
      slope_ = store.add_block("layer" + std::to_string(index) + "." + baseline_name(spec.kind) + ".slope", 1, true,
                               init);
    }
  }

  std::string describe() const override {
    return baseline_name(spec_.kind) + (slope_ ? "(trainable)" : "");
  }

  Tensor forward(const ParamStore& store, const Tensor& in, LayerCache& cache) const override {
    const BaselineKind kind = current_kind(store);
    Tensor out(in.shape());
    for (std::size_t i = 0; i < in.size(); ++i) out[i] = baseline_forward(kind, in[i]);
    cache.input = in;
    return out;
  }

  Tensor backward(ParamStore& store, const LayerCache& cache, const Tensor& g) const override {
    const Tensor& in = cache.input;
    const BaselineKind kind = current_kind(store);
    Tensor dx(in.shape());
    double dslope = 0.0;
    for (std::size_t i = 0; i < in.size(); ++i) {
      dx[i] = baseline_derivative(kind, in[i]) * g[i];
      if (in[i] < 0.0) dslope += in[i] * g[i];
    }
    if (slope_) store.grads()[*slope_] += dslope;
    return dx;
  }

 private:
  BaselineKind current_kind(const ParamStore& store) const {
    if (!slope_) return spec_.kind;
    const double s = store.values()[*slope_];
    if (std::holds_alternative<LeakyRelu>(spec_.kind)) return LeakyRelu{s};
    return PRelu{s};
  }

  BaselineActivation spec_;
  std::optional<std::size_t> slope_;
};

}  // namespace

std::shared_ptr<const Layer> make_layer(const LayerSpec& spec, std::size_t index, const Shape& in,
                                        ParamStore& store) {
  return std::visit(
      Overloaded{
          [&](const DenseSpec& s) -> std::shared_ptr<const Layer> {
            return std::make_shared<Dense>(s, index, in, store);
          },
          [&](const Conv2dSpec& s) -> std::shared_ptr<const Layer> {
            return std::make_shared<Conv2d>(s, index, in, store);
          },
          [&](const MaxPool2x2Spec&) -> std::shared_ptr<const Layer> {
            return std::make_shared<MaxPool2x2>(index, in);
          },
          [&](const FlattenSpec&) -> std::shared_ptr<const Layer> { return std::make_shared<Flatten>(index, in); },
          [&](const Upsample2xSpec&) -> std::shared_ptr<const Layer> {
            return std::make_shared<Upsample2x>(index, in);
          },
          [&](const ActivationLayerSpec& s) -> std::shared_ptr<const Layer> {
            return std::visit(Overloaded{[&](const AsauActivation& a) -> std::shared_ptr<const Layer> {
                                           return std::make_shared<AsauLayer>(a, index, in, store);
                                         },
                                         [&](const BaselineActivation& b) -> std::shared_ptr<const Layer> {
                                           return std::make_shared<BaselineLayer>(b, index, in, store);
                                         }},
                              s.activation);
          },
      },
      spec);
}

}  // namespace asaukit::detail
