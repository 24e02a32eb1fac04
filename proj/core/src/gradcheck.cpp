#include "asaukit/gradcheck.hpp"

#include <algorithm>
#include <cmath>

#include <boost/math/special_functions/log1p.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>

#include "asaukit/error.hpp"
#include "asaukit/losses.hpp"
#include "asaukit/rng.hpp"

namespace asaukit {

namespace {

using Quad = boost::multiprecision::cpp_bin_float_quad;

struct QuadArgs {
  Quad x, a, b, alpha, beta;
};

Quad softplus_q(const Quad& z) {
  using boost::multiprecision::exp;
  if (z > 0) return z + boost::math::log1p(Quad(exp(-z)));
  return boost::math::log1p(Quad(exp(z)));
}

Quad asau_q(const QuadArgs& q) {
  using boost::multiprecision::tanh;
  const Quad d = q.b - q.a;
  return q.a * q.x + d * q.x * tanh(q.alpha * softplus_q(q.beta * d * q.x));
}

Quad& component(QuadArgs& q, AsauArg arg) {
  switch (arg) {
    case AsauArg::x: return q.x;
    case AsauArg::a: return q.a;
    case AsauArg::b: return q.b;
    case AsauArg::alpha: return q.alpha;
    case AsauArg::beta: break;
  }
  return q.beta;
}

std::size_t arg_index(AsauArg arg) noexcept { return static_cast<std::size_t>(arg); }

}  // namespace

std::string_view partial_name(AsauArg arg) noexcept {
  switch (arg) {
    case AsauArg::x: return "d_x";
    case AsauArg::a: return "d_a";
    case AsauArg::b: return "d_b";
    case AsauArg::alpha: return "d_alpha";
    case AsauArg::beta: break;
  }
  return "d_beta";
}

double partial_of(const AsauGrad& g, AsauArg arg) noexcept {
  switch (arg) {
    case AsauArg::x: return g.d_x;
    case AsauArg::a: return g.d_a;
    case AsauArg::b: return g.d_b;
    case AsauArg::alpha: return g.d_alpha;
    case AsauArg::beta: break;
  }
  return g.d_beta;
}

double reference_partial(AsauArg arg, double x, const AsauParams& p) {
  const QuadArgs base{Quad(x), Quad(p.a), Quad(p.b), Quad(p.alpha), Quad(p.beta)};
  QuadArgs plus = base;
  QuadArgs minus = base;
  const Quad center = component(plus, arg);
  const Quad h = Quad(1e-9) * std::max(1.0, std::abs(static_cast<double>(center)));
  component(plus, arg) = center + h;
  component(minus, arg) = center - h;
  return static_cast<double>((asau_q(plus) - asau_q(minus)) / (2 * h));
}

ScalarGradSuiteReport run_scalar_gradient_suite(std::size_t samples, std::uint64_t seed, const PartialsFn& partials,
                                                const ScalarGradTolerance& tol, std::size_t keep_worst) {
  if (samples == 0) throw PreconditionError("gradient suite needs at least one sample");
  SplitMix64 rng(seed);
  ScalarGradSuiteReport report;
  report.samples = samples;
  std::vector<ScalarCheck> all;
  all.reserve(samples * kAsauArgs.size());
  for (std::size_t s = 0; s < samples; ++s) {
    const double x = rng.uniform(-5.0, 5.0);
    const double a = rng.uniform(-2.0, 2.0);
    const double b = rng.uniform(-2.0, 2.0);
    const double alpha = 3.0 * (1.0 - rng.uniform());  // (0, 3]
    const double beta = 20.0 * (1.0 - rng.uniform());  // (0, 20]
    const AsauParams p(a, b, alpha, beta);
    const AsauGrad g = partials(x, p);
    for (AsauArg arg : kAsauArgs) {
      ScalarCheck c;
      c.arg = arg;
      c.x = x;
      c.params = p;
      c.analytic = partial_of(g, arg);
      c.numeric = reference_partial(arg, x, p);
      c.abs_err = std::abs(c.analytic - c.numeric);
      const double scale = std::max(std::abs(c.analytic), std::abs(c.numeric));
      c.rel_err = scale > 0.0 ? c.abs_err / scale : 0.0;
      c.score = std::abs(c.numeric) < tol.near_zero ? c.abs_err / tol.abs : c.rel_err / tol.rel;
      if (!std::isfinite(c.score)) c.score = std::numeric_limits<double>::infinity();
      const std::size_t k = arg_index(arg);
      report.worst_score_by_arg[k] = std::max(report.worst_score_by_arg[k], c.score);
      if (!(c.score < 1.0)) {
        ++report.failures;
        ++report.failures_by_arg[k];
      }
      ++report.checks;
      all.push_back(c);
    }
  }
  const std::size_t keep = std::min(keep_worst, all.size());
  std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(keep), all.end(),
                    [](const ScalarCheck& l, const ScalarCheck& r) { return l.score > r.score; });
  report.worst.assign(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(keep));
  return report;
}

Network make_gradcheck_network(std::uint64_t seed) {
  AsauActivation channel;
  channel.params = AsauParams(0.1, 1.0, 1.0, 1.5);
  channel.trainable = {true, true, true, true};
  channel.granularity = Granularity::per_channel;
  AsauActivation layer = channel;
  layer.params = AsauParams(-0.2, 0.9, 0.8, 2.0);
  layer.granularity = Granularity::per_layer;

  Network net({1, 4, 4},
              {Conv2dSpec{1, 2}, ActivationLayerSpec{channel}, MaxPool2x2Spec{}, FlattenSpec{}, DenseSpec{8, 3},
               ActivationLayerSpec{layer}, DenseSpec{3, 2}},
              seed);
  // Non-zero biases so that bias gradients are exercised away from the origin.
  SplitMix64 rng(seed ^ 0xB1A5ull);
  auto& store = net.params();
  for (const auto& block : store.blocks()) {
    if (block.name.ends_with(".bias")) {
      for (std::size_t i = block.offset; i < block.offset + block.size; ++i) store.set_value(i, rng.uniform(-0.3, 0.3));
    }
  }
  return net;
}

NetworkGradSuiteReport run_network_gradient_suite(std::uint64_t seed, double step, double tolerance) {
  Network net = make_gradcheck_network(seed);
  SplitMix64 rng(seed + 1);
  constexpr std::size_t kBatch = 3;
  Tensor input({kBatch, 1, 4, 4});
  for (double& v : input.data()) v = rng.uniform(-1.0, 1.0);
  std::vector<int> labels(kBatch);
  for (int& l : labels) l = static_cast<int>(rng.below(2));

  NetworkGradSuiteReport out;
  out.step = step;
  out.tolerance = tolerance;
  out.report = numeric_grad_check(net, input, [&](const Tensor& logits) { return softmax_ce_loss(logits, labels); }, step);
  return out;
}

}  // namespace asaukit
