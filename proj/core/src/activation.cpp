#include "asaukit/activation.hpp"

#include <cmath>

#include "asaukit/error.hpp"

namespace asaukit {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

// 1 - tanh(y)^2 without the cancellation of the naive form when |y| is large.
double sech2(double y) noexcept {
  const double c = std::cosh(y);
  return 1.0 / (c * c);
}

}  // namespace

AsauParams::AsauParams(double a_, double b_, double alpha_, double beta_)
    : a(a_), b(b_), alpha(alpha_), beta(beta_) {
  if (!std::isfinite(a) || !std::isfinite(b) || !std::isfinite(alpha) || !std::isfinite(beta)) {
    throw PreconditionError("AsauParams: all of a, b, alpha, beta must be finite");
  }
}

std::string baseline_name(const BaselineKind& kind) {
  return std::visit(Overloaded{
                        [](const Relu&) { return std::string("relu"); },
                        [](const LeakyRelu&) { return std::string("lrelu"); },
                        [](const PRelu&) { return std::string("prelu"); },
                        [](const Mish&) { return std::string("mish"); },
                    },
                    kind);
}

double stable_softplus(double x) noexcept {
  if (x > 0.0) {
    return x + std::log1p(std::exp(-x));
  }
  return std::log1p(std::exp(x));
}

double stable_sigmoid(double x) noexcept {
  if (x >= 0.0) {
    return 1.0 / (1.0 + std::exp(-x));
  }
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double exact_max2(double x1, double x2) noexcept { return x1 >= x2 ? x1 : x2; }

double param_mish(double x, double alpha, double beta) noexcept {
  return x * std::tanh(alpha * stable_softplus(beta * x));
}

double asau_pair(double x1, double x2, double alpha, double beta) noexcept {
  return x1 + param_mish(x2 - x1, alpha, beta);
}

double asau_forward(double x, const AsauParams& p) noexcept {
  return asau_pair(p.a * x, p.b * x, p.alpha, p.beta);
}

AsauGrad asau_partials(double x, const AsauParams& p) noexcept {
  // With d = b - a, u = d*x, z = beta*u, s = softplus(z), T = tanh(alpha*s):
  //   f = a*x + u*T
  // and every partial is a chain through u, alpha or beta with
  //   dT/dz = alpha * sigmoid(z) * sech^2(alpha*s).
  const double d = p.b - p.a;
  const double u = p.b * x - p.a * x;
  const double z = p.beta * u;
  const double s = stable_softplus(z);
  const double t = std::tanh(p.alpha * s);
  const double dt_ds = sech2(p.alpha * s);
  const double dt_dz = p.alpha * stable_sigmoid(z) * dt_ds;

  // d f / d u at fixed x (through both the u factor and T).
  const double df_du = t + u * dt_dz * p.beta;

  AsauGrad g;
  g.d_x = p.a + d * df_du;
  g.d_a = x - x * df_du;
  g.d_b = x * df_du;
  g.d_alpha = u * dt_ds * s;
  g.d_beta = u * dt_dz * u;
  return g;
}

double baseline_forward(const BaselineKind& kind, double x) noexcept {
  return std::visit(Overloaded{
                        [x](const Relu&) { return x > 0.0 ? x : 0.0; },
                        [x](const LeakyRelu& k) { return x >= 0.0 ? x : k.slope * x; },
                        [x](const PRelu& k) { return x >= 0.0 ? x : k.slope * x; },
                        [x](const Mish&) { return param_mish(x, 1.0, 1.0); },
                    },
                    kind);
}

double baseline_derivative(const BaselineKind& kind, double x) noexcept {
  return std::visit(Overloaded{
                        [x](const Relu&) { return x >= 0.0 ? 1.0 : 0.0; },
                        [x](const LeakyRelu& k) { return x >= 0.0 ? 1.0 : k.slope; },
                        [x](const PRelu& k) { return x >= 0.0 ? 1.0 : k.slope; },
                        [x](const Mish&) {
                          const double s = stable_softplus(x);
                          return std::tanh(s) + x * sech2(s) * stable_sigmoid(x);
                        },
                    },
                    kind);
}

}  // namespace asaukit
