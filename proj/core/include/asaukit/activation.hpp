#pragma once

// Scalar kernels for the adaptive smooth activation unit (ASAU) family.
//
//   asau(x) = a*x + (b - a)*x*tanh(alpha * softplus(beta * (b - a) * x))
//
// a smooth stand-in for max(a*x, b*x) that sharpens as beta grows. All math is
// double precision; every function here is pure.

#include <string>
#include <variant>

namespace asaukit {

/// The four scalars of one ASAU instance. Defaults select the ReLU-like regime.
struct AsauParams {
  double a = 0.0;      ///< lower linear slope
  double b = 1.0;      ///< upper linear slope
  double alpha = 1.0;  ///< inner smoothing gain
  double beta = 1.0;   ///< sharpness

  AsauParams() = default;

  /// Throws PreconditionError if any value is NaN or infinite.
  AsauParams(double a, double b, double alpha, double beta);

  AsauParams with_beta(double new_beta) const { return {a, b, alpha, new_beta}; }
  AsauParams with_alpha(double new_alpha) const { return {a, b, new_alpha, beta}; }

  friend bool operator==(const AsauParams&, const AsauParams&) = default;
};

/// Partial derivatives of asau_forward with respect to each of its inputs.
struct AsauGrad {
  double d_x = 0.0;
  double d_a = 0.0;
  double d_b = 0.0;
  double d_alpha = 0.0;
  double d_beta = 0.0;
};

struct Relu {};
struct LeakyRelu {
  double slope = 0.01;
};
struct PRelu {
  double slope = 0.25;
};
struct Mish {};

/// Non-adaptive comparison activations.
using BaselineKind = std::variant<Relu, LeakyRelu, PRelu, Mish>;

std::string baseline_name(const BaselineKind& kind);

/// ln(1 + e^x) without overflow: x + ln(1 + e^-x) for x > 0, ln(1 + e^x) otherwise.
double stable_softplus(double x) noexcept;

/// Logistic function, the derivative of stable_softplus.
double stable_sigmoid(double x) noexcept;

/// max(x1, x2); ties return the common value.
double exact_max2(double x1, double x2) noexcept;

/// x * tanh(alpha * softplus(beta * x)); alpha = beta = 1 is Mish.
double param_mish(double x, double alpha, double beta) noexcept;

/// Smooth max(x1, x2) = x1 + param_mish(x2 - x1, alpha, beta).
double asau_pair(double x1, double x2, double alpha, double beta) noexcept;

/// Smooth max(a*x, b*x). Evaluated literally; not symmetric in (a, b).
double asau_forward(double x, const AsauParams& p) noexcept;

/// All five analytic partials of asau_forward at (x, p).
AsauGrad asau_partials(double x, const AsauParams& p) noexcept;

double baseline_forward(const BaselineKind& kind, double x) noexcept;

/// Derivative w.r.t. x. At the kink of ReLU-style baselines the right-hand
/// derivative (1) is returned.
double baseline_derivative(const BaselineKind& kind, double x) noexcept;

}  // namespace asaukit
