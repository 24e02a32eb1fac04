#pragma once

// Gradient verification suites.
//
// The scalar suite checks asau_partials against central differences of an
// independent forward evaluation carried out in 113-bit floating point, so the
// finite-difference oracle itself contributes no visible error at the 1e-6
// relative tolerance. The network suite runs numeric_grad_check on a small
// conv/dense stack with fully trainable ASAU layers.

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <string_view>
#include <vector>

#include "asaukit/activation.hpp"
#include "asaukit/network.hpp"

namespace asaukit {

using PartialsFn = std::function<AsauGrad(double x, const AsauParams& p)>;

enum class AsauArg { x, a, b, alpha, beta };
inline constexpr std::array<AsauArg, 5> kAsauArgs{AsauArg::x, AsauArg::a, AsauArg::b, AsauArg::alpha, AsauArg::beta};

/// "d_x", "d_a", "d_b", "d_alpha", "d_beta".
std::string_view partial_name(AsauArg arg) noexcept;
double partial_of(const AsauGrad& g, AsauArg arg) noexcept;

/// Central difference of the extended-precision forward with step
/// 1e-9 * max(1, |argument|), rounded to double.
double reference_partial(AsauArg arg, double x, const AsauParams& p);

struct ScalarGradTolerance {
  double rel = 1e-6;
  /// Below this reference magnitude the check is |analytic - reference| < abs.
  double near_zero = 1e-8;
  double abs = 1e-8;
};

struct ScalarCheck {
  AsauArg arg = AsauArg::x;
  double x = 0.0;
  AsauParams params;
  double analytic = 0.0;
  double numeric = 0.0;
  double abs_err = 0.0;
  double rel_err = 0.0;
  /// Error divided by its threshold; > 1 fails.
  double score = 0.0;
};

struct ScalarGradSuiteReport {
  std::size_t samples = 0;
  std::size_t checks = 0;
  std::size_t failures = 0;
  std::array<std::size_t, 5> failures_by_arg{};
  std::array<double, 5> worst_score_by_arg{};
  std::vector<ScalarCheck> worst;  ///< highest scores first

  bool passed() const noexcept { return failures == 0; }
};

/// Samples x in [-5, 5], a and b in [-2, 2], alpha in (0, 3], beta in (0, 20]
/// from SplitMix64(seed) and checks all five partials of each sample.
ScalarGradSuiteReport run_scalar_gradient_suite(std::size_t samples, std::uint64_t seed,
                                                const PartialsFn& partials = asau_partials,
                                                const ScalarGradTolerance& tol = {}, std::size_t keep_worst = 10);

struct NetworkGradSuiteReport {
  GradCheckReport report;
  double tolerance = 1e-4;
  double step = 1e-5;

  bool passed() const { return report.passed(tolerance); }
};

/// Conv2d(1->2) + per-channel ASAU + maxpool + flatten + Dense(8->3) +
/// per-layer ASAU + Dense(3->2) on a 1x4x4 input, every ASAU scalar trainable.
Network make_gradcheck_network(std::uint64_t seed);

/// numeric_grad_check of make_gradcheck_network on a random batch under
/// softmax cross-entropy.
NetworkGradSuiteReport run_network_gradient_suite(std::uint64_t seed, double step = 1e-5, double tolerance = 1e-4);

}  // namespace asaukit
