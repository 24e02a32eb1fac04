#include "asaukit/gradcheck.hpp"


#include <gtest/gtest.h>

#include "asaukit/error.hpp"

namespace asaukit {
namespace {

TEST(ScalarSuite, PassesOnThousandSamples) {
  const auto r = run_scalar_gradient_suite(1000, 42);
  EXPECT_EQ(r.samples, 1000u);
  EXPECT_EQ(r.checks, 5000u);
  EXPECT_EQ(r.failures, 0u);
  EXPECT_TRUE(r.passed());
  EXPECT_LE(r.worst.size(), 10u);
  for (std::size_t i = 1; i < r.worst.size(); ++i) EXPECT_GE(r.worst[i - 1].score, r.worst[i].score);
}

TEST(ScalarSuite, PassesAcrossSeeds) {
  for (std::uint64_t seed : {1u, 2u, 3u, 99u}) EXPECT_TRUE(run_scalar_gradient_suite(500, seed).passed()) << seed;
}

TEST(ScalarSuite, CatchesSignErrorInAlphaPartial) {
  const PartialsFn broken = [](double x, const AsauParams& p) {
    AsauGrad g = asau_partials(x, p);
    g.d_alpha = -g.d_alpha;
    return g;
  };
  const auto r = run_scalar_gradient_suite(200, 7, broken);
  EXPECT_FALSE(r.passed());
  const auto alpha = static_cast<std::size_t>(AsauArg::alpha);
  EXPECT_GT(r.failures_by_arg[alpha], 0u);
  EXPECT_EQ(r.failures, r.failures_by_arg[alpha]);
  ASSERT_FALSE(r.worst.empty());
  EXPECT_EQ(r.worst.front().arg, AsauArg::alpha);
}

TEST(ScalarSuite, CatchesSmallScaleError) {
  const PartialsFn off = [](double x, const AsauParams& p) {
    AsauGrad g = asau_partials(x, p);
    g.d_beta *= 1.0 + 1e-5;
    return g;
  };
  EXPECT_FALSE(run_scalar_gradient_suite(200, 8, off).passed());
}

TEST(ScalarSuite, ZeroSamplesRejected) { EXPECT_THROW(run_scalar_gradient_suite(0, 1), PreconditionError); }

TEST(ScalarSuite, ReferenceIsPrecise) {
  // Slope at the origin is tanh(ln 2) = 3/5.
  EXPECT_NEAR(reference_partial(AsauArg::x, 0.0, AsauParams(0, 1, 1, 1)), 0.6, 1e-13);
  EXPECT_EQ(partial_name(AsauArg::beta), "d_beta");
}

TEST(NetworkSuite, PassesWithinTolerance) {
  const auto r = run_network_gradient_suite(7);
  EXPECT_TRUE(r.passed());
  EXPECT_EQ(r.tolerance, 1e-4);
  EXPECT_EQ(r.step, 1e-5);
  EXPECT_GT(r.report.entries.size(), 20u);
}

}  // namespace
}  // namespace asaukit
