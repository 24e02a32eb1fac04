#include "asaukit/approximation.hpp"

#include <cmath>
#include <sstream>
#include <vector>

#include <gtest/gtest.h>

#include "asaukit/error.hpp"

namespace asaukit {
namespace {

const GridSpec kDense{-5.0, 5.0, 1e-3};

TEST(GridSpec, CountsEndpointsInclusively) {
  EXPECT_EQ((GridSpec{-2, 2, 1}).count(), 5u);
  EXPECT_EQ(kDense.count(), 10001u);
  const auto pts = (GridSpec{-1, 1, 0.5}).points();
  ASSERT_EQ(pts.size(), 5u);
  EXPECT_EQ(pts.front(), -1.0);
  EXPECT_EQ(pts.back(), 1.0);
}

TEST(GridSpec, RejectsBadGrids) {
  EXPECT_THROW((GridSpec{1, 1, 0.1}).validate(), PreconditionError);
  EXPECT_THROW((GridSpec{2, 1, 0.1}).validate(), PreconditionError);
  EXPECT_THROW((GridSpec{-1, 1, 0}).validate(), PreconditionError);
  EXPECT_THROW((GridSpec{-1, 1, -0.1}).validate(), PreconditionError);
  EXPECT_THROW((GridSpec{-1, NAN, 0.1}).validate(), PreconditionError);
}

TEST(CurveTable, ReluTargetOnIntegerGrid) {
  const std::vector<AsauParams> ps{AsauParams(0, 1, 1, 1)};
  const auto t = build_curve_table(GridSpec{-2, 2, 1}, ps);
  EXPECT_EQ(t.x_grid, (std::vector<double>{-2, -1, 0, 1, 2}));
  EXPECT_EQ(t.target_values, (std::vector<double>{0, 0, 0, 1, 2}));
  ASSERT_EQ(t.series.size(), 1u);
  EXPECT_EQ(t.series[0].values.size(), 5u);
  EXPECT_EQ(t.series[0].params, ps[0]);
}

TEST(CurveTable, LinearCollapseSeries) {
  const std::vector<AsauParams> ps{AsauParams(1, 1, 1, 1)};
  const auto t = build_curve_table(GridSpec{-1, 1, 0.5}, ps);
  for (std::size_t i = 0; i < t.x_grid.size(); ++i) EXPECT_EQ(t.series[0].values[i], t.x_grid[i]);
}

TEST(CurveTable, LargeBetaTracksTarget) {
  const std::vector<AsauParams> ps{AsauParams(0, 1, 1, 1e4)};
  const auto t = build_curve_table(kDense, ps);
  double worst = 0;
  for (std::size_t i = 0; i < t.x_grid.size(); ++i) worst = std::max(worst, std::abs(t.series[0].values[i] - t.target_values[i]));
  EXPECT_LT(worst, 1e-3);
}

TEST(CurveTable, RejectsMixedSlopesAndEmptyList) {
  const std::vector<AsauParams> mixed{AsauParams(0, 1, 1, 1), AsauParams(0.01, 1, 1, 1)};
  EXPECT_THROW(build_curve_table(kDense, mixed), PreconditionError);
  EXPECT_THROW(build_curve_table(kDense, std::vector<AsauParams>{}), PreconditionError);
}

TEST(CurveTable, GridIsStrictlyIncreasing) {
  const std::vector<AsauParams> ps{AsauParams(0, 1, 1, 5)};
  const auto t = build_curve_table(GridSpec{-5, 5, 0.01}, ps);
  for (std::size_t i = 1; i < t.x_grid.size(); ++i) ASSERT_LT(t.x_grid[i - 1], t.x_grid[i]);
}

TEST(SupError, BetaTenMatchesBruteForce) {
  // Independent brute force in numpy over the same 10001 points.
  const double e = sup_error(AsauParams(0, 1, 1, 10), kDense);
  EXPECT_NEAR(e, 0.030884262309779, 1e-12);
  EXPECT_NEAR(e, 3.1e-2, 0.2 * 3.1e-2);
}

TEST(SupError, CollapsedCases) {
  EXPECT_EQ(sup_error(AsauParams(0.7, 0.7, 1.3, 4), kDense), 0.0);
  EXPECT_DOUBLE_EQ(sup_error(AsauParams(0, 1, 0, 3), kDense), 5.0);
}

TEST(BetaSweep, ReluTargetDecreasesStrictly) {
  const std::vector<double> betas{1, 10, 100, 1000, 1e4};
  const auto r = beta_sweep(AsauParams(0, 1, 1, 1), betas, kDense);
  ASSERT_EQ(r.sup_errors.size(), 5u);
  EXPECT_TRUE(r.strictly_decreasing());
  EXPECT_LT(r.sup_errors.back(), 1e-3);
  // numpy brute force on the same grid.
  const double expected[] = {0.30884338819, 0.030884262309779, 0.0030883579631, 3.034014613741e-4, 4.53989e-8};
  for (std::size_t i = 0; i < 5; ++i) EXPECT_NEAR(r.sup_errors[i] / expected[i], 1.0, 1e-6) << betas[i];
  EXPECT_EQ(r.grid.step, kDense.step);
}

TEST(BetaSweep, OtherTargetsDecreaseStrictly) {
  const std::vector<double> betas{1, 10, 100, 1000, 1e4};
  for (const auto& [a, b] : {std::pair{0.01, 1.0}, std::pair{1.0, 2.0}}) {
    const auto r = beta_sweep(AsauParams(a, b, 1, 1), betas, kDense);
    EXPECT_TRUE(r.strictly_decreasing()) << a << ',' << b;
    EXPECT_LT(r.sup_errors.back(), 1e-3);
  }
}

TEST(BetaSweep, ErrorDecaysLikeInverseBeta) {
  const std::vector<double> betas{1, 10, 100, 1000, 1e4};
  for (const auto& [a, b] : {std::pair{0.0, 1.0}, std::pair{0.01, 1.0}, std::pair{1.0, 2.0}, std::pair{-0.5, 0.5}}) {
    const auto r = beta_sweep(AsauParams(a, b, 1, 1), betas, kDense);
    for (std::size_t i = 0; i < betas.size(); ++i) EXPECT_LT(r.sup_errors[i] * betas[i], 0.5) << a << ',' << b;
  }
}

TEST(BetaSweep, SingleBetaAndBadLists) {
  const std::vector<double> one{10};
  const auto r = beta_sweep(AsauParams(0, 1, 1, 1), one, kDense);
  ASSERT_EQ(r.sup_errors.size(), 1u);
  EXPECT_TRUE(r.strictly_decreasing());
  EXPECT_THROW(beta_sweep(AsauParams(), std::vector<double>{}, kDense), PreconditionError);
  EXPECT_THROW(beta_sweep(AsauParams(), std::vector<double>{10, 1}, kDense), PreconditionError);
  EXPECT_THROW(beta_sweep(AsauParams(), std::vector<double>{1, 1}, kDense), PreconditionError);
  EXPECT_THROW(beta_sweep(AsauParams(), std::vector<double>{0, 1}, kDense), PreconditionError);
}

TEST(SupError, StableUnderGridRefinement) {
  for (const auto& p : {AsauParams(0, 1, 1, 10), AsauParams(0.01, 1, 2, 3), AsauParams(1, 2, 0.5, 50)}) {
    for (double step : {0.1, 0.01, 1e-3}) {
      const double coarse = sup_error(p, GridSpec{-5, 5, step});
      const double fine = sup_error(p, GridSpec{-5, 5, step / 2});
      const double lipschitz = (p.b - p.a + std::abs(p.a)) * step;
      EXPECT_LE(fine - coarse, lipschitz) << step;
    }
  }
}

TEST(Labels, RoundTrip) {
  const AsauParams p(0.1, -2.5e-3, 1.0 / 3.0, 12345.678);
  const auto label = series_label(p);
  EXPECT_EQ(label.find(','), std::string::npos);
  const auto back = parse_series_label(label);
  ASSERT_TRUE(back.has_value());
  EXPECT_EQ(*back, p);
  EXPECT_FALSE(parse_series_label("relu").has_value());
  EXPECT_FALSE(parse_series_label("asau[a=1;b=2;alpha=x;beta=1]").has_value());
}

TEST(CurveCsv, RoundTripsExactly) {
  const std::vector<AsauParams> ps{AsauParams(0.01, 1, 0.5, 1), AsauParams(0.01, 1, 2, 20), AsauParams(0.01, 1, 1, 5)};
  const auto t = build_curve_table(GridSpec{-5, 5, 0.01}, ps);
  std::stringstream s;
  write_curve_csv(s, t);
  const std::string text = s.str();
  EXPECT_EQ(text.substr(0, text.find('\n')),
            "x,target," + series_label(ps[0]) + "," + series_label(ps[1]) + "," + series_label(ps[2]));
  const auto back = read_curve_csv(s);
  EXPECT_EQ(back.x_grid, t.x_grid);
  EXPECT_EQ(back.target_values, t.target_values);
  ASSERT_EQ(back.series.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(back.series[i].params, t.series[i].params);
    EXPECT_EQ(back.series[i].values, t.series[i].values);
  }
}

TEST(CurveCsv, RejectsMalformedInput) {
  std::stringstream bad_header("x,y\n0,0\n");
  EXPECT_THROW(read_curve_csv(bad_header), FormatError);
  std::stringstream ragged("x,target,asau[a=0;b=1;alpha=1;beta=1]\n0,0\n");
  EXPECT_THROW(read_curve_csv(ragged), FormatError);
}

TEST(SweepCsv, Layout) {
  const auto r = beta_sweep(AsauParams(), std::vector<double>{1, 10}, GridSpec{-1, 1, 0.5});
  std::ostringstream s;
  write_sweep_csv(s, r);
  const std::string text = s.str();
  EXPECT_EQ(text.substr(0, text.find('\n')), "beta,sup_error");
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 3);
}

TEST(FormatReal, SeventeenDigits) {
  EXPECT_EQ(format_real(0.1), "0.10000000000000001");
  EXPECT_EQ(std::stod(format_real(1.0 / 3.0)), 1.0 / 3.0);
}

}  // namespace
}  // namespace asaukit
