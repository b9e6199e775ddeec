#include <gtest/gtest.h>

#include "support.hpp"

namespace wcs {
namespace {

using testing::planted;

TEST(Score, EqualWeightsOnCleanVideo) {
  EXPECT_EQ(score({1, 1, 1, 0}, WeightVector::equal()), 0.75);
  EXPECT_EQ(display_score(0.75), 75.0);
}

TEST(Score, ConstantModel) {
  const WeightVector w{0, 0, 0, 0, 0.5};
  EXPECT_EQ(score({0.2, 0.9, 0.1, 0.7}, w), 0.5);
  EXPECT_EQ(score({1, 1, 1, 0}, w), 0.5);
}

TEST(Score, Projection) {
  SubmetricVector s;
  s.op = 0.6;
  EXPECT_EQ(score(s, {1, 0, 0, 0, 0}), 0.6);
}

TEST(Score, NegativeWeightIsRejected) {
  EXPECT_THROW(score({1, 1, 1, 0}, {0.5, -0.1, 0, 0, 0}), ValidationError);
}

TEST(Score, DisplayIsClamped) {
  EXPECT_EQ(display_score(-0.2), 0.0);
  EXPECT_EQ(display_score(1.7), 100.0);
}

TEST(Fit, RecoversPenaltyFormWithAbsorbedConstant) {
  // H = 0.5 op + 0.5 (1 - fp) = 0.5 op - 0.5 fp + 0.5
  const auto data = planted(60, {0.5, 0, 0, 0.5}, 0.5, 0.0, 11);
  const FitResult f = fit_weights(data);
  EXPECT_NEAR(f.weights.w_op, 0.5, 1e-6);
  EXPECT_NEAR(f.weights.w_rs, 0.0, 1e-6);
  EXPECT_NEAR(f.weights.w_cc, 0.0, 1e-6);
  EXPECT_NEAR(f.weights.w_fp, 0.5, 1e-6);
  EXPECT_NEAR(f.weights.b, 0.5, 1e-6);
  EXPECT_LT(f.kkt_residual, 1e-9);
}

TEST(Fit, ConstantTargetGivesBiasOnly) {
  auto data = planted(20, {0, 0, 0, 0}, 3.0, 0.0, 12);
  const FitResult f = fit_weights(data);
  EXPECT_EQ(f.weights.w_op + f.weights.w_rs + f.weights.w_cc + f.weights.w_fp, 0.0);
  EXPECT_NEAR(f.weights.b, 3.0, 1e-12);
}

TEST(Fit, NegativeOptimumIsClampedWithNonNegativeMultiplier) {
  const auto data = planted(40, {0.4, 0.3, -0.6, 0.2}, 0.1, 0.0, 13);
  const FitResult f = fit_weights(data);
  EXPECT_EQ(f.weights.w_cc, 0.0);
  EXPECT_GE(f.multipliers[2], 0.0);
  const auto ref = oracle::enumerate_fit(testing::rows_of(data), testing::targets_of(data));
  EXPECT_NEAR(f.weights.w_op, ref.w[0], 1e-9);
  EXPECT_NEAR(f.weights.w_rs, ref.w[1], 1e-9);
  EXPECT_NEAR(f.weights.w_cc, ref.w[2], 1e-9);
  EXPECT_NEAR(f.weights.w_fp, ref.w[3], 1e-9);
  EXPECT_NEAR(f.weights.b, ref.b, 1e-9);
}

TEST(Fit, StandardizedFitReportsRawScaleWeights) {
  const auto data = planted(80, {0.3, 0.1, 0.2, 0.4}, 0.05, 0.0, 14);
  FitOptions o;
  o.standardize = true;
  const FitResult a = fit_weights(data), b = fit_weights(data, o);
  EXPECT_TRUE(b.standardized);
  EXPECT_NEAR(a.weights.w_op, b.weights.w_op, 1e-9);
  EXPECT_NEAR(a.weights.w_fp, b.weights.w_fp, 1e-9);
  EXPECT_NEAR(a.weights.b, b.weights.b, 1e-9);
}

TEST(Fit, TooFewSamples) { EXPECT_THROW(fit_weights(planted(4, {1, 0, 0, 0}, 0, 0, 1)), FitError); }

TEST(Fit, AllConstantColumns) {
  std::vector<Sample> data(6, Sample{{0.5, 0.5, 0.5, 0.5}, 1.0});
  data[0].target = 2.0;
  EXPECT_THROW(fit_weights(data), FitError);
}

TEST(Fit, CollinearColumnsAreNamed) {
  auto data = planted(30, {0.2, 0.2, 0.2, 0.2}, 0, 0.0, 15);
  for (auto& s : data) s.sub.cc = s.sub.op;
  try {
    fit_weights(data);
    FAIL();
  } catch (const FitError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("op"), std::string::npos);
    EXPECT_NE(msg.find("cc"), std::string::npos);
  }
}

TEST(Nnls, MatchesEnumerationOnNegativeOptima) {
  for (std::uint64_t seed = 0; seed < 25; ++seed) {
    const auto data = testing::negative_optimum_problem(seed);
    const FitResult f = fit_weights(data);
    const auto ref = oracle::enumerate_fit(testing::rows_of(data), testing::targets_of(data));
    const double got[4] = {f.weights.w_op, f.weights.w_rs, f.weights.w_cc, f.weights.w_fp};
    for (int j = 0; j < 4; ++j) EXPECT_NEAR(got[j], ref.w[std::size_t(j)], 1e-9) << "seed " << seed;
    EXPECT_NEAR(f.weights.b, ref.b, 1e-9) << "seed " << seed;
  }
}

TEST(Ablate, FiveLabeledRows) {
  const auto data = planted(50, {0.5, 0.2, 0.1, 0.3}, 0, 0.01, 16);
  const std::vector<Sample> train(data.begin(), data.begin() + 40), val(data.begin() + 40, data.end());
  const auto rows = ablate(train, val);
  ASSERT_EQ(rows.size(), 5u);
  EXPECT_EQ(rows[0].label, "full");
  EXPECT_EQ(rows[1].label, "drop_op");
  EXPECT_EQ(rows[2].label, "drop_rs");
  EXPECT_EQ(rows[3].label, "drop_cc");
  EXPECT_EQ(rows[4].label, "drop_fp");
  EXPECT_EQ(rows[1].fit.weights.w_op, 0.0);
}

TEST(Ablate, DroppingTheOnlyActiveFeatureDestroysValidation) {
  const auto data = planted(1000, {1, 0, 0, 0}, 0, 0.0, 17);
  const std::vector<Sample> train(data.begin(), data.begin() + 800), val(data.begin() + 800, data.end());
  const auto rows = ablate(train, val);
  EXPECT_GT(rows[0].validation_r, 0.99);
  EXPECT_LT(std::abs(rows[1].validation_r), 0.2);
  for (std::size_t k = 2; k < 5; ++k) EXPECT_NEAR(rows[k].train_rmse, rows[0].train_rmse, 1e-9);
}

TEST(WeightFile, RoundTripIsBitExact) {
  const auto dir = testing::scratch_dir("weights_rt");
  const FitResult f = fit_weights(planted(30, {0.3, 0.1, 0.2, 0.4}, 1.0 / 3.0, 0.02, 18));
  write_weights(f.weights, dir / "w.json", &f);
  const WeightVector back = read_weights(dir / "w.json");
  EXPECT_EQ(back.w_op, f.weights.w_op);
  EXPECT_EQ(back.w_rs, f.weights.w_rs);
  EXPECT_EQ(back.w_cc, f.weights.w_cc);
  EXPECT_EQ(back.w_fp, f.weights.w_fp);
  EXPECT_EQ(back.b, f.weights.b);
  write_weights(back, dir / "again.json", &f);
  EXPECT_EQ(detail::read_file(dir / "w.json"), detail::read_file(dir / "again.json"));
}

TEST(WeightFile, MissingFieldIsAParseError) {
  EXPECT_THROW(weights_from_json(json{{"w_op", 1.0}}), ParseError);
}

}  // namespace
}  // namespace wcs
