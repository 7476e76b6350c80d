#include <gtest/gtest.h>

#include <numbers>
#include <numeric>

#include "wpgs/errors.hpp"
#include "wpgs/metrics.hpp"

using namespace wpgs;

namespace {
constexpr double kPi = std::numbers::pi;

Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd x(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double d : v) x(i++) = d;
  return x;
}

double total(const Histogram& h) { return std::accumulate(h.percent.begin(), h.percent.end(), 0.0); }
}  // namespace

TEST(Uniformity, Examples) {
  EXPECT_EQ(uniformity(vec({1, 1, 1})), 1.0);
  EXPECT_EQ(uniformity(vec({1, 3})), 0.5);
  EXPECT_EQ(uniformity(vec({0, 1})), 0.0);
}

TEST(Uniformity, RejectsDegenerateInput) {
  EXPECT_THROW(uniformity(Eigen::VectorXd()), DimensionError);
  EXPECT_THROW(uniformity(vec({0, 0})), ConfigError);
  EXPECT_THROW(uniformity(vec({1, -1})), ConfigError);
}

TEST(PhaseDiff, Examples) {
  EXPECT_EQ(phase_diff(vec({0.4, -2.0}), vec({0.4, -2.0})), Eigen::VectorXd::Zero(2));
  EXPECT_NEAR(phase_diff(vec({0}), vec({3 * kPi / 2}))(0), -kPi / 2, 1e-15);
  EXPECT_EQ(phase_diff(vec({0}), vec({kPi}))(0), kPi);
  EXPECT_EQ(phase_diff(vec({kPi}), vec({0}))(0), kPi);
}

TEST(PhaseDiff, LengthMismatch) { EXPECT_THROW(phase_diff(vec({0}), vec({0, 1})), DimensionError); }

TEST(Aggregate, ZerosAndSymmetricPair) {
  const auto z = aggregate({Eigen::VectorXd::Zero(5)});
  EXPECT_EQ(z.std, 0.0);
  EXPECT_EQ(z.count, 5u);
  const auto p = aggregate({vec({0.3}), vec({-0.3})});
  EXPECT_DOUBLE_EQ(p.std, 0.3);
  EXPECT_DOUBLE_EQ(p.std_about_zero, 0.3);
  EXPECT_EQ(p.mean, 0.0);
}

TEST(Aggregate, StdIsAboutTheMean) {
  const auto s = aggregate({vec({0.1, 0.3})});
  EXPECT_DOUBLE_EQ(s.mean, 0.2);
  EXPECT_NEAR(s.std, 0.1, 1e-16);
  EXPECT_NEAR(s.std_about_zero, std::sqrt(0.05), 1e-16);
}

TEST(Histogram, MassIsOneHundredPercent) {
  std::vector<double> x;
  for (int i = 0; i < 997; ++i) x.push_back(std::sin(i) * 4);  // some fall outside [-pi, pi]
  const auto h = histogram(x, 101, -kPi, kPi);
  EXPECT_EQ(h.bins(), 101u);
  EXPECT_NEAR(total(h), 100.0, 1e-12);
  EXPECT_GT(h.percent.front(), 0.0);
  EXPECT_GT(h.percent.back(), 0.0);
}

TEST(Histogram, EdgesAndPlacement) {
  const auto h = histogram({0.0, 0.5, 1.0, 1.5}, 4, 0.0, 2.0);
  EXPECT_EQ(h.percent, (std::vector<double>{25, 25, 25, 25}));
  EXPECT_EQ(h.left(0), 0.0);
  EXPECT_EQ(h.right(3), 2.0);
  // the upper edge belongs to the last bin
  const auto top = histogram({2.0}, 4, 0.0, 2.0);
  EXPECT_EQ(top.percent.back(), 100.0);
}

TEST(Histogram, Validation) {
  EXPECT_THROW(histogram({1.0}, 0, 0.0, 1.0), ConfigError);
  EXPECT_THROW(histogram({1.0}, 3, 1.0, 1.0), ConfigError);
}

TEST(Transition, ConstantSequence) {
  const auto t = transition_distribution(std::vector<double>(50, 1.0));
  EXPECT_EQ(t.min, 1.0);
  EXPECT_EQ(t.fraction_below, (std::vector<double>{0, 0, 0}));
  EXPECT_EQ(t.hist.bins(), 200u);
  EXPECT_NEAR(total(t.hist), 100.0, 1e-12);
}

TEST(Transition, ThresholdFractionsAreStrict) {
  const std::vector<double> r{0.80, 0.86, 0.90, 0.91, 0.95, 0.96, 1.0, 1.1};
  const auto t = transition_distribution(r);
  EXPECT_EQ(t.min, 0.80);
  EXPECT_EQ(t.fraction_below[0], 1.0 / 8);  // 0.80 only
  EXPECT_EQ(t.fraction_below[1], 3.0 / 8);  // 0.80 0.86 0.90
  EXPECT_EQ(t.fraction_below[2], 5.0 / 8);  // ... 0.91 0.95
  EXPECT_EQ(t.count, 8u);
}

TEST(Report, NuPerFrame) {
  MetricsInputs in;
  in.frame_intensity = {vec({1, 1}), vec({1, 3})};
  in.dphi = {vec({0.1, -0.1})};
  in.ratio = {vec({0.9, 1.0})};
  const auto r = make_report(in);
  EXPECT_EQ(r.nu, (std::vector<double>{1.0, 0.5}));
  EXPECT_EQ(r.nu_min, 0.5);
  EXPECT_DOUBLE_EQ(r.phase.std, 0.1);
  EXPECT_EQ(r.transition.min, 0.9);
}

TEST(LayerSplit, SingleLayerEqualsGlobal) {
  MetricsInputs in;
  in.frame_intensity = {vec({1, 2, 3})};
  in.dphi = {vec({0.1, 0.2, -0.3})};
  in.ratio = {vec({0.9, 0.95, 1.0})};
  const auto layout = build_lattice(3, 1, 1e-6);
  const auto split = layer_split(in, layout);
  ASSERT_EQ(split.size(), 1u);
  const auto& only = split.begin()->second;
  const auto global = make_report(in);
  EXPECT_EQ(only.nu, global.nu);
  EXPECT_EQ(only.phase.std, global.phase.std);
  EXPECT_EQ(only.transition.min, global.transition.min);
}

TEST(LayerSplit, PerturbedLayerOnlyDropsItsOwnNu) {
  std::vector<TrapSite> s{{0, {0, 0, -1e-5}}, {1, {1e-6, 0, -1e-5}}, {2, {0, 0, 1e-5}}, {3, {1e-6, 0, 1e-5}}};
  MetricsInputs in;
  in.frame_intensity = {vec({1, 1, 1, 3})};
  in.dphi = {vec({0, 0, 0, 0})};
  in.ratio = {vec({1, 1, 1, 1})};
  const auto split = layer_split(in, TrapLayout(s));
  ASSERT_EQ(split.size(), 2u);
  EXPECT_EQ(split.at(-1e-5).nu_min, 1.0);
  EXPECT_EQ(split.at(1e-5).nu_min, 0.5);
}
