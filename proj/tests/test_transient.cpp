#include <gtest/gtest.h>

#include <numbers>

#include "support.hpp"
#include "wpgs/solvers.hpp"
#include "wpgs/transient.hpp"

using namespace wpgs;
using namespace wpgs::testing;

namespace {
constexpr double kPi = std::numbers::pi;

struct Pair {
  SeparablePropagator<double> prop;
  PhaseMask<double> m0, m1;
};

// m1 = m0 + scale * gaussian pattern
Pair small_excursion(Rng& g, double scale, Eigen::Index grid = 24) {
  const auto cfg = small_optics(grid, grid);
  Pair p{build_separable(cfg, random_layout(g, 6)), random_mask<double>(grid, grid, g()), {}};
  std::normal_distribution<double> nd;
  p.m1 = p.m0;
  for (Eigen::Index i = 0; i < p.m1.size(); ++i) p.m1(i) += scale * nd(g);
  return p;
}
}  // namespace

TEST(Interpolate, Examples) {
  PhaseMask<double> m0(1, 2), m1(1, 2);
  m0 << 0.3, 1.0;
  m1 << 0.3 + kPi / 2, 1.0 - 4 * kPi;
  EXPECT_EQ(pixel_interpolate(m0, m1, 1.0), m0);
  const auto half = pixel_interpolate(m0, m1, 0.5);
  EXPECT_NEAR(half(0, 0), 0.3 + kPi / 4, 1e-15);
  // whole turns are wrapped away before interpolating
  EXPECT_NEAR(half(0, 1), 1.0, 1e-12);
  const auto end = pixel_interpolate(m0, m1, 0.0);
  for (Eigen::Index i = 0; i < 2; ++i) EXPECT_NEAR(std::abs(std::polar(1.0, end(i)) - std::polar(1.0, m1(i))), 0, 1e-12);
}

TEST(Exact, Endpoints) {
  Rng g(1);
  const auto p = small_excursion(g, 1.0);
  EXPECT_LE(max_rel(transient_exact(p.prop, p.m0, p.m1, 1.0), forward(p.prop, p.m0)), 1e-12);
  EXPECT_LE(max_rel(transient_exact(p.prop, p.m0, p.m1, 0.0), forward(p.prop, p.m1)), 1e-12);
}

// property: the exact transient is the forward model of the interpolated mask
TEST(Exact, EqualsForwardOfInterpolatedMask) {
  Rng g(2);
  for (int c = 0; c < 20; ++c) {
    const auto cfg = small_optics(uniform_int(g, 4, 40), uniform_int(g, 4, 40));
    const auto prop = build_separable(cfg, random_layout(g, uniform_int(g, 1, 10)));
    const auto m0 = random_mask<double>(cfg.grid_x, cfg.grid_y, g());
    auto m1 = random_mask<double>(cfg.grid_x, cfg.grid_y, g());
    m1(0, 0) = m0(0, 0);          // zero excursion
    m1(1, 1) = m0(1, 1) + kPi;    // half-turn excursion
    for (int ia = 1; ia <= 9; ++ia) {
      const double a = ia / 10.0;
      EXPECT_LE(max_rel(transient_exact(prop, m0, m1, a), forward(prop, pixel_interpolate(m0, m1, a))), 1e-12);
    }
  }
}

TEST(Exact, MatchesDenseOracleOnThreeByThree) {
  const auto cfg = small_optics(32, 32);
  const auto layout = build_lattice(3, 3, 5 * kMicron);
  const auto prop = build_separable(cfg, layout);
  const auto m0 = random_mask<double>(32, 32, 1), m1 = random_mask<double>(32, 32, 2);
  const auto dense = forward_dense(build_dense(cfg, layout), pixel_interpolate(m0, m1, 0.5));
  EXPECT_LE(max_rel(transient_exact(prop, m0, m1, 0.5), dense), 1e-10);
}

TEST(Leading, ExamplesAndIdenticalFrames) {
  Rng g(3);
  const auto e0 = random_field(g, 4), e1 = random_field(g, 4);
  EXPECT_EQ(transient_leading(e0, e1, 0.0), e1);
  EXPECT_EQ(transient_leading(e0, e1, 1.0), e0);
  for (double a : {0.1, 0.5, 0.9}) EXPECT_LE(max_rel(transient_leading(e0, e0, a), e0), 1e-15);
}

TEST(Leading, ErrorIsFirstOrderInMeanSquaredExcursion) {
  Rng g(4);
  const auto base = small_excursion(g, 1.0, 32);
  const PhaseMask<double> pattern = base.m1 - base.m0;
  std::vector<double> lx, ly;
  for (double s : {0.01, 0.03, 0.1, 0.3}) {
    const PhaseMask<double> m1 = base.m0 + s * pattern;
    const auto e0 = forward(base.prop, base.m0), e1 = forward(base.prop, m1);
    const double err = (transient_exact(base.prop, base.m0, m1, 0.5) - transient_leading(e0, e1, 0.5)).norm() / e0.norm();
    lx.push_back(std::log(mean_sq_excursion(base.m0, m1)));
    ly.push_back(std::log(err));
  }
  const double slope = (ly.back() - ly.front()) / (lx.back() - lx.front());
  EXPECT_NEAR(slope, 1.0, 0.15);
}

TEST(Second, ReducesToLeadingAndEndpoint) {
  Rng g(5);
  const auto e0 = random_field(g, 5), e1 = random_field(g, 5);
  EXPECT_LE(max_rel(transient_second(e0, e1, 0.4, 0.0), transient_leading(e0, e1, 0.4)), 1e-15);
  const auto f = second_order_factors(0.0, 0.2);
  EXPECT_DOUBLE_EQ(f.alpha_l1, 1.0);
  EXPECT_LE(max_rel(transient_second(e0, e1, 0.0, 0.2), e1), 1e-15);
  EXPECT_THROW(transient_second(e0, e1, 0.5, -0.1), ConfigError);
}

// regime: per-pixel excursions bounded by 0.3 rad
TEST(Second, NoWorseThanLeadingForModerateExcursions) {
  Rng g(6);
  for (int c = 0; c < 20; ++c) {
    const auto cfg = small_optics(24, 24);
    const auto prop = build_separable(cfg, random_layout(g, 5));
    const auto m0 = random_mask<double>(24, 24, g());
    PhaseMask<double> m1 = m0;
    const double cap = uniform(g, 0.05, 0.3);
    for (Eigen::Index i = 0; i < m1.size(); ++i) m1(i) += uniform(g, -cap, cap);
    ASSERT_LE(excursion(m0, m1).cwiseAbs().maxCoeff(), 0.3);
    const auto e0 = forward(prop, m0), e1 = forward(prop, m1);
    const double msq = mean_sq_excursion(m0, m1);
    for (double a : {0.2, 0.5, 0.8}) {
      const auto ex = transient_exact(prop, m0, m1, a);
      EXPECT_LE((ex - transient_second(e0, e1, a, msq)).norm(), (ex - transient_leading(e0, e1, a)).norm())
          << "case " << c << " a " << a;
    }
  }
}

TEST(Residual, ZeroForUniformExcursion) {
  PhaseMask<double> m0 = PhaseMask<double>::Zero(4, 4), m1 = PhaseMask<double>::Constant(4, 4, 0.2);
  const auto eps = excursion_fluctuation(m0, m1);
  EXPECT_NEAR(eps.cwiseAbs().maxCoeff(), 0, 1e-16);
  const Eigen::VectorXd rn = Eigen::VectorXd::Constant(3, 2.0);
  EXPECT_EQ(residual_bound(rn, eps), Eigen::VectorXd::Zero(3));
}

TEST(Residual, SinglePixelClosedForm) {
  PhaseMask<double> m0 = PhaseMask<double>::Zero(3, 3), m1 = m0;
  m1(1, 2) = 0.3;
  const auto eps = excursion_fluctuation(m0, m1);
  // eps = 0.09 - 0.01 at the pixel, -0.01 elsewhere
  const double expect = std::sqrt(0.08 * 0.08 + 8 * 0.01 * 0.01);
  const Eigen::VectorXd rn = (Eigen::VectorXd(2) << 1.0, 3.0).finished();
  const auto b = residual_bound(rn, eps);
  EXPECT_NEAR(b(0), expect, 1e-15);
  EXPECT_NEAR(b(1), 3 * expect, 1e-15);
}

TEST(Residual, DirectValueWithinBound) {
  Rng g(7);
  for (int c = 0; c < 10; ++c) {
    const auto p = small_excursion(g, uniform(g, 0.05, 1.0), 20);
    const auto eps = excursion_fluctuation(p.m0, p.m1);
    const auto r = residual(p.prop, p.m0, eps);
    const auto bound = residual_bound(row_norms(p.prop), eps);
    for (Eigen::Index n = 0; n < r.size(); ++n) EXPECT_LE(std::abs(r(n)), bound(n) * (1 + 1e-12));
  }
}

TEST(IntensityModel, Values) {
  for (double a : {0.0, 0.2, 0.5, 1.0}) EXPECT_NEAR(intensity_model(a, 0.0), 1.0, 1e-15);
  EXPECT_NEAR(intensity_model(0.5, kPi), 0.0, 1e-15);
  EXPECT_NEAR(intensity_model(0.5, kPi / 2), 0.5, 1e-15);
}

TEST(IntensityModel, DipDeepensMonotonically) {
  double prev = intensity_model(0.5, 0.0);
  for (int k = 1; k <= 100; ++k) {
    const double v = intensity_model(0.5, kPi * k / 100);
    EXPECT_LT(v, prev);
    prev = v;
  }
}

TEST(IntensityExpansion, IdentitiesWithFieldForms) {
  EXPECT_DOUBLE_EQ(transient_intensity_expansion(2.0, 2.0, 0.0, 0.3), 2.0);
  Rng g(8);
  const auto e0 = random_field(g, 6), e1 = random_field(g, 6);
  const double msq = 0.05;
  for (double a : {0.1, 0.45, 0.8}) {
    const auto lead = transient_leading(e0, e1, a);
    const auto sec = transient_second(e0, e1, a, msq);
    for (Eigen::Index n = 0; n < 6; ++n) {
      const double dphi = std::arg(e1(n) / e0(n));
      EXPECT_NEAR(transient_intensity_expansion(std::norm(e0(n)), std::norm(e1(n)), dphi, a), std::norm(lead(n)),
                  1e-12 * (std::norm(e0(n)) + std::norm(e1(n))));
      EXPECT_NEAR(transient_intensity_second(std::norm(e0(n)), std::norm(e1(n)), dphi, a, msq), std::norm(sec(n)),
                  1e-12 * (std::norm(e0(n)) + std::norm(e1(n))));
    }
  }
}

TEST(Refresh, ModelSamples) {
  RefreshModel m;
  const auto a = m.a_values();
  ASSERT_EQ(a.size(), 21u);
  EXPECT_EQ(a.front(), 1.0);
  EXPECT_EQ(a.back(), 0.0);
  EXPECT_DOUBLE_EQ(m.time_of(0.5), m.tau * std::log(2.0));
  m.samples_per_refresh = 1;
  EXPECT_THROW(m.validate(), ConfigError);
}

TEST(Refresh, IdenticalMasksGiveConstantRatios) {
  Rng g(9);
  const auto prop = build_separable(small_optics(16, 16), random_layout(g, 4));
  const auto m = random_mask<double>(16, 16, 3);
  const auto e = forward(prop, m);
  const Eigen::VectorXd i0 = Eigen::VectorXd::Constant(4, 2.0);
  for (auto order : {TransientOrder::leading, TransientOrder::second, TransientOrder::exact}) {
    RefreshModel model;
    model.order = order;
    model.samples_per_refresh = 7;
    const auto s = sample_refresh(prop, m, m, model, i0);
    ASSERT_EQ(s.size(), 7u);
    std::size_t total = 0;
    for (const auto& x : s) {
      total += static_cast<std::size_t>(x.ratio.size());
      for (Eigen::Index n = 0; n < 4; ++n) EXPECT_NEAR(x.ratio(n), std::norm(e(n)) / 2.0, 1e-12 * std::norm(e(n)));
    }
    EXPECT_EQ(total, 4u * 7u);
  }
}

TEST(Refresh, MovingExactMatchesStaticWhenSitesAgree) {
  Rng g(10);
  const auto cfg = small_optics(16, 16);
  const auto layout = random_layout(g, 3);
  const auto prop = build_separable(cfg, layout);
  const auto m0 = random_mask<double>(16, 16, 1), m1 = random_mask<double>(16, 16, 2);
  RefreshModel model;
  model.order = TransientOrder::exact;
  model.samples_per_refresh = 5;
  const Eigen::VectorXd i0 = Eigen::VectorXd::Ones(3);
  const auto a = sample_refresh(prop, m0, m1, model, i0);
  const auto b = sample_refresh(cfg, layout, layout, m0, m1, forward(prop, m0), forward(prop, m1), model, i0);
  for (std::size_t k = 0; k < a.size(); ++k) EXPECT_LE(max_rel(b[k].field, a[k].field), 1e-12);
}

TEST(Refresh, RejectsBadNormalization) {
  Rng g(11);
  const auto prop = build_separable(small_optics(8, 8), random_layout(g, 2));
  const auto m = random_mask<double>(8, 8, 1);
  EXPECT_THROW(sample_refresh(prop, m, m, RefreshModel{}, Eigen::VectorXd::Ones(3).eval()), DimensionError);
  EXPECT_THROW(sample_refresh(prop, m, m, RefreshModel{}, Eigen::VectorXd::Zero(2).eval()), ConfigError);
}

TEST(TransientOrder, StringRoundTrip) {
  for (auto o : {TransientOrder::exact, TransientOrder::leading, TransientOrder::second})
    EXPECT_EQ(transient_order_from_string(to_string(o)), o);
  EXPECT_THROW(transient_order_from_string("third"), ConfigError);
}
