#include <gtest/gtest.h>

#include <numbers>

#include "support.hpp"
#include "wpgs/propagation.hpp"
#include "wpgs/solvers.hpp"

using namespace wpgs;
using namespace wpgs::testing;

namespace {
constexpr double kPi = std::numbers::pi;
}

TEST(Separable, KernelsHaveUnitModulus) {
  Rng g(1);
  const auto p = build_separable(small_optics(16, 12), random_layout(g, 5));
  EXPECT_NEAR((p.U.cwiseAbs().array() - 1).abs().maxCoeff(), 0, 1e-14);
  EXPECT_NEAR((p.V.cwiseAbs().array() - 1).abs().maxCoeff(), 0, 1e-14);
  EXPECT_NEAR((p.axial.cwiseAbs().array() - 1).abs().maxCoeff(), 0, 1e-14);
}

TEST(Separable, InFocusKernelsAreLinearRamps) {
  Rng g(2);
  const auto p = build_separable(small_optics(16, 16), random_layout(g, 4, 20, false));
  // equal phase increments along a row when z = 0
  for (Eigen::Index n = 0; n < p.traps(); ++n) {
    const auto step = p.U(n, 1) / p.U(n, 0);
    for (Eigen::Index j = 1; j + 1 < p.grid_x(); ++j) EXPECT_NEAR(std::abs(p.U(n, j + 1) / p.U(n, j) - step), 0, 1e-12);
  }
}

TEST(Separable, OnAxisTrapHasFlatKernels) {
  const auto cfg = small_optics(8, 8, 0.05e-3);
  const auto p = build_separable(cfg, build_lattice(1, 1, 1e-6));
  EXPECT_NEAR((p.U.array() - Complex<double>(1)).abs().maxCoeff(), 0, 1e-15);
  EXPECT_NEAR((p.V.array() - Complex<double>(1)).abs().maxCoeff(), 0, 1e-15);
  const PhaseMask<double> zero = PhaseMask<double>::Zero(8, 8);
  const auto e = forward(p, zero);
  EXPECT_NEAR(std::abs(e(0) - p.constant(0) * cfg.illumination().sum()), 0, 1e-12 * std::abs(e(0)));
}

TEST(Separable, MatchesDenseFactorization) {
  Rng g(3);
  const auto cfg = small_optics(64, 64);
  const auto layout = build_lattice(3, 3, 5 * kMicron, Eigen::Vector2d::Zero(), 10 * kMicron);
  const auto p = build_separable(cfg, layout);
  const auto d = build_dense(cfg, layout);
  double worst = 0;
  for (Eigen::Index n = 0; n < p.traps(); ++n)
    for (Eigen::Index jx = 0; jx < 64; ++jx)
      for (Eigen::Index jy = 0; jy < 64; ++jy) {
        const auto sep = p.constant(n) * p.illumination(jx, jy) * p.U(n, jx) * p.V(n, jy);
        const auto dense = d.A(n, jx * 64 + jy);
        worst = std::max(worst, std::abs(sep - dense) / std::abs(dense));
      }
  EXPECT_LE(worst, 1e-12);
}

TEST(Dense, SingleTrapEqualModulus) {
  const auto d = build_dense(small_optics(2, 2), build_lattice(1, 1, 1e-6));
  ASSERT_EQ(d.A.rows(), 1);
  ASSERT_EQ(d.A.cols(), 4);
  for (Eigen::Index j = 1; j < 4; ++j) EXPECT_NEAR(std::abs(d.A(0, j)), std::abs(d.A(0, 0)), 1e-20);
}

TEST(Dense, ZeroMaskGivesRowSums) {
  Rng g(4);
  const auto d = build_dense(small_optics(6, 5), random_layout(g, 3));
  const auto e = forward_dense(d, PhaseMask<double>::Zero(6, 5).eval());
  EXPECT_LE(max_rel(e, d.A.rowwise().sum()), 1e-13);
}

TEST(Dense, RefusesHugeMatrices) {
  Rng g(5);
  EXPECT_THROW(build_dense(small_optics(2048, 2048), random_layout(g, 2)), DimensionError);
}

// property: separable forward equals the dense product on random layouts, grids and masks
TEST(Forward, SeparableMatchesDenseRandom) {
  Rng g(6);
  for (int c = 0; c < 20; ++c) {
    const auto cfg = small_optics(uniform_int(g, 4, 64), uniform_int(g, 4, 64), c % 2 ? 0.4e-3 : 0.0);
    const auto layout = random_layout(g, uniform_int(g, 1, 16));
    const auto mask = random_mask<double>(cfg.grid_x, cfg.grid_y, g());
    EXPECT_LE(max_rel(forward(build_separable(cfg, layout), mask), forward_dense(build_dense(cfg, layout), mask)), 1e-10)
        << "case " << c;
  }
}

TEST(Forward, MirrorTrapsWithSymmetricMaskHaveEqualIntensity) {
  const auto cfg = small_optics(32, 32);
  std::vector<TrapSite> s{{0, {7e-6, 0, 0}}, {1, {-7e-6, 0, 0}}};
  const auto p = build_separable(cfg, TrapLayout(s));
  PhaseMask<double> m = random_mask<double>(32, 32, 9);
  // symmetric under u -> -u; pixel coordinates are centered so jx <-> 31 - jx
  for (Eigen::Index jx = 0; jx < 16; ++jx) m.row(31 - jx) = m.row(jx);
  const auto i = intensities(forward(p, m));
  EXPECT_NEAR(i(0), i(1), 1e-12 * i(0));
}

TEST(Forward, GlobalPhaseCovariance) {
  Rng g(8);
  const auto cfg = small_optics(20, 24);
  const auto p = build_separable(cfg, random_layout(g, 6));
  const auto m = random_mask<double>(20, 24, 3);
  const double theta = 0.7;
  const auto e0 = forward(p, m);
  const PhaseMask<double> shifted = m.array() + theta;
  const auto e1 = forward(p, shifted);
  EXPECT_LE(max_rel(e1, (e0 * std::polar(1.0, theta)).eval()), 1e-13);
}

TEST(Forward, RejectsMismatchedMask) {
  Rng g(9);
  const auto p = build_separable(small_optics(8, 8), random_layout(g, 2));
  EXPECT_THROW(forward(p, PhaseMask<double>::Zero(8, 9).eval()), DimensionError);
}

TEST(Forward, FloatPrecisionTracksDouble) {
  Rng g(10);
  const auto cfg = small_optics(32, 32);
  const auto layout = random_layout(g, 5);
  const auto m = random_mask<double>(32, 32, 4);
  const auto ed = forward(build_separable<double>(cfg, layout), m);
  const auto ef = forward(build_separable<float>(cfg, layout), m.cast<float>().eval());
  EXPECT_LE(max_rel(ef.cast<Complex<double>>().eval(), ed), 1e-4);
}

TEST(Adjoint, ZeroSourceGivesZeroMaskAndFullDiagnostic) {
  Rng g(11);
  const auto p = build_separable(small_optics(9, 7), random_layout(g, 3));
  const auto bp = adjoint_phase(p, ComplexVector<double>::Zero(3).eval());
  EXPECT_EQ(bp.undefined_pixels, 63);
  EXPECT_TRUE((bp.mask.array() == 0).all());
}

TEST(Adjoint, SingleTrapGivesSteeringGrating) {
  const auto cfg = small_optics(32, 32);
  std::vector<TrapSite> s{{0, {6e-6, -4e-6, 0}}};
  const auto p = build_separable(cfg, TrapLayout(s));
  const ComplexVector<double> b = p.constant.conjugate();
  const auto bp = adjoint_phase(p, b);
  // grating phase: 2 pi (x u + y v) / (lambda f), up to a global constant
  const auto u = cfg.pixel_coords_x(), v = cfg.pixel_coords_y();
  const double k = 2 * kPi / (cfg.wavelength * cfg.focal_length);
  const double offset = bp.mask(0, 0) - k * (6e-6 * u(0) - 4e-6 * v(0));
  for (Eigen::Index jx = 0; jx < 32; ++jx)
    for (Eigen::Index jy = 0; jy < 32; ++jy)
      EXPECT_NEAR(wrap_phase(bp.mask(jx, jy) - k * (6e-6 * u(jx) - 4e-6 * v(jy)) - offset), 0, 1e-10);
  // the grating focuses everything into the trap: |E| reaches its upper bound
  const auto e = forward(p, bp.mask);
  EXPECT_NEAR(std::abs(e(0)), std::abs(p.constant(0)) * cfg.illumination().sum(), 1e-10 * std::abs(e(0)));
}

TEST(Adjoint, IsTheAdjointOfForward) {
  // <A x, b> = <x, A^H b> for random complex pixels x and trap vector b
  Rng g(12);
  const auto cfg = small_optics(12, 10, 0.1e-3);
  const auto layout = random_layout(g, 4);
  const auto p = build_separable(cfg, layout);
  const auto d = build_dense(cfg, layout);
  const auto b = random_field(g, 4);
  const ComplexVector<double> kb = p.constant.conjugate().cwiseProduct(b);
  const ComplexMatrix<double> back = p.U.adjoint() * (kb.asDiagonal() * p.V.conjugate());
  const ComplexVector<double> dense_back = d.A.adjoint() * b;
  for (Eigen::Index jx = 0; jx < 12; ++jx)
    for (Eigen::Index jy = 0; jy < 10; ++jy) {
      const auto expect = dense_back(jx * 10 + jy);
      EXPECT_NEAR(std::abs(back(jx, jy) * cfg.illumination()(jx, jy) - expect), 0, 1e-12 * dense_back.cwiseAbs().maxCoeff());
    }
}

TEST(Adjoint, WellSeparatedTrapsReceiveRequestedPhases) {
  // one phase-only back-propagation lands trap phases near arg(b) up to a global offset.
  // Measured on 3x3 lattices (64-256 px grids, 10-20 um spacing): rms 0.18-0.21 rad, worst 0.64 rad.
  // Random phases would give rms ~1.8 rad.
  const auto cfg = small_optics(128, 128);
  const auto p = build_separable(cfg, build_lattice(3, 3, 20 * kMicron));
  double worst = 0, sq = 0;
  for (int draw = 0; draw < 20; ++draw) {
    Rng g(draw);
    TrapField<double> want(9);
    for (int n = 0; n < 9; ++n) want(n) = std::polar(1.0, uniform(g, -kPi, kPi));
    const auto e = forward(p, adjoint_phase(p, p.constant.conjugate().cwiseProduct(want).eval()).mask);
    const double offset = std::arg(e.cwiseQuotient(want).sum());
    for (int n = 0; n < 9; ++n) {
      const double d = std::abs(wrap_phase(std::arg(e(n) / want(n)) - offset));
      worst = std::max(worst, d);
      sq += d * d;
    }
  }
  EXPECT_LE(std::sqrt(sq / 180), 0.3);
  EXPECT_LE(worst, 0.8);
}

TEST(Phase, WrapConvention) {
  EXPECT_DOUBLE_EQ(wrap_phase(kPi), kPi);
  EXPECT_DOUBLE_EQ(wrap_phase(-kPi), kPi);
  EXPECT_NEAR(wrap_phase(3 * kPi / 2), -kPi / 2, 1e-15);
  EXPECT_NEAR(wrap_phase(0.25 + 6 * kPi), 0.25, 1e-14);
  EXPECT_DOUBLE_EQ(wrap_phase(0.0), 0.0);
}

TEST(Phase, CanonicalRange) {
  PhaseMask<double> m(2, 2);
  m << -0.1, 2 * kPi, 7.0, -20.0;
  const auto c = canonical(m);
  EXPECT_TRUE((c.array() >= 0).all());
  EXPECT_TRUE((c.array() < 2 * kPi).all());
  EXPECT_DOUBLE_EQ(c(0, 1), 0.0);
}

TEST(RowNorms, MatchDenseRows) {
  Rng g(14);
  const auto cfg = small_optics(10, 14, 0.2e-3);
  const auto layout = random_layout(g, 5);
  const auto rn = row_norms(build_separable(cfg, layout));
  const auto d = build_dense(cfg, layout);
  for (Eigen::Index n = 0; n < 5; ++n) EXPECT_NEAR(rn(n), d.A.row(n).norm(), 1e-12 * rn(n));
}
