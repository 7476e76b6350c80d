#include <gtest/gtest.h>

#include <set>

#include "wpgs/errors.hpp"
#include "wpgs/geometry.hpp"

using namespace wpgs;

TEST(BuildLattice, SingleSiteAtCenter) {
  const TrapLayout l = build_lattice(1, 1, 5 * kMicron, Eigen::Vector2d(1e-6, -2e-6), 3e-6);
  ASSERT_EQ(l.size(), 1);
  EXPECT_DOUBLE_EQ(l[0].x(), 1e-6);
  EXPECT_DOUBLE_EQ(l[0].y(), -2e-6);
  EXPECT_DOUBLE_EQ(l[0].z(), 3e-6);
}

TEST(BuildLattice, ThreeByThreeExtremes) {
  const TrapLayout l = build_lattice(3, 3, 5 * kMicron);
  ASSERT_EQ(l.size(), 9);
  const auto p = l.positions();
  EXPECT_NEAR(p.col(0).minCoeff(), -5e-6, 1e-18);
  EXPECT_NEAR(p.col(0).maxCoeff(), 5e-6, 1e-18);
  EXPECT_NEAR(p.col(1).minCoeff(), -5e-6, 1e-18);
  EXPECT_NEAR(p.col(1).maxCoeff(), 5e-6, 1e-18);
  // row-major: x varies fastest
  EXPECT_LT(l[0].x(), l[1].x());
  EXPECT_DOUBLE_EQ(l[0].y(), l[1].y());
  EXPECT_LT(l[0].y(), l[3].y());
}

TEST(BuildLattice, ThirtyTwoSquareSpan) {
  const TrapLayout l = build_lattice(32, 32, 5 * kMicron);
  ASSERT_EQ(l.size(), 1024);
  const auto p = l.positions();
  EXPECT_NEAR(p.col(0).maxCoeff() - p.col(0).minCoeff(), 155e-6, 1e-15);
  EXPECT_NEAR(p.col(1).maxCoeff() - p.col(1).minCoeff(), 155e-6, 1e-15);
}

TEST(BuildLattice, IdsAreSequential) {
  const TrapLayout l = build_lattice(4, 2, 1e-6, Eigen::Vector2d::Zero(), 0.0, 10);
  for (Eigen::Index n = 0; n < l.size(); ++n) EXPECT_EQ(l[n].id, 10 + n);
}

TEST(Layout, LayersSortedAndDistinct) {
  std::vector<TrapSite> s{{0, {0, 0, 3e-5}}, {1, {0, 0, -3e-5}}, {2, {1e-6, 0, 3e-5}}, {3, {0, 0, 0}}};
  const auto z = TrapLayout(s).layers();
  ASSERT_EQ(z.size(), 3u);
  EXPECT_LT(z[0], z[1]);
  EXPECT_LT(z[1], z[2]);
}

TEST(Instantiate, MinimalIsNineToNineUniform) {
  const Task t = instantiate_task(TaskSpec::minimal_3x3());
  EXPECT_EQ(t.source.size(), 9);
  EXPECT_EQ(t.target.size(), 9);
  EXPECT_TRUE((t.target_intensity.array() == 1.0).all());
  // only the middle row moves, along the lower-right diagonal, by 2 um
  for (Eigen::Index n = 0; n < 9; ++n) {
    const Eigen::Vector3d d = t.target[n].r - t.source[n].r;
    if (n >= 3 && n < 6) {
      EXPECT_NEAR(d.norm(), 2e-6, 1e-15);
      EXPECT_GT(d.x(), 0);
      EXPECT_LT(d.y(), 0);
    } else {
      EXPECT_EQ(d.norm(), 0.0);
    }
  }
}

TEST(Instantiate, FullFillingOccupiesEveryLatticeSite) {
  TaskSpec s = TaskSpec::reconfig_2d(false, 3);
  s.source_layers[0].filling = 1.0;
  const Task t = instantiate_task(s);
  EXPECT_EQ(t.source.size(), 100);
  EXPECT_EQ(t.target.size(), 64);
}

TEST(Instantiate, DeterministicInSeed) {
  const Task a = instantiate_task(TaskSpec::reconfig_2d(false, 7));
  const Task b = instantiate_task(TaskSpec::reconfig_2d(false, 7));
  ASSERT_EQ(a.source.size(), b.source.size());
  EXPECT_TRUE(a.source.positions() == b.source.positions());
}

TEST(Instantiate, FullScaleTwoDHasEnoughSources) {
  // 36 x 36 at 79% filling: the expected count 1024 sits far above 32 x 32 only on average,
  // so check a seed that is known to be feasible and the occupied fraction is near 0.79
  const Task t = instantiate_task(TaskSpec::reconfig_2d(true, 0));
  EXPECT_GE(t.source.size(), 1024);
  EXPECT_EQ(t.target.size(), 1024);
  EXPECT_NEAR(static_cast<double>(t.source.size()) / 1296.0, 0.79, 0.05);
}

TEST(Instantiate, ThreeLayersKeepLayerAssignment) {
  const Task t = instantiate_task(TaskSpec::reconfig_3d_layers(false, 1));
  std::set<double> zs;
  for (Eigen::Index n = 0; n < t.target.size(); ++n) zs.insert(t.target[n].z());
  EXPECT_EQ(zs.size(), 3u);
  ASSERT_EQ(t.target_layer.size(), static_cast<std::size_t>(t.target.size()));
}

TEST(Instantiate, BilayerTargetsAreNonUniform) {
  const Task t = instantiate_task(TaskSpec::offset_bilayer(false, 1));
  EXPECT_GT(t.target_intensity.maxCoeff(), t.target_intensity.minCoeff());
  EXPECT_TRUE((t.target_intensity.array() > 0).all());
}

TEST(Instantiate, CustomOversubscribedIsInfeasible) {
  TaskSpec s;
  s.kind = TaskKind::custom;
  s.custom_sources = {Eigen::Vector3d::Zero()};
  s.custom_targets = {Eigen::Vector3d::Zero(), Eigen::Vector3d(1e-6, 0, 0)};
  EXPECT_THROW(instantiate_task(s), InfeasibleError);
}

TEST(OpticalConfig, ValidateRejectsBadValues) {
  OpticalConfig c;
  c.grid_x = 0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = OpticalConfig{};
  c.wavelength = -1;
  EXPECT_THROW(c.validate(), ConfigError);
}

TEST(OpticalConfig, PixelCoordsCentered) {
  OpticalConfig c;
  c.grid_x = 4;
  const auto u = c.pixel_coords_x();
  EXPECT_DOUBLE_EQ(u(0), -1.5 * c.pixel_pitch);
  EXPECT_DOUBLE_EQ(u(3), 1.5 * c.pixel_pitch);
  EXPECT_NEAR(u.sum(), 0.0, 1e-20);
}

TEST(TaskKind, StringRoundTrip) {
  for (auto k : {TaskKind::minimal_3x3, TaskKind::reconfig_2d, TaskKind::reconfig_3d_layers, TaskKind::offset_bilayer,
                 TaskKind::custom})
    EXPECT_EQ(task_kind_from_string(to_string(k)), k);
  EXPECT_THROW(task_kind_from_string("nope"), ConfigError);
}
