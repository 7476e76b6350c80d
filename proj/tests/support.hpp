#pragma once

// Small random generators shared by the property tests.

#include <cstdint>
#include <random>
#include <vector>

#include "wpgs/geometry.hpp"
#include "wpgs/propagation.hpp"

namespace wpgs::testing {

using Rng = std::mt19937_64;

inline double uniform(Rng& g, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(g); }
inline int uniform_int(Rng& g, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(g); }

inline OpticalConfig small_optics(Eigen::Index gx, Eigen::Index gy, double waist = 0.0) {
  OpticalConfig c;
  c.grid_x = gx;
  c.grid_y = gy;
  c.illumination_waist = waist;
  return c;
}

inline TrapLayout random_layout(Rng& g, int n, double half_width_um = 20, bool three_d = true) {
  std::vector<TrapSite> sites;
  const double zs[3] = {-30 * kMicron, 0.0, 30 * kMicron};
  for (int i = 0; i < n; ++i)
    sites.push_back({static_cast<std::uint32_t>(i),
                     Eigen::Vector3d(uniform(g, -half_width_um, half_width_um) * kMicron,
                                     uniform(g, -half_width_um, half_width_um) * kMicron,
                                     three_d ? zs[uniform_int(g, 0, 2)] : 0.0)});
  return TrapLayout(std::move(sites));
}

inline TrapField<double> random_field(Rng& g, Eigen::Index n) {
  std::normal_distribution<double> nd;
  TrapField<double> e(n);
  for (Eigen::Index i = 0; i < n; ++i) e(i) = {nd(g), nd(g)};
  return e;
}

inline double max_rel(const TrapField<double>& a, const TrapField<double>& ref) {
  return (a - ref).cwiseAbs().maxCoeff() / ref.cwiseAbs().maxCoeff();
}

}  // namespace wpgs::testing
