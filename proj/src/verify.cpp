#include "wpgs/verify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

#include "wpgs/planner.hpp"
#include "wpgs/propagation.hpp"
#include "wpgs/solvers.hpp"
#include "wpgs/transient.hpp"

namespace wpgs {

namespace {

using Rng = std::mt19937_64;

double uniform(Rng& g, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(g); }
int uniform_int(Rng& g, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(g); }

TrapLayout random_layout(Rng& g, int n) {
  std::vector<TrapSite> sites;
  const double zs[3] = {-30 * kMicron, 0.0, 30 * kMicron};
  for (int i = 0; i < n; ++i)
    sites.push_back({static_cast<std::uint32_t>(i),
                     Eigen::Vector3d(uniform(g, -20, 20) * kMicron, uniform(g, -20, 20) * kMicron, zs[uniform_int(g, 0, 2)])});
  return TrapLayout(std::move(sites));
}

OpticalConfig small_optics(Rng& g, int max_grid) {
  OpticalConfig c;
  c.grid_x = uniform_int(g, 4, max_grid);
  c.grid_y = uniform_int(g, 4, max_grid);
  if (uniform_int(g, 0, 1)) c.illumination_waist = uniform(g, 0.2e-3, 1e-3);
  return c;
}

double rel_err(const TrapField<double>& a, const TrapField<double>& ref) {
  return (a - ref).cwiseAbs().maxCoeff() / ref.cwiseAbs().maxCoeff();
}

TrapField<double> random_field(Rng& g, int n) {
  std::normal_distribution<double> nd;
  TrapField<double> e(n);
  for (int i = 0; i < n; ++i) e(i) = {nd(g), nd(g)};
  return e;
}

Eigen::VectorXd random_weights(Rng& g, int n) {
  Eigen::VectorXd w(n);
  for (int i = 0; i < n; ++i) w(i) = uniform(g, 0.5, 1.5);
  return w / w.mean();
}

std::string fmt(double x) {
  std::ostringstream s;
  s.precision(3);
  s << x;
  return s.str();
}

}  // namespace

CheckResult verify_propagation(int cases, std::uint64_t seed) {
  Rng g(seed);
  CheckResult r{"separable forward matches dense forward", true, 0.0, 1e-10, ""};
  for (int c = 0; c < cases; ++c) {
    const OpticalConfig cfg = small_optics(g, 64);
    const TrapLayout layout = random_layout(g, uniform_int(g, 1, 16));
    const auto mask = random_mask<double>(cfg.grid_x, cfg.grid_y, g());
    const double e = rel_err(forward(build_separable(cfg, layout), mask), forward_dense(build_dense(cfg, layout), mask));
    r.measured = std::max(r.measured, e);
  }
  r.passed = r.measured <= r.tolerance;
  r.detail = std::to_string(cases) + " cases, worst relative error " + fmt(r.measured);
  return r;
}

CheckResult verify_transient_exactness(int pairs, std::uint64_t seed) {
  Rng g(seed);
  CheckResult r{"exact transient equals forward of the interpolated mask", true, 0.0, 1e-12, ""};
  for (int p = 0; p < pairs; ++p) {
    const OpticalConfig cfg = small_optics(g, 48);
    const auto prop = build_separable(cfg, random_layout(g, uniform_int(g, 1, 12)));
    const auto m0 = random_mask<double>(cfg.grid_x, cfg.grid_y, g());
    auto m1 = random_mask<double>(cfg.grid_x, cfg.grid_y, g());
    // seed some pixels with the degenerate excursions 0 and pi
    for (int k = 0; k < 8; ++k) {
      const Eigen::Index jx = uniform_int(g, 0, static_cast<int>(cfg.grid_x) - 1);
      const Eigen::Index jy = uniform_int(g, 0, static_cast<int>(cfg.grid_y) - 1);
      m1(jx, jy) = m0(jx, jy) + (k % 2 ? std::numbers::pi : 0.0);
    }
    for (int ia = 1; ia <= 9; ++ia) {
      const double a = ia / 10.0;
      const double e = rel_err(transient_exact(prop, m0, m1, a), forward(prop, pixel_interpolate(m0, m1, a)));
      r.measured = std::max(r.measured, e);
    }
  }
  r.passed = r.measured <= r.tolerance;
  r.detail = std::to_string(pairs) + " mask pairs x 9 values of a, worst relative error " + fmt(r.measured);
  return r;
}

CheckResult verify_leading_order_slope(std::uint64_t seed) {
  Rng g(seed);
  OpticalConfig cfg;
  cfg.grid_x = cfg.grid_y = 32;
  const auto prop = build_separable(cfg, random_layout(g, 9));
  const auto m0 = random_mask<double>(cfg.grid_x, cfg.grid_y, g());
  PhaseMask<double> pattern(cfg.grid_x, cfg.grid_y);
  std::normal_distribution<double> nd;
  for (Eigen::Index i = 0; i < pattern.size(); ++i) pattern(i) = nd(g);
  pattern /= std::sqrt(pattern.squaredNorm() / static_cast<double>(pattern.size()));

  std::vector<double> xs, ys;
  const int steps = 8;
  for (int k = 0; k < steps; ++k) {
    const double scale = 0.01 * std::pow(30.0, static_cast<double>(k) / (steps - 1));
    const PhaseMask<double> m1 = m0 + scale * pattern;
    const double msq = mean_sq_excursion(m0, m1);
    const auto e0 = forward(prop, m0), e1 = forward(prop, m1);
    double err = 0;
    for (double a : {0.25, 0.5, 0.75})
      err += (transient_exact(prop, m0, m1, a) - transient_leading(e0, e1, a)).norm() / e0.norm();
    xs.push_back(std::log(msq));
    ys.push_back(std::log(err));
  }
  const double n = static_cast<double>(xs.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i] / n;
    my += ys[i] / n;
  }
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxy += (xs[i] - mx) * (ys[i] - my);
    sxx += (xs[i] - mx) * (xs[i] - mx);
  }
  CheckResult r{"leading-order error scales with <dphi^2>", true, sxy / sxx, 0.15, ""};
  r.passed = std::abs(r.measured - 1.0) <= r.tolerance;
  r.detail = "log-log slope " + fmt(r.measured) + " over excursion scales 0.01-0.3 rad (want 1 +/- 0.15)";
  return r;
}

CheckResult verify_scale_optimality(int instances, int perturbations, std::uint64_t seed) {
  Rng g(seed);
  CheckResult r{"closed-form scale beats random perturbations", true, 0.0, 0.0, ""};
  int violations = 0;
  double tightest = std::numeric_limits<double>::infinity();
  for (int i = 0; i < instances; ++i) {
    const int n = uniform_int(g, 2, 16);
    const auto e = random_field(g, n), tar = random_field(g, n);
    const auto w = random_weights(g, n);
    const auto s = scale_update(e, w, tar);
    const double j0 = objective(e, w, s, tar);
    for (int k = 0; k < perturbations; ++k) {
      const double mag = std::pow(10.0, uniform(g, -4, 0));
      const auto delta = std::polar(mag, uniform(g, -std::numbers::pi, std::numbers::pi));
      const double j1 = objective(e, w, s + delta, tar);
      if (!(j1 > j0)) ++violations;
      tightest = std::min(tightest, (j1 - j0) / (std::norm(delta) * tar.squaredNorm()));
    }
  }
  r.measured = violations;
  r.passed = violations == 0;
  r.detail = std::to_string(instances) + " instances x " + std::to_string(perturbations) + " perturbations, " +
             std::to_string(violations) + " violations; min (J(s+d)-J(s*))/(|d|^2 |E_tar|^2) = " + fmt(tightest);
  return r;
}

CheckResult verify_projective_identity(int instances, std::uint64_t seed) {
  Rng g(seed);
  CheckResult r{"J(s*) equals the projected residual", true, 0.0, 1e-10, ""};
  for (int i = 0; i < instances; ++i) {
    const int n = uniform_int(g, 1, 32);
    const auto e = random_field(g, n), tar = random_field(g, n);
    const auto w = random_weights(g, n);
    const double j = objective(e, w, scale_update(e, w, tar), tar);
    const double p = projective_objective(e, w, tar);
    const double scale = std::max(w.cast<std::complex<double>>().cwiseProduct(e).squaredNorm(), 1e-300);
    r.measured = std::max(r.measured, std::abs(j - p) / scale);
  }
  r.passed = r.measured <= r.tolerance;
  r.detail = std::to_string(instances) + " instances, worst |J - Jproj| / ||WE||^2 = " + fmt(r.measured);
  return r;
}

CheckResult verify_assignment(int instances, std::uint64_t seed) {
  Rng g(seed);
  CheckResult r{"Hungarian cost equals exhaustive minimum", true, 0.0, 0.0, ""};
  int mismatches = 0;
  for (int i = 0; i < instances; ++i) {
    const int t = uniform_int(g, 1, 7), s = t + uniform_int(g, 0, 3);
    Eigen::MatrixX3d src(s, 3), tgt(t, 3);
    // alternate integer lattices (many exact ties) with continuous coordinates
    const bool lattice = i % 2 == 0;
    auto fill = [&](Eigen::MatrixX3d& m) {
      for (Eigen::Index k = 0; k < m.rows(); ++k)
        for (int c = 0; c < 3; ++c) m(k, c) = lattice ? (c == 2 ? 0 : uniform_int(g, 0, 3)) : uniform(g, -1, 1);
    };
    fill(src);
    fill(tgt);
    const AssignmentCost cost = lattice ? AssignmentCost::squared_euclidean : AssignmentCost::euclidean;
    const Assignment h = assign(src, tgt, cost), b = brute_force_assign(src, tgt, cost);
    if (h.total_cost != b.total_cost) {
      ++mismatches;
      r.measured = std::max(r.measured, std::abs(h.total_cost - b.total_cost));
    }
  }
  r.passed = mismatches == 0;
  r.detail = std::to_string(instances) + " instances (up to 7 targets), " + std::to_string(mismatches) + " cost mismatches";
  return r;
}

std::vector<CheckResult> verify_all(std::uint64_t seed) {
  return {verify_propagation(20, seed + 1),        verify_transient_exactness(20, seed + 2),
          verify_leading_order_slope(seed + 3),    verify_scale_optimality(50, 100, seed + 4),
          verify_projective_identity(50, seed + 5), verify_assignment(200, seed + 6)};
}

}  // namespace wpgs
