#include "wpgs/planner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "wpgs/errors.hpp"

namespace wpgs {

Eigen::MatrixXd assignment_costs(const Eigen::MatrixX3d& sources, const Eigen::MatrixX3d& targets,
                                 AssignmentCost cost) {
  Eigen::MatrixXd c(targets.rows(), sources.rows());
  for (Eigen::Index t = 0; t < targets.rows(); ++t)
    for (Eigen::Index s = 0; s < sources.rows(); ++s) {
      const double d2 = (targets.row(t) - sources.row(s)).squaredNorm();
      c(t, s) = cost == AssignmentCost::euclidean ? std::sqrt(d2) : d2;
    }
  return c;
}

namespace {

Assignment finish(const Eigen::MatrixXd& costs, const std::vector<Eigen::Index>& source_of_target) {
  Assignment a;
  std::vector<bool> used(static_cast<std::size_t>(costs.cols()), false);
  for (Eigen::Index t = 0; t < costs.rows(); ++t) {
    const Eigen::Index s = source_of_target[static_cast<std::size_t>(t)];
    a.pairs.emplace_back(s, t);
    a.total_cost += costs(t, s);
    used[static_cast<std::size_t>(s)] = true;
  }
  for (Eigen::Index s = 0; s < costs.cols(); ++s)
    if (!used[static_cast<std::size_t>(s)]) a.unmatched_sources.push_back(s);
  return a;
}

void check_feasible(const Eigen::MatrixXd& costs) {
  if (costs.rows() == 0) throw InfeasibleError("no targets to assign");
  if (costs.cols() < costs.rows())
    throw InfeasibleError("infeasible assignment: " + std::to_string(costs.cols()) + " sources for " +
                          std::to_string(costs.rows()) + " targets");
  if (!costs.allFinite()) throw ConfigError("assignment costs must be finite");
}

}  // namespace

Assignment assign(const Eigen::MatrixXd& costs) {
  check_feasible(costs);
  const Eigen::Index n = costs.rows(), m = costs.cols();
  const double inf = std::numeric_limits<double>::infinity();
  // 1-based rows/cols; column 0 is the virtual start.
  std::vector<double> u(static_cast<std::size_t>(n + 1), 0.0), v(static_cast<std::size_t>(m + 1), 0.0);
  std::vector<Eigen::Index> row_of(static_cast<std::size_t>(m + 1), 0), way(static_cast<std::size_t>(m + 1), 0);
  for (Eigen::Index i = 1; i <= n; ++i) {
    row_of[0] = i;
    Eigen::Index j0 = 0;
    std::vector<double> minv(static_cast<std::size_t>(m + 1), inf);
    std::vector<bool> used(static_cast<std::size_t>(m + 1), false);
    do {
      used[static_cast<std::size_t>(j0)] = true;
      const Eigen::Index i0 = row_of[static_cast<std::size_t>(j0)];
      double delta = inf;
      Eigen::Index j1 = 0;
      for (Eigen::Index j = 1; j <= m; ++j) {
        const auto uj = static_cast<std::size_t>(j);
        if (used[uj]) continue;
        const double cur = costs(i0 - 1, j - 1) - u[static_cast<std::size_t>(i0)] - v[uj];
        if (cur < minv[uj]) {
          minv[uj] = cur;
          way[uj] = j0;
        }
        if (minv[uj] < delta) {
          delta = minv[uj];
          j1 = j;
        }
      }
      for (Eigen::Index j = 0; j <= m; ++j) {
        const auto uj = static_cast<std::size_t>(j);
        if (used[uj]) {
          u[static_cast<std::size_t>(row_of[uj])] += delta;
          v[uj] -= delta;
        } else {
          minv[uj] -= delta;
        }
      }
      j0 = j1;
    } while (row_of[static_cast<std::size_t>(j0)] != 0);
    do {
      const Eigen::Index j1 = way[static_cast<std::size_t>(j0)];
      row_of[static_cast<std::size_t>(j0)] = row_of[static_cast<std::size_t>(j1)];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<Eigen::Index> source_of_target(static_cast<std::size_t>(n), -1);
  for (Eigen::Index j = 1; j <= m; ++j)
    if (row_of[static_cast<std::size_t>(j)] != 0)
      source_of_target[static_cast<std::size_t>(row_of[static_cast<std::size_t>(j)] - 1)] = j - 1;
  return finish(costs, source_of_target);
}

Assignment assign(const Eigen::MatrixX3d& sources, const Eigen::MatrixX3d& targets, AssignmentCost cost) {
  return assign(assignment_costs(sources, targets, cost));
}

Assignment brute_force_assign(const Eigen::MatrixXd& costs) {
  check_feasible(costs);
  if (costs.rows() > 8) throw DimensionError("brute-force assignment is limited to 8 targets");
  const Eigen::Index n = costs.rows(), m = costs.cols();
  std::vector<Eigen::Index> current(static_cast<std::size_t>(n)), best;
  std::vector<bool> used(static_cast<std::size_t>(m), false);
  double best_cost = std::numeric_limits<double>::infinity();

  // depth-first in lexicographic order; strict improvement keeps the first optimum found
  auto recurse = [&](auto&& self, Eigen::Index t, double partial) -> void {
    if (t == n) {
      if (partial < best_cost) {
        best_cost = partial;
        best = current;
      }
      return;
    }
    for (Eigen::Index s = 0; s < m; ++s) {
      if (used[static_cast<std::size_t>(s)]) continue;
      used[static_cast<std::size_t>(s)] = true;
      current[static_cast<std::size_t>(t)] = s;
      self(self, t + 1, partial + costs(t, s));
      used[static_cast<std::size_t>(s)] = false;
    }
  };
  recurse(recurse, 0, 0.0);
  return finish(costs, best);
}

Assignment brute_force_assign(const Eigen::MatrixX3d& sources, const Eigen::MatrixX3d& targets, AssignmentCost cost) {
  return brute_force_assign(assignment_costs(sources, targets, cost));
}

TrapLayout TransportPlan::layout(int frame) const {
  if (frame < 0 || frame > frames) throw DimensionError("frame index out of range");
  std::vector<TrapSite> sites;
  const auto& p = waypoints[static_cast<std::size_t>(frame)];
  for (Eigen::Index n = 0; n < p.rows(); ++n)
    sites.push_back({ids.empty() ? static_cast<std::uint32_t>(n) : ids[static_cast<std::size_t>(n)], p.row(n).transpose()});
  return TrapLayout(std::move(sites));
}

Eigen::VectorXd TransportPlan::displacements() const {
  if (waypoints.empty()) return {};
  return (waypoints.back() - waypoints.front()).rowwise().norm();
}

TransportPlan discretize(const Eigen::MatrixX3d& start, const Eigen::MatrixX3d& end, double max_step) {
  if (!(max_step > 0)) throw ConfigError("max_step must be positive");
  if (start.rows() != end.rows()) throw DimensionError("start and end trap counts differ");
  TransportPlan plan;
  plan.max_step = max_step;
  const double d_max = start.rows() ? (end - start).rowwise().norm().maxCoeff() : 0.0;
  // the relative slack absorbs rounding in ratios like 2.0e-6 / 0.2e-6
  plan.frames = d_max > 0 ? static_cast<int>(std::ceil(d_max / max_step * (1 - 1e-12))) : 0;
  plan.waypoints.reserve(static_cast<std::size_t>(plan.frames + 1));
  for (int l = 0; l <= plan.frames; ++l) {
    if (l == plan.frames) {
      plan.waypoints.push_back(end);
    } else {
      const double f = static_cast<double>(l) / plan.frames;
      plan.waypoints.push_back(start + f * (end - start));
    }
  }
  if (plan.frames == 0) plan.waypoints = {end};
  plan.target_intensity = Eigen::VectorXd::Ones(start.rows());
  plan.source_index.resize(static_cast<std::size_t>(start.rows()));
  std::iota(plan.source_index.begin(), plan.source_index.end(), Eigen::Index{0});
  plan.layer.assign(static_cast<std::size_t>(start.rows()), 0);
  return plan;
}

DisplacementStats displacement_stats(const TransportPlan& plan) {
  const Eigen::VectorXd d = plan.displacements();
  if (d.size() == 0) return {};
  return {d.mean(), d.maxCoeff()};
}

TransportPlan plan_task(const Task& task, double max_step, AssignmentCost cost) {
  const Eigen::Index n = task.target.size();
  const Eigen::MatrixX3d targets = task.target.positions();
  const Eigen::MatrixX3d sources = task.source.positions();
  std::vector<Eigen::Index> source_of_target(static_cast<std::size_t>(n), -1);

  const int layers = 1 + std::max(*std::max_element(task.target_layer.begin(), task.target_layer.end()),
                                  *std::max_element(task.source_layer.begin(), task.source_layer.end()));
  for (int k = 0; k < layers; ++k) {
    std::vector<Eigen::Index> src_idx, tgt_idx;
    for (std::size_t i = 0; i < task.source_layer.size(); ++i)
      if (task.source_layer[i] == k) src_idx.push_back(static_cast<Eigen::Index>(i));
    for (std::size_t i = 0; i < task.target_layer.size(); ++i)
      if (task.target_layer[i] == k) tgt_idx.push_back(static_cast<Eigen::Index>(i));
    if (tgt_idx.empty()) continue;
    Eigen::MatrixX3d s(static_cast<Eigen::Index>(src_idx.size()), 3), t(static_cast<Eigen::Index>(tgt_idx.size()), 3);
    for (std::size_t i = 0; i < src_idx.size(); ++i) s.row(static_cast<Eigen::Index>(i)) = task.source_staging.row(src_idx[i]);
    for (std::size_t i = 0; i < tgt_idx.size(); ++i) t.row(static_cast<Eigen::Index>(i)) = targets.row(tgt_idx[i]);
    const Assignment a = assign(s, t, cost);
    for (const auto& [si, ti] : a.pairs) source_of_target[static_cast<std::size_t>(tgt_idx[static_cast<std::size_t>(ti)])] = src_idx[static_cast<std::size_t>(si)];
  }

  Eigen::MatrixX3d start(n, 3);
  for (Eigen::Index t = 0; t < n; ++t) start.row(t) = sources.row(source_of_target[static_cast<std::size_t>(t)]);
  TransportPlan plan = discretize(start, targets, max_step);
  plan.target_intensity = task.target_intensity;
  plan.source_index = source_of_target;
  plan.layer = task.target_layer;
  for (const auto& s : task.target) plan.ids.push_back(s.id);
  return plan;
}

}  // namespace wpgs
