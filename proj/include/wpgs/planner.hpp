#pragma once

#include <utility>
#include <vector>

#include <Eigen/Core>

#include "wpgs/geometry.hpp"

namespace wpgs {

enum class AssignmentCost { euclidean, squared_euclidean };

struct Assignment {
  // (source index, target index), sorted by target index.
  std::vector<std::pair<Eigen::Index, Eigen::Index>> pairs;
  std::vector<Eigen::Index> unmatched_sources;
  double total_cost = 0.0;
};

// Cost matrix: rows are targets, columns are sources. Squared distance is the
// default; plain distance lets a few long moves cross the array.
Eigen::MatrixXd assignment_costs(const Eigen::MatrixX3d& sources, const Eigen::MatrixX3d& targets,
                                 AssignmentCost cost = AssignmentCost::squared_euclidean);

// Minimum-cost injection of targets into sources (Hungarian method with
// potentials, O(T^2 S)). Ties resolve deterministically by scan order.
// Throws InfeasibleError when there are fewer sources than targets.
Assignment assign(const Eigen::MatrixX3d& sources, const Eigen::MatrixX3d& targets,
                  AssignmentCost cost = AssignmentCost::squared_euclidean);
Assignment assign(const Eigen::MatrixXd& costs);

// Exhaustive search over all injections; test oracle for at most 8 targets.
// Among equal-cost injections the lexicographically smallest source sequence wins.
Assignment brute_force_assign(const Eigen::MatrixX3d& sources, const Eigen::MatrixX3d& targets,
                              AssignmentCost cost = AssignmentCost::squared_euclidean);
Assignment brute_force_assign(const Eigen::MatrixXd& costs);

struct TransportPlan {
  // Number of transport steps; there are frames + 1 waypoints per trap.
  int frames = 0;
  double max_step = 0.0;
  // waypoints[l] is N x 3, trap order follows the target layout.
  std::vector<Eigen::MatrixX3d> waypoints;
  // Target intensity per trap, carried along for the solvers.
  Eigen::VectorXd target_intensity;
  // Source index each trap started from, and the layer of its target.
  std::vector<Eigen::Index> source_index;
  std::vector<int> layer;
  std::vector<std::uint32_t> ids;

  Eigen::Index traps() const { return waypoints.empty() ? 0 : waypoints.front().rows(); }
  TrapLayout layout(int frame) const;
  Eigen::VectorXd displacements() const;  // straight-line distance per trap
};

// Straight segments in `ceil(d_max / max_step)` equal sub-steps shared by all traps.
TransportPlan discretize(const Eigen::MatrixX3d& start, const Eigen::MatrixX3d& end, double max_step);

struct DisplacementStats {
  double mean = 0.0;
  double max = 0.0;
};

DisplacementStats displacement_stats(const TransportPlan& plan);

// Per-layer assignment from (staged) sources to targets, then discretization.
TransportPlan plan_task(const Task& task, double max_step, AssignmentCost cost = AssignmentCost::squared_euclidean);

}  // namespace wpgs
