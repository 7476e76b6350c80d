#pragma once

// JSON run configuration. Lengths are meters when given as numbers; strings
// may carry a unit suffix ("5um", "5 µm", "0.1e-6 m", "4mm", "820nm").
// Keys are accepted in snake_case or kebab-case. Unknown keys are errors.

#include <string>
#include <vector>

#include <json.hpp>

#include "wpgs/geometry.hpp"
#include "wpgs/planner.hpp"
#include "wpgs/sequence.hpp"
#include "wpgs/solvers.hpp"
#include "wpgs/transient.hpp"

namespace wpgs {

// 0.2 um for the minimal task (10 steps over its 2 um shift), 0.1 um otherwise.
double default_max_step(TaskKind kind);

struct RunConfig {
  TaskSpec task = TaskSpec::minimal_3x3();
  OpticalConfig optics = desk_scale_optics();
  SolverSettings solver;
  RefreshModel refresh;
  double max_step = default_max_step(TaskKind::minimal_3x3);
  AssignmentCost cost = AssignmentCost::squared_euclidean;
  std::vector<SolverKind> solvers{SolverKind::wpgs, SolverKind::wgs};
  std::string output_dir = "wpgs_out";
  int threads = 1;
  I0Convention i0 = I0Convention::per_interval;
  int bench_warmup_frames = 3;

  void validate() const;
  bool operator==(const RunConfig& other) const;
};

double parse_length(const nlohmann::json& value);

std::string to_string(AssignmentCost cost);
AssignmentCost assignment_cost_from_string(const std::string& name);

nlohmann::json to_json(const OpticalConfig& c);
nlohmann::json to_json(const TaskSpec& t);
nlohmann::json to_json(const SolverSettings& s);
nlohmann::json to_json(const RefreshModel& r);
nlohmann::json to_json(const RunConfig& c);

OpticalConfig optics_from_json(const nlohmann::json& j);
TaskSpec task_from_json(const nlohmann::json& j);
SolverSettings solver_from_json(const nlohmann::json& j);
RefreshModel refresh_from_json(const nlohmann::json& j);
RunConfig run_config_from_json(const nlohmann::json& j);

RunConfig load_run_config(const std::string& path);
void save_run_config(const RunConfig& c, const std::string& path);

}  // namespace wpgs
