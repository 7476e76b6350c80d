#include "wpgs/config.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>

#include "wpgs/errors.hpp"

namespace wpgs {

using nlohmann::json;

namespace {

std::string snake(std::string key) {
  std::replace(key.begin(), key.end(), '-', '_');
  return key;
}

// Object view with normalized keys; rejects anything not in `allowed`.
class Fields {
 public:
  Fields(const json& j, const std::string& where, std::initializer_list<const char*> allowed) : where_(where) {
    if (!j.is_object()) throw ConfigError(where + ": expected an object");
    std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& [k, v] : j.items()) {
      const std::string key = snake(k);
      if (!ok.count(key)) throw ConfigError(where + ": unknown key '" + k + "'");
      if (!values_.emplace(key, v).second) throw ConfigError(where + ": duplicate key '" + k + "'");
    }
  }

  bool has(const std::string& key) const { return values_.count(key) > 0; }
  const json& at(const std::string& key) const { return values_.at(key); }

  template <typename T>
  void get(const std::string& key, T& out) const {
    if (!has(key)) return;
    try {
      out = values_.at(key).get<T>();
    } catch (const json::exception& e) {
      throw ConfigError(where_ + "." + key + ": " + e.what());
    }
  }

  void length(const std::string& key, double& out) const {
    if (has(key)) out = parse_length(values_.at(key));
  }

 private:
  std::string where_;
  std::map<std::string, json> values_;
};

json vec3(const Eigen::Vector3d& v) { return json::array({v.x(), v.y(), v.z()}); }

Eigen::Vector3d parse_vec3(const json& j) {
  if (!j.is_array() || j.size() != 3) throw ConfigError("expected a 3-vector of lengths");
  return {parse_length(j[0]), parse_length(j[1]), parse_length(j[2])};
}

json lattice_json(const LatticeSpec& l) {
  return {{"nx", l.nx}, {"ny", l.ny}, {"spacing", l.spacing}, {"filling", l.filling},
          {"z", l.z},   {"center", json::array({l.center.x(), l.center.y()})}};
}

LatticeSpec lattice_from_json(const json& j) {
  Fields f(j, "lattice", {"nx", "ny", "spacing", "filling", "z", "center"});
  LatticeSpec l;
  f.get("nx", l.nx);
  f.get("ny", l.ny);
  f.length("spacing", l.spacing);
  f.get("filling", l.filling);
  f.length("z", l.z);
  if (f.has("center")) {
    const json& c = f.at("center");
    if (!c.is_array() || c.size() != 2) throw ConfigError("lattice.center: expected two lengths");
    l.center = {parse_length(c[0]), parse_length(c[1])};
  }
  return l;
}

template <typename F>
auto guarded(F&& f) {
  try {
    return f();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
}

}  // namespace

static OpticalConfig optics_from_json_impl(const json& j);
static TaskSpec task_from_json_impl(const json& j);
static SolverSettings solver_from_json_impl(const json& j);
static RefreshModel refresh_from_json_impl(const json& j);
static RunConfig run_config_from_json_impl(const json& j);

double default_max_step(TaskKind kind) { return kind == TaskKind::minimal_3x3 ? 0.2 * kMicron : 0.1 * kMicron; }

double parse_length(const json& value) {
  if (value.is_number()) return value.get<double>();
  if (!value.is_string()) throw ConfigError("length must be a number (meters) or a string with a unit");
  const std::string s = value.get<std::string>();
  std::size_t used = 0;
  double x = 0;
  try {
    x = std::stod(s, &used);
  } catch (const std::exception&) {
    throw ConfigError("cannot parse length '" + s + "'");
  }
  std::string unit = s.substr(used);
  unit.erase(std::remove_if(unit.begin(), unit.end(), [](unsigned char c) { return std::isspace(c); }), unit.end());
  if (unit.empty() || unit == "m") return x;
  if (unit == "mm") return x * 1e-3;
  if (unit == "um" || unit == "µm" || unit == "μm") return x * 1e-6;
  if (unit == "nm") return x * 1e-9;
  throw ConfigError("unknown length unit '" + unit + "' in '" + s + "'");
}

std::string to_string(AssignmentCost cost) {
  return cost == AssignmentCost::euclidean ? "euclidean" : "squared_euclidean";
}

AssignmentCost assignment_cost_from_string(const std::string& name) {
  const std::string n = snake(name);
  if (n == "euclidean") return AssignmentCost::euclidean;
  if (n == "squared_euclidean" || n == "squared") return AssignmentCost::squared_euclidean;
  throw ConfigError("unknown assignment cost '" + name + "'");
}

json to_json(const OpticalConfig& c) {
  json j = {{"wavelength", c.wavelength},   {"focal_length", c.focal_length},
            {"grid_x", c.grid_x},           {"grid_y", c.grid_y},
            {"pixel_pitch", c.pixel_pitch}, {"illumination_waist", c.illumination_waist}};
  if (c.custom_illumination.size()) {
    json rows = json::array();
    for (Eigen::Index x = 0; x < c.custom_illumination.rows(); ++x) {
      json row = json::array();
      for (Eigen::Index y = 0; y < c.custom_illumination.cols(); ++y) row.push_back(c.custom_illumination(x, y));
      rows.push_back(row);
    }
    j["custom_illumination"] = rows;
  }
  return j;
}

OpticalConfig optics_from_json(const json& j) {
  return guarded([&] { return optics_from_json_impl(j); });
}

static OpticalConfig optics_from_json_impl(const json& j) {
  Fields f(j, "optics",
           {"preset", "wavelength", "focal_length", "grid_x", "grid_y", "pixel_pitch", "illumination_waist",
            "custom_illumination"});
  OpticalConfig c;
  if (f.has("preset")) {
    const std::string p = f.at("preset").get<std::string>();
    if (p == "desk") c = desk_scale_optics();
    else if (p == "full") c = full_scale_optics();
    else if (p == "paper") c = OpticalConfig{};
    else throw ConfigError("optics.preset: expected desk, full or paper");
  }
  f.length("wavelength", c.wavelength);
  f.length("focal_length", c.focal_length);
  f.get("grid_x", c.grid_x);
  f.get("grid_y", c.grid_y);
  f.length("pixel_pitch", c.pixel_pitch);
  f.length("illumination_waist", c.illumination_waist);
  if (f.has("custom_illumination")) {
    const json& rows = f.at("custom_illumination");
    if (!rows.is_array() || rows.empty() || !rows[0].is_array()) throw ConfigError("custom_illumination: expected rows");
    c.custom_illumination.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows[0].size()));
    for (std::size_t x = 0; x < rows.size(); ++x) {
      if (rows[x].size() != rows[0].size()) throw ConfigError("custom_illumination: ragged rows");
      for (std::size_t y = 0; y < rows[x].size(); ++y)
        c.custom_illumination(static_cast<Eigen::Index>(x), static_cast<Eigen::Index>(y)) = rows[x][y].get<double>();
    }
  }
  c.validate();
  return c;
}

json to_json(const TaskSpec& t) {
  json j = {{"kind", to_string(t.kind)},
            {"seed", t.seed},
            {"profile", to_string(t.profile)},
            {"profile_contrast", t.profile_contrast},
            {"shift", t.shift},
            {"exchange_count", t.exchange_count}};
  j["source_layers"] = json::array();
  for (const auto& l : t.source_layers) j["source_layers"].push_back(lattice_json(l));
  j["target_layers"] = json::array();
  for (const auto& l : t.target_layers) j["target_layers"].push_back(lattice_json(l));
  if (!t.custom_sources.empty()) {
    j["custom_sources"] = json::array();
    for (const auto& p : t.custom_sources) j["custom_sources"].push_back(vec3(p));
  }
  if (!t.custom_targets.empty()) {
    j["custom_targets"] = json::array();
    for (const auto& p : t.custom_targets) j["custom_targets"].push_back(vec3(p));
  }
  if (!t.custom_target_intensity.empty()) j["custom_target_intensity"] = t.custom_target_intensity;
  return j;
}

TaskSpec task_from_json(const json& j) {
  return guarded([&] { return task_from_json_impl(j); });
}

static TaskSpec task_from_json_impl(const json& j) {
  Fields f(j, "task",
           {"kind", "preset", "seed", "profile", "profile_contrast", "shift", "exchange_count", "source_layers",
            "target_layers", "custom_sources", "custom_targets", "custom_target_intensity"});
  TaskSpec t;
  std::uint64_t seed = 0;
  f.get("seed", seed);
  if (f.has("kind")) {
    const TaskKind kind = task_kind_from_string(f.at("kind").get<std::string>());
    std::string preset = "desk";
    f.get("preset", preset);
    if (preset != "desk" && preset != "full") throw ConfigError("task.preset: expected desk or full");
    const bool full = preset == "full";
    switch (kind) {
      case TaskKind::minimal_3x3: t = TaskSpec::minimal_3x3(); break;
      case TaskKind::reconfig_2d: t = TaskSpec::reconfig_2d(full, seed); break;
      case TaskKind::reconfig_3d_layers: t = TaskSpec::reconfig_3d_layers(full, seed); break;
      case TaskKind::offset_bilayer: t = TaskSpec::offset_bilayer(full, seed); break;
      case TaskKind::custom: t = TaskSpec{}; t.kind = TaskKind::custom; t.source_layers.clear(); t.target_layers.clear(); break;
    }
  }
  t.seed = seed;
  if (f.has("profile")) t.profile = intensity_profile_from_string(f.at("profile").get<std::string>());
  f.get("profile_contrast", t.profile_contrast);
  f.length("shift", t.shift);
  f.get("exchange_count", t.exchange_count);
  auto layers = [&](const char* key, std::vector<LatticeSpec>& out) {
    if (!f.has(key)) return;
    out.clear();
    for (const auto& l : f.at(key)) out.push_back(lattice_from_json(l));
  };
  layers("source_layers", t.source_layers);
  layers("target_layers", t.target_layers);
  auto points = [&](const char* key, std::vector<Eigen::Vector3d>& out) {
    if (!f.has(key)) return;
    out.clear();
    for (const auto& p : f.at(key)) out.push_back(parse_vec3(p));
  };
  points("custom_sources", t.custom_sources);
  points("custom_targets", t.custom_targets);
  f.get("custom_target_intensity", t.custom_target_intensity);
  t.validate();
  return t;
}

json to_json(const SolverSettings& s) {
  return {{"iterations", s.iterations},
          {"wgs_iterations", s.wgs_iterations},
          {"warmup_iterations", s.warmup_iterations},
          {"beta", s.beta},
          {"over_relaxation", s.over_relaxation},
          {"over_relaxation_last_iters", s.over_relaxation_last_iters},
          {"over_relaxation_tail_fraction", s.over_relaxation_tail_fraction},
          {"over_relaxation_min_traps", s.over_relaxation_min_traps},
          {"seed", s.seed}};
}

SolverSettings solver_from_json(const json& j) {
  return guarded([&] { return solver_from_json_impl(j); });
}

static SolverSettings solver_from_json_impl(const json& j) {
  Fields f(j, "solver",
           {"iterations", "wgs_iterations", "warmup_iterations", "beta", "over_relaxation", "over_relaxation_last_iters",
            "over_relaxation_tail_fraction", "over_relaxation_min_traps", "seed"});
  SolverSettings s;
  f.get("iterations", s.iterations);
  f.get("wgs_iterations", s.wgs_iterations);
  f.get("warmup_iterations", s.warmup_iterations);
  f.get("beta", s.beta);
  f.get("over_relaxation", s.over_relaxation);
  f.get("over_relaxation_last_iters", s.over_relaxation_last_iters);
  f.get("over_relaxation_tail_fraction", s.over_relaxation_tail_fraction);
  f.get("over_relaxation_min_traps", s.over_relaxation_min_traps);
  f.get("seed", s.seed);
  s.validate();
  return s;
}

json to_json(const RefreshModel& r) {
  return {{"tau", r.tau}, {"samples_per_refresh", r.samples_per_refresh}, {"order", to_string(r.order)}};
}

RefreshModel refresh_from_json(const json& j) {
  return guarded([&] { return refresh_from_json_impl(j); });
}

static RefreshModel refresh_from_json_impl(const json& j) {
  Fields f(j, "refresh", {"tau", "samples_per_refresh", "order"});
  RefreshModel r;
  f.get("tau", r.tau);
  f.get("samples_per_refresh", r.samples_per_refresh);
  if (f.has("order")) r.order = transient_order_from_string(f.at("order").get<std::string>());
  r.validate();
  return r;
}

void RunConfig::validate() const {
  task.validate();
  optics.validate();
  solver.validate();
  refresh.validate();
  if (!(max_step > 0)) throw ConfigError("max_step must be positive");
  if (solvers.empty()) throw ConfigError("at least one solver must be selected");
  if (threads < 1) throw ConfigError("threads must be at least 1");
  if (bench_warmup_frames < 0) throw ConfigError("bench_warmup_frames must be non-negative");
  if (output_dir.empty()) throw ConfigError("output_dir must not be empty");
}

bool RunConfig::operator==(const RunConfig& o) const {
  return task == o.task && optics == o.optics && solver == o.solver && refresh == o.refresh && max_step == o.max_step &&
         cost == o.cost && solvers == o.solvers && output_dir == o.output_dir && threads == o.threads && i0 == o.i0 &&
         bench_warmup_frames == o.bench_warmup_frames;
}

json to_json(const RunConfig& c) {
  json solvers = json::array();
  for (auto s : c.solvers) solvers.push_back(to_string(s));
  return {{"task", to_json(c.task)},
          {"optics", to_json(c.optics)},
          {"solver", to_json(c.solver)},
          {"refresh", to_json(c.refresh)},
          {"plan", {{"max_step", c.max_step}, {"cost", to_string(c.cost)}}},
          {"run",
           {{"output_dir", c.output_dir},
            {"solvers", solvers},
            {"threads", c.threads},
            {"i0", to_string(c.i0)},
            {"bench_warmup_frames", c.bench_warmup_frames}}}};
}

RunConfig run_config_from_json(const json& j) {
  return guarded([&] { return run_config_from_json_impl(j); });
}

static RunConfig run_config_from_json_impl(const json& j) {
  Fields f(j, "config", {"task", "optics", "solver", "refresh", "plan", "run"});
  RunConfig c;
  if (f.has("task")) c.task = task_from_json(f.at("task"));
  c.max_step = default_max_step(c.task.kind);
  if (f.has("optics")) c.optics = optics_from_json(f.at("optics"));
  if (f.has("solver")) c.solver = solver_from_json(f.at("solver"));
  if (f.has("refresh")) c.refresh = refresh_from_json(f.at("refresh"));
  if (f.has("plan")) {
    Fields p(f.at("plan"), "plan", {"max_step", "cost"});
    p.length("max_step", c.max_step);
    if (p.has("cost")) c.cost = assignment_cost_from_string(p.at("cost").get<std::string>());
  }
  if (f.has("run")) {
    Fields r(f.at("run"), "run", {"output_dir", "solvers", "threads", "i0", "bench_warmup_frames"});
    r.get("output_dir", c.output_dir);
    if (r.has("solvers")) {
      c.solvers.clear();
      for (const auto& s : r.at("solvers")) c.solvers.push_back(solver_kind_from_string(s.get<std::string>()));
    }
    r.get("threads", c.threads);
    if (r.has("i0")) c.i0 = i0_convention_from_string(r.at("i0").get<std::string>());
    r.get("bench_warmup_frames", c.bench_warmup_frames);
  }
  c.validate();
  return c;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("malformed config '" + path + "': " + e.what());
  }
  return run_config_from_json(j);
}

void save_run_config(const RunConfig& c, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write config file '" + path + "'");
  out << to_json(c).dump(2) << '\n';
}

}  // namespace wpgs
