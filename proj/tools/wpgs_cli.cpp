// wpgs: plan, run, benchmark and verify phase-stable hologram sequences.
//
// Exit codes: 0 ok, 2 configuration error, 3 infeasible plan, 4 solver failure.

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "wpgs/config.hpp"
#include "wpgs/errors.hpp"
#include "wpgs/io.hpp"
#include "wpgs/planner.hpp"
#include "wpgs/sequence.hpp"
#include "wpgs/verify.hpp"

namespace fs = std::filesystem;
using namespace wpgs;

namespace {

enum Exit { kOk = 0, kConfig = 2, kInfeasible = 3, kSolver = 4 };

// Flags that override the config file. Unset flags leave the file (or defaults) alone.
struct Overrides {
  std::string config_path;
  std::optional<std::string> task, preset, cost, order, i0, output_dir, optics;
  std::optional<std::uint64_t> seed, solver_seed;
  std::optional<double> max_step_um;
  std::optional<int> iterations, wgs_iterations, warmup_iterations, samples, threads, warmup_frames;
  std::optional<double> beta;
  std::optional<bool> over_relaxation;
  std::vector<std::string> solvers;

  void attach(CLI::App* app) {
    app->add_option("-c,--config", config_path, "JSON run configuration")->check(CLI::ExistingFile);
    app->add_option("--task", task, "minimal_3x3 | reconfig_2d | reconfig_3d_layers | offset_bilayer");
    app->add_option("--preset", preset, "task scale: desk | full");
    app->add_option("--optics", optics, "optics preset: desk | full | paper");
    app->add_option("--seed", seed, "occupancy sampling seed");
    app->add_option("--solver-seed", solver_seed, "seed of the first-frame random mask");
    app->add_option("--max-step", max_step_um, "maximum displacement per frame (um)");
    app->add_option("--cost", cost, "assignment cost: squared_euclidean | euclidean");
    app->add_option("--iterations", iterations, "WPGS iterations per frame");
    app->add_option("--wgs-iterations", wgs_iterations, "WGS iterations per frame");
    app->add_option("--warmup-iterations", warmup_iterations, "WGS iterations for frame 0");
    app->add_option("--beta", beta, "over-relaxation factor");
    app->add_option("--over-relaxation", over_relaxation, "enable late-stage over-relaxation (true/false)");
    app->add_option("--samples-per-refresh", samples, "transient samples per refresh");
    app->add_option("--order", order, "transient order: leading | second | exact");
    app->add_option("--i0", i0, "I/I0 normalization: per_interval | sequence_start");
    app->add_option("--solver", solvers, "wpgs and/or wgs (repeatable)");
    app->add_option("--threads", threads, "thread cap for refresh sampling");
    app->add_option("--warmup-frames", warmup_frames, "frames excluded from bench statistics");
    app->add_option("-o,--output-dir", output_dir, "output directory");
  }

  RunConfig resolve() const {
    RunConfig c = config_path.empty() ? RunConfig{} : load_run_config(config_path);
    if (task || preset) {
      nlohmann::json t = to_json(c.task);
      nlohmann::json j = {{"kind", task.value_or(t["kind"].get<std::string>())},
                          {"preset", preset.value_or("desk")},
                          {"seed", seed.value_or(c.task.seed)}};
      c.task = task_from_json(j);
      if (task) c.max_step = default_max_step(c.task.kind);
    } else if (seed) {
      c.task.seed = *seed;
    }
    if (optics) c.optics = optics_from_json({{"preset", *optics}});
    if (max_step_um) c.max_step = *max_step_um * kMicron;
    if (cost) c.cost = assignment_cost_from_string(*cost);
    if (iterations) c.solver.iterations = *iterations;
    if (wgs_iterations) c.solver.wgs_iterations = *wgs_iterations;
    if (warmup_iterations) c.solver.warmup_iterations = *warmup_iterations;
    if (beta) c.solver.beta = *beta;
    if (over_relaxation) c.solver.over_relaxation = *over_relaxation;
    if (solver_seed) c.solver.seed = *solver_seed;
    if (samples) c.refresh.samples_per_refresh = *samples;
    if (order) c.refresh.order = transient_order_from_string(*order);
    if (i0) c.i0 = i0_convention_from_string(*i0);
    if (!solvers.empty()) {
      c.solvers.clear();
      for (const auto& s : solvers) c.solvers.push_back(solver_kind_from_string(s));
    }
    if (threads) c.threads = *threads;
    if (warmup_frames) c.bench_warmup_frames = *warmup_frames;
    if (output_dir) c.output_dir = *output_dir;
    c.validate();
    return c;
  }
};

TransportPlan make_plan(const RunConfig& c) { return plan_task(instantiate_task(c.task), c.max_step, c.cost); }

std::string task_label(const RunConfig& c) { return to_string(c.task.kind); }

int cmd_plan(const RunConfig& c, const std::string& out_path) {
  const TransportPlan plan = make_plan(c);
  const std::string path = out_path.empty() ? (fs::path(c.output_dir) / "plan.json").string() : out_path;
  if (auto parent = fs::path(path).parent_path(); !parent.empty()) fs::create_directories(parent);
  write_plan(path, plan);
  const auto d = displacement_stats(plan);
  std::cout << "traps " << plan.traps() << ", frames " << plan.frames << ", mean displacement " << d.mean / kMicron
            << " um, max " << d.max / kMicron << " um\nwrote " << path << '\n';
  return kOk;
}

int cmd_run(const RunConfig& c) {
  const TransportPlan plan = make_plan(c);
  fs::create_directories(c.output_dir);
  write_plan((fs::path(c.output_dir) / "plan.json").string(), plan);
  save_run_config(c, (fs::path(c.output_dir) / "config.json").string());
  RunOptions options;
  options.i0 = c.i0;
  options.threads = c.threads;
  std::cout << std::setprecision(4);
  for (SolverKind s : c.solvers) {
    const RunRecord rec = run_sequence(c.optics, plan, s, c.solver, c.refresh, options);
    const std::string dir = (fs::path(c.output_dir) / to_string(s)).string();
    write_run_record(dir, rec, to_json(c));
    const auto& m = rec.metrics;
    std::cout << to_string(s) << ": frames " << rec.sequence.frames.size() << ", nu_min " << m.nu_min
              << ", dphi std " << m.phase.std << ", I/I0 min " << m.transition.min << ", mean frame "
              << rec.mean_solve_ms(1) << " ms -> " << dir << '\n';
  }
  return kOk;
}

int cmd_bench(const RunConfig& c, const std::string& out_path) {
  const TransportPlan plan = make_plan(c);
  std::vector<BenchEntry> entries;
  for (SolverKind s : c.solvers) entries.push_back({to_string(s), s, c.solver});
  const auto rows = bench(c.optics, plan, entries, c.bench_warmup_frames);
  if (out_path.empty()) {
    write_timing_csv(std::cout, task_label(c), rows);
  } else {
    std::ofstream out(out_path);
    if (!out) throw ConfigError("cannot write '" + out_path + "'");
    write_timing_csv(out, task_label(c), rows);
    std::cout << "wrote " << out_path << '\n';
  }
  return kOk;
}

int cmd_landscape(int a_steps, int dphi_steps, const std::string& out_path) {
  if (out_path.empty()) {
    write_landscape_csv(std::cout, a_steps, dphi_steps);
  } else {
    std::ofstream out(out_path);
    if (!out) throw ConfigError("cannot write '" + out_path + "'");
    write_landscape_csv(out, a_steps, dphi_steps);
  }
  return kOk;
}

int cmd_verify(std::uint64_t seed) {
  bool ok = true;
  for (const auto& r : verify_all(seed)) {
    std::cout << (r.passed ? "PASS " : "FAIL ") << r.name << ": " << r.detail << '\n';
    ok = ok && r.passed;
  }
  return ok ? kOk : kSolver;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Phase-stable hologram sequences for optical tweezer reconfiguration"};
  app.require_subcommand(1);

  Overrides plan_o, run_o, bench_o;
  std::string plan_out, bench_out, landscape_out;
  auto* plan = app.add_subcommand("plan", "assign sources to targets and write the transport plan");
  plan_o.attach(plan);
  plan->add_option("--out", plan_out, "plan JSON path (default <output-dir>/plan.json)");

  auto* run = app.add_subcommand("run", "solve every frame, sample refresh transients, write run records");
  run_o.attach(run);

  auto* benchc = app.add_subcommand("bench", "per-frame solve timing table");
  bench_o.attach(benchc);
  benchc->add_option("--out", bench_out, "timing CSV path (default stdout)");

  int a_steps = 101, dphi_steps = 101;
  auto* landscape = app.add_subcommand("landscape", "two-frame interference landscape I(a, dphi)");
  landscape->add_option("--a-steps", a_steps, "samples of a in [0, 1]");
  landscape->add_option("--dphi-steps", dphi_steps, "samples of dphi in [-pi, pi]");
  landscape->add_option("--out", landscape_out, "CSV path (default stdout)");

  std::uint64_t verify_seed = 0;
  auto* verify = app.add_subcommand("verify", "run the randomized oracle suites");
  verify->add_option("--seed", verify_seed, "base seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfig;
  }

  try {
    if (*plan) return cmd_plan(plan_o.resolve(), plan_out);
    if (*run) return cmd_run(run_o.resolve());
    if (*benchc) return cmd_bench(bench_o.resolve(), bench_out);
    if (*landscape) return cmd_landscape(a_steps, dphi_steps, landscape_out);
    if (*verify) return cmd_verify(verify_seed);
  } catch (const InfeasibleError& e) {
    std::cerr << "infeasible: " << e.what() << '\n';
    return kInfeasible;
  } catch (const DarkTrapError& e) {
    std::cerr << "solver failure: " << e.what() << '\n';
    return kSolver;
  } catch (const std::invalid_argument& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return kConfig;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return kConfig;
  } catch (const std::exception& e) {
    std::cerr << "solver failure: " << e.what() << '\n';
    return kSolver;
  }
  return kOk;
}
