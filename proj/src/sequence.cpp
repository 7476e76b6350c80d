#include "wpgs/sequence.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

#include "wpgs/errors.hpp"

namespace wpgs {

std::string to_string(SolverKind kind) { return kind == SolverKind::wgs ? "wgs" : "wpgs"; }

SolverKind solver_kind_from_string(const std::string& name) {
  if (name == "wgs") return SolverKind::wgs;
  if (name == "wpgs") return SolverKind::wpgs;
  throw ConfigError("unknown solver '" + name + "'");
}

std::string to_string(I0Convention c) { return c == I0Convention::per_interval ? "per_interval" : "sequence_start"; }

I0Convention i0_convention_from_string(const std::string& name) {
  if (name == "per_interval" || name == "per-interval") return I0Convention::per_interval;
  if (name == "sequence_start" || name == "sequence-start") return I0Convention::sequence_start;
  throw ConfigError("unknown I0 convention '" + name + "'");
}

double RunRecord::mean_solve_ms(int skip_frames) const {
  double sum = 0;
  int n = 0;
  for (std::size_t l = static_cast<std::size_t>(std::max(skip_frames, 0)); l < sequence.frames.size(); ++l, ++n)
    sum += sequence.frames[l].solve_seconds;
  return n ? 1e3 * sum / n : 0.0;
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

bool relax_at(const SolverSettings& s, int frame, int frames, Eigen::Index traps) {
  if (!s.over_relaxation || traps < s.over_relaxation_min_traps) return false;
  return frames - frame <= static_cast<int>(std::floor(s.over_relaxation_tail_fraction * frames));
}

void solve_frames(const OpticalConfig& optics, const TransportPlan& plan, SolverKind solver,
                  const SolverSettings& settings, FrameSequence& seq) {
  const Eigen::VectorXd intensity = plan.target_intensity;
  const Eigen::Index n = plan.traps();
  for (int l = 0; l <= plan.frames; ++l) {
    Frame f;
    f.layout = plan.layout(l);
    const auto prop = build_separable<double>(optics, f.layout);
    SolveResult<double> r;
    try {
      if (l == 0) {
        const PhaseMask<double> init = random_mask<double>(optics.grid_x, optics.grid_y, settings.seed);
        const int k = solver == SolverKind::wpgs ? settings.warmup_iterations : settings.wgs_iterations;
        const auto t0 = Clock::now();
        r = wgs_solve(prop, intensity, k, init, Eigen::VectorXd::Ones(n).eval());
        f.solve_seconds = seconds_since(t0);
      } else {
        const Frame& prev = seq.frames.back();
        const auto t0 = Clock::now();
        if (solver == SolverKind::wpgs) {
          const TargetSpec<double> target(intensity, phases(prev.field));
          r = wpgs_solve(prop, target, settings, prev.mask, prev.weights, relax_at(settings, l, plan.frames, n));
        } else {
          r = wgs_solve(prop, intensity, settings, prev.mask);
        }
        f.solve_seconds = seconds_since(t0);
      }
    } catch (const DarkTrapError& e) {
      throw e.at_frame(l);
    }
    f.mask = std::move(r.mask);
    f.field = std::move(r.field);
    f.weights = std::move(r.weights);
    f.objective = std::move(r.objective);
    seq.frames.push_back(std::move(f));
  }
}

std::vector<RefreshTransients> sample_all(const OpticalConfig& optics, const FrameSequence& seq,
                                          const RefreshModel& refresh, const RunOptions& options) {
  const int transitions = static_cast<int>(seq.frames.size()) - 1;
  std::vector<RefreshTransients> out(static_cast<std::size_t>(std::max(transitions, 0)));
  if (transitions <= 0) return out;
  const Eigen::VectorXd start_i0 = intensities(seq.frames.front().field);

  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (int l = next++; l < transitions; l = next++) {
      try {
        const Frame& a = seq.frames[static_cast<std::size_t>(l)];
        const Frame& b = seq.frames[static_cast<std::size_t>(l + 1)];
        const Eigen::VectorXd i0 = options.i0 == I0Convention::per_interval ? intensities(a.field) : start_i0;
        out[static_cast<std::size_t>(l)] = {
            l, sample_refresh(optics, a.layout, b.layout, a.mask, b.mask, a.field, b.field, refresh, i0)};
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  const int threads = std::clamp(options.threads, 1, transitions);
  std::vector<std::thread> pool;
  for (int t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
  return out;
}

}  // namespace

RunRecord run_sequence(const OpticalConfig& optics, const TransportPlan& plan, SolverKind solver,
                       const SolverSettings& settings, const RefreshModel& refresh, const RunOptions& options) {
  optics.validate();
  settings.validate();
  refresh.validate();
  if (plan.waypoints.empty() || plan.traps() == 0) throw ConfigError("transport plan is empty");
  if (plan.target_intensity.size() != plan.traps()) throw DimensionError("plan intensities do not match trap count");

  RunRecord rec;
  rec.optics = optics;
  rec.settings = settings;
  rec.refresh = refresh;
  rec.options = options;
  rec.ids = plan.ids;
  rec.sequence.solver = solver;
  solve_frames(optics, plan, solver, settings, rec.sequence);
  if (options.sample_transients) rec.transients = sample_all(optics, rec.sequence, refresh, options);

  const auto& frames = rec.sequence.frames;
  for (std::size_t l = 0; l < frames.size(); ++l) {
    rec.inputs.frame_intensity.push_back(intensities(frames[l].field));
    if (l > 0) rec.inputs.dphi.push_back(phase_diff(phases(frames[l - 1].field), phases(frames[l].field)));
  }
  for (const auto& t : rec.transients)
    for (const auto& s : t.samples) rec.inputs.ratio.push_back(s.ratio);
  rec.metrics = make_report(rec.inputs);
  rec.metrics.displacement = displacement_stats(plan);
  const TrapLayout final_layout = frames.back().layout;
  if (final_layout.layers().size() > 1) rec.layers = layer_split(rec.inputs, final_layout);
  return rec;
}

TimingStats timing_stats(std::vector<double> samples) {
  TimingStats t;
  if (samples.empty()) return t;
  const double n = static_cast<double>(samples.size());
  for (double x : samples) t.mean += x / n;
  for (double x : samples) t.std += (x - t.mean) * (x - t.mean) / n;
  t.std = std::sqrt(t.std);
  std::sort(samples.begin(), samples.end());
  const std::size_t m = samples.size() / 2;
  t.median = samples.size() % 2 ? samples[m] : 0.5 * (samples[m - 1] + samples[m]);
  return t;
}

std::vector<BenchRow> bench(const OpticalConfig& optics, const TransportPlan& plan, const std::vector<BenchEntry>& entries,
                            int warmup_frames) {
  if (warmup_frames < 0) throw ConfigError("warm-up frame count must be non-negative");
  std::vector<BenchRow> rows;
  RunOptions options;
  options.sample_transients = false;
  for (const auto& e : entries) {
    const RunRecord rec = run_sequence(optics, plan, e.solver, e.settings, RefreshModel{}, options);
    std::vector<double> ms;
    for (std::size_t l = static_cast<std::size_t>(warmup_frames); l < rec.sequence.frames.size(); ++l)
      ms.push_back(1e3 * rec.sequence.frames[l].solve_seconds);
    const TimingStats t = timing_stats(ms);
    BenchRow row;
    row.label = e.label;
    row.solver = e.solver;
    row.iterations = e.solver == SolverKind::wpgs ? e.settings.iterations : e.settings.wgs_iterations;
    row.phase_std = rec.metrics.phase.std;
    row.mean_ms = t.mean;
    row.median_ms = t.median;
    row.std_ms = t.std;
    row.frames_timed = ms.size();
    rows.push_back(row);
  }
  return rows;
}

}  // namespace wpgs
