#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "wpgs/geometry.hpp"
#include "wpgs/metrics.hpp"
#include "wpgs/planner.hpp"
#include "wpgs/solvers.hpp"
#include "wpgs/transient.hpp"

namespace wpgs {

enum class SolverKind { wgs, wpgs };

std::string to_string(SolverKind kind);
SolverKind solver_kind_from_string(const std::string& name);

// Which intensity a transient sample is normalized by.
enum class I0Convention { per_interval, sequence_start };

std::string to_string(I0Convention c);
I0Convention i0_convention_from_string(const std::string& name);

struct Frame {
  TrapLayout layout;
  PhaseMask<double> mask;
  TrapField<double> field;  // forward(mask) at `layout`
  Eigen::VectorXd weights;
  std::vector<double> objective;
  double solve_seconds = 0.0;
};

struct FrameSequence {
  SolverKind solver = SolverKind::wpgs;
  std::vector<Frame> frames;
};

// Samples of the refresh from frame `from` to frame `from + 1`.
struct RefreshTransients {
  int from = 0;
  std::vector<TransientSample<double>> samples;
};

struct RunOptions {
  I0Convention i0 = I0Convention::per_interval;
  bool sample_transients = true;
  int threads = 1;  // cap for refresh sampling
};

struct RunRecord {
  FrameSequence sequence;
  std::vector<RefreshTransients> transients;
  MetricsInputs inputs;
  MetricsReport metrics;
  std::map<double, MetricsReport> layers;  // by target z, only for multi-layer plans
  OpticalConfig optics;
  SolverSettings settings;
  RefreshModel refresh;
  RunOptions options;
  std::vector<std::uint32_t> ids;

  double mean_solve_ms(int skip_frames = 0) const;
};

// Frame 0 is a WGS solve from a random mask (settings.seed); every later frame
// warm-starts from the previous mask. WPGS additionally carries the weights
// and targets the previous frame's realized trap phases.
RunRecord run_sequence(const OpticalConfig& optics, const TransportPlan& plan, SolverKind solver,
                       const SolverSettings& settings, const RefreshModel& refresh, const RunOptions& options = {});

struct BenchEntry {
  std::string label;
  SolverKind solver = SolverKind::wpgs;
  SolverSettings settings;
};

struct BenchRow {
  std::string label;
  SolverKind solver = SolverKind::wpgs;
  int iterations = 0;
  double phase_std = 0.0;
  double mean_ms = 0.0;
  double median_ms = 0.0;
  double std_ms = 0.0;
  std::size_t frames_timed = 0;
};

struct TimingStats {
  double mean = 0.0;
  double median = 0.0;
  double std = 0.0;
};

TimingStats timing_stats(std::vector<double> samples);

// Runs each entry on the same plan; the first `warmup_frames` frames are not timed.
std::vector<BenchRow> bench(const OpticalConfig& optics, const TransportPlan& plan, const std::vector<BenchEntry>& entries,
                            int warmup_frames = 3);

}  // namespace wpgs
