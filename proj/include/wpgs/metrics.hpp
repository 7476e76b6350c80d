#pragma once

#include <map>
#include <vector>

#include <Eigen/Core>

#include "wpgs/geometry.hpp"
#include "wpgs/planner.hpp"

namespace wpgs {

// 1 - (max I - min I) / (max I + min I).
double uniformity(const Eigen::VectorXd& intensities);

// wrap(phi_l1 - phi_l) into (-pi, pi].
Eigen::VectorXd phase_diff(const Eigen::VectorXd& phases_l, const Eigen::VectorXd& phases_l1);

struct Histogram {
  double lo = 0.0;
  double hi = 1.0;
  std::vector<double> percent;  // per bin, sums to 100

  std::size_t bins() const { return percent.size(); }
  double width() const { return (hi - lo) / static_cast<double>(percent.size()); }
  double left(std::size_t b) const { return lo + width() * static_cast<double>(b); }
  double right(std::size_t b) const { return b + 1 == percent.size() ? hi : left(b + 1); }
};

// Samples outside [lo, hi] are counted in the nearest edge bin.
Histogram histogram(const std::vector<double>& samples, int bins, double lo, double hi);

struct PhaseStats {
  std::size_t count = 0;
  double mean = 0.0;
  double std = 0.0;            // about the sample mean
  double std_about_zero = 0.0;  // root mean square
  Histogram hist;
};

PhaseStats aggregate(const std::vector<Eigen::VectorXd>& dphi, int bins = 101);

struct TransitionStats {
  std::size_t count = 0;
  double min = 0.0;
  std::vector<double> thresholds;
  std::vector<double> fraction_below;  // strictly below each threshold
  Histogram hist;
};

inline const std::vector<double> kDefaultThresholds{0.86, 0.91, 0.96};

TransitionStats transition_distribution(const std::vector<double>& ratios,
                                        const std::vector<double>& thresholds = kDefaultThresholds, int bins = 200,
                                        double hi = 1.2);

// Raw per-trap series a report is folded from.
struct MetricsInputs {
  std::vector<Eigen::VectorXd> frame_intensity;  // one per frame
  std::vector<Eigen::VectorXd> dphi;             // one per frame transition
  std::vector<Eigen::VectorXd> ratio;            // one per transient sample, I/I0 per trap
};

struct MetricsReport {
  std::vector<double> nu;  // per frame
  double nu_min = 1.0;
  PhaseStats phase;
  TransitionStats transition;
  DisplacementStats displacement;
};

MetricsReport make_report(const MetricsInputs& in);

// Groups traps by the z of `layout` (index order must match the inputs).
std::map<double, MetricsReport> layer_split(const MetricsInputs& in, const TrapLayout& layout);

}  // namespace wpgs
