#include "wpgs/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "wpgs/errors.hpp"
#include "wpgs/propagation.hpp"

namespace wpgs {

double uniformity(const Eigen::VectorXd& intensities) {
  if (intensities.size() == 0) throw DimensionError("uniformity of an empty set");
  if ((intensities.array() < 0).any()) throw ConfigError("intensities must be non-negative");
  const double hi = intensities.maxCoeff(), lo = intensities.minCoeff();
  if (hi == 0) throw ConfigError("uniformity of all-zero intensities");
  return 1.0 - (hi - lo) / (hi + lo);
}

Eigen::VectorXd phase_diff(const Eigen::VectorXd& phases_l, const Eigen::VectorXd& phases_l1) {
  if (phases_l.size() != phases_l1.size()) throw DimensionError("phase vectors differ in length");
  return (phases_l1 - phases_l).unaryExpr([](double d) { return wrap_phase(d); });
}

Histogram histogram(const std::vector<double>& samples, int bins, double lo, double hi) {
  if (bins < 1 || !(hi > lo)) throw ConfigError("histogram needs at least one bin and hi > lo");
  Histogram h;
  h.lo = lo;
  h.hi = hi;
  std::vector<std::size_t> count(static_cast<std::size_t>(bins), 0);
  for (double x : samples) {
    const double t = std::floor((x - lo) / (hi - lo) * bins);
    const long b = std::clamp(static_cast<long>(std::isfinite(t) ? t : 0), 0L, static_cast<long>(bins - 1));
    ++count[static_cast<std::size_t>(b)];
  }
  h.percent.resize(count.size(), 0.0);
  if (!samples.empty())
    for (std::size_t b = 0; b < count.size(); ++b)
      h.percent[b] = 100.0 * static_cast<double>(count[b]) / static_cast<double>(samples.size());
  return h;
}

PhaseStats aggregate(const std::vector<Eigen::VectorXd>& dphi, int bins) {
  std::vector<double> all;
  for (const auto& v : dphi) all.insert(all.end(), v.data(), v.data() + v.size());
  PhaseStats s;
  s.count = all.size();
  const double pi = std::numbers::pi;
  s.hist = histogram(all, bins, -pi, pi);
  if (all.empty()) return s;
  const double n = static_cast<double>(all.size());
  double sum = 0, sum_sq = 0;
  for (double x : all) {
    sum += x;
    sum_sq += x * x;
  }
  s.mean = sum / n;
  double var = 0;
  for (double x : all) var += (x - s.mean) * (x - s.mean);
  s.std = std::sqrt(var / n);
  s.std_about_zero = std::sqrt(sum_sq / n);
  return s;
}

TransitionStats transition_distribution(const std::vector<double>& ratios, const std::vector<double>& thresholds,
                                        int bins, double hi) {
  TransitionStats t;
  t.count = ratios.size();
  t.thresholds = thresholds;
  t.fraction_below.assign(thresholds.size(), 0.0);
  t.hist = histogram(ratios, bins, 0.0, hi);
  if (ratios.empty()) {
    t.min = std::numeric_limits<double>::quiet_NaN();
    return t;
  }
  t.min = *std::min_element(ratios.begin(), ratios.end());
  for (std::size_t k = 0; k < thresholds.size(); ++k) {
    const auto below = std::count_if(ratios.begin(), ratios.end(), [&](double r) { return r < thresholds[k]; });
    t.fraction_below[k] = static_cast<double>(below) / static_cast<double>(ratios.size());
  }
  return t;
}

MetricsReport make_report(const MetricsInputs& in) {
  MetricsReport r;
  for (const auto& i : in.frame_intensity) {
    r.nu.push_back(uniformity(i));
    r.nu_min = std::min(r.nu_min, r.nu.back());
  }
  r.phase = aggregate(in.dphi);
  std::vector<double> flat;
  for (const auto& v : in.ratio) flat.insert(flat.end(), v.data(), v.data() + v.size());
  r.transition = transition_distribution(flat);
  return r;
}

namespace {

std::vector<Eigen::VectorXd> pick(const std::vector<Eigen::VectorXd>& series, const std::vector<Eigen::Index>& idx) {
  std::vector<Eigen::VectorXd> out;
  out.reserve(series.size());
  for (const auto& v : series) out.push_back(v(idx));
  return out;
}

}  // namespace

std::map<double, MetricsReport> layer_split(const MetricsInputs& in, const TrapLayout& layout) {
  auto check = [&](const std::vector<Eigen::VectorXd>& series) {
    for (const auto& v : series)
      if (v.size() != layout.size()) throw DimensionError("metrics series length does not match the layout");
  };
  check(in.frame_intensity);
  check(in.dphi);
  check(in.ratio);
  std::map<double, std::vector<Eigen::Index>> groups;
  for (Eigen::Index n = 0; n < layout.size(); ++n) groups[layout[n].z()].push_back(n);
  std::map<double, MetricsReport> out;
  for (const auto& [z, idx] : groups)
    out[z] = make_report({pick(in.frame_intensity, idx), pick(in.dphi, idx), pick(in.ratio, idx)});
  return out;
}

}  // namespace wpgs
