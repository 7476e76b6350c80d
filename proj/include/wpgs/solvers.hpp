#pragma once

// Weighted-projective Gerchberg-Saxton (WPGS) and the amplitude-only WGS baseline.
//
// WPGS minimizes J(phi, s, W) = || W E(phi) - s E_tar ||^2 by alternating
//   weights  w_n <- w_n |E_tar,n| / |E_n|, normalized to unit mean,
//   scale    s   <- E_tar^H (W E) / ||E_tar||^2,
//   phase    phi <- arg(A^H (W s E_tar)).
// WGS runs the same loop with E_tar's phase replaced by the realized trap
// phase on every iteration and s fixed to 1.

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "wpgs/errors.hpp"
#include "wpgs/propagation.hpp"

namespace wpgs {

template <typename Scalar>
struct TargetSpec {
  RealVector<Scalar> intensity;
  RealVector<Scalar> phase;

  TargetSpec() = default;
  TargetSpec(RealVector<Scalar> i, RealVector<Scalar> p) : intensity(std::move(i)), phase(std::move(p)) { validate(); }

  static TargetSpec uniform(Eigen::Index n) {
    return TargetSpec(RealVector<Scalar>::Ones(n), RealVector<Scalar>::Zero(n));
  }

  Eigen::Index size() const { return intensity.size(); }

  void validate() const {
    if (intensity.size() == 0 || intensity.size() != phase.size())
      throw DimensionError("target intensity and phase must be non-empty and of equal length");
    if (!(intensity.array() > 0).all()) throw ConfigError("target intensities must be positive");
    if (!phase.allFinite()) throw ConfigError("target phases must be finite");
  }

  TrapField<Scalar> field() const {
    TrapField<Scalar> e(size());
    for (Eigen::Index n = 0; n < size(); ++n) e(n) = std::polar(std::sqrt(intensity(n)), phase(n));
    return e;
  }

  RealVector<Scalar> amplitude() const { return intensity.cwiseSqrt(); }
};

struct SolverSettings {
  int iterations = 5;        // WPGS iterations per frame
  int wgs_iterations = 26;   // WGS iterations per frame
  int warmup_iterations = 26;  // WGS iterations for the first frame of a sequence
  double beta = 0.85;
  bool over_relaxation = false;
  int over_relaxation_last_iters = 1;
  // Within a sequence, relax only once at most this fraction of frames remains...
  double over_relaxation_tail_fraction = 0.1;
  // ...and only for layouts with at least this many traps.
  Eigen::Index over_relaxation_min_traps = 256;
  std::uint64_t seed = 0;

  void validate() const {
    if (iterations < 1 || wgs_iterations < 1 || warmup_iterations < 1)
      throw ConfigError("iteration counts must be at least 1");
    if (!(beta >= 0 && beta < 1)) throw ConfigError("beta must lie in [0, 1)");
    if (over_relaxation_last_iters < 0) throw ConfigError("over_relaxation_last_iters must be non-negative");
    if (!(over_relaxation_tail_fraction >= 0 && over_relaxation_tail_fraction <= 1))
      throw ConfigError("over_relaxation_tail_fraction must lie in [0, 1]");
  }

  bool operator==(const SolverSettings&) const = default;
};

template <typename Scalar>
struct SolveResult {
  PhaseMask<Scalar> mask;
  RealVector<Scalar> weights;
  // Field realized by `mask` (forward of the returned mask).
  TrapField<Scalar> field;
  // J after each iteration's weight and scale updates; length equals the iteration count.
  std::vector<double> objective;
  Complex<Scalar> scale{1, 0};
  Eigen::Index undefined_pixels = 0;
  int iterations = 0;
};

template <typename Scalar>
PhaseMask<Scalar> random_mask(Eigen::Index grid_x, Eigen::Index grid_y, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  PhaseMask<Scalar> m(grid_x, grid_y);
  const double two_pi = 2 * std::numbers::pi;
  for (Eigen::Index jy = 0; jy < grid_y; ++jy)
    for (Eigen::Index jx = 0; jx < grid_x; ++jx)
      m(jx, jy) = static_cast<Scalar>(two_pi * static_cast<double>(gen() >> 11) * 0x1.0p-53);
  return m;
}

// w_n |E_tar,n| / |E_n|, renormalized to unit mean.
template <typename Scalar, typename DW, typename DE, typename DA>
RealVector<Scalar> weight_update(const Eigen::MatrixBase<DW>& w, const Eigen::MatrixBase<DE>& field,
                                 const Eigen::MatrixBase<DA>& target_amplitude) {
  if (w.size() != field.size() || w.size() != target_amplitude.size())
    throw DimensionError("weights, field and target must have equal length");
  const RealVector<Scalar> mag = field.cwiseAbs();
  const Scalar floor = Scalar(1e-15) * mag.maxCoeff();
  for (Eigen::Index n = 0; n < mag.size(); ++n)
    if (!(mag(n) > floor) || mag(n) == 0)
      throw DarkTrapError("dark trap " + std::to_string(n) + ": amplitude below floor, solver diverging", n);
  RealVector<Scalar> raw = w.cwiseProduct(target_amplitude).cwiseQuotient(mag);
  return raw / raw.mean();
}

// w_tilde_prev + beta (w_tilde_new - w_prev), the late-stage relaxed weight step.
template <typename Scalar>
RealVector<Scalar> over_relax(const RealVector<Scalar>& w_tilde_prev, const RealVector<Scalar>& w_prev,
                              const RealVector<Scalar>& w_tilde_new, Scalar beta) {
  if (w_tilde_prev.size() != w_prev.size() || w_prev.size() != w_tilde_new.size())
    throw DimensionError("weight vectors must have equal length");
  return w_tilde_prev + beta * (w_tilde_new - w_prev);
}

// s* = E_tar^H (W E) / ||E_tar||^2.
template <typename Scalar>
Complex<Scalar> scale_update(const TrapField<Scalar>& field, const RealVector<Scalar>& w,
                             const TrapField<Scalar>& target_field) {
  const Scalar norm2 = target_field.squaredNorm();
  if (!(norm2 > 0)) throw ConfigError("target field has zero norm");
  return target_field.dot(w.template cast<Complex<Scalar>>().cwiseProduct(field)) / norm2;
}

template <typename Scalar>
Scalar objective(const TrapField<Scalar>& field, const RealVector<Scalar>& w, Complex<Scalar> s,
                 const TrapField<Scalar>& target_field) {
  return (w.template cast<Complex<Scalar>>().cwiseProduct(field) - s * target_field).squaredNorm();
}

// ||(I - P_tar)(W E)||^2 with P_tar the orthogonal projector onto span{E_tar}.
template <typename Scalar>
Scalar projective_objective(const TrapField<Scalar>& field, const RealVector<Scalar>& w,
                            const TrapField<Scalar>& target_field) {
  const TrapField<Scalar> we = w.template cast<Complex<Scalar>>().cwiseProduct(field);
  const TrapField<Scalar> projected = target_field * (target_field.dot(we) / target_field.squaredNorm());
  return (we - projected).squaredNorm();
}

// arg(A^H (w .* s E_tar)); the per-trap constant is conjugated into the source so
// the back-propagation is the exact adjoint of `forward`.
template <typename Scalar>
BackPropagation<Scalar> phase_step(const SeparablePropagator<Scalar>& prop, const RealVector<Scalar>& w,
                                   Complex<Scalar> s, const TrapField<Scalar>& target_field) {
  const ComplexVector<Scalar> b =
      prop.constant.conjugate().cwiseProduct(w.template cast<Complex<Scalar>>().cwiseProduct(s * target_field));
  return adjoint_phase(prop, b);
}

template <typename Scalar>
void check_solve_inputs(const SeparablePropagator<Scalar>& prop, Eigen::Index n_targets, const PhaseMask<Scalar>& init_mask,
                        const RealVector<Scalar>& init_weights) {
  if (n_targets != prop.traps()) throw DimensionError("target length does not match trap count");
  if (init_mask.rows() != prop.grid_x() || init_mask.cols() != prop.grid_y())
    throw DimensionError("initial mask does not match the propagator grid");
  if (init_weights.size() != prop.traps()) throw DimensionError("initial weights do not match trap count");
  if (!(init_weights.array() > 0).all()) throw ConfigError("initial weights must be positive");
  if (std::abs(init_weights.mean() - Scalar(1)) > Scalar(1e-9)) throw ConfigError("initial weights must have unit mean");
}

// `relax` enables the over-relaxed weight step on the final
// settings.over_relaxation_last_iters iterations.
template <typename Scalar>
SolveResult<Scalar> wpgs_solve(const SeparablePropagator<Scalar>& prop, const TargetSpec<Scalar>& target,
                               const SolverSettings& settings, const PhaseMask<Scalar>& init_mask,
                               const RealVector<Scalar>& init_weights, bool relax = false) {
  settings.validate();
  target.validate();
  check_solve_inputs(prop, target.size(), init_mask, init_weights);

  const int k_max = settings.iterations;
  const TrapField<Scalar> target_field = target.field();
  const RealVector<Scalar> target_amp = target.amplitude();

  SolveResult<Scalar> result;
  result.iterations = k_max;
  PhaseMask<Scalar> mask = init_mask;
  RealVector<Scalar> w = init_weights;
  RealVector<Scalar> w_tilde_prev = init_weights;
  Complex<Scalar> s{1, 0};
  for (int k = 1; k <= k_max; ++k) {
    const TrapField<Scalar> e = forward(prop, mask);
    const RealVector<Scalar> w_tilde = weight_update<Scalar>(w, e, target_amp);
    const bool relax_now = relax && k > k_max - settings.over_relaxation_last_iters;
    w = relax_now ? over_relax<Scalar>(w_tilde_prev, w, w_tilde, static_cast<Scalar>(settings.beta)) : w_tilde;
    w_tilde_prev = w_tilde;
    s = scale_update(e, w, target_field);
    result.objective.push_back(static_cast<double>(objective(e, w, s, target_field)));
    auto step = phase_step(prop, w, s, target_field);
    mask = std::move(step.mask);
    result.undefined_pixels = step.undefined_pixels;
  }
  result.field = forward(prop, mask);
  result.mask = std::move(mask);
  result.weights = std::move(w);
  result.scale = s;
  return result;
}

template <typename Scalar>
SolveResult<Scalar> wgs_solve(const SeparablePropagator<Scalar>& prop, const RealVector<Scalar>& target_intensity,
                              int iterations, const PhaseMask<Scalar>& init_mask,
                              const RealVector<Scalar>& init_weights) {
  if (iterations < 1) throw ConfigError("iteration count must be at least 1");
  if (!(target_intensity.array() > 0).all()) throw ConfigError("target intensities must be positive");
  check_solve_inputs(prop, target_intensity.size(), init_mask, init_weights);

  const RealVector<Scalar> target_amp = target_intensity.cwiseSqrt();
  SolveResult<Scalar> result;
  result.iterations = iterations;
  PhaseMask<Scalar> mask = init_mask;
  RealVector<Scalar> w = init_weights;
  for (int k = 1; k <= iterations; ++k) {
    const TrapField<Scalar> e = forward(prop, mask);
    w = weight_update<Scalar>(w, e, target_amp);
    TrapField<Scalar> free_phase_target(e.size());
    for (Eigen::Index n = 0; n < e.size(); ++n) free_phase_target(n) = std::polar(target_amp(n), std::arg(e(n)));
    result.objective.push_back(static_cast<double>(objective(e, w, Complex<Scalar>(1), free_phase_target)));
    auto step = phase_step(prop, w, Complex<Scalar>(1), free_phase_target);
    mask = std::move(step.mask);
    result.undefined_pixels = step.undefined_pixels;
  }
  result.field = forward(prop, mask);
  result.mask = std::move(mask);
  result.weights = std::move(w);
  return result;
}

template <typename Scalar>
SolveResult<Scalar> wgs_solve(const SeparablePropagator<Scalar>& prop, const RealVector<Scalar>& target_intensity,
                              const SolverSettings& settings, const PhaseMask<Scalar>& init_mask) {
  settings.validate();
  return wgs_solve(prop, target_intensity, settings.wgs_iterations, init_mask,
                   RealVector<Scalar>::Ones(target_intensity.size()).eval());
}

}  // namespace wpgs
