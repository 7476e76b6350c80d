#pragma once

// SLM refresh between two holograms. Each pixel relaxes exponentially,
//
//   phi_j(a) = phi_j^(l) + (1 - a) wrap(phi_j^(l+1) - phi_j^(l)),   a = exp(-(t - t0) / tau),
//
// so the trap field during the refresh is E(a) = A exp(i phi(a)). The exact
// form splits each pixel phasor into the two endpoint phasors with sine-ratio
// weights; the leading and second-order forms only need the endpoint trap fields.

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "wpgs/errors.hpp"
#include "wpgs/propagation.hpp"

namespace wpgs {

enum class TransientOrder { exact, leading, second };

inline std::string to_string(TransientOrder order) {
  switch (order) {
    case TransientOrder::exact: return "exact";
    case TransientOrder::leading: return "leading";
    case TransientOrder::second: return "second";
  }
  return "leading";
}

inline TransientOrder transient_order_from_string(const std::string& name) {
  if (name == "exact") return TransientOrder::exact;
  if (name == "leading") return TransientOrder::leading;
  if (name == "second") return TransientOrder::second;
  throw ConfigError("unknown transient order '" + name + "'");
}

struct RefreshModel {
  double tau = 1e-3;  // s; only maps a back to time
  int samples_per_refresh = 21;
  TransientOrder order = TransientOrder::leading;

  void validate() const {
    if (!(tau > 0)) throw ConfigError("tau must be positive");
    if (samples_per_refresh < 2) throw ConfigError("samples_per_refresh must be at least 2");
  }

  // Uniform in a from 1 down to 0, both endpoints included.
  std::vector<double> a_values() const {
    validate();
    std::vector<double> a(static_cast<std::size_t>(samples_per_refresh));
    for (int k = 0; k < samples_per_refresh; ++k)
      a[static_cast<std::size_t>(k)] = 1.0 - static_cast<double>(k) / (samples_per_refresh - 1);
    a.back() = 0.0;
    return a;
  }

  double time_of(double a) const { return a > 0 ? -tau * std::log(a) : std::numeric_limits<double>::infinity(); }

  bool operator==(const RefreshModel&) const = default;
};

template <typename Scalar>
struct TransientSample {
  double a = 1.0;
  TrapField<Scalar> field;
  RealVector<Scalar> ratio;  // |E_n(a)|^2 / I0_n
};

template <typename Scalar>
void check_masks(const PhaseMask<Scalar>& m0, const PhaseMask<Scalar>& m1) {
  if (m0.rows() != m1.rows() || m0.cols() != m1.cols()) throw DimensionError("masks differ in size");
}

template <typename Scalar>
PhaseMask<Scalar> excursion(const PhaseMask<Scalar>& mask_l, const PhaseMask<Scalar>& mask_l1) {
  check_masks(mask_l, mask_l1);
  return (mask_l1 - mask_l).unaryExpr([](Scalar d) { return wrap_phase(d); });
}

template <typename Scalar>
PhaseMask<Scalar> pixel_interpolate(const PhaseMask<Scalar>& mask_l, const PhaseMask<Scalar>& mask_l1, Scalar a) {
  return mask_l + (1 - a) * excursion(mask_l, mask_l1);
}

// <dphi^2> over all pixels.
template <typename Scalar>
Scalar mean_sq_excursion(const PhaseMask<Scalar>& mask_l, const PhaseMask<Scalar>& mask_l1) {
  return excursion(mask_l, mask_l1).squaredNorm() / static_cast<Scalar>(mask_l.size());
}

// Pixel field sin(a d)/sin(d) e^{i phi_l} + sin((1-a) d)/sin(d) e^{i phi_l1}.
template <typename Scalar>
ComplexMatrix<Scalar> exact_pixels(const PhaseMask<Scalar>& mask_l, const PhaseMask<Scalar>& mask_l1, Scalar a) {
  const PhaseMask<Scalar> d = excursion(mask_l, mask_l1);
  ComplexMatrix<Scalar> p(d.rows(), d.cols());
  for (Eigen::Index jy = 0; jy < d.cols(); ++jy) {
    for (Eigen::Index jx = 0; jx < d.rows(); ++jx) {
      const Scalar dj = d(jx, jy);
      const Complex<Scalar> e0 = std::polar(Scalar(1), mask_l(jx, jy));
      const Complex<Scalar> e1 = std::polar(Scalar(1), mask_l1(jx, jy));
      const Scalar sd = std::sin(dj);
      if (std::abs(dj) < Scalar(1e-6)) {
        p(jx, jy) = a * e0 + (1 - a) * e1;
      } else if (std::abs(sd) < Scalar(1e-3)) {
        // |d| near pi: rounding in sin(d) would be amplified, take the interpolated phasor directly
        p(jx, jy) = std::polar(Scalar(1), mask_l(jx, jy) + (1 - a) * dj);
      } else {
        p(jx, jy) = (std::sin(a * dj) * e0 + std::sin((1 - a) * dj) * e1) / sd;
      }
    }
  }
  return p;
}

template <typename Scalar>
TrapField<Scalar> transient_exact(const SeparablePropagator<Scalar>& prop, const PhaseMask<Scalar>& mask_l,
                                  const PhaseMask<Scalar>& mask_l1, Scalar a) {
  return forward_field(prop, exact_pixels(mask_l, mask_l1, a));
}

template <typename Scalar>
TrapField<Scalar> transient_leading(const TrapField<Scalar>& field_l, const TrapField<Scalar>& field_l1, Scalar a) {
  if (field_l.size() != field_l1.size()) throw DimensionError("endpoint fields differ in length");
  return a * field_l + (1 - a) * field_l1;
}

template <typename Scalar>
struct SecondOrderFactors {
  Scalar alpha_l;
  Scalar alpha_l1;
};

template <typename Scalar>
SecondOrderFactors<Scalar> second_order_factors(Scalar a, Scalar mean_sq) {
  return {1 + (1 - a * a) * mean_sq / 6, 1 + a * (2 - a) * mean_sq / 6};
}

template <typename Scalar>
TrapField<Scalar> transient_second(const TrapField<Scalar>& field_l, const TrapField<Scalar>& field_l1, Scalar a,
                                   Scalar mean_sq) {
  if (field_l.size() != field_l1.size()) throw DimensionError("endpoint fields differ in length");
  if (!(mean_sq >= 0)) throw ConfigError("mean squared excursion must be non-negative");
  const auto f = second_order_factors(a, mean_sq);
  return a * f.alpha_l * field_l + (1 - a) * f.alpha_l1 * field_l1;
}

// eps_j = dphi_j^2 - <dphi^2>.
template <typename Scalar>
PhaseMask<Scalar> excursion_fluctuation(const PhaseMask<Scalar>& mask_l, const PhaseMask<Scalar>& mask_l1) {
  const PhaseMask<Scalar> d2 = excursion(mask_l, mask_l1).cwiseAbs2();
  return d2.array() - d2.mean();
}

// |R_n| <= ||A_n|| ||eps||.
template <typename Scalar>
RealVector<Scalar> residual_bound(const RealVector<Scalar>& row_norm, const PhaseMask<Scalar>& eps) {
  return row_norm * eps.norm();
}

// R_n = sum_j A_nj e^{i phi_j} eps_j, evaluated directly.
template <typename Scalar>
TrapField<Scalar> residual(const SeparablePropagator<Scalar>& prop, const PhaseMask<Scalar>& mask,
                           const PhaseMask<Scalar>& eps) {
  return forward_field(prop, unit_phasors(mask).cwiseProduct(eps.template cast<Complex<Scalar>>()));
}

// |a + (1-a) e^{i dphi}|^2.
inline double intensity_model(double a, double dphi) {
  return a * a + (1 - a) * (1 - a) + 2 * a * (1 - a) * std::cos(dphi);
}

inline double transient_intensity_expansion(double i_l, double i_l1, double dphi, double a) {
  if (i_l < 0 || i_l1 < 0) throw ConfigError("intensities must be non-negative");
  return a * a * i_l + (1 - a) * (1 - a) * i_l1 + 2 * a * (1 - a) * std::sqrt(i_l * i_l1) * std::cos(dphi);
}

inline double transient_intensity_second(double i_l, double i_l1, double dphi, double a, double mean_sq) {
  const auto f = second_order_factors(a, mean_sq);
  return transient_intensity_expansion(f.alpha_l * f.alpha_l * i_l, f.alpha_l1 * f.alpha_l1 * i_l1, dphi, a);
}

namespace detail {

template <typename Scalar>
TransientSample<Scalar> make_sample(double a, TrapField<Scalar> field, const RealVector<Scalar>& i0) {
  TransientSample<Scalar> s;
  s.a = a;
  s.ratio = field.cwiseAbs2().cwiseQuotient(i0);
  s.field = std::move(field);
  return s;
}

template <typename Scalar>
void check_i0(const RealVector<Scalar>& i0, Eigen::Index n) {
  if (i0.size() != n) throw DimensionError("I0 length does not match trap count");
  if (!(i0.array() > 0).all()) throw ConfigError("I0 must be positive");
}

}  // namespace detail

// Static trap layout: both holograms address the same sites.
template <typename Scalar>
std::vector<TransientSample<Scalar>> sample_refresh(const SeparablePropagator<Scalar>& prop,
                                                    const PhaseMask<Scalar>& mask_l, const PhaseMask<Scalar>& mask_l1,
                                                    const RefreshModel& model, const RealVector<Scalar>& i0) {
  check_masks(mask_l, mask_l1);
  detail::check_i0(i0, prop.traps());
  const TrapField<Scalar> e0 = forward(prop, mask_l), e1 = forward(prop, mask_l1);
  const Scalar msq = model.order == TransientOrder::second ? mean_sq_excursion(mask_l, mask_l1) : Scalar(0);
  std::vector<TransientSample<Scalar>> out;
  for (double a : model.a_values()) {
    const Scalar as = static_cast<Scalar>(a);
    TrapField<Scalar> e;
    if (a == 1.0) e = e0;
    else if (a == 0.0) e = e1;
    else if (model.order == TransientOrder::exact) e = transient_exact(prop, mask_l, mask_l1, as);
    else if (model.order == TransientOrder::second) e = transient_second(e0, e1, as, msq);
    else e = transient_leading(e0, e1, as);
    out.push_back(detail::make_sample(a, std::move(e), i0));
  }
  return out;
}

// Moving traps: frame l addresses `from`, frame l+1 addresses `to`. The exact
// order evaluates the interpolated mask at sites interpolated with the same a.
template <typename Scalar>
std::vector<TransientSample<Scalar>> sample_refresh(const OpticalConfig& cfg, const TrapLayout& from,
                                                    const TrapLayout& to, const PhaseMask<Scalar>& mask_l,
                                                    const PhaseMask<Scalar>& mask_l1, const TrapField<Scalar>& field_l,
                                                    const TrapField<Scalar>& field_l1, const RefreshModel& model,
                                                    const RealVector<Scalar>& i0) {
  check_masks(mask_l, mask_l1);
  if (from.size() != to.size() || field_l.size() != from.size() || field_l1.size() != from.size())
    throw DimensionError("refresh endpoints disagree on trap count");
  detail::check_i0(i0, from.size());
  const Scalar msq = model.order == TransientOrder::second ? mean_sq_excursion(mask_l, mask_l1) : Scalar(0);
  const Eigen::MatrixX3d p0 = from.positions(), p1 = to.positions();
  std::vector<TransientSample<Scalar>> out;
  for (double a : model.a_values()) {
    const Scalar as = static_cast<Scalar>(a);
    TrapField<Scalar> e;
    if (a == 1.0) {
      e = field_l;
    } else if (a == 0.0) {
      e = field_l1;
    } else if (model.order == TransientOrder::exact) {
      const auto prop = build_separable<Scalar>(cfg, from.moved_to(a * p0 + (1 - a) * p1));
      e = transient_exact(prop, mask_l, mask_l1, as);
    } else if (model.order == TransientOrder::second) {
      e = transient_second(field_l, field_l1, as, msq);
    } else {
      e = transient_leading(field_l, field_l1, as);
    }
    out.push_back(detail::make_sample(a, std::move(e), i0));
  }
  return out;
}

}  // namespace wpgs
