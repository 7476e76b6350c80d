#pragma once

// Paraxial Fresnel propagation from SLM pixels to trap sites.
//
// The trap field is E = A exp(i phi), with
//
//   A_nj = kappa_n * illum_j * U_{n,jx} * V_{n,jy},
//   kappa_n = d^2 / (i lambda (f + z_n)) * exp(i 2 pi (2f + z_n) / lambda),
//   U_{n,jx} = exp(-i pi (z_n u^2 / (lambda f^2) + 2 x_n u / (lambda f))),
//
// and V analogous in y. The separable form never builds A; DensePropagator
// builds it entry by entry from the combined 2D phase and is kept as an oracle.
//
// Masks are grid_x x grid_y; the dense oracle flattens them row-major,
// j = jx * grid_y + jy.

#include <cmath>
#include <complex>
#include <numbers>

#include <Eigen/Core>

#include "wpgs/errors.hpp"
#include "wpgs/geometry.hpp"

namespace wpgs {

template <typename Scalar>
using Complex = std::complex<Scalar>;
template <typename Scalar>
using RealVector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using ComplexVector = Eigen::Matrix<Complex<Scalar>, Eigen::Dynamic, 1>;
template <typename Scalar>
using RealMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using ComplexMatrix = Eigen::Matrix<Complex<Scalar>, Eigen::Dynamic, Eigen::Dynamic>;

// Per-pixel phases in radians, grid_x x grid_y.
template <typename Scalar>
using PhaseMask = RealMatrix<Scalar>;

// Complex amplitude per trap, in layout order.
template <typename Scalar>
using TrapField = ComplexVector<Scalar>;

template <typename Derived>
auto intensities(const Eigen::MatrixBase<Derived>& field) {
  return field.cwiseAbs2().eval();
}

template <typename Derived>
auto phases(const Eigen::MatrixBase<Derived>& field) {
  using Scalar = typename Derived::Scalar::value_type;
  return field.unaryExpr([](const Complex<Scalar>& e) { return std::arg(e); }).eval();
}

// Wrapped into (-pi, pi]; -pi maps to +pi.
template <typename Scalar>
Scalar wrap_phase(Scalar x) {
  constexpr Scalar two_pi = 2 * std::numbers::pi_v<Scalar>;
  constexpr Scalar pi = std::numbers::pi_v<Scalar>;
  Scalar r = x - two_pi * std::floor((x + pi) / two_pi);
  if (r <= -pi) r += two_pi;
  if (r > pi) r -= two_pi;
  return r;
}

// Canonical form for serialization: every entry in [0, 2 pi).
template <typename Scalar>
PhaseMask<Scalar> canonical(const PhaseMask<Scalar>& mask) {
  constexpr Scalar two_pi = 2 * std::numbers::pi_v<Scalar>;
  return mask.unaryExpr([](Scalar p) {
    Scalar r = p - two_pi * std::floor(p / two_pi);
    return r >= two_pi ? Scalar(0) : r;
  });
}

namespace detail {

// exp(i 2 pi t) with t reduced modulo 1 first, so large optical path lengths keep precision.
inline std::complex<double> cycles_phasor(double t) {
  const double frac = t - std::floor(t);
  return std::polar(1.0, 2 * std::numbers::pi * frac);
}

inline std::complex<double> trap_constant(const OpticalConfig& cfg, double z) {
  const double d2 = cfg.pixel_pitch * cfg.pixel_pitch;
  const std::complex<double> prefactor = d2 / (std::complex<double>(0, 1) * cfg.wavelength * (cfg.focal_length + z));
  return prefactor * cycles_phasor((2 * cfg.focal_length + z) / cfg.wavelength);
}

}  // namespace detail

template <typename Scalar>
struct SeparablePropagator {
  // Unit-modulus axial phase c_n = exp(i 2 pi (2f + z_n) / lambda).
  ComplexVector<Scalar> axial;
  // Full per-trap constant kappa_n: axial phase times d^2 / (i lambda (f + z_n)).
  ComplexVector<Scalar> constant;
  ComplexMatrix<Scalar> U;  // N x grid_x
  ComplexMatrix<Scalar> V;  // N x grid_y
  RealMatrix<Scalar> illumination;

  Eigen::Index traps() const { return U.rows(); }
  Eigen::Index grid_x() const { return U.cols(); }
  Eigen::Index grid_y() const { return V.cols(); }
};

template <typename Scalar = double>
SeparablePropagator<Scalar> build_separable(const OpticalConfig& cfg, const TrapLayout& layout) {
  cfg.validate();
  if (layout.empty()) throw DimensionError("layout has no traps");
  const Eigen::Index n_traps = layout.size();
  const Eigen::VectorXd u = cfg.pixel_coords_x(), v = cfg.pixel_coords_y();
  const double lf = cfg.wavelength * cfg.focal_length;
  const double lf2 = lf * cfg.focal_length;
  const double pi = std::numbers::pi;

  SeparablePropagator<Scalar> p;
  p.axial.resize(n_traps);
  p.constant.resize(n_traps);
  p.U.resize(n_traps, cfg.grid_x);
  p.V.resize(n_traps, cfg.grid_y);
  for (Eigen::Index n = 0; n < n_traps; ++n) {
    const auto& s = layout[n];
    p.axial(n) = Complex<Scalar>(detail::cycles_phasor((2 * cfg.focal_length + s.z()) / cfg.wavelength));
    p.constant(n) = Complex<Scalar>(detail::trap_constant(cfg, s.z()));
    for (Eigen::Index j = 0; j < cfg.grid_x; ++j) {
      const double ph = -pi * (s.z() * u(j) * u(j) / lf2 + 2 * s.x() * u(j) / lf);
      p.U(n, j) = Complex<Scalar>(std::polar(1.0, ph));
    }
    for (Eigen::Index j = 0; j < cfg.grid_y; ++j) {
      const double ph = -pi * (s.z() * v(j) * v(j) / lf2 + 2 * s.y() * v(j) / lf);
      p.V(n, j) = Complex<Scalar>(std::polar(1.0, ph));
    }
  }
  p.illumination = cfg.illumination().cast<Scalar>();
  return p;
}

// E_n = kappa_n * (U (illum .* P) V^T)_nn for an arbitrary complex pixel field P.
template <typename Scalar, typename Derived>
TrapField<Scalar> forward_field(const SeparablePropagator<Scalar>& prop, const Eigen::MatrixBase<Derived>& pixels) {
  if (pixels.rows() != prop.grid_x() || pixels.cols() != prop.grid_y())
    throw DimensionError("pixel field does not match the propagator grid");
  const ComplexMatrix<Scalar> slm = pixels.cwiseProduct(prop.illumination.template cast<Complex<Scalar>>());
  const ComplexMatrix<Scalar> partial = prop.U * slm;  // N x grid_y
  return prop.constant.cwiseProduct(partial.cwiseProduct(prop.V).rowwise().sum());
}

template <typename Scalar>
ComplexMatrix<Scalar> unit_phasors(const PhaseMask<Scalar>& mask) {
  return mask.unaryExpr([](Scalar p) { return std::polar(Scalar(1), p); });
}

template <typename Scalar>
TrapField<Scalar> forward(const SeparablePropagator<Scalar>& prop, const PhaseMask<Scalar>& mask) {
  if (mask.rows() != prop.grid_x() || mask.cols() != prop.grid_y())
    throw DimensionError("mask dimensions do not match the propagator grid");
  return forward_field(prop, unit_phasors(mask));
}

template <typename Scalar>
struct BackPropagation {
  PhaseMask<Scalar> mask;
  // Pixels whose back-propagated field was exactly zero; their phase is set to 0.
  Eigen::Index undefined_pixels = 0;
};

// arg(U^H diag(b) V^*). Callers fold conj(kappa) into b to obtain arg(A^H b').
template <typename Scalar, typename Derived>
BackPropagation<Scalar> adjoint_phase(const SeparablePropagator<Scalar>& prop, const Eigen::MatrixBase<Derived>& b) {
  if (b.size() != prop.traps()) throw DimensionError("back-propagation source length does not match trap count");
  const ComplexMatrix<Scalar> weighted_v = b.asDiagonal() * prop.V.conjugate();
  const ComplexMatrix<Scalar> pixels = prop.U.adjoint() * weighted_v;
  BackPropagation<Scalar> out;
  out.mask.resize(prop.grid_x(), prop.grid_y());
  for (Eigen::Index jy = 0; jy < pixels.cols(); ++jy) {
    for (Eigen::Index jx = 0; jx < pixels.rows(); ++jx) {
      const Complex<Scalar> value = pixels(jx, jy);
      if (value == Complex<Scalar>(0)) {
        out.mask(jx, jy) = 0;
        ++out.undefined_pixels;
      } else {
        out.mask(jx, jy) = std::arg(value);
      }
    }
  }
  return out;
}

// |A_n| = |kappa_n| * ||illum||_F; every row of A has this Euclidean norm.
template <typename Scalar>
RealVector<Scalar> row_norms(const SeparablePropagator<Scalar>& prop) {
  return prop.constant.cwiseAbs() * prop.illumination.norm();
}

template <typename Scalar>
struct DensePropagator {
  ComplexMatrix<Scalar> A;  // N x (grid_x * grid_y)
  Eigen::Index grid_x = 0;
  Eigen::Index grid_y = 0;
};

inline constexpr Eigen::Index kDenseEntryLimit = Eigen::Index(1) << 22;

template <typename Scalar = double>
DensePropagator<Scalar> build_dense(const OpticalConfig& cfg, const TrapLayout& layout) {
  cfg.validate();
  if (layout.empty()) throw DimensionError("layout has no traps");
  const Eigen::Index n_traps = layout.size(), pixels = cfg.pixel_count();
  if (n_traps * pixels > kDenseEntryLimit)
    throw DimensionError("dense propagation matrix exceeds the oracle size guard");
  const Eigen::VectorXd u = cfg.pixel_coords_x(), v = cfg.pixel_coords_y();
  const Eigen::MatrixXd illum = cfg.illumination();
  const double lf = cfg.wavelength * cfg.focal_length;
  const double lf2 = lf * cfg.focal_length;
  const double pi = std::numbers::pi;

  DensePropagator<Scalar> d;
  d.grid_x = cfg.grid_x;
  d.grid_y = cfg.grid_y;
  d.A.resize(n_traps, pixels);
  for (Eigen::Index n = 0; n < n_traps; ++n) {
    const auto& s = layout[n];
    const std::complex<double> kappa = detail::trap_constant(cfg, s.z());
    for (Eigen::Index jx = 0; jx < cfg.grid_x; ++jx) {
      for (Eigen::Index jy = 0; jy < cfg.grid_y; ++jy) {
        const double r2 = u(jx) * u(jx) + v(jy) * v(jy);
        const double offset = pi * s.z() * r2 / lf2 + 2 * pi * (s.x() * u(jx) + s.y() * v(jy)) / lf;
        d.A(n, jx * cfg.grid_y + jy) = Complex<Scalar>(kappa * illum(jx, jy) * std::polar(1.0, -offset));
      }
    }
  }
  return d;
}

template <typename Scalar>
ComplexVector<Scalar> flatten_row_major(const ComplexMatrix<Scalar>& pixels) {
  ComplexVector<Scalar> flat(pixels.size());
  for (Eigen::Index jx = 0; jx < pixels.rows(); ++jx)
    for (Eigen::Index jy = 0; jy < pixels.cols(); ++jy) flat(jx * pixels.cols() + jy) = pixels(jx, jy);
  return flat;
}

template <typename Scalar>
TrapField<Scalar> forward_dense(const DensePropagator<Scalar>& dense, const PhaseMask<Scalar>& mask) {
  if (mask.rows() != dense.grid_x || mask.cols() != dense.grid_y)
    throw DimensionError("mask dimensions do not match the dense propagator");
  return dense.A * flatten_row_major<Scalar>(unit_phasors(mask));
}

template <typename Scalar>
TrapField<Scalar> forward_dense_field(const DensePropagator<Scalar>& dense, const ComplexMatrix<Scalar>& pixels) {
  if (pixels.rows() != dense.grid_x || pixels.cols() != dense.grid_y)
    throw DimensionError("pixel field does not match the dense propagator");
  return dense.A * flatten_row_major<Scalar>(pixels);
}

}  // namespace wpgs
