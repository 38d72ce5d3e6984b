#pragma once

#include "lbd/models.hpp"
#include "lbd/quadrature.hpp"
#include "lbd/supdist.hpp"

namespace lbd::closedforms {

/// P(sup_{t<T} W(t) - ct > u) for standard Brownian motion.
double brownian_A(double c, double T, double u);

/// P(sup_{t<inf} W(t) - c(t) > u) for the broken drift (c1 on [0, T], c2 after).
/// Returns 1 when c2 = 0.
double brownian_sup_broken_inf(double c1, double c2, double T, double u);

/// Finite-horizon counterpart on [0, S), S > T. The two z-integrals are
/// evaluated numerically (the inner s-integral by nested quadrature).
Probability brownian_sup_broken_finite(double c1, double c2, double T, double S, double u,
                                       const quad::QuadConfig& cfg = supdist::default_config());

enum class IdentityVariant { minus, plus };

struct IdentitySides {
  double lhs = 0.0;  ///< the double integral, by nested quadrature
  double rhs = 0.0;  ///< the normal-cdf value it should equal
  double err_est = 0.0;
};

/// Both sides of the two Brownian integral identities:
///   minus: e^{-cu - c^2 T/2}/(2 pi) int z e^{-cz} I(z) dz = Phi(-u/sqrt(T) - c sqrt(T))
///   plus:  e^{+cu - c^2 T/2}/(2 pi) int z e^{+cz} I(z) dz = Phi(-u/sqrt(T) + c sqrt(T))
/// with I(z) = int_0^T (T-s)^{-3/2} s^{-1/2} exp(-z^2/(2(T-s)) - u^2/(2s)) ds.
IdentitySides brownian_identity_check(double c, double T, double u, IdentityVariant variant,
                                      const quad::QuadConfig& cfg = supdist::default_config());

/// P(sup_{t<T} Z(t) - ct > u) for the stable model, written directly in
/// terms of the real-axis cosine integral for the density. T may be
/// infinite (then c > 0). Independent of the models/supdist route.
Probability stable_A(const LevyModel& m, double c, const Horizon& T, double u,
                     const quad::QuadConfig& cfg = supdist::default_config());

namespace detail {
/// (1/pi) int_0^inf exp(-t^a) cos(t y - t^a tan(pi a / 2)) dt, with the
/// asymptotic series for large y.
double stable_cosine_density(double y, double alpha);
/// 1/2 + (1/pi) int_0^inf exp(-t^a) sin(t^a tan(pi a / 2) - t y) / t dt.
double stable_sine_survival(double y, double alpha);
}  // namespace detail

}  // namespace lbd::closedforms
