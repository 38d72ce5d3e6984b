#pragma once

#include <functional>
#include <optional>
#include <span>
#include <utility>

namespace lbd::quad {

using Integrand = std::function<double(double)>;

enum class SingularEnd { left, right, both };

/// Tolerances and budgets shared by every integral in the library.
struct QuadConfig {
  double abs_tol = 1e-8;
  double rel_tol = 1e-8;
  int max_subdivisions = 2000;
  /// Semi-infinite ranges are cut where the supplied tail bound drops below this.
  double tail_cutoff_mass = 1e-12;
  /// Power-law endpoint behaviour (x-a)^p or (b-x)^p with p in (-1, 0].
  /// When set, the integrand is regularised by x = a + (b-a) v^{1/(1+p)}.
  std::optional<double> singularity_exponent_hint;
  SingularEnd singular_end = SingularEnd::left;

  /// Throws DomainError if a tolerance is not positive or the budget is below 10.
  void validate() const;

  /// Copy with both tolerances scaled by `factor`.
  QuadConfig scaled(double factor) const;
  /// Copy with the singularity hint set.
  QuadConfig with_singularity(double exponent, SingularEnd end) const;
  /// Copy with the singularity hint cleared.
  QuadConfig without_singularity() const;
};

struct QuadResult {
  double value = 0.0;
  double err_est = 0.0;
  long evaluations = 0;
  int subdivisions = 0;
};

/// Adaptive Gauss-Kronrod (10/21) integration of f over (a, b).
///
/// Only interior nodes are ever evaluated, so integrable endpoint
/// singularities are allowed. Throws ConvergenceError (with the partial
/// value) when max_subdivisions is exhausted before
/// err_est <= max(abs_tol, rel_tol*|value|).
QuadResult integrate(const Integrand& f, double a, double b, const QuadConfig& cfg = {});

/// Same, starting from the partition a = p[0] < p[1] < ... < p[n] = b.
/// Useful when the caller knows where the integrand has kinks or peaks.
QuadResult integrate_partitioned(const Integrand& f, std::span<const double> points,
                                 const QuadConfig& cfg = {});

/// Integral of f over (a, inf). The range is truncated at the first
/// b = a + w, w doubling from `initial_width`, with tail_bound(b) below
/// cfg.tail_cutoff_mass; the bound is added to err_est.
QuadResult integrate_semi_infinite(const Integrand& f, double a, const QuadConfig& cfg,
                                   const std::function<double(double)>& tail_bound,
                                   double initial_width = 1.0);

/// Upper truncation point used by integrate_semi_infinite.
double truncation_point(double a, double cutoff, const std::function<double(double)>& tail_bound,
                        double initial_width = 1.0);

using OuterFn = std::function<double(double z, double inner_value)>;
using InnerFn = std::function<double(double z, double s)>;
using RangeFn = std::function<std::pair<double, double>(double z)>;

/// Evaluates  int_{z0}^{z1} outer(z, int_{s0(z)}^{s1(z)} inner(z, s) ds) dz.
///
/// The tolerance is split evenly: the outer integral gets cfg tolerances / 2,
/// each inner integral gets abs_tol / (2 * (z1 - z0)). Inner failures are
/// rethrown as ConvergenceError naming the offending z. The inner integral
/// is skipped (taken as 0) when s0(z) >= s1(z).
QuadResult integrate_nested(const OuterFn& outer, const InnerFn& inner, std::pair<double, double> z_range,
                            const RangeFn& s_range, const QuadConfig& cfg = {},
                            const QuadConfig* inner_cfg_override = nullptr);

/// Fixed inner range overload.
QuadResult integrate_nested(const OuterFn& outer, const InnerFn& inner, std::pair<double, double> z_range,
                            std::pair<double, double> s_range, const QuadConfig& cfg = {});

}  // namespace lbd::quad
