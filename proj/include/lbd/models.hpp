#pragma once

#include <string>
#include <variant>

#include "lbd/quadrature.hpp"

namespace lbd {

enum class SpectralSign { positive, negative, both };

/// Standard Brownian motion, sigma = 1.
struct BrownianStandard {};

/// Gamma subordinator: X(t) ~ Gamma(shape t, rate delta).
struct GammaProcess {
  double delta;
};

/// Zero-mean alpha-stable process totally skewed to the right (beta = 1),
/// characteristic function exp(-|k|^a (1 - i sgn(k) tan(pi a / 2))) at t = 1.
struct AlphaStable {
  double alpha;
};

/// One of the three supported families, optionally reflected (-X).
///
/// The spectral sign follows from the family: Brownian motion is both,
/// gamma and the skewed stable law are spectrally positive, and the
/// reflection of a spectrally positive model is spectrally negative.
class LevyModel {
 public:
  using Family = std::variant<BrownianStandard, GammaProcess, AlphaStable>;

  static LevyModel brownian();
  static LevyModel gamma(double delta);
  static LevyModel stable(double alpha);

  /// The process -X.
  LevyModel reflected() const;

  const Family& family() const noexcept { return family_; }
  bool is_reflected() const noexcept { return reflected_; }
  SpectralSign spectral_sign() const noexcept;

  bool is_brownian() const noexcept { return std::holds_alternative<BrownianStandard>(family_); }
  bool is_gamma() const noexcept { return std::holds_alternative<GammaProcess>(family_); }
  bool is_stable() const noexcept { return std::holds_alternative<AlphaStable>(family_); }
  double delta() const;  ///< gamma rate; throws for other families
  double alpha() const;  ///< stability index; throws for other families

  /// E X(1).
  double mean_rate() const noexcept;
  /// X(s) scales like s^h for small s: 1/2 (Brownian), 1 (gamma), 1/alpha (stable).
  double small_time_exponent() const noexcept;

  std::string name() const;

  friend bool operator==(const LevyModel& l, const LevyModel& r);

 private:
  LevyModel(Family f, bool reflected) : family_(f), reflected_(reflected) {}
  Family family_;
  bool reflected_ = false;
};

/// c(t) = c1 t on [0, T], c1 T + c2 (t - T) afterwards.
class BrokenDrift {
 public:
  BrokenDrift(double c1, double c2, double T);

  double c1() const noexcept { return c1_; }
  double c2() const noexcept { return c2_; }
  double T() const noexcept { return T_; }

  double operator()(double t) const noexcept { return t <= T_ ? c1_ * t : c1_ * T_ + c2_ * (t - T_); }

 private:
  double c1_;
  double c2_;
  double T_;
};

namespace normal {
double pdf(double x) noexcept;
double cdf(double x) noexcept;
}  // namespace normal

namespace models {

/// Tolerances used for the kernels inside the model functions (stable
/// integrals, gamma neg-part). Much tighter than the outer formulas need.
quad::QuadConfig kernel_config();

/// Density of X(t) at x.
double density(const LevyModel& m, double x, double t);
/// P(X(t) <= x).
double cdf(const LevyModel& m, double x, double t);
/// P(X(t) > x), computed directly (not as 1 - cdf) to keep tail accuracy.
double survival(const LevyModel& m, double x, double t);

/// E (X(s) - c s)^-.
double neg_part_mean(const LevyModel& m, double c, double s);

/// phi(gamma) = ln E exp(-gamma (X(1) - c)); spectrally positive models only.
double laplace_exponent(const LevyModel& m, double c, double gamma);
/// phi'(0) = c - E X(1).
double laplace_exponent_slope_at_zero(const LevyModel& m, double c);
/// The positive root of phi(gamma) = lambda, to relative tolerance 1e-12.
double laplace_exponent_inverse(const LevyModel& m, double c, double lambda);

}  // namespace models

/// Standardised totally skewed stable law (t = 1). Exposed for tests and
/// for the simulation calibration.
namespace stable {
double density(double y, double alpha);
double cdf(double y, double alpha);
double survival(double y, double alpha);
/// E (Z - k)^- for the standard law.
double neg_part_mean(double k, double alpha);
/// lim y^alpha P(Z > y).
double tail_constant(double alpha);
}  // namespace stable

}  // namespace lbd
