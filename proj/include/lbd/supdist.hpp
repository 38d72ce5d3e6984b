#pragma once

#include "lbd/models.hpp"
#include "lbd/quadrature.hpp"

namespace lbd {

/// Time horizon S of a supremum: finite or infinite.
class Horizon {
 public:
  static Horizon finite(double S);
  static Horizon infinite() { return Horizon(); }

  bool is_infinite() const noexcept { return infinite_; }
  /// Throws DomainError for the infinite horizon.
  double S() const;

  friend bool operator==(const Horizon&, const Horizon&) = default;

 private:
  Horizon() = default;
  bool infinite_ = true;
  double S_ = 0.0;
};

/// A probability together with its accumulated error estimate.
struct Probability {
  double value = 0.0;    ///< clamped to [0, 1] (densities: to [0, inf))
  double err_est = 0.0;
  double raw = 0.0;      ///< value before clamping
};

/// Broken-drift exceedance probability split into exceedance before the
/// break (A) and first exceedance after it (B).
struct SupResult {
  double probability = 0.0;  ///< clamp(A + B, 0, 1)
  double A_term = 0.0;
  double B_term = 0.0;
  double err_est = 0.0;
};

namespace supdist {

/// Default tolerances for the supremum formulas.
quad::QuadConfig default_config();

/// P(sup_{t<T} X(t) - ct > u) for spectrally positive X (or Brownian).
Probability sup_linear_sp(const LevyModel& m, double c, double u, double T,
                          const quad::QuadConfig& cfg = default_config());

/// P(sup_{t<T} Y(t) - ct > u) for spectrally negative Y (or Brownian).
Probability sup_linear_sn(const LevyModel& m, double c, double u, double T,
                          const quad::QuadConfig& cfg = default_config());

/// P(sup_{t<inf} X(t) - ct > u), spectrally positive, c > 0.
/// Gamma requires c delta > 1 (UnsupportedRegimeError otherwise).
Probability sup_linear_sp_inf(const LevyModel& m, double c, double u,
                              const quad::QuadConfig& cfg = default_config());

/// P(sup_{t<inf} Y(t) - ct > u), spectrally negative, c >= 0.
Probability sup_linear_sn_inf(const LevyModel& m, double c, double u);

/// P(sup_{t<T} X(t) - ct <= u, X(T) - cT in dz) / dz for z <= u.
Probability joint_sup_density_sp(const LevyModel& m, double c, double u, double T, double z,
                                 const quad::QuadConfig& cfg = default_config());

/// Same for spectrally negative Y.
Probability joint_sup_density_sn(const LevyModel& m, double c, double u, double T, double z,
                                 const quad::QuadConfig& cfg = default_config());

/// P(sup_{t<S} X(t) - c(t) > u), spectrally positive.
SupResult sup_broken_sp(const LevyModel& m, const BrokenDrift& drift, double u, const Horizon& horizon,
                        const quad::QuadConfig& cfg = default_config());

/// P(sup_{t<S} Y(t) - c(t) > u), spectrally negative.
SupResult sup_broken_sn(const LevyModel& m, const BrokenDrift& drift, double u, const Horizon& horizon,
                        const quad::QuadConfig& cfg = default_config());

}  // namespace supdist

}  // namespace lbd
