#pragma once

#include <functional>

#include "lbd/models.hpp"

namespace lbd {

/// Law of the extra time V after the (exponential) break time.
class RandomHorizonSpec {
 public:
  enum class Kind { infinite, exponential, custom };
  using Transform = std::function<double(double)>;

  static RandomHorizonSpec infinite();
  static RandomHorizonSpec exponential(double theta);
  /// gamma -> E exp(-gamma sup_{t<V}(X(t) - c2 t)). Spot-checked: 1 at 0 and nonincreasing.
  static RandomHorizonSpec custom(Transform transform);

  Kind kind() const noexcept { return kind_; }
  double theta() const;  ///< throws DomainError unless exponential
  const Transform& transform() const;  ///< throws DomainError unless custom

 private:
  RandomHorizonSpec() = default;
  Kind kind_ = Kind::infinite;
  double theta_ = 0.0;
  Transform transform_;
};

struct LaplaceQuery {
  LevyModel model = LevyModel::brownian();
  double c1 = 0.0;
  double c2 = 0.0;
  double lambda = 1.0;  ///< rate of the exponential break time T
  double gamma = 0.0;
};

namespace laplace {

/// E exp(-gamma sup_{t<T}(X(t) - ct)), T ~ Exp(lambda) independent of X.
double laplace_sup_exp_T(const LevyModel& m, double c, double gamma, double lambda);

/// E exp(-gamma sup_{t<T+V}(X(t) - c(t))) with T ~ Exp(lambda) the break time.
/// Requires gamma > phi_1^{-1}(lambda) (DomainError otherwise).
double laplace_sup_broken(const LaplaceQuery& q, const RandomHorizonSpec& v);

/// Brownian closed form of laplace_sup_broken with V = infinity.
double brownian_laplace_inf(double c1, double c2, double lambda, double gamma);

/// Brownian closed form of laplace_sup_broken with V ~ Exp(theta).
double brownian_laplace_exp_exp(double c1, double c2, double lambda, double theta, double gamma);

}  // namespace laplace

}  // namespace lbd
