#include "lbd/laplace.hpp"

#include <cmath>
#include <utility>

#include "lbd/errors.hpp"

namespace lbd {

RandomHorizonSpec RandomHorizonSpec::infinite() { return RandomHorizonSpec(); }

RandomHorizonSpec RandomHorizonSpec::exponential(double theta) {
  if (!(theta > 0.0) || !std::isfinite(theta)) throw DomainError("random horizon: theta must be positive");
  RandomHorizonSpec v;
  v.kind_ = Kind::exponential;
  v.theta_ = theta;
  return v;
}

RandomHorizonSpec RandomHorizonSpec::custom(Transform transform) {
  if (!transform) throw DomainError("random horizon: empty transform");
  if (!(std::abs(transform(0.0) - 1.0) <= 1e-9)) throw DomainError("random horizon: transform must equal 1 at 0");
  double previous = 1.0 + 1e-9;
  for (double g : {0.25, 0.5, 1.0, 2.0, 4.0}) {
    const double value = transform(g);
    if (!(value <= previous + 1e-12) || !(value >= 0.0))
      throw DomainError("random horizon: transform must be nonincreasing with values in [0, 1]");
    previous = value;
  }
  RandomHorizonSpec v;
  v.kind_ = Kind::custom;
  v.transform_ = std::move(transform);
  return v;
}

double RandomHorizonSpec::theta() const {
  if (kind_ != Kind::exponential) throw DomainError("random horizon: theta requested for a non-exponential V");
  return theta_;
}

const RandomHorizonSpec::Transform& RandomHorizonSpec::transform() const {
  if (kind_ != Kind::custom) throw DomainError("random horizon: transform requested for a non-custom V");
  return transform_;
}

namespace laplace {

namespace {

constexpr double kWindow = 1e-8;
// Brownian closed forms cancel the vanishing factor exactly.
constexpr double kCancelWindow = 1e-4;

double phi(const LevyModel& m, double c, double g) { return models::laplace_exponent(m, c, g); }

// Central difference with a step relative to x (x > 0).
template <class F>
double derivative(F&& f, double x) {
  const double h = 1e-5 * x;
  return (f(x + h) - f(x - h)) / (2.0 * h);
}

void require_rate(double lambda, const char* what) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw DomainError(std::string(what) + " must be positive");
}

void require_gamma(double gamma) {
  if (!(gamma >= 0.0) || !std::isfinite(gamma)) throw DomainError("gamma must be >= 0 and finite");
}

}  // namespace

double laplace_sup_exp_T(const LevyModel& m, double c, double gamma, double lambda) {
  require_gamma(gamma);
  require_rate(lambda, "lambda");
  if (!std::isfinite(c)) throw DomainError("drift c must be finite");
  if (m.spectral_sign() == SpectralSign::negative)
    throw DomainError("laplace transform: requires a spectrally positive model");
  if (gamma == 0.0) return 1.0;
  const double root = models::laplace_exponent_inverse(m, c, lambda);
  const double p = phi(m, c, gamma);
  // (1 - gamma/root) / (lambda - phi(gamma)) -> 1 / (root phi'(root))
  if (std::abs(p - lambda) < kWindow * lambda)
    return lambda / (root * derivative([&](double x) { return phi(m, c, x); }, root));
  return lambda / (lambda - p) * (1.0 - gamma / root);
}

double laplace_sup_broken(const LaplaceQuery& q, const RandomHorizonSpec& v) {
  const LevyModel& m = q.model;
  require_rate(q.lambda, "lambda");
  require_gamma(q.gamma);
  if (!std::isfinite(q.c1) || !std::isfinite(q.c2)) throw DomainError("drift rates must be finite");
  if (m.spectral_sign() == SpectralSign::negative)
    throw DomainError("laplace transform: requires a spectrally positive model");
  const double root = models::laplace_exponent_inverse(m, q.c1, q.lambda);
  if (!(q.gamma > root)) throw DomainError("laplace transform: requires gamma > phi_1^{-1}(lambda)");

  std::function<double(double)> L;
  switch (v.kind()) {
    case RandomHorizonSpec::Kind::infinite: {
      const double slope = models::laplace_exponent_slope_at_zero(m, q.c2);
      if (!(slope > 0.0))
        throw UnsupportedRegimeError("laplace transform: V = infinity requires c2 - E X(1) > 0");
      L = [&m, &q, slope](double g) { return g == 0.0 ? 1.0 : g * slope / phi(m, q.c2, g); };
      break;
    }
    case RandomHorizonSpec::Kind::exponential: {
      const double theta = v.theta();
      L = [&m, &q, theta](double g) { return laplace_sup_exp_T(m, q.c2, g, theta); };
      break;
    }
    case RandomHorizonSpec::Kind::custom:
      L = v.transform();
      break;
  }
  auto H = [&](double g) { return (1.0 - L(g)) / g; };

  const double g = q.gamma;
  const double head = laplace_sup_exp_T(m, q.c1, g, q.lambda);
  const double p = phi(m, q.c1, g);
  double tail = 0.0;
  if (std::abs(p - q.lambda) < kWindow * q.lambda) {
    // both the bracket and phi_1(gamma) - lambda vanish at gamma = root
    const double dphi = derivative([&](double x) { return phi(m, q.c1, x); }, root);
    tail = g * q.lambda * derivative(H, root) / dphi;
  } else {
    tail = g * q.lambda / (p - q.lambda) * (H(g) - H(root));
  }
  return head + tail;
}

double brownian_laplace_inf(double c1, double c2, double lambda, double gamma) {
  require_rate(lambda, "lambda");
  require_gamma(gamma);
  if (!std::isfinite(c1)) throw DomainError("drift c1 must be finite");
  if (!(c2 > 0.0) || !std::isfinite(c2)) throw UnsupportedRegimeError("V = infinity requires c2 > 0");
  const double R = std::sqrt(c1 * c1 + 2.0 * lambda);
  const double root = R - c1;
  if (!(gamma > root)) throw DomainError("laplace transform: requires gamma > sqrt(c1^2 + 2 lambda) - c1");
  const double phi1 = 0.5 * gamma * gamma + c1 * gamma - lambda;
  const double phi2 = 0.5 * gamma * gamma + c2 * gamma;
  const double at_root = c1 * c1 + lambda + (c2 - c1) * R - c1 * c2;
  if (std::abs(phi1) < kCancelWindow * lambda) {
    // (phi2(gamma) - phi2(root)) / (phi1(gamma) - lambda) with the common factor gamma - root removed
    const double ratio = (0.5 * (gamma + root) + c2) / (0.5 * (gamma + root) + c1);
    return gamma * lambda * c2 * ratio / (phi2 * at_root);
  }
  const double num = gamma * lambda * c2 * (phi2 - c1 * c1 - lambda - (c2 - c1) * R + c1 * c2);
  return num / (phi1 * phi2 * at_root);
}

double brownian_laplace_exp_exp(double c1, double c2, double lambda, double theta, double gamma) {
  require_rate(lambda, "lambda");
  require_rate(theta, "theta");
  require_gamma(gamma);
  if (!std::isfinite(c1) || !std::isfinite(c2)) throw DomainError("drift rates must be finite");
  const double R1 = std::sqrt(c1 * c1 + 2.0 * lambda);
  const double R2 = std::sqrt(c2 * c2 + 2.0 * theta);
  const double a = R1 - c1;
  const double b = R2 - c2;
  if (!(gamma > a)) throw DomainError("laplace transform: requires gamma > sqrt(c1^2 + 2 lambda) - c1");

  // (b - a) / (theta - phi2(a)) and (b - x) / (theta - phi2(x)); theta = phi2(b)
  auto first = [&]() {
    const double den = theta - c1 * c1 - lambda - (c2 - c1) * R1 + c1 * c2;
    if (std::abs(den) < kWindow * theta) return 1.0 / (0.5 * (a + b) + c2);
    return (R2 - R1 + c1 - c2) / den;
  };
  auto second = [&](double x) {
    const double den = theta - 0.5 * x * x - c2 * x;
    if (std::abs(den) < kWindow * theta) return 1.0 / (0.5 * (b + x) + c2);
    return (b - x) / den;
  };
  const double f = first();
  auto N = [&](double x) { return f - a * second(x) / x; };

  const double phi1 = 0.5 * gamma * gamma + c1 * gamma - lambda;
  if (std::abs(phi1) < kCancelWindow * lambda) {
    // N(x) / (phi1(x) - lambda) with the common factor x - a removed
    const double x = gamma;
    const double ratio = (0.5 * (a + b + x) + c2) /
                         ((0.5 * (a + b) + c2) * x * (0.5 * (b + x) + c2) * (0.5 * (x + a) + c1));
    return gamma * lambda * theta * ratio / (a * b);
  }
  return gamma * lambda * theta * N(gamma) / (a * b * phi1);
}

}  // namespace laplace

}  // namespace lbd
