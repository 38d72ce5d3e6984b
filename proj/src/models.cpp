#include "lbd/models.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <sstream>

#include <boost/math/special_functions/gamma.hpp>

#include "lbd/errors.hpp"

namespace lbd {

using std::numbers::pi;

LevyModel LevyModel::brownian() { return LevyModel(BrownianStandard{}, false); }

LevyModel LevyModel::gamma(double delta) {
  if (!(delta > 0.0) || !std::isfinite(delta)) throw DomainError("gamma process: delta must be positive");
  return LevyModel(GammaProcess{delta}, false);
}

LevyModel LevyModel::stable(double alpha) {
  if (!(alpha > 1.0 && alpha < 2.0)) throw DomainError("stable process: alpha must lie strictly in (1, 2)");
  return LevyModel(AlphaStable{alpha}, false);
}

LevyModel LevyModel::reflected() const { return LevyModel(family_, !reflected_); }

SpectralSign LevyModel::spectral_sign() const noexcept {
  if (is_brownian()) return SpectralSign::both;
  return reflected_ ? SpectralSign::negative : SpectralSign::positive;
}

double LevyModel::delta() const {
  if (!is_gamma()) throw DomainError("delta() requested for a non-gamma model");
  return std::get<GammaProcess>(family_).delta;
}

double LevyModel::alpha() const {
  if (!is_stable()) throw DomainError("alpha() requested for a non-stable model");
  return std::get<AlphaStable>(family_).alpha;
}

double LevyModel::mean_rate() const noexcept {
  if (const auto* g = std::get_if<GammaProcess>(&family_)) return reflected_ ? -1.0 / g->delta : 1.0 / g->delta;
  return 0.0;
}

double LevyModel::small_time_exponent() const noexcept {
  if (is_brownian()) return 0.5;
  if (is_gamma()) return 1.0;
  return 1.0 / std::get<AlphaStable>(family_).alpha;
}

std::string LevyModel::name() const {
  std::ostringstream out;
  out.precision(17);
  if (reflected_) out << "-";
  if (is_brownian()) out << "brownian";
  if (is_gamma()) out << "gamma(delta=" << delta() << ")";
  if (is_stable()) out << "stable(alpha=" << alpha() << ")";
  return out.str();
}

bool operator==(const LevyModel& l, const LevyModel& r) {
  if (l.reflected_ != r.reflected_ || l.family_.index() != r.family_.index()) return false;
  if (l.is_gamma()) return l.delta() == r.delta();
  if (l.is_stable()) return l.alpha() == r.alpha();
  return true;
}

BrokenDrift::BrokenDrift(double c1, double c2, double T) : c1_(c1), c2_(c2), T_(T) {
  if (!(c1 >= 0.0) || !(c2 >= 0.0)) throw DomainError("broken drift: c1 and c2 must be non-negative");
  if (!(T > 0.0) || !std::isfinite(T)) throw DomainError("broken drift: break time T must be positive");
}

namespace normal {
double pdf(double x) noexcept { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * pi); }
double cdf(double x) noexcept { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }
}  // namespace normal

namespace models {

namespace {

void require_time(double t) {
  if (!(t > 0.0) || !std::isfinite(t)) throw DomainError("time argument must be positive and finite");
}

double gamma_log_density(double delta, double x, double t) {
  return t * std::log(delta) - boost::math::lgamma(t) + (t - 1.0) * std::log(x) - delta * x;
}

// Density, cdf and survival of the unreflected family.
double base_density(const LevyModel& m, double x, double t) {
  if (m.is_brownian()) return normal::pdf(x / std::sqrt(t)) / std::sqrt(t);
  if (m.is_gamma()) {
    if (!(x > 0.0)) return 0.0;
    return std::exp(gamma_log_density(m.delta(), x, t));
  }
  const double scale = std::pow(t, 1.0 / m.alpha());
  return stable::density(x / scale, m.alpha()) / scale;
}

double base_cdf(const LevyModel& m, double x, double t) {
  if (m.is_brownian()) return normal::cdf(x / std::sqrt(t));
  if (m.is_gamma()) return x > 0.0 ? boost::math::gamma_p(t, m.delta() * x) : 0.0;
  return stable::cdf(x / std::pow(t, 1.0 / m.alpha()), m.alpha());
}

double base_survival(const LevyModel& m, double x, double t) {
  if (m.is_brownian()) return normal::cdf(-x / std::sqrt(t));
  if (m.is_gamma()) return x > 0.0 ? boost::math::gamma_q(t, m.delta() * x) : 1.0;
  return stable::survival(x / std::pow(t, 1.0 / m.alpha()), m.alpha());
}

double base_neg_part(const LevyModel& m, double c, double s) {
  if (m.is_brownian()) {
    const double rs = std::sqrt(s);
    return c * s * normal::cdf(c * rs) + rs * normal::pdf(c * rs);
  }
  if (m.is_gamma()) {
    // k P(X <= k) - E[X; X <= k]
    const double level = c * s;
    if (!(level > 0.0)) return 0.0;
    const double x = m.delta() * level;
    const double v = level * boost::math::gamma_p(s, x) - s / m.delta() * boost::math::gamma_p(s + 1.0, x);
    return std::max(0.0, v);
  }
  const double alpha = m.alpha();
  const double scale = std::pow(s, 1.0 / alpha);
  return scale * stable::neg_part_mean(c * s / scale, alpha);
}

}  // namespace

quad::QuadConfig kernel_config() {
  quad::QuadConfig cfg;
  cfg.abs_tol = 1e-15;
  cfg.rel_tol = 1e-12;
  cfg.max_subdivisions = 4000;
  return cfg;
}

double density(const LevyModel& m, double x, double t) {
  require_time(t);
  return base_density(m, m.is_reflected() ? -x : x, t);
}

double cdf(const LevyModel& m, double x, double t) {
  require_time(t);
  if (m.is_reflected()) return base_survival(m, -x, t);
  return base_cdf(m, x, t);
}

double survival(const LevyModel& m, double x, double t) {
  require_time(t);
  if (m.is_reflected()) return base_cdf(m, -x, t);
  return base_survival(m, x, t);
}

double neg_part_mean(const LevyModel& m, double c, double s) {
  require_time(s);
  if (!std::isfinite(c)) throw DomainError("neg_part_mean: drift must be finite");
  if (!m.is_reflected()) return base_neg_part(m, c, s);
  // (-X - cs)^- = (X + cs)^+ = (X + cs) + (X + cs)^-
  const double base_mean = m.is_gamma() ? s / m.delta() : 0.0;
  return base_mean + c * s + base_neg_part(m, -c, s);
}

double laplace_exponent(const LevyModel& m, double c, double gamma) {
  if (!(gamma >= 0.0) || !std::isfinite(gamma)) throw DomainError("laplace_exponent: gamma must be >= 0");
  if (m.spectral_sign() == SpectralSign::negative)
    throw DomainError("laplace_exponent: defined here for spectrally positive models only");
  if (gamma == 0.0) return 0.0;
  if (m.is_brownian()) return 0.5 * gamma * gamma + c * gamma;
  if (m.is_gamma()) return c * gamma + std::log(m.delta() / (m.delta() + gamma));

  // ln int e^{-gamma x} f(x, 1) dx, the left tail of f is super-exponential.
  const double alpha = m.alpha();
  quad::QuadConfig cfg = kernel_config();
  cfg.abs_tol = 1e-300;
  auto g = [&](double x) { return std::exp(-gamma * x) * stable::density(x, alpha); };
  // Left cut: walk out until the integrand has peaked and dropped below 1e-18 of it.
  double left = -1.0;
  double peak = g(0.0);
  for (int i = 0; i < 200; ++i) {
    const double v = g(left);
    peak = std::max(peak, v);
    if (v < peak * 1e-18 && left < -2.0) break;
    left *= 1.25;
  }
  // Right cut: e^{-gamma b} P(Z > b) bounds the rest.
  double right = 1.0;
  while (std::exp(-gamma * right) * stable::survival(right, alpha) > 1e-18 * peak && right < 1e6) right *= 2.0;
  const std::array<double, 4> pts = {left, 0.0, 1.0, right};
  const double mgf = quad::integrate_partitioned(g, pts, cfg).value;
  return std::log(mgf) + c * gamma;
}

double laplace_exponent_slope_at_zero(const LevyModel& m, double c) {
  if (m.spectral_sign() == SpectralSign::negative)
    throw DomainError("laplace exponent: defined here for spectrally positive models only");
  return c - m.mean_rate();
}

double laplace_exponent_inverse(const LevyModel& m, double c, double lambda) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw DomainError("laplace_exponent_inverse: lambda must be > 0");
  if (m.is_brownian()) return std::sqrt(c * c + 2.0 * lambda) - c;
  // phi is convex with phi(0) = 0, so phi = lambda > 0 has a single positive root.
  double lo = 0.0;
  double hi = 1.0;
  int grow = 0;
  while (laplace_exponent(m, c, hi) < lambda) {
    lo = hi;
    hi *= 2.0;
    if (++grow > 200) throw ConvergenceError("laplace_exponent_inverse: lambda not attained", hi, hi);
  }
  for (int i = 0; i < 200 && hi - lo > 1e-12 * hi; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (laplace_exponent(m, c, mid) < lambda)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace models

}  // namespace lbd
