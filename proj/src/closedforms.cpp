#include "lbd/closedforms.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include <boost/math/special_functions/gamma.hpp>

#include "lbd/errors.hpp"

namespace lbd::closedforms {

using std::numbers::pi;

namespace {

void require_positive(double x, const char* what) {
  if (!(x > 0.0) || !std::isfinite(x)) throw DomainError(std::string(what) + " must be positive and finite");
}

void require_finite(double x, const char* what) {
  if (!std::isfinite(x)) throw DomainError(std::string(what) + " must be finite");
}

// ln Phi(x), accurate far into the lower tail.
double log_Phi(double x) {
  if (x > -30.0) return std::log(normal::cdf(x));
  const double z = 1.0 / (x * x);
  const double series = 1.0 - z + 3.0 * z * z - 15.0 * z * z * z + 105.0 * z * z * z * z;
  return -0.5 * x * x - std::log(-x * std::sqrt(2.0 * pi)) + std::log(series);
}

// e^{a} Phi(x) without overflow in the factors.
double exp_Phi(double a, double x) { return std::exp(a + log_Phi(x)); }

// I(z) = int_0^T (T-s)^{-3/2} s^{-1/2} exp(-z^2/(2(T-s)) - u^2/(2s)) ds
double identity_inner(double T, double u, double z, double s) {
  const double r = T - s;
  if (!(r > 0.0) || !(s > 0.0)) return 0.0;
  return std::exp(-z * z / (2.0 * r) - u * u / (2.0 * s)) / (r * std::sqrt(r * s));
}

// pre * int_0^inf z e^{kz} w(z) I(z) dz with 0 <= w <= 1. Since
// I(z) = sqrt(2 pi / T) e^{-(u+z)^2/(2T)} / z, the tail beyond b is at most
// pre 2 pi e^{k^2 T/2 - k u} Phi(-(b + u - kT)/sqrt(T)).
quad::QuadResult weighted_identity_integral(double k, double T, double u, double pre,
                                            const std::function<double(double)>& weight,
                                            const quad::QuadConfig& cfg) {
  const double rt = std::sqrt(T);
  auto tail = [&](double b) { return pre * 2.0 * pi * exp_Phi(k * k * T / 2.0 - k * u, -(b + u - k * T) / rt); };
  const double zmax = quad::truncation_point(0.0, cfg.tail_cutoff_mass, tail, std::max(1.0, rt));
  auto r = quad::integrate_nested(
      [&](double z, double inner) { return pre * z * std::exp(k * z) * weight(z) * inner; },
      [&](double z, double s) { return identity_inner(T, u, z, s); }, {0.0, zmax}, std::pair{0.0, T},
      cfg.without_singularity());
  r.err_est += tail(zmax);
  return r;
}

// ---------------------------------------------------------------- stable

struct Law {
  double alpha;
  double tau;  // tan(pi alpha / 2)
  double K;    // -1 / cos(pi alpha / 2)
  double tmax; // exp(-t^alpha) < 1e-18 beyond
  double switch_y;
};

Law law(double alpha) {
  Law l;
  l.alpha = alpha;
  l.tau = std::tan(pi * alpha / 2.0);
  l.K = -1.0 / std::cos(pi * alpha / 2.0);
  l.tmax = std::pow(41.5, 1.0 / alpha);
  // terms of the asymptotic series shrink roughly like K y^{-alpha}
  l.switch_y = std::max(25.0, std::pow(40.0 * l.K, 1.0 / alpha));
  return l;
}

quad::QuadConfig kernel_cfg() {
  quad::QuadConfig cfg;
  cfg.abs_tol = 1e-14;
  cfg.rel_tol = 1e-11;
  cfg.max_subdivisions = 20000;
  return cfg;
}

// Equal panels of the oscillation phase t y - tau t^a over (0, tmax).
std::vector<double> phase_panels(const Law& l, double y) {
  const double turns = (std::abs(y) * l.tmax + std::abs(l.tau) * std::pow(l.tmax, l.alpha)) / pi;
  const int n = static_cast<int>(std::ceil(turns)) + 4;
  std::vector<double> pts(n + 1);
  for (int i = 0; i <= n; ++i) pts[i] = l.tmax * i / n;
  return pts;
}

// sum_k -sin(k pi a) K^k Gamma(k a + 1 - d) / k! y^{-k a - 1 + d} / pi; d = 0 density, d = 1 survival
double asymptotic(const Law& l, double y, int d) {
  double sum = 0.0;
  double previous = INFINITY;
  for (int k = 1; k <= 30; ++k) {
    const double lg = boost::math::lgamma(k * l.alpha + 1.0 - d) - boost::math::lgamma(k + 1.0) +
                      k * std::log(l.K) + (-k * l.alpha - 1.0 + d) * std::log(y);
    const double term = -std::sin(k * pi * l.alpha) * std::exp(lg);
    const double size = std::exp(lg);
    if (size > previous) break;
    sum += term;
    previous = size;
    if (size < 1e-17 * std::abs(sum)) break;
  }
  return sum / pi;
}

double cosine_density(const Law& l, double y) {
  if (y >= l.switch_y) return asymptotic(l, y, 0);
  auto g = [&](double t) {
    const double ta = std::pow(t, l.alpha);
    return std::exp(-ta) * std::cos(t * y - ta * l.tau);
  };
  const auto pts = phase_panels(l, y);
  return quad::integrate_partitioned(g, pts, kernel_cfg()).value / pi;
}

double sine_survival(const Law& l, double y) {
  if (y >= l.switch_y) return asymptotic(l, y, 1);
  auto g = [&](double t) {
    const double ta = std::pow(t, l.alpha);
    return std::exp(-ta) * std::sin(ta * l.tau - t * y) / t;
  };
  const auto pts = phase_panels(l, y);
  return 0.5 + quad::integrate_partitioned(g, pts, kernel_cfg()).value / pi;
}

// f(x, s) = s^{-1/a} k(x s^{-1/a})
double density_at(const Law& l, double x, double s) {
  const double scale = std::pow(s, -1.0 / l.alpha);
  return scale * cosine_density(l, x * scale);
}

// E(Z(r) - cr)^- = r^{1/a} int_{-inf}^{k} (k - y) k(y) dy with k = c r^{1 - 1/a}
double neg_part(const Law& l, double c, double r, const quad::QuadConfig& cfg) {
  const double k = c * std::pow(r, 1.0 - 1.0 / l.alpha);
  // the left tail of the density is far below double precision by -15
  const double lo = -15.0;
  if (!(k > lo)) return 0.0;
  std::vector<double> pts = {lo};
  for (double b : {-3.0, 0.0, 3.0, l.switch_y})
    if (b > lo && b < k) pts.push_back(b);
  pts.push_back(k);
  auto g = [&](double y) { return (k - y) * cosine_density(l, y); };
  return std::pow(r, 1.0 / l.alpha) * quad::integrate_partitioned(g, pts, cfg).value;
}

Probability finite_A(const Law& l, double c, double T, double u, const quad::QuadConfig& cfg) {
  const double head = sine_survival(l, (u + c * T) * std::pow(T, -1.0 / l.alpha));
  const quad::QuadConfig kernel = cfg.scaled(0.01).without_singularity();
  auto g = [&](double s) {
    const double r = T - s;
    if (!(r > 0.0) || !(s > 0.0)) return 0.0;
    return neg_part(l, c, r, kernel) / r * density_at(l, u + c * s, s);
  };
  // E(Z(r) - cr)^- / r ~ r^{1/a - 1} as s -> T
  const auto r = quad::integrate(g, 0.0, T, cfg.with_singularity(1.0 / l.alpha - 1.0, quad::SingularEnd::right));
  const double raw = head + r.value;
  return Probability{std::clamp(raw, 0.0, 1.0), r.err_est, raw};
}

// c int_0^inf f(u + cs, s) ds: (0, 1) directly, (1, B) in log s, and the
// leading asymptotic term beyond B.
Probability infinite_A(const Law& l, double c, double u, const quad::QuadConfig& cfg) {
  const double B = 1e12;
  auto f = [&](double s) { return density_at(l, u + c * s, s); };
  const quad::QuadConfig part = cfg.scaled(1.0 / 3.0).without_singularity();
  const auto head = quad::integrate(f, 0.0, 1.0, part);
  std::vector<double> pts;
  for (int i = 0; i <= 32; ++i) pts.push_back(std::log(B) * i / 32.0);
  const auto body = quad::integrate_partitioned([&](double w) { return f(std::exp(w)) * std::exp(w); }, pts, part);
  // s a1 (u + cs)^{-1-a} with a1 = -sin(pi a) K Gamma(a + 1) / pi
  const double a = l.alpha;
  const double a1 = -std::sin(pi * a) * l.K * boost::math::tgamma(a + 1.0) / pi;
  const double xb = u + c * B;
  const double tail = a1 / (c * c) * (std::pow(xb, 1.0 - a) / (a - 1.0) - u * std::pow(xb, -a) / a);
  const double raw = c * (head.value + body.value + tail);
  const double err = c * (head.err_est + body.err_est) + 1e-3 * c * std::abs(tail);
  return Probability{std::clamp(raw, 0.0, 1.0), err, raw};
}

}  // namespace

double brownian_A(double c, double T, double u) {
  require_finite(c, "drift c");
  require_positive(T, "time T");
  require_positive(u, "level u");
  const double r = std::sqrt(T);
  const double value = normal::cdf(-u / r - c * r) + exp_Phi(-2.0 * u * c, -u / r + c * r);
  return std::clamp(value, 0.0, 1.0);
}

double brownian_sup_broken_inf(double c1, double c2, double T, double u) {
  require_finite(c1, "drift c1");
  if (!(c2 >= 0.0) || !std::isfinite(c2)) throw DomainError("drift c2 must be non-negative");
  require_positive(T, "time T");
  require_positive(u, "level u");
  if (c2 == 0.0) return 1.0;
  const double r = std::sqrt(T);
  const double a = u / r;
  const double k = (c1 - 2.0 * c2) * r;
  const double value = normal::cdf(-a - c1 * r) + exp_Phi(-2.0 * c1 * u, -a + c1 * r) +
                       exp_Phi(-2.0 * c2 * (u + c1 * T - c2 * T), a + k) -
                       exp_Phi(2.0 * (c2 - c1) * u + 2.0 * c2 * c2 * T - 2.0 * c1 * c2 * T, -a + k);
  return std::clamp(value, 0.0, 1.0);
}

Probability brownian_sup_broken_finite(double c1, double c2, double T, double S, double u,
                                       const quad::QuadConfig& cfg) {
  require_finite(c1, "drift c1");
  require_finite(c2, "drift c2");
  require_positive(T, "time T");
  require_positive(u, "level u");
  if (!(S > T) || !std::isfinite(S)) throw DomainError("horizon S must be finite and exceed T");
  cfg.validate();
  const double rest = S - T;
  const double rt = std::sqrt(T);
  const double top = u + c1 * T;
  auto after = [&](double z) { return z > 0.0 ? brownian_A(c2, rest, z) : 1.0; };
  const quad::QuadConfig half = cfg.scaled(0.5);

  // (1/sqrt(2 pi T)) int_0^inf A(c2, S - T, z) e^{-(top - z)^2/(2T)} dz
  auto g = [&](double z) { return after(z) * normal::pdf((top - z) / rt) / rt; };
  auto tail = [&](double b) { return b > top ? normal::cdf(-(b - top) / rt) : 1.0; };
  std::vector<double> pts = {0.0};
  if (top > 0.0) pts.push_back(top);
  pts.push_back(std::max(top, 0.0) + 40.0 * rt);
  const auto second = quad::integrate_partitioned(g, pts, half);
  const double second_err = second.err_est + tail(pts.back());

  const double pre = std::exp(-u * c1 - c1 * c1 * T / 2.0) / (2.0 * pi);
  const auto third = weighted_identity_integral(c1, T, u, pre, after, half);

  const double raw = brownian_A(c1, T, u) + second.value - third.value;
  return Probability{std::clamp(raw, 0.0, 1.0), second_err + third.err_est, raw};
}

IdentitySides brownian_identity_check(double c, double T, double u, IdentityVariant variant,
                                      const quad::QuadConfig& cfg) {
  if (!(c >= 0.0) || !std::isfinite(c)) throw DomainError("identity check: c must be non-negative");
  require_positive(T, "time T");
  require_positive(u, "level u");
  cfg.validate();
  const double sign = variant == IdentityVariant::minus ? -1.0 : 1.0;
  const double pre = std::exp(sign * c * u - c * c * T / 2.0) / (2.0 * pi);
  const auto r = weighted_identity_integral(sign * c, T, u, pre, [](double) { return 1.0; }, cfg);
  IdentitySides out;
  out.lhs = r.value;
  out.rhs = normal::cdf(-u / std::sqrt(T) + sign * c * std::sqrt(T));
  out.err_est = r.err_est;
  return out;
}

Probability stable_A(const LevyModel& m, double c, const Horizon& T, double u, const quad::QuadConfig& cfg) {
  if (!m.is_stable() || m.is_reflected()) throw DomainError("stable_A: requires the (unreflected) stable model");
  require_finite(c, "drift c");
  require_positive(u, "level u");
  cfg.validate();
  const Law l = law(m.alpha());
  if (T.is_infinite()) {
    if (!(c > 0.0)) throw DomainError("stable_A: the infinite horizon requires c > 0");
    return infinite_A(l, c, u, cfg);
  }
  return finite_A(l, c, T.S(), u, cfg);
}

namespace detail {

double stable_cosine_density(double y, double alpha) { return cosine_density(law(alpha), y); }

double stable_sine_survival(double y, double alpha) { return sine_survival(law(alpha), y); }

}  // namespace detail

}  // namespace lbd::closedforms
