// Totally skewed (beta = 1) alpha-stable law, 1 < alpha < 2, zero mean.
//
// All quantities come from the cosine/sine integrals of the characteristic
// function. Writing H(t) = exp(i t y - t^a (1 + i tan(pi a/2))), the density
// is Re int_0^inf H(t) dt / pi. H is analytic off the negative axis, so the
// ray t in [0, inf) can be swung into the complex plane as long as H keeps
// decaying along the arc. For y >= 0 it is turned up to angle pi/a - pi/2,
// where t^a (1 + i tan) is real and positive and the remaining oscillation is
// damped by exp(-y r sin). The left half-line uses Zolotarev's integral.

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <span>
#include <vector>

#include <boost/math/special_functions/gamma.hpp>

#include "lbd/errors.hpp"
#include "lbd/models.hpp"

namespace lbd::stable {

namespace {

using std::numbers::pi;

constexpr double kDecay = 45.0;  // exp(-45) ~ 3e-20

struct Geometry {
  double alpha;
  double k;        // 1 / |cos(pi a / 2)|
  double up;       // upward ray angle
};

Geometry geometry(double alpha) {
  if (!(alpha > 1.0 && alpha < 2.0)) throw DomainError("stable: alpha must lie in (1, 2)");
  Geometry g{};
  g.alpha = alpha;
  g.k = 1.0 / std::abs(std::cos(pi * alpha / 2.0));
  g.up = pi / alpha - pi / 2.0;
  return g;
}

quad::QuadConfig tight(double abs_tol) {
  quad::QuadConfig cfg = models::kernel_config();
  cfg.abs_tol = abs_tol;
  cfg.rel_tol = 1e-11;
  return cfg;
}

// The relative target sits near the rounding floor of the oscillatory
// rays; an unconverged result within 1e-9 relative is still accepted.
template <class Call>
double tolerant(const Call& call, double abs_tol) {
  try {
    return call().value;
  } catch (const ConvergenceError& e) {
    if (e.err_est() <= std::max(1e-9 * std::abs(e.partial_value()), abs_tol)) return e.partial_value();
    throw;
  }
}

double run(const quad::Integrand& f, std::span<const double> pts, const quad::QuadConfig& cfg) {
  return tolerant([&] { return quad::integrate_partitioned(f, pts, cfg); }, cfg.abs_tol);
}

double run(const quad::Integrand& f, double a, double b, const quad::QuadConfig& cfg) {
  return tolerant([&] { return quad::integrate(f, a, b, cfg); }, cfg.abs_tol);
}

double upper_radius_plain(const Geometry& g) { return std::pow(kDecay / g.k, 1.0 / g.alpha); }

// Left half-line, x = -y > 0. Zolotarev's integral for the reflected law
// (beta = -1) is a positive integrand, so the super-exponentially small left
// tail keeps its relative accuracy. Integration variable phi = theta + theta0.
double zolotarev_left(const Geometry& g, double x, bool want_density) {
  const double a = g.alpha;
  const double theta0 = pi / a - pi / 2.0;
  const double e = a / (a - 1.0);
  const double lead = std::pow(std::cos(a * theta0), 1.0 / (a - 1.0));
  const double xe = std::pow(x, e);
  auto v = [&](double phi) {
    const double theta = phi - theta0;
    const double ct = std::cos(theta);
    return lead * std::pow(ct / std::sin(a * phi), e) * std::cos(a * theta0 + (a - 1.0) * theta) / ct;
  };
  const double top = pi / 2.0 + theta0;
  // x^e V decreases from +inf to 0; the density integrand peaks where it equals 1.
  double lo = 0.0, hi = top;
  for (int i = 0; i < 200 && hi - lo > 1e-15 * top; ++i) {
    const double mid = 0.5 * (lo + hi);
    (xe * v(mid) > 1.0 ? lo : hi) = mid;
  }
  const double peak = 0.5 * (lo + hi);
  std::vector<double> pts = {0.0, top};
  if (peak > 1e-12 * top && peak < top * (1.0 - 1e-12)) pts.insert(pts.begin() + 1, peak);
  quad::QuadConfig cfg = tight(1e-300);
  if (want_density) {
    auto f = [&](double phi) {
      const double w = xe * v(phi);
      return w * std::exp(-w);
    };
    const double r = run(f, pts, cfg);
    return a / (pi * (a - 1.0) * x) * r;
  }
  auto f = [&](double phi) { return std::exp(-xe * v(phi)); };
  return run(f, pts, cfg) / pi;
}

}  // namespace

double density(double y, double alpha) {
  const Geometry g = geometry(alpha);
  const double s = std::sin(g.up);
  const double c = std::cos(g.up);
  if (y >= 1.0) {
    // The "1" part of exp(-k r^a) integrates to a purely imaginary term.
    const double radius = kDecay / (y * s);
    auto f = [&](double r) {
      return std::exp(-y * r * s) * std::expm1(-g.k * std::pow(r, alpha)) * std::cos(g.up + y * r * c);
    };
    return std::max(0.0, run(f, 0.0, radius, tight(1e-300)) / pi);
  }
  if (y >= 0.0) {
    const double radius = upper_radius_plain(g);
    auto f = [&](double r) {
      return std::exp(-y * r * s - g.k * std::pow(r, alpha)) * std::cos(g.up + y * r * c);
    };
    return std::max(0.0, run(f, 0.0, radius, tight(1e-300)) / pi);
  }
  return zolotarev_left(g, -y, true);
}

double survival(double y, double alpha) {
  const Geometry g = geometry(alpha);
  const double s = std::sin(g.up);
  const double c = std::cos(g.up);
  if (y >= 1.0) {
    const double radius = kDecay / (y * s);
    auto f = [&](double r) {
      return std::exp(-y * r * s) * std::sin(y * r * c) * (-std::expm1(-g.k * std::pow(r, alpha))) / r;
    };
    return std::clamp(run(f, 0.0, radius, tight(1e-300)) / pi, 0.0, 1.0);
  }
  return std::clamp(1.0 - cdf(y, alpha), 0.0, 1.0);
}

double cdf(double y, double alpha) {
  const Geometry g = geometry(alpha);
  if (y >= 1.0) return 1.0 - survival(y, alpha);
  if (y >= 0.0) {
    const double s = std::sin(g.up);
    const double c = std::cos(g.up);
    const double radius = upper_radius_plain(g);
    auto f = [&](double r) {
      return std::exp(-y * r * s - g.k * std::pow(r, alpha)) * std::sin(y * r * c) / r;
    };
    const double v = run(f, 0.0, radius, tight(1e-17));
    return std::clamp(0.5 + g.up / pi + v / pi, 0.0, 1.0);
  }
  return std::clamp(zolotarev_left(g, -y, false), 0.0, 1.0);
}

double neg_part_mean(double k, double alpha) {
  // E|Z - k| = (2/pi) int (1 - Re E e^{i t (Z - k)}) / t^2 dt and E Z = 0.
  geometry(alpha);
  const double tau = std::tan(pi * alpha / 2.0);
  const double radius = std::pow(42.0, 1.0 / alpha);
  auto f = [&](double t) {
    const double ta = std::pow(t, alpha);
    const double e = std::exp(-ta);
    const double half = 0.5 * (t * k - tau * ta);
    const double sh = std::sin(half);
    return (-std::expm1(-ta) + 2.0 * e * sh * sh) / (t * t);
  };
  quad::QuadConfig cfg = tight(1e-15).with_singularity(alpha - 2.0, quad::SingularEnd::left);
  double v = 0.0;
  const double period_count = std::abs(k) * radius / pi;
  if (period_count < 8.0) {
    v = run(f, 0.0, radius, cfg);
  } else {
    // Singular piece near 0 with the substitution, the oscillating rest
    // pre-split at half periods of the cosine.
    const double first = std::min(radius, pi / std::abs(k));
    v = run(f, 0.0, first, cfg);
    const int n = static_cast<int>(std::ceil((radius - first) * std::abs(k) / pi));
    std::vector<double> pts(n + 1);
    for (int i = 0; i <= n; ++i) pts[i] = first + (radius - first) * i / n;
    quad::QuadConfig rest = tight(1e-15);
    rest.max_subdivisions = 20 * n + 2000;
    v += run(f, pts, rest);
  }
  // Beyond the radius exp(-t^a) is below 1e-18 and the integrand is 1/t^2.
  v += 1.0 / radius;
  return std::max(0.0, 0.5 * k + v / pi);
}

double tail_constant(double alpha) {
  geometry(alpha);
  return (1.0 - alpha) / (boost::math::tgamma(2.0 - alpha) * std::cos(pi * alpha / 2.0));
}

}  // namespace lbd::stable
