#include "lbd/supdist.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <vector>

#include <boost/math/special_functions/gamma.hpp>

#include "lbd/errors.hpp"

namespace lbd {

Horizon Horizon::finite(double S) {
  if (!(S > 0.0) || !std::isfinite(S)) throw DomainError("horizon: S must be positive and finite");
  Horizon h;
  h.infinite_ = false;
  h.S_ = S;
  return h;
}

double Horizon::S() const {
  if (infinite_) throw DomainError("horizon: S requested for the infinite horizon");
  return S_;
}

namespace supdist {

namespace {

using quad::QuadConfig;

void require_positive_side(const LevyModel& m) {
  if (m.spectral_sign() == SpectralSign::negative)
    throw DomainError("spectrally positive formula applied to a spectrally negative model");
}

void require_negative_side(const LevyModel& m) {
  if (m.spectral_sign() == SpectralSign::positive)
    throw DomainError("spectrally negative formula applied to a spectrally positive model");
}

void require_level(double u) {
  if (!(u > 0.0) || !std::isfinite(u)) throw DomainError("level u must be positive and finite");
}

void require_time(double T) {
  if (!(T > 0.0) || !std::isfinite(T)) throw DomainError("time T must be positive and finite");
}

void require_rate(double c) {
  if (!std::isfinite(c)) throw DomainError("drift rate must be finite");
}

Probability clamped(double raw, double err) {
  return Probability{std::clamp(raw, 0.0, 1.0), err, raw};
}

Probability exact(double value, double err) { return Probability{value, err, value}; }

// lo < ... < hi, refined geometrically toward lo down to lo + scale.
std::vector<double> toward_left(double lo, double hi, double scale) {
  std::vector<double> pts = {hi};
  const double len = hi - lo;
  for (double d = len / 4.0; d > scale && d > len * 1e-12; d /= 4.0) pts.push_back(lo + d);
  pts.push_back(lo);
  std::reverse(pts.begin(), pts.end());
  return pts;
}

// Mirror image: refined toward hi.
std::vector<double> toward_right(double lo, double hi, double scale) {
  std::vector<double> pts = {lo};
  const double len = hi - lo;
  std::vector<double> right;
  for (double d = len / 4.0; d > scale && d > len * 1e-12; d /= 4.0) right.push_back(hi - d);
  pts.insert(pts.end(), right.begin(), right.end());
  pts.push_back(hi);
  return pts;
}

// Time at which X moves by `w`: the scale of the first-passage peak.
double passage_scale(const LevyModel& m, double w) {
  return 1e-3 * std::pow(std::max(w, 1e-300), 1.0 / m.small_time_exponent());
}

QuadConfig inner_config(const QuadConfig& cfg, double width) {
  QuadConfig in = cfg.without_singularity();
  in.abs_tol = cfg.abs_tol / (4.0 * std::max(width, 1.0));
  in.rel_tol = cfg.rel_tol / 4.0;
  return in;
}

// ---------------------------------------------------------------- linear

// P(X(T) - cT > u) + int_0^T E(X(r) - c r)^- / r * f(u + c (T - r), T - r) dr
Probability linear_sp(const LevyModel& m, double c, double u, double T, const QuadConfig& cfg) {
  const double head = models::survival(m, u + c * T, T);
  const double h = m.small_time_exponent();
  auto g = [&](double r) {
    const double s = T - r;
    if (!(s > 0.0)) return 0.0;
    return models::neg_part_mean(m, c, r) / r * models::density(m, u + c * s, s);
  };
  QuadConfig in = cfg.without_singularity();
  quad::QuadResult r;
  if (h < 1.0) {
    // E(X(r) - cr)^- / r ~ r^{h-1} at the origin
    in = in.with_singularity(h - 1.0, quad::SingularEnd::left);
    r = quad::integrate(g, 0.0, T, in);
  } else {
    const auto pts = toward_right(0.0, T, passage_scale(m, u));
    r = quad::integrate_partitioned(g, pts, in);
  }
  return clamped(head + r.value, r.err_est);
}

Probability linear_sn(const LevyModel& m, double c, double u, double T, const QuadConfig& cfg) {
  auto g = [&](double s) { return models::density(m, u + c * s, s) / s; };
  const auto pts = toward_left(0.0, T, passage_scale(m, u));
  const auto r = quad::integrate_partitioned(g, pts, cfg.without_singularity());
  return clamped(u * r.value, u * r.err_est);
}

// ------------------------------------------------------- infinite horizon

// c int_0^inf f(u + cs, s) ds for the stable law. Beyond b the integrand is
// replaced by its Levy-measure asymptote s a_1 (u + cs)^{-1-a}.
Probability stable_inf(const LevyModel& m, double c, double u, const QuadConfig& cfg) {
  const double a = m.alpha();
  auto g = [&](double s) { return models::density(m, u + c * s, s); };
  // Relative size of the next asymptotic term is y^{-a}, y = (u + cb) b^{-1/a}.
  double b = 1.0;
  while (std::pow((u + c * b) * std::pow(b, -1.0 / a), -a) > 1e-7) b *= 2.0;
  const double s1 = std::min(1.0, b);
  QuadConfig in = cfg.without_singularity().scaled(1.0 / 3.0);
  const auto head = quad::integrate_partitioned(g, toward_right(0.0, s1, passage_scale(m, u)), in);
  auto logged = [&](double w) {
    const double s = std::exp(w);
    return g(s) * s;
  };
  const double w0 = std::log(s1);
  const double w1 = std::log(b);
  std::vector<double> pts;
  for (int k = 0; k <= 16; ++k) pts.push_back(w0 + (w1 - w0) * k / 16.0);
  const auto body = quad::integrate_partitioned(logged, pts, in);
  const double a1 = a * stable::tail_constant(a);
  const double xb = u + c * b;
  const double tail = a1 / (c * c) * (std::pow(xb, 1.0 - a) / (a - 1.0) - u * std::pow(xb, -a) / a);
  const double value = c * (head.value + body.value + tail);
  const double err = c * (head.err_est + body.err_est + 1e-6 * std::abs(tail));
  return clamped(value, err);
}

// (c - 1/delta) int_0^inf f(u + cs, s) ds; past the mode the integrand
// decays at the rate kappa = c delta - 1 - ln(c delta).
Probability gamma_inf(const LevyModel& m, double c, double u, const QuadConfig& cfg) {
  const double delta = m.delta();
  const double kappa = c * delta - 1.0 - std::log(c * delta);
  auto g = [&](double s) { return models::density(m, u + c * s, s); };
  auto tail = [&](double b) {
    const double h = 1e-3 * b;
    const double g0 = g(b);
    const double g1 = g(b + h);
    if (!(g0 > 0.0)) return 0.0;
    const double slope = (std::log(g1) - std::log(g0)) / h;
    if (!(slope < -0.5 * kappa)) return 1.0;
    return g0 / (-slope) * 2.0;
  };
  QuadConfig in = cfg.without_singularity();
  in.tail_cutoff_mass = std::min(cfg.tail_cutoff_mass, cfg.abs_tol);
  const auto r = quad::integrate_semi_infinite(g, 0.0, in, tail, 1.0);
  const double lead = c - 1.0 / delta;
  return clamped(lead * r.value, lead * r.err_est);
}

// ----------------------------------------------------------------- joint

// f(z + cT, T) - w int_0^T f(-w + c r, r) / r * f(u + c (T - r), T - r) dr,  w = u - z
Probability joint_sp(const LevyModel& m, double c, double u, double T, double z, const QuadConfig& cfg) {
  const double w = u - z;
  // The kernel is w/r times the first-passage density of -X + ct to w,
  // which collapses onto r = 0 as w -> 0; the two terms cancel there.
  if (!(w > 0.0)) return exact(0.0, 0.0);
  const double head = models::density(m, z + c * T, T);
  auto g = [&](double r) {
    const double s = T - r;
    if (!(s > 0.0)) return 0.0;
    const double first = models::density(m, -w + c * r, r);
    if (first == 0.0) return 0.0;
    return first / r * models::density(m, u + c * s, s);
  };
  QuadConfig in = cfg.without_singularity();
  quad::QuadResult r;
  if (m.is_gamma()) {
    // f(c r - w, r) vanishes for r < w / c. With x = c r - w = len v^{c/w}
    // the factor x^{r-1} dx becomes len^r (c/w) v^{x/w} dv, bounded and
    // free of underflow however close w / c is to 0.
    if (!(c > 0.0)) return clamped(head, 0.0);
    const double rstar = w / c;
    if (!(rstar < T)) return Probability{std::max(head, 0.0), 0.0, head};
    const double delta = m.delta();
    const double len = c * T - w;
    const double q = 1.0 / rstar;
    auto gv = [&](double v) {
      const double x = len * std::pow(v, q);
      const double rr = rstar + x / c;
      const double s = T - rr;
      if (!(s > 0.0)) return 0.0;
      const double lf = rr * std::log(delta * len) - boost::math::lgamma(rr) + q * x / c * std::log(v) - delta * x;
      return q / c * std::exp(lf) / rr * models::density(m, u + c * s, s);
    };
    r = quad::integrate(gv, 0.0, 1.0, in);
  } else {
    r = quad::integrate_partitioned(g, toward_left(0.0, T, passage_scale(m, w)), in);
  }
  const double raw = head - w * r.value;
  return Probability{std::max(raw, 0.0), w * r.err_est + std::max(-raw, 0.0), raw};
}

// p(z + cT, T) - u int_0^T p(u + c (T - s), T - s) / (T - s) * p(-w + c s, s) ds
Probability joint_sn(const LevyModel& m, double c, double u, double T, double z, const QuadConfig& cfg) {
  const double w = u - z;
  const double head = models::density(m, z + c * T, T);
  auto g = [&](double s) {
    const double r = T - s;
    if (!(r > 0.0)) return 0.0;
    const double second = models::density(m, -w + c * s, s);
    if (second == 0.0) return 0.0;
    return models::density(m, u + c * r, r) / r * second;
  };
  QuadConfig in = cfg.without_singularity();
  quad::QuadResult r;
  if (w > 0.0) {
    r = quad::integrate_partitioned(g, toward_left(0.0, T, passage_scale(m, w)), in);
  } else {
    // p(c s, s) ~ s^{-h} at the origin
    const double h = m.small_time_exponent();
    if (h < 1.0) in = in.with_singularity(-h, quad::SingularEnd::left);
    r = quad::integrate(g, 0.0, T, in);
  }
  const double raw = head - u * r.value;
  return Probability{std::max(raw, 0.0), u * r.err_est + std::max(-raw, 0.0), raw};
}

// ---------------------------------------------------------------- broken

using TailFn = std::function<double(double)>;
using JointFn = std::function<Probability(double)>;

void require_horizon(const BrokenDrift& drift, const Horizon& horizon) {
  if (!horizon.is_infinite() && !(horizon.S() > drift.T()))
    throw DomainError("broken drift: the horizon S must exceed the break time T");
}

// B = int_0^inf P(z) j(u - z) dz with j the joint density of the sup and the
// endpoint before the break. Since 0 <= j(u - z) <= f(u + c1 T - z, T) and
// P <= 1, the part beyond zmax is at most min(P(zmax), F_T(u + c1 T - zmax)).
Probability b_term(const LevyModel& m, const BrokenDrift& drift, double u, const TailFn& inner_tail,
                   const JointFn& joint, const QuadConfig& cfg) {
  const double T = drift.T();
  const double top = u + drift.c1() * T;
  const double cutoff = cfg.tail_cutoff_mass;
  double zmax = 0.0;
  double truncated = 0.0;
  if (m.is_gamma() && !m.is_reflected()) {
    zmax = top;
  } else {
    auto bound = [&](double b) {
      const double f = models::cdf(m, top - b, T);
      if (f < cutoff) return f;
      return std::min(f, inner_tail(b));
    };
    zmax = quad::truncation_point(0.0, cutoff, bound, std::max(1.0, top));
    truncated = bound(zmax);
  }
  if (!(zmax > 0.0)) return exact(0.0, 0.0);

  auto integrand = [&](double z) {
    const Probability j = joint(u - z);
    if (j.value == 0.0) return 0.0;
    return inner_tail(z) * j.value;
  };
  QuadConfig outer = cfg.without_singularity().scaled(0.5);
  quad::QuadResult r;
  if (m.is_gamma() && !m.is_reflected() && T < 1.0) {
    // f(top - z, T) ~ (top - z)^{T-1}
    r = quad::integrate(integrand, 0.0, zmax, outer.with_singularity(T - 1.0, quad::SingularEnd::right));
  } else {
    std::vector<double> pts = {0.0};
    if (top > 0.0 && top < zmax) pts.push_back(top);
    pts.push_back(zmax);
    r = quad::integrate_partitioned(integrand, pts, outer);
  }
  return exact(r.value, r.err_est + truncated);
}

SupResult assemble(const Probability& A, const Probability& B) {
  SupResult out;
  out.A_term = A.value;
  out.B_term = B.value;
  out.err_est = A.err_est + B.err_est;
  out.probability = std::clamp(A.value + B.value, 0.0, 1.0);
  return out;
}

}  // namespace

QuadConfig default_config() {
  QuadConfig cfg;
  cfg.abs_tol = 1e-9;
  cfg.rel_tol = 1e-9;
  cfg.max_subdivisions = 4000;
  cfg.tail_cutoff_mass = 1e-11;
  return cfg;
}

Probability sup_linear_sp(const LevyModel& m, double c, double u, double T, const QuadConfig& cfg) {
  require_positive_side(m);
  require_rate(c);
  require_level(u);
  require_time(T);
  cfg.validate();
  return linear_sp(m, c, u, T, cfg);
}

Probability sup_linear_sn(const LevyModel& m, double c, double u, double T, const QuadConfig& cfg) {
  require_negative_side(m);
  require_rate(c);
  require_level(u);
  require_time(T);
  cfg.validate();
  return linear_sn(m, c, u, T, cfg);
}

Probability sup_linear_sp_inf(const LevyModel& m, double c, double u, const QuadConfig& cfg) {
  require_positive_side(m);
  require_level(u);
  if (!(c > 0.0) || !std::isfinite(c)) throw DomainError("infinite horizon: drift c must be positive");
  cfg.validate();
  if (m.is_brownian()) return exact(std::exp(-2.0 * c * u), 0.0);
  if (m.is_gamma()) {
    if (!(c * m.delta() > 1.0))
      throw UnsupportedRegimeError("infinite horizon gamma: requires c * delta > 1");
    return gamma_inf(m, c, u, cfg);
  }
  return stable_inf(m, c, u, cfg);
}

Probability sup_linear_sn_inf(const LevyModel& m, double c, double u) {
  require_negative_side(m);
  require_level(u);
  if (!(c >= 0.0) || !std::isfinite(c)) throw DomainError("infinite horizon: drift c must be >= 0");
  if (m.is_brownian()) return exact(std::exp(-2.0 * c * u), 0.0);
  // -gamma - ct never leaves (-inf, 0]
  if (m.is_gamma()) return exact(0.0, 0.0);
  // The sup of a spectrally negative process is exponential with rate theta,
  // E exp(theta (-Z(1) - c)) = 1, i.e. k theta^a = c theta.
  const double a = m.alpha();
  const double k = -1.0 / std::cos(std::numbers::pi * a / 2.0);
  const double theta = std::pow(c / k, 1.0 / (a - 1.0));
  return exact(std::exp(-theta * u), 0.0);
}

Probability joint_sup_density_sp(const LevyModel& m, double c, double u, double T, double z,
                                 const QuadConfig& cfg) {
  require_positive_side(m);
  require_rate(c);
  require_level(u);
  require_time(T);
  if (!(z <= u)) throw DomainError("joint density: requires z <= u");
  cfg.validate();
  return joint_sp(m, c, u, T, z, cfg);
}

Probability joint_sup_density_sn(const LevyModel& m, double c, double u, double T, double z,
                                 const QuadConfig& cfg) {
  require_negative_side(m);
  require_rate(c);
  require_level(u);
  require_time(T);
  if (!(z <= u)) throw DomainError("joint density: requires z <= u");
  cfg.validate();
  return joint_sn(m, c, u, T, z, cfg);
}

SupResult sup_broken_sp(const LevyModel& m, const BrokenDrift& drift, double u, const Horizon& horizon,
                        const QuadConfig& cfg) {
  require_positive_side(m);
  require_level(u);
  require_horizon(drift, horizon);
  cfg.validate();
  const double c2 = drift.c2();
  const QuadConfig in = inner_config(cfg, u + drift.c1() * drift.T() + 1.0);
  TailFn inner_tail;
  if (horizon.is_infinite()) {
    if (!(c2 - m.mean_rate() > 0.0)) {
      if (m.is_gamma()) throw UnsupportedRegimeError("infinite horizon gamma: requires c2 * delta > 1");
      inner_tail = [](double) { return 1.0; };
    } else {
      inner_tail = [&](double z) { return sup_linear_sp_inf(m, c2, z, in).value; };
    }
  } else {
    const double rest = horizon.S() - drift.T();
    inner_tail = [&, rest](double z) { return linear_sp(m, c2, z, rest, in).value; };
  }
  const Probability A = linear_sp(m, drift.c1(), u, drift.T(), cfg.scaled(0.5));
  const Probability B = b_term(
      m, drift, u, inner_tail,
      [&](double z) { return joint_sp(m, drift.c1(), u, drift.T(), z, in); }, cfg.scaled(0.5));
  return assemble(A, B);
}

SupResult sup_broken_sn(const LevyModel& m, const BrokenDrift& drift, double u, const Horizon& horizon,
                        const QuadConfig& cfg) {
  require_negative_side(m);
  require_level(u);
  require_horizon(drift, horizon);
  cfg.validate();
  const double c2 = drift.c2();
  const QuadConfig in = inner_config(cfg, u + drift.c1() * drift.T() + 1.0);
  TailFn inner_tail;
  if (horizon.is_infinite()) {
    inner_tail = [&](double z) { return sup_linear_sn_inf(m, c2, z).value; };
  } else {
    const double rest = horizon.S() - drift.T();
    inner_tail = [&, rest](double z) { return linear_sn(m, c2, z, rest, in).value; };
  }
  const Probability A = linear_sn(m, drift.c1(), u, drift.T(), cfg.scaled(0.5));
  const Probability B = b_term(
      m, drift, u, inner_tail,
      [&](double z) { return joint_sn(m, drift.c1(), u, drift.T(), z, in); }, cfg.scaled(0.5));
  return assemble(A, B);
}

}  // namespace supdist

}  // namespace lbd
