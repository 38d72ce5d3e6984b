#include "lbd/quadrature.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <queue>
#include <sstream>
#include <vector>

#include "lbd/errors.hpp"

namespace lbd::quad {

namespace {

// 21-point Kronrod extension of the 10-point Gauss rule (QUADPACK qk21).
constexpr std::array<double, 11> kXgk = {
    0.995657163025808080735527280689003, 0.973906528517171720077964012084452,
    0.930157491355708226001207180059508, 0.865063366688984510732096688423493,
    0.780817726586416897063717578345042, 0.679409568299024406234327365114874,
    0.562757134668604683339000099272694, 0.433395394129247190799265943165784,
    0.294392862701460198131126603103866, 0.148874338981631210884826001129720,
    0.000000000000000000000000000000000};
constexpr std::array<double, 11> kWgk = {
    0.011694638867371874278064396062192, 0.032558162307964727478818972459390,
    0.054755896574351996031381300244580, 0.075039674810919952767043140916190,
    0.093125454583697605535065465083366, 0.109387158802297641899210590325805,
    0.123491976262065851077500359300476, 0.134709217311473325928054001771707,
    0.142775938577060080797094273138717, 0.147739104901338491374841515972068,
    0.149445554002916905664936468389821};
// Gauss weights for kXgk[1], kXgk[3], ..., kXgk[9].
constexpr std::array<double, 5> kWg = {
    0.066671344308688137593568809893332, 0.149451349150580593145776339657697,
    0.219086362515982043995534934228163, 0.269266719309996355091226921569469,
    0.295524224714752870173892994651338};

constexpr double kEps = std::numeric_limits<double>::epsilon();

struct Segment {
  double a;
  double b;
  double value;
  double err;
  bool splittable;
};

struct ByError {
  bool operator()(const Segment& l, const Segment& r) const {
    if (l.err != r.err) return l.err < r.err;
    return l.a > r.a;  // deterministic tie-break
  }
};

// Keeps every node strictly inside (lo, hi); the rule is open but rounding of
// center + half*x can land on an endpoint for very short segments.
double interior(double x, double lo, double hi) {
  const double lo_in = std::nextafter(lo, hi);
  const double hi_in = std::nextafter(hi, lo);
  if (lo_in > hi_in) return 0.5 * (lo + hi);
  return std::clamp(x, lo_in, hi_in);
}

Segment gk21(const Integrand& f, double a, double b, double lo, double hi, long& evals) {
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const double fc = f(interior(center, lo, hi));
  double resk = fc * kWgk[10];
  double resabs = std::abs(resk);
  double resg = 0.0;
  std::array<double, 10> f1{};
  std::array<double, 10> f2{};
  for (int j = 0; j < 10; ++j) {
    const double dx = half * kXgk[j];
    const double v1 = f(interior(center - dx, lo, hi));
    const double v2 = f(interior(center + dx, lo, hi));
    f1[j] = v1;
    f2[j] = v2;
    resk += kWgk[j] * (v1 + v2);
    resabs += kWgk[j] * (std::abs(v1) + std::abs(v2));
    if (j % 2 == 1) resg += kWg[j / 2] * (v1 + v2);
  }
  evals += 21;
  const double mean = 0.5 * resk;
  double resasc = kWgk[10] * std::abs(fc - mean);
  for (int j = 0; j < 10; ++j) resasc += kWgk[j] * (std::abs(f1[j] - mean) + std::abs(f2[j] - mean));

  const double value = resk * half;
  resabs *= std::abs(half);
  resasc *= std::abs(half);
  double err = std::abs((resk - resg) * half);
  if (resasc != 0.0 && err != 0.0) err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
  if (resabs > std::numeric_limits<double>::min() / (50.0 * kEps)) err = std::max(50.0 * kEps * resabs, err);
  if (!std::isfinite(value)) err = std::numeric_limits<double>::infinity();

  const double width_floor = 64.0 * kEps * std::max({std::abs(a), std::abs(b), 1e-300});
  return Segment{a, b, value, err, (b - a) > width_floor};
}

QuadResult adaptive(const Integrand& f, std::span<const double> points, const QuadConfig& cfg) {
  const double lo = points.front();
  const double hi = points.back();
  QuadResult out;
  std::priority_queue<Segment, std::vector<Segment>, ByError> heap;
  std::vector<Segment> frozen;
  double total = 0.0;
  double total_err = 0.0;
  for (std::size_t i = 0; i + 1 < points.size(); ++i) {
    if (!(points[i] < points[i + 1])) continue;
    Segment s = gk21(f, points[i], points[i + 1], lo, hi, out.evaluations);
    total += s.value;
    total_err += s.err;
    heap.push(s);
  }
  auto tolerance = [&] { return std::max(cfg.abs_tol, cfg.rel_tol * std::abs(total)); };

  // The frozen list holds segments that can no longer be bisected; their
  // error stays in the total.
  while (!heap.empty() && total_err > tolerance()) {
    if (out.subdivisions >= cfg.max_subdivisions) {
      std::ostringstream msg;
      msg << "adaptive quadrature did not converge on (" << lo << ", " << hi << ") after "
          << out.subdivisions << " subdivisions: value " << total << ", err_est " << total_err;
      throw ConvergenceError(msg.str(), total, total_err);
    }
    Segment s = heap.top();
    heap.pop();
    if (!s.splittable) {
      frozen.push_back(s);
      continue;
    }
    const double mid = 0.5 * (s.a + s.b);
    Segment left = gk21(f, s.a, mid, lo, hi, out.evaluations);
    Segment right = gk21(f, mid, s.b, lo, hi, out.evaluations);
    ++out.subdivisions;
    total += left.value + right.value - s.value;
    total_err += left.err + right.err - s.err;
    heap.push(left);
    heap.push(right);
  }

  // Resum from the leaves in ascending position so the result does not
  // depend on the running-update rounding history.
  std::vector<Segment> leaves = std::move(frozen);
  while (!heap.empty()) {
    leaves.push_back(heap.top());
    heap.pop();
  }
  std::sort(leaves.begin(), leaves.end(), [](const Segment& l, const Segment& r) { return l.a < r.a; });
  out.value = 0.0;
  out.err_est = 0.0;
  for (const auto& s : leaves) {
    out.value += s.value;
    out.err_est += s.err;
  }
  if (!std::isfinite(out.value)) throw ConvergenceError("integrand produced a non-finite value", out.value, out.err_est);
  if (out.err_est > std::max(cfg.abs_tol, cfg.rel_tol * std::abs(out.value))) {
    std::ostringstream msg;
    msg << "adaptive quadrature stalled at the rounding floor on (" << lo << ", " << hi << "): err_est "
        << out.err_est;
    throw ConvergenceError(msg.str(), out.value, out.err_est);
  }
  return out;
}

QuadResult with_substitution(const Integrand& f, double a, double b, const QuadConfig& cfg) {
  const double p = *cfg.singularity_exponent_hint;
  const double q = 1.0 / (1.0 + p);
  const double len = b - a;
  QuadConfig plain = cfg.without_singularity();
  auto left_map = [&](double v) {
    // x = a + len * v^q, dx = len * q * v^{q-1} dv
    const double x = a + len * std::pow(v, q);
    if (!(x > a) || !(x < b)) return 0.0;
    return f(x) * len * q * std::pow(v, q - 1.0);
  };
  auto right_map = [&](double v) {
    const double x = b - len * std::pow(v, q);
    if (!(x > a) || !(x < b)) return 0.0;
    return f(x) * len * q * std::pow(v, q - 1.0);
  };
  const std::array<double, 2> unit = {0.0, 1.0};
  switch (cfg.singular_end) {
    case SingularEnd::left:
      return adaptive(left_map, unit, plain);
    case SingularEnd::right:
      return adaptive(right_map, unit, plain);
    case SingularEnd::both: {
      const double mid = 0.5 * (a + b);
      QuadConfig half_cfg = cfg.scaled(0.5);
      QuadResult l = with_substitution(f, a, mid, half_cfg.with_singularity(p, SingularEnd::left));
      QuadResult r = with_substitution(f, mid, b, half_cfg.with_singularity(p, SingularEnd::right));
      return QuadResult{l.value + r.value, l.err_est + r.err_est, l.evaluations + r.evaluations,
                        l.subdivisions + r.subdivisions};
    }
  }
  return {};
}

}  // namespace

void QuadConfig::validate() const {
  if (!(abs_tol > 0.0) || !(rel_tol > 0.0)) throw DomainError("QuadConfig: tolerances must be positive");
  if (max_subdivisions < 10) throw DomainError("QuadConfig: max_subdivisions must be at least 10");
  if (!(tail_cutoff_mass > 0.0)) throw DomainError("QuadConfig: tail_cutoff_mass must be positive");
  if (singularity_exponent_hint && !(*singularity_exponent_hint > -1.0 && *singularity_exponent_hint <= 0.0))
    throw DomainError("QuadConfig: singularity exponent must lie in (-1, 0]");
}

QuadConfig QuadConfig::scaled(double factor) const {
  QuadConfig c = *this;
  c.abs_tol *= factor;
  c.rel_tol *= factor;
  return c;
}

QuadConfig QuadConfig::with_singularity(double exponent, SingularEnd end) const {
  QuadConfig c = *this;
  c.singularity_exponent_hint = exponent;
  c.singular_end = end;
  return c;
}

QuadConfig QuadConfig::without_singularity() const {
  QuadConfig c = *this;
  c.singularity_exponent_hint.reset();
  return c;
}

QuadResult integrate(const Integrand& f, double a, double b, const QuadConfig& cfg) {
  cfg.validate();
  if (!(a < b)) throw DomainError("integrate: require a < b");
  if (cfg.singularity_exponent_hint && *cfg.singularity_exponent_hint < 0.0) return with_substitution(f, a, b, cfg);
  const std::array<double, 2> pts = {a, b};
  return adaptive(f, pts, cfg);
}

QuadResult integrate_partitioned(const Integrand& f, std::span<const double> points, const QuadConfig& cfg) {
  cfg.validate();
  if (points.size() < 2) throw DomainError("integrate_partitioned: need at least two points");
  for (std::size_t i = 0; i + 1 < points.size(); ++i)
    if (points[i] > points[i + 1]) throw DomainError("integrate_partitioned: points must be increasing");
  if (!(points.front() < points.back())) throw DomainError("integrate_partitioned: empty range");
  return adaptive(f, points, cfg.without_singularity());
}

double truncation_point(double a, double cutoff, const std::function<double(double)>& tail_bound,
                        double initial_width) {
  double width = initial_width > 0.0 ? initial_width : 1.0;
  for (int k = 0; k < 200; ++k) {
    const double b = a + width;
    if (tail_bound(b) < cutoff) return b;
    width *= 2.0;
  }
  throw ConvergenceError("semi-infinite truncation: tail bound never fell below the cutoff", 0.0,
                         std::numeric_limits<double>::infinity());
}

QuadResult integrate_semi_infinite(const Integrand& f, double a, const QuadConfig& cfg,
                                   const std::function<double(double)>& tail_bound, double initial_width) {
  cfg.validate();
  const double b = truncation_point(a, cfg.tail_cutoff_mass, tail_bound, initial_width);
  QuadResult r = integrate(f, a, b, cfg);
  r.err_est += tail_bound(b);
  return r;
}

QuadResult integrate_nested(const OuterFn& outer, const InnerFn& inner, std::pair<double, double> z_range,
                            const RangeFn& s_range, const QuadConfig& cfg, const QuadConfig* inner_cfg_override) {
  cfg.validate();
  const auto [z0, z1] = z_range;
  if (!(z0 < z1)) throw DomainError("integrate_nested: empty outer range");
  QuadConfig outer_cfg = cfg.scaled(0.5);
  outer_cfg.singularity_exponent_hint.reset();
  QuadConfig inner_cfg = inner_cfg_override ? *inner_cfg_override : cfg;
  if (!inner_cfg_override) {
    inner_cfg.abs_tol = cfg.abs_tol / (2.0 * (z1 - z0));
    inner_cfg.rel_tol = cfg.rel_tol / 2.0;
  }
  double worst_inner_err = 0.0;
  Integrand g = [&](double z) {
    const auto [s0, s1] = s_range(z);
    double v = 0.0;
    if (s0 < s1) {
      try {
        QuadResult r = integrate([&](double s) { return inner(z, s); }, s0, s1, inner_cfg);
        v = r.value;
        worst_inner_err = std::max(worst_inner_err, r.err_est);
      } catch (const ConvergenceError& e) {
        std::ostringstream msg;
        msg << "nested quadrature: inner integral failed at z = " << z << ": " << e.what();
        throw ConvergenceError(msg.str(), e.partial_value(), e.err_est());
      }
    }
    return outer(z, v);
  };
  QuadResult r = integrate(g, z0, z1, outer_cfg);
  r.err_est += worst_inner_err * (z1 - z0);
  return r;
}

QuadResult integrate_nested(const OuterFn& outer, const InnerFn& inner, std::pair<double, double> z_range,
                            std::pair<double, double> s_range, const QuadConfig& cfg) {
  return integrate_nested(outer, inner, z_range, [s_range](double) { return s_range; }, cfg);
}

}  // namespace lbd::quad
