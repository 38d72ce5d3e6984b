#include "lbd/montecarlo.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <numbers>
#include <optional>
#include <thread>
#include <vector>

#include <boost/random/exponential_distribution.hpp>
#include <boost/random/gamma_distribution.hpp>
#include <boost/random/normal_distribution.hpp>

#include "lbd/errors.hpp"

namespace lbd {

const char* to_string(BiasNote note) noexcept {
  switch (note) {
    case BiasNote::none:
      return "none";
    case BiasNote::grid_sup_downward:
      return "grid-sup-downward";
    case BiasNote::grid_sup_extrapolated:
      return "grid-sup-extrapolated";
  }
  return "none";
}

namespace mc {

namespace {

constexpr long long kChunk = 4096;
constexpr double kInf = std::numeric_limits<double>::infinity();

// ---------------------------------------------------------------- reduction

struct Moments {
  long long n = 0;
  double mean = 0.0;
  double m2 = 0.0;
};

Moments merge(const Moments& a, const Moments& b) {
  if (a.n == 0) return b;
  if (b.n == 0) return a;
  const long long n = a.n + b.n;
  const double d = b.mean - a.mean;
  return {n, a.mean + d * static_cast<double>(b.n) / n,
          a.m2 + b.m2 + d * d * (static_cast<double>(a.n) * static_cast<double>(b.n) / n)};
}

Moments tree(const std::vector<Moments>& parts, std::size_t lo, std::size_t hi) {
  if (hi - lo == 1) return parts[lo];
  const std::size_t mid = lo + (hi - lo) / 2;
  return merge(tree(parts, lo, mid), tree(parts, mid, hi));
}

// Moments of value(0..units-1). Chunks are reduced pairwise in index order,
// so the result does not depend on the number of threads.
template <class F>
Moments sample(long long units, int max_threads, const F& value) {
  const long long chunks = (units + kChunk - 1) / kChunk;
  std::vector<Moments> parts(static_cast<std::size_t>(chunks));
  std::atomic<long long> next{0};
  std::exception_ptr error;
  std::mutex mu;
  auto worker = [&] {
    try {
      for (long long c; (c = next++) < chunks;) {
        Moments m;
        const long long end = std::min(units, (c + 1) * kChunk);
        for (long long i = c * kChunk; i < end; ++i) {
          const double x = value(i);
          ++m.n;
          const double d = x - m.mean;
          m.mean += d / static_cast<double>(m.n);
          m.m2 += d * (x - m.mean);
        }
        parts[static_cast<std::size_t>(c)] = m;
      }
    } catch (...) {
      std::lock_guard lock(mu);
      if (!error) error = std::current_exception();
      next = chunks;
    }
  };
  const long long wanted = max_threads > 0 ? max_threads : std::thread::hardware_concurrency();
  const long long threads = std::clamp<long long>(wanted, 1, chunks);
  std::vector<std::thread> pool;
  for (long long t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
  return tree(parts, 0, parts.size());
}

// path_value(p) for p < n_paths; antithetic pairs (2i, 2i+1) are averaged
// into one sample.
template <class F>
MCEstimate run(const MCConfig& cfg, double work_per_path, BiasNote note, const F& path_value) {
  long long allowed = cfg.n_paths;
  if (static_cast<double>(cfg.n_paths) * work_per_path > cfg.max_work)
    allowed = static_cast<long long>(cfg.max_work / work_per_path);
  if (cfg.antithetic) allowed -= allowed % 2;
  if (allowed < 2) throw BudgetError("monte carlo: work budget allows no paths", 0);
  const long long units = cfg.antithetic ? allowed / 2 : allowed;
  const Moments m = sample(units, cfg.threads, [&](long long i) {
    return cfg.antithetic ? 0.5 * (path_value(2 * i) + path_value(2 * i + 1)) : path_value(i);
  });
  MCEstimate e;
  e.estimate = m.mean;
  e.std_error = std::sqrt(m.m2 / static_cast<double>(units - 1) / static_cast<double>(units));
  e.n_paths = allowed;
  e.bias_note = note;
  if (allowed < cfg.n_paths) throw BudgetError("monte carlo: work budget exceeded", allowed, e.estimate, e.std_error);
  return e;
}

// ---------------------------------------------------------------- geometry

// u + c1 t up to T, slope c2 afterwards.
struct Barrier {
  double u = 0.0;
  double c1 = 0.0;
  double c2 = 0.0;
  double T = kInf;

  double operator()(double t) const noexcept { return t <= T ? u + c1 * t : u + c1 * T + c2 * (t - T); }
  double min_on(double a, double b) const noexcept {
    double m = std::min((*this)(a), (*this)(b));
    if (a < T && T < b) m = std::min(m, (*this)(T));
    return m;
  }
};

Barrier line(double u, double c) { return {u, c, c, kInf}; }
Barrier broken(double u, const BrokenDrift& d) { return {u, d.c1(), d.c2(), d.T()}; }

struct Grid {
  double h;
  double S;
  long long N;

  Grid(double step, double horizon)
      : h(step), S(horizon), N(std::max<long long>(1, static_cast<long long>(std::ceil(horizon / step - 1e-9)))) {}
  double t(long long k) const noexcept { return k >= N ? S : static_cast<double>(k) * h; }
};

// ---------------------------------------------------------------- variates

double log_gamma_variate(double a, rng::Stream& s) {
  if (a >= 1.0) return std::log(boost::random::gamma_distribution<double>(a)(s));
  const double g = boost::random::gamma_distribution<double>(a + 1.0)(s);
  return std::log(g) + std::log(s.uniform()) / a;
}

double beta_variate(double a, double b, rng::Stream& s) {
  const double la = log_gamma_variate(a, s);
  const double lb = log_gamma_variate(b, s);
  return 1.0 / (1.0 + std::exp(lb - la));
}

double normal_variate(rng::Stream& s) { return boost::random::normal_distribution<double>()(s); }

double exponential_variate(double rate, rng::Stream& s) {
  return boost::random::exponential_distribution<double>(rate)(s);
}

struct StableSampler {
  double alpha;
  double B;
  double scale;

  explicit StableSampler(double a) : alpha(a) {
    const double t = std::tan(std::numbers::pi * a / 2.0);
    B = std::atan(t) / a;
    scale = std::pow(1.0 + t * t, 1.0 / (2.0 * a));
  }
  double operator()(rng::Stream& s) const {
    const double V = std::numbers::pi * (s.uniform() - 0.5);
    const double W = -std::log(s.uniform());
    const double shifted = alpha * (V + B);
    return scale * std::sin(shifted) / std::pow(std::cos(V), 1.0 / alpha) *
           std::pow(std::cos(V - shifted) / W, (1.0 - alpha) / alpha);
  }
};

// ---------------------------------------------------------------- engines

// Subordinator paths explored lazily: coarse gamma increments, refined by
// gamma-bridge splits only where the grid could still exceed the target.
// Every split draws from its own counter, so repeated scans of one path see
// the same values.
class GammaPath {
 public:
  GammaPath(const LevyModel& m, const Grid& g, std::uint64_t seed, std::uint64_t path)
      : delta_(m.delta()), sign_(m.is_reflected() ? -1.0 : 1.0), g_(g), seed_(seed), path_(path) {
    int k = 0;
    while (g.h * std::ldexp(1.0, k + 1) <= 0.1) ++k;
    K_ = 1LL << k;
  }

  bool crosses(const Barrier& b) const {
    Scan st{true, 0.0, false};
    walk(b, st);
    return st.hit;
  }

  double sup(const Barrier& b) const {
    Scan st{false, -b(0.0), false};
    walk(b, st);
    return st.M;
  }

  double work() const { return 4.0 * static_cast<double>((g_.N + K_ - 1) / K_); }

 private:
  struct Scan {
    bool crossing;
    double M;
    bool hit;
    double threshold() const { return crossing ? 0.0 : M; }
    bool visit(double e) {
      if (crossing) return hit = e > 0.0;
      M = std::max(M, e);
      return false;
    }
  };

  void walk(const Barrier& b, Scan& st) const {
    double x = 0.0;
    for (long long j = 0; j * K_ < g_.N; ++j) {
      const long long lo = j * K_;
      const long long hi = std::min(g_.N, lo + K_);
      rng::Stream s(seed_, path_, static_cast<std::uint64_t>(j), 1, 0);
      const double d = std::exp(log_gamma_variate(g_.t(hi) - g_.t(lo), s)) / delta_;
      if (descend(b, st, j, 1, lo, hi, x, x + d)) return;
      x += d;
    }
  }

  bool descend(const Barrier& b, Scan& st, long long j, std::uint64_t node, long long lo, long long hi, double xlo,
               double xhi) const {
    const double tlo = g_.t(lo), thi = g_.t(hi);
    const double ub = std::max(sign_ * xlo, sign_ * xhi) - b.min_on(tlo, thi);
    if (hi - lo == 1 || ub <= st.threshold()) return st.visit(sign_ * xhi - b(thi));
    const long long mid = lo + (hi - lo) / 2;
    const double tmid = g_.t(mid);
    rng::Stream s(seed_, path_, static_cast<std::uint64_t>(j), node, 1);
    const double xmid = xlo + (xhi - xlo) * beta_variate(tmid - tlo, thi - tmid, s);
    return descend(b, st, j, 2 * node, lo, mid, xlo, xmid) || descend(b, st, j, 2 * node + 1, mid, hi, xmid, xhi);
  }

  double delta_;
  double sign_;
  Grid g_;
  std::uint64_t seed_;
  std::uint64_t path_;
  long long K_ = 1;
};

// Sequentially simulated grid path (stable, or Brownian without the bridge).
// Tracks the full grid and its even sub-grid, which share the last point.
class GridPath {
 public:
  GridPath(const LevyModel& m, const Grid& g, std::uint64_t seed, std::uint64_t key, double sign)
      : g_(g), seed_(seed), key_(key), sign_(m.is_reflected() ? -sign : sign) {
    if (m.is_stable()) sampler_.emplace(m.alpha());
    full_scale_ = scale(g.h);
  }

  // First-crossing flags per barrier, on the full grid and on the sub-grid.
  void crosses(const std::vector<Barrier>& bs, bool need_coarse, std::vector<char>& fine,
               std::vector<char>& coarse) const {
    fine.assign(bs.size(), 0);
    coarse.assign(bs.size(), 0);
    rng::Stream s(seed_, key_, 0, 0, 2);
    double x = 0.0;
    for (long long k = 1; k <= g_.N; ++k) {
      x += increment(k, s);
      const double t = g_.t(k);
      const bool on_coarse = k % 2 == 0 || k == g_.N;
      bool done = true;
      for (std::size_t i = 0; i < bs.size(); ++i) {
        if (x > bs[i](t)) {
          fine[i] = 1;
          if (on_coarse) coarse[i] = 1;
        }
        done = done && (need_coarse ? coarse[i] : fine[i]);
      }
      if (done) return;
    }
  }

  // Max over the full grid and over the sub-grid of X(t) - b(t), t = 0 included.
  std::pair<double, double> sup(const Barrier& b) const {
    rng::Stream s(seed_, key_, 0, 0, 2);
    double x = 0.0;
    double fine = -b(0.0), coarse = fine;
    for (long long k = 1; k <= g_.N; ++k) {
      x += increment(k, s);
      const double e = x - b(g_.t(k));
      fine = std::max(fine, e);
      if (k % 2 == 0 || k == g_.N) coarse = std::max(coarse, e);
    }
    return {fine, coarse};
  }

 private:
  double scale(double len) const {
    return sampler_ ? std::pow(len, 1.0 / sampler_->alpha) : std::sqrt(len);
  }

  double increment(long long k, rng::Stream& s) const {
    const double len = g_.t(k) - g_.t(k - 1);
    const double sc = k < g_.N ? full_scale_ : scale(len);
    return sign_ * sc * (sampler_ ? (*sampler_)(s) : normal_variate(s));
  }

  Grid g_;
  std::uint64_t seed_;
  std::uint64_t key_;
  double sign_;
  std::optional<StableSampler> sampler_;
  double full_scale_ = 0.0;
};

// Brownian values at the given times (times[0] = 0).
std::vector<double> brownian_points(const std::vector<double>& times, rng::Stream& s, double sign) {
  std::vector<double> x(times.size(), 0.0);
  for (std::size_t i = 1; i < times.size(); ++i)
    x[i] = x[i - 1] + sign * std::sqrt(times[i] - times[i - 1]) * normal_variate(s);
  return x;
}

// P(the Brownian path crosses b | its values at the times), b linear between
// consecutive times. With infinite_tail the path continues after the last time.
double bridge_crossing(const std::vector<double>& t, const std::vector<double>& x, bool infinite_tail,
                       const Barrier& b) {
  double gap = b(t[0]) - x[0];
  if (gap <= 0.0) return 1.0;
  double log_stay = 0.0;
  for (std::size_t i = 1; i < t.size(); ++i) {
    const double next = b(t[i]) - x[i];
    if (next <= 0.0) return 1.0;
    log_stay += std::log1p(-std::exp(-2.0 * gap * next / (t[i] - t[i - 1])));
    gap = next;
  }
  if (infinite_tail) {
    const double slope = t.back() >= b.T ? b.c2 : b.c1;
    if (slope <= 0.0) return 1.0;
    log_stay += std::log1p(-std::exp(-2.0 * slope * gap));
  }
  return -std::expm1(log_stay);
}

// Kink times of the barriers before the horizon, with 0 and the horizon.
std::vector<double> bridge_times(std::initializer_list<double> kinks, double S) {
  std::vector<double> t{0.0};
  for (double k : kinks)
    if (k > 0.0 && k < S && std::isfinite(k)) t.push_back(k);
  std::sort(t.begin(), t.end());
  if (std::isfinite(S)) t.push_back(S);
  return t;
}

// ---------------------------------------------------------------- helpers

double extrapolation_weight(const LevyModel& m) { return 1.0 / (std::exp2(m.small_time_exponent()) - 1.0); }

BiasNote grid_note(const MCConfig& cfg, bool gridded) {
  if (!gridded) return BiasNote::grid_sup_downward;
  return cfg.extrapolate ? BiasNote::grid_sup_extrapolated : BiasNote::grid_sup_downward;
}

bool uses_bridge(const LevyModel& m, const MCConfig& cfg) { return m.is_brownian() && cfg.brownian_bridge; }

void require_level(double u) {
  if (!(u > 0.0) || !std::isfinite(u)) throw DomainError("monte carlo: level u must be positive and finite");
}

// Paths: antithetic pairs share a key and flip the sign of the Gaussian draws.
std::uint64_t path_key(const MCConfig& cfg, long long p) {
  return static_cast<std::uint64_t>(cfg.antithetic ? p / 2 : p);
}
double path_sign(const MCConfig& cfg, long long p) { return cfg.antithetic && p % 2 == 1 ? -1.0 : 1.0; }

// Probability that at least one of the barriers in `groups` is crossed on the grid,
// evaluated by event logic over per-barrier crossing flags.
template <class Event>
MCEstimate run_grid_event(const LevyModel& m, const std::vector<Barrier>& bs, double S, const MCConfig& cfg,
                          const Event& event) {
  const Grid g(cfg.grid_step, S);
  if (m.is_gamma()) {
    const GammaPath probe(m, g, cfg.seed, 0);
    return run(cfg, probe.work(), BiasNote::grid_sup_downward, [&](long long p) {
      const GammaPath path(m, g, cfg.seed, static_cast<std::uint64_t>(p));
      return event([&](std::size_t i) { return path.crosses(bs[i]); }) ? 1.0 : 0.0;
    });
  }
  if (cfg.extrapolate && g.N < 2) throw DomainError("monte carlo: extrapolation needs at least two grid steps");
  const double w = extrapolation_weight(m);
  return run(cfg, static_cast<double>(g.N), grid_note(cfg, true), [&](long long p) {
    const GridPath path(m, g, cfg.seed, path_key(cfg, p), path_sign(cfg, p));
    std::vector<char> fine, coarse;
    path.crosses(bs, cfg.extrapolate, fine, coarse);
    const double vf = event([&](std::size_t i) { return fine[i] != 0; }) ? 1.0 : 0.0;
    if (!cfg.extrapolate) return vf;
    const double vc = event([&](std::size_t i) { return coarse[i] != 0; }) ? 1.0 : 0.0;
    return vf + w * (vf - vc);
  });
}

// Finite runs at S = S0, 2 S0, ... until envelope(S) is below a third of the
// standard error (or of 1/n when the estimate has no spread).
template <class Finite, class Envelope>
MCEstimate run_doubling(double S0, const MCConfig& cfg, const Finite& finite, const Envelope& envelope) {
  const double n = static_cast<double>(cfg.n_paths);
  double S = S0;
  for (int i = 0; i < 24; ++i, S *= 2.0) {
    const double env = envelope(S);
    if (env > 0.5 / (3.0 * std::sqrt(n))) continue;
    MCEstimate e = finite(S);
    if (env <= std::max(e.std_error, 1.0 / n) / 3.0) {
      e.horizon = S;
      return e;
    }
  }
  throw ConvergenceError("monte carlo: tail envelope did not fall below the cutoff", 0.0, 0.0);
}

double psi_infinite(const LevyModel& m, double c, double a) {
  if (m.is_brownian()) return std::exp(-2.0 * c * a);
  if (m.spectral_sign() == SpectralSign::negative) return supdist::sup_linear_sn_inf(m, c, a).value;
  return supdist::sup_linear_sp_inf(m, c, a).value;
}

}  // namespace

void validate(const MCConfig& cfg) {
  if (cfg.n_paths < 10000) throw DomainError("monte carlo: n_paths must be at least 10^4");
  if (!(cfg.grid_step > 0.0) || !std::isfinite(cfg.grid_step))
    throw DomainError("monte carlo: grid_step must be positive");
  if (!(cfg.max_work > 0.0)) throw DomainError("monte carlo: max_work must be positive");
  if (cfg.threads < 0) throw DomainError("monte carlo: threads must be >= 0");
  if (cfg.antithetic && cfg.n_paths % 2 != 0) throw DomainError("monte carlo: antithetic sampling needs even n_paths");
}

double tail_envelope(const LevyModel& m, const BrokenDrift& drift, double u, double S) {
  if (!(S > 0.0) || !std::isfinite(S)) throw DomainError("tail envelope: S must be positive and finite");
  const double c2 = drift.c2();
  if (!(c2 - m.mean_rate() > 0.0)) throw UnsupportedRegimeError("tail envelope: requires c2 > E X(1)");
  const double gap = u + drift(S) - m.mean_rate() * S;
  if (!(gap > 0.0)) return 1.0;
  double best = 1.0;
  for (int k = 1; k < 16; ++k) {
    const double a = gap * k / 16.0;
    best = std::min(best, models::survival(m, u - a + drift(S), S) + psi_infinite(m, c2, a));
  }
  return best;
}

double stable_variate(double alpha, rng::Stream& s) { return StableSampler(alpha)(s); }

MCEstimate simulate_sup_broken(const LevyModel& m, const BrokenDrift& drift, double u, const Horizon& horizon,
                               const MCConfig& cfg) {
  validate(cfg);
  require_level(u);
  if (cfg.antithetic && !m.is_brownian()) throw DomainError("monte carlo: antithetic sampling is Brownian only");
  const Barrier b = broken(u, drift);

  if (uses_bridge(m, cfg)) {
    const bool inf = horizon.is_infinite();
    if (inf && !(drift.c2() > 0.0)) throw UnsupportedRegimeError("monte carlo: infinite horizon requires c2 > 0");
    const auto times = bridge_times({drift.T()}, inf ? kInf : horizon.S());
    auto e = run(cfg, static_cast<double>(times.size()), BiasNote::none, [&](long long p) {
      rng::Stream s(cfg.seed, path_key(cfg, p), 0, 0, 3);
      return bridge_crossing(times, brownian_points(times, s, path_sign(cfg, p)), inf, b);
    });
    e.horizon = inf ? kInf : horizon.S();
    return e;
  }

  const std::vector<Barrier> bs{b};
  auto finite = [&](double S) {
    auto e = run_grid_event(m, bs, S, cfg, [](const auto& crossed) { return crossed(0); });
    e.horizon = S;
    return e;
  };
  if (!horizon.is_infinite()) return finite(horizon.S());
  return run_doubling(std::max(4.0, 2.0 * drift.T()), cfg, finite,
                      [&](double S) { return tail_envelope(m, drift, u, S); });
}

MCEstimate simulate_two_company(const TwoCompanyParams& params, const Horizon& horizon, const MCConfig& cfg,
                                RuinEvent event) {
  validate(cfg);
  const LevyModel& m = params.model;
  if (cfg.antithetic && !m.is_brownian()) throw DomainError("monte carlo: antithetic sampling is Brownian only");
  const ReducedParams r = ruin::reduce(params);
  const Barrier l1 = line(r.u1, r.c1);
  const Barrier l2 = line(r.u2, r.c2);
  // lower and upper envelopes of the two lines
  Barrier lo = l1, hi = l2;
  double kink = kInf;
  if (r.crossing) {
    kink = *r.crossing;
    const Barrier& a = r.u1 < r.u2 ? l1 : l2;
    const Barrier& b = r.u1 < r.u2 ? l2 : l1;
    lo = {a.u, a.c1, b.c1, kink};
    hi = {b.u, b.c1, a.c1, kink};
  } else if (!(r.u1 < r.u2 || (r.u1 == r.u2 && r.c1 <= r.c2))) {
    std::swap(lo, hi);
  }

  if (uses_bridge(m, cfg)) {
    const bool inf = horizon.is_infinite();
    const auto times = bridge_times({kink}, inf ? kInf : horizon.S());
    auto e = run(cfg, static_cast<double>(times.size()), BiasNote::none, [&](long long p) {
      rng::Stream s(cfg.seed, path_key(cfg, p), 0, 0, 3);
      const auto x = brownian_points(times, s, path_sign(cfg, p));
      switch (event) {
        case RuinEvent::either:
          return bridge_crossing(times, x, inf, lo);
        case RuinEvent::simultaneous:
          return bridge_crossing(times, x, inf, hi);
        case RuinEvent::both:
          return bridge_crossing(times, x, inf, l1) + bridge_crossing(times, x, inf, l2) -
                 bridge_crossing(times, x, inf, lo);
      }
      return 0.0;
    });
    e.horizon = inf ? kInf : horizon.S();
    return e;
  }

  const std::vector<Barrier> bs{l1, l2, hi};
  auto finite = [&](double S) {
    auto e = run_grid_event(m, bs, S, cfg, [event](const auto& crossed) {
      switch (event) {
        case RuinEvent::either:
          return crossed(0) || crossed(1);
        case RuinEvent::simultaneous:
          return crossed(2);
        case RuinEvent::both:
          return crossed(0) && crossed(1);
      }
      return false;
    });
    e.horizon = S;
    return e;
  };
  if (!horizon.is_infinite()) return finite(horizon.S());
  auto env = [&](const Barrier& b, double S) {
    return tail_envelope(m, BrokenDrift(b.c1, b.c2, std::isfinite(b.T) ? b.T : 1.0), b.u, S);
  };
  const double S0 = std::max(4.0, std::isfinite(kink) ? 2.0 * kink : 0.0);
  return run_doubling(S0, cfg, finite, [&](double S) {
    switch (event) {
      case RuinEvent::either:
        return env(lo, S);
      case RuinEvent::simultaneous:
        return env(hi, S);
      case RuinEvent::both:
        return env(l1, S) + env(l2, S);
    }
    return 1.0;
  });
}

MCEstimate simulate_laplace_transform(const LevyModel& m, double c1, double c2, double lambda,
                                      const RandomHorizonSpec& v, double gamma, const MCConfig& cfg) {
  validate(cfg);
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw DomainError("monte carlo: lambda must be positive");
  if (!(gamma >= 0.0) || !std::isfinite(gamma)) throw DomainError("monte carlo: gamma must be >= 0");
  if (!std::isfinite(c1) || !std::isfinite(c2)) throw DomainError("monte carlo: drift rates must be finite");
  if (v.kind() == RandomHorizonSpec::Kind::custom)
    throw DomainError("monte carlo: V must be exponential or infinite to be sampled");
  if (cfg.antithetic && !m.is_brownian()) throw DomainError("monte carlo: antithetic sampling is Brownian only");
  const bool inf = v.kind() == RandomHorizonSpec::Kind::infinite;
  const double theta = inf ? 0.0 : v.theta();
  if (inf && !(c2 - m.mean_rate() > 0.0))
    throw UnsupportedRegimeError("monte carlo: V = infinity requires c2 - E X(1) > 0");

  if (uses_bridge(m, cfg)) {
    // exact supremum of each Brownian bridge segment
    auto e = run(cfg, 3.0, BiasNote::none, [&](long long p) {
      rng::Stream s(cfg.seed, path_key(cfg, p), 0, 0, 3);
      const double sign = path_sign(cfg, p);
      const double T = exponential_variate(lambda, s);
      const double yT = sign * std::sqrt(T) * normal_variate(s) - c1 * T;
      auto bridge_max = [&](double y0, double y1, double len) {
        const double d = y1 - y0;
        return 0.5 * (y0 + y1 + std::sqrt(d * d - 2.0 * len * std::log(s.uniform())));
      };
      double M = bridge_max(0.0, yT, T);
      if (inf) {
        M = std::max(M, yT + exponential_variate(2.0 * c2, s));
      } else {
        const double V = exponential_variate(theta, s);
        const double yS = yT + sign * std::sqrt(V) * normal_variate(s) - c2 * V;
        M = std::max(M, bridge_max(yT, yS, V));
      }
      return std::exp(-gamma * M);
    });
    e.horizon = inf ? kInf : 0.0;
    return e;
  }

  double cut = 0.0;
  if (inf) {
    const double target = 1.0 / (6.0 * std::sqrt(static_cast<double>(cfg.n_paths)));
    const BrokenDrift tail(c2, c2, 1.0);
    cut = 4.0;
    for (int i = 0; tail_envelope(m, tail, 0.0, cut) > target; ++i, cut *= 2.0)
      if (i == 24) throw ConvergenceError("monte carlo: no horizon cutoff found for V = infinity", 0.0, 0.0);
  }
  const double mean_len = 1.0 / lambda + (inf ? cut : 1.0 / theta);
  const double w = extrapolation_weight(m);
  auto horizon_of = [&](rng::Stream& s, double& T) {
    T = exponential_variate(lambda, s);
    return T + (inf ? cut : exponential_variate(theta, s));
  };
  if (m.is_gamma()) {
    const GammaPath probe(m, Grid(cfg.grid_step, mean_len), cfg.seed, 0);
    auto e = run(cfg, probe.work(), BiasNote::grid_sup_downward, [&](long long p) {
      rng::Stream s(cfg.seed, static_cast<std::uint64_t>(p), 0, 0, 5);
      double T = 0.0;
      const double S = horizon_of(s, T);
      const GammaPath path(m, Grid(cfg.grid_step, S), cfg.seed, static_cast<std::uint64_t>(p));
      return std::exp(-gamma * path.sup({0.0, c1, c2, T}));
    });
    e.horizon = inf ? cut : 0.0;
    return e;
  }
  auto e = run(cfg, mean_len / cfg.grid_step, grid_note(cfg, true), [&](long long p) {
    rng::Stream s(cfg.seed, path_key(cfg, p), 0, 0, 5);
    double T = 0.0;
    const double S = horizon_of(s, T);
    const Grid g(cfg.grid_step, S);
    const GridPath path(m, g, cfg.seed, path_key(cfg, p), path_sign(cfg, p));
    const auto [fine, coarse] = path.sup({0.0, c1, c2, T});
    const double vf = std::exp(-gamma * fine);
    if (!cfg.extrapolate || g.N < 2) return vf;
    return vf + w * (vf - std::exp(-gamma * coarse));
  });
  e.horizon = inf ? cut : 0.0;
  return e;
}

double kolmogorov_pvalue(double d, long long n) {
  if (!(d >= 0.0) || n < 1) throw DomainError("kolmogorov_pvalue: requires d >= 0 and n >= 1");
  const double rn = std::sqrt(static_cast<double>(n));
  const double l = (rn + 0.12 + 0.11 / rn) * d;
  if (l < 0.2) return 1.0;
  double p = 0.0;
  if (l < 1.18) {
    const double pi2 = std::numbers::pi * std::numbers::pi;
    double sum = 0.0;
    for (int k = 1; k <= 20; ++k) sum += std::exp(-(2.0 * k - 1.0) * (2.0 * k - 1.0) * pi2 / (8.0 * l * l));
    p = 1.0 - std::sqrt(2.0 * std::numbers::pi) / l * sum;
  } else {
    for (int k = 1; k <= 100; ++k) p += (k % 2 == 1 ? 2.0 : -2.0) * std::exp(-2.0 * k * k * l * l);
  }
  return std::clamp(p, 0.0, 1.0);
}

KSResult stable_calibration(double alpha, long long n, std::uint64_t seed) {
  if (n < 100) throw DomainError("stable_calibration: n must be at least 100");
  const StableSampler draw(alpha);
  std::vector<double> z(static_cast<std::size_t>(n));
  rng::Stream s(seed, 0, 0, 0, 4);
  for (auto& x : z) x = draw(s);
  std::sort(z.begin(), z.end());

  // the model cdf on a fine table, direct evaluation outside it
  constexpr double lo = -6.0, hi = 30.0, step = 0.005;
  const auto nodes = static_cast<std::size_t>(std::lround((hi - lo) / step)) + 1;
  std::vector<double> table(nodes);
  for (std::size_t i = 0; i < nodes; ++i) table[i] = stable::cdf(lo + step * static_cast<double>(i), alpha);
  auto F = [&](double x) {
    if (x < lo || x >= hi) return stable::cdf(x, alpha);
    const double pos = (x - lo) / step;
    const auto i = std::min(static_cast<std::size_t>(pos), nodes - 2);
    const double f = pos - static_cast<double>(i);
    return table[i] + f * (table[i + 1] - table[i]);
  };

  double d = 0.0;
  const double dn = static_cast<double>(n);
  for (long long i = 0; i < n; ++i) {
    const double f = F(z[static_cast<std::size_t>(i)]);
    d = std::max({d, f - static_cast<double>(i) / dn, static_cast<double>(i + 1) / dn - f});
  }
  return {d, kolmogorov_pvalue(d, n), n};
}

}  // namespace mc

}  // namespace lbd
