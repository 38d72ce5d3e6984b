#pragma once

#include <cstdint>

#include "lbd/laplace.hpp"
#include "lbd/models.hpp"
#include "lbd/rng.hpp"
#include "lbd/ruin.hpp"
#include "lbd/supdist.hpp"

namespace lbd {

struct MCConfig {
  long long n_paths = 100000;   ///< at least 10^4
  double grid_step = 1e-3;
  std::uint64_t seed = 0;
  bool antithetic = false;      ///< Brownian only; n_paths must be even
  bool brownian_bridge = true;  ///< exact crossing between Brownian grid points
  bool extrapolate = false;     ///< stable / gridded Brownian: combine grids h and 2h
  double max_work = 1e10;       ///< budget in simulated increments
  int threads = 0;              ///< worker threads; 0 uses the hardware count
};

enum class BiasNote { none, grid_sup_downward, grid_sup_extrapolated };

struct MCEstimate {
  double estimate = 0.0;
  double std_error = 0.0;
  long long n_paths = 0;
  BiasNote bias_note = BiasNote::none;
  double horizon = 0.0;  ///< horizon simulated (after doubling for infinite targets)
};

enum class RuinEvent { either, simultaneous, both };

struct KSResult {
  double statistic = 0.0;
  double p_value = 0.0;
  long long n = 0;
};

const char* to_string(BiasNote note) noexcept;

namespace mc {

/// Throws DomainError for an invalid configuration.
void validate(const MCConfig& cfg);

/// P(sup_{t<S} X(t) - c(t) > u). Infinite horizons double S until the tail
/// envelope is below a third of the standard error.
MCEstimate simulate_sup_broken(const LevyModel& m, const BrokenDrift& drift, double u, const Horizon& horizon,
                               const MCConfig& cfg);

/// Ruin event of the two companies from one simulated claim path per sample.
MCEstimate simulate_two_company(const TwoCompanyParams& params, const Horizon& horizon, const MCConfig& cfg,
                                RuinEvent event);

/// E exp(-gamma sup_{t<T+V}(X(t) - c(t))) with T ~ Exp(lambda) and V from v
/// (exponential, or infinite).
MCEstimate simulate_laplace_transform(const LevyModel& m, double c1, double c2, double lambda,
                                      const RandomHorizonSpec& v, double gamma, const MCConfig& cfg);

/// Upper bound on P(sup_{t>=S} X(t) - c(t) > u).
double tail_envelope(const LevyModel& m, const BrokenDrift& drift, double u, double S);

/// Standard totally skewed stable variate (Chambers-Mallows-Stuck).
double stable_variate(double alpha, rng::Stream& s);

/// Kolmogorov-Smirnov test of n stable variates against the model cdf at t = 1.
KSResult stable_calibration(double alpha, long long n, std::uint64_t seed);

/// Asymptotic Kolmogorov p-value of the statistic d for sample size n.
double kolmogorov_pvalue(double d, long long n);

}  // namespace mc

}  // namespace lbd
