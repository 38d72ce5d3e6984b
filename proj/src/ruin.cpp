#include "lbd/ruin.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include "lbd/closedforms.hpp"
#include "lbd/errors.hpp"

namespace lbd::ruin {

namespace {

struct Line {
  double u;
  double c;
};

bool positive(double v) { return v > 0.0 && std::isfinite(v); }

bool spectrally_negative(const LevyModel& m) { return m.spectral_sign() == SpectralSign::negative; }

Probability from(const SupResult& r) { return {r.probability, r.err_est, r.A_term + r.B_term}; }

// Lower line for t > 0 when the lines do not cross there.
Line lower(const ReducedParams& r) {
  if (r.u1 < r.u2 || (r.u1 == r.u2 && r.c1 <= r.c2)) return {r.u1, r.c1};
  return {r.u2, r.c2};
}

Line upper(const ReducedParams& r) {
  if (r.u1 > r.u2 || (r.u1 == r.u2 && r.c1 >= r.c2)) return {r.u1, r.c1};
  return {r.u2, r.c2};
}

// P(sup X(t) - c(t) > first.u) for the envelope that follows `first` up to T
// and `second` afterwards.
Probability envelope(const LevyModel& m, Line first, Line second, double T, const Horizon& horizon,
                     const quad::QuadConfig& cfg) {
  if (!horizon.is_infinite() && horizon.S() <= T) return psi_single(m, first.u, first.c, horizon, cfg);
  if (m.is_brownian() && horizon.is_infinite()) {
    const double p = closedforms::brownian_sup_broken_inf(first.c, second.c, T, first.u);
    return {p, 0.0, p};
  }
  const BrokenDrift drift(first.c, second.c, T);
  if (spectrally_negative(m)) return from(supdist::sup_broken_sn(m, drift, first.u, horizon, cfg));
  return from(supdist::sup_broken_sp(m, drift, first.u, horizon, cfg));
}

}  // namespace

void validate(const TwoCompanyParams& p) {
  if (!positive(p.x1) || !positive(p.x2)) throw DomainError("two companies: capitals must be positive");
  if (!positive(p.p1) || !positive(p.p2)) throw DomainError("two companies: premium rates must be positive");
  if (!positive(p.delta1) || !positive(p.delta2)) throw DomainError("two companies: proportions must be positive");
  if (std::abs(p.delta1 + p.delta2 - 1.0) > 1e-12) throw DomainError("two companies: proportions must sum to 1");
}

ReducedParams reduce(const TwoCompanyParams& params) {
  validate(params);
  ReducedParams r;
  r.u1 = params.x1 / params.delta1;
  r.u2 = params.x2 / params.delta2;
  r.c1 = params.p1 / params.delta1;
  r.c2 = params.p2 / params.delta2;
  const double du = r.u2 - r.u1;
  const double dc = r.c1 - r.c2;
  if (du != 0.0 && dc != 0.0 && (du > 0.0) == (dc > 0.0)) r.crossing = du / dc;
  return r;
}

Probability psi_single(const LevyModel& m, double u, double c, const Horizon& horizon, const quad::QuadConfig& cfg) {
  if (spectrally_negative(m)) {
    if (horizon.is_infinite()) return supdist::sup_linear_sn_inf(m, c, u);
    return supdist::sup_linear_sn(m, c, u, horizon.S(), cfg);
  }
  if (horizon.is_infinite()) return supdist::sup_linear_sp_inf(m, c, u, cfg);
  return supdist::sup_linear_sp(m, c, u, horizon.S(), cfg);
}

Probability psi_or(const TwoCompanyParams& params, const Horizon& horizon, const quad::QuadConfig& cfg) {
  const ReducedParams r = reduce(params);
  if (!r.crossing) {
    const Line l = lower(r);
    return psi_single(params.model, l.u, l.c, horizon, cfg);
  }
  Line first{r.u1, r.c1};
  Line second{r.u2, r.c2};
  if (first.u > second.u) std::swap(first, second);
  return envelope(params.model, first, second, *r.crossing, horizon, cfg);
}

Probability psi_sim(const TwoCompanyParams& params, const Horizon& horizon, const quad::QuadConfig& cfg) {
  const ReducedParams r = reduce(params);
  if (!r.crossing) {
    const Line l = upper(r);
    return psi_single(params.model, l.u, l.c, horizon, cfg);
  }
  Line first{r.u1, r.c1};
  Line second{r.u2, r.c2};
  if (first.u < second.u) std::swap(first, second);
  return envelope(params.model, first, second, *r.crossing, horizon, cfg);
}

namespace {

Probability assemble_and(const Probability& p1, const Probability& p2, const Probability& por) {
  const double raw = p1.value + p2.value - por.value;
  return {std::clamp(raw, 0.0, 1.0), p1.err_est + p2.err_est + por.err_est, raw};
}

}  // namespace

Probability psi_and(const TwoCompanyParams& params, const Horizon& horizon, const quad::QuadConfig& cfg) {
  const ReducedParams r = reduce(params);
  const auto p1 = psi_single(params.model, r.u1, r.c1, horizon, cfg);
  const auto p2 = psi_single(params.model, r.u2, r.c2, horizon, cfg);
  return assemble_and(p1, p2, psi_or(params, horizon, cfg));
}

RuinProbabilities evaluate(const TwoCompanyParams& params, const Horizon& horizon, const quad::QuadConfig& cfg) {
  const ReducedParams r = reduce(params);
  RuinProbabilities out;
  out.psi1 = psi_single(params.model, r.u1, r.c1, horizon, cfg);
  out.psi2 = psi_single(params.model, r.u2, r.c2, horizon, cfg);
  out.psi_or = psi_or(params, horizon, cfg);
  out.psi_sim = psi_sim(params, horizon, cfg);
  out.psi_and = assemble_and(out.psi1, out.psi2, out.psi_or);
  return out;
}

}  // namespace lbd::ruin
