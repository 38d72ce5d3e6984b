#include <algorithm>
#include <cmath>
#include <random>

#include "doctest.h"
#include "lbd/closedforms.hpp"
#include "lbd/errors.hpp"
#include "lbd/ruin.hpp"
#include "oracles.hpp"

using namespace lbd;
using oracle::Phi;

namespace {

TwoCompanyParams make(double x1, double x2, double p1, double p2, double d1 = 0.5,
                      LevyModel m = LevyModel::brownian()) {
  return {x1, x2, p1, p2, d1, 1.0 - d1, m};
}

// Four-term expression for u1 < u2, c1 > c2 and standard Brownian claims.
double four_term(double u1, double u2, double c1, double c2) {
  const double T = (u2 - u1) / (c1 - c2);
  auto a = [T](double u, double c) { return u / std::sqrt(T) + c * std::sqrt(T); };
  const double k = c1 - 2.0 * c2;
  return Phi(a(-u1, -c1)) + std::exp(-2.0 * c1 * u1) * Phi(a(-u1, c1)) +
         std::exp(-2.0 * c2 * u2) * Phi(a(u1, k)) - std::exp(-2.0 * k * u1 - 2.0 * c2 * u2) * Phi(a(-u1, k));
}

}  // namespace

TEST_CASE("reduce") {
  auto r = ruin::reduce(make(1, 2, 1, 1));
  CHECK(r.u1 == 2.0);
  CHECK(r.u2 == 4.0);
  CHECK(r.c1 == 2.0);
  CHECK(r.c2 == 2.0);
  CHECK_FALSE(r.crossing.has_value());

  r = ruin::reduce(make(1, 3, 2, 1));
  CHECK(r.u1 == 2.0);
  CHECK(r.u2 == 6.0);
  CHECK(r.c1 == 4.0);
  CHECK(r.c2 == 2.0);
  REQUIRE(r.crossing.has_value());
  CHECK(*r.crossing == 2.0);

  r = ruin::reduce(make(2, 1, 1, 2));
  CHECK(r.u1 == 4.0);
  CHECK(r.u2 == 2.0);
  REQUIRE(r.crossing.has_value());
  CHECK(*r.crossing == 1.0);

  // diverging lines and a common start are not crossings
  CHECK_FALSE(ruin::reduce(make(1, 2, 1, 2)).crossing.has_value());
  CHECK_FALSE(ruin::reduce(make(1, 1, 1, 2)).crossing.has_value());

  // capital and proportion scaled together leave the level unchanged
  const auto a = ruin::reduce(make(0.3, 0.7, 1.0, 1.0, 0.3));
  const auto b = ruin::reduce(make(0.6, 0.4, 2.0, 0.5, 0.6));
  CHECK(a.u1 == doctest::Approx(b.u1).epsilon(1e-15));
  CHECK(a.u2 == doctest::Approx(b.u2).epsilon(1e-15));
}

TEST_CASE("validation") {
  CHECK_THROWS_AS(ruin::reduce(make(0, 1, 1, 1)), DomainError);
  CHECK_THROWS_AS(ruin::reduce(make(1, 1, -1, 1)), DomainError);
  CHECK_THROWS_AS(ruin::reduce({1, 1, 1, 1, 0.5, 0.6, LevyModel::brownian()}), DomainError);
  CHECK_THROWS_AS(ruin::reduce({1, 1, 1, 1, 0.0, 1.0, LevyModel::brownian()}), DomainError);
  CHECK_NOTHROW(ruin::reduce({1, 1, 1, 1, 0.3, 0.7 + 1e-13, LevyModel::brownian()}));
}

TEST_CASE("psi_or: Brownian crossing case") {
  const auto inf = Horizon::infinite();
  for (auto [x1, x2, p1, p2] : {std::array{1.0, 3.0, 2.0, 1.0}, std::array{0.2, 0.9, 0.8, 0.3},
                                std::array{0.5, 0.6, 1.5, 0.2}}) {
    const auto params = make(x1, x2, p1, p2);
    const auto r = ruin::reduce(params);
    const auto p = ruin::psi_or(params, inf);
    CHECK(p.value == closedforms::brownian_sup_broken_inf(r.c1, r.c2, *r.crossing, r.u1));
    CHECK(std::abs(p.value - four_term(r.u1, r.u2, r.c1, r.c2)) < 1e-12);
    CHECK(std::abs(p.value - oracle::brownian_broken(r.c1, r.c2, *r.crossing, r.u1, INFINITY)) < 1e-9);
  }
  // relabeling: swapping the companies changes nothing
  const auto a = ruin::psi_or(make(1, 3, 2, 1), inf);
  const auto b = ruin::psi_or(make(3, 1, 1, 2), inf);
  CHECK(a.value == b.value);
}

TEST_CASE("psi_or and psi_sim without a crossing") {
  const auto bm = LevyModel::brownian();
  for (const auto& h : {Horizon::infinite(), Horizon::finite(3.0)}) {
    // parallel lines, line 1 below
    const auto par = make(1, 2, 1, 1);
    CHECK(ruin::psi_or(par, h).value == ruin::psi_single(bm, 2.0, 2.0, h).value);
    CHECK(ruin::psi_sim(par, h).value == ruin::psi_single(bm, 4.0, 2.0, h).value);
    // line 1 above everywhere
    const auto above = make(2, 1, 2, 1);
    CHECK(ruin::psi_sim(above, h).value == ruin::psi_single(bm, 4.0, 4.0, h).value);
    CHECK(ruin::psi_or(above, h).value == ruin::psi_single(bm, 2.0, 2.0, h).value);
  }
  const auto r = ruin::psi_or(make(1, 2, 1, 1), Horizon::infinite());
  CHECK(std::abs(r.value - std::exp(-8.0)) < 1e-15);
}

TEST_CASE("psi_sim: Brownian crossing case") {
  // u2 < u1, c2 > c1: the upper envelope follows line 1 up to T, then line 2
  const auto params = make(2, 1, 1, 2);
  const auto r = ruin::reduce(params);
  const BrokenDrift drift(r.c1, r.c2, *r.crossing);
  const auto generic = supdist::sup_broken_sp(LevyModel::brownian(), drift, r.u1, Horizon::infinite());
  const auto p = ruin::psi_sim(params, Horizon::infinite());
  CHECK(std::abs(p.value - generic.probability) < 1e-5);
  CHECK(std::abs(p.value - oracle::brownian_broken(r.c1, r.c2, *r.crossing, r.u1, INFINITY)) < 1e-9);
  // the or-crossing orientation handled by relabeling
  const auto q = ruin::psi_sim(make(1, 2, 2, 1), Horizon::infinite());
  CHECK(q.value == p.value);
}

TEST_CASE("identical companies") {
  const auto params = make(1, 1, 1, 1);
  for (const auto& h : {Horizon::infinite(), Horizon::finite(2.0)}) {
    const auto all = ruin::evaluate(params, h);
    CHECK(all.psi_or.value == all.psi1.value);
    CHECK(all.psi_sim.value == all.psi1.value);
    CHECK(all.psi2.value == all.psi1.value);
    CHECK(all.psi_and.value == all.psi1.value);
  }
}

TEST_CASE("psi_and: Brownian example") {
  const auto params = make(1, 2, 2, 1);
  const auto all = ruin::evaluate(params, Horizon::infinite());
  CHECK(std::abs(all.psi1.value - std::exp(-16.0)) < 1e-22);
  CHECK(std::abs(all.psi2.value - std::exp(-16.0)) < 1e-22);
  CHECK(all.psi_or.value == closedforms::brownian_sup_broken_inf(4.0, 2.0, 1.0, 2.0));
  CHECK(all.psi_and.raw == all.psi1.value + all.psi2.value - all.psi_or.value);
  CHECK(ruin::psi_and(params, Horizon::infinite()).value == all.psi_and.value);
  CHECK(all.psi_and.value >= 0.0);
  CHECK(all.psi_and.value <= std::min(all.psi1.value, all.psi2.value) + 1e-15);
}

TEST_CASE("psi_single delegates") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> unit(0.2, 2.0);
  const auto g = LevyModel::gamma(2.0);
  for (int i = 0; i < 3; ++i) {
    const double u = unit(rng), c = unit(rng), S = unit(rng);
    CHECK(ruin::psi_single(g, u, c, Horizon::finite(S)).value == supdist::sup_linear_sp(g, c, u, S).value);
    CHECK(ruin::psi_single(g, u, c + 0.5, Horizon::infinite()).value ==
          supdist::sup_linear_sp_inf(g, c + 0.5, u).value);
  }
  const auto rs = LevyModel::stable(1.5).reflected();
  CHECK(ruin::psi_single(rs, 1.0, 0.5, Horizon::infinite()).value == supdist::sup_linear_sn_inf(rs, 0.5, 1.0).value);
}

TEST_CASE("finite horizon shorter than the crossing time") {
  const auto params = make(1, 3, 2, 1);  // T = 2
  const auto p = ruin::psi_or(params, Horizon::finite(1.5));
  CHECK(p.value == ruin::psi_single(LevyModel::brownian(), 2.0, 4.0, Horizon::finite(1.5)).value);
  const auto longer = ruin::psi_or(params, Horizon::finite(4.0));
  const auto r = ruin::reduce(params);
  CHECK(std::abs(longer.value - oracle::brownian_broken(r.c1, r.c2, 2.0, r.u1, 4.0)) < 1e-7);
}

TEST_CASE("regime errors propagate") {
  // gamma(1): after the crossing the slower line has c2 delta <= 1
  const auto params = make(1, 3, 2, 0.5, 0.5, LevyModel::gamma(1.0));
  CHECK_THROWS_AS(ruin::psi_or(params, Horizon::infinite()), UnsupportedRegimeError);
}

TEST_CASE("ordering and sum invariants over a sweep") {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> cap(0.1, 2.0), prem(0.1, 2.0), prop(0.1, 0.9);
  int crossings = 0;
  for (int i = 0; i < 50; ++i) {
    const double d1 = prop(rng);
    const auto params = make(cap(rng), cap(rng), prem(rng), prem(rng), d1);
    const Horizon h = i % 2 == 0 ? Horizon::infinite() : Horizon::finite(0.5 + cap(rng));
    const auto all = ruin::evaluate(params, h);
    if (ruin::reduce(params).crossing) ++crossings;
    const double tol = 1e-7 + all.psi_or.err_est + all.psi_sim.err_est + all.psi1.err_est + all.psi2.err_est;
    CAPTURE(i);
    CHECK(all.psi_sim.value <= std::min(all.psi1.value, all.psi2.value) + tol);
    CHECK(std::max(all.psi1.value, all.psi2.value) <= all.psi_or.value + tol);
    CHECK(all.psi_or.value <= std::min(1.0, all.psi1.value + all.psi2.value) + tol);
    CHECK(std::abs(all.psi_and.raw + all.psi_or.value - all.psi1.value - all.psi2.value) < 2e-12);
  }
  CHECK(crossings >= 10);
}
