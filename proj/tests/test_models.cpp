#include <cmath>
#include <numbers>
#include <vector>

#include "doctest.h"
#include "lbd/errors.hpp"
#include "lbd/models.hpp"
#include "oracles.hpp"

using namespace lbd;

namespace {

// Integral of the density over the real line, tails cut by the model's own cdf/survival.
double total_mass(const LevyModel& m, double t) {
  quad::QuadConfig cfg;
  cfg.abs_tol = 1e-10;
  cfg.rel_tol = 1e-10;
  cfg.tail_cutoff_mass = 1e-9;
  cfg.max_subdivisions = 4000;
  auto f = [&](double x) { return models::density(m, x, t); };
  auto right = quad::integrate_semi_infinite(f, 0.0, cfg, [&](double b) { return models::survival(m, b, t); });
  if (m.is_gamma()) {
    // x^{t-1} at the origin
    auto near = quad::integrate(f, 0.0, 1.0, cfg.with_singularity(std::min(0.0, t - 1.0), quad::SingularEnd::left));
    auto far = quad::integrate_semi_infinite(f, 1.0, cfg, [&](double b) { return models::survival(m, b, t); });
    return near.value + far.value;
  }
  auto left = quad::integrate_semi_infinite([&](double x) { return f(-x); }, 0.0, cfg,
                                            [&](double b) { return models::cdf(m, -b, t); });
  return left.value + right.value;
}

}  // namespace

TEST_CASE("model construction and spectral sign") {
  CHECK(LevyModel::brownian().spectral_sign() == SpectralSign::both);
  CHECK(LevyModel::gamma(2).spectral_sign() == SpectralSign::positive);
  CHECK(LevyModel::stable(1.5).spectral_sign() == SpectralSign::positive);
  CHECK(LevyModel::stable(1.5).reflected().spectral_sign() == SpectralSign::negative);
  CHECK(LevyModel::gamma(2).reflected().reflected() == LevyModel::gamma(2));
  CHECK_THROWS_AS(LevyModel::gamma(0.0), DomainError);
  CHECK_THROWS_AS(LevyModel::stable(1.0), DomainError);
  CHECK_THROWS_AS(LevyModel::stable(2.0), DomainError);
  CHECK(LevyModel::gamma(4).mean_rate() == 0.25);
  CHECK(LevyModel::stable(1.25).small_time_exponent() == doctest::Approx(0.8));
}

TEST_CASE("broken drift") {
  BrokenDrift d(1.0, 0.5, 2.0);
  CHECK(d(1.0) == 1.0);
  CHECK(d(2.0) == 2.0);
  CHECK(d(std::nextafter(2.0, 3.0)) == doctest::Approx(2.0));
  CHECK(d(4.0) == 3.0);
  CHECK_THROWS_AS(BrokenDrift(-1, 1, 1), DomainError);
  CHECK_THROWS_AS(BrokenDrift(1, -1, 1), DomainError);
  CHECK_THROWS_AS(BrokenDrift(1, 1, 0), DomainError);
}

TEST_CASE("density: reference values") {
  CHECK(models::density(LevyModel::brownian(), 0.0, 1.0) == doctest::Approx(1.0 / std::sqrt(2.0 * std::numbers::pi)));
  CHECK(models::density(LevyModel::gamma(1.0), 2.0, 1.0) == doctest::Approx(std::exp(-2.0)).epsilon(1e-14));
  CHECK(models::density(LevyModel::gamma(1.0), -1.0, 0.5) == 0.0);
  CHECK(models::density(LevyModel::gamma(1.0), 0.0, 0.5) == 0.0);
  CHECK_THROWS_AS(models::density(LevyModel::brownian(), 0.0, 0.0), DomainError);
  CHECK_THROWS_AS(models::density(LevyModel::brownian(), 0.0, -1.0), DomainError);
}

TEST_CASE("stable density against the cosine-integral oracle") {
  const double oracle_value = oracle::nolan_density(0.7, 1.5);
  const double pinned = 0.12988232773465641;
  CHECK(std::abs(oracle_value - pinned) < 1e-10);
  CHECK(std::abs(models::density(LevyModel::stable(1.5), 0.7, 1.0) - pinned) < 1e-10);

  for (double alpha : {1.1, 1.5, 1.9}) {
    for (double x : {-3.0, -1.0, -0.2, 0.0, 0.5, 1.0, 2.5, 6.0}) {
      const double ref = oracle::nolan_density(x, alpha);
      CHECK(std::abs(stable::density(x, alpha) - ref) < 1e-10);
    }
  }
  // Time scaling: f(x, t) = t^{-1/a} f(x t^{-1/a}, 1).
  const double t = 2.5, a = 1.5, sc = std::pow(t, 1.0 / a);
  CHECK(models::density(LevyModel::stable(a), 1.3, t) == doctest::Approx(stable::density(1.3 / sc, a) / sc));
}

TEST_CASE("stable tail accuracy and cdf consistency") {
  const double a = 1.5;
  // Far tail follows C_a y^{-a}; relative, not absolute, accuracy matters there.
  const double y = 1e4;
  const double surv = stable::survival(y, a);
  CHECK(surv * std::pow(y, a) == doctest::Approx(stable::tail_constant(a)).epsilon(1e-3));
  CHECK(stable::density(y, a) * std::pow(y, a + 1.0) == doctest::Approx(a * stable::tail_constant(a)).epsilon(1e-3));
  CHECK(stable::cdf(0.0, a) == doctest::Approx(1.0 / a).epsilon(1e-12));
  for (double x : {-2.0, -0.5, 0.3, 0.99, 1.0, 3.0}) {
    CHECK(stable::cdf(x, a) + stable::survival(x, a) == doctest::Approx(1.0).epsilon(1e-12));
    // F(x) - F(x0) against the density integral
    auto r = quad::integrate([&](double v) { return stable::density(v, a); }, -4.0, x);
    CHECK(stable::cdf(x, a) - stable::cdf(-4.0, a) == doctest::Approx(r.value).epsilon(1e-8));
  }
}

TEST_CASE("neg_part_mean") {
  CHECK(models::neg_part_mean(LevyModel::brownian(), 0.0, 1.0) ==
        doctest::Approx(1.0 / std::sqrt(2.0 * std::numbers::pi)).epsilon(1e-14));
  CHECK(models::neg_part_mean(LevyModel::gamma(1.0), 0.0, 1.0) == 0.0);
  CHECK_THROWS_AS(models::neg_part_mean(LevyModel::brownian(), 0.0, 0.0), DomainError);

  // Brownian closed form against quadrature of (cs - x) phi.
  for (double c : {-1.0, 0.0, 0.7, 2.0}) {
    for (double s : {0.1, 1.0, 3.0}) {
      const double level = c * s;
      const double ref = oracle::composite(
          [&](double x) { return (level - x) * std::exp(-x * x / (2.0 * s)) / std::sqrt(2.0 * std::numbers::pi * s); },
          level - 40.0 * std::sqrt(s), level, 400);
      CHECK(models::neg_part_mean(LevyModel::brownian(), c, s) == doctest::Approx(ref).epsilon(1e-12));
    }
  }

  // Gamma: quadrature of (cs - x) f(x, s) with a tanh-sinh rule (x^{s-1} at 0).
  for (double delta : {0.5, 2.0}) {
    for (double s : {0.3, 1.0, 3.0}) {
      for (double c : {0.2, 1.0, 4.0}) {
        const double k = c * s;
        const double ref = oracle::tanh_sinh(
            [&](double x) {
              return (k - x) * std::exp(s * std::log(delta) - std::lgamma(s) + (s - 1.0) * std::log(x) - delta * x);
            },
            0.0, k, 1.0 / 256.0);
        CHECK(std::abs(models::neg_part_mean(LevyModel::gamma(delta), c, s) - ref) < 1e-12);
      }
    }
  }
  CHECK(models::neg_part_mean(LevyModel::gamma(2.0), 1.0, 1e-300) >= 0.0);

  // Stable: quadrature of (cs - x) f(x, s) with the cosine-integral density.
  {
    const double a = 1.5, c = 0.5, s = 2.0, sc = std::pow(s, 1.0 / a);
    const double ref = oracle::composite(
        [&](double x) { return (c * s - x) * oracle::nolan_density(x / sc, a) / sc; }, -14.0, c * s, 300);
    const double pinned = 2.1991410321227764;
    CHECK(std::abs(ref - pinned) < 1e-9);
    CHECK(std::abs(models::neg_part_mean(LevyModel::stable(a), c, s) - pinned) < 1e-9);
  }

  // Reflected model: E(-X - cs)^- = E(X + cs)^+.
  {
    const auto m = LevyModel::gamma(2.0);
    const double c = 0.3, s = 1.5;
    const double pos = s / 2.0 + c * s + models::neg_part_mean(m, -c, s);
    CHECK(models::neg_part_mean(m.reflected(), c, s) == doctest::Approx(pos));
    const double direct = quad::integrate(
        [&](double x) { return (x + c * s) * models::density(m, x, s); }, 0.0, 60.0).value;
    CHECK(models::neg_part_mean(m.reflected(), c, s) == doctest::Approx(direct).epsilon(1e-7));
  }
}

TEST_CASE("neg_part_mean is nondecreasing in c") {
  for (const auto& m : {LevyModel::brownian(), LevyModel::gamma(2.0), LevyModel::stable(1.5), LevyModel::stable(1.2)}) {
    for (double s : {0.2, 1.0, 2.5}) {
      double prev = -1.0;
      for (double c = -2.0; c <= 4.0; c += 0.25) {
        const double v = models::neg_part_mean(m, c, s);
        CHECK(v >= 0.0);
        CHECK(v >= prev - 1e-13);
        prev = v;
      }
    }
  }
}

TEST_CASE("density normalisation") {
  for (const auto& m : {LevyModel::brownian(), LevyModel::gamma(2.0), LevyModel::stable(1.5)}) {
    for (double t : {0.3, 1.0, 3.0}) {
      INFO(m.name() << " t=" << t);
      CHECK(std::abs(total_mass(m, t) - 1.0) < 1e-6);
    }
  }
}

TEST_CASE("densities positive on a grid") {
  for (double x = -5.0; x <= 5.0; x += 0.5) {
    CHECK(models::density(LevyModel::brownian(), x, 1.0) > 0.0);
    CHECK(models::density(LevyModel::stable(1.5), x, 1.0) > 0.0);
    if (x <= 0) CHECK(models::density(LevyModel::gamma(2.0), x, 1.0) == 0.0);
  }
}

TEST_CASE("laplace exponent") {
  const auto bm = LevyModel::brownian();
  CHECK(models::laplace_exponent(bm, 1.0, 2.0) == 4.0);
  for (const auto& m : {bm, LevyModel::gamma(2.0), LevyModel::stable(1.5)}) CHECK(models::laplace_exponent(m, 0.7, 0.0) == 0.0);
  CHECK_THROWS_AS(models::laplace_exponent(bm, 1.0, -0.1), DomainError);
  CHECK_THROWS_AS(models::laplace_exponent(LevyModel::gamma(2.0).reflected(), 1.0, 1.0), DomainError);

  // Gamma: analytic value and a quadrature expectation.
  const auto gm = LevyModel::gamma(2.0);
  const double expect = 1.0 + std::log(2.0 / 3.0);
  CHECK(models::laplace_exponent(gm, 1.0, 1.0) == doctest::Approx(expect).epsilon(1e-14));
  const double mgf = oracle::composite([](double x) { return std::exp(-x) * 2.0 * std::exp(-2.0 * x); }, 0.0, 40.0, 200);
  CHECK(std::log(mgf) + 1.0 == doctest::Approx(expect).epsilon(1e-12));

  // Stable: numeric transform against -g^a / cos(pi a / 2) + c g.
  for (double alpha : {1.2, 1.5, 1.8}) {
    for (double g : {0.1, 0.5, 1.0, 2.0}) {
      const double closed = -std::pow(g, alpha) / std::cos(std::numbers::pi * alpha / 2.0) + 0.3 * g;
      CHECK(models::laplace_exponent(LevyModel::stable(alpha), 0.3, g) == doctest::Approx(closed).epsilon(1e-9));
    }
  }

  CHECK(models::laplace_exponent_slope_at_zero(gm, 1.0) == 0.5);
  CHECK(models::laplace_exponent_slope_at_zero(LevyModel::stable(1.5), 0.8) == 0.8);
  // slope against a central difference
  const double h = 1e-6;
  for (const auto& m : {bm, gm}) {
    const double fd = (models::laplace_exponent(m, 1.0, 2 * h) - models::laplace_exponent(m, 1.0, h)) / h;
    CHECK(fd == doctest::Approx(models::laplace_exponent_slope_at_zero(m, 1.0)).epsilon(1e-4));
  }
  // the stable exponent has a g^a term, so the one-sided quotient carries h^{a-1}
  {
    const double a = 1.5;
    const double fd = (models::laplace_exponent(LevyModel::stable(a), 1.0, 2 * h) -
                       models::laplace_exponent(LevyModel::stable(a), 1.0, h)) / h;
    const double expected = models::laplace_exponent_slope_at_zero(LevyModel::stable(a), 1.0) -
                            (std::pow(2.0, a) - 1.0) * std::pow(h, a - 1.0) / std::cos(std::numbers::pi * a / 2.0);
    CHECK(fd == doctest::Approx(expected).epsilon(2e-4));
  }
}

TEST_CASE("laplace exponent is convex") {
  for (const auto& m : {LevyModel::brownian(), LevyModel::gamma(2.0), LevyModel::stable(1.5)}) {
    const double h = 0.1;
    for (double g = h; g <= 3.0; g += h) {
      const double d2 = models::laplace_exponent(m, 0.5, g + h) - 2.0 * models::laplace_exponent(m, 0.5, g) +
                        models::laplace_exponent(m, 0.5, g - h);
      CHECK(d2 >= -1e-9);
    }
  }
}

TEST_CASE("laplace exponent inverse") {
  CHECK(models::laplace_exponent_inverse(LevyModel::brownian(), 1.0, 4.0) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK_THROWS_AS(models::laplace_exponent_inverse(LevyModel::brownian(), 1.0, 0.0), DomainError);

  // independent bisection on the analytic gamma exponent
  auto phi = [](double g) { return g + std::log(2.0 / (2.0 + g)); };
  double lo = 0.0, hi = 10.0;
  while (hi - lo > 1e-15) {
    const double mid = 0.5 * (lo + hi);
    (phi(mid) < 0.5 ? lo : hi) = mid;
  }
  const double pinned = 0.85642294182902738;
  CHECK(std::abs(lo - pinned) < 1e-12);
  CHECK(models::laplace_exponent_inverse(LevyModel::gamma(2.0), 1.0, 0.5) == doctest::Approx(pinned).epsilon(1e-11));

  for (const auto& m : {LevyModel::brownian(), LevyModel::gamma(2.0), LevyModel::stable(1.5)}) {
    for (double lambda : {0.1, 1.0, 10.0}) {
      const double g = models::laplace_exponent_inverse(m, 1.0, lambda);
      CHECK(std::abs(models::laplace_exponent(m, 1.0, g) - lambda) < 1e-10);
    }
  }
}
