// Acceptance suite: one PASS/FAIL line per criterion.
//
// Usage: acceptance [criterion numbers...]   (default: all)

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "lbd/closedforms.hpp"
#include "lbd/laplace.hpp"
#include "lbd/montecarlo.hpp"
#include "lbd/ruin.hpp"
#include "lbd/supdist.hpp"
#include "oracles.hpp"

#ifndef LBD_CLI_BINARY
#define LBD_CLI_BINARY "levy-breakdrift"
#endif

using namespace lbd;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

class Report {
 public:
  void check(bool ok, const std::string& what) {
    if (!ok) {
      pass_ = false;
      if (failures_++ < 3) fail_ << (fail_.tellp() > 0 ? "; " : "") << what;
    }
  }
  void note(const std::string& s) { note_ << (note_.tellp() > 0 ? ", " : "") << s; }
  Outcome outcome() const {
    Outcome o{pass_, note_.str()};
    if (!pass_) o.detail += (o.detail.empty() ? "" : " | ") + std::string("failed: ") + fail_.str();
    return o;
  }

 private:
  bool pass_ = true;
  int failures_ = 0;
  std::ostringstream note_, fail_;
};

std::string num(double v, int digits = 6) {
  std::ostringstream s;
  s.precision(digits);
  s << v;
  return s.str();
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

const auto bm = LevyModel::brownian();
const std::array<double, 3> kGrid3 = {0.5, 1.0, 2.0};

Outcome ac1() {
  Report r;
  const auto t0 = std::chrono::steady_clock::now();
  const auto p = supdist::sup_linear_sp(bm, 1.0, 1.0, 1.0);
  const double t = seconds_since(t0);
  const double exact = oracle::Phi(-2.0) + std::exp(-2.0) * oracle::Phi(0.0);
  const double closed = closedforms::brownian_A(1.0, 1.0, 1.0);
  r.note("value " + num(p.value, 12) + ", exact " + num(exact, 12) + ", |diff| " + num(std::abs(p.value - exact), 2));
  r.check(std::abs(p.value - exact) <= 1e-6, "quadrature vs exact");
  r.check(std::abs(closed - exact) <= 1e-12, "closed form vs exact");
  r.check(t < 1.0, "runtime " + num(t) + " s");
  return r.outcome();
}

Outcome ac2() {
  Report r;
  const auto t0 = std::chrono::steady_clock::now();
  double worst = 0.0;
  int n = 0;
  for (auto variant : {closedforms::IdentityVariant::minus, closedforms::IdentityVariant::plus})
    for (double c : {0.5, 1.0, 1.5, 2.0})
      for (double T : kGrid3)
        for (double u : kGrid3) {
          const auto s = closedforms::brownian_identity_check(c, T, u, variant);
          const double d = std::abs(s.lhs - s.rhs);
          worst = std::max(worst, d);
          ++n;
          r.check(d <= 1e-6, "c=" + num(c) + " T=" + num(T) + " u=" + num(u) + " diff " + num(d));
        }
  const double t = seconds_since(t0);
  r.note(std::to_string(n) + " identities, max |lhs-rhs| " + num(worst, 2) + ", " + num(t, 3) + " s");
  r.check(t < 30.0, "runtime " + num(t) + " s");
  return r.outcome();
}

Outcome ac3() {
  Report r;
  const auto a = supdist::sup_broken_sp(bm, BrokenDrift(1.0, 1.0, 0.7), 1.0, Horizon::infinite());
  const auto b = supdist::sup_broken_sp(bm, BrokenDrift(1.0, 0.0, 0.7), 1.0, Horizon::infinite());
  r.note("c2=c1: " + num(a.probability, 12) + " (e^-2 = " + num(std::exp(-2.0), 12) + ")");
  r.note("c2=0: " + num(b.probability, 12));
  r.check(std::abs(a.probability - std::exp(-2.0)) <= 1e-6, "c2=c1");
  r.check(std::abs(b.probability - 1.0) <= 1e-6, "c2=0");
  return r.outcome();
}

Outcome ac4() {
  Report r;
  double worst_inf = 0.0, worst_fin = 0.0;
  for (double c1 : kGrid3)
    for (double c2 : kGrid3)
      for (double T : kGrid3)
        for (double u : kGrid3) {
          const double g = supdist::sup_broken_sp(bm, BrokenDrift(c1, c2, T), u, Horizon::infinite()).probability;
          const double d = std::abs(g - closedforms::brownian_sup_broken_inf(c1, c2, T, u));
          worst_inf = std::max(worst_inf, d);
          r.check(d <= 1e-5, "inf c1=" + num(c1) + " c2=" + num(c2) + " T=" + num(T) + " u=" + num(u));
        }
  const double S = 3.0, u = 1.0;
  for (double c1 : {0.5, 1.5})
    for (double c2 : {0.5, 1.0})
      for (double T : {0.5, 1.0}) {
        const double g = supdist::sup_broken_sp(bm, BrokenDrift(c1, c2, T), u, Horizon::finite(S)).probability;
        const double d = std::abs(g - closedforms::brownian_sup_broken_finite(c1, c2, T, S, u).value);
        worst_fin = std::max(worst_fin, d);
        r.check(d <= 1e-5, "S=3 c1=" + num(c1) + " c2=" + num(c2) + " T=" + num(T));
      }
  r.note("81 infinite-horizon points, max diff " + num(worst_inf, 2));
  r.note("8 finite-horizon points, max diff " + num(worst_fin, 2));
  return r.outcome();
}

Outcome ac5() {
  Report r;
  double worst = 0.0;
  int n = 0;
  for (const Horizon& h : {Horizon::infinite(), Horizon::finite(3.0)})
    for (double c1 : kGrid3)
      for (double c2 : kGrid3)
        for (double T : {0.5, 1.0})
          for (double u : kGrid3) {
            const BrokenDrift d(c1, c2, T);
            const double sp = supdist::sup_broken_sp(bm, d, u, h).probability;
            const double sn = supdist::sup_broken_sn(bm, d, u, h).probability;
            worst = std::max(worst, std::abs(sp - sn));
            ++n;
            r.check(std::abs(sp - sn) <= 1e-5, "c1=" + num(c1) + " c2=" + num(c2) + " T=" + num(T) + " u=" + num(u));
          }
  r.note(std::to_string(n) + " points, max |sp-sn| " + num(worst, 2));
  return r.outcome();
}

MCConfig mc_config(long long n, double h, std::uint64_t seed) {
  MCConfig cfg;
  cfg.n_paths = n;
  cfg.grid_step = h;
  cfg.seed = seed;
  return cfg;
}

Outcome ac6() {
  Report r;
  const auto t0 = std::chrono::steady_clock::now();
  const auto m = LevyModel::gamma(2.0);
  const BrokenDrift d(2.0, 1.5, 1.0);
  const auto exact = supdist::sup_broken_sp(m, d, 1.0, Horizon::finite(3.0));
  const auto coarse = mc::simulate_sup_broken(m, d, 1.0, Horizon::finite(3.0), mc_config(1000000, 1e-3, 2024));
  const auto fine = mc::simulate_sup_broken(m, d, 1.0, Horizon::finite(3.0), mc_config(1000000, 5e-4, 2024));
  const double t = seconds_since(t0);
  const double z = (fine.estimate - exact.probability) / fine.std_error;
  r.note("analytic " + num(exact.probability, 8) + ", MC h=1e-3 " + num(coarse.estimate, 6) + ", h=5e-4 " +
         num(fine.estimate, 6) + " +- " + num(fine.std_error, 2) + ", z " + num(z, 3) + ", " + num(t, 3) + " s");
  r.check(std::abs(z) <= 3.0, "analytic outside 3 stderr");
  r.check(std::abs(coarse.estimate - fine.estimate) <= 3.0 * fine.std_error, "grid instability");
  r.check(std::abs(coarse.estimate - exact.probability) <= 3.0 * coarse.std_error, "h=1e-3 outside 3 stderr");
  r.check(t < 300.0, "runtime " + num(t) + " s");
  return r.outcome();
}

Outcome ac7() {
  Report r;
  const auto t0 = std::chrono::steady_clock::now();
  const auto ks = mc::stable_calibration(1.5, 1000000, 2024);
  r.note("KS D " + num(ks.statistic, 3) + ", p " + num(ks.p_value, 3));
  r.check(ks.p_value > 0.01, "calibration p-value " + num(ks.p_value));
  if (ks.p_value <= 0.01) return r.outcome();

  const auto m = LevyModel::stable(1.5);
  const auto exact = supdist::sup_linear_sp(m, 0.8, 1.2, 2.0);
  auto cfg = mc_config(1000000, 2e-3, 2024);
  cfg.extrapolate = true;
  const auto e = mc::simulate_sup_broken(m, BrokenDrift(0.8, 0.8, 1.0), 1.2, Horizon::finite(2.0), cfg);
  const double z = (e.estimate - exact.value) / e.std_error;
  r.note("analytic " + num(exact.value, 8) + ", MC " + num(e.estimate, 6) + " +- " + num(e.std_error, 2) + " (" +
         to_string(e.bias_note) + "), z " + num(z, 3) + ", " + num(seconds_since(t0), 3) + " s");
  r.check(std::abs(z) <= 3.0, "analytic outside 3 stderr");
  return r.outcome();
}

double total_mass(const LevyModel& m, double t) {
  quad::QuadConfig cfg;
  cfg.abs_tol = 1e-10;
  cfg.rel_tol = 1e-10;
  cfg.tail_cutoff_mass = 1e-9;
  cfg.max_subdivisions = 4000;
  auto f = [&](double x) { return models::density(m, x, t); };
  auto tail = [&](double b) { return models::survival(m, b, t); };
  if (m.is_gamma()) {
    auto near = quad::integrate(f, 0.0, 1.0, cfg.with_singularity(std::min(0.0, t - 1.0), quad::SingularEnd::left));
    return near.value + quad::integrate_semi_infinite(f, 1.0, cfg, tail).value;
  }
  auto left = quad::integrate_semi_infinite([&](double x) { return f(-x); }, 0.0, cfg,
                                            [&](double b) { return models::cdf(m, -b, t); });
  return left.value + quad::integrate_semi_infinite(f, 0.0, cfg, tail).value;
}

Outcome ac8() {
  Report r;
  double worst = 0.0;
  for (const auto& m : {bm, LevyModel::gamma(2.0), LevyModel::stable(1.5)})
    for (double t : {0.3, 1.0, 3.0}) {
      const double d = std::abs(total_mass(m, t) - 1.0);
      worst = std::max(worst, d);
      r.check(d <= 1e-6, m.name() + " t=" + num(t) + " mass error " + num(d));
    }
  r.note("9 densities, max |mass-1| " + num(worst, 2));
  return r.outcome();
}

bool brackets(const MCEstimate& e, double exact) { return std::abs(e.estimate - exact) <= 3.0 * e.std_error; }

Outcome ac9() {
  Report r;
  double worst = 0.0;
  int n = 0;
  for (double c1 : kGrid3)
    for (double c2 : kGrid3)
      for (double lambda : kGrid3)
        for (double gamma : {2.0, 3.0, 5.0}) {
          const LaplaceQuery q{bm, c1, c2, lambda, gamma};
          const double inf = laplace::laplace_sup_broken(q, RandomHorizonSpec::infinite());
          const double d = std::abs(inf - laplace::brownian_laplace_inf(c1, c2, lambda, gamma));
          worst = std::max(worst, d);
          ++n;
          r.check(d <= 1e-10, "inf c1=" + num(c1) + " c2=" + num(c2) + " lambda=" + num(lambda) + " g=" + num(gamma));
          for (double theta : kGrid3) {
            const double v = laplace::laplace_sup_broken(q, RandomHorizonSpec::exponential(theta));
            const double e = std::abs(v - laplace::brownian_laplace_exp_exp(c1, c2, lambda, theta, gamma));
            worst = std::max(worst, e);
            ++n;
            r.check(e <= 1e-10, "exp c1=" + num(c1) + " c2=" + num(c2) + " theta=" + num(theta));
          }
        }
  r.note(std::to_string(n) + " closed-form points, max diff " + num(worst, 2));

  const auto cfg = mc_config(100000, 1e-3, 2024);
  const auto ev = RandomHorizonSpec::exponential(1.0);
  const auto b = mc::simulate_laplace_transform(bm, 1.0, 2.0, 1.0, ev, 2.0, cfg);
  const double bx = laplace::brownian_laplace_exp_exp(1.0, 2.0, 1.0, 1.0, 2.0);
  const auto bi = mc::simulate_laplace_transform(bm, 1.0, 2.0, 1.0, RandomHorizonSpec::infinite(), 2.0, cfg);
  const double bix = laplace::brownian_laplace_inf(1.0, 2.0, 1.0, 2.0);
  const auto g2 = LevyModel::gamma(2.0);
  const auto g = mc::simulate_laplace_transform(g2, 1.5, 1.0, 1.0, RandomHorizonSpec::exponential(2.0), 1.0, cfg);
  const double gx = laplace::laplace_sup_broken({g2, 1.5, 1.0, 1.0, 1.0}, RandomHorizonSpec::exponential(2.0));
  auto show = [](const char* name, const MCEstimate& e, double x) {
    return std::string(name) + " MC " + num(e.estimate, 6) + " +- " + num(e.std_error, 2) + " vs " + num(x, 8);
  };
  r.note(show("brownian exp", b, bx));
  r.note(show("brownian inf", bi, bix));
  r.note(show("gamma exp", g, gx));
  r.check(brackets(b, bx), "brownian exp MC");
  r.check(brackets(bi, bix), "brownian inf MC");
  r.check(brackets(g, gx), "gamma exp MC");
  return r.outcome();
}

double four_term(double u1, double u2, double c1, double c2) {
  const double T = (u2 - u1) / (c1 - c2);
  auto a = [T](double u, double c) { return u / std::sqrt(T) + c * std::sqrt(T); };
  const double k = c1 - 2.0 * c2;
  return oracle::Phi(a(-u1, -c1)) + std::exp(-2.0 * c1 * u1) * oracle::Phi(a(-u1, c1)) +
         std::exp(-2.0 * c2 * u2) * oracle::Phi(a(u1, k)) -
         std::exp(-2.0 * k * u1 - 2.0 * c2 * u2) * oracle::Phi(a(-u1, k));
}

Outcome ac10() {
  Report r;
  // Crossing case: u = (1, 2) / 0.5, c = (2, 1) / 0.5, T = 1.
  const TwoCompanyParams p{1.0, 2.0, 2.0, 1.0, 0.5, 0.5, bm};
  const auto red = ruin::reduce(p);
  const double psi = ruin::psi_or(p, Horizon::infinite()).value;
  const double same = closedforms::brownian_sup_broken_inf(red.c1, red.c2, *red.crossing, red.u1);
  const double ft = four_term(red.u1, red.u2, red.c1, red.c2);
  r.note("psi_or " + num(psi, 12) + ", four-term " + num(ft, 12));
  r.check(psi == same, "psi_or differs from the closed form");
  r.check(std::abs(psi - ft) <= 1e-12 * std::max(ft, 1e-300) + 1e-300, "psi_or vs independent four-term");

  const double tol = 2.0 * supdist::default_config().abs_tol;
  std::mt19937_64 gen(20240601);
  std::uniform_real_distribution<double> cap(0.2, 3.0), rate(0.2, 3.0), share(0.2, 0.8), span(0.5, 5.0);
  int crossings = 0;
  double worst = 0.0;
  for (int i = 0; i < 50; ++i) {
    const double d1 = share(gen);
    const TwoCompanyParams q{cap(gen), cap(gen), rate(gen), rate(gen), d1, 1.0 - d1, bm};
    const Horizon h = i % 2 == 0 ? Horizon::infinite() : Horizon::finite(span(gen));
    const auto v = ruin::evaluate(q, h);
    if (ruin::reduce(q).crossing) ++crossings;
    const double lo = std::min(v.psi1.value, v.psi2.value), hi = std::max(v.psi1.value, v.psi2.value);
    const double gap = std::abs(v.psi_and.value + v.psi_or.value - v.psi1.value - v.psi2.value);
    worst = std::max(worst, gap);
    const std::string tag = "case " + std::to_string(i);
    r.check(v.psi_sim.value <= lo + tol, tag + ": psi_sim > min");
    r.check(hi <= v.psi_or.value + tol, tag + ": max > psi_or");
    r.check(gap <= tol, tag + ": psi_and + psi_or != psi1 + psi2");
  }
  r.note("50 random cases (" + std::to_string(crossings) + " with crossing), max sum gap " + num(worst, 2));
  return r.outcome();
}

std::string capture(const std::string& command) {
  std::string out;
  FILE* pipe = popen(command.c_str(), "r");
  if (!pipe) return "<popen failed>";
  std::array<char, 4096> buf{};
  std::size_t n;
  while ((n = std::fread(buf.data(), 1, buf.size(), pipe)) > 0) out.append(buf.data(), n);
  const int status = pclose(pipe);
  if (status != 0) out += "<exit " + std::to_string(status) + ">";
  return out;
}

Outcome ac11() {
  Report r;
  const std::string bin = LBD_CLI_BINARY;
  const std::vector<std::string> jobs = {"--preset ac11-determinism", "--preset ac10-ruin-sweep --output csv",
                                         "--preset plot-u-sweep"};
  for (const auto& job : jobs) {
    const auto a = capture(bin + " " + job + " 2>&1");
    const auto b = capture(bin + " " + job + " 2>&1");
    const auto c = capture("LEVY_BREAKDRIFT_THREADS=1 " + bin + " " + job + " 2>&1");
    r.check(a.find("<exit") == std::string::npos && !a.empty(), job + " did not succeed");
    r.check(a == b, job + ": reruns differ");
    r.check(a == c, job + ": single-thread run differs");
  }
  r.note(std::to_string(jobs.size()) + " jobs, each run three times (one single-threaded)");
  return r.outcome();
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"Brownian unbroken baseline", ac1},
      {"integral identity suite", ac2},
      {"broken-drift reduction", ac3},
      {"generic formula vs closed forms", ac4},
      {"positive vs negative formula on Brownian inputs", ac5},
      {"gamma Monte Carlo concordance", ac6},
      {"stable Monte Carlo concordance", ac7},
      {"density normalisation", ac8},
      {"Laplace transform suite", ac9},
      {"two-company ruin layer", ac10},
      {"CLI determinism", ac11},
  };
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));

  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!selected.empty() && !selected.count(id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failed;
    std::cout << "AC" << id << (id < 10 ? "  " : " ") << (o.pass ? "PASS" : "FAIL") << "  " << criteria[i].first
              << " (" << num(seconds_since(t0), 3) << " s): " << o.detail << std::endl;
  }
  std::cout << (failed ? std::to_string(failed) + " criteria failed" : std::string("all criteria passed"))
            << std::endl;
  return failed ? 1 : 0;
}
