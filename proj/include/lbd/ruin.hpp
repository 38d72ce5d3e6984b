#pragma once

#include <optional>

#include "lbd/models.hpp"
#include "lbd/quadrature.hpp"
#include "lbd/supdist.hpp"

namespace lbd {

/// Two companies sharing every claim of X in proportions delta1 : delta2,
/// with capitals x_i and premium rates p_i.
struct TwoCompanyParams {
  double x1 = 1.0;
  double x2 = 1.0;
  double p1 = 1.0;
  double p2 = 1.0;
  double delta1 = 0.5;
  double delta2 = 0.5;
  LevyModel model = LevyModel::brownian();
};

/// Levels u_i = x_i / delta_i and rates c_i = p_i / delta_i of the two
/// ruin lines u_i + c_i t, with their crossing time when it is positive.
struct ReducedParams {
  double u1 = 0.0;
  double u2 = 0.0;
  double c1 = 0.0;
  double c2 = 0.0;
  std::optional<double> crossing;
};

/// All five ruin probabilities of one parameter set.
struct RuinProbabilities {
  Probability psi1;
  Probability psi2;
  Probability psi_or;
  Probability psi_sim;
  Probability psi_and;
};

namespace ruin {

/// Throws DomainError unless all inputs are positive and delta1 + delta2 = 1.
void validate(const TwoCompanyParams& params);

ReducedParams reduce(const TwoCompanyParams& params);

/// P(sup_{t<S} X(t) - ct > u): ruin of one line.
Probability psi_single(const LevyModel& m, double u, double c, const Horizon& horizon,
                       const quad::QuadConfig& cfg = supdist::default_config());

/// Ruin of at least one company before the horizon.
Probability psi_or(const TwoCompanyParams& params, const Horizon& horizon,
                   const quad::QuadConfig& cfg = supdist::default_config());

/// Simultaneous ruin of both companies before the horizon.
Probability psi_sim(const TwoCompanyParams& params, const Horizon& horizon,
                    const quad::QuadConfig& cfg = supdist::default_config());

/// Both companies ruined (not necessarily at the same time): psi1 + psi2 - psi_or.
/// value is clamped to [0, 1]; raw keeps the unclamped sum.
Probability psi_and(const TwoCompanyParams& params, const Horizon& horizon,
                    const quad::QuadConfig& cfg = supdist::default_config());

RuinProbabilities evaluate(const TwoCompanyParams& params, const Horizon& horizon,
                           const quad::QuadConfig& cfg = supdist::default_config());

}  // namespace ruin

}  // namespace lbd
