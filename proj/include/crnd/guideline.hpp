#pragma once

// Design-guideline optimizer: pick the P-value threshold alpha and the
// privacy-amplification rate r that maximize efficiency while the adversary
// does no better than random guessing.

#include <cstdint>
#include <vector>

#include "crnd/mlts.hpp"
#include "crnd/randtests.hpp"

namespace crnd {

struct Grid {
  double lo = 0.0;
  double hi = 0.0;
  double step = 0.0;

  /// lo, lo + step, ... up to hi (inclusive within rounding).
  std::vector<double> values() const;
};

enum class AcceptSource {
  analytic,
  monte_carlo  ///< cached empirical accept rate; the constraint uses its Wilson upper bound
};

struct GuidelineProblem {
  unsigned sequence_length = 128;
  BigUnsigned adversary_searches = 2;
  double rho = 0.0;
  TestSpec test;  ///< alpha is ignored; the optimizer sweeps it
  Grid alpha_grid{0.0001, 0.3, 0.001};
  Grid r_grid{0.1, 1.0, 0.01};
  AcceptSource accept_source = AcceptSource::analytic;
  std::size_t mc_trials = 2000;
  std::uint64_t mc_seed = 1;

  void validate() const;
};

struct GuidelineSolution {
  double alpha_star = 0.0;
  double r_star = 1.0;
  unsigned key_length = 0;
  double efficiency = 0.0;
  Probability p_accept;
  Probability i_mlts;
  double constraint_slack = 0.0;
  bool feasible = false;

  /// Feasibility never lost as alpha grows at fixed r.
  bool frontier_monotone = true;
  /// Largest feasible r never shrinks as alpha grows.
  bool r_ceiling_nondecreasing = true;
  std::size_t cells = 0;
  std::size_t feasible_cells = 0;
};

/// E = p_accept * r.
double efficiency(Probability p_accept, double r);

struct CellEvaluation {
  double alpha = 0.0;
  double r = 1.0;
  unsigned key_length = 0;
  Probability p_accept;
  Probability p_accept_bound;  ///< value entering the constraint
  Probability i_mlts;
  Probability p_rg;
  double slack = 0.0;           ///< P(RG) - I_MLTS * p_accept
  double log2_violation = 0.0;  ///< log2(I_MLTS * p_bound / P(RG)); feasible iff <= 0
  bool feasible = false;
  double efficiency = 0.0;
};

/// Cached per-problem quantities shared by every grid cell.
class GuidelineEvaluator {
public:
  explicit GuidelineEvaluator(const GuidelineProblem& prob);

  CellEvaluation evaluate(double alpha, double r) const;
  const MltsEstimate& mlts() const { return mlts_; }

private:
  struct AcceptPair {
    Probability point;
    Probability bound;
  };
  AcceptPair accept(double alpha) const;

  GuidelineProblem prob_;
  MltsEstimate mlts_;
  std::vector<double> mc_pvalues_;  // sorted
};

CellEvaluation feasible(double alpha, double r, const GuidelineProblem& prob);

/// Exhaustive scan of the (alpha, r) grid. Ties go to smaller alpha, then
/// larger r. `jobs` > 1 evaluates alpha rows concurrently.
GuidelineSolution optimize(const GuidelineProblem& prob, unsigned jobs = 1);

}  // namespace crnd
