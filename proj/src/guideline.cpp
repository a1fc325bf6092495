#include "crnd/guideline.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <numbers>

#include "crnd/bitmodel.hpp"
#include "crnd/errors.hpp"
#include "crnd/rng.hpp"

namespace crnd {

namespace {

Probability wilson_upper(std::size_t hits, std::size_t trials) {
  const double z = 1.959963984540054;
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(hits) / n;
  const double denom = 1.0 + z * z / n;
  const double centre = p + z * z / (2.0 * n);
  const double spread = z * std::sqrt(p * (1.0 - p) / n + z * z / (4.0 * n * n));
  return Probability::clamped((centre + spread) / denom);
}

bool better(const CellEvaluation& a, const CellEvaluation& b) {
  if (a.efficiency != b.efficiency) return a.efficiency > b.efficiency;
  if (a.alpha != b.alpha) return a.alpha < b.alpha;
  return a.r > b.r;
}

bool less_violating(const CellEvaluation& a, const CellEvaluation& b) {
  if (a.log2_violation != b.log2_violation) return a.log2_violation < b.log2_violation;
  if (a.alpha != b.alpha) return a.alpha < b.alpha;
  return a.r > b.r;
}

}  // namespace

std::vector<double> Grid::values() const {
  if (!(step > 0.0)) throw DomainError("grid step must be positive");
  if (!(hi >= lo)) throw DomainError("grid upper bound below lower bound");
  std::vector<double> out;
  const double tol = 1e-9 * step;
  for (std::size_t k = 0;; ++k) {
    const double v = lo + static_cast<double>(k) * step;
    if (v > hi + tol) break;
    out.push_back(std::round(v * 1e12) / 1e12);
  }
  return out;
}

void GuidelineProblem::validate() const {
  if (sequence_length == 0) throw DomainError("sequence_length must be positive");
  if (!(rho > -1.0 && rho < 1.0)) throw DomainError("rho must lie in (-1, 1)");
  if (adversary_searches < 2) throw DomainError("insufficient budget: N must be >= 2");
  const auto a = alpha_grid.values();
  const auto r = r_grid.values();
  if (a.empty() || r.empty()) throw DomainError("empty grid");
  if (a.front() <= 0.0 || a.back() >= 1.0) throw DomainError("alpha grid must lie in (0, 1)");
  if (r.front() <= 0.0 || r.back() > 1.0 + 1e-12) throw DomainError("r grid must lie in (0, 1]");
  if (accept_source == AcceptSource::monte_carlo && mc_trials == 0) {
    throw DomainError("mc_trials must be positive");
  }
}

double efficiency(Probability p_accept, double r) {
  if (!(r > 0.0 && r <= 1.0)) throw DomainError("efficiency: r must lie in (0, 1]");
  return p_accept.value() * r;
}

GuidelineEvaluator::GuidelineEvaluator(const GuidelineProblem& prob) : prob_(prob) {
  prob_.validate();
  const double rho = std::fabs(prob_.rho);
  mlts_ = mlts_estimate_for_searches(prob_.sequence_length, rho, prob_.adversary_searches);
  if (prob_.accept_source == AcceptSource::monte_carlo) {
    TestSpec spec = prob_.test;
    spec.alpha = 0.01;
    const MarkovBitModel model(rho);
    mc_pvalues_.reserve(prob_.mc_trials);
    for (std::size_t t = 0; t < prob_.mc_trials; ++t) {
      const auto x = generate(model, prob_.sequence_length, derive_seed(prob_.mc_seed, t));
      mc_pvalues_.push_back(p_value(spec, x).value());
    }
    std::sort(mc_pvalues_.begin(), mc_pvalues_.end());
  }
}

GuidelineEvaluator::AcceptPair GuidelineEvaluator::accept(double alpha) const {
  if (prob_.accept_source == AcceptSource::analytic) {
    TestSpec spec = prob_.test;
    spec.alpha = alpha;
    const auto p = accept_probability(spec, std::fabs(prob_.rho), prob_.sequence_length);
    return {p, p};
  }
  const auto above = static_cast<std::size_t>(
      mc_pvalues_.end() - std::upper_bound(mc_pvalues_.begin(), mc_pvalues_.end(), alpha));
  const double n = static_cast<double>(mc_pvalues_.size());
  return {Probability(static_cast<double>(above) / n), wilson_upper(above, mc_pvalues_.size())};
}

CellEvaluation GuidelineEvaluator::evaluate(double alpha, double r) const {
  if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("alpha must lie in (0, 1)");
  if (!(r > 0.0 && r <= 1.0)) throw DomainError("r must lie in (0, 1]");
  CellEvaluation c;
  c.alpha = alpha;
  c.r = r;
  const double L = static_cast<double>(prob_.sequence_length);
  c.key_length = static_cast<unsigned>(std::ceil(r * L - 1e-9));
  c.key_length = std::max(1u, std::min(c.key_length, prob_.sequence_length));
  const auto acc = accept(alpha);
  c.p_accept = acc.point;
  c.p_accept_bound = acc.bound;
  c.i_mlts = mlts_.value;
  c.p_rg = rg_success_prob(prob_.adversary_searches, c.key_length);
  c.slack = c.p_rg.value() - c.i_mlts.value() * c.p_accept_bound.value();

  const double log2_eve = std::min(mlts_.log_raw / std::numbers::ln2, 0.0) +
                          std::log2(c.p_accept_bound.value());
  const double log2_rg = log2_rg_success_prob(prob_.adversary_searches, c.key_length);
  c.log2_violation = log2_eve - log2_rg;
  c.feasible = c.log2_violation <= 0.0 && c.slack >= 0.0;
  c.efficiency = efficiency(c.p_accept, r);
  return c;
}

CellEvaluation feasible(double alpha, double r, const GuidelineProblem& prob) {
  GuidelineProblem single = prob;
  return GuidelineEvaluator(single).evaluate(alpha, r);
}

GuidelineSolution optimize(const GuidelineProblem& prob, unsigned jobs) {
  const GuidelineEvaluator eval(prob);
  const auto alphas = prob.alpha_grid.values();
  const auto rs = prob.r_grid.values();

  std::vector<std::vector<CellEvaluation>> rows(alphas.size());
  auto fill = [&](std::size_t begin, std::size_t stride) {
    for (std::size_t i = begin; i < alphas.size(); i += stride) {
      rows[i].reserve(rs.size());
      for (double r : rs) rows[i].push_back(eval.evaluate(alphas[i], r));
    }
  };
  jobs = std::max(1u, jobs);
  if (jobs == 1) {
    fill(0, 1);
  } else {
    std::vector<std::future<void>> tasks;
    for (unsigned j = 0; j < jobs; ++j) tasks.push_back(std::async(std::launch::async, fill, j, jobs));
    for (auto& t : tasks) t.get();
  }

  GuidelineSolution sol;
  const CellEvaluation* best = nullptr;
  const CellEvaluation* least = nullptr;
  for (const auto& row : rows) {
    for (const auto& c : row) {
      ++sol.cells;
      if (c.feasible) {
        ++sol.feasible_cells;
        if (!best || better(c, *best)) best = &c;
      }
      if (!least || less_violating(c, *least)) least = &c;
    }
  }

  for (std::size_t j = 0; j < rs.size(); ++j) {
    bool seen = false;
    for (std::size_t i = 0; i < alphas.size(); ++i) {
      if (rows[i][j].feasible) seen = true;
      else if (seen) sol.frontier_monotone = false;
    }
  }
  double ceiling = -1.0;
  for (const auto& row : rows) {
    double top = -1.0;
    for (const auto& c : row) {
      if (c.feasible) top = std::max(top, c.r);
    }
    if (top < ceiling) sol.r_ceiling_nondecreasing = false;
    ceiling = std::max(ceiling, top);
  }

  const CellEvaluation& pick = best ? *best : *least;
  sol.alpha_star = pick.alpha;
  sol.r_star = pick.r;
  sol.key_length = pick.key_length;
  sol.efficiency = pick.efficiency;
  sol.p_accept = pick.p_accept;
  sol.i_mlts = pick.i_mlts;
  sol.constraint_slack = pick.slack;
  sol.feasible = best != nullptr;
  return sol;
}

}  // namespace crnd
