// Accept probabilities of the nine tests under the binary Markov model.
//
// Gaussian family: the statistic is approximately normal with Markov-CLT
// moments; Runs is summed exactly over (ones, runs) up to 16384 bits. Chi-square family: the statistic computed with IID cell
// probabilities is matched to scale * noncentral-chi-square(dof, lambda/scale),
// where lambda is the statistic evaluated at the Markov-exact cell
// probabilities and scale is the variance inflation of the cell counts.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>

#include "crnd/errors.hpp"
#include "crnd/randtests.hpp"

namespace crnd {

namespace {

double igam(double a, double x) {
  if (!(x > 0.0)) return 0.0;
  return reg_inc_gamma(a, x, Tail::lower).value();
}

void check_rho(double rho) {
  if (!(rho > -1.0 && rho < 1.0)) throw DomainError("accept_probability: rho must lie in (-1, 1)");
}

double frequency_accept(double alpha, double rho) {
  return std::erf(erfc_inv(alpha) * std::sqrt((1.0 - rho) / (1.0 + rho)));
}

// Two-sided normal window: P(|N(mu, sigma^2)| < half_width), written as the
// sum of two half-erf terms.
double window_accept(double half_width, double mu, double sigma) {
  if (sigma <= 0.0) return std::fabs(mu) < half_width ? 1.0 : 0.0;
  const double s = sigma * std::numbers::sqrt2;
  return 0.5 * std::erf((half_width + mu) / s) + 0.5 * std::erf((half_width - mu) / s);
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

double log_choose(double n, double k) {
  if (k < 0.0 || k > n) return -std::numeric_limits<double>::infinity();
  return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

// Sequences with k ones and r runs, weighted by theta^(r-1) (1-theta)^(n-r) / 2.
double runs_accept_exact(double alpha, double rho, std::size_t length) {
  const double n = static_cast<double>(length);
  const double lt = std::log((1.0 - rho) / 2.0);
  const double ls = std::log((1.0 + rho) / 2.0);
  const double ci = erfc_inv(alpha);
  const double tau = 2.0 / std::sqrt(n);
  double total = 0.0;
  for (std::size_t k = 1; k < length; ++k) {
    const double pi = static_cast<double>(k) / n;
    if (std::fabs(pi - 0.5) >= tau) continue;
    const double kk = static_cast<double>(k);
    const double mm = n - kk;
    const double pq = pi * (1.0 - pi);
    const double centre = 2.0 * n * pq;
    const double half = 2.0 * std::sqrt(2.0 * n) * pq * ci;
    const double lo = std::max(2.0, std::floor(centre - half) + 1.0);
    const double hi = std::min(2.0 * std::min(kk, mm) + 1.0, std::ceil(centre + half) - 1.0);
    for (double r = lo; r <= hi; r += 1.0) {
      const double s = std::floor(r / 2.0);
      double lc;
      if (std::fmod(r, 2.0) == 0.0) {
        lc = std::log(2.0) + log_choose(kk - 1, s - 1) + log_choose(mm - 1, s - 1);
      } else {
        lc = log_add(log_choose(kk - 1, s) + log_choose(mm - 1, s - 1),
                     log_choose(kk - 1, s - 1) + log_choose(mm - 1, s));
      }
      total += std::exp(lc + std::log(0.5) + (r - 1.0) * lt + (n - r) * ls);
    }
  }
  return total;
}

// V = 1 + Bin(L-1, theta) on its integer lattice; the plug-in pi-hat is
// integrated out as N(1/2, (1+rho)/(4L(1-rho))) and the pre-test applied.
double runs_accept(double alpha, double rho, std::size_t length) {
  if (length <= 16384) return runs_accept_exact(alpha, rho, length);
  const double n = static_cast<double>(length);
  const double theta = (1.0 - rho) / 2.0;
  const double mean_v = 1.0 + (n - 1.0) * theta;
  const double sd_v = std::sqrt((n - 1.0) * theta * (1.0 - theta));
  const double sd_d = std::sqrt((1.0 + rho) / (1.0 - rho) / (4.0 * n));
  const double tau = 2.0 / std::sqrt(n);
  const double ci = erfc_inv(alpha);
  auto given = [&](double d) {
    const double pq = 0.25 - d * d;
    const double centre = 2.0 * n * pq;
    const double half = 2.0 * std::sqrt(2.0 * n) * pq * ci;
    const double lo = std::floor(centre - half) + 1.0;
    const double hi = std::ceil(centre + half) - 1.0;
    if (hi < lo) return 0.0;
    if (sd_v <= 0.0) return mean_v >= lo && mean_v <= hi ? 1.0 : 0.0;
    return normal_cdf((hi + 0.5 - mean_v) / sd_v) - normal_cdf((lo - 0.5 - mean_v) / sd_v);
  };
  const double zmax = std::min(tau / sd_d, 9.0);
  const int steps = 128;
  const double h = zmax / steps;
  double sum = 0.0;
  for (int i = 0; i <= steps; ++i) {
    const double z = i * h;
    const double w = (i == 0 || i == steps) ? 1.0 : (i % 2 ? 4.0 : 2.0);
    sum += w * std::exp(-0.5 * z * z) * given(z * sd_d);
  }
  return 2.0 * sum * h / 3.0 / std::sqrt(2.0 * std::numbers::pi);
}

// Spectral density of the +-1 Markov chain (autocorrelation rho^k).
double markov_spectrum(double rho, double omega) {
  return (1.0 - rho * rho) / (1.0 - 2.0 * rho * std::cos(omega) + rho * rho);
}

double dft_peak_probability(double rho, std::size_t length) {
  const std::size_t half = length / 2;
  double sum = 0.0;
  for (std::size_t j = 0; j < half; ++j) {
    const double omega = 2.0 * std::numbers::pi * static_cast<double>(j) / static_cast<double>(length);
    sum += 1.0 - std::pow(0.05, 1.0 / markov_spectrum(rho, omega));
  }
  return sum / static_cast<double>(half);
}

double dft_accept(double alpha, double rho, std::size_t length) {
  const double n = static_cast<double>(length);
  const double p = dft_peak_probability(rho, length);
  const double sigma0 = std::sqrt(n * 0.95 * 0.05 / 4.0);
  const double half_width = std::numbers::sqrt2 * erfc_inv(alpha) * sigma0;
  const double mu = (p - 0.95) * n / 2.0;
  const double sigma = std::sqrt(p * (1.0 - p) * n / 4.0);
  return window_accept(half_width, mu, sigma);
}

Eigen::VectorXd longest_run_bins(double rho, const LongestRunTable& table) {
  const int cap = table.min_run + table.classes;
  const Eigen::VectorXd dist = longest_run_state_dist(rho, cap, table.block);
  Eigen::VectorXd bins = Eigen::VectorXd::Zero(table.classes + 1);
  bins(0) = dist.head(table.min_run + 1).sum();
  for (int i = 1; i < table.classes; ++i) bins(i) = dist(table.min_run + i);
  bins(table.classes) = dist(cap);
  return bins;
}

// sum_k eta_k log eta_k over m-bit patterns.
double plug_in_phi(int m, double rho) {
  if (m == 0) return 0.0;
  double phi = 0.0;
  for (double p : markov_pattern_probs(m, rho)) {
    if (p > 0) phi += p * std::log(p);
  }
  return phi;
}

// Expected psi^2_m with every pattern count at its Markov expectation.
double plug_in_psi2(int m, double rho, double n) {
  if (m <= 0) return 0.0;
  double sum = 0.0;
  for (double p : markov_pattern_probs(m, rho)) sum += p * p;
  return n * (std::ldexp(1.0, m) * sum - 1.0);
}

double chi_square_threshold(double alpha, const ChiSquareModel& model) {
  return inv_reg_inc_gamma_upper(model.dof / 2.0, alpha);
}

double literal_form(const TestSpec& spec, const ChiSquareModel& model) {
  const double k = model.dof / 2.0;
  const double c = chi_square_threshold(spec.alpha, model);
  const double ratio = model.markov_mean / model.iid_mean;
  double value;
  if (spec.kind == TestKind::approximate_entropy) {
    value = igam(k, c * ratio) - igam(k, model.markov_mean / 2.0);
  } else {
    value = igam(k, 2.0 * c * ratio) - igam(k, model.markov_mean);
  }
  return std::clamp(value, 0.0, 1.0);
}

constexpr std::size_t kExactTemplateWindow = 4096;
constexpr double kExactTemplateCells = 4e6;

// P(sum_j (W_j - mu)^2 < bound) for `blocks` independent counts with law q,
// tracking (sum W, sum W^2) exactly.
std::optional<double> template_exact_accept(const std::vector<double>& q, std::size_t blocks,
                                            double mu, double bound) {
  const std::size_t cmax = q.size() - 1;
  const std::size_t s1 = blocks * cmax + 1;
  const std::size_t s2 = blocks * cmax * cmax + 1;
  if (static_cast<double>(s1) * static_cast<double>(s2) > kExactTemplateCells) return std::nullopt;
  std::vector<double> dist(s1 * s2, 0.0);
  dist[0] = 1.0;
  std::size_t top1 = 0;
  std::size_t top2 = 0;
  for (std::size_t b = 0; b < blocks; ++b) {
    std::vector<double> next(s1 * s2, 0.0);
    for (std::size_t a1 = 0; a1 <= top1; ++a1) {
      for (std::size_t a2 = 0; a2 <= top2; ++a2) {
        const double w = dist[a1 * s2 + a2];
        if (w == 0.0) continue;
        for (std::size_t c = 0; c <= cmax; ++c) {
          if (q[c] == 0.0) continue;
          next[(a1 + c) * s2 + a2 + c * c] += w * q[c];
        }
      }
    }
    dist.swap(next);
    top1 += cmax;
    top2 += cmax * cmax;
  }
  const double nb = static_cast<double>(blocks);
  double accept = 0.0;
  for (std::size_t a1 = 0; a1 < s1; ++a1) {
    for (std::size_t a2 = 0; a2 < s2; ++a2) {
      const double w = dist[a1 * s2 + a2];
      if (w == 0.0) continue;
      const double stat = static_cast<double>(a2) - 2.0 * mu * static_cast<double>(a1) + nb * mu * mu;
      if (stat < bound) accept += w;
    }
  }
  return accept;
}

}  // namespace

std::vector<double> template_count_distribution(const BitSequence& templ, double rho,
                                                std::size_t window) {
  const std::size_t m = templ.size();
  if (m < 1) throw DomainError("template_count_distribution: empty template");
  if (!(rho > -1.0 && rho < 1.0)) throw DomainError("template_count_distribution: rho must lie in (-1, 1)");
  // KMP automaton; reaching state m counts a hit and restarts the scan.
  std::vector<std::size_t> fail(m + 1, 0);
  for (std::size_t i = 1, k = 0; i < m; ++i) {
    while (k > 0 && templ[i] != templ[k]) k = fail[k];
    if (templ[i] == templ[k]) ++k;
    fail[i + 1] = k;
  }
  auto step = [&](std::size_t state, std::uint8_t bit) {
    while (state > 0 && templ[state] != bit) state = fail[state];
    return templ[state] == bit ? state + 1 : std::size_t{0};
  };
  const std::size_t cmax = window / m;
  const std::size_t width = cmax + 1;
  const double theta = (1.0 - rho) / 2.0;
  // dp[(state * 2 + last_bit) * width + count]
  std::vector<double> dp(m * 2 * width, 0.0);
  auto idx = [&](std::size_t st, std::size_t b, std::size_t c) { return (st * 2 + b) * width + c; };
  for (std::uint8_t b = 0; b < 2; ++b) {
    std::size_t st = step(0, b);
    std::size_t c = 0;
    if (st == m) {
      st = 0;
      c = 1;
    }
    dp[idx(st, b, c)] += 0.5;
  }
  for (std::size_t pos = 1; pos < window; ++pos) {
    std::vector<double> next(dp.size(), 0.0);
    const std::size_t reach = std::min(cmax, pos / m + 1);
    for (std::size_t st = 0; st < m; ++st) {
      for (std::size_t b = 0; b < 2; ++b) {
        for (std::size_t c = 0; c <= reach; ++c) {
          const double w = dp[idx(st, b, c)];
          if (w == 0.0) continue;
          for (std::uint8_t nb = 0; nb < 2; ++nb) {
            const double pr = nb == b ? 1.0 - theta : theta;
            if (pr == 0.0) continue;
            std::size_t ns = step(st, nb);
            std::size_t nc = c;
            if (ns == m) {
              ns = 0;
              ++nc;
            }
            next[idx(ns, nb, nc)] += w * pr;
          }
        }
      }
    }
    dp.swap(next);
  }
  std::vector<double> out(width, 0.0);
  for (std::size_t st = 0; st < m; ++st) {
    for (std::size_t b = 0; b < 2; ++b) {
      for (std::size_t c = 0; c < width; ++c) out[c] += dp[idx(st, b, c)];
    }
  }
  return out;
}

std::vector<double> markov_pattern_probs(int m, double rho) {
  if (m < 1 || m > 24) throw DomainError("markov_pattern_probs: m in [1, 24]");
  const double same = (1.0 + rho) / 2.0;
  const double diff = (1.0 - rho) / 2.0;
  const std::size_t count = std::size_t{1} << m;
  std::vector<double> probs(count);
  for (std::size_t v = 0; v < count; ++v) {
    double p = 0.5;
    for (int t = 0; t + 1 < m; ++t) {
      const auto a = (v >> (m - 1 - t)) & 1u;
      const auto b = (v >> (m - 2 - t)) & 1u;
      p *= a == b ? same : diff;
    }
    probs[v] = p;
  }
  return probs;
}

Eigen::VectorXd longest_run_initial_vector(int run_cap) {
  Eigen::VectorXd xi = Eigen::VectorXd::Zero(run_cap + 1);
  xi(0) = 0.5;
  if (run_cap >= 1) xi(1) = 0.5;
  return xi;
}

Eigen::VectorXd longest_run_state_dist(double rho, int run_cap, std::size_t block_len) {
  if (std::fabs(rho) >= 1.0) throw DomainError("longest_run_state_dist: degenerate chain |rho| = 1");
  if (run_cap < 1) throw DomainError("longest_run_state_dist: run cap must be >= 1");
  if (block_len < static_cast<std::size_t>(run_cap)) {
    throw DomainError("longest_run_state_dist: block shorter than run cap");
  }
  const double p_same = 0.5 + rho / 2.0;
  const double p_diff = 0.5 - rho / 2.0;

  // cdf(r) = P(longest run of ones <= r), from the chain on the current run
  // length 0..r (state 0 means the last bit was a zero).
  Eigen::VectorXd cdf(run_cap);
  for (int r = 0; r < run_cap; ++r) {
    Eigen::MatrixXd step = Eigen::MatrixXd::Zero(r + 1, r + 1);
    step(0, 0) = p_same;
    if (r >= 1) step(0, 1) = p_diff;
    for (int j = 1; j <= r; ++j) {
      step(j, 0) = p_diff;
      if (j + 1 <= r) step(j, j + 1) = p_same;
    }
    Eigen::RowVectorXd state = longest_run_initial_vector(r).head(r + 1).transpose();
    for (std::size_t i = 1; i < block_len; ++i) state = state * step;
    cdf(r) = state.sum();
  }
  Eigen::VectorXd dist(run_cap + 1);
  dist(0) = cdf(0);
  for (int j = 1; j < run_cap; ++j) dist(j) = cdf(j) - cdf(j - 1);
  dist(run_cap) = 1.0 - cdf(run_cap - 1);
  return dist;
}

TemplateMoments template_hit_moments(const BitSequence& templ, double rho, std::size_t window) {
  const std::size_t m = templ.size();
  if (m < 2) throw DomainError("template_hit_moments: template length must be >= 2");
  if (window < m) throw DomainError("template_hit_moments: window shorter than template");
  const double same = (1.0 + rho) / 2.0;
  const double diff = (1.0 - rho) / 2.0;
  auto trans = [&](std::uint8_t a, std::uint8_t b) { return a == b ? same : diff; };

  TemplateMoments out;
  out.eta = 0.5;
  for (std::size_t t = 0; t + 1 < m; ++t) out.eta *= trans(templ[t], templ[t + 1]);

  // C(t): probability that, right after an occurrence, the last m - t
  // letters follow again (an overlapping restart).
  const auto eps = template_overlaps(templ);
  out.overlap = 1.0;
  for (std::size_t t = 1; t < m; ++t) {
    if (!eps[t]) continue;
    double c = trans(templ[m - 1], templ[t]);
    for (std::size_t l = t; l + 1 < m; ++l) c *= trans(templ[l], templ[l + 1]);
    out.overlap += c;
  }
  const double positions = static_cast<double>(window - m + 1);
  out.mean = positions * out.eta / out.overlap;

  // Dispersion of the IID count (its variance / mean ratio) carried over to
  // the Markov mean.
  const double md = static_cast<double>(m);
  const double iid_mean = positions / std::ldexp(1.0, static_cast<int>(m));
  const double iid_var = static_cast<double>(window) *
                         (1.0 / std::ldexp(1.0, static_cast<int>(m)) -
                          (2.0 * md - 1.0) / std::ldexp(1.0, 2 * static_cast<int>(m)));
  out.variance = out.mean * iid_var / iid_mean;
  return out;
}

ChiSquareModel chi_square_model(const TestSpec& spec, double rho, std::size_t length) {
  spec.validate();
  check_rho(rho);
  const double n = static_cast<double>(length);
  ChiSquareModel model;
  switch (spec.kind) {
    case TestKind::block_frequency: {
      const std::size_t m = spec.block_size;
      const double blocks = std::floor(n / static_cast<double>(m));
      if (blocks < 1) throw InsufficientData("block_frequency: no complete block");
      // Var(sum of M bits) relative to the IID value M/4.
      double inflation = 1.0;
      double power = 1.0;
      for (std::size_t k = 1; k < m; ++k) {
        power *= rho;
        inflation += 2.0 * static_cast<double>(m - k) * power / static_cast<double>(m);
      }
      model.dof = blocks;
      model.scale = inflation;
      model.noncentrality = 0.0;
      break;
    }
    case TestKind::longest_run: {
      const auto table = longest_run_table(length);
      const double blocks = std::floor(n / static_cast<double>(table.block));
      const Eigen::VectorXd p = longest_run_bins(rho, table);
      const Eigen::VectorXd ref = longest_run_bins(0.0, table);
      double trace = 0.0;
      double lambda = 0.0;
      for (int i = 0; i <= table.classes; ++i) {
        trace += p(i) * (1.0 - p(i)) / ref(i);
        lambda += blocks * (p(i) - ref(i)) * (p(i) - ref(i)) / ref(i);
      }
      model.dof = table.classes;
      model.scale = trace / table.classes;
      model.noncentrality = lambda;
      break;
    }
    case TestKind::non_overlapping_template: {
      const std::size_t blocks = spec.template_blocks;
      const std::size_t window = length / blocks;
      const std::size_t m = spec.templ.size();
      if (window < m) throw InsufficientData("non_overlapping_template: block shorter than template");
      const auto moments = template_hit_moments(spec.templ, rho, window);
      const double mu = static_cast<double>(window - m + 1) / std::ldexp(1.0, static_cast<int>(m));
      const double var = static_cast<double>(window) *
                         (1.0 / std::ldexp(1.0, static_cast<int>(m)) -
                          (2.0 * static_cast<double>(m) - 1.0) /
                              std::ldexp(1.0, 2 * static_cast<int>(m)));
      model.dof = static_cast<double>(blocks);
      model.scale = moments.variance / var;
      model.noncentrality = static_cast<double>(blocks) * (moments.mean - mu) * (moments.mean - mu) / var;
      break;
    }
    case TestKind::approximate_entropy: {
      const int m = spec.order();
      const double apen = plug_in_phi(m, rho) - plug_in_phi(m + 1, rho);
      model.dof = std::ldexp(1.0, m);
      model.scale = 1.0;
      model.noncentrality = std::max(0.0, 2.0 * n * (std::numbers::ln2 - apen));
      break;
    }
    case TestKind::serial1: {
      const int m = spec.order();
      model.dof = std::ldexp(1.0, m - 1);
      model.scale = 1.0;
      model.noncentrality = std::max(0.0, plug_in_psi2(m, rho, n) - plug_in_psi2(m - 1, rho, n));
      break;
    }
    case TestKind::serial2: {
      const int m = spec.order();
      model.dof = std::ldexp(1.0, m - 2);
      model.scale = 1.0;
      model.noncentrality =
          std::max(0.0, plug_in_psi2(m, rho, n) - 2.0 * plug_in_psi2(m - 1, rho, n) +
                            plug_in_psi2(m - 2, rho, n));
      break;
    }
    default:
      throw DomainError("chi_square_model: not a chi-square family test");
  }
  model.iid_mean = model.dof;
  model.markov_mean = model.scale * model.dof + model.noncentrality;
  return model;
}

AcceptAnalysis accept_analysis(const TestSpec& spec, double rho, std::size_t length) {
  spec.validate();
  check_rho(rho);
  if (length == 0) throw InsufficientData("accept_probability: empty sequence");
  AcceptAnalysis out;
  switch (spec.kind) {
    case TestKind::frequency:
      out.value = Probability::clamped(frequency_accept(spec.alpha, rho));
      return out;
    case TestKind::runs:
      out.value = Probability::clamped(runs_accept(spec.alpha, rho, length));
      return out;
    case TestKind::dft:
      if (length < 2) throw InsufficientData("dft: need at least 2 bits");
      out.value = Probability::clamped(dft_accept(spec.alpha, rho, length));
      return out;
    default:
      break;
  }
  const auto model = chi_square_model(spec, rho, length);
  out.chi_square = model;
  out.literal = literal_form(spec, model);
  if (spec.kind == TestKind::non_overlapping_template) {
    const std::size_t blocks = spec.template_blocks;
    const std::size_t window = length / blocks;
    const std::size_t m = spec.templ.size();
    if (window <= kExactTemplateWindow) {
      auto q = template_count_distribution(spec.templ, rho, window);
      while (q.size() > 1 && q.back() < 1e-18) q.pop_back();
      const double mu = static_cast<double>(window - m + 1) / std::ldexp(1.0, static_cast<int>(m));
      const double var = static_cast<double>(window) *
                         (1.0 / std::ldexp(1.0, static_cast<int>(m)) -
                          (2.0 * static_cast<double>(m) - 1.0) /
                              std::ldexp(1.0, 2 * static_cast<int>(m)));
      const double bound = 2.0 * chi_square_threshold(spec.alpha, model) * var;
      if (const auto exact = template_exact_accept(q, blocks, mu, bound)) {
        out.value = Probability::clamped(*exact);
        out.method = AcceptMethod::exact_counts;
        return out;
      }
    }
  }
  // The test accepts iff statistic / 2 < igamc^{-1}(dof / 2, alpha).
  const double threshold = 2.0 * chi_square_threshold(spec.alpha, model);
  out.value = noncentral_chi2_cdf(threshold / model.scale, model.dof,
                                  model.noncentrality / model.scale);
  out.method = AcceptMethod::chi_square_moments;
  return out;
}

std::string_view to_string(AcceptMethod method) {
  switch (method) {
    case AcceptMethod::gaussian:
      return "gaussian";
    case AcceptMethod::chi_square_moments:
      return "chi_square_moments";
    case AcceptMethod::exact_counts:
      return "exact_counts";
  }
  return "gaussian";
}

Probability accept_probability(const TestSpec& spec, double rho, std::size_t length) {
  return accept_analysis(spec, rho, length).value;
}

}  // namespace crnd
