#pragma once

// Nine NIST SP 800-22 tests (statistic, P-value, verdict) and analytic
// accept probabilities for sequences drawn from the Markov bit model.

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "crnd/bitseq.hpp"
#include "crnd/specfun.hpp"

namespace crnd {

enum class TestKind {
  frequency,
  block_frequency,
  runs,
  longest_run,
  dft,
  non_overlapping_template,
  approximate_entropy,
  serial1,
  serial2,
};

inline constexpr TestKind kAllTestKinds[] = {
    TestKind::frequency,         TestKind::block_frequency,
    TestKind::runs,              TestKind::longest_run,
    TestKind::dft,               TestKind::non_overlapping_template,
    TestKind::approximate_entropy, TestKind::serial1,
    TestKind::serial2,
};

std::string_view to_string(TestKind kind);
TestKind parse_test_kind(std::string_view name);

/// P-value is Gaussian (erfc) for frequency, runs and DFT; chi-square otherwise.
bool is_chi_square_family(TestKind kind);

struct TestSpec {
  TestKind kind = TestKind::frequency;
  double alpha = 0.01;
  std::size_t block_size = 128;       ///< BlockFrequency block length M
  BitSequence templ;                  ///< NonOverlapping template
  std::size_t template_blocks = 8;    ///< NonOverlapping block count N
  int pattern_order = 0;              ///< ApEn / Serial m; 0 selects the default
  bool enforce_min_length = true;

  /// NIST defaults for `kind`: block 128, template 000000001, ApEn m=2, Serial m=3.
  static TestSpec defaults(TestKind kind, double alpha = 0.01);

  int order() const;
  void validate() const;
};

/// Minimum sequence length accepted by run_test for this spec.
std::size_t minimum_length(const TestSpec& spec);

enum class Verdict { accept_h0, accept_h1 };
std::string_view to_string(Verdict v);

struct TestOutcome {
  TestSpec spec;
  double statistic = 0.0;
  Probability p_value;
  Verdict verdict = Verdict::accept_h1;
  /// Set when a degenerate input forced P-value 0 (e.g. the runs pre-test).
  bool degenerate = false;
  std::string note;
};

TestOutcome run_test(const TestSpec& spec, const BitSequence& x);

/// P-value only; shares the statistic code with run_test.
Probability p_value(const TestSpec& spec, const BitSequence& x);

/// NIST longest-run-of-ones parameters for a sequence of length n.
struct LongestRunTable {
  std::size_t block = 8;     ///< M
  int classes = 3;           ///< K; there are K + 1 bins
  int min_run = 1;           ///< runs <= min_run fall in bin 0
  std::vector<double> pi;    ///< NIST bin probabilities
};
LongestRunTable longest_run_table(std::size_t n);

/// Aperiodic templates of length m in lexicographic order.
std::vector<BitSequence> aperiodic_templates(int m);
std::vector<BitSequence> load_templates(const std::string& path);
std::string default_template_file();

// ---------------------------------------------------------------------------
// Analytic accept probabilities.

/// Moment model of a chi-square statistic under correlation: the statistic
/// is approximated by `scale` times a noncentral chi-square with `dof`
/// degrees of freedom and noncentrality `noncentrality / scale`.
struct ChiSquareModel {
  double dof = 1.0;
  double scale = 1.0;
  double noncentrality = 0.0;
  double iid_mean = 1.0;     ///< E[statistic] for independent bits ("obs")
  double markov_mean = 1.0;  ///< E[statistic] under the Markov model ("newobs")
};

enum class AcceptMethod {
  gaussian,            ///< normal approximation of the Gaussian-family statistic
  chi_square_moments,  ///< scaled noncentral chi-square moment match
  exact_counts         ///< exact law of the statistic from per-block count distributions
};
std::string_view to_string(AcceptMethod method);

struct AcceptAnalysis {
  Probability value;
  AcceptMethod method = AcceptMethod::gaussian;
  std::optional<ChiSquareModel> chi_square;
  /// Closed form with the published argument layout, for comparison only.
  std::optional<double> literal;
};

/// P(test accepts H0) for a length-`length` Markov sequence with lag-1 correlation rho.
Probability accept_probability(const TestSpec& spec, double rho, std::size_t length);
AcceptAnalysis accept_analysis(const TestSpec& spec, double rho, std::size_t length);

ChiSquareModel chi_square_model(const TestSpec& spec, double rho, std::size_t length);

/// Initial vector [1/2, 1/2, 0, ...] of the run-length chain with cap r.
Eigen::VectorXd longest_run_initial_vector(int run_cap);

/// Distribution of the longest run of ones in a block of `block_len` bits:
/// entries j = 0..run_cap-1 hold P(longest = j), the last holds P(longest >= run_cap).
Eigen::VectorXd longest_run_state_dist(double rho, int run_cap, std::size_t block_len);

struct TemplateMoments {
  double mean = 0.0;
  double variance = 0.0;
  double eta = 0.0;      ///< probability of an occurrence at a fixed position
  double overlap = 1.0;  ///< clumping factor e = 1 + sum eps(t) C(t)
};

/// Self-overlap indicator eps(t) for t = 1..m-1 (index 0 unused).
std::vector<int> template_overlaps(const BitSequence& templ);

/// Markov-adjusted mean and variance of the non-overlapping hit count W in a
/// window of `window` bits.
TemplateMoments template_hit_moments(const BitSequence& templ, double rho, std::size_t window);

/// Law of the NIST non-overlapping hit count in one window under the Markov
/// chain started from the uniform law; entry c is P(W = c).
std::vector<double> template_count_distribution(const BitSequence& templ, double rho,
                                                std::size_t window);

/// Probability of each m-bit pattern (index = pattern value, MSB first)
/// under the stationary Markov chain.
std::vector<double> markov_pattern_probs(int m, double rho);

}  // namespace crnd
