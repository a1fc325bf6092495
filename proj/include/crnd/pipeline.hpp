#pragma once

// End-to-end synthetic key generation: AR(1) channel, quantization,
// randomness testing, reconciliation and privacy amplification.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "crnd/bitseq.hpp"
#include "crnd/guideline.hpp"
#include "crnd/mlts.hpp"
#include "crnd/randtests.hpp"

namespace crnd {

struct ChannelParams {
  double ar_coefficient = 0.0;
  double noise_sd = 0.0;
  double sample_interval = 1.0;
};

struct ChannelTrace {
  std::vector<double> samples;
  double sample_interval = 1.0;
  double ar_coefficient = 0.0;
  double noise_sd = 0.0;
};

struct ChannelPair {
  ChannelTrace alice;
  ChannelTrace bob;
};

/// Shared unit-variance AR(1) process plus independent N(0, noise_sd^2) noise
/// at each endpoint. A longer duration under the same seed extends the traces.
ChannelPair simulate_channel(const ChannelParams& params, std::size_t duration, std::uint64_t seed);

struct QuantizerConfig {
  double q_plus = 0.0;
  double q_minus = 0.0;
  int levels = 2;
  std::size_t interval = 1;

  void validate() const;
};

/// Bits with the sample index each came from.
struct QuantizedBits {
  BitSequence bits;
  std::vector<std::size_t> positions;
};

QuantizedBits level_crossing_positions(const ChannelTrace& trace, const QuantizerConfig& cfg);
BitSequence level_crossing_quantize(const ChannelTrace& trace, const QuantizerConfig& cfg);

/// Type-7 (linear interpolation) sample quantile.
double quantile(std::vector<double> values, double q);

/// m equiprobable bins by empirical quantiles, Gray-coded, log2(m) bits per sample.
BitSequence mary_quantize(const ChannelTrace& trace, int levels);

struct ReconcileResult {
  BitSequence retained;       ///< Alice's bits from blocks with matching parity
  BitSequence retained_peer;  ///< Bob's bits from the same blocks
  double r_mismatch = 0.0;
  std::size_t discarded = 0;
  double residual_mismatch = 0.0;  ///< mismatch left in the retained bits
};

ReconcileResult reconcile(const BitSequence& a, const BitSequence& b, std::size_t block);

/// Toeplitz hash to M = ceil(r * L) bits; r = 1 returns x unchanged.
BitSequence privacy_amplify(const BitSequence& x, double r, std::uint64_t seed);

enum class TestPosition { wireless = 1, key = 2 };

struct PipelineConfig {
  ChannelParams channel;
  std::size_t duration = 4096;  ///< samples simulated per trial before extending
  QuantizerConfig quantizer;
  std::size_t reconcile_block = 8;
  TestSpec test = TestSpec::defaults(TestKind::frequency);
  TestPosition position = TestPosition::wireless;
  std::size_t sequence_length = 16;  ///< L, wireless bits per trial
  double r = 1.0;
  bool optimize = false;  ///< pick (alpha, r) with the guideline optimizer
  Grid alpha_grid{0.0001, 0.3, 0.001};
  Grid r_grid{0.1, 1.0, 0.01};
  std::size_t pilot_length = 100000;
  BigUnsigned searches = 256;
  std::optional<unsigned> full_scale_length;
  std::optional<BigUnsigned> full_scale_searches;
  std::size_t trials = 1000;

  void validate() const;
};

struct TrialRecord {
  std::size_t trial = 0;
  bool accepted = false;
  double mismatch = 0.0;
  bool eve_hit = false;
  std::size_t key_bits = 0;
  double elapsed = 0.0;  ///< simulated time consumed
};

struct PipelineReport {
  double r_mismatch = 0.0;
  double residual_mismatch = 0.0;
  Probability p_accept_empirical;
  double efficiency = 0.0;
  double l_efficiency = 0.0;
  std::optional<double> l_security;  ///< empty when Eve never hit
  double key_rate = 0.0;

  double alpha = 0.0;
  double r = 1.0;
  unsigned key_length = 0;
  double rho_estimate = 0.0;
  std::optional<GuidelineSolution> guideline;

  std::size_t eve_hits = 0;
  double eve_hit_rate = 0.0;
  double eve_hit_sigma = 0.0;
  Probability p_rg;
  double eve_advantage = 0.0;  ///< eve_hit_rate - p_rg
  bool attack_measured = false;

  std::optional<SecurityReport> full_scale;
  std::optional<double> full_scale_p_accept;

  std::uint64_t seed = 0;
  std::string rng_algorithm;
  PipelineConfig config;
  std::vector<TrialRecord> rows;
};

/// Wireless bits of one trial (Alice, Bob) and the simulated time consumed.
struct TrialBits {
  BitSequence alice;
  BitSequence bob;
  double elapsed = 0.0;
};
TrialBits trial_bits(const PipelineConfig& cfg, std::size_t count, std::uint64_t seed);

PipelineReport run_pipeline(const PipelineConfig& config, std::size_t trials, std::uint64_t seed,
                            unsigned jobs = 1);

}  // namespace crnd
