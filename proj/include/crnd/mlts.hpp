#pragma once

// Maximum-likelihood tree search (MLTS): Eve enumerates candidate wireless
// bit sequences from most to least likely under the Markov bit model.

#include <cstdint>
#include <optional>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "crnd/bitseq.hpp"
#include "crnd/specfun.hpp"

namespace crnd {

using BigUnsigned = boost::multiprecision::cpp_int;

/// Parses a decimal integer or a power "2^k" (also "2**k").
BigUnsigned parse_big(const std::string& text);

/// log2 of a positive big integer, accurate to double precision.
double log2_big(const BigUnsigned& value);

/// Eve's search capability N and the even tree depth n it buys for length L.
struct AdversaryBudget {
  BigUnsigned searches;
  unsigned depth = 0;
  unsigned sequence_length = 0;
};

/// N = 2 * sum_{i=0}^{n/2} C(L, i).
BigUnsigned searches_for_depth(unsigned depth, unsigned length);

/// Budget realized exactly by an even depth n <= L.
AdversaryBudget budget_from_depth(unsigned depth, unsigned length);

/// Largest even n <= L whose search count does not exceed N. The stored
/// `searches` is the raw N as supplied.
AdversaryBudget budget_from_searches(const BigUnsigned& searches, unsigned length);

/// Closed-form MLTS success probability with diagnostics.
struct MltsEstimate {
  Probability value;      ///< clamped to [0, 1]
  double raw = 0.0;       ///< two-branch sum before clamping
  double log_raw = 0.0;   ///< natural log of `raw`; finite where `raw` underflows
  bool clamped = false;   ///< true when the two-branch sum exceeded one
};

MltsEstimate mlts_estimate(unsigned length, double rho, unsigned depth);

/// I_{(1-rho)/2}(L - n/2, n/2 + 1) + I_{(1+rho)/2}(L - n/2, n/2 + 1), clamped.
Probability mlts_success_prob(unsigned length, double rho, unsigned depth);

/// Success probability of a greedy search spending exactly N candidates:
/// the full tree to the realizable depth n, then the remaining budget on the
/// next layer, more likely branch first. Lies between the depth-n and
/// depth-(n+2) values and equals N * 2^-L at rho = 0.
MltsEstimate mlts_estimate_for_searches(unsigned length, double rho, const BigUnsigned& searches);

/// m-ary extension: sum over m states of
/// I_{rho + (1-rho)/2^m}(L/2^{m-1} - n/2^m, n/2^m + 1); arguments floored.
MltsEstimate mlts_estimate_mary(unsigned length, double rho, unsigned depth, unsigned m);
Probability mlts_success_prob_mary(unsigned length, double rho, unsigned depth, unsigned m);

/// Number of positions i with x_i != x_{i+1}.
unsigned transition_count(const BitSequence& x);

/// Candidate stream in MLTS order: groups keyed by min(w, L - w) for w
/// internal transitions, then by w, then lexicographically. Stops after
/// `limit` candidates.
class MltsEnumerator {
public:
  static constexpr unsigned kMaxLength = 26;

  MltsEnumerator(unsigned length, std::uint64_t limit);
  MltsEnumerator(unsigned length, const AdversaryBudget& budget);

  std::optional<BitSequence> next();
  std::uint64_t emitted() const { return emitted_; }

private:
  unsigned length_;
  std::uint64_t limit_;
  std::uint64_t emitted_ = 0;
  std::vector<unsigned> order_;  // transition counts in visiting order
  std::size_t group_ = 0;
  std::uint64_t cursor_ = 0;
};

/// Transition counts w in MLTS visiting order for length L.
std::vector<unsigned> mlts_transition_order(unsigned length);

/// 0-based position of x in the MLTS candidate order (L <= 62).
std::uint64_t mlts_rank(const BitSequence& x);

/// Random-guessing success: min(N * 2^-M, 1).
Probability rg_success_prob(const BigUnsigned& searches, unsigned key_length);
double log2_rg_success_prob(const BigUnsigned& searches, unsigned key_length);

/// Hash-collision approximation 1 - (1 - 2^-M)^L.
Probability collision_prob(unsigned length, unsigned key_length);

struct SecurityLoss {
  double bits = 0.0;
  /// Negative loss: Eve does worse than random guessing.
  bool trivial_strategy = false;
};

/// log2(p_eve / p_rg).
SecurityLoss security_loss(Probability p_eve, Probability p_rg);
SecurityLoss security_loss_log2(double log2_p_eve, double log2_p_rg);

/// I_MLTS * P(test accepts).
Probability eve_success_prob(Probability i_mlts, Probability p_accept);

struct SecurityReport {
  Probability p_eve;
  Probability p_rg;
  double security_loss_bits = 0.0;
  Probability p_collision;
  bool trivial_strategy = false;
  bool mlts_clamped = false;
};

/// Report for a key of M bits distilled from L wireless bits against an
/// adversary with N searches and a test accepting with `p_accept`.
SecurityReport security_report(unsigned length, unsigned key_length, const BigUnsigned& searches,
                               double rho, Probability p_accept);

}  // namespace crnd
