#pragma once

// Correlated bit-sequence models: the symmetric binary Markov chain with lag-1
// correlation rho, and its m-state generalization.

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "crnd/bitseq.hpp"
#include "crnd/specfun.hpp"

namespace crnd {

/// Binary symmetric Markov chain; consecutive bits differ with probability
/// theta = (1 - rho) / 2.
class MarkovBitModel {
public:
  explicit MarkovBitModel(double rho);

  double rho() const { return rho_; }
  Probability theta() const { return theta_; }

private:
  double rho_;
  Probability theta_;
};

/// Sample lag-1 correlation over the pairs (x_i, x_{i+1}).
double lag1_correlation(const BitSequence& x);

/// First bit uniform, each later bit flips with probability theta.
BitSequence generate(const MarkovBitModel& model, std::size_t length, std::uint64_t seed);

/// Row normalization of the off-diagonal mass in the m-state matrix.
enum class OffDiagonal {
  levels,     ///< (1 - rho) / m, row-stochastic
  power_of_two  ///< (1 - rho) / 2^m, the literal published form; rows do not sum to one
};

struct MaryMarkovModel {
  int levels = 2;
  int bits_per_level = 1;
  double rho = 0.0;
  Eigen::MatrixXd transition;
};

int bits_per_level(int levels);

MaryMarkovModel transition_matrix(int levels, double rho,
                                  OffDiagonal normalization = OffDiagonal::levels);

/// State indices drawn from the chain, starting from the uniform law.
std::vector<int> generate_states(const MaryMarkovModel& model, std::size_t symbols,
                                 std::uint64_t seed);

/// Each state written as `bits_per_level` bits, most significant first.
BitSequence encode_states(const std::vector<int>& states, int bits_per_level);

/// Mean per-pair Pearson correlation between consecutive b-bit blocks. Pairs
/// where either block is constant are skipped.
double mary_correlation(const BitSequence& x, int levels);

}  // namespace crnd
