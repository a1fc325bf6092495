#include "crnd/bitmodel.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "crnd/errors.hpp"
#include "crnd/rng.hpp"

namespace crnd {

MarkovBitModel::MarkovBitModel(double rho) : rho_(rho), theta_() {
  if (!(rho >= -1.0 && rho <= 1.0)) throw DomainError("rho outside [-1, 1]");
  theta_ = Probability((1.0 - rho) / 2.0);
}

double lag1_correlation(const BitSequence& x) {
  const std::size_t n = x.size();
  if (n < 2) throw InsufficientData("lag1_correlation: need at least 2 bits");
  const std::size_t pairs = n - 1;
  double sa = 0, sb = 0;
  for (std::size_t i = 0; i < pairs; ++i) {
    sa += x[i];
    sb += x[i + 1];
  }
  const double ma = sa / pairs;
  const double mb = sb / pairs;
  double cov = 0, va = 0, vb = 0;
  for (std::size_t i = 0; i < pairs; ++i) {
    const double da = x[i] - ma;
    const double db = x[i + 1] - mb;
    cov += da * db;
    va += da * da;
    vb += db * db;
  }
  if (va == 0.0 || vb == 0.0) throw DegenerateVariance("lag1_correlation: constant sequence");
  return std::clamp(cov / std::sqrt(va * vb), -1.0, 1.0);
}

BitSequence generate(const MarkovBitModel& model, std::size_t length, std::uint64_t seed) {
  if (length == 0) throw InputError("generate: length must be >= 1");
  Rng rng(seed);
  const double theta = model.theta();
  BitSequence out;
  out.reserve(length);
  std::uint8_t bit = rng.bit();
  out.push_back(bit);
  for (std::size_t i = 1; i < length; ++i) {
    if (rng.bernoulli(theta)) bit ^= 1u;
    out.push_back(bit);
  }
  return out;
}

int bits_per_level(int levels) {
  if (levels < 2) throw DomainError("levels must be >= 2");
  int b = 0;
  while ((1 << b) < levels) ++b;
  return b;
}

MaryMarkovModel transition_matrix(int levels, double rho, OffDiagonal normalization) {
  if (levels < 2) throw DomainError("transition_matrix: m must be >= 2");
  if (!(rho <= 1.0)) throw DomainError("transition_matrix: rho must be <= 1");
  const double denom = normalization == OffDiagonal::levels ? static_cast<double>(levels)
                                                            : std::ldexp(1.0, levels);
  const double off = (1.0 - rho) / denom;
  if (rho + off < 0.0 || off < 0.0) {
    throw DomainError("transition_matrix: rho below -1/(m-1) gives negative entries");
  }
  MaryMarkovModel model;
  model.levels = levels;
  model.bits_per_level = bits_per_level(levels);
  model.rho = rho;
  model.transition = Eigen::MatrixXd::Constant(levels, levels, off);
  model.transition.diagonal().array() += rho;
  return model;
}

std::vector<int> generate_states(const MaryMarkovModel& model, std::size_t symbols,
                                 std::uint64_t seed) {
  const int m = model.levels;
  Eigen::MatrixXd cumulative(m, m);
  for (int r = 0; r < m; ++r) {
    double acc = 0.0;
    for (int s = 0; s < m; ++s) {
      acc += model.transition(r, s);
      cumulative(r, s) = acc;
    }
  }
  Rng rng(seed);
  std::vector<int> states;
  states.reserve(symbols);
  if (symbols == 0) return states;
  int state = static_cast<int>(rng.uniform() * m);
  states.push_back(state);
  for (std::size_t i = 1; i < symbols; ++i) {
    const double u = rng.uniform() * cumulative(state, m - 1);
    int next = 0;
    while (next < m - 1 && u >= cumulative(state, next)) ++next;
    state = next;
    states.push_back(state);
  }
  return states;
}

BitSequence encode_states(const std::vector<int>& states, int bits) {
  BitSequence out;
  out.reserve(states.size() * static_cast<std::size_t>(bits));
  for (int s : states) {
    for (int j = bits - 1; j >= 0; --j) out.push_back(static_cast<std::uint8_t>((s >> j) & 1));
  }
  return out;
}

double mary_correlation(const BitSequence& x, int levels) {
  const int b = bits_per_level(levels);
  if (x.size() % static_cast<std::size_t>(b) != 0) {
    throw InputError("mary_correlation: length not divisible by bits per level");
  }
  const std::size_t symbols = x.size() / b;
  if (symbols < 2) throw InsufficientData("mary_correlation: need at least 2 symbols");
  double total = 0.0;
  std::size_t scored = 0;
  for (std::size_t i = 0; i + 1 < symbols; ++i) {
    const std::size_t p = i * b;
    const std::size_t q = p + b;
    double ma = 0, mb = 0;
    for (int j = 0; j < b; ++j) {
      ma += x[p + j];
      mb += x[q + j];
    }
    ma /= b;
    mb /= b;
    double cov = 0, va = 0, vb = 0;
    for (int j = 0; j < b; ++j) {
      const double da = x[p + j] - ma;
      const double db = x[q + j] - mb;
      cov += da * db;
      va += da * da;
      vb += db * db;
    }
    if (va == 0.0 || vb == 0.0) continue;
    total += cov / std::sqrt(va * vb);
    ++scored;
  }
  if (scored == 0) throw DegenerateVariance("mary_correlation: every block pair is degenerate");
  return total / static_cast<double>(scored);
}

}  // namespace crnd
