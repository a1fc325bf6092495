#include "crnd/mlts.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "crnd/errors.hpp"

namespace crnd {

namespace {

std::uint64_t binom_u64(unsigned n, unsigned k) {
  if (k > n) return 0;
  k = std::min(k, n - k);
  std::uint64_t r = 1;
  for (unsigned i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

unsigned transitions_of(std::uint64_t v, unsigned length) {
  if (length < 2) return 0;
  const std::uint64_t mask = (std::uint64_t{1} << (length - 1)) - 1;
  return static_cast<unsigned>(std::popcount((v ^ (v >> 1)) & mask));
}

}  // namespace

BigUnsigned parse_big(const std::string& text) {
  auto pos = text.find("^");
  std::size_t skip = 1;
  if (pos == std::string::npos) {
    pos = text.find("**");
    skip = 2;
  }
  try {
    if (pos != std::string::npos) {
      const BigUnsigned base(text.substr(0, pos));
      const unsigned long exponent = std::stoul(text.substr(pos + skip));
      return boost::multiprecision::pow(base, static_cast<unsigned>(exponent));
    }
    if (text.empty() || text.find_first_not_of("0123456789") != std::string::npos) {
      throw InputError("not an unsigned integer: " + text);
    }
    return BigUnsigned(text);
  } catch (const InputError&) {
    throw;
  } catch (const std::exception&) {
    throw InputError("not an unsigned integer: " + text);
  }
}

double log2_big(const BigUnsigned& value) {
  if (value <= 0) return -std::numeric_limits<double>::infinity();
  const auto top = static_cast<long>(boost::multiprecision::msb(value));
  if (top < 53) return std::log2(value.convert_to<double>());
  const long shift = top - 52;
  const BigUnsigned head = value >> shift;
  return std::log2(head.convert_to<double>()) + static_cast<double>(shift);
}

BigUnsigned searches_for_depth(unsigned depth, unsigned length) {
  BigUnsigned term = 1;
  BigUnsigned sum = 0;
  for (unsigned i = 0; i <= depth / 2 && i <= length; ++i) {
    if (i > 0) term = term * (length - i + 1) / i;
    sum += term;
  }
  return 2 * sum;
}

AdversaryBudget budget_from_depth(unsigned depth, unsigned length) {
  if (depth % 2 != 0 || depth > length) {
    throw DomainError("depth must be even and at most L");
  }
  return AdversaryBudget{searches_for_depth(depth, length), depth, length};
}

AdversaryBudget budget_from_searches(const BigUnsigned& searches, unsigned length) {
  if (length == 0) throw DomainError("budget_from_searches: L must be >= 1");
  if (searches < 2) throw DomainError("insufficient budget: N must be >= 2");
  // Walk the cumulative sum 2 * sum_{i<=n/2} C(L, i) upward.
  BigUnsigned term = 1;
  BigUnsigned sum = 1;
  unsigned depth = 0;
  for (unsigned half = 1; 2 * half <= length; ++half) {
    term = term * (length - half + 1) / half;
    if (2 * (sum + term) > searches) break;
    sum += term;
    depth = 2 * half;
  }
  return AdversaryBudget{searches, depth, length};
}

MltsEstimate mlts_estimate(unsigned length, double rho, unsigned depth) {
  if (length == 0) throw DomainError("mlts: L must be >= 1");
  if (depth > length) throw DomainError("mlts: depth n must satisfy 0 <= n <= L");
  if (!(rho >= -1.0 && rho <= 1.0)) throw DomainError("mlts: rho outside [-1, 1]");
  const double half = static_cast<double>(depth / 2);
  const double a = static_cast<double>(length) - half;
  const double b = half + 1.0;
  const double lo = log_reg_inc_beta((1.0 - rho) / 2.0, a, b);
  const double hi = log_reg_inc_beta((1.0 + rho) / 2.0, a, b);
  MltsEstimate out;
  out.log_raw = log_add(lo, hi);
  if (out.log_raw > -700.0) {
    out.raw = reg_inc_beta((1.0 - rho) / 2.0, a, b).value() + reg_inc_beta((1.0 + rho) / 2.0, a, b).value();
    out.log_raw = std::log(out.raw);
  } else {
    out.raw = std::exp(out.log_raw);
  }
  out.clamped = out.raw > 1.0;
  out.value = Probability::clamped(out.raw);
  return out;
}

Probability mlts_success_prob(unsigned length, double rho, unsigned depth) {
  return mlts_estimate(length, rho, depth).value;
}

MltsEstimate mlts_estimate_for_searches(unsigned length, double rho, const BigUnsigned& searches) {
  const auto budget = budget_from_searches(searches, length);
  MltsEstimate out = mlts_estimate(length, rho, budget.depth);
  const unsigned layer = budget.depth / 2 + 1;
  const BigUnsigned used = searches_for_depth(budget.depth, length);
  if (budget.depth + 2 > length || searches <= used) return out;

  // Each branch adds C(L, layer) candidates of equal probability.
  const double log_width = log_binomial(length, layer);
  const double log_remaining = log2_big(searches - used) * std::numbers::ln2;
  const double theta = (1.0 - std::fabs(rho)) / 2.0;
  const double k = static_cast<double>(layer);
  const double rest = static_cast<double>(length) - k;
  auto log_pow = [](double base, double e) {
    if (e == 0.0) return 0.0;
    return base > 0.0 ? e * std::log(base) : -std::numeric_limits<double>::infinity();
  };
  const double log_likely = log_pow(theta, k) + log_pow(1.0 - theta, rest);
  const double log_unlikely = log_pow(1.0 - theta, k) + log_pow(theta, rest);
  const double log_first = std::min(log_remaining, log_width);
  double extra = log_first + log_likely;
  if (log_remaining > log_width) {
    const BigUnsigned width = [&] {
      BigUnsigned c = 1;
      for (unsigned i = 1; i <= layer; ++i) c = c * (length - i + 1) / i;
      return c;
    }();
    const BigUnsigned remaining = searches - used;
    const BigUnsigned over = remaining > width ? remaining - width : BigUnsigned(0);
    const BigUnsigned second = over < width ? over : width;
    if (second > 0) extra = log_add(extra, log2_big(second) * std::numbers::ln2 + log_unlikely);
  }
  out.log_raw = log_add(out.log_raw, extra);
  out.raw = std::exp(out.log_raw);
  out.clamped = out.raw > 1.0;
  out.value = Probability::clamped(out.raw);
  return out;
}

MltsEstimate mlts_estimate_mary(unsigned length, double rho, unsigned depth, unsigned m) {
  if (m < 1 || m > 30) throw DomainError("mlts_mary: m must be in [1, 30]");
  if (depth > length) throw DomainError("mlts_mary: depth n must satisfy 0 <= n <= L");
  const double stay = rho + (1.0 - rho) / std::ldexp(1.0, static_cast<int>(m));
  if (!(stay >= 0.0 && stay <= 1.0)) {
    throw DomainError("mlts_mary: self-transition probability outside [0, 1]");
  }
  const unsigned steps = length >> (m - 1);
  const unsigned changes = depth >> m;
  if (steps <= changes) throw DomainError("mlts_mary: non-positive beta parameter after flooring");
  const double a = static_cast<double>(steps - changes);
  const double b = static_cast<double>(changes) + 1.0;
  MltsEstimate out;
  out.log_raw = std::log(static_cast<double>(m)) + log_reg_inc_beta(stay, a, b);
  out.raw = std::exp(out.log_raw);
  out.clamped = out.raw > 1.0;
  out.value = Probability::clamped(out.raw);
  return out;
}

Probability mlts_success_prob_mary(unsigned length, double rho, unsigned depth, unsigned m) {
  return mlts_estimate_mary(length, rho, depth, m).value;
}

unsigned transition_count(const BitSequence& x) {
  unsigned w = 0;
  for (std::size_t i = 1; i < x.size(); ++i) w += x[i] != x[i - 1];
  return w;
}

std::vector<unsigned> mlts_transition_order(unsigned length) {
  std::vector<unsigned> order;
  if (length == 0) return order;
  for (unsigned key = 0; key <= length; ++key) {
    for (unsigned w = 0; w + 1 <= length; ++w) {
      if (std::min(w, length - w) == key) order.push_back(w);
    }
  }
  return order;
}

MltsEnumerator::MltsEnumerator(unsigned length, std::uint64_t limit)
    : length_(length), limit_(limit), order_(mlts_transition_order(length)) {
  if (length == 0) throw DomainError("enumerate_mlts: L must be >= 1");
  if (length > kMaxLength) {
    throw ScaleError("enumerate_mlts: L = " + std::to_string(length) + " exceeds " +
                     std::to_string(kMaxLength));
  }
}

MltsEnumerator::MltsEnumerator(unsigned length, const AdversaryBudget& budget)
    : MltsEnumerator(length, budget.searches > std::numeric_limits<std::uint64_t>::max()
                                 ? std::numeric_limits<std::uint64_t>::max()
                                 : budget.searches.convert_to<std::uint64_t>()) {}

std::optional<BitSequence> MltsEnumerator::next() {
  if (emitted_ >= limit_) return std::nullopt;
  const std::uint64_t end = std::uint64_t{1} << length_;
  while (group_ < order_.size()) {
    const unsigned w = order_[group_];
    while (cursor_ < end) {
      const std::uint64_t v = cursor_++;
      if (transitions_of(v, length_) == w) {
        ++emitted_;
        return BitSequence::from_uint(v, length_);
      }
    }
    ++group_;
    cursor_ = 0;
  }
  return std::nullopt;
}

std::uint64_t mlts_rank(const BitSequence& x) {
  const auto length = static_cast<unsigned>(x.size());
  if (length == 0) throw DomainError("mlts_rank: empty sequence");
  if (length > 62) throw ScaleError("mlts_rank: L exceeds 62");
  const unsigned w = transition_count(x);
  std::uint64_t rank = 0;
  for (unsigned prior : mlts_transition_order(length)) {
    if (prior == w) break;
    rank += 2 * binom_u64(length - 1, prior);
  }
  // Lexicographic position among sequences with exactly w transitions.
  unsigned used = 0;
  for (unsigned i = 0; i < length; ++i) {
    if (x[i] == 1) {
      const unsigned step = (i > 0 && x[i - 1] != 0) ? 1u : 0u;
      const unsigned gaps = length - 1 - i;
      if (used + step <= w && w - used - step <= gaps) {
        rank += binom_u64(gaps, w - used - step);
      }
    }
    if (i > 0 && x[i] != x[i - 1]) ++used;
  }
  return rank;
}

Probability rg_success_prob(const BigUnsigned& searches, unsigned key_length) {
  if (key_length < 1) throw DomainError("rg_success_prob: M must be >= 1");
  if (searches >= (BigUnsigned(1) << key_length)) return Probability(1.0);
  return Probability::clamped(std::exp2(log2_rg_success_prob(searches, key_length)));
}

double log2_rg_success_prob(const BigUnsigned& searches, unsigned key_length) {
  if (key_length < 1) throw DomainError("rg_success_prob: M must be >= 1");
  return std::min(0.0, log2_big(searches) - static_cast<double>(key_length));
}

Probability collision_prob(unsigned length, unsigned key_length) {
  if (length < 1 || key_length < 1) throw DomainError("collision_prob: L, M must be >= 1");
  const double per = std::ldexp(1.0, -static_cast<int>(key_length));
  return Probability::clamped(-std::expm1(static_cast<double>(length) * std::log1p(-per)));
}

SecurityLoss security_loss_log2(double log2_p_eve, double log2_p_rg) {
  if (std::isinf(log2_p_rg) && log2_p_rg < 0) throw DomainError("security_loss: p_rg is zero");
  SecurityLoss out;
  out.bits = log2_p_eve - log2_p_rg;
  out.trivial_strategy = out.bits < 0.0;
  return out;
}

SecurityLoss security_loss(Probability p_eve, Probability p_rg) {
  if (p_rg.value() <= 0.0) throw DomainError("security_loss: p_rg is zero");
  return security_loss_log2(std::log2(p_eve.value()), std::log2(p_rg.value()));
}

Probability eve_success_prob(Probability i_mlts, Probability p_accept) {
  return Probability::clamped(i_mlts.value() * p_accept.value());
}

SecurityReport security_report(unsigned length, unsigned key_length, const BigUnsigned& searches,
                               double rho, Probability p_accept) {
  const auto mlts = mlts_estimate_for_searches(length, std::fabs(rho), searches);
  const double log2_mlts = std::min(0.0, mlts.log_raw / std::numbers::ln2);
  const double log2_eve = log2_mlts + std::log2(p_accept.value());
  const double log2_rg = log2_rg_success_prob(searches, key_length);
  const auto loss = security_loss_log2(log2_eve, log2_rg);
  SecurityReport report;
  report.p_eve = Probability::clamped(std::exp2(log2_eve));
  report.p_rg = rg_success_prob(searches, key_length);
  report.security_loss_bits = loss.bits;
  report.trivial_strategy = loss.trivial_strategy;
  report.p_collision = collision_prob(length, key_length);
  report.mlts_clamped = mlts.clamped;
  return report;
}

}  // namespace crnd
