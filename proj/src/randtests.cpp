#include "crnd/randtests.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <fstream>
#include <numbers>
#include <string>
#include <utility>

#include <unsupported/Eigen/FFT>

#include "crnd/errors.hpp"

namespace crnd {

namespace {

struct KindName {
  TestKind kind;
  std::string_view name;
};

constexpr KindName kKindNames[] = {
    {TestKind::frequency, "frequency"},
    {TestKind::block_frequency, "block_frequency"},
    {TestKind::runs, "runs"},
    {TestKind::longest_run, "longest_run"},
    {TestKind::dft, "dft"},
    {TestKind::non_overlapping_template, "non_overlapping_template"},
    {TestKind::approximate_entropy, "approximate_entropy"},
    {TestKind::serial1, "serial1"},
    {TestKind::serial2, "serial2"},
};

struct Statistic {
  Statistic(double v, double pv, bool d = false, std::string n = {})
      : value(v), p(pv), degenerate(d), note(std::move(n)) {}
  double value;
  double p;
  bool degenerate;
  std::string note;
};

double igamc(double a, double x) { return reg_inc_gamma(a, x, Tail::upper).value(); }

Statistic frequency_stat(const BitSequence& x) {
  const double n = static_cast<double>(x.size());
  const double sum = 2.0 * static_cast<double>(x.count_ones()) - n;
  const double s = sum / std::sqrt(n);
  return {s, std::erfc(std::fabs(s) / std::numbers::sqrt2)};
}

Statistic block_frequency_stat(const TestSpec& spec, const BitSequence& x) {
  const std::size_t m = spec.block_size;
  const std::size_t blocks = x.size() / m;
  double chi2 = 0.0;
  for (std::size_t b = 0; b < blocks; ++b) {
    std::size_t ones = 0;
    for (std::size_t j = 0; j < m; ++j) ones += x[b * m + j];
    const double pi = static_cast<double>(ones) / static_cast<double>(m) - 0.5;
    chi2 += pi * pi;
  }
  chi2 *= 4.0 * static_cast<double>(m);
  return {chi2, igamc(static_cast<double>(blocks) / 2.0, chi2 / 2.0)};
}

Statistic runs_stat(const BitSequence& x) {
  const double n = static_cast<double>(x.size());
  const double pi = static_cast<double>(x.count_ones()) / n;
  std::size_t runs = 1;
  for (std::size_t i = 1; i < x.size(); ++i) runs += x[i] != x[i - 1];
  const double v = static_cast<double>(runs);
  if (std::fabs(pi - 0.5) >= 2.0 / std::sqrt(n)) {
    return {v, 0.0, true, "frequency pre-test failed"};
  }
  const double spread = 2.0 * n * pi * (1.0 - pi);
  const double p = std::erfc(std::fabs(v - spread) /
                             (2.0 * std::sqrt(2.0 * n) * pi * (1.0 - pi)));
  return {v, p};
}

std::size_t longest_run_in(const BitSequence& x, std::size_t begin, std::size_t len) {
  std::size_t best = 0;
  std::size_t run = 0;
  for (std::size_t i = begin; i < begin + len; ++i) {
    run = x[i] ? run + 1 : 0;
    best = std::max(best, run);
  }
  return best;
}

Statistic longest_run_stat(const BitSequence& x) {
  const auto table = longest_run_table(x.size());
  const std::size_t blocks = x.size() / table.block;
  std::vector<double> counts(static_cast<std::size_t>(table.classes) + 1, 0.0);
  for (std::size_t b = 0; b < blocks; ++b) {
    const auto v = static_cast<int>(longest_run_in(x, b * table.block, table.block));
    const int bin = std::clamp(v - table.min_run, 0, table.classes);
    counts[static_cast<std::size_t>(bin)] += 1.0;
  }
  double chi2 = 0.0;
  const double nb = static_cast<double>(blocks);
  for (std::size_t i = 0; i < counts.size(); ++i) {
    const double e = nb * table.pi[i];
    chi2 += (counts[i] - e) * (counts[i] - e) / e;
  }
  return {chi2, igamc(table.classes / 2.0, chi2 / 2.0)};
}

Statistic dft_stat(const BitSequence& x) {
  const std::size_t n = x.size();
  std::vector<double> signal(n);
  for (std::size_t i = 0; i < n; ++i) signal[i] = x[i] ? 1.0 : -1.0;
  Eigen::FFT<double> fft;
  std::vector<std::complex<double>> spectrum;
  fft.fwd(spectrum, signal);
  const double nn = static_cast<double>(n);
  const double threshold = std::sqrt(std::log(1.0 / 0.05) * nn);
  const std::size_t half = n / 2;
  std::size_t below = 0;
  for (std::size_t j = 0; j < half; ++j) below += std::abs(spectrum[j]) < threshold;
  const double expected = 0.95 * nn / 2.0;
  const double d = (static_cast<double>(below) - expected) / std::sqrt(nn * 0.95 * 0.05 / 4.0);
  return {d, std::erfc(std::fabs(d) / std::numbers::sqrt2)};
}

Statistic non_overlapping_stat(const TestSpec& spec, const BitSequence& x) {
  const BitSequence& b = spec.templ;
  const std::size_t m = b.size();
  const std::size_t blocks = spec.template_blocks;
  const std::size_t len = x.size() / blocks;
  const double mu = static_cast<double>(len - m + 1) / std::ldexp(1.0, static_cast<int>(m));
  const double var = static_cast<double>(len) *
                     (1.0 / std::ldexp(1.0, static_cast<int>(m)) -
                      (2.0 * static_cast<double>(m) - 1.0) / std::ldexp(1.0, 2 * static_cast<int>(m)));
  double chi2 = 0.0;
  for (std::size_t blk = 0; blk < blocks; ++blk) {
    const std::size_t base = blk * len;
    std::size_t hits = 0;
    std::size_t i = 0;
    while (i + m <= len) {
      bool match = true;
      for (std::size_t k = 0; k < m; ++k) {
        if (x[base + i + k] != b[k]) {
          match = false;
          break;
        }
      }
      if (match) {
        ++hits;
        i += m;
      } else {
        ++i;
      }
    }
    const double diff = static_cast<double>(hits) - mu;
    chi2 += diff * diff / var;
  }
  return {chi2, igamc(static_cast<double>(blocks) / 2.0, chi2 / 2.0)};
}

// Cyclic counts of every m-bit pattern over the n windows starting at each bit.
std::vector<double> cyclic_pattern_counts(const BitSequence& x, int m) {
  const std::size_t n = x.size();
  std::vector<double> counts(std::size_t{1} << m, 0.0);
  const std::size_t mask = (std::size_t{1} << m) - 1;
  std::size_t v = 0;
  for (int k = 0; k < m; ++k) v = (v << 1) | x[static_cast<std::size_t>(k) % n];
  for (std::size_t i = 0; i < n; ++i) {
    counts[v] += 1.0;
    v = ((v << 1) | x[(i + static_cast<std::size_t>(m)) % n]) & mask;
  }
  return counts;
}

double apen_phi(const BitSequence& x, int m) {
  if (m == 0) return 0.0;
  const double n = static_cast<double>(x.size());
  double phi = 0.0;
  for (double c : cyclic_pattern_counts(x, m)) {
    if (c > 0) phi += (c / n) * std::log(c / n);
  }
  return phi;
}

Statistic approximate_entropy_stat(const TestSpec& spec, const BitSequence& x) {
  const int m = spec.order();
  const double n = static_cast<double>(x.size());
  const double apen = apen_phi(x, m) - apen_phi(x, m + 1);
  const double chi2 = 2.0 * n * (std::numbers::ln2 - apen);
  return {chi2, igamc(std::ldexp(1.0, m - 1), chi2 / 2.0)};
}

double psi2(const BitSequence& x, int m) {
  if (m <= 0) return 0.0;
  const double n = static_cast<double>(x.size());
  double sum = 0.0;
  for (double c : cyclic_pattern_counts(x, m)) sum += c * c;
  return std::ldexp(1.0, m) / n * sum - n;
}

Statistic serial_stat(const TestSpec& spec, const BitSequence& x, bool second) {
  const int m = spec.order();
  const double p0 = psi2(x, m);
  const double p1 = psi2(x, m - 1);
  const double p2 = psi2(x, m - 2);
  if (!second) {
    const double del = p0 - p1;
    return {del, igamc(std::ldexp(1.0, m - 2), del / 2.0)};
  }
  const double del2 = p0 - 2.0 * p1 + p2;
  return {del2, igamc(std::ldexp(1.0, m - 3), del2 / 2.0)};
}

Statistic compute(const TestSpec& spec, const BitSequence& x) {
  spec.validate();
  const std::size_t need = minimum_length(spec);
  if (x.size() < need) {
    throw InsufficientData(std::string(to_string(spec.kind)) + ": need at least " +
                           std::to_string(need) + " bits, got " + std::to_string(x.size()));
  }
  switch (spec.kind) {
    case TestKind::frequency: return frequency_stat(x);
    case TestKind::block_frequency: return block_frequency_stat(spec, x);
    case TestKind::runs: return runs_stat(x);
    case TestKind::longest_run: return longest_run_stat(x);
    case TestKind::dft: return dft_stat(x);
    case TestKind::non_overlapping_template: return non_overlapping_stat(spec, x);
    case TestKind::approximate_entropy: return approximate_entropy_stat(spec, x);
    case TestKind::serial1: return serial_stat(spec, x, false);
    case TestKind::serial2: return serial_stat(spec, x, true);
  }
  throw DomainError("unknown test kind");
}

}  // namespace

std::string_view to_string(TestKind kind) {
  for (const auto& k : kKindNames) {
    if (k.kind == kind) return k.name;
  }
  return "unknown";
}

TestKind parse_test_kind(std::string_view name) {
  for (const auto& k : kKindNames) {
    if (k.name == name) return k.kind;
  }
  if (name == "block" || name == "blockfrequency") return TestKind::block_frequency;
  if (name == "longestrun") return TestKind::longest_run;
  if (name == "nonoverlapping" || name == "template") return TestKind::non_overlapping_template;
  if (name == "apen" || name == "approximateentropy") return TestKind::approximate_entropy;
  throw InputError("unknown test kind: " + std::string(name));
}

bool is_chi_square_family(TestKind kind) {
  return !(kind == TestKind::frequency || kind == TestKind::runs || kind == TestKind::dft);
}

std::string_view to_string(Verdict v) {
  return v == Verdict::accept_h0 ? "accept_h0" : "accept_h1";
}

TestSpec TestSpec::defaults(TestKind kind, double alpha) {
  TestSpec spec;
  spec.kind = kind;
  spec.alpha = alpha;
  if (kind == TestKind::non_overlapping_template) spec.templ = BitSequence::from_string("000000001");
  return spec;
}

int TestSpec::order() const {
  if (pattern_order > 0) return pattern_order;
  return kind == TestKind::approximate_entropy ? 2 : 3;
}

void TestSpec::validate() const {
  if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("alpha must lie in (0, 1)");
  switch (kind) {
    case TestKind::block_frequency:
      if (block_size < 2) throw DomainError("block_frequency: block size must be >= 2");
      break;
    case TestKind::non_overlapping_template: {
      if (templ.size() < 2 || templ.size() > 21) {
        throw DomainError("non_overlapping_template: template length must be in [2, 21]");
      }
      const auto ones = templ.count_ones();
      if (ones == 0 || ones == templ.size()) {
        throw DomainError("non_overlapping_template: constant template");
      }
      if (template_blocks < 1) throw DomainError("non_overlapping_template: need >= 1 block");
      break;
    }
    case TestKind::approximate_entropy:
      if (order() < 1 || order() > 20) throw DomainError("approximate_entropy: m in [1, 20]");
      break;
    case TestKind::serial1:
      if (order() < 2 || order() > 20) throw DomainError("serial1: m in [2, 20]");
      break;
    case TestKind::serial2:
      if (order() < 3 || order() > 20) throw DomainError("serial2: m in [3, 20]");
      break;
    default:
      break;
  }
}

std::size_t minimum_length(const TestSpec& spec) {
  std::size_t structural = 1;
  std::size_t recommended = 100;
  switch (spec.kind) {
    case TestKind::frequency:
    case TestKind::runs:
      structural = 1;
      break;
    case TestKind::block_frequency:
      structural = spec.block_size;
      break;
    case TestKind::longest_run:
      structural = 128;
      recommended = 128;
      break;
    case TestKind::dft:
      structural = 2;
      recommended = 1000;
      break;
    case TestKind::non_overlapping_template:
      structural = spec.templ.size() * spec.template_blocks;
      break;
    case TestKind::approximate_entropy:
      structural = static_cast<std::size_t>(spec.order()) + 1;
      recommended = std::max<std::size_t>(100, std::size_t{1} << (spec.order() + 6));
      break;
    case TestKind::serial1:
    case TestKind::serial2:
      structural = static_cast<std::size_t>(spec.order());
      recommended = std::max<std::size_t>(100, std::size_t{1} << (spec.order() + 3));
      break;
  }
  return spec.enforce_min_length ? std::max(structural, recommended) : structural;
}

TestOutcome run_test(const TestSpec& spec, const BitSequence& x) {
  auto stat = compute(spec, x);
  TestOutcome out;
  out.spec = spec;
  out.statistic = stat.value;
  out.p_value = Probability::clamped(stat.p);
  out.verdict = out.p_value.value() > spec.alpha ? Verdict::accept_h0 : Verdict::accept_h1;
  out.degenerate = stat.degenerate;
  out.note = std::move(stat.note);
  return out;
}

Probability p_value(const TestSpec& spec, const BitSequence& x) {
  return Probability::clamped(compute(spec, x).p);
}

LongestRunTable longest_run_table(std::size_t n) {
  if (n < 128) throw InsufficientData("longest_run: need at least 128 bits");
  if (n < 6272) return {8, 3, 1, {0.2148, 0.3672, 0.2305, 0.1875}};
  if (n < 750000) return {128, 5, 4, {0.1174, 0.2430, 0.2493, 0.1752, 0.1027, 0.1124}};
  return {10000, 6, 10, {0.0882, 0.2092, 0.2483, 0.1933, 0.1208, 0.0675, 0.0727}};
}

std::vector<BitSequence> aperiodic_templates(int m) {
  if (m < 2 || m > 21) throw DomainError("aperiodic_templates: m in [2, 21]");
  std::vector<BitSequence> out;
  for (std::uint64_t v = 0; v < (std::uint64_t{1} << m); ++v) {
    auto t = BitSequence::from_uint(v, static_cast<std::size_t>(m));
    const auto eps = template_overlaps(t);
    if (std::none_of(eps.begin() + 1, eps.end(), [](int e) { return e != 0; })) {
      out.push_back(std::move(t));
    }
  }
  return out;
}

std::vector<BitSequence> load_templates(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open template file " + path);
  return read_text(in);
}

std::string default_template_file() { return std::string(CRND_DATA_DIR) + "/templates9.txt"; }

std::vector<int> template_overlaps(const BitSequence& templ) {
  const std::size_t m = templ.size();
  std::vector<int> eps(m, 0);
  for (std::size_t t = 1; t < m; ++t) {
    bool same = true;
    for (std::size_t k = 0; k < t; ++k) {
      if (templ[k] != templ[m - t + k]) {
        same = false;
        break;
      }
    }
    eps[t] = same ? 1 : 0;
  }
  return eps;
}

}  // namespace crnd
