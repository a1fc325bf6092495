#include "crnd/pipeline.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <future>
#include <limits>

#include "crnd/bitmodel.hpp"
#include "crnd/errors.hpp"
#include "crnd/rng.hpp"

namespace crnd {

namespace {

constexpr std::size_t kMaxDuration = std::size_t{1} << 28;
constexpr std::uint64_t kPilotStream = ~std::uint64_t{0};

unsigned key_length_for(double r, std::size_t length) {
  const auto m = static_cast<unsigned>(std::ceil(r * static_cast<double>(length) - 1e-9));
  return std::max(1u, std::min(m, static_cast<unsigned>(length)));
}

BitSequence take(const BitSequence& x, std::size_t count) { return x.slice(0, count); }

}  // namespace

ChannelPair simulate_channel(const ChannelParams& params, std::size_t duration, std::uint64_t seed) {
  if (duration == 0) throw DomainError("simulate_channel: duration must be >= 1");
  const double a = params.ar_coefficient;
  if (!(a >= 0.0 && a < 1.0)) throw DomainError("ar_coefficient must lie in [0, 1)");
  if (!(params.noise_sd >= 0.0)) throw DomainError("noise_sd must be >= 0");
  ChannelPair out;
  for (auto* t : {&out.alice, &out.bob}) {
    t->samples.resize(duration);
    t->sample_interval = params.sample_interval;
    t->ar_coefficient = a;
    t->noise_sd = params.noise_sd;
  }
  Rng rng(seed);
  const double innovation = std::sqrt(1.0 - a * a);
  double s = 0.0;
  for (std::size_t t = 0; t < duration; ++t) {
    const double w = rng.normal();
    s = t == 0 ? w : a * s + innovation * w;
    const double na = rng.normal();
    const double nb = rng.normal();
    out.alice.samples[t] = s + params.noise_sd * na;
    out.bob.samples[t] = s + params.noise_sd * nb;
  }
  return out;
}

void QuantizerConfig::validate() const {
  if (levels != 2 && levels != 4 && levels != 8) throw DomainError("levels must be 2, 4 or 8");
  if (interval == 0) throw DomainError("interval must be >= 1");
  if (!(q_plus >= q_minus)) throw DomainError("q_plus must not be below q_minus");
}

QuantizedBits level_crossing_positions(const ChannelTrace& trace, const QuantizerConfig& cfg) {
  cfg.validate();
  QuantizedBits out;
  for (std::size_t i = 0; i < trace.samples.size(); i += cfg.interval) {
    const double v = trace.samples[i];
    if (v > cfg.q_plus) {
      out.bits.push_back(1);
      out.positions.push_back(i);
    } else if (v < cfg.q_minus) {
      out.bits.push_back(0);
      out.positions.push_back(i);
    }
  }
  return out;
}

BitSequence level_crossing_quantize(const ChannelTrace& trace, const QuantizerConfig& cfg) {
  return level_crossing_positions(trace, cfg).bits;
}

double quantile(std::vector<double> values, double q) {
  if (values.empty()) throw InsufficientData("quantile of an empty sample");
  std::sort(values.begin(), values.end());
  const double h = (static_cast<double>(values.size()) - 1.0) * q;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

BitSequence mary_quantize(const ChannelTrace& trace, int levels) {
  if (levels != 2 && levels != 4 && levels != 8) throw DomainError("levels must be 2, 4 or 8");
  if (trace.samples.size() < static_cast<std::size_t>(levels)) {
    throw InsufficientData("trace too short for quantile estimation");
  }
  const auto [lo, hi] = std::minmax_element(trace.samples.begin(), trace.samples.end());
  if (*lo == *hi) throw DomainError("quantile error: constant trace");
  std::vector<double> sorted = trace.samples;
  std::sort(sorted.begin(), sorted.end());
  std::vector<double> cuts;
  for (int k = 1; k < levels; ++k) {
    const double h = (static_cast<double>(sorted.size()) - 1.0) * k / levels;
    const auto i = static_cast<std::size_t>(std::floor(h));
    const auto j = std::min(i + 1, sorted.size() - 1);
    cuts.push_back(sorted[i] + (h - static_cast<double>(i)) * (sorted[j] - sorted[i]));
  }
  const int width = std::countr_zero(static_cast<unsigned>(levels));
  BitSequence out;
  out.reserve(trace.samples.size() * static_cast<std::size_t>(width));
  for (double v : trace.samples) {
    const auto bin = static_cast<unsigned>(std::lower_bound(cuts.begin(), cuts.end(), v) - cuts.begin());
    const unsigned gray = bin ^ (bin >> 1);
    for (int b = width - 1; b >= 0; --b) out.push_back(static_cast<std::uint8_t>((gray >> b) & 1u));
  }
  return out;
}

ReconcileResult reconcile(const BitSequence& a, const BitSequence& b, std::size_t block) {
  if (a.size() != b.size()) throw InputError("reconcile: sequences differ in length");
  if (block == 0) throw DomainError("reconcile: block must be >= 1");
  ReconcileResult out;
  std::size_t diff = 0;
  std::size_t residual = 0;
  for (std::size_t start = 0; start < a.size(); start += block) {
    const std::size_t end = std::min(start + block, a.size());
    unsigned pa = 0;
    unsigned pb = 0;
    std::size_t local = 0;
    for (std::size_t i = start; i < end; ++i) {
      pa ^= a[i];
      pb ^= b[i];
      local += a[i] != b[i];
    }
    diff += local;
    if (pa != pb) {
      out.discarded += end - start;
      continue;
    }
    residual += local;
    for (std::size_t i = start; i < end; ++i) {
      out.retained.push_back(a[i]);
      out.retained_peer.push_back(b[i]);
    }
  }
  if (!a.empty()) out.r_mismatch = static_cast<double>(diff) / static_cast<double>(a.size());
  if (!out.retained.empty()) {
    out.residual_mismatch = static_cast<double>(residual) / static_cast<double>(out.retained.size());
  }
  return out;
}

BitSequence privacy_amplify(const BitSequence& x, double r, std::uint64_t seed) {
  if (!(r > 0.0 && r <= 1.0)) throw DomainError("privacy_amplify: r must lie in (0, 1]");
  if (x.empty()) throw DomainError("privacy_amplify: empty input");
  if (r == 1.0) return x;
  const std::size_t n = x.size();
  const std::size_t m = key_length_for(r, n);
  Rng rng(seed);
  std::vector<std::uint8_t> diag(m + n - 1);
  for (auto& d : diag) d = rng.bit();
  BitSequence out(m);
  for (std::size_t i = 0; i < m; ++i) {
    unsigned acc = 0;
    for (std::size_t j = 0; j < n; ++j) acc ^= diag[i + n - 1 - j] & x[j];
    out.set(i, static_cast<std::uint8_t>(acc));
  }
  return out;
}

void PipelineConfig::validate() const {
  quantizer.validate();
  test.validate();
  if (duration == 0) throw DomainError("duration must be >= 1");
  if (sequence_length == 0) throw DomainError("sequence_length must be >= 1");
  if (reconcile_block == 0) throw DomainError("reconcile block must be >= 1");
  if (!(r > 0.0 && r <= 1.0)) throw DomainError("r must lie in (0, 1]");
  if (searches < 1) throw DomainError("searches must be >= 1");
  if (!(channel.ar_coefficient >= 0.0 && channel.ar_coefficient < 1.0)) {
    throw DomainError("ar_coefficient must lie in [0, 1)");
  }
  if (!(channel.noise_sd >= 0.0)) throw DomainError("noise_sd must be >= 0");
  if (!(channel.sample_interval > 0.0)) throw DomainError("sample_interval must be positive");
}

TrialBits trial_bits(const PipelineConfig& cfg, std::size_t count, std::uint64_t seed) {
  const double dt = cfg.channel.sample_interval;
  for (std::size_t d = cfg.duration;; d *= 2) {
    if (d > kMaxDuration) throw InsufficientData("channel produced too few bits");
    const auto pair = simulate_channel(cfg.channel, d, seed);
    TrialBits out;
    if (cfg.quantizer.levels == 2) {
      const auto qa = level_crossing_positions(pair.alice, cfg.quantizer);
      const auto qb = level_crossing_positions(pair.bob, cfg.quantizer);
      std::size_t i = 0;
      std::size_t j = 0;
      std::size_t last = 0;
      while (i < qa.positions.size() && j < qb.positions.size() && out.alice.size() < count) {
        if (qa.positions[i] < qb.positions[j]) {
          ++i;
        } else if (qb.positions[j] < qa.positions[i]) {
          ++j;
        } else {
          out.alice.push_back(qa.bits[i]);
          out.bob.push_back(qb.bits[j]);
          last = qa.positions[i];
          ++i;
          ++j;
        }
      }
      if (out.alice.size() < count) continue;
      out.elapsed = static_cast<double>(last + 1) * dt;
      return out;
    }
    const int width = std::countr_zero(static_cast<unsigned>(cfg.quantizer.levels));
    const std::size_t symbols = (count + width - 1) / width;
    if (symbols * cfg.quantizer.interval > d) continue;
    ChannelTrace ta;
    ChannelTrace tb;
    for (std::size_t i = 0; i < d; i += cfg.quantizer.interval) {
      ta.samples.push_back(pair.alice.samples[i]);
      tb.samples.push_back(pair.bob.samples[i]);
    }
    out.alice = take(mary_quantize(ta, cfg.quantizer.levels), count);
    out.bob = take(mary_quantize(tb, cfg.quantizer.levels), count);
    out.elapsed = static_cast<double>(symbols * cfg.quantizer.interval) * dt;
    return out;
  }
}

PipelineReport run_pipeline(const PipelineConfig& config, std::size_t trials, std::uint64_t seed,
                            unsigned jobs) {
  if (trials == 0) throw DomainError("trials must be >= 1");
  config.validate();
  PipelineReport rep;
  rep.config = config;
  rep.config.trials = trials;
  rep.seed = seed;
  rep.rng_algorithm = std::string(kRngAlgorithm);

  const std::size_t L = config.sequence_length;
  const auto pilot = trial_bits(config, config.pilot_length, derive_seed(seed, kPilotStream));
  rep.rho_estimate = lag1_correlation(pilot.alice);

  TestSpec spec = config.test;
  spec.enforce_min_length = false;
  rep.alpha = spec.alpha;
  rep.r = config.r;
  if (config.optimize) {
    GuidelineProblem prob;
    prob.sequence_length = static_cast<unsigned>(L);
    prob.adversary_searches = std::max<BigUnsigned>(config.searches, 2);
    prob.rho = std::clamp(rep.rho_estimate, -0.999999, 0.999999);
    prob.test = spec;
    prob.alpha_grid = config.alpha_grid;
    prob.r_grid = config.r_grid;
    rep.guideline = optimize(prob, jobs);
    rep.alpha = rep.guideline->alpha_star;
    rep.r = rep.guideline->r_star;
  }
  spec.alpha = rep.alpha;
  rep.key_length = key_length_for(rep.r, L);
  rep.attack_measured = L <= 20;
  const std::uint64_t budget =
      config.searches > BigUnsigned(std::numeric_limits<std::uint64_t>::max())
          ? std::numeric_limits<std::uint64_t>::max()
          : config.searches.convert_to<std::uint64_t>();

  rep.rows.resize(trials);
  std::vector<double> residual(trials, 0.0);
  auto work = [&](std::size_t begin, std::size_t stride) {
    for (std::size_t t = begin; t < trials; t += stride) {
      const std::uint64_t ts = derive_seed(seed, t);
      const auto bits = trial_bits(config, L, ts);
      const auto rec = reconcile(bits.alice, bits.bob, config.reconcile_block);
      BitSequence key;
      if (!rec.retained.empty()) key = privacy_amplify(rec.retained, rep.r, derive_seed(ts, 1));
      const BitSequence& tested = config.position == TestPosition::wireless ? bits.alice : key;
      bool accepted = false;
      if (!tested.empty()) accepted = run_test(spec, tested).verdict == Verdict::accept_h0;
      TrialRecord& row = rep.rows[t];
      row.trial = t;
      row.accepted = accepted;
      row.mismatch = rec.r_mismatch;
      row.eve_hit = rep.attack_measured && accepted && mlts_rank(bits.alice) < budget;
      row.key_bits = accepted ? key.size() : 0;
      row.elapsed = bits.elapsed;
      residual[t] = rec.residual_mismatch;
    }
  };
  jobs = std::max(1u, jobs);
  if (jobs == 1) {
    work(0, 1);
  } else {
    std::vector<std::future<void>> tasks;
    for (unsigned j = 0; j < jobs; ++j) tasks.push_back(std::async(std::launch::async, work, j, jobs));
    for (auto& t : tasks) t.get();
  }

  std::size_t accepted = 0;
  double mismatch = 0.0;
  double residual_sum = 0.0;
  double key_bits = 0.0;
  double elapsed = 0.0;
  for (std::size_t t = 0; t < trials; ++t) {
    const auto& row = rep.rows[t];
    accepted += row.accepted;
    rep.eve_hits += row.eve_hit;
    mismatch += row.mismatch;
    residual_sum += residual[t];
    key_bits += static_cast<double>(row.key_bits);
    elapsed += row.elapsed;
  }
  const double n = static_cast<double>(trials);
  rep.r_mismatch = mismatch / n;
  rep.residual_mismatch = residual_sum / n;
  rep.p_accept_empirical = Probability(static_cast<double>(accepted) / n);
  rep.efficiency = efficiency(rep.p_accept_empirical, rep.r);
  rep.l_efficiency = 1.0 - rep.efficiency;
  rep.key_rate = elapsed > 0.0 ? key_bits / elapsed : 0.0;

  rep.p_rg = rg_success_prob(config.searches, rep.key_length);
  if (rep.attack_measured) {
    rep.eve_hit_rate = static_cast<double>(rep.eve_hits) / n;
    rep.eve_hit_sigma = std::sqrt(rep.p_rg.value() * (1.0 - rep.p_rg.value()) / n);
    rep.eve_advantage = rep.eve_hit_rate - rep.p_rg.value();
    if (rep.eve_hits > 0) rep.l_security = std::log2(rep.eve_hit_rate / rep.p_rg.value());
  }

  if (config.full_scale_length) {
    const unsigned lf = *config.full_scale_length;
    const BigUnsigned nf = config.full_scale_searches.value_or(config.searches);
    const double rho = std::min(std::fabs(rep.rho_estimate), 0.999999);
    const auto p = accept_probability(spec, rho, lf);
    rep.full_scale_p_accept = p.value();
    rep.full_scale = security_report(lf, key_length_for(rep.r, lf), std::max<BigUnsigned>(nf, 2), rho, p);
  }
  return rep;
}

}  // namespace crnd
