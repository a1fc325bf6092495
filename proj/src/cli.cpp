#include "crnd/cli.hpp"

#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>

#include <CLI11.hpp>

#include "crnd/bitmodel.hpp"
#include "crnd/errors.hpp"
#include "crnd/json_io.hpp"
#include "crnd/rng.hpp"

namespace crnd {

namespace {

struct Options {
  std::string kind;
  std::optional<double> alpha;
  std::optional<double> rho;
  std::optional<unsigned> length;
  std::optional<unsigned> key_length;
  std::optional<std::string> searches;
  std::optional<unsigned> depth;
  int m_levels = 2;
  std::string in;
  std::string out;
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> trials;
  unsigned jobs = 1;
  std::optional<int> position;
  std::string format = "json";
};

std::uint64_t resolve_seed(const Options& o, std::ostream& err) {
  if (o.seed) return *o.seed;
  std::random_device rd;
  const std::uint64_t seed = (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
  err << "seed: " << seed << "\n";
  return seed;
}

void write_output(const Options& o, const std::string& text, std::ostream& out) {
  if (o.out.empty()) {
    out << text;
    return;
  }
  std::ofstream f(o.out, std::ios::binary);
  if (!f) throw InputError("cannot write " + o.out);
  f << text;
}

int cmd_gen(const Options& o, std::ostream& out, std::ostream& err) {
  const std::uint64_t seed = resolve_seed(o, err);
  const std::size_t length = o.length.value_or(1024);
  const std::size_t records = o.trials.value_or(1);
  const double rho = o.rho.value_or(0.0);
  std::vector<BitSequence> seqs;
  const std::string kind = o.kind.empty() ? "markov" : o.kind;
  for (std::size_t i = 0; i < records; ++i) {
    const std::uint64_t s = derive_seed(seed, i);
    if (kind == "markov") {
      if (o.m_levels == 2) {
        seqs.push_back(generate(MarkovBitModel(rho), length, s));
      } else {
        const auto model = transition_matrix(o.m_levels, rho);
        const std::size_t symbols = (length + model.bits_per_level - 1) / model.bits_per_level;
        seqs.push_back(encode_states(generate_states(model, symbols, s), model.bits_per_level).slice(0, length));
      }
    } else if (kind == "channel") {
      PipelineConfig cfg;
      if (!o.config.empty()) read_json_file(o.config).get_to(cfg);
      if (o.m_levels != 2) cfg.quantizer.levels = o.m_levels;
      cfg.validate();
      seqs.push_back(trial_bits(cfg, length, s).alice);
    } else {
      throw InputError("gen --kind must be markov or channel");
    }
  }
  std::ostringstream text;
  write_text(text, seqs);
  if (o.out.empty()) {
    out << text.str();
  } else {
    write_output(o, text.str(), out);
    Json j{{"records", records}, {"length", length}, {"kind", kind}, {"rho", rho},
           {"m_levels", o.m_levels}, {"seed", seed}, {"out", o.out}};
    out << dump(j);
  }
  err << "generated " << records << " x " << length << " bits (" << kind << ", seed " << seed << ")\n";
  return kExitOk;
}

int cmd_test(const Options& o, std::ostream& out, std::ostream& err) {
  if (o.in.empty()) throw InputError("test requires --in");
  const auto seqs = read_bits_file(o.in);
  if (seqs.empty()) throw InputError(o.in + ": no records");
  std::vector<TestKind> kinds;
  if (o.kind.empty() || o.kind == "all") {
    kinds.assign(std::begin(kAllTestKinds), std::end(kAllTestKinds));
  } else {
    kinds.push_back(parse_test_kind(o.kind));
  }
  Json arr = Json::array();
  std::size_t accepted = 0;
  for (const auto& x : seqs) {
    for (auto kind : kinds) {
      const auto spec = TestSpec::defaults(kind, o.alpha.value_or(0.01));
      const auto outcome = run_test(spec, x);
      accepted += outcome.verdict == Verdict::accept_h0;
      arr.push_back(outcome);
    }
  }
  const Json doc = arr.size() == 1 ? arr.front() : arr;
  write_output(o, dump(doc), out);
  err << accepted << " of " << arr.size() << " outcomes accept H0\n";
  return kExitOk;
}

int cmd_attack(const Options& o, std::ostream& out, std::ostream& err) {
  if (!o.length) throw InputError("attack requires --L");
  const unsigned L = *o.length;
  const double rho = o.rho.value_or(0.0);
  Json j{{"L", L}, {"rho", rho}};
  MltsEstimate est;
  BigUnsigned searches;
  if (o.depth) {
    const auto budget = budget_from_depth(*o.depth, L);
    searches = budget.searches;
    j["depth"] = budget.depth;
    est = o.m_levels == 2 ? mlts_estimate(L, rho, *o.depth) : MltsEstimate{};
  } else if (o.searches) {
    searches = parse_big(*o.searches);
    j["depth"] = budget_from_searches(searches, L).depth;
    est = mlts_estimate_for_searches(L, rho, searches);
  } else {
    throw InputError("attack requires --n or --N");
  }
  if (o.m_levels != 2) {
    if (!o.depth) throw InputError("m-ary attack requires --n");
    const int m = bits_per_level(o.m_levels);
    est = mlts_estimate_mary(L, rho, *o.depth, static_cast<unsigned>(m));
    j["m_levels"] = o.m_levels;
  }
  j["searches"] = big_to_string(searches);
  j["i_mlts"] = est.value.value();
  j["raw"] = est.raw;
  j["clamped"] = est.clamped;
  if (o.key_length) {
    Probability p_accept(1.0);
    if (!o.kind.empty()) {
      const auto spec = TestSpec::defaults(parse_test_kind(o.kind), o.alpha.value_or(0.01));
      p_accept = accept_probability(spec, rho, L);
      j["p_accept"] = p_accept.value();
    }
    j["security"] = security_report(L, *o.key_length, searches, rho, p_accept);
  }
  if (o.trials) {
    if (L > MltsEnumerator::kMaxLength) throw ScaleError("enumerated attack requires L <= 26");
    const std::uint64_t seed = resolve_seed(o, err);
    const std::uint64_t budget = searches > BigUnsigned(std::numeric_limits<std::uint64_t>::max())
                                     ? std::numeric_limits<std::uint64_t>::max()
                                     : searches.convert_to<std::uint64_t>();
    std::size_t hits = 0;
    for (std::size_t t = 0; t < *o.trials; ++t) {
      const auto x = generate(MarkovBitModel(rho), L, derive_seed(seed, t));
      hits += mlts_rank(x) < budget;
    }
    j["enumerated"] = Json{{"trials", *o.trials},
                           {"hits", hits},
                           {"hit_rate", static_cast<double>(hits) / static_cast<double>(*o.trials)},
                           {"seed", seed}};
  }
  write_output(o, dump(j), out);
  err << "I_MLTS = " << est.value.value() << "\n";
  return kExitOk;
}

int cmd_optimize(const Options& o, std::ostream& out, std::ostream& err) {
  GuidelineProblem prob;
  if (!o.config.empty()) {
    read_json_file(o.config).get_to(prob);
  }
  if (o.length) prob.sequence_length = *o.length;
  if (o.searches) prob.adversary_searches = parse_big(*o.searches);
  if (!o.kind.empty()) prob.test = TestSpec::defaults(parse_test_kind(o.kind));
  if (o.rho) prob.rho = *o.rho;
  if (!o.in.empty()) {
    const auto seqs = read_bits_file(o.in);
    if (seqs.empty()) throw InputError(o.in + ": no records");
    prob.rho = lag1_correlation(seqs.front());
    err << "rho estimated from " << o.in << ": " << prob.rho << "\n";
  }
  if (o.seed) prob.mc_seed = *o.seed;
  if (o.trials) prob.mc_trials = *o.trials;
  const auto sol = optimize(prob, o.jobs);
  write_output(o, dump(Json(sol)), out);
  err << (sol.feasible ? "feasible" : "infeasible") << ": alpha* = " << sol.alpha_star
      << ", r* = " << sol.r_star << ", E = " << sol.efficiency << "\n";
  return kExitOk;
}

int cmd_simulate(const Options& o, std::ostream& out, std::ostream& err) {
  PipelineConfig cfg;
  if (!o.config.empty()) read_json_file(o.config).get_to(cfg);
  if (o.position) cfg.position = static_cast<TestPosition>(*o.position);
  if (!o.kind.empty()) cfg.test = TestSpec::defaults(parse_test_kind(o.kind), cfg.test.alpha);
  if (o.alpha) cfg.test.alpha = *o.alpha;
  if (o.length) cfg.sequence_length = *o.length;
  if (o.searches) cfg.searches = parse_big(*o.searches);
  if (o.m_levels != 2) cfg.quantizer.levels = o.m_levels;
  const std::size_t trials = o.trials.value_or(cfg.trials);
  const std::uint64_t seed = resolve_seed(o, err);
  const auto rep = run_pipeline(cfg, trials, seed, o.jobs);
  write_output(o, o.format == "csv" ? report_csv(rep) : dump(Json(rep)), out);
  err << "accept " << rep.p_accept_empirical.value() << ", mismatch " << rep.r_mismatch
      << ", efficiency " << rep.efficiency << ", eve hits " << rep.eve_hits << "/" << trials << "\n";
  return kExitOk;
}

}  // namespace

int dispatch(const std::vector<std::string>& argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Randomness testing for wireless-channel key generation", "crnd"};
  app.require_subcommand(1);
  Options o;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--kind", o.kind, "Test kind, 'all', or generator kind");
    sub->add_option("--alpha", o.alpha, "P-value threshold");
    sub->add_option("--rho", o.rho, "Lag-1 correlation");
    sub->add_option("--L", o.length, "Wireless sequence length");
    sub->add_option("--M", o.key_length, "Key length");
    sub->add_option("--N", o.searches, "Adversary searches (decimal or 2^k)");
    sub->add_option("--n", o.depth, "Tree depth");
    sub->add_option("--m-levels", o.m_levels, "Quantization levels")->check(CLI::IsMember({2, 4, 8}));
    sub->add_option("--in", o.in, "Input bit-sequence file");
    sub->add_option("--out", o.out, "Output file");
    sub->add_option("--config", o.config, "JSON config");
    sub->add_option("--seed", o.seed, "Master seed");
    sub->add_option("--trials", o.trials, "Trial or record count");
    sub->add_option("--jobs", o.jobs, "Worker threads")->check(CLI::PositiveNumber);
    sub->add_option("--position", o.position, "Test position")->check(CLI::IsMember({1, 2}));
    sub->add_option("--format", o.format, "Report format")->check(CLI::IsMember({"json", "csv"}));
  };
  auto* gen = app.add_subcommand("gen", "Write generated bit sequences");
  auto* test = app.add_subcommand("test", "Run randomness tests on a sequence file");
  auto* attack = app.add_subcommand("attack", "MLTS success probability");
  auto* opt = app.add_subcommand("optimize", "Solve a guideline problem");
  auto* sim = app.add_subcommand("simulate", "Run the key-generation pipeline");
  for (auto* s : {gen, test, attack, opt, sim}) common(s);

  std::vector<const char*> raw;
  for (const auto& a : argv) raw.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(raw.size()), raw.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n" << app.help();
    return kExitUsage;
  }

  try {
    if (gen->parsed()) return cmd_gen(o, out, err);
    if (test->parsed()) return cmd_test(o, out, err);
    if (attack->parsed()) return cmd_attack(o, out, err);
    if (opt->parsed()) return cmd_optimize(o, out, err);
    return cmd_simulate(o, out, err);
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return kExitDomain;
  } catch (const std::domain_error& e) {
    err << "error: " << e.what() << "\n";
    return kExitDomain;
  } catch (const std::runtime_error& e) {
    err << "error: " << e.what() << "\n";
    return kExitDomain;
  } catch (const std::logic_error& e) {
    err << "error: " << e.what() << "\n";
    return kExitDomain;
  } catch (const nlohmann::json::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitDomain;
  }
}

}  // namespace crnd
