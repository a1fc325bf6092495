#include "crnd/json_io.hpp"

#include <fstream>
#include <sstream>

#include "crnd/errors.hpp"

namespace crnd {

namespace {

template <class T>
void get_opt(const Json& j, const char* key, T& out) {
  if (j.contains(key)) j.at(key).get_to(out);
}

Json optional_number(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

std::string format_double(double v) {
  Json j = v;
  return j.dump();
}

}  // namespace

BigUnsigned big_from_json(const Json& j) {
  if (j.is_number_unsigned()) return BigUnsigned(j.get<std::uint64_t>());
  if (j.is_number_integer() && j.get<std::int64_t>() >= 0) return BigUnsigned(j.get<std::int64_t>());
  if (j.is_string()) return parse_big(j.get<std::string>());
  throw InputError("expected an unsigned integer or a decimal string");
}

std::string big_to_string(const BigUnsigned& v) { return v.str(); }

void to_json(Json& j, const TestSpec& spec) {
  j = Json{{"kind", std::string(to_string(spec.kind))}, {"alpha", spec.alpha}};
  switch (spec.kind) {
    case TestKind::block_frequency:
      j["block_size"] = spec.block_size;
      break;
    case TestKind::non_overlapping_template:
      j["template"] = spec.templ.to_string();
      j["template_blocks"] = spec.template_blocks;
      break;
    case TestKind::approximate_entropy:
    case TestKind::serial1:
    case TestKind::serial2:
      j["pattern_order"] = spec.order();
      break;
    default:
      break;
  }
  j["enforce_min_length"] = spec.enforce_min_length;
}

void from_json(const Json& j, TestSpec& spec) {
  const auto kind = parse_test_kind(j.at("kind").get<std::string>());
  spec = TestSpec::defaults(kind, j.value("alpha", 0.01));
  get_opt(j, "block_size", spec.block_size);
  if (j.contains("template")) spec.templ = BitSequence::from_string(j.at("template").get<std::string>());
  get_opt(j, "template_blocks", spec.template_blocks);
  get_opt(j, "pattern_order", spec.pattern_order);
  get_opt(j, "enforce_min_length", spec.enforce_min_length);
}

void to_json(Json& j, const TestOutcome& outcome) {
  Json params = outcome.spec;
  params.erase("kind");
  j = Json{{"kind", std::string(to_string(outcome.spec.kind))},
           {"params", params},
           {"statistic", outcome.statistic},
           {"p_value", outcome.p_value.value()},
           {"verdict", std::string(to_string(outcome.verdict))},
           {"accepted", outcome.verdict == Verdict::accept_h0},
           {"degenerate", outcome.degenerate}};
  if (!outcome.note.empty()) j["note"] = outcome.note;
}

void to_json(Json& j, const Grid& grid) { j = Json{{"lo", grid.lo}, {"hi", grid.hi}, {"step", grid.step}}; }

void from_json(const Json& j, Grid& grid) {
  get_opt(j, "lo", grid.lo);
  get_opt(j, "hi", grid.hi);
  get_opt(j, "step", grid.step);
}

void to_json(Json& j, const GuidelineProblem& prob) {
  j = Json{{"sequence_length", prob.sequence_length},
           {"adversary_searches", big_to_string(prob.adversary_searches)},
           {"rho", prob.rho},
           {"test", prob.test},
           {"alpha_grid", prob.alpha_grid},
           {"r_grid", prob.r_grid},
           {"accept_source", prob.accept_source == AcceptSource::analytic ? "analytic" : "monte_carlo"}};
  if (prob.accept_source == AcceptSource::monte_carlo) {
    j["mc_trials"] = prob.mc_trials;
    j["mc_seed"] = prob.mc_seed;
  }
}

void from_json(const Json& j, GuidelineProblem& prob) {
  prob = GuidelineProblem{};
  j.at("sequence_length").get_to(prob.sequence_length);
  prob.adversary_searches = big_from_json(j.at("adversary_searches"));
  get_opt(j, "rho", prob.rho);
  if (j.contains("test")) j.at("test").get_to(prob.test);
  get_opt(j, "alpha_grid", prob.alpha_grid);
  get_opt(j, "r_grid", prob.r_grid);
  if (j.contains("accept_source")) {
    const auto src = j.at("accept_source").get<std::string>();
    if (src == "analytic") prob.accept_source = AcceptSource::analytic;
    else if (src == "monte_carlo") prob.accept_source = AcceptSource::monte_carlo;
    else throw InputError("accept_source must be analytic or monte_carlo");
  }
  get_opt(j, "mc_trials", prob.mc_trials);
  get_opt(j, "mc_seed", prob.mc_seed);
}

void to_json(Json& j, const GuidelineSolution& sol) {
  j = Json{{"alpha_star", sol.alpha_star},
           {"r_star", sol.r_star},
           {"key_length", sol.key_length},
           {"efficiency", sol.efficiency},
           {"p_accept", sol.p_accept.value()},
           {"i_mlts", sol.i_mlts.value()},
           {"constraint_slack", sol.constraint_slack},
           {"feasible", sol.feasible},
           {"frontier_monotone", sol.frontier_monotone},
           {"r_ceiling_nondecreasing", sol.r_ceiling_nondecreasing},
           {"cells", sol.cells},
           {"feasible_cells", sol.feasible_cells}};
}

void to_json(Json& j, const SecurityReport& rep) {
  j = Json{{"p_eve", rep.p_eve.value()},
           {"p_rg", rep.p_rg.value()},
           {"security_loss_bits", rep.security_loss_bits},
           {"p_collision", rep.p_collision.value()},
           {"trivial_strategy", rep.trivial_strategy},
           {"mlts_clamped", rep.mlts_clamped}};
}

void to_json(Json& j, const PipelineConfig& cfg) {
  Json test = cfg.test;
  test["position"] = static_cast<int>(cfg.position);
  test["sequence_length"] = cfg.sequence_length;
  Json adversary{{"searches", big_to_string(cfg.searches)}};
  if (cfg.full_scale_length) adversary["full_scale_length"] = *cfg.full_scale_length;
  if (cfg.full_scale_searches) adversary["full_scale_searches"] = big_to_string(*cfg.full_scale_searches);
  j = Json{{"channel",
            {{"ar_coefficient", cfg.channel.ar_coefficient},
             {"noise_sd", cfg.channel.noise_sd},
             {"sample_interval", cfg.channel.sample_interval},
             {"duration", cfg.duration}}},
           {"quantizer",
            {{"q_plus", cfg.quantizer.q_plus},
             {"q_minus", cfg.quantizer.q_minus},
             {"levels", cfg.quantizer.levels},
             {"interval", cfg.quantizer.interval},
             {"reconcile_block", cfg.reconcile_block}}},
           {"test", test},
           {"guideline",
            {{"optimize", cfg.optimize},
             {"r", cfg.r},
             {"alpha_grid", cfg.alpha_grid},
             {"r_grid", cfg.r_grid},
             {"pilot_length", cfg.pilot_length}}},
           {"adversary", adversary},
           {"trials", cfg.trials}};
}

void from_json(const Json& j, PipelineConfig& cfg) {
  cfg = PipelineConfig{};
  if (j.contains("channel")) {
    const auto& c = j.at("channel");
    get_opt(c, "ar_coefficient", cfg.channel.ar_coefficient);
    get_opt(c, "noise_sd", cfg.channel.noise_sd);
    get_opt(c, "sample_interval", cfg.channel.sample_interval);
    get_opt(c, "duration", cfg.duration);
  }
  if (j.contains("quantizer")) {
    const auto& q = j.at("quantizer");
    get_opt(q, "q_plus", cfg.quantizer.q_plus);
    get_opt(q, "q_minus", cfg.quantizer.q_minus);
    get_opt(q, "levels", cfg.quantizer.levels);
    get_opt(q, "interval", cfg.quantizer.interval);
    get_opt(q, "reconcile_block", cfg.reconcile_block);
  }
  if (j.contains("test")) {
    const auto& t = j.at("test");
    t.get_to(cfg.test);
    if (t.contains("position")) {
      const int pos = t.at("position").get<int>();
      if (pos != 1 && pos != 2) throw InputError("test.position must be 1 or 2");
      cfg.position = static_cast<TestPosition>(pos);
    }
    get_opt(t, "sequence_length", cfg.sequence_length);
  }
  if (j.contains("guideline")) {
    const auto& g = j.at("guideline");
    get_opt(g, "optimize", cfg.optimize);
    get_opt(g, "r", cfg.r);
    get_opt(g, "alpha_grid", cfg.alpha_grid);
    get_opt(g, "r_grid", cfg.r_grid);
    get_opt(g, "pilot_length", cfg.pilot_length);
  }
  if (j.contains("adversary")) {
    const auto& a = j.at("adversary");
    if (a.contains("searches")) cfg.searches = big_from_json(a.at("searches"));
    if (a.contains("full_scale_length")) cfg.full_scale_length = a.at("full_scale_length").get<unsigned>();
    if (a.contains("full_scale_searches")) cfg.full_scale_searches = big_from_json(a.at("full_scale_searches"));
  }
  get_opt(j, "trials", cfg.trials);
}

void to_json(Json& j, const PipelineReport& rep) {
  j = Json{{"r_mismatch", rep.r_mismatch},
           {"residual_mismatch", rep.residual_mismatch},
           {"p_accept_empirical", rep.p_accept_empirical.value()},
           {"efficiency", rep.efficiency},
           {"l_efficiency", rep.l_efficiency},
           {"l_security", optional_number(rep.l_security)},
           {"key_rate", rep.key_rate},
           {"alpha", rep.alpha},
           {"r", rep.r},
           {"key_length", rep.key_length},
           {"rho_estimate", rep.rho_estimate}};
  j["guideline"] = rep.guideline ? Json(*rep.guideline) : Json(nullptr);
  j["attack"] = Json{{"measured", rep.attack_measured},
                     {"eve_hits", rep.eve_hits},
                     {"eve_hit_rate", rep.eve_hit_rate},
                     {"eve_hit_sigma", rep.eve_hit_sigma},
                     {"p_rg", rep.p_rg.value()},
                     {"eve_advantage", rep.eve_advantage}};
  if (rep.full_scale) {
    Json fs = *rep.full_scale;
    fs["p_accept"] = *rep.full_scale_p_accept;
    j["full_scale"] = fs;
  } else {
    j["full_scale"] = nullptr;
  }
  j["seed"] = rep.seed;
  j["rng_algorithm"] = rep.rng_algorithm;
  j["config"] = rep.config;
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

std::string report_csv(const PipelineReport& rep) {
  std::ostringstream out;
  out << "trial,accepted,mismatch,eve_hit,key_bits,elapsed\n";
  for (const auto& row : rep.rows) {
    out << row.trial << ',' << (row.accepted ? 1 : 0) << ',' << format_double(row.mismatch) << ','
        << (row.eve_hit ? 1 : 0) << ',' << row.key_bits << ',' << format_double(row.elapsed) << '\n';
  }
  return out.str();
}

Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path);
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw InputError(path + ": " + e.what());
  }
}

}  // namespace crnd
