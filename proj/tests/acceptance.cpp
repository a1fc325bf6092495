#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include <CLI11.hpp>

#include "crnd/bitmodel.hpp"
#include "crnd/guideline.hpp"
#include "crnd/json_io.hpp"
#include "crnd/mlts.hpp"
#include "crnd/pipeline.hpp"
#include "crnd/randtests.hpp"
#include "crnd/rng.hpp"
#include "oracles.hpp"
#include "specfun_properties.hpp"

using namespace crnd;
namespace fs = std::filesystem;

namespace {

struct Result {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(double v, int prec = 6) {
  std::ostringstream s;
  s.precision(prec);
  s << v;
  return s.str();
}

double mc_accept(const TestSpec& spec, double rho, std::size_t L, std::size_t trials, std::uint64_t seed) {
  std::size_t acc = 0;
  const MarkovBitModel model(rho);
  for (std::size_t t = 0; t < trials; ++t) {
    acc += run_test(spec, generate(model, L, derive_seed(seed, t))).verdict == Verdict::accept_h0;
  }
  return static_cast<double>(acc) / static_cast<double>(trials);
}

Result criterion1() {
  const auto t0 = Clock::now();
  double worst = 0.0;
  int cases = 0;
  for (unsigned L : {8u, 12u, 16u}) {
    for (double rho : {0.0, 0.2, 0.5, 0.9}) {
      for (unsigned n : {0u, 2u, 4u, L / 2}) {
        const double got = mlts_success_prob(L, rho, n).value();
        worst = std::max(worst, std::fabs(got - oracle::mlts_bruteforce(L, rho, n)));
        ++cases;
      }
    }
  }
  const double dt = seconds_since(t0);
  return {worst <= 1e-10 && dt < 60.0,
          std::to_string(cases) + " cases, max |closed form - enumeration| = " + fmt(worst, 3) + ", " +
              fmt(dt, 3) + " s"};
}

Result criterion2() {
  double worst = 0.0;
  for (unsigned L : {8u, 12u, 16u}) {
    for (unsigned n : {0u, 2u, 4u, L / 2}) {
      const double N = searches_for_depth(n, L).convert_to<double>();
      worst = std::max(worst, std::fabs(mlts_success_prob(L, 0.0, n).value() - std::ldexp(N, -int(L))));
    }
  }
  return {worst <= 1e-12, "max |I_MLTS(L, 0, n) - N 2^-L| = " + fmt(worst, 3)};
}

Result criterion3() {
  const double loss = security_loss(Probability(std::ldexp(1.0, -80)), Probability(std::ldexp(1.0, -120))).bits;
  const double coll = collision_prob(32, 32).value();
  const double rg = rg_success_prob(BigUnsigned(1) << 96, 128).value();
  const bool ok = loss == 40.0 && std::fabs(coll / 7.45e-9 - 1.0) <= 0.01 && rg == std::ldexp(1.0, -32);
  return {ok, "security loss " + fmt(loss) + " bits, collision " + fmt(coll, 4) + ", P(RG) = 2^" +
                  fmt(std::log2(rg))};
}

Result criterion4() {
  const auto t0 = Clock::now();
  bool ok = true;
  std::ostringstream d;
  double worst = 0.0;
  for (double alpha : {0.0001, 0.01, 0.05, 0.3}) {
    const double v = accept_probability(TestSpec::defaults(TestKind::frequency, alpha), 0.0, 128).value();
    worst = std::max(worst, std::fabs(v - (1.0 - alpha)));
  }
  ok = ok && worst <= 1e-9;
  d << "rho=0 exactness " << fmt(worst, 3) << ";";
  const std::size_t T = 100000;
  std::uint64_t seed = 4000;
  for (double rho : {0.0, 0.1, 0.3}) {
    for (double alpha : {0.01, 0.05}) {
      const auto spec = TestSpec::defaults(TestKind::frequency, alpha);
      const double a = accept_probability(spec, rho, 128).value();
      const double mc = mc_accept(spec, rho, 128, T, ++seed);
      const double z = (mc - a) / std::sqrt(a * (1.0 - a) / T);
      const bool in = std::fabs(z) <= 3.0;
      ok = ok && in;
      d << " (" << rho << "," << alpha << "): " << fmt(a, 5) << " vs " << fmt(mc, 5) << " z=" << fmt(z, 3)
        << (in ? "" : "!") << " [finite-L exact " << fmt(oracle::frequency_lattice(alpha, rho, 128), 5) << "]";
    }
  }
  const double dt = seconds_since(t0);
  ok = ok && dt < 120.0;
  d << "; " << fmt(dt, 3) << " s";
  return {ok, d.str()};
}

Result criterion5(const fs::path& workdir) {
  Json rows = Json::array();
  std::size_t outside = 0;
  std::uint64_t seed = 5000;
  for (auto k : kAllTestKinds) {
    if (!is_chi_square_family(k)) continue;
    for (double rho : {0.0, 0.2}) {
      const auto spec = TestSpec::defaults(k, 0.05);
      const auto an = accept_analysis(spec, rho, 1024);
      const double mc = mc_accept(spec, rho, 1024, 10000, ++seed);
      const double diff = std::fabs(an.value.value() - mc);
      const bool within = diff <= 0.05;
      outside += !within;
      Json row{{"kind", std::string(to_string(k))},
               {"rho", rho},
               {"alpha", 0.05},
               {"sequence_length", 1024},
               {"trials", 10000},
               {"analytic", an.value.value()},
               {"method", std::string(to_string(an.method))},
               {"monte_carlo", mc},
               {"abs_difference", diff},
               {"within_tolerance", within}};
      if (an.literal) row["literal_formula"] = *an.literal;
      rows.push_back(row);
    }
  }
  const fs::path path = workdir / "chi_square_report.json";
  {
    std::ofstream f(path);
    f << dump(Json{{"tolerance", 0.05}, {"rows", rows}});
  }
  const auto back = read_json_file(path.string());
  std::size_t recorded = 0;
  for (const auto& r : back.at("rows")) recorded += !r.at("within_tolerance").get<bool>();
  const bool ok = back.at("rows").size() == 12 && recorded == outside;
  return {ok, std::to_string(12 - outside) + "/12 within 5 points, " + std::to_string(outside) +
                  " discrepancies recorded in " + path.string()};
}

std::tuple<double, double, double> rescan(const GuidelineProblem& p) {
  const GuidelineEvaluator ev(p);
  const auto alphas = p.alpha_grid.values();
  const auto rs = p.r_grid.values();
  bool any = false;
  std::tuple<double, double, double> best{0.0, 0.0, 0.0};
  for (std::size_t j = rs.size(); j-- > 0;) {
    for (std::size_t i = alphas.size(); i-- > 0;) {
      const auto c = ev.evaluate(alphas[i], rs[j]);
      if (!c.feasible) continue;
      const auto key = std::make_tuple(c.efficiency, -c.alpha, c.r);
      const auto cur = std::make_tuple(std::get<0>(best), -std::get<1>(best), std::get<2>(best));
      if (!any || key > cur) best = {c.efficiency, c.alpha, c.r};
      any = true;
    }
  }
  return best;
}

Result criterion6() {
  std::mt19937_64 g(6);
  const TestKind kinds[] = {TestKind::frequency, TestKind::runs, TestKind::block_frequency, TestKind::longest_run,
                            TestKind::serial2};
  int matched = 0, feasible = 0, bad_slack = 0, non_monotone = 0;
  for (int t = 0; t < 20; ++t) {
    GuidelineProblem p;
    p.sequence_length = std::uniform_int_distribution<unsigned>(128, 320)(g);
    p.adversary_searches = BigUnsigned(1) << std::uniform_int_distribution<unsigned>(1, 100)(g);
    p.rho = std::uniform_real_distribution<double>(-0.9, 0.9)(g);
    p.test = TestSpec::defaults(kinds[t % 5]);
    p.alpha_grid = {0.0001, 0.3, 0.005};
    p.r_grid = {0.1, 1.0, 0.02};
    const auto s = optimize(p);
    if (s.feasible) {
      ++feasible;
      bad_slack += s.constraint_slack < 0.0;
      const auto [e, a, r] = rescan(p);
      matched += e == s.efficiency && a == s.alpha_star && r == s.r_star;
    } else {
      const GuidelineEvaluator ev(p);
      bool none = true;
      for (double a : p.alpha_grid.values())
        for (double r : p.r_grid.values()) none = none && !ev.evaluate(a, r).feasible;
      matched += none;
    }
    non_monotone += !s.frontier_monotone;
  }
  return {matched == 20 && bad_slack == 0 && non_monotone == 0,
          std::to_string(matched) + "/20 match the re-scan (" + std::to_string(feasible) + " feasible), " +
              std::to_string(bad_slack) + " negative slack, " + std::to_string(non_monotone) +
              " non-monotone frontiers"};
}

Result criterion7() {
  PipelineConfig c;
  c.channel.ar_coefficient = 0.9;
  c.channel.noise_sd = 0.1;
  c.quantizer = {0.0, 0.0};
  c.sequence_length = 16;
  c.searches = 256;
  c.test = TestSpec::defaults(TestKind::frequency, 0.0001);
  c.r = 1.0;
  const std::size_t T = 10000;
  const auto loose = run_pipeline(c, T, 7001, 4);
  c.optimize = true;
  const auto opt = run_pipeline(c, T, 7001, 4);
  const bool ok = loose.attack_measured && opt.attack_measured && loose.eve_advantage > 0.0 &&
                  opt.eve_advantage <= 3.0 * opt.eve_hit_sigma;
  std::ostringstream d;
  d << "loose (alpha 0.0001, r 1): hit " << fmt(loose.eve_hit_rate, 4) << " vs P(RG) " << fmt(loose.p_rg.value(), 4)
    << ", advantage " << fmt(loose.eve_advantage, 4) << "; optimized (alpha " << opt.alpha << ", r " << opt.r
    << "): hit " << fmt(opt.eve_hit_rate, 4) << " vs P(RG) " << fmt(opt.p_rg.value(), 4) << ", advantage "
    << fmt(opt.eve_advantage, 4) << " (3 sigma " << fmt(3.0 * opt.eve_hit_sigma, 3) << ")";
  return {ok, d.str()};
}

Result criterion8() {
  auto spec = TestSpec::defaults(TestKind::frequency, 0.01);
  spec.enforce_min_length = false;
  const double p = run_test(spec, BitSequence::from_string("1011010101")).p_value.value();
  const double oracle = std::erfc(0.6325 / std::sqrt(2.0));
  bool ok = std::fabs(p - 0.5271) <= 1e-4 && std::fabs(p - oracle) <= 1e-4;
  std::vector<int> acc(std::size(kAllTestKinds), 0);
  int joint = 0;
  for (std::uint64_t s = 0; s < 100; ++s) {
    const auto x = generate(MarkovBitModel(0.0), 1000000, derive_seed(8000, s));
    bool all = true;
    for (std::size_t i = 0; i < acc.size(); ++i) {
      const bool a = run_test(TestSpec::defaults(kAllTestKinds[i], 0.01), x).verdict == Verdict::accept_h0;
      acc[i] += a;
      all = all && a;
    }
    joint += all;
  }
  std::ostringstream d;
  d << "P(1011010101) = " << fmt(p, 6) << "; accepts per test:";
  for (std::size_t i = 0; i < acc.size(); ++i) {
    d << " " << to_string(kAllTestKinds[i]) << "=" << acc[i];
    ok = ok && acc[i] >= 97;
  }
  d << "; all nine jointly " << joint << "/100";
  return {ok, d.str()};
}

Result criterion9() {
  const auto t0 = Clock::now();
  const std::size_t n = 10000;
  const std::size_t fails = props::erfc_round_trip(n, 91) + props::beta_reflection(n, 92) +
                            props::binomial_identity(n, 93) + props::gamma_tails(n, 94);
  const double dt = seconds_since(t0);
  return {fails == 0 && dt < 30.0, std::to_string(fails) + " failures over 4 x 10^4 inputs, " + fmt(dt, 3) + " s"};
}

struct Captured {
  int code = -1;
  std::string out;
};

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

std::string quote(const std::string& s) { return "'" + s + "'"; }

Captured run_cli(const std::string& cli, const std::string& args, const fs::path& out) {
  const std::string cmd = quote(cli) + " " + args + " > " + quote(out.string()) + " 2> /dev/null";
  Captured c;
  c.code = std::system(cmd.c_str());
  c.out = slurp(out);
  return c;
}

Result criterion10(const std::string& cli, const fs::path& workdir) {
  const fs::path dir = workdir / "acceptance_cli";
  fs::create_directories(dir);
  const auto p = [&](const char* name) { return quote((dir / name).string()); };
  {
    std::ofstream f(dir / "prob.json");
    f << R"({"sequence_length":128,"adversary_searches":"2^24","rho":0.3,"test":{"kind":"runs"},)"
      << R"("alpha_grid":{"lo":0.0001,"hi":0.3,"step":0.01},"r_grid":{"lo":0.1,"hi":1.0,"step":0.05},)"
      << R"("accept_source":"monte_carlo","mc_trials":300})";
  }
  {
    std::ofstream f(dir / "sim.json");
    f << R"({"channel":{"ar_coefficient":0.8,"noise_sd":0.1},"test":{"kind":"frequency","alpha":0.01},)"
      << R"("guideline":{"optimize":true,"pilot_length":5000,"alpha_grid":{"lo":0.0001,"hi":0.3,"step":0.02},)"
      << R"("r_grid":{"lo":0.1,"hi":1.0,"step":0.1}},"adversary":{"searches":256,"full_scale_length":128},"trials":200})";
  }
  if (std::system((quote(cli) + " gen --L 20000 --rho 0.1 --seed 3 --out " + p("seq.txt") + " > /dev/null 2>&1").c_str()) != 0) {
    return {false, "could not prepare input sequence"};
  }
  const std::vector<std::pair<std::string, std::string>> cases = {
      {"gen", "gen --L 4096 --rho 0.3 --seed 7 --trials 2"},
      {"gen-channel", "gen --kind channel --L 512 --m-levels 4 --seed 7 --config " + p("sim.json")},
      {"test", "test --in " + p("seq.txt")},
      {"attack", "attack --L 14 --rho 0.4 --N 500 --M 10 --kind runs --trials 300 --seed 7"},
      {"optimize", "optimize --config " + p("prob.json") + " --seed 7 --jobs 2"},
      {"simulate", "simulate --config " + p("sim.json") + " --seed 7 --jobs 2"},
      {"simulate-csv", "simulate --config " + p("sim.json") + " --seed 7 --format csv"},
  };
  int same = 0;
  std::string failed;
  for (const auto& [name, args] : cases) {
    const auto a = run_cli(cli, args, dir / (name + ".1"));
    const auto b = run_cli(cli, args, dir / (name + ".2"));
    const bool ok = a.code == 0 && b.code == 0 && !a.out.empty() && a.out == b.out;
    same += ok;
    if (!ok) failed += " " + name;
  }
  return {same == static_cast<int>(cases.size()),
          std::to_string(same) + "/" + std::to_string(cases.size()) + " invocations byte-identical" +
              (failed.empty() ? "" : "; differing:" + failed)};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria"};
  std::string cli;
  std::string workdir = ".";
  app.add_option("--cli", cli, "Path to the crnd executable")->required();
  app.add_option("--workdir", workdir, "Scratch directory");
  CLI11_PARSE(app, argc, argv);
  fs::create_directories(workdir);

  const std::vector<std::function<Result()>> criteria = {
      criterion1, criterion2, criterion3, criterion4, [&] { return criterion5(workdir); },
      criterion6, criterion7, criterion8, criterion9, [&] { return criterion10(cli, workdir); },
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Result r;
    try {
      r = criteria[i]();
    } catch (const std::exception& e) {
      r = {false, std::string("exception: ") + e.what()};
    }
    failed += !r.pass;
    std::cout << "criterion " << i + 1 << ": " << (r.pass ? "PASS" : "FAIL") << " - " << r.detail << std::endl;
  }
  std::cout << (criteria.size() - failed) << "/" << criteria.size() << " criteria pass" << std::endl;
  return failed == 0 ? 0 : 1;
}
