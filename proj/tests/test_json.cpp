#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <sstream>

#include "crnd/errors.hpp"
#include "crnd/json_io.hpp"

using namespace crnd;

TEST_CASE("test spec round trip") {
  for (auto k : kAllTestKinds) {
    auto s = TestSpec::defaults(k, 0.037);
    s.enforce_min_length = false;
    const Json j = s;
    CHECK(j.at("kind") == std::string(to_string(k)));
    const auto back = j.get<TestSpec>();
    CHECK(back.kind == s.kind);
    CHECK(back.alpha == s.alpha);
    CHECK(back.block_size == s.block_size);
    CHECK(back.templ == s.templ);
    CHECK(back.template_blocks == s.template_blocks);
    CHECK(back.order() == s.order());
    CHECK(back.enforce_min_length == s.enforce_min_length);
    CHECK(Json(back) == j);
  }
  const auto custom = Json::parse(R"({"kind":"non_overlapping_template","template":"0011","alpha":0.2})").get<TestSpec>();
  CHECK(custom.templ == BitSequence::from_string("0011"));
  CHECK_THROWS(Json::parse(R"({"kind":"rank"})").get<TestSpec>());
}

TEST_CASE("test outcome record") {
  const auto o = run_test(TestSpec::defaults(TestKind::frequency, 0.01), BitSequence::from_string(std::string(100, '1')));
  const Json j = o;
  std::vector<std::string> keys;
  for (auto it = j.begin(); it != j.end(); ++it) keys.push_back(it.key());
  CHECK(keys == std::vector<std::string>{"kind", "params", "statistic", "p_value", "verdict", "accepted", "degenerate"});
  CHECK(j.at("verdict") == "accept_h1");
  CHECK_FALSE(j.at("params").contains("kind"));
  CHECK(j.at("params").at("alpha") == 0.01);
}

TEST_CASE("guideline problem and solution") {
  const auto j = Json::parse(R"({"sequence_length":256,"adversary_searches":"2^100","rho":0.4,
    "test":{"kind":"runs"},"alpha_grid":{"lo":0.001,"hi":0.2,"step":0.01}})");
  const auto p = j.get<GuidelineProblem>();
  CHECK(p.sequence_length == 256);
  CHECK(p.adversary_searches == BigUnsigned(1) << 100);
  CHECK(p.test.kind == TestKind::runs);
  CHECK(p.alpha_grid.hi == 0.2);
  CHECK(p.r_grid.lo == 0.1);
  const Json again = p;
  CHECK(again.at("adversary_searches") == (BigUnsigned(1) << 100).str());
  const auto p2 = again.get<GuidelineProblem>();
  CHECK(Json(p2) == again);
  CHECK(Json::parse(R"({"sequence_length":8,"adversary_searches":16})").get<GuidelineProblem>().adversary_searches == 16);
  CHECK_THROWS_AS(Json::parse(R"({"sequence_length":8,"adversary_searches":-3})").get<GuidelineProblem>(), InputError);
  CHECK_THROWS_AS(
      Json::parse(R"({"sequence_length":8,"adversary_searches":4,"accept_source":"oracle"})").get<GuidelineProblem>(),
      InputError);

  auto small = p;
  small.sequence_length = 128;
  small.adversary_searches = 1 << 12;
  small.alpha_grid = {0.0001, 0.3, 0.05};
  small.r_grid = {0.1, 1.0, 0.1};
  const Json s = optimize(small);
  for (const char* k : {"alpha_star", "r_star", "key_length", "efficiency", "p_accept", "i_mlts",
                        "constraint_slack", "feasible"}) {
    CHECK(s.contains(k));
  }
}

TEST_CASE("pipeline config round trip") {
  PipelineConfig c;
  c.channel = {0.7, 0.05, 0.5};
  c.duration = 777;
  c.quantizer = {0.3, -0.2, 4, 2};
  c.reconcile_block = 16;
  c.test = TestSpec::defaults(TestKind::serial2, 0.02);
  c.position = TestPosition::key;
  c.sequence_length = 64;
  c.r = 0.75;
  c.optimize = true;
  c.alpha_grid = {0.001, 0.2, 0.01};
  c.r_grid = {0.2, 1.0, 0.2};
  c.pilot_length = 5000;
  c.searches = BigUnsigned(1) << 70;
  c.full_scale_length = 256;
  c.full_scale_searches = BigUnsigned(1) << 90;
  c.trials = 123;
  const Json j = c;
  for (const char* k : {"channel", "quantizer", "test", "guideline", "adversary", "trials"}) CHECK(j.contains(k));
  const auto b = j.get<PipelineConfig>();
  CHECK(Json(b) == j);
  CHECK(b.searches == c.searches);
  CHECK(*b.full_scale_searches == *c.full_scale_searches);
  CHECK(b.position == TestPosition::key);

  const auto partial = Json::parse(R"({"channel":{"ar_coefficient":0.9}})").get<PipelineConfig>();
  CHECK(partial.channel.ar_coefficient == 0.9);
  CHECK(partial.sequence_length == PipelineConfig{}.sequence_length);
  CHECK_THROWS_AS(Json::parse(R"({"test":{"kind":"frequency","position":3}})").get<PipelineConfig>(), InputError);
}

TEST_CASE("pipeline report and csv") {
  PipelineConfig c;
  c.pilot_length = 2000;
  c.channel.ar_coefficient = 0.4;
  c.test.enforce_min_length = false;
  const auto rep = run_pipeline(c, 7, 3);
  const Json j = rep;
  for (const char* k : {"r_mismatch", "p_accept_empirical", "l_security", "l_efficiency", "key_rate", "seed",
                        "rng_algorithm", "config", "attack"}) {
    CHECK(j.contains(k));
  }
  CHECK(j.at("seed") == 3);
  CHECK(j.at("config").at("trials") == 7);
  const auto csv = report_csv(rep);
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  CHECK(line == "trial,accepted,mismatch,eve_hit,key_bits,elapsed");
  int rows = 0;
  while (std::getline(in, line)) {
    ++rows;
    CHECK(std::count(line.begin(), line.end(), ',') == 5);
  }
  CHECK(rows == 7);
  CHECK(dump(j).back() == '\n');
  CHECK(dump(j) == dump(Json(run_pipeline(c, 7, 3))));
}

TEST_CASE("reading files") {
  CHECK_THROWS_AS(read_json_file("/nonexistent/crnd.json"), InputError);
  const std::string path = "crnd_json_test.json";
  {
    std::ofstream out(path);
    out << "{ not json";
  }
  CHECK_THROWS_AS(read_json_file(path), InputError);
  {
    std::ofstream out(path);
    out << R"({"a": [1, 2]})";
  }
  CHECK(read_json_file(path).at("a").size() == 2);
  std::remove(path.c_str());
  CHECK(big_from_json(Json("12345678901234567890123")) == BigUnsigned("12345678901234567890123"));
  CHECK_THROWS_AS(big_from_json(Json(1.5)), InputError);
}
