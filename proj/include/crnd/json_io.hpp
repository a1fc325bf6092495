#pragma once

// JSON documents for specs, outcomes, optimizer problems and pipeline runs.

#include <string>

#include <json.hpp>

#include "crnd/guideline.hpp"
#include "crnd/mlts.hpp"
#include "crnd/pipeline.hpp"
#include "crnd/randtests.hpp"

namespace crnd {

using Json = nlohmann::ordered_json;

/// Decimal string, or a JSON unsigned number; strings may use "2^k".
BigUnsigned big_from_json(const Json& j);
std::string big_to_string(const BigUnsigned& v);

void to_json(Json& j, const TestSpec& spec);
void from_json(const Json& j, TestSpec& spec);
void to_json(Json& j, const TestOutcome& outcome);
void to_json(Json& j, const Grid& grid);
void from_json(const Json& j, Grid& grid);
void to_json(Json& j, const GuidelineProblem& prob);
void from_json(const Json& j, GuidelineProblem& prob);
void to_json(Json& j, const GuidelineSolution& sol);
void to_json(Json& j, const SecurityReport& rep);
void to_json(Json& j, const PipelineConfig& cfg);
void from_json(const Json& j, PipelineConfig& cfg);
void to_json(Json& j, const PipelineReport& rep);

/// Two-space indented document with a trailing newline.
std::string dump(const Json& j);

/// Per-trial rows: trial,accepted,mismatch,eve_hit,key_bits,elapsed.
std::string report_csv(const PipelineReport& rep);

Json read_json_file(const std::string& path);

}  // namespace crnd
