#pragma once

#include "snowsight/classify.hpp"
#include "snowsight/sidewalk_model.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace snowsight {

enum class QueryCategory { Clear, SnowCovered, Cleared };

const char* category_name(QueryCategory c);
std::optional<QueryCategory> category_from_name(const std::string& name);

// Cleared sidewalks (bordered by snow but shoveled) must classify Clear.
Outcome expected_outcome(QueryCategory c);

struct LabeledQuery {
    QueryInput query;
    QueryCategory category = QueryCategory::Clear;
};

struct SweepResult {
    std::vector<double> thresholds;  // ascending
    std::map<QueryCategory, std::vector<double>> accuracy_pct;
};

// Inclusive decimal grid from t_min to t_max; scaled-integer stepping keeps
// the values drift-free (0.05 increments land exactly on 0.60 and 0.95).
std::vector<double> threshold_grid(double t_min, double t_max, double step);

// Coverage is computed once per query (it does not depend on the threshold),
// then compared against every grid value. Each query resolves to the first
// scene, in ascending scene_id order, whose GPS gate accepts it. Categories
// with no queries score a vacuous 100 at every threshold.
SweepResult sweep(const std::map<std::string, SidewalkModel>& models,
                  const std::vector<LabeledQuery>& queries, double t_min, double t_max,
                  double step, const ClassifyParams& params = {});

struct ThresholdBand {
    double lo = 0.0;
    double hi = 0.0;
};

// Longest contiguous run of thresholds where every category's accuracy is at
// least floor_pct; ties go to the run that starts lower. nullopt if no
// threshold qualifies.
std::optional<ThresholdBand> optimal_band(const SweepResult& result, double floor_pct = 100.0);

// CSV: "threshold,clear_pct,snow_covered_pct,cleared_pct", fixed 2 decimals.
void emit_report(const SweepResult& result, const std::filesystem::path& path);

}  // namespace snowsight
