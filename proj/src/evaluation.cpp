#include "snowsight/evaluation.hpp"

#include "snowsight/errors.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace snowsight {

const char* category_name(QueryCategory c) {
    switch (c) {
        case QueryCategory::Clear: return "clear";
        case QueryCategory::SnowCovered: return "snow_covered";
        case QueryCategory::Cleared: return "cleared";
    }
    return "?";
}

std::optional<QueryCategory> category_from_name(const std::string& name) {
    if (name == "clear") return QueryCategory::Clear;
    if (name == "snow_covered") return QueryCategory::SnowCovered;
    if (name == "cleared") return QueryCategory::Cleared;
    return std::nullopt;
}

Outcome expected_outcome(QueryCategory c) {
    return c == QueryCategory::SnowCovered ? Outcome::SnowCovered : Outcome::Clear;
}

std::vector<double> threshold_grid(double t_min, double t_max, double step) {
    if (step <= 0.0) throw std::invalid_argument("step must be positive");
    if (t_max < t_min) throw std::invalid_argument("t_max must be >= t_min");
    constexpr double kScale = 1e6;
    const long long lo = std::llround(t_min * kScale);
    const long long hi = std::llround(t_max * kScale);
    const long long inc = std::llround(step * kScale);
    if (inc <= 0) throw std::invalid_argument("step too small");
    std::vector<double> grid;
    for (long long v = lo; v <= hi; v += inc) grid.push_back(static_cast<double>(v) / kScale);
    return grid;
}

SweepResult sweep(const std::map<std::string, SidewalkModel>& models,
                  const std::vector<LabeledQuery>& queries, double t_min, double t_max,
                  double step, const ClassifyParams& params) {
    SweepResult result;
    result.thresholds = threshold_grid(t_min, t_max, step);

    struct Measured {
        QueryCategory category;
        std::optional<double> coverage;  // absent on the no-snow path
    };
    std::vector<Measured> measured;
    measured.reserve(queries.size());

    for (const auto& lq : queries) {
        const SidewalkModel* scene = nullptr;
        for (const auto& [id, m] : models) {
            if (gps_gate(lq.query.gps_lat, lq.query.gps_lon, m.scene)) {
                scene = &m;
                break;
            }
        }
        if (!scene) throw UnknownSceneError(lq.query.name);
        // Threshold value is irrelevant here; only the coverage is kept.
        const Verdict v = classify(*scene, lq.query, 0.0, params);
        measured.push_back({lq.category, v.coverage});
    }

    for (QueryCategory cat :
         {QueryCategory::Clear, QueryCategory::SnowCovered, QueryCategory::Cleared}) {
        std::size_t total = 0;
        for (const auto& m : measured)
            if (m.category == cat) ++total;
        std::vector<double> acc;
        acc.reserve(result.thresholds.size());
        for (double t : result.thresholds) {
            if (total == 0) {
                acc.push_back(100.0);
                continue;
            }
            std::size_t correct = 0;
            for (const auto& m : measured) {
                if (m.category != cat) continue;
                const Outcome outcome = !m.coverage          ? Outcome::NoSnow
                                        : *m.coverage > t    ? Outcome::SnowCovered
                                                             : Outcome::Clear;
                const Outcome want = expected_outcome(cat);
                const bool ok = want == Outcome::Clear
                                    ? (outcome == Outcome::Clear || outcome == Outcome::NoSnow)
                                    : outcome == want;
                if (ok) ++correct;
            }
            acc.push_back(100.0 * static_cast<double>(correct) / static_cast<double>(total));
        }
        result.accuracy_pct[cat] = std::move(acc);
    }
    return result;
}

std::optional<ThresholdBand> optimal_band(const SweepResult& result, double floor_pct) {
    if (floor_pct <= 0.0 || floor_pct > 100.0)
        throw std::invalid_argument("floor_pct must be in (0, 100]");
    const std::size_t n = result.thresholds.size();
    std::vector<bool> ok(n, true);
    for (const auto& [cat, acc] : result.accuracy_pct) {
        if (acc.size() != n) throw InvalidInputError("accuracy length does not match grid");
        for (std::size_t i = 0; i < n; ++i)
            if (acc[i] < floor_pct) ok[i] = false;
    }
    std::size_t best_start = 0, best_len = 0;
    std::size_t i = 0;
    while (i < n) {
        if (!ok[i]) {
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j < n && ok[j]) ++j;
        if (j - i > best_len) {  // strict: ties keep the earlier run
            best_len = j - i;
            best_start = i;
        }
        i = j;
    }
    if (best_len == 0) return std::nullopt;
    return ThresholdBand{result.thresholds[best_start],
                         result.thresholds[best_start + best_len - 1]};
}

void emit_report(const SweepResult& result, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    out << "threshold,clear_pct,snow_covered_pct,cleared_pct\n";
    char buf[64];
    for (std::size_t i = 0; i < result.thresholds.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.2f,%.2f,%.2f,%.2f", result.thresholds[i],
                      result.accuracy_pct.at(QueryCategory::Clear)[i],
                      result.accuracy_pct.at(QueryCategory::SnowCovered)[i],
                      result.accuracy_pct.at(QueryCategory::Cleared)[i]);
        out << buf << '\n';
    }
    if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace snowsight
