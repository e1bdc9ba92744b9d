#pragma once

#include "snowsight/classify.hpp"
#include "snowsight/colmap.hpp"
#include "snowsight/evaluation.hpp"
#include "snowsight/manifest.hpp"
#include "snowsight/sidewalk_model.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace snowsight {

// File-level orchestration shared by the CLI and the python bindings. Each
// function loads what it needs, delegates to the in-memory operations, and
// lets the module errors propagate.

struct BuildOutcome {
    SidewalkModel model;
    std::vector<std::string> warnings;  // reference images that contributed nothing
};

BuildOutcome build_from_files(const std::filesystem::path& model_dir,
                              const std::filesystem::path& manifest_path,
                              const BuildParams& params = {});

// Pose and intrinsics come from the augmented reconstruction (the query was
// registered into the clear-weather model by an outside SfM run); GPS and the
// label raster come from the manifest.
QueryInput make_query_input(const SparseModel& augmented, const Manifest& manifest,
                            const std::string& query_name);

Verdict classify_from_files(const std::filesystem::path& model_path,
                            const std::filesystem::path& aug_model_dir,
                            const std::filesystem::path& manifest_path,
                            const std::string& query_name, double threshold,
                            const ClassifyParams& params = {});

struct SweepOutcome {
    SweepResult result;
    std::optional<ThresholdBand> band;
    std::size_t query_count = 0;
};

// Triples (model_paths[i], aug_model_dirs[i], manifest_paths[i]) describe one
// scene each. Labeled queries are pooled across scenes and resolved back to a
// scene by the GPS gate during the sweep.
SweepOutcome sweep_from_files(const std::vector<std::filesystem::path>& model_paths,
                              const std::vector<std::filesystem::path>& aug_model_dirs,
                              const std::vector<std::filesystem::path>& manifest_paths,
                              double t_min, double t_max, double step,
                              const ClassifyParams& params = {}, double floor_pct = 100.0);

}  // namespace snowsight
