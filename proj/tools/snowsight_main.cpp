// snowsight: learn where sidewalks are from clear-weather reconstructions,
// then decide whether a query image shows them covered by snow.

#include "snowsight/errors.hpp"
#include "snowsight/pipeline.hpp"
#include "snowsight/synthetic.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace {

using namespace snowsight;

// 1 usage / invalid spec, 2 pipeline failure, 3 input or output files, 4
// query missing from the augmented reconstruction.
int exit_code_for(const Error& e) {
    if (dynamic_cast<const UnregisteredQueryError*>(&e)) return 4;
    if (dynamic_cast<const InvalidSpecError*>(&e)) return 1;
    if (dynamic_cast<const MissingFileError*>(&e) || dynamic_cast<const MalformedLineError*>(&e) ||
        dynamic_cast<const DanglingReferenceError*>(&e) ||
        dynamic_cast<const UnsupportedCameraModelError*>(&e) ||
        dynamic_cast<const EmptyModelError*>(&e) ||
        dynamic_cast<const NonUnitQuaternionError*>(&e) ||
        dynamic_cast<const MalformedPgmError*>(&e) ||
        dynamic_cast<const IllegalLabelValueError*>(&e) ||
        dynamic_cast<const ManifestError*>(&e) ||
        dynamic_cast<const MalformedModelFileError*>(&e) ||
        dynamic_cast<const VersionMismatchError*>(&e) ||
        dynamic_cast<const ChecksumMismatchError*>(&e) || dynamic_cast<const IoError*>(&e))
        return 3;
    return 2;
}

struct BuildArgs {
    std::string model_dir, manifest, out;
    std::uint64_t seed = 42;
    double plane_threshold = 0.0;
    int stride = 2;
    std::string keep_side = "right";
};

int cmd_build(const BuildArgs& a) {
    BuildParams params;
    params.seed = a.seed;
    params.plane_threshold = a.plane_threshold;
    params.stride = a.stride;
    params.keep_side = a.keep_side == "left" ? KeepSide::Left : KeepSide::Right;

    const BuildOutcome outcome = build_from_files(a.model_dir, a.manifest, params);
    save_model(outcome.model, a.out);

    for (const auto& w : outcome.warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());
    std::printf("scene %s: %zu sidewalk points from %zu reference images\n",
                outcome.model.scene.scene_id.c_str(), outcome.model.points.size(),
                outcome.model.source_counts.size());
    for (const auto& [name, count] : outcome.model.source_counts)
        std::printf("  %s %zu\n", name.c_str(), count);
    std::printf("plane inliers %zu, threshold %.6f\n", outcome.model.plane.inlier_ids.size(),
                outcome.model.plane.inlier_threshold);
    return 0;
}

struct ClassifyArgs {
    std::string model, aug_model_dir, manifest, query;
    double threshold = 0.60;
    double splat_radius = 2.0;
    std::string overlay_out;
};

int cmd_classify(const ClassifyArgs& a) {
    ClassifyParams params;
    params.splat_radius = a.splat_radius;
    params.make_overlay = !a.overlay_out.empty();

    const Verdict v =
        classify_from_files(a.model, a.aug_model_dir, a.manifest, a.query, a.threshold, params);

    if (!a.overlay_out.empty() && v.overlay) save_label_raster(*v.overlay, a.overlay_out);

    char coverage[32] = "-";
    if (v.coverage) std::snprintf(coverage, sizeof coverage, "%.2f", *v.coverage);
    std::printf("%s %s %s %.2f\n", a.query.c_str(), std::string(outcome_label(v.outcome)).c_str(),
                coverage, v.threshold);
    return 0;
}

struct SweepArgs {
    std::vector<std::string> models, aug_model_dirs, manifests;
    double t_min = 0.0, t_max = 0.95, step = 0.05;
    double floor_pct = 100.0;
    std::string report;
};

int cmd_sweep(const SweepArgs& a) {
    std::vector<std::filesystem::path> models(a.models.begin(), a.models.end());
    std::vector<std::filesystem::path> augs(a.aug_model_dirs.begin(), a.aug_model_dirs.end());
    std::vector<std::filesystem::path> manifests(a.manifests.begin(), a.manifests.end());

    const SweepOutcome outcome = sweep_from_files(models, augs, manifests, a.t_min, a.t_max,
                                                  a.step, ClassifyParams{}, a.floor_pct);
    if (!a.report.empty()) emit_report(outcome.result, a.report);

    std::printf("%zu labeled queries, %zu thresholds\n", outcome.query_count,
                outcome.result.thresholds.size());
    if (outcome.band)
        std::printf("band %.2f %.2f\n", outcome.band->lo, outcome.band->hi);
    else
        std::printf("no band\n");
    return 0;
}

struct SynthArgs {
    std::string spec, out_dir;
};

int cmd_synth(const SynthArgs& a) {
    const SceneSpec spec = a.spec.empty() ? default_scene_spec() : load_scene_spec(a.spec);
    const SyntheticBundle bundle = generate(spec);
    write_bundle(bundle, a.out_dir);
    std::printf("scene %s: %zu images, %zu points, %zu rasters\n", spec.scene_id.c_str(),
                bundle.model.images.size(), bundle.model.points.size(), bundle.rasters.size());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Sidewalk snow-coverage pipeline"};
    app.require_subcommand(1);

    BuildArgs build_args;
    auto* build = app.add_subcommand("build", "Learn a sidewalk model from clear references");
    build->add_option("--model-dir", build_args.model_dir, "COLMAP sparse text directory")
        ->required()
        ->check(CLI::ExistingDirectory);
    build->add_option("--manifest", build_args.manifest, "Scene manifest JSON")
        ->required()
        ->check(CLI::ExistingFile);
    build->add_option("--out", build_args.out, "Output sidewalk model file")->required();
    build->add_option("--seed", build_args.seed, "RANSAC seed");
    build->add_option("--plane-threshold", build_args.plane_threshold,
                      "Plane inlier distance; <= 0 selects 0.01 x bbox diagonal");
    build->add_option("--stride", build_args.stride, "Sidewalk pixel sampling stride")
        ->check(CLI::PositiveNumber);
    build->add_option("--keep-side", build_args.keep_side, "Sidewalk side to keep")
        ->check(CLI::IsMember({"right", "left"}));

    ClassifyArgs classify_args;
    auto* classify = app.add_subcommand("classify", "Classify one query image");
    classify->add_option("--model", classify_args.model, "Sidewalk model file")
        ->required()
        ->check(CLI::ExistingFile);
    classify
        ->add_option("--aug-model-dir", classify_args.aug_model_dir,
                     "Augmented COLMAP directory holding the query pose")
        ->required()
        ->check(CLI::ExistingDirectory);
    classify->add_option("--manifest", classify_args.manifest, "Scene manifest JSON")
        ->required()
        ->check(CLI::ExistingFile);
    classify->add_option("--query", classify_args.query, "Query image name")->required();
    classify->add_option("--threshold", classify_args.threshold, "Alert threshold")
        ->check(CLI::Range(0.0, 1.0));
    classify->add_option("--splat-radius", classify_args.splat_radius,
                         "Projection splat radius in pixels at 1920 width")
        ->check(CLI::NonNegativeNumber);
    classify->add_option("--overlay-out", classify_args.overlay_out,
                         "Write a projection/snow overlay raster here");

    SweepArgs sweep_args;
    auto* sweep = app.add_subcommand("sweep", "Accuracy sweep over alert thresholds");
    sweep->add_option("--model", sweep_args.models, "Sidewalk model file (repeat per scene)")
        ->required()
        ->check(CLI::ExistingFile);
    sweep
        ->add_option("--aug-model-dir", sweep_args.aug_model_dirs,
                     "Augmented COLMAP directory (repeat per scene)")
        ->required()
        ->check(CLI::ExistingDirectory);
    sweep->add_option("--manifest", sweep_args.manifests, "Manifest JSON (repeat per scene)")
        ->required()
        ->check(CLI::ExistingFile);
    sweep->add_option("--t-min", sweep_args.t_min, "Lowest threshold")->check(CLI::Range(0.0, 1.0));
    sweep->add_option("--t-max", sweep_args.t_max, "Highest threshold")
        ->check(CLI::Range(0.0, 1.0));
    sweep->add_option("--step", sweep_args.step, "Threshold increment")
        ->check(CLI::Range(1e-6, 1.0));
    sweep->add_option("--floor", sweep_args.floor_pct, "Accuracy floor for the band, percent")
        ->check(CLI::Range(1e-6, 100.0));
    sweep->add_option("--report", sweep_args.report, "CSV report path");

    SynthArgs synth_args;
    auto* synth = app.add_subcommand("synth", "Generate a synthetic scene bundle");
    synth->add_option("--spec", synth_args.spec, "Scene spec JSON (defaults when omitted)")
        ->check(CLI::ExistingFile);
    synth->add_option("--out-dir", synth_args.out_dir, "Bundle output directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);  // prints usage or the --help text
        return code == 0 ? 0 : 1;
    }

    try {
        if (build->parsed()) return cmd_build(build_args);
        if (classify->parsed()) return cmd_classify(classify_args);
        if (sweep->parsed()) return cmd_sweep(sweep_args);
        return cmd_synth(synth_args);
    } catch (const Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return exit_code_for(e);
    } catch (const std::filesystem::filesystem_error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
}
