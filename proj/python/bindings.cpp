// Python bindings for the file-level pipeline operations plus the estimation
// primitives that are useful on their own (plane fit, homography, haversine).
// Results come back as plain dicts so callers need nothing but numpy.

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "snowsight/classify.hpp"
#include "snowsight/errors.hpp"
#include "snowsight/evaluation.hpp"
#include "snowsight/geometry.hpp"
#include "snowsight/masks.hpp"
#include "snowsight/pipeline.hpp"
#include "snowsight/sidewalk_model.hpp"
#include "snowsight/synthetic.hpp"

#include <algorithm>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace py = pybind11;
namespace fs = std::filesystem;
using namespace snowsight;

namespace {

KeepSide keep_side_from(const std::string& name) {
    if (name == "right") return KeepSide::Right;
    if (name == "left") return KeepSide::Left;
    throw std::invalid_argument("keep_side must be 'right' or 'left', got '" + name + "'");
}

py::object coverage_or_none(const std::optional<double>& coverage) {
    if (!coverage) return py::none();
    return py::float_(*coverage);
}

py::dict verdict_dict(const std::string& query, const Verdict& v) {
    py::dict d;
    d["query"] = query;
    d["outcome"] = std::string(outcome_label(v.outcome));
    d["coverage"] = coverage_or_none(v.coverage);
    d["threshold"] = v.threshold;
    d["projected_pixels"] = v.projected_pixel_count;
    return d;
}

py::dict synth_op(const fs::path& out_dir, const std::string& spec_json) {
    const SceneSpec spec = scene_spec_from_json(spec_json);
    const SyntheticBundle bundle = generate(spec);
    write_bundle(bundle, out_dir);

    py::list references, queries;
    for (const auto& entry : bundle.manifest.entries) {
        if (entry.role == ImageRole::Reference) {
            references.append(entry.name);
            continue;
        }
        py::dict q;
        q["name"] = entry.name;
        q["category"] =
            entry.category ? py::object(py::str(category_name(*entry.category))) : py::none();
        q["true_coverage"] = bundle.query_true_coverage.at(entry.name);
        queries.append(q);
    }
    py::dict d;
    d["scene_id"] = bundle.manifest.scene.scene_id;
    d["out_dir"] = out_dir.string();
    d["references"] = references;
    d["queries"] = queries;
    return d;
}

py::dict build_op(const fs::path& model_dir, const fs::path& manifest, const fs::path& out,
                  std::uint64_t seed, double plane_threshold, int stride,
                  const std::string& keep_side) {
    BuildParams params;
    params.seed = seed;
    params.plane_threshold = plane_threshold;
    params.stride = stride;
    params.keep_side = keep_side_from(keep_side);
    const BuildOutcome outcome = build_from_files(model_dir, manifest, params);
    save_model(outcome.model, out);

    py::list sources;
    for (const auto& [name, count] : outcome.model.source_counts)
        sources.append(py::make_tuple(name, count));
    py::dict plane;
    plane["normal"] = Eigen::Vector3d(outcome.model.plane.normal);
    plane["offset"] = outcome.model.plane.offset;
    plane["inliers"] = outcome.model.plane.inlier_ids.size();
    plane["threshold"] = outcome.model.plane.inlier_threshold;
    py::dict d;
    d["out"] = out.string();
    d["scene_id"] = outcome.model.scene.scene_id;
    d["points"] = outcome.model.points.size();
    d["sources"] = sources;
    d["plane"] = plane;
    d["warnings"] = outcome.warnings;
    return d;
}

py::dict classify_op(const fs::path& model, const fs::path& aug_model_dir,
                     const fs::path& manifest, const std::string& query, double threshold,
                     double splat_radius, double min_snow_fraction,
                     const std::optional<fs::path>& overlay_out) {
    ClassifyParams params;
    params.splat_radius = splat_radius;
    params.min_snow_fraction = min_snow_fraction;
    params.make_overlay = overlay_out.has_value();
    const Verdict v = classify_from_files(model, aug_model_dir, manifest, query, threshold, params);
    if (overlay_out && v.overlay) save_label_raster(*v.overlay, *overlay_out);
    return verdict_dict(query, v);
}

py::dict sweep_op(const std::vector<fs::path>& models, const std::vector<fs::path>& aug_model_dirs,
                  const std::vector<fs::path>& manifests, double t_min, double t_max, double step,
                  double floor_pct, const std::optional<fs::path>& report) {
    const SweepOutcome outcome =
        sweep_from_files(models, aug_model_dirs, manifests, t_min, t_max, step, {}, floor_pct);
    if (report) emit_report(outcome.result, *report);

    py::dict accuracy;
    for (const auto& [category, values] : outcome.result.accuracy_pct)
        accuracy[category_name(category)] = values;
    py::dict d;
    d["thresholds"] = outcome.result.thresholds;
    d["accuracy"] = accuracy;
    d["band"] = outcome.band ? py::object(py::make_tuple(outcome.band->lo, outcome.band->hi))
                             : py::none();
    d["query_count"] = outcome.query_count;
    return d;
}

py::dict fit_plane_op(const Eigen::MatrixX3d& points, double threshold, int iterations,
                      std::uint64_t seed) {
    std::vector<IdPoint> id_points;
    id_points.reserve(std::size_t(points.rows()));
    for (Eigen::Index i = 0; i < points.rows(); ++i)
        id_points.emplace_back(std::uint64_t(i), points.row(i).transpose());
    const PlaneModel plane = fit_plane_ransac(id_points, threshold, iterations, seed);

    std::vector<std::uint64_t> inliers(plane.inlier_ids.begin(), plane.inlier_ids.end());
    std::sort(inliers.begin(), inliers.end());
    py::dict d;
    d["normal"] = Eigen::Vector3d(plane.normal);
    d["offset"] = plane.offset;
    d["inlier_ids"] = inliers;
    d["threshold"] = plane.inlier_threshold;
    return d;
}

py::tuple estimate_homography_op(const Eigen::MatrixX2d& src, const Eigen::MatrixX2d& dst,
                                 double threshold, int iterations, std::uint64_t seed) {
    if (src.rows() != dst.rows())
        throw std::invalid_argument("src and dst must have the same number of rows");
    std::vector<std::pair<Eigen::Vector2d, Eigen::Vector2d>> pairs;
    pairs.reserve(std::size_t(src.rows()));
    for (Eigen::Index i = 0; i < src.rows(); ++i)
        pairs.emplace_back(src.row(i).transpose(), dst.row(i).transpose());
    const HomographyEstimate est = estimate_homography(pairs, threshold, iterations, seed);
    return py::make_tuple(Eigen::Matrix3d(est.h.h), est.inlier_count);
}

Eigen::MatrixX2d apply_homography_op(const Eigen::Matrix3d& h, const Eigen::MatrixX2d& points) {
    const Homography hom{h};
    Eigen::MatrixX2d out(points.rows(), 2);
    for (Eigen::Index i = 0; i < points.rows(); ++i)
        out.row(i) = apply_homography(hom, points.row(i).transpose()).transpose();
    return out;
}

}  // namespace

PYBIND11_MODULE(_snowsight, m) {
    m.doc() = "Sidewalk snow coverage from multi-view street reconstructions";

    py::register_exception<Error>(m, "SnowsightError");

    m.def("synth", &synth_op, py::arg("out_dir"), py::arg("spec_json") = "{}",
          "Generate a synthetic scene bundle (sparse model, rasters, manifest) under out_dir");
    m.def("build", &build_op, py::arg("model_dir"), py::arg("manifest"), py::arg("out"),
          py::arg("seed") = 42, py::arg("plane_threshold") = 0.0, py::arg("stride") = 2,
          py::arg("keep_side") = "right",
          "Learn a sidewalk model from clear references and save it to out");
    m.def("classify", &classify_op, py::arg("model"), py::arg("aug_model_dir"),
          py::arg("manifest"), py::arg("query"), py::arg("threshold") = 0.60,
          py::arg("splat_radius") = 2.0, py::arg("min_snow_fraction") = 0.0,
          py::arg("overlay_out") = py::none(), "Classify one query image against a sidewalk model");
    m.def("sweep", &sweep_op, py::arg("models"), py::arg("aug_model_dirs"), py::arg("manifests"),
          py::arg("t_min") = 0.0, py::arg("t_max") = 0.95, py::arg("step") = 0.05,
          py::arg("floor_pct") = 100.0, py::arg("report") = py::none(),
          "Per-category accuracy across alert thresholds, pooled over scenes");

    m.def("haversine_m", &haversine_m, py::arg("lat1"), py::arg("lon1"), py::arg("lat2"),
          py::arg("lon2"), "Great-circle distance in meters");
    m.def("fit_plane", &fit_plane_op, py::arg("points"), py::arg("threshold"),
          py::arg("iterations") = 2000, py::arg("seed") = 42,
          "RANSAC plane fit over an N x 3 point array");
    m.def("estimate_homography", &estimate_homography_op, py::arg("src"), py::arg("dst"),
          py::arg("threshold") = 3.0, py::arg("iterations") = 500, py::arg("seed") = 42,
          "RANSAC homography from N x 2 source and destination arrays; returns (3x3, inliers)");
    m.def("apply_homography", &apply_homography_op, py::arg("h"), py::arg("points"),
          "Map an N x 2 point array through a homography");
}
