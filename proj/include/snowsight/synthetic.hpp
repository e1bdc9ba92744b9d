#pragma once

#include "snowsight/colmap.hpp"
#include "snowsight/geometry.hpp"
#include "snowsight/manifest.hpp"
#include "snowsight/masks.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace snowsight {

using Polygon = std::vector<Eigen::Vector2d>;

struct SnowScenario {
    enum class Kind { None, CoversSidewalk, BesideSidewalk };
    Kind kind = Kind::None;
    double fraction = 0.0;  // CoversSidewalk: fraction of the strip under snow
};

// Everything below lives in a "ground frame": x along the road, y to the
// left of travel, z up. The scene is then moved into a tilted reconstruction
// frame by a rigid pose derived from plane_normal/plane_offset, so nothing
// downstream can rely on the ground plane being axis-aligned.
struct SceneSpec {
    std::uint64_t seed = 42;
    std::string scene_id = "scene";
    Eigen::Vector3d plane_normal{0.04, -0.03, 1.0};
    double plane_offset = 1.8;
    Polygon road;      // default: x in [0,66], y in [-3.5,3.5]
    Polygon sidewalk;  // default: x in [0,66], y in [-6.5,-4.5] (right of travel)
    int runs = 3;
    int images_per_run = 12;
    double step_m = 5.0;         // camera spacing along the road
    double run_stagger_m = 1.7;  // start offset between runs
    double lane_y = -1.75;
    double camera_height_m = 2.5;
    double pitch_deg = 15.0;  // downward
    double lateral_jitter_m = 0.25;
    double yaw_jitter_deg = 1.5;
    double pitch_jitter_deg = 0.8;
    int image_width = 1280;
    int image_height = 720;
    double focal_px = 1000.0;
    int point_count = 5000;
    double outlier_fraction = 0.3;  // off-plane clutter share
    double pixel_noise_sigma = 0.0;
    int query_count = 2;
    bool far_query = true;  // extra unlabeled query ~5 km away, for GPS gating
    SnowScenario snow;
    double gps_lat = 40.44;   // tangent-plane origin
    double gps_lon = -79.99;
};

SceneSpec default_scene_spec();

// Partial override of the defaults from a JSON object; unknown keys are
// rejected. load_scene_spec reads the same JSON from a file.
SceneSpec scene_spec_from_json(const std::string& json_text);
SceneSpec load_scene_spec(const std::filesystem::path& path);

struct SyntheticBundle {
    SceneSpec spec;
    SparseModel model;  // references and queries, all registered
    std::map<std::string, LabelRaster> rasters;
    Manifest manifest;
    // Ground truth, recorded at generation time:
    Eigen::Vector3d true_normal;  // unit, pointing up (toward the cameras)
    double true_offset = 0.0;
    RigidTransform scene_pose;  // ground frame -> reconstruction frame
    std::map<std::string, Eigen::Matrix3d> true_ground_to_image;
    std::map<std::string, double> query_true_coverage;
};

// Deterministic for a fixed spec. Observations are exact projections plus
// Gaussian pixel noise; rasters are rendered by casting each pixel center
// back onto the ground plane and testing the polygons, which never touches
// the estimation code paths.
SyntheticBundle generate(const SceneSpec& spec);

// Snow-on-sidewalk ratio of one query raster, computed analytically during
// rendering. The oracle for the pipeline's coverage.
double true_coverage(const SyntheticBundle& bundle, const std::string& query_name);

// Writes sparse/, rasters/, manifest.json and ground_truth.json under dir.
void write_bundle(const SyntheticBundle& bundle, const std::filesystem::path& dir);

}  // namespace snowsight
