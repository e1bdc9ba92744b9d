#pragma once

#include "snowsight/colmap.hpp"
#include "snowsight/geometry.hpp"
#include "snowsight/masks.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace snowsight {

struct SceneDescriptor {
    std::string scene_id;
    double gps_lat = 0.0;
    double gps_lon = 0.0;
    double gps_radius_m = 0.0;
    std::vector<std::string> reference_names;
};

// Where sidewalks were observed in clear weather: 2D points in the
// re-oriented ground frame (z = 0 implied), plus the plane and transform
// needed to lift them back into the reconstruction.
struct SidewalkModel {
    SceneDescriptor scene;
    PlaneModel plane;
    RigidTransform reorient;  // reconstruction frame -> ground frame
    std::vector<Eigen::Vector2d> points;
    std::vector<std::pair<std::string, std::size_t>> source_counts;  // per reference image
};

struct BuildParams {
    std::uint64_t seed = 42;
    double plane_threshold = 0.0;  // <= 0 selects 0.01 x candidate bbox diagonal
    int plane_iterations = 2000;
    int stride = 2;
    KeepSide keep_side = KeepSide::Right;
    double homography_threshold = 3.0;  // symmetric transfer error; the pixel leg dominates
    int homography_iterations = 500;
};

// (pixel, ground_xy) pairs for every observation of the image whose pixel
// falls in the road mask and whose 3D point is a plane inlier. Throws
// NoCorrespondences below 4 pairs.
std::vector<std::pair<Eigen::Vector2d, Eigen::Vector2d>> ground_correspondences(
    const SparseModel& model, std::uint32_t image_id, const PixelSet& road,
    const PlaneModel& plane, const RigidTransform& reorient);

// Full clear-weather build: one plane RANSAC over road-linked points pooled
// from every reference image, re-orientation, then a per-image road
// homography through which the right-side-filtered sidewalk pixels are
// dropped onto the ground. Images whose homography cannot be estimated are
// skipped with a warning and a zero count.
SidewalkModel build_sidewalk_model(const SparseModel& model,
                                   const std::map<std::string, LabelRaster>& rasters,
                                   const SceneDescriptor& scene, const BuildParams& params,
                                   std::vector<std::string>* warnings = nullptr);

// Versioned UTF-8 text file, CRC32 of the body on the last line. Round-trips
// every float bit-exactly.
void save_model(const SidewalkModel& model, const std::filesystem::path& path);
SidewalkModel load_model(const std::filesystem::path& path);

}  // namespace snowsight
