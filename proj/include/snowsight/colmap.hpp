#pragma once

#include <Eigen/Core>

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace snowsight {

enum class CameraModel { SimplePinhole, Pinhole, SimpleRadial };

const char* camera_model_name(CameraModel model);

struct CameraIntrinsics {
    std::uint32_t camera_id = 0;
    CameraModel model = CameraModel::SimplePinhole;
    int width = 0;
    int height = 0;
    // SIMPLE_PINHOLE: f, cx, cy
    // PINHOLE:        fx, fy, cx, cy
    // SIMPLE_RADIAL:  f, cx, cy, k
    std::vector<double> params;

    double fx() const { return params[0]; }
    double fy() const { return model == CameraModel::Pinhole ? params[1] : params[0]; }
    double cx() const { return params[model == CameraModel::Pinhole ? 2 : 1]; }
    double cy() const { return params[model == CameraModel::Pinhole ? 3 : 2]; }

    bool operator==(const CameraIntrinsics&) const = default;
};

struct Observation {
    Eigen::Vector2d pixel;
    std::optional<std::uint64_t> point3d_id;

    bool operator==(const Observation& o) const {
        return pixel == o.pixel && point3d_id == o.point3d_id;
    }
};

struct ImageRecord {
    std::uint32_t image_id = 0;
    std::string name;
    Eigen::Vector4d qvec{1, 0, 0, 0};  // (w, x, y, z), rotates world into camera
    Eigen::Vector3d tvec{0, 0, 0};
    std::uint32_t camera_id = 0;
    std::vector<Observation> observations;

    bool operator==(const ImageRecord& o) const {
        return image_id == o.image_id && name == o.name && qvec == o.qvec &&
               tvec == o.tvec && camera_id == o.camera_id && observations == o.observations;
    }
};

struct ScenePoint {
    std::uint64_t point3d_id = 0;
    Eigen::Vector3d xyz{0, 0, 0};
    std::array<std::uint8_t, 3> color{0, 0, 0};
    double reproj_error = 0.0;
    // (image_id, index into that image's observations)
    std::vector<std::pair<std::uint32_t, std::uint32_t>> track;

    bool operator==(const ScenePoint& o) const {
        return point3d_id == o.point3d_id && xyz == o.xyz && color == o.color &&
               reproj_error == o.reproj_error && track == o.track;
    }
};

struct SparseModel {
    std::map<std::uint32_t, CameraIntrinsics> cameras;
    std::map<std::uint32_t, ImageRecord> images;
    std::map<std::uint64_t, ScenePoint> points;

    bool operator==(const SparseModel&) const = default;
};

// Reads cameras.txt / images.txt / points3D.txt from `dir` and cross-checks
// every reference (image -> camera, observation -> point, track -> image and
// back). Comment lines start with '#'. A POINT3D_ID of -1 marks an
// observation without a triangulated point.
SparseModel parse_sparse_model(const std::filesystem::path& dir);

// Writes the same three files. parse_sparse_model(write_sparse_model(m)) == m,
// bit for bit on every float.
void write_sparse_model(const SparseModel& model, const std::filesystem::path& dir);

// All observations of one image that carry a triangulated point, as
// (pixel, world point) pairs in observation order.
std::vector<std::pair<Eigen::Vector2d, Eigen::Vector3d>>
pixel_point_pairs(const SparseModel& model, std::uint32_t image_id);

}  // namespace snowsight
