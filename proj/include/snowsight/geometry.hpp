#pragma once

#include "snowsight/colmap.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <optional>
#include <unordered_set>
#include <utility>
#include <vector>

namespace snowsight {

// Plane { x : normal . x == offset } with the inliers that supported the fit.
struct PlaneModel {
    Eigen::Vector3d normal{0, 0, 1};  // unit length
    double offset = 0.0;
    std::unordered_set<std::uint64_t> inlier_ids;
    double inlier_threshold = 0.0;

    double signed_distance(const Eigen::Vector3d& p) const { return normal.dot(p) - offset; }
};

struct RigidTransform {
    Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
    Eigen::Vector3d translation = Eigen::Vector3d::Zero();

    Eigen::Vector3d apply(const Eigen::Vector3d& p) const { return rotation * p + translation; }
    RigidTransform inverse() const {
        return {rotation.transpose(), -(rotation.transpose() * translation)};
    }
};

struct Homography {
    Eigen::Matrix3d h = Eigen::Matrix3d::Identity();
};

struct HomographyEstimate {
    Homography h;
    int inlier_count = 0;
};

// qvec is (w, x, y, z) and must be unit length within 1e-6.
Eigen::Matrix3d rotation_from_quaternion(const Eigen::Vector4d& qvec);

// Camera center C = -R^T t for a world-to-camera pose.
Eigen::Vector3d camera_center(const Eigen::Vector4d& qvec, const Eigen::Vector3d& tvec);
Eigen::Vector3d camera_center(const ImageRecord& image);

// Projects a world point into the image. Returns nullopt for points at or
// behind the camera plane. SIMPLE_RADIAL applies the forward distortion
// factor (1 + k r^2) to the normalized coordinates.
std::optional<Eigen::Vector2d> project_to_image(const CameraIntrinsics& intr,
                                                const Eigen::Matrix3d& rotation,
                                                const Eigen::Vector3d& tvec,
                                                const Eigen::Vector3d& xyz);
std::optional<Eigen::Vector2d> project_to_image(const CameraIntrinsics& intr,
                                                const Eigen::Vector4d& qvec,
                                                const Eigen::Vector3d& tvec,
                                                const Eigen::Vector3d& xyz);

using IdPoint = std::pair<std::uint64_t, Eigen::Vector3d>;

// RANSAC plane fit: 3-point hypotheses scored by inlier count (absolute
// point-plane distance <= threshold), then total-least-squares refinement on
// the winning inliers with one re-selection pass. The returned inlier set is
// consistent with the returned plane. Same seed, same result.
PlaneModel fit_plane_ransac(const std::vector<IdPoint>& points, double threshold,
                            int iterations, std::uint64_t seed);

// Flips the plane so that most reference points lie on its nonnegative side.
void orient_plane_toward(PlaneModel& plane, const std::vector<Eigen::Vector3d>& references);

// Minimal-angle rotation taking unit vector `from` to unit vector `to`.
// Antiparallel inputs rotate by pi about the x-axis.
Eigen::Matrix3d rotation_aligning(const Eigen::Vector3d& from, const Eigen::Vector3d& to);

// Rigid map that sends the plane to z = 0; afterwards the z coordinate of any
// point equals its signed distance from the plane.
RigidTransform reorientation_for_plane(const PlaneModel& plane);

// RANSAC homography from (src, dst) pairs: 4-point DLT hypotheses with
// Hartley normalization, inliers by symmetric transfer error, final model
// re-estimated over all inliers and scaled so h(2,2) == 1. Same seed, same
// result.
HomographyEstimate estimate_homography(
    const std::vector<std::pair<Eigen::Vector2d, Eigen::Vector2d>>& correspondences,
    double ransac_threshold, int iterations, std::uint64_t seed);

Eigen::Vector2d apply_homography(const Homography& h, const Eigen::Vector2d& p);

}  // namespace snowsight
