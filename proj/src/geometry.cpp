#include "snowsight/geometry.hpp"

#include "snowsight/errors.hpp"
#include "snowsight/rng.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <stdexcept>

namespace snowsight {

Eigen::Matrix3d rotation_from_quaternion(const Eigen::Vector4d& qvec) {
    const double norm = qvec.norm();
    if (std::abs(norm - 1.0) > 1e-6) throw NonUnitQuaternionError(norm);
    const double w = qvec[0], x = qvec[1], y = qvec[2], z = qvec[3];
    Eigen::Matrix3d r;
    r << 1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y),
         2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x),
         2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y);
    return r;
}

Eigen::Vector3d camera_center(const Eigen::Vector4d& qvec, const Eigen::Vector3d& tvec) {
    return -(rotation_from_quaternion(qvec).transpose() * tvec);
}

Eigen::Vector3d camera_center(const ImageRecord& image) {
    return camera_center(image.qvec, image.tvec);
}

std::optional<Eigen::Vector2d> project_to_image(const CameraIntrinsics& intr,
                                                const Eigen::Matrix3d& rotation,
                                                const Eigen::Vector3d& tvec,
                                                const Eigen::Vector3d& xyz) {
    const Eigen::Vector3d p = rotation * xyz + tvec;
    if (p.z() <= 1e-9) return std::nullopt;
    double xn = p.x() / p.z();
    double yn = p.y() / p.z();
    if (intr.model == CameraModel::SimpleRadial) {
        const double k = intr.params[3];
        const double factor = 1.0 + k * (xn * xn + yn * yn);
        xn *= factor;
        yn *= factor;
    }
    Eigen::Vector2d uv{intr.fx() * xn + intr.cx(), intr.fy() * yn + intr.cy()};
    if (!uv.allFinite()) return std::nullopt;
    return uv;
}

std::optional<Eigen::Vector2d> project_to_image(const CameraIntrinsics& intr,
                                                const Eigen::Vector4d& qvec,
                                                const Eigen::Vector3d& tvec,
                                                const Eigen::Vector3d& xyz) {
    return project_to_image(intr, rotation_from_quaternion(qvec), tvec, xyz);
}

namespace {

// Plane through the centroid whose normal is the smallest-variance direction.
std::pair<Eigen::Vector3d, double> tls_plane(const std::vector<IdPoint>& points,
                                             const std::vector<std::size_t>& idx) {
    Eigen::Vector3d centroid = Eigen::Vector3d::Zero();
    for (std::size_t i : idx) centroid += points[i].second;
    centroid /= static_cast<double>(idx.size());
    Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
    for (std::size_t i : idx) {
        const Eigen::Vector3d d = points[i].second - centroid;
        cov += d * d.transpose();
    }
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(cov);
    const Eigen::Vector3d normal = eig.eigenvectors().col(0);  // smallest eigenvalue
    return {normal, normal.dot(centroid)};
}

std::vector<std::size_t> plane_inliers(const std::vector<IdPoint>& points,
                                       const Eigen::Vector3d& normal, double offset,
                                       double threshold) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < points.size(); ++i)
        if (std::abs(normal.dot(points[i].second) - offset) <= threshold) idx.push_back(i);
    return idx;
}

}  // namespace

PlaneModel fit_plane_ransac(const std::vector<IdPoint>& points, double threshold,
                            int iterations, std::uint64_t seed) {
    if (points.size() < 3)
        throw InsufficientPointsError("plane fit needs at least 3 points, got " +
                                      std::to_string(points.size()));
    if (threshold <= 0.0) throw std::invalid_argument("plane threshold must be positive");
    if (iterations <= 0) throw std::invalid_argument("iteration count must be positive");

    {
        // Reject inputs that cannot define a plane.
        const Eigen::Vector3d& p0 = points[0].second;
        double dmax = 0.0;
        Eigen::Vector3d far = p0;
        for (const auto& [id, p] : points) {
            const double d = (p - p0).norm();
            if (d > dmax) {
                dmax = d;
                far = p;
            }
        }
        if (dmax <= 1e-9) throw DegenerateInputError("all points coincide");
        const Eigen::Vector3d u = (far - p0) / dmax;
        double off = 0.0;
        for (const auto& [id, p] : points) {
            const Eigen::Vector3d d = p - p0;
            off = std::max(off, (d - u * u.dot(d)).norm());
        }
        if (off <= 1e-9) throw DegenerateInputError("all points collinear");
    }

    Rng rng(seed);
    const std::size_t n = points.size();
    int best_count = -1;
    Eigen::Vector3d best_normal;
    double best_offset = 0.0;

    for (int it = 0; it < iterations; ++it) {
        std::size_t i = rng.below(n), j, k;
        do j = rng.below(n); while (j == i);
        do k = rng.below(n); while (k == i || k == j);
        const Eigen::Vector3d& a = points[i].second;
        const Eigen::Vector3d ab = points[j].second - a;
        const Eigen::Vector3d ac = points[k].second - a;
        Eigen::Vector3d normal = ab.cross(ac);
        const double nn = normal.norm();
        if (nn <= 1e-12 * std::max(1.0, ab.norm() * ac.norm())) continue;
        normal /= nn;
        const double offset = normal.dot(a);
        int count = 0;
        for (const auto& [id, p] : points)
            if (std::abs(normal.dot(p) - offset) <= threshold) ++count;
        if (count > best_count) {
            best_count = count;
            best_normal = normal;
            best_offset = offset;
        }
    }
    if (best_count < 3) throw DegenerateInputError("no valid plane hypothesis found");

    // Two refinement rounds; the final inlier set is re-selected against the
    // final plane so the two always agree.
    Eigen::Vector3d normal = best_normal;
    double offset = best_offset;
    std::vector<std::size_t> idx = plane_inliers(points, normal, offset, threshold);
    for (int round = 0; round < 2; ++round) {
        auto [n2, d2] = tls_plane(points, idx);
        if (n2.dot(normal) < 0.0) {
            n2 = -n2;
            d2 = -d2;
        }
        auto idx2 = plane_inliers(points, n2, d2, threshold);
        if (idx2.size() < 3) break;
        normal = n2;
        offset = d2;
        idx = std::move(idx2);
    }

    PlaneModel plane;
    plane.normal = normal;
    plane.offset = offset;
    plane.inlier_threshold = threshold;
    for (std::size_t i : idx) plane.inlier_ids.insert(points[i].first);
    return plane;
}

void orient_plane_toward(PlaneModel& plane, const std::vector<Eigen::Vector3d>& references) {
    std::size_t positive = 0;
    for (const auto& p : references)
        if (plane.signed_distance(p) > 0.0) ++positive;
    if (positive * 2 < references.size()) {
        plane.normal = -plane.normal;
        plane.offset = -plane.offset;
    }
}

Eigen::Matrix3d rotation_aligning(const Eigen::Vector3d& from, const Eigen::Vector3d& to) {
    const Eigen::Vector3d axis = from.cross(to);
    const double s = axis.norm();
    const double c = from.dot(to);
    if (s < 1e-15) {
        if (c >= 0.0) return Eigen::Matrix3d::Identity();
        Eigen::Matrix3d r;
        r << 1, 0, 0, 0, -1, 0, 0, 0, -1;
        return r;
    }
    const Eigen::Vector3d a = axis / s;
    Eigen::Matrix3d k;
    k << 0, -a.z(), a.y(), a.z(), 0, -a.x(), -a.y(), a.x(), 0;
    const double theta = std::atan2(s, c);
    return Eigen::Matrix3d::Identity() + std::sin(theta) * k +
           (1.0 - std::cos(theta)) * k * k;
}

RigidTransform reorientation_for_plane(const PlaneModel& plane) {
    RigidTransform t;
    t.rotation = rotation_aligning(plane.normal, Eigen::Vector3d::UnitZ());
    t.translation = Eigen::Vector3d(0, 0, -plane.offset);
    return t;
}

namespace {

using Correspondences = std::vector<std::pair<Eigen::Vector2d, Eigen::Vector2d>>;

// Hartley normalization: centroid to origin, mean distance sqrt(2).
std::optional<Eigen::Matrix3d> normalizer(const Correspondences& pairs, bool src) {
    Eigen::Vector2d centroid = Eigen::Vector2d::Zero();
    for (const auto& [s, d] : pairs) centroid += src ? s : d;
    centroid /= static_cast<double>(pairs.size());
    double mean_dist = 0.0;
    for (const auto& [s, d] : pairs) mean_dist += ((src ? s : d) - centroid).norm();
    mean_dist /= static_cast<double>(pairs.size());
    if (mean_dist < 1e-12) return std::nullopt;
    const double scale = std::sqrt(2.0) / mean_dist;
    Eigen::Matrix3d t;
    t << scale, 0, -scale * centroid.x(), 0, scale, -scale * centroid.y(), 0, 0, 1;
    return t;
}

std::optional<Eigen::Matrix3d> dlt_homography(const Correspondences& pairs) {
    const auto t_src = normalizer(pairs, true);
    const auto t_dst = normalizer(pairs, false);
    if (!t_src || !t_dst) return std::nullopt;

    Eigen::MatrixXd a(2 * pairs.size(), 9);
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        const Eigen::Vector3d s = *t_src * pairs[i].first.homogeneous();
        const Eigen::Vector3d d = *t_dst * pairs[i].second.homogeneous();
        a.row(2 * i) << -s.x(), -s.y(), -1, 0, 0, 0, d.x() * s.x(), d.x() * s.y(), d.x();
        a.row(2 * i + 1) << 0, 0, 0, -s.x(), -s.y(), -1, d.y() * s.x(), d.y() * s.y(), d.y();
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeFullV);
    const Eigen::VectorXd h = svd.matrixV().col(8);
    Eigen::Matrix3d hn;
    hn << h[0], h[1], h[2], h[3], h[4], h[5], h[6], h[7], h[8];
    Eigen::Matrix3d result = t_dst->inverse() * hn * *t_src;
    if (!result.allFinite() || std::abs(result.determinant()) < 1e-15) return std::nullopt;
    if (std::abs(result(2, 2)) < 1e-12) return std::nullopt;
    return Eigen::Matrix3d(result / result(2, 2));
}

double transfer_error(const Eigen::Matrix3d& h, const Eigen::Matrix3d& h_inv,
                      const Eigen::Vector2d& s, const Eigen::Vector2d& d) {
    const Eigen::Vector3d fwd = h * s.homogeneous();
    const Eigen::Vector3d bwd = h_inv * d.homogeneous();
    if (std::abs(fwd.z()) < 1e-12 || std::abs(bwd.z()) < 1e-12)
        return std::numeric_limits<double>::infinity();
    const double e1 = (fwd.hnormalized() - d).norm();
    const double e2 = (bwd.hnormalized() - s).norm();
    return 0.5 * (e1 + e2);
}

bool collinear(const Eigen::Vector2d& a, const Eigen::Vector2d& b, const Eigen::Vector2d& c) {
    const Eigen::Vector2d u = b - a, v = c - a;
    const double cross = u.x() * v.y() - u.y() * v.x();
    return std::abs(cross) <= 1e-9 * std::max(1.0, u.norm() * v.norm());
}

bool degenerate_sample(const Correspondences& sample) {
    static const int triples[4][3] = {{0, 1, 2}, {0, 1, 3}, {0, 2, 3}, {1, 2, 3}};
    for (const auto& t : triples) {
        if (collinear(sample[t[0]].first, sample[t[1]].first, sample[t[2]].first)) return true;
        if (collinear(sample[t[0]].second, sample[t[1]].second, sample[t[2]].second)) return true;
    }
    return false;
}

}  // namespace

HomographyEstimate estimate_homography(const Correspondences& correspondences,
                                       double ransac_threshold, int iterations,
                                       std::uint64_t seed) {
    const std::size_t n = correspondences.size();
    if (n < 4)
        throw InsufficientCorrespondencesError("homography needs at least 4 correspondences, got " +
                                               std::to_string(n));
    if (ransac_threshold <= 0.0) throw std::invalid_argument("ransac threshold must be positive");
    if (iterations <= 0) throw std::invalid_argument("iteration count must be positive");

    Rng rng(seed);
    int best_count = -1;
    std::vector<std::size_t> best_inliers;

    Correspondences sample(4);
    for (int it = 0; it < iterations; ++it) {
        std::size_t pick[4];
        for (int k = 0; k < 4; ++k) {
            bool fresh;
            do {
                pick[k] = rng.below(n);
                fresh = true;
                for (int m = 0; m < k; ++m) fresh = fresh && pick[m] != pick[k];
            } while (!fresh);
            sample[k] = correspondences[pick[k]];
        }
        if (degenerate_sample(sample)) continue;
        const auto h = dlt_homography(sample);
        if (!h) continue;
        const Eigen::Matrix3d h_inv = h->inverse();
        if (!h_inv.allFinite()) continue;

        std::vector<std::size_t> inliers;
        for (std::size_t i = 0; i < n; ++i) {
            if (transfer_error(*h, h_inv, correspondences[i].first, correspondences[i].second) <=
                ransac_threshold)
                inliers.push_back(i);
        }
        if (static_cast<int>(inliers.size()) > best_count) {
            best_count = static_cast<int>(inliers.size());
            best_inliers = std::move(inliers);
        }
    }
    if (best_count < 4) throw DegenerateConfigurationError("no valid homography hypothesis found");

    Correspondences support;
    support.reserve(best_inliers.size());
    for (std::size_t i : best_inliers) support.push_back(correspondences[i]);
    const auto refined = dlt_homography(support);
    if (!refined) throw DegenerateConfigurationError("inlier set is degenerate");

    const Eigen::Matrix3d h_inv = refined->inverse();
    int count = 0;
    for (const auto& [s, d] : correspondences)
        if (transfer_error(*refined, h_inv, s, d) <= ransac_threshold) ++count;

    HomographyEstimate est;
    est.h.h = *refined;
    est.inlier_count = count;
    return est;
}

Eigen::Vector2d apply_homography(const Homography& h, const Eigen::Vector2d& p) {
    const Eigen::Vector3d q = h.h * p.homogeneous();
    if (std::abs(q.z()) < 1e-12)
        throw PointAtInfinityError("homography maps point to infinity");
    return q.hnormalized();
}

}  // namespace snowsight
