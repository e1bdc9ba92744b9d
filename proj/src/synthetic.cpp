#include "snowsight/synthetic.hpp"

#include "snowsight/classify.hpp"
#include "snowsight/errors.hpp"
#include "snowsight/rng.hpp"

#include <Eigen/Geometry>
#include <Eigen/LU>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace snowsight {

using nlohmann::json;

namespace {

constexpr double kDegToRad = 0.017453292519943295;
constexpr double kMetersPerDegLat = 111320.0;

struct Bounds {
    double x0, x1, y0, y1;
};

Bounds polygon_bounds(const Polygon& poly) {
    Bounds b{poly[0].x(), poly[0].x(), poly[0].y(), poly[0].y()};
    for (const auto& p : poly) {
        b.x0 = std::min(b.x0, p.x());
        b.x1 = std::max(b.x1, p.x());
        b.y0 = std::min(b.y0, p.y());
        b.y1 = std::max(b.y1, p.y());
    }
    return b;
}

bool point_in_polygon(const Polygon& poly, double x, double y) {
    bool in = false;
    for (std::size_t i = 0, j = poly.size() - 1; i < poly.size(); j = i++) {
        const auto& a = poly[i];
        const auto& b = poly[j];
        if ((a.y() > y) != (b.y() > y)) {
            const double t = (y - a.y()) / (b.y() - a.y());
            if (x < a.x() + t * (b.x() - a.x())) in = !in;
        }
    }
    return in;
}

// Axis-aligned rectangles get an interval test; rendering visits ~1M pixels
// per image, so this path matters.
struct RegionTest {
    bool is_rect = false;
    Bounds b{};
    const Polygon* poly = nullptr;

    explicit RegionTest(const Polygon& p) : b(polygon_bounds(p)), poly(&p) {
        if (p.size() == 4) {
            bool rect = true;
            for (std::size_t i = 0; i < 4; ++i) {
                const auto& u = p[i];
                const auto& v = p[(i + 1) % 4];
                rect = rect && ((u.x() == v.x()) != (u.y() == v.y()));
                rect = rect && (u.x() == b.x0 || u.x() == b.x1) &&
                       (u.y() == b.y0 || u.y() == b.y1);
            }
            is_rect = rect;
        }
    }
    bool contains(double x, double y) const {
        if (is_rect) return x >= b.x0 && x <= b.x1 && y >= b.y0 && y <= b.y1;
        return point_in_polygon(*poly, x, y);
    }
};

int orientation(const Eigen::Vector2d& a, const Eigen::Vector2d& b, const Eigen::Vector2d& c) {
    const double v = (b.x() - a.x()) * (c.y() - a.y()) - (b.y() - a.y()) * (c.x() - a.x());
    if (v > 1e-12) return 1;
    if (v < -1e-12) return -1;
    return 0;
}

bool on_segment(const Eigen::Vector2d& a, const Eigen::Vector2d& b, const Eigen::Vector2d& p) {
    return std::min(a.x(), b.x()) - 1e-12 <= p.x() && p.x() <= std::max(a.x(), b.x()) + 1e-12 &&
           std::min(a.y(), b.y()) - 1e-12 <= p.y() && p.y() <= std::max(a.y(), b.y()) + 1e-12;
}

bool segments_intersect(const Eigen::Vector2d& a, const Eigen::Vector2d& b,
                        const Eigen::Vector2d& c, const Eigen::Vector2d& d) {
    const int o1 = orientation(a, b, c), o2 = orientation(a, b, d);
    const int o3 = orientation(c, d, a), o4 = orientation(c, d, b);
    if (o1 != o2 && o3 != o4) return true;
    if (o1 == 0 && on_segment(a, b, c)) return true;
    if (o2 == 0 && on_segment(a, b, d)) return true;
    if (o3 == 0 && on_segment(c, d, a)) return true;
    if (o4 == 0 && on_segment(c, d, b)) return true;
    return false;
}

bool polygon_simple(const Polygon& poly) {
    const std::size_t n = poly.size();
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            // skip adjacent edges (shared endpoint)
            if (j == i || (j + 1) % n == i || (i + 1) % n == j) continue;
            if (segments_intersect(poly[i], poly[(i + 1) % n], poly[j], poly[(j + 1) % n]))
                return false;
        }
    }
    return true;
}

bool polygons_disjoint(const Polygon& a, const Polygon& b) {
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < b.size(); ++j)
            if (segments_intersect(a[i], a[(i + 1) % a.size()], b[j], b[(j + 1) % b.size()]))
                return false;
    if (point_in_polygon(a, b[0].x(), b[0].y())) return false;
    if (point_in_polygon(b, a[0].x(), a[0].y())) return false;
    return true;
}

double polygon_centroid_y(const Polygon& poly) {
    double s = 0.0;
    for (const auto& p : poly) s += p.y();
    return s / static_cast<double>(poly.size());
}

// Snow region in ground coordinates. CoversSidewalk lays stripes across the
// strip so that any camera footprint sees roughly the requested fraction,
// extended one meter laterally so splat spill stays on snow statistics.
struct SnowRegion {
    SnowScenario scenario;
    Bounds strip{};
    double y_lo = 0.0, y_hi = 0.0;
    double period = 1.0;

    SnowRegion(const SnowScenario& s, const Polygon& sidewalk, const Polygon& road)
        : scenario(s), strip(polygon_bounds(sidewalk)) {
        if (s.kind == SnowScenario::Kind::CoversSidewalk) {
            y_lo = strip.y0 - 1.0;
            y_hi = strip.y1 + 1.0;
            period = std::max((strip.x1 - strip.x0) / 20.0, 1e-9);
        } else if (s.kind == SnowScenario::Kind::BesideSidewalk) {
            // Band on the side of the sidewalk away from the road, with a
            // one-meter gap: snow in frame, none on the walkway.
            const double side =
                polygon_centroid_y(sidewalk) < polygon_centroid_y(road) ? -1.0 : 1.0;
            const double edge = side < 0 ? strip.y0 : strip.y1;
            y_lo = std::min(edge + side * 1.0, edge + side * 2.5);
            y_hi = std::max(edge + side * 1.0, edge + side * 2.5);
        }
    }

    bool contains(double x, double y) const {
        switch (scenario.kind) {
            case SnowScenario::Kind::None:
                return false;
            case SnowScenario::Kind::CoversSidewalk: {
                if (x < strip.x0 || x > strip.x1 || y < y_lo || y > y_hi) return false;
                const double phase = (x - strip.x0) / period;
                return phase - std::floor(phase) < scenario.fraction;
            }
            case SnowScenario::Kind::BesideSidewalk:
                return x >= strip.x0 && x <= strip.x1 && y >= y_lo && y <= y_hi;
        }
        return false;
    }
};

// Camera in the ground frame: x_cam = r * (p - center). Yaw about +z from
// the +x travel direction, then pitched down. Rows of r are the camera
// right / down / forward axes, so +x_img is the passenger side for yaw 0.
struct GroundCamera {
    Eigen::Matrix3d r;
    Eigen::Vector3d center;
};

GroundCamera make_ground_camera(double x, double y, double height, double yaw_rad,
                                double pitch_rad) {
    const Eigen::Vector3d fwd_h(std::cos(yaw_rad), std::sin(yaw_rad), 0.0);
    const Eigen::Vector3d cam_z =
        std::cos(pitch_rad) * fwd_h + std::sin(pitch_rad) * Eigen::Vector3d(0, 0, -1);
    const Eigen::Vector3d cam_x = cam_z.cross(Eigen::Vector3d::UnitZ()).normalized();
    const Eigen::Vector3d cam_y = cam_z.cross(cam_x);
    GroundCamera cam;
    cam.r.row(0) = cam_x;
    cam.r.row(1) = cam_y;
    cam.r.row(2) = cam_z;
    cam.center = Eigen::Vector3d(x, y, height);
    return cam;
}

Eigen::Vector4d quat_from_rotation(const Eigen::Matrix3d& m) {
    double t;
    Eigen::Vector4d q;  // (w, x, y, z)
    if (m(2, 2) < 0) {
        if (m(0, 0) > m(1, 1)) {
            t = 1 + m(0, 0) - m(1, 1) - m(2, 2);
            q << m(2, 1) - m(1, 2), t, m(0, 1) + m(1, 0), m(2, 0) + m(0, 2);
        } else {
            t = 1 - m(0, 0) + m(1, 1) - m(2, 2);
            q << m(0, 2) - m(2, 0), m(0, 1) + m(1, 0), t, m(1, 2) + m(2, 1);
        }
    } else {
        if (m(0, 0) < -m(1, 1)) {
            t = 1 - m(0, 0) - m(1, 1) + m(2, 2);
            q << m(1, 0) - m(0, 1), m(2, 0) + m(0, 2), m(1, 2) + m(2, 1), t;
        } else {
            t = 1 + m(0, 0) + m(1, 1) + m(2, 2);
            q << t, m(2, 1) - m(1, 2), m(0, 2) - m(2, 0), m(1, 0) - m(0, 1);
        }
    }
    q *= 0.5 / std::sqrt(t);
    if (q[0] < 0) q = -q;
    q /= q.norm();
    return q;
}

Eigen::Vector2d sample_in_polygon(Rng& rng, const Polygon& poly, const Bounds& b) {
    for (;;) {
        const double x = rng.uniform(b.x0, b.x1);
        const double y = rng.uniform(b.y0, b.y1);
        if (point_in_polygon(poly, x, y)) return {x, y};
    }
}

void validate_spec(const SceneSpec& s) {
    auto fail = [](const std::string& why) { throw InvalidSpecError("invalid scene spec: " + why); };
    if (s.scene_id.empty() || s.scene_id.find_first_of(" \t\r\n") != std::string::npos)
        fail("scene_id must be a non-empty single token");
    if (s.plane_normal.norm() < 1e-12) fail("plane normal is zero");
    if (s.road.size() < 3 || s.sidewalk.size() < 3) fail("polygons need at least 3 vertices");
    if (!polygon_simple(s.road)) fail("road polygon is self-intersecting");
    if (!polygon_simple(s.sidewalk)) fail("sidewalk polygon is self-intersecting");
    if (!polygons_disjoint(s.road, s.sidewalk)) fail("road and sidewalk polygons overlap");
    if (s.runs < 1 || s.images_per_run < 1) fail("need at least one run and one image per run");
    if (s.runs * s.images_per_run < 2) fail("need at least two reference images");
    if (s.step_m <= 0.0) fail("step_m must be positive");
    if (s.camera_height_m <= 0.0) fail("camera_height_m must be positive");
    if (s.image_width <= 0 || s.image_height <= 0) fail("image dimensions must be positive");
    if (s.focal_px <= 0.0) fail("focal_px must be positive");
    if (s.point_count < 10) fail("point_count must be at least 10");
    if (s.outlier_fraction < 0.0 || s.outlier_fraction >= 1.0)
        fail("outlier_fraction must be in [0, 1)");
    if (s.pixel_noise_sigma < 0.0) fail("pixel_noise_sigma must be >= 0");
    if (s.query_count < 0) fail("query_count must be >= 0");
    if (s.snow.fraction < 0.0 || s.snow.fraction > 1.0) fail("snow fraction must be in [0, 1]");
    if (std::abs(s.gps_lat) > 89.0 || std::abs(s.gps_lon) > 180.0) fail("GPS origin out of range");
    if (s.lateral_jitter_m < 0.0 || s.yaw_jitter_deg < 0.0 || s.pitch_jitter_deg < 0.0)
        fail("jitter amounts must be >= 0");
}

struct ImagePlan {
    std::string name;
    GroundCamera cam;
    std::uint32_t camera_id;
    bool is_query;
};

}  // namespace

SceneSpec default_scene_spec() {
    SceneSpec s;
    s.road = {{0.0, -3.5}, {66.0, -3.5}, {66.0, 3.5}, {0.0, 3.5}};
    s.sidewalk = {{0.0, -6.5}, {66.0, -6.5}, {66.0, -4.5}, {0.0, -4.5}};
    return s;
}

SyntheticBundle generate(const SceneSpec& spec) {
    validate_spec(spec);
    SyntheticBundle bundle;
    bundle.spec = spec;

    Rng rng(spec.seed);

    // Pose of the ground frame inside the reconstruction frame.
    const Eigen::Vector3d normal = spec.plane_normal.normalized();
    bundle.true_normal = normal;
    bundle.true_offset = spec.plane_offset;
    bundle.scene_pose.rotation = rotation_aligning(Eigen::Vector3d::UnitZ(), normal);
    bundle.scene_pose.translation = spec.plane_offset * normal;

    const Bounds road_b = polygon_bounds(spec.road);
    const Bounds side_b = polygon_bounds(spec.sidewalk);

    // Cameras: one intrinsics record per run (a vehicle rig is physically the
    // same across passes, but COLMAP still calibrates each ingest separately),
    // one per query. Run cameras cycle through the supported model types.
    auto make_intrinsics = [&](std::uint32_t id, int kind) {
        CameraIntrinsics cam;
        cam.camera_id = id;
        cam.width = spec.image_width;
        cam.height = spec.image_height;
        const double cx = spec.image_width / 2.0, cy = spec.image_height / 2.0;
        switch (kind % 3) {
            case 0:
                cam.model = CameraModel::Pinhole;
                cam.params = {spec.focal_px, spec.focal_px, cx, cy};
                break;
            case 1:
                cam.model = CameraModel::SimplePinhole;
                cam.params = {spec.focal_px, cx, cy};
                break;
            default:
                cam.model = CameraModel::SimpleRadial;
                cam.params = {spec.focal_px, cx, cy, 0.0};  // k = 0 keeps rays exact
                break;
        }
        return cam;
    };

    std::vector<ImagePlan> plan;
    std::uint32_t next_camera = 1;
    for (int r = 0; r < spec.runs; ++r) {
        bundle.model.cameras.emplace(next_camera, make_intrinsics(next_camera, r));
        for (int i = 0; i < spec.images_per_run; ++i) {
            const double x = r * spec.run_stagger_m + i * spec.step_m;
            const double y = spec.lane_y + rng.uniform(-1.0, 1.0) * spec.lateral_jitter_m;
            const double yaw = rng.uniform(-1.0, 1.0) * spec.yaw_jitter_deg * kDegToRad;
            const double pitch =
                (spec.pitch_deg + rng.uniform(-1.0, 1.0) * spec.pitch_jitter_deg) * kDegToRad;
            char name[32];
            std::snprintf(name, sizeof name, "r%d_i%02d.jpg", r, i);
            plan.push_back({name, make_ground_camera(x, y, spec.camera_height_m, yaw, pitch),
                            next_camera, false});
        }
        ++next_camera;
    }
    const double span = (spec.images_per_run - 1) * spec.step_m;
    for (int q = 0; q < spec.query_count; ++q) {
        const double frac = spec.query_count > 1
                                ? static_cast<double>(q) / (spec.query_count - 1)
                                : 0.5;
        const double x = 0.15 * span + 0.55 * span * frac;
        const double y = spec.lane_y + rng.uniform(-1.0, 1.0) * spec.lateral_jitter_m;
        const double yaw = rng.uniform(-1.0, 1.0) * spec.yaw_jitter_deg * kDegToRad;
        const double pitch =
            (spec.pitch_deg + rng.uniform(-1.0, 1.0) * spec.pitch_jitter_deg) * kDegToRad;
        char name[32];
        std::snprintf(name, sizeof name, "query_%02d.jpg", q);
        bundle.model.cameras.emplace(next_camera, make_intrinsics(next_camera, 0));
        plan.push_back({name, make_ground_camera(x, y, spec.camera_height_m, yaw, pitch),
                        next_camera, true});
        ++next_camera;
    }
    if (spec.far_query) {
        const double x = 0.4 * span;
        const double pitch = spec.pitch_deg * kDegToRad;
        bundle.model.cameras.emplace(next_camera, make_intrinsics(next_camera, 0));
        plan.push_back({"query_far.jpg",
                        make_ground_camera(x, spec.lane_y, spec.camera_height_m, 0.0, pitch),
                        next_camera, true});
        ++next_camera;
    }

    // World-frame image records.
    std::uint32_t next_image = 1;
    for (const auto& ip : plan) {
        ImageRecord img;
        img.image_id = next_image++;
        img.name = ip.name;
        img.camera_id = ip.camera_id;
        const Eigen::Matrix3d r_wc = ip.cam.r * bundle.scene_pose.rotation.transpose();
        const Eigen::Vector3d center_w = bundle.scene_pose.apply(ip.cam.center);
        img.qvec = quat_from_rotation(r_wc);
        img.tvec = -(r_wc * center_w);
        bundle.model.images.emplace(img.image_id, std::move(img));
    }

    // 3D points: road and sidewalk surface points on the plane, plus
    // floating clutter ("trees") well above the auto inlier threshold.
    const int n_clutter = static_cast<int>(std::llround(spec.point_count * spec.outlier_fraction));
    const int n_surface = spec.point_count - n_clutter;
    const int n_road = (n_surface * 2) / 3;
    const int n_side = n_surface - n_road;
    struct GroundPoint {
        Eigen::Vector3d g;
        std::array<std::uint8_t, 3> color;
    };
    std::vector<GroundPoint> raw;
    raw.reserve(spec.point_count);
    for (int i = 0; i < n_road; ++i) {
        const Eigen::Vector2d p = sample_in_polygon(rng, spec.road, road_b);
        raw.push_back({{p.x(), p.y(), 0.0}, {96, 96, 96}});
    }
    for (int i = 0; i < n_side; ++i) {
        const Eigen::Vector2d p = sample_in_polygon(rng, spec.sidewalk, side_b);
        raw.push_back({{p.x(), p.y(), 0.0}, {168, 168, 168}});
    }
    const Bounds all_b{std::min(road_b.x0, side_b.x0), std::max(road_b.x1, side_b.x1),
                       std::min(road_b.y0, side_b.y0), std::max(road_b.y1, side_b.y1)};
    for (int i = 0; i < n_clutter; ++i) {
        const double x = rng.uniform(all_b.x0, all_b.x1);
        const double y = rng.uniform(all_b.y0, all_b.y1);
        const double z = rng.uniform(1.0, 5.0);
        raw.push_back({{x, y, z}, {40, 110, 40}});
    }

    std::uint64_t next_point = 1;
    for (const auto& gp : raw) {
        ScenePoint pt;
        pt.point3d_id = next_point++;
        pt.xyz = bundle.scene_pose.apply(gp.g);
        pt.color = gp.color;
        pt.reproj_error = spec.pixel_noise_sigma;
        bundle.model.points.emplace(pt.point3d_id, std::move(pt));
    }

    // Observations: exact projection through the stored pose, then noise.
    for (auto& [iid, img] : bundle.model.images) {
        const Eigen::Matrix3d rot = rotation_from_quaternion(img.qvec);
        const CameraIntrinsics& intr = bundle.model.cameras.at(img.camera_id);
        for (auto& [pid, pt] : bundle.model.points) {
            const auto uv = project_to_image(intr, rot, img.tvec, pt.xyz);
            if (!uv) continue;
            if (uv->x() < 0.0 || uv->y() < 0.0 || uv->x() >= intr.width ||
                uv->y() >= intr.height)
                continue;
            Observation obs;
            obs.pixel = *uv;
            if (spec.pixel_noise_sigma > 0.0) {
                obs.pixel.x() += spec.pixel_noise_sigma * rng.gaussian();
                obs.pixel.y() += spec.pixel_noise_sigma * rng.gaussian();
            }
            obs.point3d_id = pid;
            pt.track.emplace_back(iid, static_cast<std::uint32_t>(img.observations.size()));
            img.observations.push_back(std::move(obs));
        }
    }
    // Points seen by no image would violate the non-empty-track invariant.
    for (auto it = bundle.model.points.begin(); it != bundle.model.points.end();) {
        if (it->second.track.empty())
            it = bundle.model.points.erase(it);
        else
            ++it;
    }
    if (bundle.model.points.size() < 10)
        throw InvalidSpecError("scene too sparse: almost no point is visible to any camera");

    // Rasters, true homographies, true coverage.
    const RegionTest road_test(spec.road);
    const RegionTest side_test(spec.sidewalk);
    const SnowRegion snow(spec.snow, spec.sidewalk, spec.road);

    for (const auto& ip : plan) {
        const CameraIntrinsics& intr = bundle.model.cameras.at(ip.camera_id);
        Eigen::Matrix3d k;
        k << intr.fx(), 0, intr.cx(), 0, intr.fy(), intr.cy(), 0, 0, 1;
        Eigen::Matrix3d ground_to_image;
        ground_to_image.col(0) = ip.cam.r.col(0);
        ground_to_image.col(1) = ip.cam.r.col(1);
        ground_to_image.col(2) = -(ip.cam.r * ip.cam.center);
        ground_to_image = k * ground_to_image;
        bundle.true_ground_to_image[ip.name] = ground_to_image;

        const Eigen::Matrix3d img_to_ground = ground_to_image.inverse();
        // Forward-depth test, affine in ground coordinates.
        const double fzx = ip.cam.r(2, 0);
        const double fzy = ip.cam.r(2, 1);
        const double fz0 = -ip.cam.r.row(2).dot(ip.cam.center);

        const bool with_snow = ip.is_query;
        std::size_t side_total = 0, side_snow = 0;
        LabelRaster raster = LabelRaster::filled(intr.width, intr.height, 0);
        const Eigen::Vector3d du = img_to_ground.col(0);
        for (int v = 0; v < intr.height; ++v) {
            Eigen::Vector3d gh = img_to_ground * Eigen::Vector3d(0.5, v + 0.5, 1.0);
            for (int u = 0; u < intr.width; ++u, gh += du) {
                const double w = gh.z();
                if (std::abs(w) < 1e-12) continue;
                const double gx = gh.x() / w;
                const double gy = gh.y() / w;
                if (fz0 + fzx * gx + fzy * gy < 0.05) continue;  // behind or at the horizon
                const bool on_side = side_test.contains(gx, gy);
                const bool snowy = with_snow && snow.contains(gx, gy);
                if (on_side) {
                    ++side_total;
                    if (snowy) ++side_snow;
                }
                if (snowy)
                    raster.set(u, v, 3);
                else if (on_side)
                    raster.set(u, v, 2);
                else if (road_test.contains(gx, gy))
                    raster.set(u, v, 1);
            }
        }
        bundle.rasters.emplace(ip.name, std::move(raster));
        if (ip.is_query)
            bundle.query_true_coverage[ip.name] =
                side_total ? static_cast<double>(side_snow) / static_cast<double>(side_total)
                           : 0.0;
    }

    // Manifest with tangent-plane GPS; the far query is pushed ~5.5 km north
    // and carries no category label.
    const double m_per_deg_lon = kMetersPerDegLat * std::cos(spec.gps_lat * kDegToRad);
    auto to_gps = [&](const Eigen::Vector3d& ground_pos) {
        return std::pair<double, double>{spec.gps_lat + ground_pos.y() / kMetersPerDegLat,
                                         spec.gps_lon + ground_pos.x() / m_per_deg_lon};
    };
    std::optional<QueryCategory> query_category;
    switch (spec.snow.kind) {
        case SnowScenario::Kind::None:
            query_category = QueryCategory::Clear;
            break;
        case SnowScenario::Kind::CoversSidewalk:
            query_category = spec.snow.fraction > 0.0 ? QueryCategory::SnowCovered
                                                      : QueryCategory::Clear;
            break;
        case SnowScenario::Kind::BesideSidewalk:
            query_category = QueryCategory::Cleared;
            break;
    }

    Manifest& manifest = bundle.manifest;
    for (const auto& ip : plan) {
        ManifestEntry e;
        e.name = ip.name;
        e.role = ip.is_query ? ImageRole::Query : ImageRole::Reference;
        const auto [lat, lon] = to_gps(ip.cam.center);
        e.lat = lat;
        e.lon = lon;
        if (ip.name == "query_far.jpg") {
            e.lat = spec.gps_lat + 0.05;
        } else if (ip.is_query) {
            e.category = query_category;
        }
        e.raster = "rasters/" + ip.name.substr(0, ip.name.size() - 4) + ".pgm";
        if (!ip.is_query) manifest.scene.reference_names.push_back(e.name);
        manifest.entries.push_back(std::move(e));
    }

    manifest.scene.scene_id = spec.scene_id;
    double lat_sum = 0.0, lon_sum = 0.0;
    std::size_t n_ref = 0;
    for (const auto& e : manifest.entries) {
        if (e.role != ImageRole::Reference) continue;
        lat_sum += e.lat;
        lon_sum += e.lon;
        ++n_ref;
    }
    manifest.scene.gps_lat = lat_sum / static_cast<double>(n_ref);
    manifest.scene.gps_lon = lon_sum / static_cast<double>(n_ref);
    double radius = 0.0;
    for (const auto& e : manifest.entries) {
        if (e.name == "query_far.jpg") continue;
        radius = std::max(radius, haversine_m(manifest.scene.gps_lat, manifest.scene.gps_lon,
                                              e.lat, e.lon));
    }
    manifest.scene.gps_radius_m = radius + 50.0;

    return bundle;
}

double true_coverage(const SyntheticBundle& bundle, const std::string& query_name) {
    auto it = bundle.query_true_coverage.find(query_name);
    if (it == bundle.query_true_coverage.end()) throw UnknownQueryError(query_name);
    return it->second;
}

namespace {

json matrix_json(const Eigen::Matrix3d& m) {
    json a = json::array();
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) a.push_back(m(r, c));
    return a;
}

}  // namespace

void write_bundle(const SyntheticBundle& bundle, const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir / "rasters", ec);
    if (ec) throw IoError("cannot create " + (dir / "rasters").string() + ": " + ec.message());

    write_sparse_model(bundle.model, dir / "sparse");
    for (const auto& [name, raster] : bundle.rasters)
        save_label_raster(raster, dir / "rasters" / (name.substr(0, name.size() - 4) + ".pgm"));

    save_manifest(bundle.manifest, dir / "manifest.json");

    json truth;
    truth["plane"] = {{"normal", {bundle.true_normal.x(), bundle.true_normal.y(),
                                  bundle.true_normal.z()}},
                      {"offset", bundle.true_offset}};
    truth["scene_pose"] = {{"rotation", matrix_json(bundle.scene_pose.rotation)},
                           {"translation",
                            {bundle.scene_pose.translation.x(), bundle.scene_pose.translation.y(),
                             bundle.scene_pose.translation.z()}}};
    truth["homographies"] = json::object();
    for (const auto& [name, h] : bundle.true_ground_to_image)
        truth["homographies"][name] = matrix_json(h);
    truth["true_coverage"] = bundle.query_true_coverage;

    std::ofstream out(dir / "ground_truth.json", std::ios::binary);
    if (!out) throw IoError("cannot write " + (dir / "ground_truth.json").string());
    out << truth.dump(2) << '\n';
    if (!out) throw IoError("write failed: " + (dir / "ground_truth.json").string());
}

namespace {

Eigen::Vector2d json_point(const json& v) {
    if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number())
        throw InvalidSpecError("polygon vertices must be [x, y] pairs");
    return {v[0].get<double>(), v[1].get<double>()};
}

}  // namespace

SceneSpec scene_spec_from_json(const std::string& json_text) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::exception& e) {
        throw InvalidSpecError(std::string("spec is not valid JSON: ") + e.what());
    }
    if (!doc.is_object()) throw InvalidSpecError("spec must be a JSON object");

    SceneSpec s = default_scene_spec();
    for (const auto& [key, value] : doc.items()) {
        try {
            if (key == "seed") s.seed = value.get<std::uint64_t>();
            else if (key == "scene_id") s.scene_id = value.get<std::string>();
            else if (key == "plane_normal") {
                if (!value.is_array() || value.size() != 3)
                    throw InvalidSpecError("plane_normal must be [x, y, z]");
                for (int k = 0; k < 3; ++k) s.plane_normal[k] = value[k].get<double>();
            } else if (key == "plane_offset") s.plane_offset = value.get<double>();
            else if (key == "road" || key == "sidewalk") {
                Polygon poly;
                for (const auto& v : value) poly.push_back(json_point(v));
                (key == "road" ? s.road : s.sidewalk) = std::move(poly);
            } else if (key == "runs") s.runs = value.get<int>();
            else if (key == "images_per_run") s.images_per_run = value.get<int>();
            else if (key == "step_m") s.step_m = value.get<double>();
            else if (key == "run_stagger_m") s.run_stagger_m = value.get<double>();
            else if (key == "lane_y") s.lane_y = value.get<double>();
            else if (key == "camera_height_m") s.camera_height_m = value.get<double>();
            else if (key == "pitch_deg") s.pitch_deg = value.get<double>();
            else if (key == "lateral_jitter_m") s.lateral_jitter_m = value.get<double>();
            else if (key == "yaw_jitter_deg") s.yaw_jitter_deg = value.get<double>();
            else if (key == "pitch_jitter_deg") s.pitch_jitter_deg = value.get<double>();
            else if (key == "image_width") s.image_width = value.get<int>();
            else if (key == "image_height") s.image_height = value.get<int>();
            else if (key == "focal_px") s.focal_px = value.get<double>();
            else if (key == "point_count") s.point_count = value.get<int>();
            else if (key == "outlier_fraction") s.outlier_fraction = value.get<double>();
            else if (key == "pixel_noise_sigma") s.pixel_noise_sigma = value.get<double>();
            else if (key == "query_count") s.query_count = value.get<int>();
            else if (key == "far_query") s.far_query = value.get<bool>();
            else if (key == "gps_lat") s.gps_lat = value.get<double>();
            else if (key == "gps_lon") s.gps_lon = value.get<double>();
            else if (key == "snow") {
                if (!value.is_object()) throw InvalidSpecError("snow must be an object");
                const std::string kind = value.value("kind", "none");
                if (kind == "none") s.snow.kind = SnowScenario::Kind::None;
                else if (kind == "covers_sidewalk") s.snow.kind = SnowScenario::Kind::CoversSidewalk;
                else if (kind == "beside_sidewalk") s.snow.kind = SnowScenario::Kind::BesideSidewalk;
                else throw InvalidSpecError("unknown snow kind '" + kind + "'");
                s.snow.fraction = value.value("fraction", 0.0);
            } else {
                throw InvalidSpecError("unknown spec key '" + key + "'");
            }
        } catch (const json::exception& e) {
            throw InvalidSpecError("bad value for '" + key + "': " + e.what());
        }
    }
    validate_spec(s);
    return s;
}

SceneSpec load_scene_spec(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw MissingFileError(path.string());
    std::string text(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>{});
    return scene_spec_from_json(text);
}

}  // namespace snowsight
