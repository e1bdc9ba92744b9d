#include "snowsight/classify.hpp"

#include "snowsight/errors.hpp"
#include "snowsight/geometry.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace snowsight {

std::string_view outcome_label(Outcome outcome) {
    switch (outcome) {
        case Outcome::OutOfScene: return "OutOfScene";
        case Outcome::NoSnow: return "Clear";
        case Outcome::Clear: return "Clear";
        case Outcome::SnowCovered: return "SnowCovered";
    }
    return "?";
}

double haversine_m(double lat1, double lon1, double lat2, double lon2) {
    constexpr double kEarthRadiusM = 6371000.0;
    constexpr double kDegToRad = 0.017453292519943295;
    const double phi1 = lat1 * kDegToRad;
    const double phi2 = lat2 * kDegToRad;
    const double dphi = (lat2 - lat1) * kDegToRad;
    const double dlam = (lon2 - lon1) * kDegToRad;
    const double sp = std::sin(dphi / 2.0);
    const double sl = std::sin(dlam / 2.0);
    const double a = sp * sp + std::cos(phi1) * std::cos(phi2) * sl * sl;
    return 2.0 * kEarthRadiusM * std::asin(std::min(1.0, std::sqrt(a)));
}

bool gps_gate(double lat, double lon, const SceneDescriptor& scene) {
    return haversine_m(lat, lon, scene.gps_lat, scene.gps_lon) <= scene.gps_radius_m;
}

bool snow_present(const LabelRaster& raster, double min_fraction) {
    if (min_fraction < 0.0 || min_fraction >= 1.0)
        throw std::invalid_argument("min_fraction must be in [0, 1)");
    const double total = static_cast<double>(raster.labels().size());
    return static_cast<double>(raster.count(Category::Snow)) / total > min_fraction;
}

int effective_splat_radius(double radius_at_1920, int width) {
    if (radius_at_1920 < 0.0) throw std::invalid_argument("splat radius must be >= 0");
    return static_cast<int>(std::llround(radius_at_1920 * width / 1920.0));
}

PixelSet project_sidewalk(const SidewalkModel& model, const QueryInput& query,
                          int splat_radius) {
    if (splat_radius < 0) throw std::invalid_argument("splat radius must be >= 0");
    const Eigen::Matrix3d rot = rotation_from_quaternion(query.qvec);
    const RigidTransform lift = model.reorient.inverse();

    // Discrete L2 disc offsets, precomputed once.
    std::vector<std::pair<int, int>> disc;
    for (int dy = -splat_radius; dy <= splat_radius; ++dy)
        for (int dx = -splat_radius; dx <= splat_radius; ++dx)
            if (dx * dx + dy * dy <= splat_radius * splat_radius) disc.emplace_back(dx, dy);

    const int w = query.intrinsics.width;
    const int h = query.intrinsics.height;
    PixelSet out(w, h);
    bool any = false;
    for (const auto& p : model.points) {
        const Eigen::Vector3d world = lift.apply(Eigen::Vector3d(p.x(), p.y(), 0.0));
        const auto uv = project_to_image(query.intrinsics, rot, query.tvec, world);
        if (!uv) continue;
        const int x = static_cast<int>(std::floor(uv->x()));
        const int y = static_cast<int>(std::floor(uv->y()));
        if (x < 0 || y < 0 || x >= w || y >= h) continue;
        any = true;
        for (const auto& [dx, dy] : disc) {
            const int sx = x + dx, sy = y + dy;
            if (sx >= 0 && sy >= 0 && sx < w && sy < h) out.insert(sx, sy);
        }
    }
    if (!any)
        throw EmptyProjectionError("no sidewalk point projects into " + query.name);
    return out;
}

Verdict classify(const SidewalkModel& model, const QueryInput& query, double threshold,
                 const ClassifyParams& params) {
    if (threshold < 0.0 || threshold > 1.0)
        throw std::invalid_argument("threshold must be in [0, 1]");
    if (query.raster.width() != query.intrinsics.width ||
        query.raster.height() != query.intrinsics.height)
        throw DimensionMismatchError("query raster does not match intrinsics dimensions");

    Verdict v;
    v.threshold = threshold;
    if (!gps_gate(query.gps_lat, query.gps_lon, model.scene)) {
        v.outcome = Outcome::OutOfScene;
        return v;
    }

    const int radius = effective_splat_radius(params.splat_radius, query.intrinsics.width);
    if (!snow_present(query.raster, params.min_snow_fraction)) {
        v.outcome = Outcome::NoSnow;
        if (params.make_overlay) {
            // Diagnostics still show where the sidewalk is expected.
            const PixelSet projected = project_sidewalk(model, query, radius);
            v.projected_pixel_count = projected.size();
            LabelRaster overlay = LabelRaster::filled(query.raster.width(),
                                                      query.raster.height(), 0);
            projected.for_each([&](int x, int y) { overlay.set(x, y, 1); });
            v.overlay = std::move(overlay);
        }
        return v;
    }

    const PixelSet projected = project_sidewalk(model, query, radius);
    const PixelSet snow = category_pixels(query.raster, Category::Snow);
    const double coverage = overlap_ratio(projected, snow);
    v.coverage = coverage;
    v.projected_pixel_count = projected.size();
    v.outcome = coverage > threshold ? Outcome::SnowCovered : Outcome::Clear;
    if (params.make_overlay) {
        LabelRaster overlay = LabelRaster::filled(query.raster.width(), query.raster.height(), 0);
        projected.for_each([&](int x, int y) { overlay.set(x, y, 1); });
        snow.for_each([&](int x, int y) {
            overlay.set(x, y, overlay.at(x, y) == 1 ? 3 : 2);
        });
        v.overlay = std::move(overlay);
    }
    return v;
}

}  // namespace snowsight
