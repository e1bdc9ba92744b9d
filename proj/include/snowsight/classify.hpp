#pragma once

#include "snowsight/colmap.hpp"
#include "snowsight/masks.hpp"
#include "snowsight/sidewalk_model.hpp"

#include <optional>
#include <string>
#include <string_view>

namespace snowsight {

// One query image: GPS sidecar, pose estimated by registering the image
// against the clear-weather reconstruction, and its semantic label raster.
struct QueryInput {
    std::string name;
    double gps_lat = 0.0;
    double gps_lon = 0.0;
    Eigen::Vector4d qvec{1, 0, 0, 0};
    Eigen::Vector3d tvec{0, 0, 0};
    CameraIntrinsics intrinsics;
    LabelRaster raster = LabelRaster::filled(1, 1, 0);
};

// NoSnow is reported as Clear; it is kept distinct because no coverage is
// computed on that path.
enum class Outcome { OutOfScene, NoSnow, Clear, SnowCovered };

std::string_view outcome_label(Outcome outcome);

struct Verdict {
    Outcome outcome = Outcome::OutOfScene;
    std::optional<double> coverage;
    double threshold = 0.0;
    std::size_t projected_pixel_count = 0;
    std::optional<LabelRaster> overlay;
};

struct ClassifyParams {
    double splat_radius = 2.0;  // pixels at 1920 width, scaled by actual width
    double min_snow_fraction = 0.0;
    bool make_overlay = false;
};

double haversine_m(double lat1, double lon1, double lat2, double lon2);

// True iff the query GPS position is within the scene radius (inclusive).
bool gps_gate(double lat, double lon, const SceneDescriptor& scene);

// True iff the snow pixel fraction strictly exceeds min_fraction.
bool snow_present(const LabelRaster& raster, double min_fraction);

int effective_splat_radius(double radius_at_1920, int width);

// Lifts every stored ground point back to 3D, projects it through the query
// pose, and splats the surviving in-frame pixels with an L2 disc. Throws
// EmptyProjection when nothing lands in frame.
PixelSet project_sidewalk(const SidewalkModel& model, const QueryInput& query, int splat_radius);

// GPS gate, snow gate, projection, overlap, compare; strictly-greater-than
// the threshold raises the alert, ties stay Clear. The optional overlay
// raster uses 0=background, 1=projected sidewalk, 2=snow, 3=overlap.
Verdict classify(const SidewalkModel& model, const QueryInput& query, double threshold,
                 const ClassifyParams& params = {});

}  // namespace snowsight
