#include "snowsight/sidewalk_model.hpp"

#include "snowsight/crc32.hpp"
#include "snowsight/errors.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

namespace snowsight {

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

const ImageRecord& image_by_name(const SparseModel& model, const std::string& name) {
    for (const auto& [id, img] : model.images)
        if (img.name == name) return img;
    throw InvalidInputError("reference image not in model: " + name);
}

}  // namespace

std::vector<std::pair<Eigen::Vector2d, Eigen::Vector2d>> ground_correspondences(
    const SparseModel& model, std::uint32_t image_id, const PixelSet& road,
    const PlaneModel& plane, const RigidTransform& reorient) {
    auto it = model.images.find(image_id);
    if (it == model.images.end()) throw UnknownImageError(image_id);

    std::vector<std::pair<Eigen::Vector2d, Eigen::Vector2d>> pairs;
    for (const auto& obs : it->second.observations) {
        if (!obs.point3d_id) continue;
        const int px = static_cast<int>(std::floor(obs.pixel.x()));
        const int py = static_cast<int>(std::floor(obs.pixel.y()));
        if (!road.contains(px, py)) continue;
        if (!plane.inlier_ids.count(*obs.point3d_id)) continue;
        const Eigen::Vector3d g = reorient.apply(model.points.at(*obs.point3d_id).xyz);
        pairs.emplace_back(obs.pixel, g.head<2>());
    }
    if (pairs.size() < 4)
        throw NoCorrespondencesError("only " + std::to_string(pairs.size()) +
                                     " road correspondences");
    return pairs;
}

SidewalkModel build_sidewalk_model(const SparseModel& model,
                                   const std::map<std::string, LabelRaster>& rasters,
                                   const SceneDescriptor& scene, const BuildParams& params,
                                   std::vector<std::string>* warnings) {
    if (scene.reference_names.empty())
        throw InvalidInputError("scene descriptor lists no reference images");
    if (params.stride < 1) throw std::invalid_argument("stride must be >= 1");

    std::vector<std::string> names = scene.reference_names;
    std::sort(names.begin(), names.end());

    struct Ref {
        const ImageRecord* image;
        const LabelRaster* raster;
        PixelSet road;
    };
    std::vector<Ref> refs;
    refs.reserve(names.size());
    for (const auto& name : names) {
        auto rit = rasters.find(name);
        if (rit == rasters.end()) throw InvalidInputError("no raster for reference image " + name);
        const ImageRecord& img = image_by_name(model, name);
        refs.push_back({&img, &rit->second, category_pixels(rit->second, Category::Road)});
    }

    // Pool road-linked 3D points from every reference image for one plane fit.
    std::set<std::uint64_t> candidate_ids;
    for (const auto& ref : refs) {
        for (const auto& obs : ref.image->observations) {
            if (!obs.point3d_id) continue;
            const int px = static_cast<int>(std::floor(obs.pixel.x()));
            const int py = static_cast<int>(std::floor(obs.pixel.y()));
            if (ref.road.contains(px, py)) candidate_ids.insert(*obs.point3d_id);
        }
    }
    std::vector<IdPoint> candidates;
    candidates.reserve(candidate_ids.size());
    for (std::uint64_t id : candidate_ids) candidates.emplace_back(id, model.points.at(id).xyz);

    double threshold = params.plane_threshold;
    if (threshold <= 0.0) {
        Eigen::Vector3d lo = Eigen::Vector3d::Constant(std::numeric_limits<double>::max());
        Eigen::Vector3d hi = Eigen::Vector3d::Constant(std::numeric_limits<double>::lowest());
        for (const auto& [id, p] : candidates) {
            lo = lo.cwiseMin(p);
            hi = hi.cwiseMax(p);
        }
        threshold = candidates.empty() ? 0.0 : 0.01 * (hi - lo).norm();
    }

    PlaneModel plane;
    try {
        plane = fit_plane_ransac(candidates, threshold, params.plane_iterations, params.seed);
    } catch (const Error& e) {
        throw PlaneFitFailedError(std::string("plane fit failed: ") + e.what());
    } catch (const std::invalid_argument& e) {
        throw PlaneFitFailedError(std::string("plane fit failed: ") + e.what());
    }

    // Normal toward the cameras, so height above ground is positive.
    std::vector<Eigen::Vector3d> centers;
    centers.reserve(refs.size());
    for (const auto& ref : refs) centers.push_back(camera_center(*ref.image));
    orient_plane_toward(plane, centers);

    const RigidTransform reorient = reorientation_for_plane(plane);

    SidewalkModel out;
    out.scene = scene;
    out.scene.reference_names = names;
    out.plane = plane;
    out.reorient = reorient;

    for (const auto& ref : refs) {
        const std::string& name = ref.image->name;
        std::size_t appended = 0;
        try {
            const auto corr = ground_correspondences(model, ref.image->image_id, ref.road,
                                                     plane, reorient);

            // The source side is in pixels, the target side in ground meters.
            // Fitting in raw units keeps distant road points as inliers:
            // ground-resolution per pixel degrades quadratically with
            // distance, so any commensurate rescaling of the ground side
            // inflates the far points' own observation noise past the
            // threshold and the inlier fit goes blind beyond ~25 m. With raw
            // units the meter leg of the transfer error stays small and
            // mismatched tracks are still caught by the pixel leg.
            const auto est = estimate_homography(corr, params.homography_threshold,
                                                 params.homography_iterations, params.seed);
            Homography h;
            h.h = est.h.h / est.h.h(2, 2);

            const PixelSet sidewalk =
                right_side_filter(category_pixels(*ref.raster, Category::Sidewalk),
                                  params.keep_side);
            sidewalk.for_each([&](int x, int y) {
                if (x % params.stride != 0 || y % params.stride != 0) return;
                try {
                    out.points.push_back(
                        apply_homography(h, Eigen::Vector2d(x + 0.5, y + 0.5)));
                    ++appended;
                } catch (const PointAtInfinityError&) {
                }
            });
        } catch (const NoCorrespondencesError& e) {
            if (warnings) warnings->push_back(name + ": " + e.what());
        } catch (const InsufficientCorrespondencesError& e) {
            if (warnings) warnings->push_back(name + ": " + e.what());
        } catch (const DegenerateConfigurationError& e) {
            if (warnings) warnings->push_back(name + ": " + e.what());
        }
        out.source_counts.emplace_back(name, appended);
    }

    if (out.points.empty()) throw ModelEmptyError("no sidewalk points projected");
    return out;
}

namespace {

constexpr const char* kMagic = "snowsight-model";
constexpr int kVersion = 1;

void require_token_clean(const std::string& s, const char* what) {
    if (s.empty() || s.find_first_of(" \t\r\n") != std::string::npos)
        throw InvalidInputError(std::string(what) + " must be a non-empty single token: '" + s +
                                "'");
}

}  // namespace

void save_model(const SidewalkModel& model, const std::filesystem::path& path) {
    require_token_clean(model.scene.scene_id, "scene id");
    for (const auto& [name, count] : model.source_counts) require_token_clean(name, "image name");

    std::ostringstream body;
    body << kMagic << ' ' << kVersion << '\n';
    body << "scene " << model.scene.scene_id << ' ' << fmt(model.scene.gps_lat) << ' '
         << fmt(model.scene.gps_lon) << ' ' << fmt(model.scene.gps_radius_m) << '\n';
    body << "refs " << model.source_counts.size() << '\n';
    for (const auto& [name, count] : model.source_counts)
        body << "ref " << name << ' ' << count << '\n';
    body << "plane " << fmt(model.plane.normal.x()) << ' ' << fmt(model.plane.normal.y()) << ' '
         << fmt(model.plane.normal.z()) << ' ' << fmt(model.plane.offset) << ' '
         << fmt(model.plane.inlier_threshold) << '\n';
    std::vector<std::uint64_t> ids(model.plane.inlier_ids.begin(), model.plane.inlier_ids.end());
    std::sort(ids.begin(), ids.end());
    body << "inliers " << ids.size();
    for (auto id : ids) body << ' ' << id;
    body << '\n';
    body << "rotation";
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) body << ' ' << fmt(model.reorient.rotation(r, c));
    body << '\n';
    body << "translation";
    for (int k = 0; k < 3; ++k) body << ' ' << fmt(model.reorient.translation[k]);
    body << '\n';
    body << "points " << model.points.size() << '\n';
    for (const auto& p : model.points) body << fmt(p.x()) << ' ' << fmt(p.y()) << '\n';

    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    const std::string text = body.str();
    char crc[16];
    std::snprintf(crc, sizeof crc, "%08x", crc32(text));
    out << text << "checksum " << crc << '\n';
    if (!out) throw IoError("write failed: " + path.string());
}

namespace {

struct ModelReader {
    std::vector<std::string> lines;
    std::size_t pos = 0;
    std::string file;

    std::vector<std::string> expect(const char* key, int min_fields, int max_fields) {
        if (pos >= lines.size())
            throw MalformedModelFileError(file + ": unexpected end of file, expected " + key);
        std::istringstream ss(lines[pos]);
        std::vector<std::string> tok;
        std::string t;
        while (ss >> t) tok.push_back(t);
        if (tok.empty() || tok[0] != key)
            throw MalformedModelFileError(file + ": expected '" + key + "' on line " +
                                          std::to_string(pos + 1));
        const int n = static_cast<int>(tok.size()) - 1;
        if (n < min_fields || (max_fields >= 0 && n > max_fields))
            throw MalformedModelFileError(file + ": wrong field count for '" + key + "'");
        ++pos;
        return tok;
    }

    double to_double(const std::string& t) {
        double v = 0.0;
        auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
        if (ec != std::errc() || p != t.data() + t.size() || !std::isfinite(v))
            throw MalformedModelFileError(file + ": bad number '" + t + "'");
        return v;
    }

    std::uint64_t to_count(const std::string& t) {
        std::uint64_t v = 0;
        auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
        if (ec != std::errc() || p != t.data() + t.size())
            throw MalformedModelFileError(file + ": bad count '" + t + "'");
        return v;
    }
};

}  // namespace

SidewalkModel load_model(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw MissingFileError(path.string());
    std::string data(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>{});

    // Version precedes integrity: a future-format file should say so even
    // though its checksum (computed over different content rules) matches.
    {
        std::istringstream first_line(data.substr(0, data.find('\n')));
        std::string magic, version;
        first_line >> magic >> version;
        if (magic == kMagic && version != std::to_string(kVersion))
            throw VersionMismatchError(path.string() + ": format version " + version +
                                       ", expected " + std::to_string(kVersion));
    }

    // The checksum line covers every byte before it.
    const std::size_t mark = data.rfind("checksum ");
    if (mark == std::string::npos || (mark != 0 && data[mark - 1] != '\n'))
        throw MalformedModelFileError(path.string() + ": missing checksum line");
    std::istringstream tail(data.substr(mark));
    std::string word, hex;
    tail >> word >> hex;
    if (hex.size() != 8)
        throw MalformedModelFileError(path.string() + ": bad checksum field");
    char expect[16];
    std::snprintf(expect, sizeof expect, "%08x", crc32(std::string_view(data).substr(0, mark)));
    if (hex != expect)
        throw ChecksumMismatchError(path.string() + ": checksum " + hex + ", computed " + expect);

    ModelReader r;
    r.file = path.string();
    std::istringstream body(data.substr(0, mark));
    std::string line;
    while (std::getline(body, line)) r.lines.push_back(line);

    const auto head = r.expect(kMagic, 1, 1);
    if (head[1] != std::to_string(kVersion))
        throw VersionMismatchError(path.string() + ": format version " + head[1] +
                                   ", expected " + std::to_string(kVersion));

    SidewalkModel m;
    const auto scene = r.expect("scene", 4, 4);
    m.scene.scene_id = scene[1];
    m.scene.gps_lat = r.to_double(scene[2]);
    m.scene.gps_lon = r.to_double(scene[3]);
    m.scene.gps_radius_m = r.to_double(scene[4]);

    const auto nrefs = r.to_count(r.expect("refs", 1, 1)[1]);
    for (std::uint64_t i = 0; i < nrefs; ++i) {
        const auto ref = r.expect("ref", 2, 2);
        m.source_counts.emplace_back(ref[1], static_cast<std::size_t>(r.to_count(ref[2])));
        m.scene.reference_names.push_back(ref[1]);
    }

    const auto plane = r.expect("plane", 5, 5);
    m.plane.normal = {r.to_double(plane[1]), r.to_double(plane[2]), r.to_double(plane[3])};
    m.plane.offset = r.to_double(plane[4]);
    m.plane.inlier_threshold = r.to_double(plane[5]);

    const auto inl = r.expect("inliers", 1, -1);
    const auto ninl = r.to_count(inl[1]);
    if (inl.size() != ninl + 2)
        throw MalformedModelFileError(path.string() + ": inlier count mismatch");
    for (std::size_t i = 2; i < inl.size(); ++i) m.plane.inlier_ids.insert(r.to_count(inl[i]));

    const auto rot = r.expect("rotation", 9, 9);
    for (int k = 0; k < 9; ++k) m.reorient.rotation(k / 3, k % 3) = r.to_double(rot[1 + k]);
    const auto tr = r.expect("translation", 3, 3);
    for (int k = 0; k < 3; ++k) m.reorient.translation[k] = r.to_double(tr[1 + k]);

    const auto npts = r.to_count(r.expect("points", 1, 1)[1]);
    m.points.reserve(npts);
    for (std::uint64_t i = 0; i < npts; ++i) {
        if (r.pos >= r.lines.size())
            throw MalformedModelFileError(path.string() + ": truncated point list");
        std::istringstream ss(r.lines[r.pos++]);
        std::string xs, ys, extra;
        if (!(ss >> xs >> ys) || (ss >> extra))
            throw MalformedModelFileError(path.string() + ": bad point line " +
                                          std::to_string(r.pos));
        m.points.emplace_back(r.to_double(xs), r.to_double(ys));
    }
    if (r.pos != r.lines.size())
        throw MalformedModelFileError(path.string() + ": trailing content");
    return m;
}

}  // namespace snowsight
