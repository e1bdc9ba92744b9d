#include "snowsight/colmap.hpp"

#include "snowsight/errors.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <string_view>

namespace snowsight {

namespace {

std::vector<std::string_view> split_ws(std::string_view s) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < s.size()) {
        while (i < s.size() && (s[i] == ' ' || s[i] == '\t' || s[i] == '\r')) ++i;
        std::size_t start = i;
        while (i < s.size() && s[i] != ' ' && s[i] != '\t' && s[i] != '\r') ++i;
        if (i > start) out.push_back(s.substr(start, i - start));
    }
    return out;
}

double parse_double(std::string_view tok, const std::string& file, std::size_t line) {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc() || ptr != tok.data() + tok.size() || !std::isfinite(v))
        throw MalformedLineError(file, line, "bad number '" + std::string(tok) + "'");
    return v;
}

template <typename Int>
Int parse_int(std::string_view tok, const std::string& file, std::size_t line) {
    Int v = 0;
    auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc() || ptr != tok.data() + tok.size())
        throw MalformedLineError(file, line, "bad integer '" + std::string(tok) + "'");
    return v;
}

// Lines of one file with their 1-based numbers, comments stripped.
struct Lines {
    std::string file;
    std::vector<std::pair<std::size_t, std::string>> rows;
};

Lines read_lines(const std::filesystem::path& dir, const char* name, bool keep_blank) {
    const auto path = dir / name;
    std::ifstream in(path);
    if (!in) throw MissingFileError(name);
    Lines out;
    out.file = name;
    std::string line;
    std::size_t no = 0;
    while (std::getline(in, line)) {
        ++no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::size_t first = line.find_first_not_of(" \t");
        if (first != std::string::npos && line[first] == '#') continue;
        if (first == std::string::npos && !keep_blank) continue;
        out.rows.emplace_back(no, line);
    }
    return out;
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

constexpr std::size_t kMinImages = 2;
constexpr std::size_t kMinPoints = 10;

}  // namespace

const char* camera_model_name(CameraModel model) {
    switch (model) {
        case CameraModel::SimplePinhole: return "SIMPLE_PINHOLE";
        case CameraModel::Pinhole: return "PINHOLE";
        case CameraModel::SimpleRadial: return "SIMPLE_RADIAL";
    }
    return "?";
}

SparseModel parse_sparse_model(const std::filesystem::path& dir) {
    SparseModel model;

    // cameras.txt: CAMERA_ID MODEL WIDTH HEIGHT PARAMS[]
    {
        const Lines lines = read_lines(dir, "cameras.txt", false);
        for (const auto& [no, text] : lines.rows) {
            const auto tok = split_ws(text);
            if (tok.size() < 4)
                throw MalformedLineError(lines.file, no, "expected CAMERA_ID MODEL WIDTH HEIGHT PARAMS[]");
            CameraIntrinsics cam;
            cam.camera_id = parse_int<std::uint32_t>(tok[0], lines.file, no);
            const std::string model_name(tok[1]);
            std::size_t nparams = 0;
            if (model_name == "SIMPLE_PINHOLE") {
                cam.model = CameraModel::SimplePinhole;
                nparams = 3;
            } else if (model_name == "PINHOLE") {
                cam.model = CameraModel::Pinhole;
                nparams = 4;
            } else if (model_name == "SIMPLE_RADIAL") {
                cam.model = CameraModel::SimpleRadial;
                nparams = 4;
            } else {
                throw UnsupportedCameraModelError(model_name);
            }
            cam.width = parse_int<int>(tok[2], lines.file, no);
            cam.height = parse_int<int>(tok[3], lines.file, no);
            if (cam.width <= 0 || cam.height <= 0)
                throw MalformedLineError(lines.file, no, "non-positive image size");
            if (tok.size() != 4 + nparams)
                throw MalformedLineError(lines.file, no, "wrong parameter count for " + model_name);
            for (std::size_t i = 4; i < tok.size(); ++i)
                cam.params.push_back(parse_double(tok[i], lines.file, no));
            if (cam.fx() <= 0.0 || cam.fy() <= 0.0)
                throw MalformedLineError(lines.file, no, "non-positive focal length");
            if (!model.cameras.emplace(cam.camera_id, std::move(cam)).second)
                throw MalformedLineError(lines.file, no, "duplicate camera id");
        }
    }

    // images.txt: IMAGE_ID QW QX QY QZ TX TY TZ CAMERA_ID NAME, then one
    // observations line (possibly empty): X Y POINT3D_ID triples.
    {
        const Lines lines = read_lines(dir, "images.txt", true);
        std::set<std::string> names;
        std::size_t i = 0;
        while (i < lines.rows.size()) {
            const auto& [no, text] = lines.rows[i];
            const auto tok = split_ws(text);
            if (tok.empty()) {  // stray blank line between records
                ++i;
                continue;
            }
            if (tok.size() != 10)
                throw MalformedLineError(lines.file, no, "expected 10 fields in image header");
            ImageRecord img;
            img.image_id = parse_int<std::uint32_t>(tok[0], lines.file, no);
            for (int k = 0; k < 4; ++k) img.qvec[k] = parse_double(tok[1 + k], lines.file, no);
            for (int k = 0; k < 3; ++k) img.tvec[k] = parse_double(tok[5 + k], lines.file, no);
            img.camera_id = parse_int<std::uint32_t>(tok[8], lines.file, no);
            img.name = std::string(tok[9]);

            const double norm = img.qvec.norm();
            if (std::abs(norm - 1.0) > 1e-3)
                throw MalformedLineError(lines.file, no, "quaternion norm " + fmt(norm));
            if (std::abs(norm - 1.0) > 1e-12) img.qvec /= norm;

            if (!names.insert(img.name).second)
                throw MalformedLineError(lines.file, no, "duplicate image name " + img.name);

            if (++i >= lines.rows.size())
                throw MalformedLineError(lines.file, no, "missing observations line");
            const auto& [obs_no, obs_text] = lines.rows[i];
            const auto obs_tok = split_ws(obs_text);
            if (obs_tok.size() % 3 != 0)
                throw MalformedLineError(lines.file, obs_no, "observations not in X Y POINT3D_ID triples");
            for (std::size_t k = 0; k < obs_tok.size(); k += 3) {
                Observation obs;
                obs.pixel.x() = parse_double(obs_tok[k], lines.file, obs_no);
                obs.pixel.y() = parse_double(obs_tok[k + 1], lines.file, obs_no);
                const auto pid = parse_int<std::int64_t>(obs_tok[k + 2], lines.file, obs_no);
                if (pid == -1)
                    obs.point3d_id = std::nullopt;
                else if (pid < 0)
                    throw MalformedLineError(lines.file, obs_no, "negative POINT3D_ID");
                else
                    obs.point3d_id = static_cast<std::uint64_t>(pid);
                img.observations.push_back(obs);
            }
            ++i;
            const auto id = img.image_id;
            if (!model.images.emplace(id, std::move(img)).second)
                throw MalformedLineError(lines.file, no, "duplicate image id");
        }
    }

    // points3D.txt: POINT3D_ID X Y Z R G B ERROR TRACK[] as (IMAGE_ID POINT2D_IDX)
    {
        const Lines lines = read_lines(dir, "points3D.txt", false);
        for (const auto& [no, text] : lines.rows) {
            const auto tok = split_ws(text);
            if (tok.size() < 10 || (tok.size() - 8) % 2 != 0)
                throw MalformedLineError(lines.file, no, "expected id, xyz, rgb, error and a non-empty track");
            ScenePoint pt;
            pt.point3d_id = parse_int<std::uint64_t>(tok[0], lines.file, no);
            for (int k = 0; k < 3; ++k) pt.xyz[k] = parse_double(tok[1 + k], lines.file, no);
            for (int k = 0; k < 3; ++k) {
                const int c = parse_int<int>(tok[4 + k], lines.file, no);
                if (c < 0 || c > 255)
                    throw MalformedLineError(lines.file, no, "color out of range");
                pt.color[k] = static_cast<std::uint8_t>(c);
            }
            pt.reproj_error = parse_double(tok[7], lines.file, no);
            if (pt.reproj_error < 0.0)
                throw MalformedLineError(lines.file, no, "negative reprojection error");
            for (std::size_t k = 8; k < tok.size(); k += 2) {
                pt.track.emplace_back(parse_int<std::uint32_t>(tok[k], lines.file, no),
                                      parse_int<std::uint32_t>(tok[k + 1], lines.file, no));
            }
            const auto id = pt.point3d_id;
            if (!model.points.emplace(id, std::move(pt)).second)
                throw MalformedLineError(lines.file, no, "duplicate point id");
        }
    }

    // Cross-reference checks, both directions.
    for (const auto& [iid, img] : model.images) {
        if (!model.cameras.count(img.camera_id))
            throw DanglingReferenceError("camera", img.camera_id);
        for (std::size_t k = 0; k < img.observations.size(); ++k) {
            const auto& obs = img.observations[k];
            if (!obs.point3d_id) continue;
            auto it = model.points.find(*obs.point3d_id);
            if (it == model.points.end())
                throw DanglingReferenceError("point3D", *obs.point3d_id);
            const auto& track = it->second.track;
            const std::pair<std::uint32_t, std::uint32_t> entry{iid, static_cast<std::uint32_t>(k)};
            if (std::find(track.begin(), track.end(), entry) == track.end())
                throw DanglingReferenceError("track", *obs.point3d_id);
        }
    }
    for (const auto& [pid, pt] : model.points) {
        for (const auto& [iid, idx] : pt.track) {
            auto it = model.images.find(iid);
            if (it == model.images.end())
                throw DanglingReferenceError("image", iid);
            const auto& obs = it->second.observations;
            if (idx >= obs.size() || !obs[idx].point3d_id || *obs[idx].point3d_id != pid)
                throw DanglingReferenceError("observation", pid);
        }
    }

    if (model.images.size() < kMinImages || model.points.size() < kMinPoints)
        throw EmptyModelError("model too small: " + std::to_string(model.images.size()) +
                              " images, " + std::to_string(model.points.size()) + " points");
    return model;
}

void write_sparse_model(const SparseModel& model, const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());

    auto open = [&](const char* name) {
        std::ofstream out(dir / name, std::ios::binary);
        if (!out) throw IoError("cannot write " + (dir / name).string());
        return out;
    };

    {
        auto out = open("cameras.txt");
        out << "# Camera list with one line of data per camera:\n"
               "#   CAMERA_ID, MODEL, WIDTH, HEIGHT, PARAMS[]\n"
               "# Number of cameras: " << model.cameras.size() << "\n";
        for (const auto& [id, cam] : model.cameras) {
            out << id << ' ' << camera_model_name(cam.model) << ' ' << cam.width << ' '
                << cam.height;
            for (double p : cam.params) out << ' ' << fmt(p);
            out << '\n';
        }
    }
    {
        auto out = open("images.txt");
        out << "# Image list with two lines of data per image:\n"
               "#   IMAGE_ID, QW, QX, QY, QZ, TX, TY, TZ, CAMERA_ID, NAME\n"
               "#   POINTS2D[] as (X, Y, POINT3D_ID)\n"
               "# Number of images: " << model.images.size() << "\n";
        for (const auto& [id, img] : model.images) {
            out << id;
            for (int k = 0; k < 4; ++k) out << ' ' << fmt(img.qvec[k]);
            for (int k = 0; k < 3; ++k) out << ' ' << fmt(img.tvec[k]);
            out << ' ' << img.camera_id << ' ' << img.name << '\n';
            bool first = true;
            for (const auto& obs : img.observations) {
                if (!first) out << ' ';
                first = false;
                out << fmt(obs.pixel.x()) << ' ' << fmt(obs.pixel.y()) << ' ';
                if (obs.point3d_id)
                    out << *obs.point3d_id;
                else
                    out << -1;
            }
            out << '\n';
        }
    }
    {
        auto out = open("points3D.txt");
        out << "# 3D point list with one line of data per point:\n"
               "#   POINT3D_ID, X, Y, Z, R, G, B, ERROR, TRACK[] as (IMAGE_ID, POINT2D_IDX)\n"
               "# Number of points: " << model.points.size() << "\n";
        for (const auto& [id, pt] : model.points) {
            out << id;
            for (int k = 0; k < 3; ++k) out << ' ' << fmt(pt.xyz[k]);
            for (int k = 0; k < 3; ++k) out << ' ' << int(pt.color[k]);
            out << ' ' << fmt(pt.reproj_error);
            for (const auto& [iid, idx] : pt.track) out << ' ' << iid << ' ' << idx;
            out << '\n';
        }
    }
}

std::vector<std::pair<Eigen::Vector2d, Eigen::Vector3d>>
pixel_point_pairs(const SparseModel& model, std::uint32_t image_id) {
    auto it = model.images.find(image_id);
    if (it == model.images.end()) throw UnknownImageError(image_id);
    std::vector<std::pair<Eigen::Vector2d, Eigen::Vector3d>> pairs;
    for (const auto& obs : it->second.observations) {
        if (!obs.point3d_id) continue;
        pairs.emplace_back(obs.pixel, model.points.at(*obs.point3d_id).xyz);
    }
    return pairs;
}

}  // namespace snowsight
