#include "snowsight/manifest.hpp"

#include "snowsight/errors.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <set>

namespace snowsight {

using nlohmann::json;

const ManifestEntry* Manifest::find(const std::string& name) const {
    for (const auto& e : entries)
        if (e.name == name) return &e;
    return nullptr;
}

namespace {

double number_field(const json& obj, const char* key) {
    if (!obj.contains(key) || !obj[key].is_number())
        throw ManifestError(std::string("missing or non-numeric field '") + key + "'");
    return obj[key].get<double>();
}

std::string string_field(const json& obj, const char* key) {
    if (!obj.contains(key) || !obj[key].is_string())
        throw ManifestError(std::string("missing or non-string field '") + key + "'");
    return obj[key].get<std::string>();
}

void check_token(const std::string& s, const char* what) {
    if (s.empty() || s.find_first_of(" \t\r\n") != std::string::npos)
        throw ManifestError(std::string(what) + " must be a non-empty single token: '" + s + "'");
}

}  // namespace

Manifest load_manifest(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw MissingFileError(path.string());
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw ManifestError(path.string() + ": " + e.what());
    }

    Manifest m;
    m.dir = path.parent_path();

    if (!doc.contains("scene") || !doc["scene"].is_object())
        throw ManifestError(path.string() + ": missing scene block");
    const json& scene = doc["scene"];
    m.scene.scene_id = string_field(scene, "scene_id");
    check_token(m.scene.scene_id, "scene_id");
    m.scene.gps_lat = number_field(scene, "lat");
    m.scene.gps_lon = number_field(scene, "lon");
    m.scene.gps_radius_m = number_field(scene, "radius_m");
    if (m.scene.gps_radius_m <= 0.0) throw ManifestError("scene radius_m must be positive");
    if (std::abs(m.scene.gps_lat) > 90.0 || std::abs(m.scene.gps_lon) > 180.0)
        throw ManifestError("scene centroid out of range");

    if (!doc.contains("images") || !doc["images"].is_array())
        throw ManifestError(path.string() + ": missing images array");
    std::set<std::string> names;
    for (const json& e : doc["images"]) {
        ManifestEntry entry;
        entry.name = string_field(e, "name");
        check_token(entry.name, "image name");
        if (!names.insert(entry.name).second)
            throw ManifestError("duplicate image name " + entry.name);
        const std::string role = string_field(e, "role");
        if (role == "reference")
            entry.role = ImageRole::Reference;
        else if (role == "query")
            entry.role = ImageRole::Query;
        else
            throw ManifestError("unknown role '" + role + "' for " + entry.name);
        entry.lat = number_field(e, "lat");
        entry.lon = number_field(e, "lon");
        if (std::abs(entry.lat) > 90.0 || std::abs(entry.lon) > 180.0)
            throw ManifestError("GPS out of range for " + entry.name);
        entry.raster = string_field(e, "raster");
        if (!std::filesystem::exists(m.dir / entry.raster))
            throw ManifestError("raster not found: " + (m.dir / entry.raster).string());
        if (e.contains("category")) {
            const std::string cat = string_field(e, "category");
            entry.category = category_from_name(cat);
            if (!entry.category)
                throw ManifestError("unknown category '" + cat + "' for " + entry.name);
        }
        if (entry.role == ImageRole::Reference)
            m.scene.reference_names.push_back(entry.name);
        m.entries.push_back(std::move(entry));
    }
    return m;
}

void save_manifest(const Manifest& manifest, const std::filesystem::path& path) {
    json doc;
    doc["scene"] = {{"scene_id", manifest.scene.scene_id},
                    {"lat", manifest.scene.gps_lat},
                    {"lon", manifest.scene.gps_lon},
                    {"radius_m", manifest.scene.gps_radius_m}};
    doc["images"] = json::array();
    for (const auto& e : manifest.entries) {
        json obj = {{"name", e.name},
                    {"role", e.role == ImageRole::Reference ? "reference" : "query"},
                    {"lat", e.lat},
                    {"lon", e.lon},
                    {"raster", e.raster}};
        if (e.category) obj["category"] = category_name(*e.category);
        doc["images"].push_back(std::move(obj));
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    out << doc.dump(2) << '\n';
    if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace snowsight
