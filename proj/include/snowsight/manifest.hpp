#pragma once

#include "snowsight/evaluation.hpp"
#include "snowsight/sidewalk_model.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace snowsight {

enum class ImageRole { Reference, Query };

struct ManifestEntry {
    std::string name;
    ImageRole role = ImageRole::Reference;
    double lat = 0.0;
    double lon = 0.0;
    std::string raster;  // path relative to the manifest file
    std::optional<QueryCategory> category;
};

// JSON sidecar standing in for per-image EXIF GPS tags: a scene block plus
// one entry per image.
struct Manifest {
    SceneDescriptor scene;  // reference_names filled from the entries
    std::vector<ManifestEntry> entries;
    std::filesystem::path dir;  // manifest location, set on load

    std::filesystem::path raster_path(const ManifestEntry& entry) const {
        return dir / entry.raster;
    }
    const ManifestEntry* find(const std::string& name) const;
};

Manifest load_manifest(const std::filesystem::path& path);
void save_manifest(const Manifest& manifest, const std::filesystem::path& path);

}  // namespace snowsight
