#pragma once

// Shared test scaffolding: unique temp directories, file helpers, and a
// small synthetic scene spec sized for fast unit runs.

#include "snowsight/synthetic.hpp"

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

namespace testutil {

class TempDir {
public:
    TempDir() {
        static std::mt19937_64 gen(std::random_device{}());
        path_ = std::filesystem::temp_directory_path() /
                ("snowsight_test_" + std::to_string(gen()));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    operator const std::filesystem::path&() const { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

inline void write_file(const std::filesystem::path& p, const std::string& text) {
    std::filesystem::create_directories(p.parent_path());
    std::ofstream out(p, std::ios::binary);
    out << text;
}

inline std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// Two runs of four images over a short stretch; renders in ~30 ms.
inline snowsight::SceneSpec small_spec() {
    snowsight::SceneSpec s = snowsight::default_scene_spec();
    s.runs = 2;
    s.images_per_run = 4;
    s.step_m = 7.0;
    s.point_count = 600;
    s.image_width = 480;
    s.image_height = 270;
    s.focal_px = 400.0;
    s.query_count = 2;
    return s;
}

}  // namespace testutil
