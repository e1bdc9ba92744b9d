// Acceptance harness: each criterion prints one PASS/FAIL line; exit is 0
// only when every criterion holds. Runs against full-size synthetic scenes
// except where a criterion leaves sizes open (the parser round-trip drill
// uses compact models to stay inside its own time budget).

#include "snowsight/classify.hpp"
#include "snowsight/colmap.hpp"
#include "snowsight/errors.hpp"
#include "snowsight/evaluation.hpp"
#include "snowsight/geometry.hpp"
#include "snowsight/manifest.hpp"
#include "snowsight/masks.hpp"
#include "snowsight/pipeline.hpp"
#include "snowsight/sidewalk_model.hpp"
#include "snowsight/synthetic.hpp"

#include <Eigen/LU>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace snowsight;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

bool same_tree(const fs::path& a, const fs::path& b) {
    for (const auto& entry : fs::recursive_directory_iterator(a)) {
        if (!entry.is_regular_file()) continue;
        const fs::path rel = fs::relative(entry.path(), a);
        if (!fs::exists(b / rel)) return false;
        if (read_file(entry.path()) != read_file(b / rel)) return false;
    }
    return true;
}

struct Scratch {
    fs::path root;
    Scratch() {
        std::mt19937_64 gen(std::random_device{}());
        root = fs::temp_directory_path() / ("snowsight_accept_" + std::to_string(gen()));
        fs::create_directories(root);
    }
    ~Scratch() {
        std::error_code ec;
        fs::remove_all(root, ec);
    }
};

SceneDescriptor descriptor_for(const Manifest& manifest) {
    return manifest.scene;
}

// make_query_input reads the raster from disk; the bundles here stay in
// memory, so assemble the same structure from the bundle's own tables.
QueryInput query_from_bundle(const SyntheticBundle& bundle, const std::string& name) {
    const ManifestEntry* entry = bundle.manifest.find(name);
    const ImageRecord* image = nullptr;
    for (const auto& [iid, img] : bundle.model.images)
        if (img.name == name) image = &img;
    QueryInput q;
    q.name = name;
    q.gps_lat = entry->lat;
    q.gps_lon = entry->lon;
    q.qvec = image->qvec;
    q.tvec = image->tvec;
    q.intrinsics = bundle.model.cameras.at(image->camera_id);
    q.raster = bundle.rasters.at(name);
    return q;
}

// Scenes shared by the plane and homography criteria: default size, 30%
// outliers, 0.5 px observation noise, one build each.
struct NoisyScene {
    SyntheticBundle bundle;
    SidewalkModel model;
};

std::vector<NoisyScene> make_noisy_scenes() {
    std::vector<NoisyScene> scenes;
    for (int i = 0; i < 10; ++i) {
        SceneSpec spec = default_scene_spec();
        spec.seed = 1000 + 17 * i;
        spec.scene_id = "noisy_" + std::to_string(i);
        spec.pixel_noise_sigma = 0.5;
        NoisyScene s{generate(spec), {}};
        s.model = build_sidewalk_model(s.bundle.model, s.bundle.rasters,
                                       descriptor_for(s.bundle.manifest), {});
        scenes.push_back(std::move(s));
    }
    return scenes;
}

double angle_deg(const Eigen::Vector3d& a, const Eigen::Vector3d& b) {
    const double c = std::min(1.0, std::abs(a.normalized().dot(b.normalized())));
    return std::acos(c) * 180.0 / 3.14159265358979323846;
}

// --- criterion 1: parser round-trip -----------------------------------------

bool criterion_1(const Scratch& scratch, std::string& detail) {
    const auto start = Clock::now();
    for (int i = 0; i < 20; ++i) {
        SceneSpec spec = default_scene_spec();
        spec.seed = 100 + i;
        spec.scene_id = "rt_" + std::to_string(i);
        spec.runs = 1;
        spec.images_per_run = 3;
        spec.point_count = 250;
        spec.image_width = 320;
        spec.image_height = 180;
        spec.focal_px = 260.0;
        spec.query_count = 1;
        spec.far_query = false;
        const SyntheticBundle bundle = generate(spec);

        const fs::path first = scratch.root / ("rt_" + std::to_string(i) + "_a");
        const fs::path second = scratch.root / ("rt_" + std::to_string(i) + "_b");
        write_sparse_model(bundle.model, first);
        const SparseModel parsed = parse_sparse_model(first);
        write_sparse_model(parsed, second);
        for (const char* f : {"cameras.txt", "images.txt", "points3D.txt"}) {
            if (read_file(first / f) != read_file(second / f)) {
                detail = "byte mismatch in " + std::string(f) + " at seed " +
                         std::to_string(spec.seed);
                return false;
            }
        }
        if (parsed != bundle.model) {
            detail = "parsed model differs in memory at seed " + std::to_string(spec.seed);
            return false;
        }
    }
    const double elapsed = seconds_since(start);
    {
        char buf[128];
        std::snprintf(buf, sizeof(buf), "20 models, %.2f s", elapsed);
        detail = buf;
    }
    return elapsed < 5.0;
}

// --- criterion 2: plane recovery ---------------------------------------------

bool criterion_2(const std::vector<NoisyScene>& scenes, std::string& detail) {
    double worst_angle = 0.0, worst_offset_ratio = 0.0;
    for (const NoisyScene& s : scenes) {
        const double ang = angle_deg(s.model.plane.normal, s.bundle.true_normal);
        const double off = std::abs(s.model.plane.offset - s.bundle.true_offset);
        const double ratio = off / s.model.plane.inlier_threshold;
        worst_angle = std::max(worst_angle, ang);
        worst_offset_ratio = std::max(worst_offset_ratio, ratio);
    }
    char buf[160];
    std::snprintf(buf, sizeof(buf), "10 seeds, worst normal error %.4f deg, worst offset %.3fx threshold",
                  worst_angle, worst_offset_ratio);
    detail = buf;
    return worst_angle <= 0.5 && worst_offset_ratio <= 1.0;
}

// --- criterion 3: homography holdout accuracy --------------------------------

bool criterion_3(const std::vector<NoisyScene>& scenes, std::string& detail) {
    double worst = 0.0;
    std::size_t images_checked = 0;
    const BuildParams defaults;
    for (const NoisyScene& s : scenes) {
        for (const auto& [image_id, img] : s.bundle.model.images) {
            const auto raster_it = s.bundle.rasters.find(img.name);
            if (raster_it == s.bundle.rasters.end()) continue;
            const ManifestEntry* entry = s.bundle.manifest.find(img.name);
            if (!entry || entry->role != ImageRole::Reference) continue;

            const PixelSet road = category_pixels(raster_it->second, Category::Road);
            std::vector<std::pair<Eigen::Vector2d, Eigen::Vector2d>> pairs;
            try {
                pairs = ground_correspondences(s.bundle.model, image_id, road, s.model.plane,
                                               s.model.reorient);
            } catch (const NoCorrespondencesError&) {
                continue;
            }
            if (pairs.size() < 24) continue;

            // Fit exactly as the build stage does: every (noisy) pixel-ground
            // pair of the image, raw units.
            const CameraIntrinsics& cam = s.bundle.model.cameras.at(img.camera_id);
            HomographyEstimate est;
            try {
                est = estimate_homography(pairs, defaults.homography_threshold,
                                          defaults.homography_iterations, defaults.seed);
            } catch (const Error&) {
                continue;
            }
            const Homography ground_to_image{(est.h.h / est.h.h(2, 2)).inverse()};

            // Held out: clean correspondences the estimator never saw. At
            // every other ground location, the clean pixel is the exact
            // projection of the lifted plane point (the noise-free
            // counterpart of the training observation). Reprojection error is
            // measured in image pixels.
            const RigidTransform lift = s.model.reorient.inverse();
            for (std::size_t i = 1; i < pairs.size(); i += 2) {
                const Eigen::Vector2d& g = pairs[i].second;
                const Eigen::Vector3d on_plane = lift.apply({g.x(), g.y(), 0.0});
                const auto clean = project_to_image(cam, img.qvec, img.tvec, on_plane);
                if (!clean) continue;
                const Eigen::Vector2d mapped = apply_homography(ground_to_image, g);
                worst = std::max(worst, (mapped - *clean).norm());
            }
            ++images_checked;
        }
    }
    char buf[160];
    std::snprintf(buf, sizeof(buf), "%zu images, worst held-out reprojection %.3f px",
                  images_checked, worst);
    detail = buf;
    return images_checked >= 20 && worst <= 1.5;
}

// --- criterion 4: end-to-end coverage fidelity -------------------------------

bool criterion_4(std::string& detail) {
    double worst_clean = 0.0, worst_noisy = 0.0;
    for (const double sigma : {0.0, 0.5}) {
        for (const double f : {0.0, 0.25, 0.5, 0.75, 1.0}) {
            SceneSpec spec = default_scene_spec();
            spec.seed = 4000 + static_cast<std::uint64_t>(f * 100) + (sigma > 0 ? 7 : 0);
            spec.scene_id = "cov";
            spec.pixel_noise_sigma = sigma;
            if (f > 0.0) {
                spec.snow.kind = SnowScenario::Kind::CoversSidewalk;
                spec.snow.fraction = f;
            }
            const SyntheticBundle bundle = generate(spec);
            const SidewalkModel model = build_sidewalk_model(
                bundle.model, bundle.rasters, descriptor_for(bundle.manifest), {});

            for (const auto& entry : bundle.manifest.entries) {
                if (entry.role != ImageRole::Query || !entry.category) continue;
                QueryInput q = query_from_bundle(bundle, entry.name);
                const Verdict v = classify(model, q, 0.5);
                const double measured = v.coverage.value_or(0.0);
                const double oracle = true_coverage(bundle, entry.name);
                const double err = std::abs(measured - oracle);
                (sigma > 0 ? worst_noisy : worst_clean) =
                    std::max(sigma > 0 ? worst_noisy : worst_clean, err);
            }
        }
    }
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "worst |pipeline - oracle|: %.4f noiseless (<= 0.03), %.4f at sigma 0.5 (<= 0.07)",
                  worst_clean, worst_noisy);
    detail = buf;
    return worst_clean <= 0.03 && worst_noisy <= 0.07;
}

// --- criterion 5: verdict fixtures -------------------------------------------

bool criterion_5(std::string& detail) {
    struct Fixture {
        double fraction;
        double target;
        Outcome want_at_060;
    };
    const std::vector<Fixture> fixtures = {
        {0.91, 0.91, Outcome::SnowCovered},
        {0.36, 0.36, Outcome::Clear},
    };

    std::ostringstream note;
    for (const Fixture& fx : fixtures) {
        SceneSpec spec = default_scene_spec();
        spec.seed = 5000 + static_cast<std::uint64_t>(fx.fraction * 100);
        spec.scene_id = "verdict";
        spec.snow.kind = SnowScenario::Kind::CoversSidewalk;
        spec.snow.fraction = fx.fraction;
        const SyntheticBundle bundle = generate(spec);
        const SidewalkModel model = build_sidewalk_model(bundle.model, bundle.rasters,
                                                         descriptor_for(bundle.manifest), {});
        for (const auto& entry : bundle.manifest.entries) {
            if (entry.role != ImageRole::Query || !entry.category) continue;
            const double oracle = true_coverage(bundle, entry.name);
            if (std::abs(oracle - fx.target) > 0.03) {
                detail = "fixture oracle drifted: wanted " + std::to_string(fx.target) +
                         ", rendered " + std::to_string(oracle);
                return false;
            }
            QueryInput q = query_from_bundle(bundle, entry.name);
            const Verdict v = classify(model, q, 0.60);
            if (!v.coverage || v.outcome != fx.want_at_060) {
                detail = "coverage " + std::to_string(v.coverage.value_or(-1.0)) + " at 0.60 gave " +
                         std::string(outcome_label(v.outcome));
                return false;
            }
            note << entry.name << " " << fx.target << "->" << *v.coverage << " "
                 << outcome_label(v.outcome) << "; ";
        }
    }

    // No-snow scene: Clear at every grid threshold, no coverage value.
    SceneSpec clear_spec = default_scene_spec();
    clear_spec.seed = 5600;
    clear_spec.scene_id = "verdict_clear";
    const SyntheticBundle clear_bundle = generate(clear_spec);
    const SidewalkModel clear_model = build_sidewalk_model(
        clear_bundle.model, clear_bundle.rasters, descriptor_for(clear_bundle.manifest), {});
    for (const auto& entry : clear_bundle.manifest.entries) {
        if (entry.role != ImageRole::Query || !entry.category) continue;
        QueryInput q = query_from_bundle(clear_bundle, entry.name);
        for (const double t : threshold_grid(0.0, 0.95, 0.05)) {
            const Verdict v = classify(clear_model, q, t);
            if (v.outcome != Outcome::NoSnow || outcome_label(v.outcome) != "Clear" ||
                v.coverage.has_value()) {
                detail = "no-snow query not Clear at threshold " + std::to_string(t);
                return false;
            }
        }
    }
    note << "no-snow Clear at all 20 thresholds";
    detail = note.str();
    return true;
}

// --- criterion 6: sweep shape ------------------------------------------------

bool criterion_6(std::string& detail) {
    struct SceneCfg {
        const char* id;
        double lat;
        SnowScenario snow;
    };
    const std::vector<SceneCfg> cfgs = {
        {"sweep_clear", 40.48, {SnowScenario::Kind::None, 0.0}},
        {"sweep_snow", 40.52, {SnowScenario::Kind::CoversSidewalk, 0.8}},
        {"sweep_cleared", 40.56, {SnowScenario::Kind::BesideSidewalk, 0.0}},
    };

    std::map<std::string, SidewalkModel> models;
    std::vector<LabeledQuery> queries;
    for (const SceneCfg& cfg : cfgs) {
        SceneSpec spec = default_scene_spec();
        spec.seed = 6000;
        spec.scene_id = cfg.id;
        spec.gps_lat = cfg.lat;
        spec.snow = cfg.snow;
        const SyntheticBundle bundle = generate(spec);
        SidewalkModel model = build_sidewalk_model(bundle.model, bundle.rasters,
                                                   descriptor_for(bundle.manifest), {});
        models.emplace(cfg.id, std::move(model));
        for (const auto& entry : bundle.manifest.entries) {
            if (entry.role != ImageRole::Query || !entry.category) continue;
            queries.push_back(
                {query_from_bundle(bundle, entry.name), *entry.category});
        }
    }

    const SweepResult r = sweep(models, queries, 0.0, 0.95, 0.05);
    const auto& clear = r.accuracy_pct.at(QueryCategory::Clear);
    const auto& snow = r.accuracy_pct.at(QueryCategory::SnowCovered);
    const auto& cleared = r.accuracy_pct.at(QueryCategory::Cleared);
    for (std::size_t i = 1; i < r.thresholds.size(); ++i) {
        if (clear[i] != clear[i - 1]) {
            detail = "Clear accuracy moved with the threshold";
            return false;
        }
        if (snow[i] > snow[i - 1]) {
            detail = "SnowCovered accuracy increased with the threshold";
            return false;
        }
        if (cleared[i] < cleared[i - 1]) {
            detail = "Cleared accuracy decreased with the threshold";
            return false;
        }
    }
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "%zu queries: clear flat at %.0f%%, snow %.0f->%.0f%%, cleared %.0f->%.0f%%",
                  queries.size(), clear.front(), snow.front(), snow.back(), cleared.front(),
                  cleared.back());
    detail = buf;
    return true;
}

// --- criterion 7: optimal band on step functions ------------------------------

bool criterion_7(std::string& detail) {
    SweepResult r;
    r.thresholds = threshold_grid(0.0, 0.95, 0.05);
    const std::size_t n = r.thresholds.size();
    std::vector<double> snow(n), cleared(n), clear(n, 100.0);
    for (std::size_t i = 0; i < n; ++i) {
        snow[i] = r.thresholds[i] <= 0.70 ? 100.0 : 0.0;
        cleared[i] = r.thresholds[i] < 0.40 ? 0.0 : 100.0;
    }
    r.accuracy_pct[QueryCategory::Clear] = clear;
    r.accuracy_pct[QueryCategory::SnowCovered] = snow;
    r.accuracy_pct[QueryCategory::Cleared] = cleared;

    const auto band = optimal_band(r, 100.0);
    if (!band) {
        detail = "no band found";
        return false;
    }
    char buf[96];
    std::snprintf(buf, sizeof(buf), "band [%.2f, %.2f]", band->lo, band->hi);
    detail = buf;
    return band->lo >= 0.40 && band->hi <= 0.70;
}

// --- criterion 8: command determinism -----------------------------------------

int run_cli(const std::string& args, const fs::path& log) {
    const std::string cmd =
        std::string(SNOWSIGHT_CLI_PATH) + " " + args + " > " + log.string() + " 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

bool criterion_8(const Scratch& scratch, std::string& detail) {
    const fs::path dir = scratch.root / "determinism";
    fs::create_directories(dir);
    const fs::path spec = dir / "spec.json";
    {
        std::ofstream out(spec);
        out << R"({"seed": 9, "runs": 2, "images_per_run": 4, "step_m": 7.0,
                   "point_count": 600, "image_width": 480, "image_height": 270,
                   "focal_px": 400.0, "query_count": 2,
                   "snow": {"kind": "covers_sidewalk", "fraction": 0.8}})";
    }

    for (const char* round : {"one", "two"}) {
        const fs::path base = dir / round;
        if (run_cli("synth --spec " + spec.string() + " --out-dir " + (base / "bundle").string(),
                    dir / "log.txt") != 0) {
            detail = "synth failed";
            return false;
        }
        if (run_cli("build --model-dir " + (base / "bundle/sparse").string() + " --manifest " +
                        (base / "bundle/manifest.json").string() + " --out " +
                        (base / "scene.swm").string(),
                    dir / "log.txt") != 0) {
            detail = "build failed";
            return false;
        }
        if (run_cli("classify --model " + (base / "scene.swm").string() + " --aug-model-dir " +
                        (base / "bundle/sparse").string() + " --manifest " +
                        (base / "bundle/manifest.json").string() +
                        " --query query_00.jpg --threshold 0.6 --overlay-out " +
                        (base / "overlay.pgm").string(),
                    base / "classify_out.txt") != 0) {
            detail = "classify failed";
            return false;
        }
        if (run_cli("sweep --model " + (base / "scene.swm").string() + " --aug-model-dir " +
                        (base / "bundle/sparse").string() + " --manifest " +
                        (base / "bundle/manifest.json").string() + " --report " +
                        (base / "report.csv").string(),
                    base / "sweep_out.txt") != 0) {
            detail = "sweep failed";
            return false;
        }
    }

    const fs::path one = dir / "one", two = dir / "two";
    if (!same_tree(one / "bundle", two / "bundle")) {
        detail = "synth outputs differ";
        return false;
    }
    for (const char* f : {"scene.swm", "overlay.pgm", "classify_out.txt", "report.csv",
                          "sweep_out.txt"}) {
        if (read_file(one / f) != read_file(two / f)) {
            detail = std::string(f) + " differs between runs";
            return false;
        }
    }
    detail = "synth, build, classify, sweep each byte-identical across re-runs";
    return true;
}

}  // namespace

int main() {
    const auto suite_start = Clock::now();
    Scratch scratch;

    int failures = 0;
    auto report = [&](int number, const char* name, bool ok, const std::string& detail) {
        std::printf("criterion %d %s: %s (%s)\n", number, ok ? "PASS" : "FAIL", name,
                    detail.c_str());
        if (!ok) ++failures;
        std::fflush(stdout);
    };

    std::string detail;

    bool ok = criterion_1(scratch, detail);
    report(1, "parser round-trip", ok, detail);

    const std::vector<NoisyScene> noisy = make_noisy_scenes();
    ok = criterion_2(noisy, detail);
    report(2, "plane recovery", ok, detail);

    ok = criterion_3(noisy, detail);
    report(3, "homography holdout accuracy", ok, detail);

    ok = criterion_4(detail);
    report(4, "coverage fidelity", ok, detail);

    ok = criterion_5(detail);
    report(5, "verdict fixtures", ok, detail);

    ok = criterion_6(detail);
    report(6, "sweep shape", ok, detail);

    ok = criterion_7(detail);
    report(7, "threshold band", ok, detail);

    ok = criterion_8(scratch, detail);
    report(8, "command determinism", ok, detail);

    const double elapsed = seconds_since(suite_start);
    {
        char buf[64];
        std::snprintf(buf, sizeof(buf), "%.1f s total", elapsed);
        report(9, "suite runtime within budget", elapsed <= 120.0, buf);
    }

    if (failures == 0)
        std::printf("all criteria passed\n");
    else
        std::printf("%d criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
