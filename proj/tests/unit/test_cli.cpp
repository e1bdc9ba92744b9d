#include "snowsight/manifest.hpp"
#include "snowsight/masks.hpp"

#include "helpers.hpp"

#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <string>

#ifndef SNOWSIGHT_CLI_PATH
#error "SNOWSIGHT_CLI_PATH must point at the built binary"
#endif

using namespace snowsight;

namespace {

struct RunResult {
    int exit_code = -1;
    std::string output;  // stdout + stderr
};

RunResult run_cli(const std::string& args, const std::filesystem::path& scratch) {
    const auto log = scratch / "cli_output.txt";
    const std::string cmd =
        std::string(SNOWSIGHT_CLI_PATH) + " " + args + " > " + log.string() + " 2>&1";
    const int status = std::system(cmd.c_str());
    RunResult r;
    r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    if (std::filesystem::exists(log)) r.output = testutil::read_file(log);
    return r;
}

// One generated bundle + built model, shared by the CLI cases; building is
// the slow part so it happens once.
struct CliWorld {
    testutil::TempDir dir;
    std::filesystem::path bundle = dir / "bundle";
    std::filesystem::path model = dir / "scene.swm";

    CliWorld() {
        testutil::write_file(dir / "spec.json",
                             R"({"seed": 5, "runs": 2, "images_per_run": 4, "step_m": 7.0,
                                 "point_count": 600, "image_width": 480, "image_height": 270,
                                 "focal_px": 400.0, "query_count": 2,
                                 "snow": {"kind": "covers_sidewalk", "fraction": 0.9}})");
        RunResult synth = run_cli(
            "synth --spec " + (dir / "spec.json").string() + " --out-dir " + bundle.string(), dir);
        REQUIRE(synth.exit_code == 0);
        RunResult build = run_cli("build --model-dir " + (bundle / "sparse").string() +
                                      " --manifest " + (bundle / "manifest.json").string() +
                                      " --out " + model.string(),
                                  dir);
        REQUIRE(build.exit_code == 0);
    }
};

CliWorld& world() {
    static CliWorld w;
    return w;
}

}  // namespace

TEST_CASE("cli synth writes a complete bundle") {
    CliWorld& w = world();
    for (const char* f : {"sparse/cameras.txt", "sparse/images.txt", "sparse/points3D.txt",
                          "manifest.json", "ground_truth.json"})
        CHECK(std::filesystem::exists(w.bundle / f));
    CHECK(std::filesystem::exists(w.model));

    SUBCASE("synth is reproducible through the binary") {
        const RunResult again = run_cli("synth --spec " + (w.dir / "spec.json").string() +
                                            " --out-dir " + (w.dir / "bundle2").string(),
                                        w.dir);
        REQUIRE(again.exit_code == 0);
        CHECK(testutil::read_file(w.bundle / "sparse" / "points3D.txt") ==
              testutil::read_file(w.dir / "bundle2" / "sparse" / "points3D.txt"));
        CHECK(testutil::read_file(w.bundle / "manifest.json") ==
              testutil::read_file(w.dir / "bundle2" / "manifest.json"));
    }

    SUBCASE("invalid spec exits 1") {
        testutil::write_file(w.dir / "bad_spec.json", R"({"runs": 0})");
        const RunResult r = run_cli("synth --spec " + (w.dir / "bad_spec.json").string() +
                                        " --out-dir " + (w.dir / "nope").string(),
                                    w.dir);
        CHECK(r.exit_code == 1);
    }
}

TEST_CASE("cli build reports sources and plane quality") {
    CliWorld& w = world();
    const RunResult r = run_cli("build --model-dir " + (w.bundle / "sparse").string() +
                                    " --manifest " + (w.bundle / "manifest.json").string() +
                                    " --out " + (w.dir / "again.swm").string(),
                                w.dir);
    REQUIRE(r.exit_code == 0);
    CHECK(r.output.find("sidewalk points from 8 reference images") != std::string::npos);
    CHECK(r.output.find("plane inliers") != std::string::npos);
    CHECK(testutil::read_file(w.model) == testutil::read_file(w.dir / "again.swm"));

    SUBCASE("missing manifest path is a usage error") {
        const RunResult bad = run_cli("build --model-dir " + (w.bundle / "sparse").string() +
                                          " --manifest " + (w.dir / "absent.json").string() +
                                          " --out " + (w.dir / "x.swm").string(),
                                      w.dir);
        CHECK(bad.exit_code == 1);
    }

    SUBCASE("nothing to learn exits 2") {
        // Void out every raster: the build finds no sidewalk anywhere.
        const auto crippled = w.dir / "crippled";
        std::filesystem::create_directories(crippled / "rasters");
        std::filesystem::copy(w.bundle / "sparse", crippled / "sparse",
                              std::filesystem::copy_options::recursive);
        const Manifest m = load_manifest(w.bundle / "manifest.json");
        for (const auto& e : m.entries) {
            const LabelRaster r0 = load_label_raster(m.raster_path(e));
            save_label_raster(LabelRaster::filled(r0.width(), r0.height(), 0),
                              crippled / e.raster);
        }
        std::filesystem::copy_file(w.bundle / "manifest.json", crippled / "manifest.json");
        const RunResult bad = run_cli("build --model-dir " + (crippled / "sparse").string() +
                                          " --manifest " + (crippled / "manifest.json").string() +
                                          " --out " + (w.dir / "y.swm").string(),
                                      w.dir);
        CHECK(bad.exit_code == 2);
    }
}

TEST_CASE("cli classify output contract") {
    CliWorld& w = world();
    const std::string common = "classify --model " + w.model.string() + " --aug-model-dir " +
                               (w.bundle / "sparse").string() + " --manifest " +
                               (w.bundle / "manifest.json").string();

    SUBCASE("snow-covered query prints one verdict line") {
        const RunResult r = run_cli(common + " --query query_00.jpg --threshold 0.6", w.dir);
        REQUIRE(r.exit_code == 0);
        CHECK(r.output.find("query_00.jpg SnowCovered 0.") != std::string::npos);
        CHECK(r.output.find("0.60") != std::string::npos);
    }

    SUBCASE("far query is out of scene, coverage dash") {
        const RunResult r = run_cli(common + " --query query_far.jpg --threshold 0.6", w.dir);
        REQUIRE(r.exit_code == 0);
        CHECK(r.output.find("query_far.jpg OutOfScene - 0.60") != std::string::npos);
    }

    SUBCASE("overlay file is written on request") {
        const auto overlay = w.dir / "overlay.pgm";
        const RunResult r = run_cli(
            common + " --query query_00.jpg --threshold 0.6 --overlay-out " + overlay.string(),
            w.dir);
        REQUIRE(r.exit_code == 0);
        const LabelRaster o = load_label_raster(overlay);
        CHECK(o.width() == 480);
        CHECK(o.count(Category::Snow) > 0);  // overlap cells exist on a snowy query
    }

    SUBCASE("name missing from the manifest exits 2") {
        const RunResult r = run_cli(common + " --query nobody.jpg --threshold 0.6", w.dir);
        CHECK(r.exit_code == 2);
    }

    SUBCASE("manifest entry with no reconstruction pose exits 4") {
        // Clone the bundle and append a manifest entry for an image the
        // reconstruction has never seen.
        const auto clone = w.dir / "unregistered";
        if (!std::filesystem::exists(clone)) {
            std::filesystem::create_directories(clone);
            std::filesystem::copy(w.bundle, clone, std::filesystem::copy_options::recursive);
            Manifest m = load_manifest(clone / "manifest.json");
            ManifestEntry ghost = m.entries.back();
            ghost.name = "ghost.jpg";
            ghost.category = QueryCategory::SnowCovered;
            m.entries.push_back(ghost);
            save_manifest(m, clone / "manifest.json");
        }
        const RunResult r = run_cli("classify --model " + w.model.string() +
                                        " --aug-model-dir " + (clone / "sparse").string() +
                                        " --manifest " + (clone / "manifest.json").string() +
                                        " --query ghost.jpg --threshold 0.6",
                                    w.dir);
        CHECK(r.exit_code == 4);
    }

    SUBCASE("threshold outside [0,1] is a usage error") {
        const RunResult r = run_cli(common + " --query query_00.jpg --threshold 1.5", w.dir);
        CHECK(r.exit_code == 1);
    }
}

TEST_CASE("cli sweep") {
    CliWorld& w = world();
    const std::string common = "sweep --model " + w.model.string() + " --aug-model-dir " +
                               (w.bundle / "sparse").string() + " --manifest " +
                               (w.bundle / "manifest.json").string();

    SUBCASE("default grid prints counts and a band or no band") {
        const auto report = w.dir / "report.csv";
        const RunResult r = run_cli(common + " --report " + report.string(), w.dir);
        REQUIRE(r.exit_code == 0);
        CHECK(r.output.find("2 labeled queries, 20 thresholds") != std::string::npos);
        const bool has_band = r.output.find("band ") != std::string::npos;
        const bool no_band = r.output.find("no band") != std::string::npos;
        CHECK((has_band || no_band));

        const std::string csv = testutil::read_file(report);
        CHECK(csv.substr(0, csv.find('\n')) ==
              "threshold,clear_pct,snow_covered_pct,cleared_pct");
        std::size_t lines = 0;
        for (char ch : csv)
            if (ch == '\n') ++lines;
        CHECK(lines == 21);
    }

    SUBCASE("zero step is a usage error") {
        const RunResult r = run_cli(common + " --step 0", w.dir);
        CHECK(r.exit_code == 1);
    }

    SUBCASE("no labeled queries exits 2") {
        const auto clone = w.dir / "unlabeled";
        if (!std::filesystem::exists(clone)) {
            std::filesystem::create_directories(clone);
            std::filesystem::copy(w.bundle, clone, std::filesystem::copy_options::recursive);
            Manifest m = load_manifest(clone / "manifest.json");
            for (auto& e : m.entries) e.category.reset();
            save_manifest(m, clone / "manifest.json");
        }
        const RunResult r = run_cli("sweep --model " + w.model.string() + " --aug-model-dir " +
                                        (clone / "sparse").string() + " --manifest " +
                                        (clone / "manifest.json").string(),
                                    w.dir);
        CHECK(r.exit_code == 2);
    }
}

TEST_CASE("cli usage errors") {
    CliWorld& w = world();
    CHECK(run_cli("", w.dir).exit_code == 1);
    CHECK(run_cli("frobnicate", w.dir).exit_code == 1);
    CHECK(run_cli("classify --model nope.swm", w.dir).exit_code == 1);  // missing required opts
}
