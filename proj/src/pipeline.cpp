#include "snowsight/pipeline.hpp"

#include "snowsight/errors.hpp"

namespace snowsight {

BuildOutcome build_from_files(const std::filesystem::path& model_dir,
                              const std::filesystem::path& manifest_path,
                              const BuildParams& params) {
    const Manifest manifest = load_manifest(manifest_path);
    const SparseModel model = parse_sparse_model(model_dir);

    std::map<std::string, LabelRaster> rasters;
    for (const auto& entry : manifest.entries) {
        if (entry.role != ImageRole::Reference) continue;
        rasters.emplace(entry.name, load_label_raster(manifest.raster_path(entry)));
    }

    BuildOutcome out;
    out.model = build_sidewalk_model(model, rasters, manifest.scene, params, &out.warnings);
    return out;
}

QueryInput make_query_input(const SparseModel& augmented, const Manifest& manifest,
                            const std::string& query_name) {
    const ManifestEntry* entry = manifest.find(query_name);
    if (!entry) throw UnknownQueryError(query_name);

    const ImageRecord* image = nullptr;
    for (const auto& [iid, img] : augmented.images) {
        if (img.name == query_name) {
            image = &img;
            break;
        }
    }
    if (!image) throw UnregisteredQueryError(query_name);

    QueryInput q;
    q.name = query_name;
    q.gps_lat = entry->lat;
    q.gps_lon = entry->lon;
    q.qvec = image->qvec;
    q.tvec = image->tvec;
    q.intrinsics = augmented.cameras.at(image->camera_id);
    q.raster = load_label_raster(manifest.raster_path(*entry));
    return q;
}

Verdict classify_from_files(const std::filesystem::path& model_path,
                            const std::filesystem::path& aug_model_dir,
                            const std::filesystem::path& manifest_path,
                            const std::string& query_name, double threshold,
                            const ClassifyParams& params) {
    const SidewalkModel model = load_model(model_path);
    const SparseModel augmented = parse_sparse_model(aug_model_dir);
    const Manifest manifest = load_manifest(manifest_path);
    const QueryInput query = make_query_input(augmented, manifest, query_name);
    return classify(model, query, threshold, params);
}

SweepOutcome sweep_from_files(const std::vector<std::filesystem::path>& model_paths,
                              const std::vector<std::filesystem::path>& aug_model_dirs,
                              const std::vector<std::filesystem::path>& manifest_paths,
                              double t_min, double t_max, double step,
                              const ClassifyParams& params, double floor_pct) {
    if (model_paths.empty()) throw InvalidInputError("no scenes given");
    if (model_paths.size() != aug_model_dirs.size() ||
        model_paths.size() != manifest_paths.size())
        throw InvalidInputError("model, augmented-model and manifest lists must pair up");

    std::map<std::string, SidewalkModel> models;
    std::vector<LabeledQuery> queries;
    for (std::size_t i = 0; i < model_paths.size(); ++i) {
        SidewalkModel model = load_model(model_paths[i]);
        const SparseModel augmented = parse_sparse_model(aug_model_dirs[i]);
        const Manifest manifest = load_manifest(manifest_paths[i]);
        const std::string scene_id = model.scene.scene_id;
        if (!models.emplace(scene_id, std::move(model)).second)
            throw InvalidInputError("duplicate scene_id '" + scene_id + "'");
        for (const auto& entry : manifest.entries) {
            if (entry.role != ImageRole::Query || !entry.category) continue;
            queries.push_back({make_query_input(augmented, manifest, entry.name),
                               *entry.category});
        }
    }
    if (queries.empty()) throw NoLabeledQueriesError("no labeled queries in any manifest");

    SweepOutcome out;
    out.result = sweep(models, queries, t_min, t_max, step, params);
    out.band = optimal_band(out.result, floor_pct);
    out.query_count = queries.size();
    return out;
}

}  // namespace snowsight
