#include "overlap_lab/correction.hpp"

#include <algorithm>
#include <unordered_set>

#include "overlap_lab/error.hpp"

namespace overlap_lab {

CorrectionOutcome apply_corrections(const DatasetManifest& manifest, const LabelCorrectionTable& table) {
    for (const auto& [id, name] : table.corrections) {
        if (manifest.find(id) == nullptr) throw Error(ErrorCode::UnknownImageId, id + " in correction table");
    }
    CorrectionOutcome out;
    std::vector<ImageRecord> records;
    records.reserve(manifest.records().size());
    for (const auto& r : manifest.records()) {
        auto it = table.corrections.find(r.image_id);
        if (it == table.corrections.end()) {
            records.push_back(r);
            continue;
        }
        const auto index = manifest.vocabulary().index_of(it->second);
        if (!index) {
            out.dropped.push_back(r.image_id);
            continue;
        }
        ImageRecord fixed = r;
        fixed.label_index = *index;
        records.push_back(std::move(fixed));
        out.relabeled.push_back(r.image_id);
    }
    std::sort(out.dropped.begin(), out.dropped.end());
    std::sort(out.relabeled.begin(), out.relabeled.end());
    out.manifest = DatasetManifest(manifest.dataset_id() + "++", manifest.vocabulary(), std::move(records));
    return out;
}

PredictionSet restrict_predictions(const PredictionSet& ps, const ImageIds& kept) {
    std::unordered_set<std::string> keep;
    for (const auto& id : kept) {
        if (!ps.find_row(id)) throw Error(ErrorCode::UnknownImageId, id + " not in run '" + ps.model_id() + "'");
        keep.insert(id);
    }
    ImageIds ids;
    std::vector<float> scores;
    for (std::size_t r = 0; r < ps.num_images(); ++r) {
        if (!keep.contains(ps.image_ids()[r])) continue;
        ids.push_back(ps.image_ids()[r]);
        const auto row = ps.row(r);
        scores.insert(scores.end(), row.begin(), row.end());
    }
    return PredictionSet(ps.identity(), std::move(ids), std::move(scores), ps.num_classes());
}

}  // namespace overlap_lab
