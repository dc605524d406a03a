#include "overlap_lab/overlap.hpp"

#include <algorithm>
#include <unordered_map>

#include "overlap_lab/error.hpp"
#include "overlap_lab/kernels.hpp"

namespace overlap_lab {

RunList as_run_list(const std::vector<PredictionSet>& runs) {
    RunList list;
    list.reserve(runs.size());
    for (const auto& r : runs) list.push_back(&r);
    return list;
}

std::vector<std::size_t> resolve_rows(const PredictionSet& ps, const ImageIds& images) {
    std::vector<std::size_t> rows;
    rows.reserve(images.size());
    for (const auto& id : images) {
        auto r = ps.find_row(id);
        if (!r) throw Error(ErrorCode::MissingImageCoverage, "run '" + ps.model_id() + "' has no row for image " + id);
        rows.push_back(*r);
    }
    return rows;
}

std::vector<ClassIndex> truth_labels(const DatasetManifest& manifest, const ImageIds& images) {
    std::vector<ClassIndex> truth;
    truth.reserve(images.size());
    for (const auto& id : images) truth.push_back(manifest.label_of(id));
    return truth;
}

ImageIds normalized(ImageIds images) {
    std::sort(images.begin(), images.end());
    images.erase(std::unique(images.begin(), images.end()), images.end());
    return images;
}

std::vector<ClassIndex> argmax_labels(const PredictionSet& ps) {
    std::vector<std::size_t> rows(ps.num_images());
    for (std::size_t r = 0; r < rows.size(); ++r) rows[r] = r;
    std::vector<ClassIndex> out(rows.size());
    kernels::parallel::argmax_rows({ps.scores(), ps.num_classes(), rows}, out);
    return out;
}

namespace {

std::vector<ClassIndex> predictions_for(const PredictionSet& ps, const ImageIds& images) {
    const auto rows = resolve_rows(ps, images);
    std::vector<ClassIndex> out(rows.size());
    kernels::parallel::argmax_rows({ps.scores(), ps.num_classes(), rows}, out);
    return out;
}

void check_classes(const PredictionSet& ps, const DatasetManifest& manifest) {
    if (ps.num_classes() != manifest.num_classes()) {
        throw Error(ErrorCode::SizeMismatch, "run '" + ps.model_id() + "' has " + std::to_string(ps.num_classes()) +
                                                 " classes, manifest has " + std::to_string(manifest.num_classes()));
    }
}

}  // namespace

OverlapPartition overlap_labels(const DatasetManifest& manifest, const RunList& runs, const ImageIds& images) {
    if (runs.empty()) throw Error(ErrorCode::InvalidArgument, "overlap needs at least one run");
    OverlapPartition p;
    p.num_runs = runs.size();
    p.image_ids = normalized(images);
    const auto truth = truth_labels(manifest, p.image_ids);

    std::vector<std::vector<ClassIndex>> predictions;
    predictions.reserve(runs.size());
    for (const auto* run : runs) {
        check_classes(*run, manifest);
        predictions.push_back(predictions_for(*run, p.image_ids));
    }
    p.overlap.resize(p.image_ids.size());
    kernels::parallel::overlap_counts(predictions, truth, p.overlap);

    p.group_sizes.assign(runs.size() + 1, 0);
    for (auto o : p.overlap) ++p.group_sizes[static_cast<std::size_t>(o)];
    return p;
}

OverlapPartition overlap_labels(const DatasetManifest& manifest, const std::vector<PredictionSet>& runs,
                                const ImageIds& images) {
    return overlap_labels(manifest, as_run_list(runs), images);
}

ImageIds correct_set(const PredictionSet& ps, const DatasetManifest& manifest, const ImageIds& images) {
    check_classes(ps, manifest);
    const ImageIds ids = normalized(images);
    const auto truth = truth_labels(manifest, ids);
    const auto predicted = predictions_for(ps, ids);
    ImageIds out;
    for (std::size_t i = 0; i < ids.size(); ++i) {
        if (predicted[i] == truth[i]) out.push_back(ids[i]);
    }
    return out;
}

SubsetCorrectnessTable subset_correctness(const NamedImageSets& correct_sets, const ImageIds& universe) {
    if (correct_sets.empty()) throw Error(ErrorCode::InvalidArgument, "subset table needs at least one method");
    if (correct_sets.size() > kMaxSubsetMethods) {
        throw Error(ErrorCode::TooManyMethods, std::to_string(correct_sets.size()) + " methods (max " +
                                                   std::to_string(kMaxSubsetMethods) + ")");
    }
    const ImageIds ids = normalized(universe);
    std::unordered_map<std::string, std::size_t> position;
    position.reserve(ids.size());
    for (std::size_t i = 0; i < ids.size(); ++i) position.emplace(ids[i], i);

    SubsetCorrectnessTable table;
    std::vector<std::uint32_t> masks(ids.size(), 0);
    for (std::size_t j = 0; j < correct_sets.size(); ++j) {
        const auto& [method, correct] = correct_sets[j];
        if (std::find(table.methods.begin(), table.methods.end(), method) != table.methods.end()) {
            throw Error(ErrorCode::InvalidArgument, "method '" + method + "' listed twice");
        }
        table.methods.push_back(method);
        for (const auto& id : correct) {
            auto it = position.find(id);
            if (it == position.end()) {
                throw Error(ErrorCode::UnknownImageId, id + " in correct set of '" + method + "' is outside the universe");
            }
            masks[it->second] |= (1u << j);
        }
    }
    table.counts.assign(std::size_t{1} << correct_sets.size(), 0);
    kernels::parallel::mask_histogram(masks, table.counts);
    return table;
}

Rational accuracy(const PredictionSet& ps, const DatasetManifest& manifest, const ImageIds& images) {
    const ImageIds ids = normalized(images);
    if (ids.empty()) throw Error(ErrorCode::EmptyImageSet, "accuracy of run '" + ps.model_id() + "'");
    const auto correct = correct_set(ps, manifest, ids);
    return Rational(static_cast<std::int64_t>(correct.size()), static_cast<std::int64_t>(ids.size()));
}

std::map<ClassIndex, Rational> per_class_accuracy(const PredictionSet& ps, const DatasetManifest& manifest,
                                                  const ImageIds& images) {
    check_classes(ps, manifest);
    const ImageIds ids = normalized(images);
    const auto truth = truth_labels(manifest, ids);
    const auto predicted = predictions_for(ps, ids);
    std::map<ClassIndex, std::pair<std::int64_t, std::int64_t>> tally;
    for (std::size_t i = 0; i < ids.size(); ++i) {
        auto& [hit, total] = tally[truth[i]];
        hit += predicted[i] == truth[i] ? 1 : 0;
        ++total;
    }
    std::map<ClassIndex, Rational> out;
    for (const auto& [c, t] : tally) out.emplace(c, Rational(t.first, t.second));
    return out;
}

ImageIds export_subset(const OverlapPartition& partition, std::int32_t o) {
    if (o < 0 || static_cast<std::size_t>(o) > partition.num_runs) {
        throw Error(ErrorCode::InvalidArgument, "overlap value " + std::to_string(o) + " outside 0.." +
                                                    std::to_string(partition.num_runs));
    }
    ImageIds out;
    for (std::size_t i = 0; i < partition.image_ids.size(); ++i) {
        if (partition.overlap[i] == o) out.push_back(partition.image_ids[i]);
    }
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace overlap_lab
