#include "overlap_lab/ensemble.hpp"

#include <algorithm>

#include "overlap_lab/error.hpp"
#include "overlap_lab/kernels.hpp"

namespace overlap_lab {

std::vector<double> softmax_rows(std::span<const float> scores, std::size_t num_classes) {
    std::vector<double> out(scores.size());
    if (num_classes == 0) return out;
    kernels::parallel::softmax_rows(scores, num_classes, out);
    return out;
}

EnsembleResult run_ensemble(EnsembleRule rule, const RunList& runs, const DatasetManifest& manifest,
                            const ImageIds& images) {
    if (runs.empty()) throw Error(ErrorCode::InvalidArgument, "ensemble needs at least one member");
    EnsembleResult result;
    result.rule = rule;
    result.image_ids = normalized(images);
    if (result.image_ids.empty()) throw Error(ErrorCode::EmptyImageSet, "ensemble over no images");
    const auto truth = truth_labels(manifest, result.image_ids);

    std::vector<std::vector<std::size_t>> rows;
    rows.reserve(runs.size());
    std::vector<kernels::RowSelection> members;
    members.reserve(runs.size());
    for (const auto* run : runs) {
        if (run->num_classes() != manifest.num_classes()) {
            throw Error(ErrorCode::SizeMismatch, "run '" + run->model_id() + "' class count differs from manifest");
        }
        result.member_run_ids.push_back(run->model_id());
        rows.push_back(resolve_rows(*run, result.image_ids));
    }
    for (std::size_t k = 0; k < runs.size(); ++k) members.push_back({runs[k]->scores(), runs[k]->num_classes(), rows[k]});

    result.predictions.resize(result.image_ids.size());
    if (rule == EnsembleRule::Vote) {
        kernels::parallel::vote(members, result.predictions);
    } else {
        kernels::parallel::cp_avg(members, result.predictions);
    }

    std::int64_t hits = 0;
    for (std::size_t i = 0; i < truth.size(); ++i) hits += result.predictions[i] == truth[i] ? 1 : 0;
    result.accuracy = Rational(hits, static_cast<std::int64_t>(truth.size()));
    return result;
}

EnsembleResult vote_ensemble(const RunList& runs, const DatasetManifest& manifest, const ImageIds& images) {
    return run_ensemble(EnsembleRule::Vote, runs, manifest, images);
}

EnsembleResult cp_avg_ensemble(const RunList& runs, const DatasetManifest& manifest, const ImageIds& images) {
    return run_ensemble(EnsembleRule::CpAvg, runs, manifest, images);
}

Rational oracle_upper_bound(const OverlapPartition& partition) {
    if (partition.image_ids.empty()) throw Error(ErrorCode::EmptyImageSet, "oracle bound of an empty partition");
    const auto total = static_cast<std::int64_t>(partition.image_ids.size());
    return Rational(1, 1) - Rational(static_cast<std::int64_t>(partition.group_sizes.at(0)), total);
}

SweepResult sweep_subsets(const RunsByMethod& runs_by_method, const DatasetManifest& manifest, const ImageIds& images,
                          EnsembleRule rule) {
    if (runs_by_method.empty()) throw Error(ErrorCode::InvalidArgument, "sweep needs at least one method");
    if (runs_by_method.size() > kMaxSubsetMethods) {
        throw Error(ErrorCode::TooManyMethods, std::to_string(runs_by_method.size()) + " methods");
    }
    SweepResult out;
    out.replicates = runs_by_method.front().second.size();
    for (const auto& [method, runs] : runs_by_method) {
        if (runs.size() != out.replicates || runs.empty()) {
            throw Error(ErrorCode::ReplicateCountMismatch, "method '" + method + "' has " +
                                                               std::to_string(runs.size()) + " replicates, expected " +
                                                               std::to_string(out.replicates));
        }
        out.methods.push_back(method);
    }

    const std::uint32_t num_masks = 1u << runs_by_method.size();
    out.mean_accuracy.assign(num_masks, std::nullopt);
    for (std::uint32_t mask = 1; mask < num_masks; ++mask) {
        Rational sum;
        for (std::size_t r = 0; r < out.replicates; ++r) {
            RunList members;
            for (std::size_t j = 0; j < runs_by_method.size(); ++j) {
                if (mask & (1u << j)) members.push_back(runs_by_method[j].second[r]);
            }
            sum = sum + run_ensemble(rule, members, manifest, images).accuracy;
        }
        out.mean_accuracy[mask] = sum / Rational(static_cast<std::int64_t>(out.replicates), 1);
    }
    return out;
}

RunsByMethod group_by_method(const RunList& runs) {
    RunsByMethod groups;
    for (const auto* run : runs) {
        auto it = std::find_if(groups.begin(), groups.end(), [&](const auto& g) { return g.first == run->method_id(); });
        if (it == groups.end()) {
            groups.emplace_back(run->method_id(), RunList{run});
        } else {
            it->second.push_back(run);
        }
    }
    for (auto& [method, list] : groups) {
        std::stable_sort(list.begin(), list.end(), [](const PredictionSet* a, const PredictionSet* b) {
            return a->replicate_index() < b->replicate_index();
        });
    }
    return groups;
}

}  // namespace overlap_lab
