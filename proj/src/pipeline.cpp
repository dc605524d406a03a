#include "overlap_lab/pipeline.hpp"

#include "overlap_lab/error.hpp"
#include "overlap_lab/io.hpp"
#include "overlap_lab/overlap.hpp"

namespace overlap_lab {

std::vector<PredictionSet> load_runs(const std::vector<std::filesystem::path>& dirs, const DatasetManifest& manifest) {
    std::vector<PredictionSet> runs;
    runs.reserve(dirs.size());
    for (const auto& d : dirs) runs.push_back(load_prediction_set(d, manifest));
    return runs;
}

SubsetCorrectnessTable method_subset_table(const DatasetManifest& manifest, const RunList& runs, const ImageIds& images) {
    NamedImageSets sets;
    for (const auto* run : runs) sets.emplace_back(run->method_id(), correct_set(*run, manifest, images));
    return subset_correctness(sets, images);
}

nlohmann::json to_json(const SweepResult& sweep, EnsembleRule rule) {
    nlohmann::json subsets = nlohmann::json::array();
    for (std::size_t mask = 1; mask < sweep.mean_accuracy.size(); ++mask) {
        nlohmann::json names = nlohmann::json::array();
        for (std::size_t j = 0; j < sweep.methods.size(); ++j) {
            if (mask & (std::size_t{1} << j)) names.push_back(sweep.methods[j]);
        }
        subsets.push_back({{"mask", mask}, {"methods", std::move(names)}, {"mean_accuracy", to_json(*sweep.mean_accuracy[mask])}});
    }
    return {{"rule", to_string(rule)},
            {"methods", sweep.methods},
            {"replicates", sweep.replicates},
            {"subsets", std::move(subsets)}};
}

ReportInput build_standard_report(const DatasetManifest& manifest, const std::vector<PredictionSet>& runs,
                                  const ImageIds& images, std::string_view split_name,
                                  const std::optional<std::vector<ErrorAnnotation>>& annotations) {
    if (runs.empty()) throw Error(ErrorCode::InvalidArgument, "report needs at least one run");
    const RunList all = as_run_list(runs);
    const RunsByMethod groups = group_by_method(all);

    ReportInput report;
    report.metadata["dataset_id"] = manifest.dataset_id();
    report.metadata["split"] = std::string(split_name);
    report.metadata["num_images"] = std::to_string(normalized(images).size());
    report.metadata["num_runs"] = std::to_string(runs.size());
    report.metadata["num_methods"] = std::to_string(groups.size());

    for (const auto& [method, list] : groups) {
        if (list.size() >= 2) report.overlaps.push_back({"within:" + method, overlap_labels(manifest, list, images)});
    }
    std::optional<std::size_t> primary;
    if (groups.size() >= 2) {
        RunList firsts;
        for (const auto& g : groups) firsts.push_back(g.second.front());
        report.overlaps.push_back({"between", overlap_labels(manifest, firsts, images)});
        primary = report.overlaps.size() - 1;
        if (groups.size() <= kMaxSubsetMethods) {
            report.subsets.push_back({"between", method_subset_table(manifest, firsts, images)});
        }
    }
    if (report.overlaps.empty()) report.overlaps.push_back({"all", overlap_labels(manifest, all, images)});
    if (!primary) primary = report.overlaps.size() - 1;

    AccuracyGrid grid;
    grid.name = "ensembles";
    grid.rows = {"Single", "Vote", "cp-Avg"};
    for (const auto& g : groups) grid.columns.push_back(g.first);
    grid.cells.resize(grid.rows.size() * grid.columns.size());
    for (std::size_t c = 0; c < groups.size(); ++c) {
        const auto& list = groups[c].second;
        Rational sum;
        for (const auto* run : list) sum = sum + accuracy(*run, manifest, images);
        grid.cells[c] = sum / Rational(static_cast<std::int64_t>(list.size()), 1);
        grid.cells[grid.columns.size() + c] = vote_ensemble(list, manifest, images).accuracy;
        grid.cells[2 * grid.columns.size() + c] = cp_avg_ensemble(list, manifest, images).accuracy;
    }
    report.grids.push_back(std::move(grid));

    bool equal_replicates = groups.size() >= 2 && groups.size() <= kMaxSubsetMethods;
    for (const auto& g : groups) equal_replicates = equal_replicates && g.second.size() == groups.front().second.size();
    if (equal_replicates) {
        const SweepResult sweep = sweep_subsets(groups, manifest, images, EnsembleRule::CpAvg);
        AccuracyGrid s;
        s.name = "sweep:cp_avg";
        s.columns = {"mean accuracy"};
        for (std::size_t mask = 1; mask < sweep.mean_accuracy.size(); ++mask) {
            std::string label;
            for (std::size_t j = 0; j < sweep.methods.size(); ++j) {
                if (!(mask & (std::size_t{1} << j))) continue;
                if (!label.empty()) label += '+';
                label += sweep.methods[j];
            }
            s.rows.push_back(label);
            s.cells.push_back(sweep.mean_accuracy[mask]);
        }
        report.grids.push_back(std::move(s));
    }

    if (annotations) {
        const auto& section = report.overlaps[*primary];
        PrevalenceSection p;
        p.name = section.name;
        p.prevalence = prevalence(resolve_annotations(*annotations), export_subset(section.partition, 0));
        p.disagreements = annotation_disagreements(*annotations);
        report.prevalence = std::move(p);
    }
    return report;
}

}  // namespace overlap_lab
