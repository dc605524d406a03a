#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "overlap_lab/overlap.hpp"
#include "overlap_lab/types.hpp"

namespace overlap_lab {

// Row-wise max-shifted softmax of a row-major matrix, in double.
std::vector<double> softmax_rows(std::span<const float> scores, std::size_t num_classes);

// Most votes among member top-1 labels; ties go to the highest mean softmax
// probability, then the lowest class index.
EnsembleResult vote_ensemble(const RunList& runs, const DatasetManifest& manifest, const ImageIds& images);
// Top-1 of the mean member softmax row; ties go to the lowest class index.
EnsembleResult cp_avg_ensemble(const RunList& runs, const DatasetManifest& manifest, const ImageIds& images);
EnsembleResult run_ensemble(EnsembleRule rule, const RunList& runs, const DatasetManifest& manifest,
                            const ImageIds& images);

// 1 - |hard| / |images|.
Rational oracle_upper_bound(const OverlapPartition& partition);

using RunsByMethod = std::vector<std::pair<std::string, RunList>>;

struct SweepResult {
    std::vector<std::string> methods;
    std::size_t replicates = 0;
    // Indexed by method bitmask; empty for mask 0.
    std::vector<std::optional<Rational>> mean_accuracy;
};

// For every non-empty method subset, averages the accuracy of the R disjoint
// ensembles {replicate r of each method} for r in 0..R-1.
SweepResult sweep_subsets(const RunsByMethod& runs_by_method, const DatasetManifest& manifest, const ImageIds& images,
                          EnsembleRule rule);

// Groups runs by method (first-appearance order), each sorted by replicate index.
RunsByMethod group_by_method(const RunList& runs);

}  // namespace overlap_lab
