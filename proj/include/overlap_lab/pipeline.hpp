#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "overlap_lab/ensemble.hpp"
#include "overlap_lab/report.hpp"
#include "overlap_lab/types.hpp"

namespace overlap_lab {

std::vector<PredictionSet> load_runs(const std::vector<std::filesystem::path>& dirs, const DatasetManifest& manifest);

// One SubsetCorrectnessTable over the given runs, keyed by method id.
// Throws InvalidArgument if two runs share a method.
SubsetCorrectnessTable method_subset_table(const DatasetManifest& manifest, const RunList& runs, const ImageIds& images);

nlohmann::json to_json(const SweepResult& sweep, EnsembleRule rule);

// The standard analysis bundle:
//  - "within:<method>" overlap for every method with 2+ replicates,
//  - "between" overlap and subset table over the first replicate of each method (2+ methods),
//  - an {Single, Vote, cp-Avg} x methods accuracy grid,
//  - a cp-avg subset sweep when every method has the same replicate count,
//  - prevalence over the primary hard subset when annotations are supplied.
ReportInput build_standard_report(const DatasetManifest& manifest, const std::vector<PredictionSet>& runs,
                                  const ImageIds& images, std::string_view split_name,
                                  const std::optional<std::vector<ErrorAnnotation>>& annotations);

}  // namespace overlap_lab
