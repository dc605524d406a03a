#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "overlap_lab/types.hpp"

namespace overlap_lab {

using RunList = std::vector<const PredictionSet*>;

RunList as_run_list(const std::vector<PredictionSet>& runs);

// Row index of each image in `ps`; throws MissingImageCoverage naming run and image.
std::vector<std::size_t> resolve_rows(const PredictionSet& ps, const ImageIds& images);
// Ground-truth label of each image; throws UnknownImageId.
std::vector<ClassIndex> truth_labels(const DatasetManifest& manifest, const ImageIds& images);
// Sorted, de-duplicated copy.
ImageIds normalized(ImageIds images);

// Top-1 class per row of `ps`, aligned with ps.image_ids(); ties go to the lowest index.
std::vector<ClassIndex> argmax_labels(const PredictionSet& ps);

// o_i = number of runs whose top-1 label equals the ground truth.
OverlapPartition overlap_labels(const DatasetManifest& manifest, const RunList& runs, const ImageIds& images);
OverlapPartition overlap_labels(const DatasetManifest& manifest, const std::vector<PredictionSet>& runs,
                                const ImageIds& images);

// Images (sorted) that `ps` classifies correctly.
ImageIds correct_set(const PredictionSet& ps, const DatasetManifest& manifest, const ImageIds& images);

using NamedImageSets = std::vector<std::pair<std::string, ImageIds>>;

inline constexpr std::size_t kMaxSubsetMethods = 16;

// counts[S] = number of universe images correct for exactly the methods in S.
SubsetCorrectnessTable subset_correctness(const NamedImageSets& correct_sets, const ImageIds& universe);

// Throws EmptyImageSet.
Rational accuracy(const PredictionSet& ps, const DatasetManifest& manifest, const ImageIds& images);

// Classes without images are absent.
std::map<ClassIndex, Rational> per_class_accuracy(const PredictionSet& ps, const DatasetManifest& manifest,
                                                  const ImageIds& images);

// Ids with overlap label `o`, sorted.
ImageIds export_subset(const OverlapPartition& partition, std::int32_t o);

}  // namespace overlap_lab
