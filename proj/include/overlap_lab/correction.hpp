#pragma once

#include "overlap_lab/types.hpp"

namespace overlap_lab {

struct CorrectionOutcome {
    DatasetManifest manifest;
    ImageIds dropped;    // corrected name outside the vocabulary; sorted
    ImageIds relabeled;  // sorted
};

// Throws UnknownImageId for a correction naming an image absent from the manifest.
CorrectionOutcome apply_corrections(const DatasetManifest& manifest, const LabelCorrectionTable& table);

// Keeps rows whose id is in `kept`, preserving order. Throws UnknownImageId.
PredictionSet restrict_predictions(const PredictionSet& ps, const ImageIds& kept);

}  // namespace overlap_lab
