#include "overlap_lab/error.hpp"

namespace overlap_lab {

std::string_view to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::MalformedJson: return "MalformedJson";
        case ErrorCode::InvalidManifest: return "InvalidManifest";
        case ErrorCode::DuplicateImageId: return "DuplicateImageId";
        case ErrorCode::LabelOutOfRange: return "LabelOutOfRange";
        case ErrorCode::SizeMismatch: return "SizeMismatch";
        case ErrorCode::UnknownImageId: return "UnknownImageId";
        case ErrorCode::NonFiniteScore: return "NonFiniteScore";
        case ErrorCode::DatasetIdMismatch: return "DatasetIdMismatch";
        case ErrorCode::IoFailure: return "IoFailure";
        case ErrorCode::InvalidErrorClass: return "InvalidErrorClass";
        case ErrorCode::MissingImageCoverage: return "MissingImageCoverage";
        case ErrorCode::TooManyMethods: return "TooManyMethods";
        case ErrorCode::EmptyImageSet: return "EmptyImageSet";
        case ErrorCode::ReplicateCountMismatch: return "ReplicateCountMismatch";
        case ErrorCode::InvalidArgument: return "InvalidArgument";
        case ErrorCode::PortInUse: return "PortInUse";
        case ErrorCode::MissingImagesRoot: return "MissingImagesRoot";
    }
    return "Unknown";
}

}  // namespace overlap_lab
