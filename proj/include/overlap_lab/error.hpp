#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace overlap_lab {

enum class ErrorCode {
    MalformedJson,
    InvalidManifest,
    DuplicateImageId,
    LabelOutOfRange,
    SizeMismatch,
    UnknownImageId,
    NonFiniteScore,
    DatasetIdMismatch,
    IoFailure,
    InvalidErrorClass,
    MissingImageCoverage,
    TooManyMethods,
    EmptyImageSet,
    ReplicateCountMismatch,
    InvalidArgument,
    PortInUse,
    MissingImagesRoot,
};

std::string_view to_string(ErrorCode code);

// Every validation failure surfaces as one of these; `what()` names the
// offending record where there is one.
class Error : public std::runtime_error {
  public:
    Error(ErrorCode code, const std::string& detail)
        : std::runtime_error(std::string(to_string(code)) + ": " + detail), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

  private:
    ErrorCode code_;
};

}  // namespace overlap_lab
