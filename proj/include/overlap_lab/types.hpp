#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "overlap_lab/rational.hpp"

namespace overlap_lab {

using ClassIndex = std::int32_t;
using ImageIds = std::vector<std::string>;

class ClassVocabulary {
  public:
    ClassVocabulary() = default;
    // Requires at least two pairwise distinct names.
    explicit ClassVocabulary(std::vector<std::string> names);

    std::size_t size() const noexcept { return names_.size(); }
    const std::string& name(ClassIndex index) const { return names_.at(static_cast<std::size_t>(index)); }
    const std::vector<std::string>& names() const noexcept { return names_; }
    std::optional<ClassIndex> index_of(std::string_view name) const;

  private:
    std::vector<std::string> names_;
    std::unordered_map<std::string, ClassIndex> index_;
};

enum class Split { Train, Test, Extra };

std::string_view to_string(Split split);
// Anything other than "train"/"test" collapses to Extra.
Split parse_split(std::string_view text);

struct ImageRecord {
    std::string image_id;
    ClassIndex label_index = 0;
    Split split = Split::Test;
    std::optional<std::string> image_path;

    bool operator==(const ImageRecord&) const = default;
};

class DatasetManifest {
  public:
    DatasetManifest() = default;
    // Throws DuplicateImageId / LabelOutOfRange naming the offending record.
    DatasetManifest(std::string dataset_id, ClassVocabulary vocabulary, std::vector<ImageRecord> records);

    const std::string& dataset_id() const noexcept { return dataset_id_; }
    const ClassVocabulary& vocabulary() const noexcept { return vocabulary_; }
    std::size_t num_classes() const noexcept { return vocabulary_.size(); }
    const std::vector<ImageRecord>& records() const noexcept { return records_; }

    const ImageRecord* find(std::string_view image_id) const;
    const ImageRecord& at(std::string_view image_id) const;
    ClassIndex label_of(std::string_view image_id) const { return at(image_id).label_index; }

    // Ids in the split, sorted lexicographically.
    ImageIds ids_in_split(Split split) const;
    std::size_t count_in_split(Split split) const;

  private:
    std::string dataset_id_;
    ClassVocabulary vocabulary_;
    std::vector<ImageRecord> records_;
    std::unordered_map<std::string, std::size_t> position_;
};

struct RunIdentity {
    std::string model_id;
    std::string method_id;
    std::uint32_t replicate_index = 0;
    std::string dataset_id;

    bool operator==(const RunIdentity&) const = default;
};

// One model run's raw pre-softmax scores, row-major (num_images x num_classes).
class PredictionSet {
  public:
    PredictionSet() = default;
    // Throws SizeMismatch on shape errors, NonFiniteScore, DuplicateImageId.
    PredictionSet(RunIdentity identity, ImageIds image_ids, std::vector<float> scores, std::size_t num_classes);

    const RunIdentity& identity() const noexcept { return identity_; }
    const std::string& model_id() const noexcept { return identity_.model_id; }
    const std::string& method_id() const noexcept { return identity_.method_id; }
    std::uint32_t replicate_index() const noexcept { return identity_.replicate_index; }
    const std::string& dataset_id() const noexcept { return identity_.dataset_id; }

    std::size_t num_images() const noexcept { return image_ids_.size(); }
    std::size_t num_classes() const noexcept { return num_classes_; }
    const ImageIds& image_ids() const noexcept { return image_ids_; }
    std::span<const float> scores() const noexcept { return scores_; }
    std::span<const float> row(std::size_t r) const {
        return std::span<const float>(scores_).subspan(r * num_classes_, num_classes_);
    }
    std::optional<std::size_t> find_row(std::string_view image_id) const;

    friend bool operator==(const PredictionSet& a, const PredictionSet& b);

  private:
    RunIdentity identity_;
    ImageIds image_ids_;
    std::vector<float> scores_;
    std::size_t num_classes_ = 0;
    std::unordered_map<std::string, std::size_t> row_of_;
};

struct OverlapPartition {
    std::size_t num_runs = 0;
    ImageIds image_ids;             // sorted
    std::vector<std::int32_t> overlap;  // aligned with image_ids, each in 0..num_runs
    std::vector<std::size_t> group_sizes;  // num_runs + 1 entries

    std::size_t num_images() const noexcept { return image_ids.size(); }
    std::optional<std::int32_t> label(std::string_view image_id) const;
};

struct SubsetCorrectnessTable {
    std::vector<std::string> methods;
    // Indexed by bitmask; bit j set <=> methods[j] is correct.
    std::vector<std::uint64_t> counts;

    std::uint64_t count(std::uint32_t mask) const { return counts.at(mask); }
    std::uint64_t total() const;
};

enum class EnsembleRule { Vote, CpAvg };

std::string_view to_string(EnsembleRule rule);
EnsembleRule parse_rule(std::string_view text);

struct EnsembleResult {
    EnsembleRule rule = EnsembleRule::CpAvg;
    std::vector<std::string> member_run_ids;
    ImageIds image_ids;
    std::vector<ClassIndex> predictions;  // aligned with image_ids
    Rational accuracy;

    bool operator==(const EnsembleResult&) const = default;
};

struct LabelCorrectionTable {
    std::string source;
    std::map<std::string, std::string> corrections;  // image_id -> corrected class name
};

enum class ErrorClass {
    SimilarClassConfusion,
    NonTargetSubject,
    InadequateRepresentation,
    PoorQuality,
    Other,
};

inline constexpr std::size_t kNumErrorClasses = 5;
inline constexpr ErrorClass kAllErrorClasses[kNumErrorClasses] = {
    ErrorClass::SimilarClassConfusion, ErrorClass::NonTargetSubject, ErrorClass::InadequateRepresentation,
    ErrorClass::PoorQuality, ErrorClass::Other};

std::string_view to_string(ErrorClass c);
// Throws InvalidErrorClass for anything outside the closed enumeration.
ErrorClass parse_error_class(std::string_view text);

// Milliseconds since the Unix epoch, UTC.
struct UtcMillis {
    std::int64_t ms = 0;
    auto operator<=>(const UtcMillis&) const = default;

    static UtcMillis now();
};

// "2026-10-18T09:30:00.125Z"
std::string format_rfc3339(UtcMillis t);
// Accepts the fixed "YYYY-MM-DDTHH:MM:SS(.fff)?Z" form.
UtcMillis parse_rfc3339(std::string_view text);

struct ErrorAnnotation {
    std::string image_id;
    ErrorClass error_class = ErrorClass::Other;
    std::string annotator;
    UtcMillis timestamp;
    std::optional<std::string> note;

    bool operator==(const ErrorAnnotation&) const = default;
};

}  // namespace overlap_lab
