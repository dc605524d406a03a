#pragma once

#include <filesystem>
#include <mutex>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "overlap_lab/types.hpp"

namespace overlap_lab {

namespace fs = std::filesystem;
using nlohmann::json;

inline constexpr int kFormatVersion = 1;

// manifest.json
DatasetManifest load_manifest(const fs::path& path);
DatasetManifest manifest_from_json(const json& j);
json manifest_to_json(const DatasetManifest& manifest);
void write_manifest(const DatasetManifest& manifest, const fs::path& path);

// Prediction-set directory: meta.json, ids.txt, scores.bin (f32le, row-major).
PredictionSet load_prediction_set(const fs::path& dir, const DatasetManifest& manifest);
// Loads without checking ids against a manifest.
PredictionSet load_prediction_set(const fs::path& dir);
void write_prediction_set(const PredictionSet& ps, const fs::path& dir);

// corrections.json
LabelCorrectionTable load_corrections(const fs::path& path);
LabelCorrectionTable corrections_from_json(const json& j);

// annotations.jsonl
json annotation_to_json(const ErrorAnnotation& a);
ErrorAnnotation annotation_from_json(const json& j);
// Appends exactly one line and fsyncs before returning.
void append_annotation(const fs::path& log, const ErrorAnnotation& a);
// Missing file reads as empty. An unterminated final line is discarded.
std::vector<ErrorAnnotation> read_annotations(const fs::path& log);

// Single-writer wrapper: appends from any thread are serialized.
class AnnotationJournal {
  public:
    explicit AnnotationJournal(fs::path path) : path_(std::move(path)) {}

    const fs::path& path() const noexcept { return path_; }
    void append(const ErrorAnnotation& a);
    std::vector<ErrorAnnotation> read() const;

  private:
    fs::path path_;
    mutable std::mutex mutex_;
};

// Analysis results as JSON (CLI outputs and report sections).
json to_json(const OverlapPartition& p);
OverlapPartition partition_from_json(const json& j);
json to_json(const SubsetCorrectnessTable& t);
json to_json(const EnsembleResult& r);
json to_json(const Rational& r);
Rational rational_from_json(const json& j);

json parse_json_file(const fs::path& path);
// Writes `content` to `path`, replacing it. Throws IoFailure.
void write_file(const fs::path& path, std::string_view content);
std::string read_file(const fs::path& path);

}  // namespace overlap_lab
