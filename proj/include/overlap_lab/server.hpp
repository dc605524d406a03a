#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "overlap_lab/io.hpp"
#include "overlap_lab/report.hpp"
#include "overlap_lab/types.hpp"

namespace httplib {
class Server;
}

namespace overlap_lab {

inline constexpr int kDefaultPort = 8710;

struct TriageConfig {
    DatasetManifest manifest;
    OverlapPartition partition;
    std::vector<PredictionSet> runs;
    std::filesystem::path images_root;
    std::filesystem::path annotations_path;
    std::optional<std::filesystem::path> assets_dir;
};

struct TopPrediction {
    ClassIndex index = 0;
    double prob = 0.0;
};

struct MemberView {
    std::string method_id;
    std::string model_id;
    std::vector<TopPrediction> top3;
};

// Read-only analysis snapshot of one image for the triage queue.
struct TriageItem {
    std::string image_id;
    ClassIndex truth = 0;
    std::int32_t overlap = 0;
    std::vector<MemberView> members;
};

// Hard-image triage API. Reads are served from immutable snapshots; the only
// mutation is POST /api/annotation, funneled through the journal.
class TriageServer {
  public:
    // Throws MissingImagesRoot when images_root is not a directory.
    explicit TriageServer(TriageConfig config);
    ~TriageServer();

    TriageServer(const TriageServer&) = delete;
    TriageServer& operator=(const TriageServer&) = delete;

    // Returns the bound port (port 0 picks a free one). Throws PortInUse.
    int bind(const std::string& host, int port);
    // Blocks until stop().
    void listen();
    void stop();
    bool running() const;

    // Route bodies, exposed for in-process use.
    nlohmann::json manifest_summary() const;
    // group: "hard" or "overlap-k". Throws InvalidArgument otherwise.
    nlohmann::json queue(const std::string& group) const;
    nlohmann::json annotations() const;
    nlohmann::json prevalence_report() const;
    // Validates, stamps UTC now, appends durably, then returns the stored record.
    ErrorAnnotation submit(const nlohmann::json& body);

  private:
    void install_routes();
    nlohmann::json item_json(const TriageItem& item, const std::map<std::string, ErrorAnnotation>& resolved) const;

    TriageConfig config_;
    std::vector<TriageItem> items_;  // sorted by image_id
    ImageIds hard_;
    AnnotationJournal journal_;

    mutable std::mutex state_mutex_;
    std::vector<ErrorAnnotation> entries_;
    std::map<std::string, ErrorAnnotation> resolved_;

    std::unique_ptr<httplib::Server> http_;
};

// Top-k classes of a softmax row by descending probability, ties to the lower index.
std::vector<TopPrediction> top_k(std::span<const double> probs, std::size_t k);

}  // namespace overlap_lab
