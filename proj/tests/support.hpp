#pragma once

// Fixture builders and brute-force oracles shared by the test binaries.
// Oracles here deliberately avoid the library's kernels.

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "overlap_lab/types.hpp"

namespace testing {

using namespace overlap_lab;
namespace fs = std::filesystem;

class TempDir {
  public:
    TempDir() {
        std::string pattern = (fs::temp_directory_path() / "overlap_lab_test_XXXXXX").string();
        path_ = ::mkdtemp(pattern.data());
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const fs::path& path() const { return path_; }
    fs::path operator/(const std::string& name) const { return path_ / name; }

  private:
    fs::path path_;
};

inline std::string image_name(std::size_t i) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "img%05zu", i);
    return buf;
}

inline std::vector<std::string> class_names(std::size_t c) {
    std::vector<std::string> names;
    for (std::size_t i = 0; i < c; ++i) names.push_back("class_" + std::to_string(i));
    return names;
}

inline DatasetManifest make_manifest(const std::vector<ClassIndex>& truth, std::size_t num_classes,
                                     std::string dataset_id = "synthetic") {
    std::vector<ImageRecord> records;
    for (std::size_t i = 0; i < truth.size(); ++i) records.push_back({image_name(i), truth[i], Split::Test, std::nullopt});
    return DatasetManifest(std::move(dataset_id), ClassVocabulary(class_names(num_classes)), std::move(records));
}

inline DatasetManifest random_manifest(std::mt19937_64& rng, std::size_t m, std::size_t c,
                                       std::string dataset_id = "synthetic") {
    std::uniform_int_distribution<ClassIndex> pick(0, static_cast<ClassIndex>(c - 1));
    std::vector<ClassIndex> truth(m);
    for (auto& t : truth) t = pick(rng);
    return make_manifest(truth, c, std::move(dataset_id));
}

// Dyadic scores (multiples of 1/64 in [-4, 4]) so integer shifts are exact.
inline std::vector<float> random_scores(std::mt19937_64& rng, std::size_t m, std::size_t c) {
    std::uniform_int_distribution<int> q(-256, 256);
    std::vector<float> s(m * c);
    for (auto& v : s) v = static_cast<float>(q(rng)) / 64.0f;
    return s;
}

inline PredictionSet make_run(const DatasetManifest& manifest, std::vector<float> scores, std::string model_id,
                              std::string method_id = "", std::uint32_t replicate = 0) {
    ImageIds ids;
    for (const auto& r : manifest.records()) ids.push_back(r.image_id);
    if (method_id.empty()) method_id = model_id;
    return PredictionSet({std::move(model_id), std::move(method_id), replicate, manifest.dataset_id()}, std::move(ids),
                         std::move(scores), manifest.num_classes());
}

// Random run whose top-1 is forced to `wanted[i]` (unique max, margin 1).
inline PredictionSet run_with_predictions(std::mt19937_64& rng, const DatasetManifest& manifest,
                                          const std::vector<ClassIndex>& wanted, std::string model_id,
                                          std::string method_id = "", std::uint32_t replicate = 0) {
    const std::size_t c = manifest.num_classes();
    auto scores = random_scores(rng, wanted.size(), c);
    for (std::size_t i = 0; i < wanted.size(); ++i) {
        float peak = scores[i * c];
        for (std::size_t k = 0; k < c; ++k) peak = std::max(peak, scores[i * c + k]);
        scores[i * c + static_cast<std::size_t>(wanted[i])] = peak + 1.0f;
    }
    return make_run(manifest, std::move(scores), std::move(model_id), std::move(method_id), replicate);
}

// Predictions correct with probability p, otherwise a uniformly random wrong class.
inline std::vector<ClassIndex> noisy_predictions(std::mt19937_64& rng, const DatasetManifest& manifest, double p) {
    std::bernoulli_distribution hit(p);
    std::uniform_int_distribution<ClassIndex> shift(1, static_cast<ClassIndex>(manifest.num_classes() - 1));
    std::vector<ClassIndex> out;
    for (const auto& r : manifest.records()) {
        out.push_back(hit(rng) ? r.label_index
                               : static_cast<ClassIndex>((r.label_index + shift(rng)) %
                                                         static_cast<ClassIndex>(manifest.num_classes())));
    }
    return out;
}

inline ImageIds all_ids(const DatasetManifest& manifest) {
    ImageIds ids;
    for (const auto& r : manifest.records()) ids.push_back(r.image_id);
    std::sort(ids.begin(), ids.end());
    return ids;
}

namespace oracle {

// First index of the maximum, by explicit scan over the run's row for `id`.
inline ClassIndex top1(const PredictionSet& ps, const std::string& id) {
    std::size_t row = 0;
    while (ps.image_ids()[row] != id) ++row;
    const auto scores = ps.scores();
    const std::size_t c = ps.num_classes();
    ClassIndex best = 0;
    for (std::size_t k = 0; k < c; ++k) {
        if (scores[row * c + k] > scores[row * c + static_cast<std::size_t>(best)]) best = static_cast<ClassIndex>(k);
    }
    return best;
}

inline std::map<std::string, int> overlap(const DatasetManifest& m, const std::vector<PredictionSet>& runs,
                                          const ImageIds& images) {
    std::map<std::string, int> out;
    for (const auto& id : images) {
        int hits = 0;
        for (const auto& r : runs) hits += top1(r, id) == m.at(id).label_index ? 1 : 0;
        out[id] = hits;
    }
    return out;
}

inline std::set<std::string> correct(const DatasetManifest& m, const PredictionSet& run, const ImageIds& images) {
    std::set<std::string> out;
    for (const auto& id : images) {
        if (top1(run, id) == m.at(id).label_index) out.insert(id);
    }
    return out;
}

// Keyed by the set of method names that got the image right.
inline std::map<std::set<std::string>, std::uint64_t> subset_counts(
    const std::vector<std::pair<std::string, std::set<std::string>>>& correct_sets, const ImageIds& universe) {
    std::map<std::set<std::string>, std::uint64_t> out;
    for (const auto& id : universe) {
        std::set<std::string> who;
        for (const auto& [method, set] : correct_sets) {
            if (set.contains(id)) who.insert(method);
        }
        ++out[who];
    }
    return out;
}

inline std::vector<long double> softmax(const PredictionSet& ps, const std::string& id) {
    std::size_t row = 0;
    while (ps.image_ids()[row] != id) ++row;
    const std::size_t c = ps.num_classes();
    std::vector<long double> p(c);
    long double peak = -INFINITY;
    for (std::size_t k = 0; k < c; ++k) peak = std::max<long double>(peak, ps.scores()[row * c + k]);
    long double total = 0;
    for (std::size_t k = 0; k < c; ++k) total += p[k] = std::exp(static_cast<long double>(ps.scores()[row * c + k]) - peak);
    for (auto& v : p) v /= total;
    return p;
}

inline ClassIndex cp_avg(const std::vector<const PredictionSet*>& members, const std::string& id) {
    std::vector<long double> mean;
    for (const auto* m : members) {
        const auto p = softmax(*m, id);
        if (mean.empty()) mean.assign(p.size(), 0);
        for (std::size_t k = 0; k < p.size(); ++k) mean[k] += p[k];
    }
    ClassIndex best = 0;
    for (std::size_t k = 0; k < mean.size(); ++k) {
        if (mean[k] > mean[static_cast<std::size_t>(best)]) best = static_cast<ClassIndex>(k);
    }
    return best;
}

inline ClassIndex vote(const std::vector<const PredictionSet*>& members, const std::string& id) {
    std::map<ClassIndex, int> votes;
    for (const auto* m : members) ++votes[top1(*m, id)];
    int top = 0;
    for (const auto& [c, v] : votes) top = std::max(top, v);
    std::vector<ClassIndex> tied;
    for (const auto& [c, v] : votes) {
        if (v == top) tied.push_back(c);
    }
    if (tied.size() == 1) return tied[0];
    std::vector<long double> mean;
    for (const auto* m : members) {
        const auto p = softmax(*m, id);
        if (mean.empty()) mean.assign(p.size(), 0);
        for (std::size_t k = 0; k < p.size(); ++k) mean[k] += p[k];
    }
    ClassIndex best = tied[0];
    for (ClassIndex c : tied) {
        if (mean[static_cast<std::size_t>(c)] > mean[static_cast<std::size_t>(best)]) best = c;
    }
    return best;
}

}  // namespace oracle

}  // namespace testing
