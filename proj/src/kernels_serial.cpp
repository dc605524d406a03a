// Reference kernels: plain loops, whole-matrix intermediates. Kept for
// testing the parallel versions and as the benchmark baseline.

#include <vector>

#include "overlap_lab/kernels.hpp"

namespace overlap_lab::kernels::serial {

namespace {

// Softmax of every selected row of every member: probs[k][i*C + c].
std::vector<std::vector<double>> member_probabilities(std::span<const RowSelection> members) {
    std::vector<std::vector<double>> probs(members.size());
    for (std::size_t k = 0; k < members.size(); ++k) {
        const auto& m = members[k];
        probs[k].resize(m.size() * m.num_classes);
        for (std::size_t i = 0; i < m.size(); ++i) {
            softmax_row(m.row(i), std::span<double>(probs[k]).subspan(i * m.num_classes, m.num_classes));
        }
    }
    return probs;
}

double mean_probability(const std::vector<std::vector<double>>& probs, std::size_t i, std::size_t c,
                        std::size_t num_classes) {
    std::vector<double> column(probs.size());
    for (std::size_t k = 0; k < probs.size(); ++k) column[k] = probs[k][i * num_classes + c];
    return sorted_sum(column) / static_cast<double>(probs.size());
}

}  // namespace

void argmax_rows(const RowSelection& sel, std::span<ClassIndex> out) {
    for (std::size_t i = 0; i < sel.size(); ++i) out[i] = argmax(sel.row(i));
}

void softmax_rows(std::span<const float> scores, std::size_t num_classes, std::span<double> out) {
    const std::size_t rows = scores.size() / num_classes;
    for (std::size_t r = 0; r < rows; ++r) {
        softmax_row(scores.subspan(r * num_classes, num_classes), out.subspan(r * num_classes, num_classes));
    }
}

void overlap_counts(std::span<const std::vector<ClassIndex>> predictions, std::span<const ClassIndex> truth,
                    std::span<std::int32_t> out) {
    for (std::size_t i = 0; i < truth.size(); ++i) {
        std::int32_t hits = 0;
        for (const auto& run : predictions) hits += run[i] == truth[i] ? 1 : 0;
        out[i] = hits;
    }
}

void mask_histogram(std::span<const std::uint32_t> masks, std::span<std::uint64_t> counts) {
    std::fill(counts.begin(), counts.end(), 0);
    for (auto m : masks) ++counts[m];
}

void vote(std::span<const RowSelection> members, std::span<ClassIndex> out) {
    if (members.empty()) return;
    const std::size_t num_images = members[0].size();
    const std::size_t num_classes = members[0].num_classes;
    const auto probs = member_probabilities(members);

    std::vector<int> votes(num_classes);
    for (std::size_t i = 0; i < num_images; ++i) {
        std::fill(votes.begin(), votes.end(), 0);
        for (const auto& m : members) ++votes[static_cast<std::size_t>(argmax(m.row(i)))];
        const int top = *std::max_element(votes.begin(), votes.end());

        ClassIndex best = -1;
        double best_mean = -1.0;
        int tied = 0;
        for (std::size_t c = 0; c < num_classes; ++c) tied += votes[c] == top ? 1 : 0;
        for (std::size_t c = 0; c < num_classes; ++c) {
            if (votes[c] != top) continue;
            if (tied == 1) {
                best = static_cast<ClassIndex>(c);
                break;
            }
            const double mean = mean_probability(probs, i, c, num_classes);
            if (best < 0 || mean > best_mean) {
                best = static_cast<ClassIndex>(c);
                best_mean = mean;
            }
        }
        out[i] = best;
    }
}

void cp_avg(std::span<const RowSelection> members, std::span<ClassIndex> out) {
    if (members.empty()) return;
    const std::size_t num_images = members[0].size();
    const std::size_t num_classes = members[0].num_classes;
    const auto probs = member_probabilities(members);

    std::vector<double> mean(num_classes);
    for (std::size_t i = 0; i < num_images; ++i) {
        for (std::size_t c = 0; c < num_classes; ++c) mean[c] = mean_probability(probs, i, c, num_classes);
        out[i] = argmax(std::span<const double>(mean));
    }
}

}  // namespace overlap_lab::kernels::serial
