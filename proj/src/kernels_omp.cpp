// OpenMP kernels. Each image is handled independently with thread-local
// scratch, so results do not depend on the schedule.

#include <algorithm>
#include <cstdint>
#include <vector>

#include "overlap_lab/kernels.hpp"

namespace overlap_lab::kernels::parallel {

namespace {

using Index = std::int64_t;

// Fills scratch[k*C + c] with member k's softmax row for image i.
void member_rows(std::span<const RowSelection> members, std::size_t i, std::vector<double>& scratch) {
    const std::size_t num_classes = members[0].num_classes;
    for (std::size_t k = 0; k < members.size(); ++k) {
        softmax_row(members[k].row(i), std::span<double>(scratch).subspan(k * num_classes, num_classes));
    }
}

double mean_at(const std::vector<double>& scratch, std::size_t n, std::size_t num_classes, std::size_t c,
               std::vector<double>& column) {
    for (std::size_t k = 0; k < n; ++k) column[k] = scratch[k * num_classes + c];
    return sorted_sum(column) / static_cast<double>(n);
}

}  // namespace

void argmax_rows(const RowSelection& sel, std::span<ClassIndex> out) {
    const auto n = static_cast<Index>(sel.size());
#pragma omp parallel for schedule(static)
    for (Index i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = argmax(sel.row(static_cast<std::size_t>(i)));
}

void softmax_rows(std::span<const float> scores, std::size_t num_classes, std::span<double> out) {
    const auto rows = static_cast<Index>(scores.size() / num_classes);
#pragma omp parallel for schedule(static)
    for (Index r = 0; r < rows; ++r) {
        const auto off = static_cast<std::size_t>(r) * num_classes;
        softmax_row(scores.subspan(off, num_classes), out.subspan(off, num_classes));
    }
}

void overlap_counts(std::span<const std::vector<ClassIndex>> predictions, std::span<const ClassIndex> truth,
                    std::span<std::int32_t> out) {
    const auto n = static_cast<Index>(truth.size());
#pragma omp parallel for schedule(static)
    for (Index ii = 0; ii < n; ++ii) {
        const auto i = static_cast<std::size_t>(ii);
        std::int32_t hits = 0;
        for (const auto& run : predictions) hits += run[i] == truth[i] ? 1 : 0;
        out[i] = hits;
    }
}

void mask_histogram(std::span<const std::uint32_t> masks, std::span<std::uint64_t> counts) {
    std::fill(counts.begin(), counts.end(), 0);
    const auto n = static_cast<Index>(masks.size());
#pragma omp parallel
    {
        std::vector<std::uint64_t> local(counts.size(), 0);
#pragma omp for schedule(static) nowait
        for (Index i = 0; i < n; ++i) ++local[masks[static_cast<std::size_t>(i)]];
#pragma omp critical(overlap_lab_mask_histogram)
        for (std::size_t m = 0; m < counts.size(); ++m) counts[m] += local[m];
    }
}

void vote(std::span<const RowSelection> members, std::span<ClassIndex> out) {
    if (members.empty()) return;
    const std::size_t num_members = members.size();
    const std::size_t num_classes = members[0].num_classes;
    const auto n = static_cast<Index>(members[0].size());
#pragma omp parallel
    {
        std::vector<int> votes(num_classes);
        std::vector<double> scratch;
        std::vector<double> column(num_members);
#pragma omp for schedule(static)
        for (Index ii = 0; ii < n; ++ii) {
            const auto i = static_cast<std::size_t>(ii);
            std::fill(votes.begin(), votes.end(), 0);
            int top = 0;
            for (const auto& m : members) {
                const int v = ++votes[static_cast<std::size_t>(argmax(m.row(i)))];
                top = std::max(top, v);
            }
            ClassIndex first = -1;
            bool tie = false;
            for (std::size_t c = 0; c < num_classes; ++c) {
                if (votes[c] != top) continue;
                if (first < 0) {
                    first = static_cast<ClassIndex>(c);
                } else {
                    tie = true;
                    break;
                }
            }
            if (!tie) {
                out[i] = first;
                continue;
            }
            scratch.resize(num_members * num_classes);
            member_rows(members, i, scratch);
            ClassIndex best = -1;
            double best_mean = -1.0;
            for (std::size_t c = static_cast<std::size_t>(first); c < num_classes; ++c) {
                if (votes[c] != top) continue;
                const double mean = mean_at(scratch, num_members, num_classes, c, column);
                if (best < 0 || mean > best_mean) {
                    best = static_cast<ClassIndex>(c);
                    best_mean = mean;
                }
            }
            out[i] = best;
        }
    }
}

void cp_avg(std::span<const RowSelection> members, std::span<ClassIndex> out) {
    if (members.empty()) return;
    const std::size_t num_members = members.size();
    const std::size_t num_classes = members[0].num_classes;
    const auto n = static_cast<Index>(members[0].size());
#pragma omp parallel
    {
        std::vector<double> scratch(num_members * num_classes);
        std::vector<double> column(num_members);
        std::vector<double> mean(num_classes);
#pragma omp for schedule(static)
        for (Index ii = 0; ii < n; ++ii) {
            const auto i = static_cast<std::size_t>(ii);
            member_rows(members, i, scratch);
            for (std::size_t c = 0; c < num_classes; ++c) mean[c] = mean_at(scratch, num_members, num_classes, c, column);
            out[i] = argmax(std::span<const double>(mean));
        }
    }
}

}  // namespace overlap_lab::kernels::parallel
