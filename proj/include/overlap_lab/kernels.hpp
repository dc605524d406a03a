#pragma once

// Per-image compute kernels. `serial` is the straightforward reference;
// `parallel` is the OpenMP version the library uses. Both must produce
// bit-identical outputs for identical inputs.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "overlap_lab/types.hpp"

namespace overlap_lab::kernels {

// A run's score matrix restricted to an ordered list of rows.
struct RowSelection {
    std::span<const float> scores;
    std::size_t num_classes = 0;
    std::span<const std::size_t> rows;

    std::span<const float> row(std::size_t i) const { return scores.subspan(rows[i] * num_classes, num_classes); }
    std::size_t size() const noexcept { return rows.size(); }
};

// Index of the first maximal element.
inline ClassIndex argmax(std::span<const float> row) {
    std::size_t best = 0;
    for (std::size_t c = 1; c < row.size(); ++c) {
        if (row[c] > row[best]) best = c;
    }
    return static_cast<ClassIndex>(best);
}

inline ClassIndex argmax(std::span<const double> row) {
    std::size_t best = 0;
    for (std::size_t c = 1; c < row.size(); ++c) {
        if (row[c] > row[best]) best = c;
    }
    return static_cast<ClassIndex>(best);
}

// Max-shifted softmax evaluated in double.
void softmax_row(std::span<const float> logits, std::span<double> out);

// Sum of `values` accumulated in ascending order (order-independent result).
double sorted_sum(std::span<double> values);

namespace serial {

void argmax_rows(const RowSelection& sel, std::span<ClassIndex> out);
void softmax_rows(std::span<const float> scores, std::size_t num_classes, std::span<double> out);
// out[i] = #runs whose prediction for image i equals truth[i].
void overlap_counts(std::span<const std::vector<ClassIndex>> predictions, std::span<const ClassIndex> truth,
                    std::span<std::int32_t> out);
// counts[m] = #images whose mask equals m; counts.size() is 2^k.
void mask_histogram(std::span<const std::uint32_t> masks, std::span<std::uint64_t> counts);
void vote(std::span<const RowSelection> members, std::span<ClassIndex> out);
void cp_avg(std::span<const RowSelection> members, std::span<ClassIndex> out);

}  // namespace serial

namespace parallel {

void argmax_rows(const RowSelection& sel, std::span<ClassIndex> out);
void softmax_rows(std::span<const float> scores, std::size_t num_classes, std::span<double> out);
void overlap_counts(std::span<const std::vector<ClassIndex>> predictions, std::span<const ClassIndex> truth,
                    std::span<std::int32_t> out);
void mask_histogram(std::span<const std::uint32_t> masks, std::span<std::uint64_t> counts);
void vote(std::span<const RowSelection> members, std::span<ClassIndex> out);
void cp_avg(std::span<const RowSelection> members, std::span<ClassIndex> out);

}  // namespace parallel

}  // namespace overlap_lab::kernels
