#include <algorithm>
#include <cmath>

#include "overlap_lab/kernels.hpp"

namespace overlap_lab::kernels {

void softmax_row(std::span<const float> logits, std::span<double> out) {
    double peak = logits[0];
    for (float z : logits) peak = std::max(peak, static_cast<double>(z));
    double total = 0.0;
    for (std::size_t c = 0; c < logits.size(); ++c) {
        out[c] = std::exp(static_cast<double>(logits[c]) - peak);
        total += out[c];
    }
    for (std::size_t c = 0; c < logits.size(); ++c) out[c] /= total;
}

double sorted_sum(std::span<double> values) {
    std::sort(values.begin(), values.end());
    double sum = 0.0;
    for (double v : values) sum += v;
    return sum;
}

}  // namespace overlap_lab::kernels
