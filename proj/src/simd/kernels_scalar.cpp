#include "agentkit/simd/similarity_kernels.hpp"

namespace agentkit::simd {

double dot_scalar(std::span<const double> a, std::span<const double> b) noexcept {
    double sum = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) sum += a[i] * b[i];
    return sum;
}

void dot_rows_scalar(std::span<const double> query, std::span<const double> rows, std::span<double> out) noexcept {
    const std::size_t dim = query.size();
    for (std::size_t r = 0; r < out.size(); ++r) out[r] = dot_scalar(query, rows.subspan(r * dim, dim));
}

}  // namespace agentkit::simd
