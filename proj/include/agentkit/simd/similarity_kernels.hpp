#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

// Dot-product kernels behind cosine similarity. The scalar kernel is the
// reference; vector variants must agree with it to rounding (they reassociate
// the sum). The active kernel is picked once at startup from the CPU's features
// and can be pinned with AGENTKIT_SIMD=scalar|avx2|neon.
namespace agentkit::simd {

enum class Isa { scalar, avx2, neon };

std::string_view to_string(Isa isa) noexcept;

double dot_scalar(std::span<const double> a, std::span<const double> b) noexcept;
void dot_rows_scalar(std::span<const double> query, std::span<const double> rows, std::span<double> out) noexcept;

#if defined(AGENTKIT_HAVE_AVX2_KERNELS)
double dot_avx2(std::span<const double> a, std::span<const double> b) noexcept;
void dot_rows_avx2(std::span<const double> query, std::span<const double> rows, std::span<double> out) noexcept;
#endif

#if defined(__aarch64__)
double dot_neon(std::span<const double> a, std::span<const double> b) noexcept;
void dot_rows_neon(std::span<const double> query, std::span<const double> rows, std::span<double> out) noexcept;
#endif

// Kernels compiled in and supported by this CPU, scalar first.
std::vector<Isa> available_isas();
Isa active_isa() noexcept;
// Test hook; ignored when `isa` is not available.
void set_active_isa(Isa isa) noexcept;

// Dispatched entry points. Lengths must match (checked by callers).
double dot(std::span<const double> a, std::span<const double> b) noexcept;
// `rows` holds out.size() row vectors of length query.size(), back to back.
void dot_rows(std::span<const double> query, std::span<const double> rows, std::span<double> out) noexcept;

double dot_with(Isa isa, std::span<const double> a, std::span<const double> b) noexcept;
void dot_rows_with(Isa isa, std::span<const double> query, std::span<const double> rows, std::span<double> out) noexcept;

}  // namespace agentkit::simd
