#include <atomic>
#include <cstdlib>
#include <string>

#include "agentkit/simd/similarity_kernels.hpp"

namespace agentkit::simd {

std::string_view to_string(Isa isa) noexcept {
    switch (isa) {
        case Isa::scalar: return "scalar";
        case Isa::avx2: return "avx2";
        case Isa::neon: return "neon";
    }
    return "?";
}

namespace {

bool cpu_supports(Isa isa) noexcept {
    switch (isa) {
        case Isa::scalar: return true;
        case Isa::avx2:
#if defined(AGENTKIT_HAVE_AVX2_KERNELS)
            return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
            return false;
#endif
        case Isa::neon:
#if defined(__aarch64__)
            return true;
#else
            return false;
#endif
    }
    return false;
}

Isa detect() noexcept {
    if (const char* forced = std::getenv("AGENTKIT_SIMD")) {
        const std::string_view want(forced);
        for (Isa isa : {Isa::scalar, Isa::avx2, Isa::neon}) {
            if (want == to_string(isa) && cpu_supports(isa)) return isa;
        }
    }
    if (cpu_supports(Isa::avx2)) return Isa::avx2;
    if (cpu_supports(Isa::neon)) return Isa::neon;
    return Isa::scalar;
}

std::atomic<Isa>& active() noexcept {
    static std::atomic<Isa> isa{detect()};
    return isa;
}

}  // namespace

std::vector<Isa> available_isas() {
    std::vector<Isa> out;
    for (Isa isa : {Isa::scalar, Isa::avx2, Isa::neon}) {
        if (cpu_supports(isa)) out.push_back(isa);
    }
    return out;
}

Isa active_isa() noexcept { return active().load(std::memory_order_relaxed); }

void set_active_isa(Isa isa) noexcept {
    if (cpu_supports(isa)) active().store(isa, std::memory_order_relaxed);
}

double dot_with(Isa isa, std::span<const double> a, std::span<const double> b) noexcept {
    switch (isa) {
#if defined(AGENTKIT_HAVE_AVX2_KERNELS)
        case Isa::avx2: return dot_avx2(a, b);
#endif
#if defined(__aarch64__)
        case Isa::neon: return dot_neon(a, b);
#endif
        default: return dot_scalar(a, b);
    }
}

void dot_rows_with(Isa isa, std::span<const double> query, std::span<const double> rows, std::span<double> out) noexcept {
    switch (isa) {
#if defined(AGENTKIT_HAVE_AVX2_KERNELS)
        case Isa::avx2: dot_rows_avx2(query, rows, out); return;
#endif
#if defined(__aarch64__)
        case Isa::neon: dot_rows_neon(query, rows, out); return;
#endif
        default: dot_rows_scalar(query, rows, out); return;
    }
}

double dot(std::span<const double> a, std::span<const double> b) noexcept { return dot_with(active_isa(), a, b); }

void dot_rows(std::span<const double> query, std::span<const double> rows, std::span<double> out) noexcept {
    dot_rows_with(active_isa(), query, rows, out);
}

}  // namespace agentkit::simd
