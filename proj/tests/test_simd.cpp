#include <gtest/gtest.h>

#include "support.hpp"

using namespace agentkit;

namespace {

std::vector<double> random_vec(std::mt19937_64& rng, std::size_t n) {
    std::normal_distribution<double> d(0.0, 1.0);
    std::vector<double> v(n);
    for (auto& x : v) x = d(rng);
    return v;
}

// Pairwise sums in long double: an independent reference with little rounding.
long double reference_dot(const std::vector<double>& a, const std::vector<double>& b) {
    long double s = 0.0L;
    for (std::size_t i = 0; i < a.size(); ++i) s += static_cast<long double>(a[i]) * b[i];
    return s;
}

}  // namespace

TEST(Simd, ScalarIsAlwaysAvailableAndFirst) {
    const auto isas = simd::available_isas();
    ASSERT_FALSE(isas.empty());
    EXPECT_EQ(isas.front(), simd::Isa::scalar);
}

TEST(Simd, EveryKernelMatchesReferenceAcrossLengths) {
    std::mt19937_64 rng(11);
    for (auto isa : simd::available_isas()) {
        for (std::size_t n : {0, 1, 2, 3, 4, 5, 7, 8, 9, 15, 16, 17, 31, 64, 100, 1023, 1024, 1025}) {
            const auto a = random_vec(rng, n), b = random_vec(rng, n);
            long double mag = 0.0L;
            for (std::size_t i = 0; i < n; ++i) mag += std::abs(static_cast<long double>(a[i]) * b[i]);
            const double got = simd::dot_with(isa, a, b);
            EXPECT_NEAR(got, static_cast<double>(reference_dot(a, b)), 1e-13 * static_cast<double>(mag) + 1e-300)
                << simd::to_string(isa) << " n=" << n;
        }
    }
}

TEST(Simd, VectorKernelsAgreeWithScalarOnRows) {
    std::mt19937_64 rng(12);
    const std::size_t dim = 1024, rows = 37;
    const auto q = random_vec(rng, dim);
    const auto m = random_vec(rng, dim * rows);
    std::vector<double> want(rows), got(rows);
    simd::dot_rows_scalar(q, m, want);
    for (auto isa : simd::available_isas()) {
        simd::dot_rows_with(isa, q, m, got);
        for (std::size_t r = 0; r < rows; ++r) EXPECT_NEAR(got[r], want[r], 1e-11) << simd::to_string(isa);
    }
}

TEST(Simd, PinningSelectsKernelAndIgnoresUnavailable) {
    const auto before = simd::active_isa();
    simd::set_active_isa(simd::Isa::scalar);
    EXPECT_EQ(simd::active_isa(), simd::Isa::scalar);
    const auto isas = simd::available_isas();
    const simd::Isa missing =
        std::find(isas.begin(), isas.end(), simd::Isa::neon) == isas.end() ? simd::Isa::neon : simd::Isa::avx2;
    if (std::find(isas.begin(), isas.end(), missing) == isas.end()) {
        simd::set_active_isa(missing);
        EXPECT_EQ(simd::active_isa(), simd::Isa::scalar);
    }
    simd::set_active_isa(before);
}

TEST(Simd, RetrievalRankingIndependentOfKernel) {
    std::vector<ToolSchema> tools;
    for (int i = 0; i < 40; ++i)
        tools.push_back(agentkit::testing::simple_tool("tool_" + std::to_string(i), "searches records number " + std::to_string(i)));
    const ToolIndex index(tools, std::make_shared<HashingEmbedder>());
    const auto before = simd::active_isa();
    std::vector<std::vector<std::string>> names;
    for (auto isa : simd::available_isas()) {
        simd::set_active_isa(isa);
        std::vector<std::string> n;
        for (const auto& r : index.rank("records number 7 searches", RetrievalConfig{})) n.push_back(r.tool_name);
        names.push_back(n);
    }
    simd::set_active_isa(before);
    for (const auto& n : names) EXPECT_EQ(n, names.front());
}
