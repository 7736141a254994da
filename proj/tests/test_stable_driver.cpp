#include "anisolab/nonlocal_operator.hpp"
#include "anisolab/stable_driver.hpp"

#include <gsl/gsl_errno.h>
#include <gsl/gsl_integration.h>
#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

using namespace anisolab;

namespace {

constexpr double pi = std::numbers::pi;

// Independent route to the symbol: integral over R of (1 - cos(xi h)) |h|^(-1-gamma) dh,
// split at h = 1 into a QAGS piece and an analytic-minus-QAWF Fourier tail.
double symbol_integral_gsl(double gamma, double xi) {
    struct Params {
        double gamma, xi;
    } p{gamma, xi};
    gsl_set_error_handler_off();
    gsl_integration_workspace* w = gsl_integration_workspace_alloc(2000);
    gsl_integration_workspace* cw = gsl_integration_workspace_alloc(2000);
    gsl_integration_qawo_table* table = gsl_integration_qawo_table_alloc(xi, 1.0, GSL_INTEG_COSINE, 100);

    gsl_function near;
    near.function = [](double h, void* v) {
        const auto* q = static_cast<Params*>(v);
        // 1 - cos(x) = 2 sin^2(x/2) avoids cancellation near 0
        const double s = std::sin(0.5 * q->xi * h);
        return 2.0 * s * s * std::pow(h, -1.0 - q->gamma);
    };
    near.params = &p;
    double head = 0, head_err = 0;
    const int head_status = gsl_integration_qags(&near, 0.0, 1.0, 1e-12, 1e-12, 2000, w, &head, &head_err);

    gsl_function tail;
    tail.function = [](double h, void* v) { return std::pow(h, -1.0 - static_cast<Params*>(v)->gamma); };
    tail.params = &p;
    double oscill = 0, oscill_err = 0;
    const int tail_status = gsl_integration_qawf(&tail, 1.0, 1e-10, 2000, w, cw, table, &oscill, &oscill_err);

    gsl_integration_qawo_table_free(table);
    gsl_integration_workspace_free(cw);
    gsl_integration_workspace_free(w);
    EXPECT_EQ(head_status, GSL_SUCCESS);
    EXPECT_EQ(tail_status, GSL_SUCCESS);
    return 2.0 * (head + 1.0 / gamma - oscill);
}

std::vector<double> sorted_draws(double gamma, double dt, std::uint64_t seed, std::size_t n) {
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        Stream rng(seed, i);
        out[i] = sample_stable_increment(gamma, dt, rng);
    }
    std::sort(out.begin(), out.end());
    return out;
}

double quantile(const std::vector<double>& sorted, double p) {
    return sorted[static_cast<std::size_t>(p * static_cast<double>(sorted.size() - 1))];
}

// Two-sample Kolmogorov-Smirnov statistic of sorted samples.
double ks_statistic(const std::vector<double>& a, const std::vector<double>& b) {
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < a.size() && j < b.size()) {
        const double x = std::min(a[i], b[j]);
        while (i < a.size() && a[i] <= x) ++i;
        while (j < b.size() && b[j] <= x) ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / a.size() - static_cast<double>(j) / b.size()));
    }
    return d;
}

} // namespace

TEST(GammaFunction, MatchesStdTgamma) {
    for (double x : {0.1, 0.25, 0.5, 0.75, 1.0, 1.25, 1.5, 2.0, 2.5, 3.7, 7.25, 12.0, 20.5}) {
        EXPECT_NEAR(gamma_function(x) / std::tgamma(x), 1.0, 1e-13) << x;
    }
    for (double x : {-0.15, -0.25, -0.5, -0.95, -1.5}) {
        EXPECT_NEAR(gamma_function(x) / std::tgamma(x), 1.0, 1e-12) << x;
    }
}

TEST(LevyConstant, CauchyIsOneOverPi) { EXPECT_NEAR(levy_constant(1.0), 1.0 / pi, 1e-14); }

TEST(LevyConstant, FrozenOracleValues) {
    // Gamma(1+g) sin(pi g / 2) / pi, evaluated once and confirmed by the quadrature oracle below.
    const std::vector<std::pair<double, double>> frozen = {{0.3, 0.12969318904286148},
                                                           {0.5, 0.19947114020071632},
                                                           {1.0, 0.3183098861837907},
                                                           {1.5, 0.2992067103010746},
                                                           {1.9, 0.09099248247519454}};
    for (const auto& [gamma, c] : frozen) EXPECT_NEAR(levy_constant(gamma) / c, 1.0, 1e-10) << gamma;
}

TEST(LevyConstant, MatchesReflectionFormOverTheRange) {
    for (double g = 0.01; g < 1.995; g += 0.01) {
        const double closed = std::tgamma(1.0 + g) * std::sin(0.5 * pi * g) / pi;
        ASSERT_NEAR(levy_constant(g) / closed, 1.0, 1e-10) << g;
    }
}

TEST(LevyConstant, SymbolIdentityAgainstGslQuadrature) {
    for (double gamma : {0.3, 0.5, 1.0, 1.5, 1.9}) {
        for (double xi : {0.5, 1.0, 2.0}) {
            const double integral = symbol_integral_gsl(gamma, xi);
            EXPECT_NEAR(levy_constant(gamma) * integral / std::pow(xi, gamma), 1.0, 1e-6)
                << "gamma=" << gamma << " xi=" << xi;
        }
    }
}

TEST(LevyConstant, SymbolIdentityAgainstLibraryQuadrature) {
    for (double gamma : {0.3, 0.5, 1.0, 1.5, 1.9})
        for (double xi : {0.5, 1.0, 2.0})
            EXPECT_NEAR(levy_symbol_quadrature(gamma, xi) / std::pow(xi, gamma), 1.0, 1e-6)
                << "gamma=" << gamma << " xi=" << xi;
}

TEST(LevyConstant, RejectsIndicesOutsideTheOpenInterval) {
    for (double g : {0.0, 2.0, -0.5, 2.5, std::nan("")}) EXPECT_THROW((void)levy_constant(g), std::domain_error);
}

TEST(LevyConstant, TailMassOfCauchy) {
    EXPECT_NEAR(big_jump_rate(1.0, 1.0), 2.0 / pi, 1e-14);
    EXPECT_NEAR(2.0 / pi, 0.63662, 1e-5);
}

TEST(StableIndexSet, ValidatesIndices) {
    EXPECT_NO_THROW(StableIndexSet({1.0, 1.5}));
    EXPECT_THROW(StableIndexSet({1.0}), ConfigError);
    EXPECT_THROW(StableIndexSet({1.0, 2.0}), ConfigError);
    EXPECT_THROW(StableIndexSet({0.0, 1.0}), ConfigError);
    EXPECT_THROW(StableIndexSet({1.0, 1.9995}), ConfigError);
    EXPECT_THROW(StableIndexSet({0.0005, 1.0}), ConfigError);
    const StableIndexSet s{1.0, 1.5, 0.8};
    EXPECT_EQ(s.alpha_min(), 0.8);
    EXPECT_EQ(s.alpha_max(), 1.5);
    EXPECT_NEAR(s.regularity_scale(0.5), std::pow(0.5, 1.5 / 0.8), 1e-15);
}

TEST(StableIncrement, CharacteristicFunctionGrid) {
    constexpr std::size_t n = 1000000;
    std::uint64_t cell = 0;
    for (double gamma : {0.3, 0.5, 1.0, 1.5, 1.9}) {
        for (double xi : {0.5, 1.0, 2.0}) {
            Stream rng(derive_seed(20240101, cell++), 0);
            double s = 0, ss = 0;
            for (std::size_t i = 0; i < n; ++i) {
                const double c = std::cos(xi * sample_stable_increment(gamma, 1.0, rng));
                s += c;
                ss += c * c;
            }
            const double mean = s / n;
            const double se = std::sqrt((ss / n - mean * mean) / (n - 1));
            const double expected = std::exp(-std::pow(xi, gamma));
            EXPECT_LE(std::abs(mean - expected), 3.0 * se) << "gamma=" << gamma << " xi=" << xi;
        }
    }
}

TEST(StableIncrement, SelfSimilarScaling) {
    constexpr std::size_t n = 200000;
    for (double gamma : {0.7, 1.0, 1.5}) {
        const double dt = 0.05;
        const auto small = sorted_draws(gamma, dt, 1, n);
        auto unit = sorted_draws(gamma, 1.0, 2, n);
        for (auto& v : unit) v *= std::pow(dt, 1.0 / gamma);
        for (double p : {0.1, 0.25, 0.75, 0.9}) {
            const double a = quantile(small, p), b = quantile(unit, p);
            EXPECT_NEAR(a / b, 1.0, 0.03) << "gamma=" << gamma << " p=" << p;
        }
        EXPECT_LT(ks_statistic(small, unit), 1.95 * std::sqrt(2.0 / n));
    }
}

TEST(StableIncrement, MedianIsZero) {
    constexpr std::size_t n = 200001;
    for (double gamma : {0.5, 1.0, 1.5}) {
        const auto draws = sorted_draws(gamma, 1.0, 3, n);
        // density at 0 of the standard symmetric stable law: Gamma(1 + 1/gamma) / pi
        const double f0 = std::tgamma(1.0 + 1.0 / gamma) / pi;
        const double median_se = 1.0 / (2.0 * f0 * std::sqrt(static_cast<double>(n)));
        EXPECT_LE(std::abs(draws[n / 2]), 3.0 * median_se) << gamma;
    }
}

TEST(JumpDecomposition, CauchyBigJumpCountAndSmallVariation) {
    constexpr std::size_t n = 100000;
    double count = 0, count2 = 0, qv = 0;
    for (std::size_t i = 0; i < n; ++i) {
        Stream rng(77, i);
        const auto dec = decompose_jumps(1.0, 0.5, 1.0, 0.01, rng);
        const double k = static_cast<double>(dec.big_jumps.size());
        count += k;
        count2 += k * k;
        qv += dec.small_quadratic_variation();
    }
    const double mean = count / n;
    const double se = std::sqrt((count2 / n - mean * mean) / (n - 1));
    EXPECT_NEAR(4.0 / pi, 1.2732, 1e-4);
    EXPECT_LE(std::abs(mean - 4.0 / pi), 3.0 * se);
    EXPECT_NEAR((qv / n) / (1.0 / pi), 1.0, 0.05);
    EXPECT_NEAR(small_jump_variance_rate(1.0, 0.5), 1.0 / pi, 1e-14);
}

TEST(JumpDecomposition, HugeThresholdGivesNoJumps) {
    constexpr std::size_t n = 20000;
    std::size_t with_jumps = 0;
    for (std::size_t i = 0; i < n; ++i) {
        Stream rng(5, i);
        with_jumps += !decompose_jumps(1.0, 1e6, 1.0, 0.1, rng).big_jumps.empty();
    }
    // P(any jump) = 1 - exp(-2 c / 1e6) is about 6.4e-7
    EXPECT_EQ(with_jumps, 0u);
}

TEST(JumpDecomposition, InvariantsHoldOnEveryDraw) {
    for (double gamma : {0.4, 1.0, 1.7}) {
        for (std::uint64_t i = 0; i < 500; ++i) {
            Stream rng(8, i);
            const auto dec = decompose_jumps(gamma, 0.05, 2.0, 0.03, rng);
            double previous = 0.0;
            for (const auto& j : dec.big_jumps) {
                ASSERT_GT(std::abs(j.size), 0.05);
                ASSERT_GT(j.time, previous);
                ASSERT_LE(j.time, 2.0);
                previous = j.time;
            }
            ASSERT_EQ(dec.small_increments.size(), 67u);
        }
    }
}

TEST(JumpDecomposition, IsDeterministic) {
    Stream a(123, 4), b(123, 4);
    const auto x = decompose_jumps(1.3, 0.02, 1.0, 0.01, a);
    const auto y = decompose_jumps(1.3, 0.02, 1.0, 0.01, b);
    ASSERT_EQ(x.big_jumps.size(), y.big_jumps.size());
    for (std::size_t i = 0; i < x.big_jumps.size(); ++i) {
        EXPECT_EQ(x.big_jumps[i].time, y.big_jumps[i].time);
        EXPECT_EQ(x.big_jumps[i].size, y.big_jumps[i].size);
    }
    EXPECT_EQ(x.small_increments, y.small_increments);
}

TEST(JumpDecomposition, RejectsBadConfiguration) {
    Stream rng(1, 0);
    EXPECT_THROW((void)decompose_jumps(1.0, 0.0, 1.0, 0.1, rng), ConfigError);
    EXPECT_THROW((void)decompose_jumps(1.0, -1.0, 1.0, 0.1, rng), ConfigError);
    EXPECT_THROW((void)decompose_jumps(1.0, 0.1, 1.0, 0.0, rng), ConfigError);
    EXPECT_THROW((void)decompose_jumps(1.0, 0.1, 1.0, 2.0, rng), ConfigError);
    EXPECT_THROW((void)decompose_jumps(1.0, 1e13, 1.0, 0.1, rng), ConfigError);
    EXPECT_THROW((void)decompose_jumps(1.0, 5.0, 1.0, 0.1, rng, 1.0), ConfigError);
}

TEST(JumpDecomposition, ReconstructionMatchesFullIncrementInLaw) {
    constexpr std::size_t n = 100000;
    const double gamma = 1.5;
    std::vector<double> rebuilt(n);
    for (std::size_t i = 0; i < n; ++i) {
        Stream rng(31, i);
        const auto dec = decompose_jumps(gamma, 0.05, 1.0, 0.05, rng);
        rebuilt[i] = dec.big_total() + dec.small_total();
    }
    std::sort(rebuilt.begin(), rebuilt.end());
    const auto direct = sorted_draws(gamma, 1.0, 32, n);
    for (double p : {0.05, 0.25, 0.5, 0.75, 0.95})
        EXPECT_NEAR(quantile(rebuilt, p), quantile(direct, p), 0.03 + 0.02 * std::abs(quantile(direct, p))) << p;
    EXPECT_LT(ks_statistic(rebuilt, direct), 1.95 * std::sqrt(2.0 / n));
}
