#include "cfphase/mollifier.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace cfphase;

namespace {

double bump(double tau) { return std::abs(tau) < 1.0 ? std::exp(-1.0 / (1.0 - tau * tau)) : 0.0; }

// Uniform field equal to f(t) sampled every dt on [0, t_end].
Trajectory uniform_trajectory(double (*f)(double), double dt, double t_end)
{
    const Grid g(0.0, 1.0, 4);
    const auto field = [&](double t) { return ScalarField(g, std::vector<double>(5, f(t))); };
    Trajectory tr(field(0.0));
    const int steps = static_cast<int>(std::lround(t_end / dt));
    for (int k = 1; k <= steps; ++k)
        tr.push(k == steps ? t_end : k * dt, field(k == steps ? t_end : k * dt));
    return tr;
}

double square(double t) { return t * t; }
double constant(double) { return 0.75; }

} // namespace

TEST(Mollifier, NormalizationMatchesMidpointSum)
{
    constexpr int n = 1'000'000;
    double s = 0.0;
    for (int i = 0; i < n; ++i)
        s += bump(-1.0 + (i + 0.5) * 2.0 / n);
    EXPECT_NEAR(bump_normalization(), s * 2.0 / n, 1e-10);
}

TEST(Mollifier, KernelsHaveUnitMass)
{
    for (auto support : {MollifierKernel::Support::Centered, MollifierKernel::Support::Causal}) {
        const MollifierKernel k(0.2, support);
        constexpr int n = 200'000;
        double s = 0.0;
        const double lo = -0.2, h = 0.4 / n;
        for (int i = 0; i < n; ++i)
            s += k(lo + (i + 0.5) * h);
        EXPECT_NEAR(s * h, 1.0, 1e-9);
    }
    const MollifierKernel causal(0.2, MollifierKernel::Support::Causal);
    EXPECT_EQ(causal(-0.01), 0.0);
    EXPECT_GT(causal(0.1), 0.0);
    EXPECT_EQ(causal.reach_forward(), 0.0);
    EXPECT_THROW(MollifierKernel(0.0, MollifierKernel::Support::Centered), std::invalid_argument);
}

TEST(Mollifier, SquareMatchesRiemannOracle)
{
    const double kappa = 0.2, t = 0.5;
    const auto tr = uniform_trajectory(square, 1e-4, 1.0);
    for (auto support : {MollifierKernel::Support::Centered, MollifierKernel::Support::Causal}) {
        const MollifierKernel k(kappa, support, 4096);
        constexpr int n = 100'000;
        const double lo = t - kappa, h = 2.0 * kappa / n;
        double oracle = 0.0;
        for (int i = 0; i < n; ++i) {
            const double s = lo + (i + 0.5) * h;
            oracle += k(t - s) * s * s;
        }
        oracle *= h;
        const auto m = mollify_time(tr, k, t, 1.0);
        EXPECT_FALSE(m.truncated);
        EXPECT_NEAR(m.field[2], oracle, 1e-8);
        EXPECT_NEAR(m.retained_mass, 1.0, 1e-8);
    }
}

TEST(Mollifier, TruncatedKernelReproducesConstants)
{
    const auto tr = uniform_trajectory(constant, 0.01, 1.0);
    const MollifierKernel k(0.2, MollifierKernel::Support::Centered, 64);
    for (double t : {0.0, 0.05, 0.5, 0.95, 1.0}) {
        const auto m = mollify_time(tr, k, t, 1.0);
        EXPECT_EQ(m.truncated, t < 0.2 || t > 0.8);
        for (double v : m.field.values)
            EXPECT_NEAR(v, 0.75, 1e-14);
    }
}

TEST(Mollifier, ResultIsConvexCombination)
{
    const Grid g(0.0, 1.0, 8);
    std::mt19937 rng(17);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const auto rand_field = [&] {
        std::vector<double> v(9);
        for (auto& x : v)
            x = u(rng);
        return ScalarField(g, v);
    };
    Trajectory tr(rand_field());
    for (int k = 1; k <= 40; ++k)
        tr.push(0.025 * k, rand_field());
    const MollifierKernel kern(0.1, MollifierKernel::Support::Centered, 32);
    for (double t : {0.0, 0.33, 0.71, 1.0}) {
        const auto m = mollify_time(tr, kern, t, 1.0);
        for (double v : m.field.values) {
            EXPECT_LE(v, 1.0);
            EXPECT_GE(v, -1.0);
        }
    }
}

TEST(Mollifier, MissingHistoryIsReported)
{
    const auto tr = uniform_trajectory(square, 0.01, 0.5);
    const MollifierKernel k(0.2, MollifierKernel::Support::Centered);
    EXPECT_THROW(mollify_time(tr, k, 0.45, 1.0), std::out_of_range);
    const MollifierKernel causal(0.2, MollifierKernel::Support::Causal);
    EXPECT_NO_THROW(mollify_time(tr, causal, 0.5, 1.0));
}
