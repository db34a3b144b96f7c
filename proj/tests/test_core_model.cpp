#include "cfphase/core_model.hpp"
#include "cfphase/quadrature.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace cfphase;

namespace {

// Composite Simpson with a fixed panel count; independent of adaptive_simpson.
double simpson_oracle(double (*f)(double, double), double k, double hi, int panels)
{
    const double h = hi / panels;
    double s = f(0.0, k) + f(hi, k);
    for (int i = 1; i < panels; ++i)
        s += (i % 2 ? 4.0 : 2.0) * f(i * h, k);
    return s * h / 3.0;
}

double quarter_root_weight(double y, double k) { return std::pow(k * k + y * y, 0.25); }

Mat6 random_spd(std::mt19937& rng)
{
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Mat6 a;
    for (int i = 0; i < 6; ++i)
        for (int j = 0; j < 6; ++j)
            a(i, j) = u(rng);
    Mat6 d = a * a.transpose() + 0.5 * Mat6::Identity();
    return 0.5 * (d + d.transpose());
}

} // namespace

TEST(SymMatrix3, MandelCoordinatesGiveFrobeniusProduct)
{
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    for (int trial = 0; trial < 100; ++trial) {
        Mat3 a, b;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) {
                a(i, j) = u(rng);
                b(i, j) = u(rng);
            }
        a = 0.5 * (a + a.transpose()).eval();
        b = 0.5 * (b + b.transpose()).eval();
        const auto sa = SymMatrix3::from_matrix(a), sb = SymMatrix3::from_matrix(b);
        EXPECT_NEAR(mat_dot(sa, sb), (a.array() * b.array()).sum(), 1e-12);
        EXPECT_LT((sa.to_matrix() - a).cwiseAbs().maxCoeff(), 1e-14);
    }
}

TEST(SymMatrix3, SymFirstColumnIsSymmetricGradient)
{
    const Vec3 v(1.0, 2.0, 3.0);
    const Mat3 g = v * Vec3::UnitX().transpose();
    const Mat3 expect = 0.5 * (g + g.transpose());
    EXPECT_LT((SymMatrix3::sym_first_column(v).to_matrix() - expect).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(ElasticTensor, IsotropicMatchesLameFormula)
{
    const double lambda = 1.3, mu = 0.7;
    const auto d = ElasticTensor::isotropic(lambda, mu);
    const auto eps = SymMatrix3::from_components(0.3, -0.2, 0.5, 0.1, -0.4, 0.25);
    const Mat3 e = eps.to_matrix();
    const Mat3 expect = lambda * e.trace() * Mat3::Identity() + 2.0 * mu * e;
    EXPECT_LT((d.apply(eps).to_matrix() - expect).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(ElasticTensor, RejectsAsymmetricAndIndefinite)
{
    Mat6 m = Mat6::Identity();
    m(0, 1) = 0.1;
    EXPECT_THROW(ElasticTensor{m}, std::invalid_argument);
    Mat6 n = Mat6::Identity();
    n(3, 3) = -1.0;
    EXPECT_THROW(ElasticTensor{n}, std::invalid_argument);
    EXPECT_THROW(ElasticTensor::isotropic(1.0, 0.0), std::invalid_argument);
}

TEST(ElasticTensor, AcceptsRandomSpd)
{
    std::mt19937 rng(11);
    for (int k = 0; k < 20; ++k)
        EXPECT_NO_THROW(ElasticTensor{random_spd(rng)});
}

TEST(DoubleWell, QuarticValuesAndWells)
{
    const auto w = DoubleWell::quartic();
    EXPECT_EQ(w.value(0.0), 0.0);
    EXPECT_EQ(w.value(1.0), 0.0);
    EXPECT_DOUBLE_EQ(w.value(0.5), 1.0 / 16.0);
    EXPECT_EQ(w.derivative(0.5), 0.0);
    EXPECT_EQ(w.s_minus(), 0.0);
    EXPECT_EQ(w.s_star(), 0.5);
    EXPECT_EQ(w.s_plus(), 1.0);
}

TEST(DoubleWell, DerivativesMatchFiniteDifferences)
{
    const auto quartic = DoubleWell::quartic();
    const auto poly = DoubleWell::polynomial({0.0, 0.0, 1.0, -2.0, 1.0}, 0.0, 0.5, 1.0);
    for (const auto* w : {&quartic, &poly}) {
        for (double s = -1.0; s <= 2.0; s += 0.0625) {
            const double h = 1e-5;
            EXPECT_NEAR(w->derivative(s), (w->value(s + h) - w->value(s - h)) / (2 * h), 1e-8);
            EXPECT_NEAR(w->second_derivative(s),
                        (w->derivative(s + h) - w->derivative(s - h)) / (2 * h), 1e-7);
        }
    }
    for (double s = -1.0; s <= 2.0; s += 0.1)
        EXPECT_NEAR(quartic.value(s), poly.value(s), 1e-14);
}

TEST(DoubleWell, PolynomialValidation)
{
    EXPECT_THROW(DoubleWell::polynomial({}, 0.0, 0.5, 1.0), std::invalid_argument);
    EXPECT_THROW(DoubleWell::polynomial({0, 0, 1, -2, 1}, 0.0, 1.0, 0.5), std::invalid_argument);
    // Negative somewhere.
    EXPECT_THROW(DoubleWell::polynomial({-0.1, 0, 1, -2, 1}, 0.0, 0.5, 1.0), std::invalid_argument);
    // A single well: derivative has the wrong sign on (S_star, S_plus).
    EXPECT_THROW(DoubleWell::polynomial({0, 0, 1}, 0.0, 0.5, 1.0), std::invalid_argument);
}

TEST(ModelParams, DefaultsValidAndViolationsNamed)
{
    ModelParams p;
    EXPECT_NO_THROW(p.validate());
    p.kappa = 1.5;
    p.c = 0.0;
    p.a = 2.0;
    const auto v = p.violations();
    ASSERT_EQ(v.size(), 3u);
    EXPECT_EQ(v[1], "kappa must lie in (0,1]");
    EXPECT_THROW(p.validate(), std::invalid_argument);
    p = ModelParams{};
    p.kappa = 1.0;
    EXPECT_NO_THROW(p.validate());
}

TEST(Grid, EndpointsExact)
{
    const Grid g(-0.3, 0.7, 7);
    EXPECT_EQ(g.x(0), -0.3);
    EXPECT_EQ(g.x(7), 0.7);
    EXPECT_EQ(g.nodes(), 8u);
    EXPECT_THROW(Grid(0, 1, 3), std::invalid_argument);
    EXPECT_THROW(Grid(1, 0, 8), std::invalid_argument);
}

TEST(Trajectory, InterpolatesAndPrunes)
{
    const Grid g(0, 1, 4);
    ScalarField s0(g), s1(g, {0, 1, 2, 3, 0});
    Trajectory tr(s0);
    tr.push(1.0, s1);
    EXPECT_THROW(tr.push(1.0, s1), std::invalid_argument);
    const auto mid = tr.at(0.25);
    EXPECT_DOUBLE_EQ(mid[2], 0.5);
    EXPECT_DOUBLE_EQ(tr.at(5.0)[3], 3.0);

    ScalarField s2(g, {0, 2, 2, 2, 0});
    tr.push(2.0, s2);
    tr.replace_back(1.5, s1);
    EXPECT_EQ(tr.size(), 3u);
    EXPECT_EQ(tr.end_time(), 1.5);
    tr.push(3.0, s2);
    tr.prune_before(1.6);
    EXPECT_EQ(tr.start_time(), 1.5);
    EXPECT_EQ(tr.initial()[1], 0.0);
}

TEST(Trajectory, L2qDistanceOfConstantShift)
{
    const Grid g(0, 1, 10);
    ScalarField one(g, std::vector<double>(11, 1.0)), zero(g);
    Trajectory a(one), b(zero);
    a.push(2.0, one);
    b.push(2.0, zero);
    // |Q| = 2, difference 1 everywhere.
    EXPECT_NEAR(l2q_distance(a, b), std::sqrt(2.0), 1e-14);
    EXPECT_EQ(l2q_distance(a, a), 0.0);
}

TEST(FluxPrimitive, DerivativeIsSmoothedAbs)
{
    std::mt19937 rng(3);
    std::uniform_real_distribution<double> up(-20.0, 20.0);
    std::uniform_real_distribution<double> uk(0.01, 1.0);
    for (int n = 0; n < 1000; ++n) {
        const double p = up(rng), k = uk(rng);
        const double h = 1e-5 * std::max(1.0, std::abs(p));
        const double fd = (flux_primitive(p + h, k) - flux_primitive(p - h, k)) / (2 * h);
        EXPECT_NEAR(fd, smoothed_abs(p, k), 1e-6 * smoothed_abs(p, k)) << "p=" << p << " k=" << k;
    }
}

TEST(FluxPrimitive, WithinKappaTimesPOfLimitFlux)
{
    std::mt19937 rng(5);
    std::uniform_real_distribution<double> up(-50.0, 50.0);
    std::uniform_real_distribution<double> uk(0.001, 1.0);
    for (int n = 0; n < 1000; ++n) {
        const double p = up(rng), k = uk(rng);
        EXPECT_LE(std::abs(flux_primitive(p, k) - 0.5 * std::abs(p) * p), k * std::abs(p));
        EXPECT_EQ(flux_primitive(-p, k), -flux_primitive(p, k));
    }
    EXPECT_EQ(flux_primitive(0.0, 0.3), 0.0);
}

TEST(SqrtFluxPrimitive, MatchesFixedPanelSimpson)
{
    for (double k : {0.025, 0.1, 0.5, 1.0})
        for (double p : {-3.0, -0.4, 0.01, 0.2, 1.0, 5.0}) {
            const double oracle = std::copysign(
                simpson_oracle(quarter_root_weight, k, std::abs(p), 1'000'000), p);
            EXPECT_NEAR(sqrt_flux_primitive(p, k), oracle, 1e-10) << "p=" << p << " k=" << k;
        }
}

TEST(SqrtFluxPrimitive, LimitClosedForm)
{
    EXPECT_DOUBLE_EQ(sqrt_flux_primitive(4.0, 0.0), 2.0 / 3.0 * 8.0);
    EXPECT_DOUBLE_EQ(sqrt_flux_primitive(-4.0, 0.0), -2.0 / 3.0 * 8.0);
    EXPECT_THROW(sqrt_flux_primitive(1.0, -0.1), std::invalid_argument);
}

TEST(Energy, HandValues)
{
    ModelParams p;
    p.stiffness = ElasticTensor::identity();
    // eps = 0, S = 1: 1/2 |eps_bar|^2 + psi_hat(1) = 1/2.
    EXPECT_DOUBLE_EQ(free_energy(SymMatrix3{}, 1.0, p), 0.5);
    // T = diag(2, 0, 0), S = 0: c (T . eps_bar - psi_hat'(0)) = 2.
    EXPECT_DOUBLE_EQ(driving_force(SymMatrix3::diag(2.0, 0.0, 0.0), 0.0, p), 2.0);
}

TEST(Quadrature, SimpsonAndTrapezoid)
{
    EXPECT_NEAR(adaptive_simpson([](double x) { return std::exp(x); }, 0.0, 1.0), std::exp(1.0) - 1.0,
                1e-12);
    const std::vector<double> lin = {0.0, 1.0, 2.0, 3.0};
    EXPECT_DOUBLE_EQ(trapezoid(lin, 0.5), 2.25);
    const auto run = cumulative_trapezoid(lin, 1.0);
    EXPECT_DOUBLE_EQ(run.back(), 4.5);
    const std::vector<double> xs = {0.0, 0.5, 2.0, 3.0};
    EXPECT_DOUBLE_EQ(trapezoid(xs, xs), 4.5);
}
