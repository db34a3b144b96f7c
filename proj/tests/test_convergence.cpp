#include "cfphase/convergence.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace cfphase;

namespace {

// Field f(t) * g(x) sampled at `slices` + 1 uniform times.
Trajectory separable(const Grid& grid, double t_end, int slices, double (*f)(double),
                     double (*g)(double))
{
    const auto at = [&](double t) {
        ScalarField s(grid);
        for (int i = 0; i <= grid.cells(); ++i)
            s[static_cast<std::size_t>(i)] = f(t) * g(grid.x(i));
        return s;
    };
    Trajectory tr(at(0.0));
    for (int k = 1; k <= slices; ++k) {
        const double t = k == slices ? t_end : t_end * k / slices;
        tr.push(t, at(t));
    }
    return tr;
}

double decay(double t) { return std::exp(-t); }
double one(double) { return 1.0; }
double sine(double x) { return std::sin(M_PI * x); }
double line(double x) { return 0.8 * x; }

RunResult small_run(double kappa, int cells = 40, double t_end = 0.05)
{
    ModelParams p;
    p.kappa = kappa;
    p.t_end = t_end;
    SolverConfig cfg;
    cfg.snapshot_interval = t_end / 10;
    const Grid g(0.0, 1.0, cells);
    return run(make_initial_profile(ProfileKind::SmoothedStep, 1.0, g, 0.25), p, cfg,
               BodyForce::zero());
}

} // namespace

TEST(TestFamily, MembersVanishAtBoundaryAndFinalTime)
{
    const auto fam = test_family(2.0, 1.0, 3.0);
    ASSERT_EQ(fam.size(), 15u);
    EXPECT_EQ(fam.front().label(), "phi_1_1");
    EXPECT_EQ(fam.back().label(), "phi_3_5");
    for (const auto& phi : fam) {
        EXPECT_EQ(phi.value(2.0, 1.7), 0.0);
        EXPECT_NEAR(phi.value(0.4, 1.0), 0.0, 1e-15);
        EXPECT_NEAR(phi.value(0.4, 3.0), 0.0, 1e-14);
    }
}

TEST(TestFamily, DerivativesMatchFiniteDifferences)
{
    const auto phi = TestFunction::combine(0.5, TestFunction::mode(2, 3, 1.5, 0.0, 2.0), -1.2,
                                           TestFunction::mode(3, 1, 1.5, 0.0, 2.0));
    const double h = 1e-6;
    for (double t : {0.1, 0.7, 1.3})
        for (double x : {0.2, 0.9, 1.6}) {
            EXPECT_NEAR(phi.dt(t, x), (phi.value(t + h, x) - phi.value(t - h, x)) / (2 * h), 1e-7);
            EXPECT_NEAR(phi.dx(t, x), (phi.value(t, x + h) - phi.value(t, x - h)) / (2 * h), 1e-7);
        }
    EXPECT_THROW(TestFunction::combine(1.0, TestFunction::mode(1, 1, 1.0, 0.0, 1.0), 1.0,
                                       TestFunction::mode(1, 1, 2.0, 0.0, 1.0)),
                 std::invalid_argument);
}

TEST(WeakResidual, ZeroTrajectoryHasZeroResidual)
{
    const Grid g(0.0, 1.0, 20);
    const ModelParams p;
    Trajectory tr(ScalarField{g});
    tr.push(0.5, ScalarField(g));
    tr.push(1.0, ScalarField(g));
    const std::vector<ScalarField> tdot(3, ScalarField(g));
    for (const auto& phi : test_family(1.0, 0.0, 1.0))
        for (auto form : {ResidualForm::Limit, ResidualForm::Regularized})
            EXPECT_EQ(weak_residual(tr, tdot, ScalarField(g), p, phi, form).raw, 0.0);
}

TEST(WeakResidual, LinearInTestFunction)
{
    const auto r = small_run(0.1);
    ModelParams p;
    p.kappa = 0.1;
    p.t_end = 0.05;
    const auto f = TestFunction::mode(1, 2, 0.05, 0.0, 1.0);
    const auto g = TestFunction::mode(2, 3, 0.05, 0.0, 1.0);
    const auto h = TestFunction::combine(2.0, f, -0.5, g);
    const auto s0 = r.traj.initial();
    for (auto form : {ResidualForm::Limit, ResidualForm::Regularized}) {
        const double rf = weak_residual(r.traj, r.coupling, s0, p, f, form).raw;
        const double rg = weak_residual(r.traj, r.coupling, s0, p, g, form).raw;
        const double rh = weak_residual(r.traj, r.coupling, s0, p, h, form).raw;
        EXPECT_NEAR(rh, 2.0 * rf - 0.5 * rg, 1e-12);
    }
}

TEST(WeakResidual, TimePartIntegratesByParts)
{
    // S = exp(-t) sin(pi x), phi = (1 - t) sin(pi x) on [0,1]^2:
    // int (S, phi_t) + (S0, phi(0)) = -int (S_t, phi) = exp(-1) / 2.
    const Grid g(0.0, 1.0, 200);
    const ModelParams p;
    const auto tr = separable(g, 1.0, 400, decay, sine);
    const std::vector<ScalarField> tdot(tr.size(), ScalarField(g));
    const auto phi = TestFunction::mode(1, 1, 1.0, 0.0, 1.0);
    const double total = weak_residual(tr, tdot, tr.initial(), p, phi).raw;
    std::vector<double> space(tr.size()), times(tr.size());
    for (std::size_t k = 0; k < tr.size(); ++k) {
        const auto& snap = tr.snapshots()[k];
        space[k] = spatial_pairing(snap.S, tdot[k].view(), p, phi, snap.t, ResidualForm::Limit);
        times[k] = snap.t;
    }
    double space_integral = 0.0;
    for (std::size_t k = 1; k < tr.size(); ++k)
        space_integral += 0.5 * (space[k] + space[k - 1]) * (times[k] - times[k - 1]);
    EXPECT_NEAR(total - space_integral, 0.5 * std::exp(-1.0), 1e-5);
}

TEST(WeakResidual, SpatialPairingIsSummationByPartsOfRhs)
{
    // sum dx rhs_i phi_i differs from the pairing only through the phi_x
    // midpoint rule, an O(dx^2) effect.
    ModelParams p;
    p.kappa = 0.05;
    const auto phi = TestFunction::mode(1, 2, 1.0, 0.0, 1.0);
    const auto gap_at = [&](int n) {
        const Grid g(0.0, 1.0, n);
        const auto s = make_initial_profile(ProfileKind::PolynomialBump, 0.9, g);
        ScalarField tdot(g);
        for (std::size_t i = 0; i < tdot.size(); ++i)
            tdot[i] = -0.4 + 0.3 * s[i];
        const auto rhs = discrete_rhs(s, tdot, p);
        double sum = 0.0;
        for (int i = 1; i < n; ++i)
            sum += g.dx() * rhs[static_cast<std::size_t>(i)] * phi.value(0.3, g.x(i));
        return std::abs(spatial_pairing(s, tdot.view(), p, phi, 0.3, ResidualForm::Regularized) - sum);
    };
    const double e1 = gap_at(100), e2 = gap_at(200);
    EXPECT_LT(e1, 1e-3);
    EXPECT_GT(e1 / e2, 3.5);
}

TEST(WeakResidual, RejectsMismatchedCouplingSeries)
{
    const auto r = small_run(0.1, 20);
    ModelParams p;
    p.t_end = 0.05;
    std::vector<ScalarField> short_series(r.coupling.begin(), r.coupling.end() - 1);
    EXPECT_THROW(weak_residual(r.traj, short_series, r.traj.initial(), p,
                               TestFunction::mode(1, 1, 0.05, 0.0, 1.0)),
                 std::invalid_argument);
}

TEST(Distances, PseudometricProperties)
{
    const auto a = small_run(0.2), b = small_run(0.1), c = small_run(0.05);
    EXPECT_EQ(compactness_distance(a.traj, a.traj), 0.0);
    EXPECT_DOUBLE_EQ(compactness_distance(a.traj, b.traj), compactness_distance(b.traj, a.traj));
    EXPECT_LE(compactness_distance(a.traj, c.traj),
              compactness_distance(a.traj, b.traj) + compactness_distance(b.traj, c.traj) + 1e-15);
    EXPECT_LE(flux_distance(a.traj, c.traj),
              flux_distance(a.traj, b.traj) + flux_distance(b.traj, c.traj) + 1e-15);
}

TEST(Distances, ConstantGradientClosedForm)
{
    // S = 0.8 x against S = 0 on [0,1] x [0,2]: |G_0(0.8)| sqrt(2).
    const Grid g(0.0, 1.0, 50);
    const auto a = separable(g, 2.0, 4, one, line);
    Trajectory b(ScalarField{g});
    b.push(2.0, ScalarField(g));
    const double g0 = 2.0 / 3.0 * std::pow(0.8, 1.5);
    EXPECT_NEAR(compactness_distance(a, b), g0 * std::sqrt(2.0), 1e-12);
    EXPECT_NEAR(flux_distance(a, b), 0.32 * std::sqrt(2.0), 1e-12);
}

TEST(ReactionGap, ClosedFormAndBound)
{
    const Grid g(0.0, 1.0, 50);
    const auto a = separable(g, 2.0, 4, one, line);
    const double k = 0.3;
    const double gap = std::sqrt(0.64 + k * k) - k - 0.8;
    const auto r = reaction_gap(a, k);
    EXPECT_NEAR(r.value, std::abs(gap) * std::sqrt(2.0), 1e-12);
    EXPECT_NEAR(r.bound, 2.0 * k * std::sqrt(2.0), 1e-15);
    EXPECT_TRUE(r.holds);
}

TEST(Manufactured, ZeroAmplitudeIsExact)
{
    ModelParams p;
    p.t_end = 0.01;
    const auto rep = manufactured_run(ManufacturedSolution{0.0}, p, SolverConfig{}, {20, 40}, 4);
    ASSERT_EQ(rep.errors.size(), 2u);
    EXPECT_EQ(rep.errors[0], 0.0);
    EXPECT_EQ(rep.errors[1], 0.0);
}

TEST(Manufactured, SecondOrderOnCoarseGrids)
{
    ModelParams p;
    p.t_end = 0.2;
    const auto rep = manufactured_run(ManufacturedSolution{1.0}, p, SolverConfig{}, {32, 64}, 16);
    ASSERT_EQ(rep.orders.size(), 1u);
    EXPECT_GT(rep.min_order(), 1.8);
    EXPECT_GT(rep.steps[1], rep.steps[0]);
}

TEST(Sweep, RunsAreDeterministic)
{
    const auto a = small_run(0.1), b = small_run(0.1);
    ASSERT_EQ(a.steps, b.steps);
    EXPECT_EQ(a.traj.back().S.values, b.traj.back().S.values);
}

TEST(Sweep, SingleKappa)
{
    ModelParams p;
    p.t_end = 0.02;
    SweepSetup setup(make_initial_profile(ProfileKind::Sine, 1.0, Grid(0.0, 1.0, 30)));
    setup.config.snapshot_interval = 0.005;
    const auto rep = kappa_sweep(p, {0.1}, setup);
    ASSERT_EQ(rep.entries.size(), 1u);
    EXPECT_TRUE(rep.all_ok());
    EXPECT_TRUE(rep.compactness.empty());
    EXPECT_TRUE(rep.compactness_strictly_decreasing());
    EXPECT_EQ(rep.entries[0].weak_residuals.size(), 15u);
    EXPECT_TRUE(rep.uniform());
    EXPECT_TRUE(rep.entries[0].gap.holds);
}

TEST(Sweep, FailuresAreCapturedPerEntry)
{
    ModelParams p;
    p.t_end = 0.02;
    SweepSetup setup(make_initial_profile(ProfileKind::Sine, 1.0, Grid(0.0, 1.0, 30)));
    setup.config.max_steps = 5;
    setup.concurrent = false;
    const auto rep = kappa_sweep(p, {0.2, 0.1}, setup);
    EXPECT_FALSE(rep.all_ok());
    for (const auto& e : rep.entries) {
        EXPECT_FALSE(e.ok);
        EXPECT_NE(e.error.find("step limit"), std::string::npos);
    }
    ASSERT_EQ(rep.compactness.size(), 1u);
    EXPECT_TRUE(std::isnan(rep.compactness[0]));
    EXPECT_FALSE(rep.uniform());
}

TEST(Sweep, KappaListValidation)
{
    const ModelParams p;
    const SweepSetup setup(ScalarField(Grid(0.0, 1.0, 10)));
    EXPECT_THROW(kappa_sweep(p, {}, setup), std::invalid_argument);
    EXPECT_THROW(kappa_sweep(p, {0.1, 0.2}, setup), std::invalid_argument);
    EXPECT_THROW(kappa_sweep(p, {1.5}, setup), std::invalid_argument);
    EXPECT_THROW(monitor_by_name(MonitorRow{}, "entropy"), std::invalid_argument);
}
