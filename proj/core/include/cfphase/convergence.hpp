#pragma once

// kappa -> 0 studies: weak-form residuals against a fixed family of test
// functions, Cauchy distances between runs at successive kappa, and a
// manufactured-solution order check of the discretization.

#include "cfphase/solver.hpp"

#include <optional>
#include <string>
#include <vector>

namespace cfphase {

/// phi(t, x) = sum_j coef_j (1 - t/t_end)^m_j sin(n_j pi (x - a) / L).
/// Every term with m >= 1 vanishes at t_end; every term vanishes at a and d.
class TestFunction {
public:
    struct Term {
        double coef;
        int m;
        int n;
    };

    TestFunction(std::vector<Term> terms, double t_end, double a, double d);
    static TestFunction mode(int m, int n, double t_end, double a, double d);

    double value(double t, double x) const;
    double dt(double t, double x) const;
    double dx(double t, double x) const;

    /// alpha * f + beta * g (same time horizon and domain).
    static TestFunction combine(double alpha, const TestFunction& f, double beta,
                                const TestFunction& g);

    const std::vector<Term>& terms() const { return terms_; }
    std::string label() const;

private:
    std::vector<Term> terms_;
    double t_end_, a_, d_;
};

/// The m = 1..M, n = 1..Nf modes, ordered by m then n.
std::vector<TestFunction> test_family(double t_end, double a, double d, int M = 3, int Nf = 5);

enum class ResidualForm {
    Regularized, ///< flux F_k(S_x), reaction factor |S_x|_k - k
    Limit        ///< flux 1/2 |S_x| S_x, reaction factor |S_x|
};

struct WeakResidual {
    double raw = 0.0;
    double normalized = 0.0; ///< raw / int_0^t_end ||phi(t)|| dt
};

/// Space part of the pairing at one time:
///   -c nu (flux(S_x), phi_x) + c ((T.eps_bar - psi_hat'(S)) factor(S_x), phi).
/// Flux on cells against phi_x at cell midpoints; reaction by nodal trapezoid
/// with the central difference.
double spatial_pairing(const ScalarField& s, std::span<const double> tdot_eps,
                       const ModelParams& params, const TestFunction& phi, double t,
                       ResidualForm form);

/// Discrete weak-form residual of a trajectory:
///   int (S, phi_t) + spatial_pairing dt + (S0, phi(0)) - (S(t_end), phi(t_end)),
/// trapezoid in time over the snapshot times. tdot_eps holds one field per
/// snapshot. The last term vanishes for the standard family.
WeakResidual weak_residual(const Trajectory& traj, const std::vector<ScalarField>& tdot_eps,
                           const ScalarField& s0, const ModelParams& params,
                           const TestFunction& phi, ResidualForm form = ResidualForm::Limit);

/// || G_0(D+S_A) - G_0(D+S_B) ||_{L2(Q)} after resampling both trajectories at
/// time_samples + 1 uniform times on [0, min end time].
double compactness_distance(const Trajectory& a, const Trajectory& b, int time_samples = 256);
/// Same with the limit flux 1/2 |S_x| S_x.
double flux_distance(const Trajectory& a, const Trajectory& b, int time_samples = 256);

struct ReactionGap {
    double value = 0.0; ///< || (|S_x|_k - k) - |S_x| ||_{L2(Q)}
    double bound = 0.0; ///< 2 k |Q|^(1/2)
    bool holds = true;
};
ReactionGap reaction_gap(const Trajectory& traj, double kappa);

// -------------------------------------------------------- manufactured runs

/// S_m = A exp(-t) sin(pi (x - a) / L).
struct ManufacturedSolution {
    double amplitude = 1.0;

    double value(double t, double x, double a, double d) const;
    /// Source making S_m an exact solution of the continuous equation with
    /// T assembled from S_m itself (b = 0).
    SourceTerm source(const ModelParams& params) const;
    ScalarField sample(double t, const Grid& grid) const;
};

struct OrderReport {
    std::vector<int> cells;
    std::vector<double> errors; ///< L2(Q) error per level
    std::vector<double> orders; ///< log2(e_k / e_{k+1})
    std::vector<long> steps;
    double min_order() const;
};

/// Runs the manufactured problem on each grid (cells doubling), Delta t by the
/// CFL rule. Error quadrature uses snapshots every t_end / time_slices.
OrderReport manufactured_run(const ManufacturedSolution& exact, const ModelParams& params,
                             const SolverConfig& config, const std::vector<int>& cells,
                             int time_slices = 64);

// ------------------------------------------------------------ kappa sweeps

struct SweepEntry {
    double kappa = 0.0;
    bool ok = false;
    std::string error;
    std::optional<RunResult> result;
    MonitorRow final_row;
    std::vector<double> weak_residuals; ///< normalized, one per family member
    ReactionGap gap;
};

struct UniformityVerdict {
    std::string monitor;
    double min = 0.0;
    double max = 0.0;
    double ratio = 0.0; ///< max / min
    bool holds = false;
};

struct SweepReport {
    static constexpr double kUniformityFactor = 2.0;

    std::vector<SweepEntry> entries;
    /// Consecutive distances between entries i and i + 1 (both must be ok,
    /// NaN otherwise).
    std::vector<double> compactness;
    std::vector<double> flux;
    std::vector<UniformityVerdict> uniformity;

    bool all_ok() const;
    bool compactness_strictly_decreasing() const;
    bool uniform() const;
};

struct SweepSetup {
    explicit SweepSetup(ScalarField initial) : s0(std::move(initial)) {}

    ScalarField s0;
    BodyForce body_force = BodyForce::zero();
    SolverConfig config;
    int family_m = 3;
    int family_n = 5;
    bool concurrent = true;
};

/// Runs every kappa (strictly decreasing, in (0,1]) from the same S0. Failures
/// are recorded per entry and do not abort the sweep.
SweepReport kappa_sweep(const ModelParams& base, const std::vector<double>& kappas,
                        const SweepSetup& setup);

/// Final-value monitors compared across kappa.
const std::vector<std::string>& uniformity_monitors();
double monitor_by_name(const MonitorRow& row, const std::string& name);

} // namespace cfphase
