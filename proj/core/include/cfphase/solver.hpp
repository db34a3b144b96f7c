#pragma once

// Explicit conservative finite-difference integration of the regularized
// order-parameter equation
//
//   S_t = c nu |S_x|_k S_xx + c (T . eps_bar - psi_hat'(S)) (|S_x|_k - k)
//
// coupled to the elasticity solve at every step. The degenerate term is
// differenced in flux form, (F_k(D+S_i) - F_k(D+S_{i-1})) / dx, with F_k the
// primitive of |y|_k, so interior flux differences telescope.

#include "cfphase/elasticity.hpp"
#include "cfphase/estimates.hpp"
#include "cfphase/mollifier.hpp"

#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace cfphase {

enum class CouplingMode {
    Direct,    ///< T assembled from the current S
    Mollified, ///< T from the causal time mollification of the history
    Picard     ///< T from the centered mollification of the previous sweep
};

/// Source term hook: fills out[i] with g(t, x_i).
using SourceTerm = std::function<void(double t, const Grid& grid, std::span<double> out)>;

struct SolverConfig {
    CouplingMode coupling = CouplingMode::Direct;
    int picard_sweeps = 2;
    double cfl_safety = 0.4;
    long max_steps = 100'000'000;
    SourceTerm source;
    /// Snapshot every `snapshot_stride` steps unless snapshot_interval > 0, in
    /// which case steps are clipped to land on multiples of the interval.
    int snapshot_stride = 1000;
    double snapshot_interval = 0.0;
    /// Fixed step size bypassing the CFL rule (0 = adaptive).
    double dt_override = 0.0;
    /// Quadrature panels for in-loop mollification.
    int mollifier_samples = 32;
    bool track_monitors = true;

    void validate() const;
};

struct StepReport {
    double t = 0.0;
    double dt = 0.0;
    double max_abs_S = 0.0;
    double max_weight = 0.0;  ///< max_i |D+S_i|_k
    double reaction_max = 0.0;
    double elasticity_residual = 0.0;
};

struct MaxPrincipleReport {
    static constexpr double kTolerance = 1e-10;
    double initial_max = 0.0;
    double observed_max = 0.0;
    bool holds = true;
};

struct RunResult {
    explicit RunResult(Trajectory t) : traj(std::move(t)) {}

    Trajectory traj;
    MonitorSeries monitors;
    /// T . eps_bar and the coupled order parameter at every snapshot.
    std::vector<ScalarField> coupling;
    std::vector<ScalarField> effective;
    std::vector<StepReport> reports;
    MaxPrincipleReport max_principle;
    long steps = 0;
    bool kernel_truncated = false;
    std::vector<double> picard_distances;
};

class SolverError : public std::runtime_error {
public:
    enum class Kind { NonFinite, StepLimit, BadInput };
    SolverError(Kind kind, const std::string& what, long step, double t)
        : std::runtime_error(what), kind_(kind), step_(step), t_(t)
    {
    }
    Kind kind() const { return kind_; }
    long step() const { return step_; }
    double time() const { return t_; }

private:
    Kind kind_;
    long step_;
    double t_;
};

/// Interior right-hand side of the discrete equation; endpoints are 0.
/// Throws SolverError on non-finite input.
ScalarField discrete_rhs(const ScalarField& s, const ScalarField& tdot_eps,
                         const ModelParams& params, const ScalarField* source = nullptr);

/// Sum over interior nodes of dx * (flux difference)/dx; equals
/// F(D+S_{N-1}) - F(D+S_0) up to rounding.
double flux_divergence_sum(const ScalarField& s, double kappa);

/// dt = safety dx^2 / (2 c nu max_i |D+S_i|_k), capped by safety / (c L) with
/// L a bound on the Lipschitz constant of the discrete reaction term given
/// |T . eps_bar| <= coupling_bound.
double cfl_dt(const ScalarField& s, const ModelParams& params, double safety,
              double coupling_bound = 0.0);

/// One forward-Euler step in DIRECT coupling from time t.
std::pair<ScalarField, StepReport> step(const ScalarField& s, double t, const SolverConfig& config,
                                        const ModelParams& params, const BodyForce& b);

/// Integrates from S0 over [0, t_end].
RunResult run(const ScalarField& s0, const ModelParams& params, const SolverConfig& config,
              const BodyForce& b);

/// Integrates with the coupled order parameter supplied by `effective`
/// (t, S) -> S_eff. Used for Picard sweeps and custom couplings.
using EffectiveOrder = std::function<void(double t, std::span<const double> s, std::span<double> out)>;
RunResult run_with_effective(const ScalarField& s0, const ModelParams& params,
                             const SolverConfig& config, const BodyForce& b,
                             const EffectiveOrder& effective);

struct PicardSweep {
    RunResult result;
    double distance = 0.0; ///< L2(Q) distance between input and output trajectories
};

/// Re-solves over [0, t_end] with T assembled from the centered mollification
/// of traj_in and reports the L2(Q) change.
PicardSweep picard_sweep(const Trajectory& traj_in, const ModelParams& params,
                         const SolverConfig& config, const BodyForce& b);

enum class ProfileKind { Sine, SmoothedStep, PolynomialBump };

ProfileKind parse_profile_kind(const std::string& name);
std::string to_string(ProfileKind kind);

/// Initial profiles vanishing at both endpoints.
///  - Sine: A sin(pi (x - a) / L)
///  - SmoothedStep: plateau of height A entered and left through C^2 ramps of
///    the given width (0 < width <= L/2); S, S_x, S_xx vanish at the ends
///  - PolynomialBump: 16 A xi^2 (1 - xi)^2, xi = (x - a) / L
ScalarField make_initial_profile(ProfileKind kind, double amplitude, const Grid& grid,
                                 double width = 0.25);

/// Reflection x -> a + d - x of a nodal field.
ScalarField reflect(const ScalarField& s);

} // namespace cfphase
