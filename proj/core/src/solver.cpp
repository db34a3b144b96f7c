#include "cfphase/solver.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace cfphase {

namespace {

struct Bounds {
    double max_forward = 0.0; ///< max_i |D+S_i|
    double reaction_lip = 0.0;
    double reaction_max = 0.0;
};

// Fills out[1..N-1] with the discrete right-hand side; out[0] = out[N] = 0.
// flux is scratch of size N.
Bounds rhs_kernel(std::span<const double> s, std::span<const double> tdot,
                  std::span<const double> src, const GradientData& g, const ModelParams& p,
                  double dx, double coupling_bound, std::vector<double>& flux,
                  std::span<double> out)
{
    const std::size_t n = s.size();
    flux.resize(n - 1);
    Bounds b;
    for (std::size_t i = 0; i + 1 < n; ++i) {
        flux[i] = flux_primitive(g.forward[i], p.kappa);
        b.max_forward = std::max(b.max_forward, std::abs(g.forward[i]));
    }
    const double diff = p.c * p.nu / dx;
    out[0] = out[n - 1] = 0.0;
    for (std::size_t i = 1; i + 1 < n; ++i) {
        const double dpsi = p.potential.derivative(s[i]);
        const double excess = g.weight[i] - p.kappa;
        const double reaction = p.c * (tdot[i] - dpsi) * excess;
        out[i] = diff * (flux[i] - flux[i - 1]) + reaction + (src.empty() ? 0.0 : src[i]);
        b.reaction_max = std::max(b.reaction_max, std::abs(reaction));
        const double lip = std::abs(p.potential.second_derivative(s[i])) * excess +
                           (coupling_bound + std::abs(dpsi)) / dx;
        b.reaction_lip = std::max(b.reaction_lip, lip);
    }
    b.reaction_lip *= p.c;
    return b;
}

double dt_from_bounds(const Bounds& b, const ModelParams& p, double dx, double safety)
{
    const double wmax = smoothed_abs(b.max_forward, p.kappa);
    double dt = safety * dx * dx / (2.0 * p.c * p.nu * wmax);
    if (b.reaction_lip > 0.0)
        dt = std::min(dt, safety / b.reaction_lip);
    return dt;
}

double max_abs_of(std::span<const double> v)
{
    double m = 0.0;
    for (double x : v)
        m = std::max(m, std::abs(x));
    return m;
}

void require_finite(std::span<const double> v, const char* what, long step, double t)
{
    for (double x : v)
        if (!std::isfinite(x)) {
            std::ostringstream msg;
            msg << "non-finite " << what << " at step " << step << ", t = " << t;
            throw SolverError(SolverError::Kind::NonFinite, msg.str(), step, t);
        }
}

class Integrator {
public:
    Integrator(const ScalarField& s0, const ModelParams& params, const SolverConfig& config,
               const BodyForce& b, EffectiveOrder effective)
        : p_(params), cfg_(config), b_(b), effective_(std::move(effective)), s_(s0),
          op_(params.stiffness, params.misfit, s0.grid), acc_(params, s0.grid.dx()),
          dx_(s0.grid.dx())
    {
        const std::size_t n = s_.size();
        rate_.assign(n, 0.0);
        tdot_.assign(n, 0.0);
        s_eff_.assign(n, 0.0);
        delta_.assign(n, 0.0);
        if (cfg_.source)
            src_.assign(n, 0.0);
        corr_ = op_.zero_correction();
    }

    RunResult run()
    {
        RunResult out(Trajectory{s_});
        require_finite(s_.view(), "initial data", 0, 0.0);

        double t = 0.0;
        long steps = 0;
        g_.compute(s_.view(), p_.kappa, dx_);
        acc_.observe(s_.view());
        Bounds bounds = evaluate(t, 0);
        if (cfg_.track_monitors)
            acc_.set_initial_rate(rate_);
        record(out, t, 0.0, bounds);

        const double t_end = p_.t_end;
        long interval_index = 0;
        while (t < t_end) {
            if (steps >= cfg_.max_steps) {
                std::ostringstream msg;
                msg << "step limit " << cfg_.max_steps << " reached at t = " << t;
                throw SolverError(SolverError::Kind::StepLimit, msg.str(), steps, t);
            }
            double dt = cfg_.dt_override > 0.0 ? cfg_.dt_override
                                               : dt_from_bounds(bounds, p_, dx_, cfg_.cfl_safety);
            double t_next = t + dt;
            bool final = false, snap = false;
            if (dt >= t_end - t) {
                dt = t_end - t;
                t_next = t_end;
                final = true;
            }
            if (cfg_.snapshot_interval > 0.0) {
                const double due = static_cast<double>(interval_index + 1) * cfg_.snapshot_interval;
                if (due < t_end && t_next >= due) {
                    dt = due - t;
                    t_next = due;
                    snap = true;
                    ++interval_index;
                }
            }
            if (!(dt > 0.0))
                throw SolverError(SolverError::Kind::BadInput, "step size collapsed to zero",
                                  steps, t);

            const std::size_t n = s_.size();
            for (std::size_t i = 0; i < n; ++i)
                delta_[i] = dt * rate_[i];
            if (cfg_.track_monitors)
                acc_.add_step(g_, dt);
            for (std::size_t i = 0; i < n; ++i)
                s_[i] += delta_[i];
            ++steps;
            t = t_next;
            require_finite(s_.view(), "order parameter", steps, t);
            out.traj.record_step(dt);

            g_.compute(s_.view(), p_.kappa, dx_);
            if (cfg_.track_monitors)
                acc_.add_rate(g_, delta_, dt);
            acc_.observe(s_.view());

            bounds = evaluate(t, steps);
            if (cfg_.snapshot_interval <= 0.0 &&
                steps % cfg_.snapshot_stride == 0)
                snap = true;
            if (final || snap) {
                out.traj.push(t, s_);
                record(out, t, dt, bounds);
            }
        }

        out.steps = steps;
        const double m0 = out.traj.initial().max_abs();
        out.max_principle.initial_max = m0;
        out.max_principle.observed_max = acc_.running_sup();
        out.max_principle.holds = acc_.running_sup() <= m0 + MaxPrincipleReport::kTolerance;
        return out;
    }

private:
    // Coupling, source and rate at time t for the current S.
    Bounds evaluate(double t, long step)
    {
        const Grid& grid = s_.grid;
        if (b_.kind != BodyForce::Kind::Zero && (!have_corr_ || b_.time_dependent)) {
            corr_ = op_.solve_correction(b_.sample(t, grid));
            have_corr_ = true;
        }
        if (effective_)
            effective_(t, s_.view(), s_eff_);
        else
            std::copy(s_.values.begin(), s_.values.end(), s_eff_.begin());
        op_.coupling_field(s_eff_, corr_, tdot_);
        if (cfg_.source)
            cfg_.source(t, grid, src_);
        require_finite(tdot_, "coupling field", step, t);
        const double bound = max_abs_of(tdot_);
        return rhs_kernel(s_.view(), tdot_, src_, g_, p_, dx_, bound, flux_, rate_);
    }

    void record(RunResult& out, double t, double dt, const Bounds& bounds)
    {
        const Grid& grid = s_.grid;
        if (cfg_.track_monitors)
            out.monitors.rows.push_back(acc_.row(t, s_.view(), g_));
        out.coupling.emplace_back(grid, tdot_);
        out.effective.emplace_back(grid, s_eff_);
        StepReport r;
        r.t = t;
        r.dt = dt;
        r.max_abs_S = s_.max_abs();
        r.max_weight = smoothed_abs(bounds.max_forward, p_.kappa);
        r.reaction_max = bounds.reaction_max;
        const ScalarField s_eff(grid, s_eff_);
        const Vec3Field bf = b_.sample(t, grid);
        const CorrectionPair corr =
            b_.kind == BodyForce::Kind::Zero ? op_.zero_correction() : op_.solve_correction(bf);
        r.elasticity_residual = equilibrium_residual(op_.assemble_stress(s_eff, corr).T, bf, grid);
        out.reports.push_back(r);
    }

    ModelParams p_;
    SolverConfig cfg_;
    BodyForce b_;
    EffectiveOrder effective_;
    ScalarField s_;
    ElasticityOperator op_;
    MonitorAccumulator acc_;
    double dx_;
    GradientData g_;
    CorrectionPair corr_;
    bool have_corr_ = false;
    std::vector<double> rate_, tdot_, s_eff_, delta_, src_, flux_;
};

// Causal history for MOLLIFIED coupling: snapshots roughly every
// kappa / samples, the newest entry tracking the current state.
class CausalHistory {
public:
    CausalHistory(const ScalarField& s0, const ModelParams& params, int samples)
        : traj_(s0), kernel_(params.kappa, MollifierKernel::Support::Causal, samples),
          spacing_(params.kappa / std::max(samples, 1)), horizon_(params.t_end)
    {
    }

    void operator()(double t, std::span<const double> s, std::span<double> out)
    {
        if (t > traj_.end_time()) {
            ScalarField cur(traj_.grid(), std::vector<double>(s.begin(), s.end()));
            const auto& snaps = traj_.snapshots();
            const bool young =
                snaps.size() >= 2 && t - snaps[snaps.size() - 2].t < spacing_;
            if (young)
                traj_.replace_back(t, cur);
            else
                traj_.push(t, cur);
            traj_.prune_before(t - kernel_.reach_back());
        }
        const MollifiedSlice m = mollify_time(traj_, kernel_, t, horizon_);
        if (t < kernel_.reach_back())
            *truncated_ = true;
        std::copy(m.field.values.begin(), m.field.values.end(), out.begin());
    }

    bool* truncated_ = nullptr;

private:
    Trajectory traj_;
    MollifierKernel kernel_;
    double spacing_;
    double horizon_;
};

} // namespace

void SolverConfig::validate() const
{
    std::ostringstream msg;
    if (!(cfl_safety > 0.0 && cfl_safety < 1.0))
        msg << " cfl_safety must lie in (0,1);";
    if (max_steps <= 0)
        msg << " max_steps must be > 0;";
    if (snapshot_stride < 1)
        msg << " snapshot_stride must be >= 1;";
    if (!(snapshot_interval >= 0.0))
        msg << " snapshot_interval must be >= 0;";
    if (!(dt_override >= 0.0))
        msg << " dt_override must be >= 0;";
    if (mollifier_samples < 2)
        msg << " mollifier_samples must be >= 2;";
    if (coupling == CouplingMode::Picard && picard_sweeps < 1)
        msg << " picard_sweeps must be >= 1;";
    const std::string s = msg.str();
    if (!s.empty())
        throw std::invalid_argument("invalid solver configuration:" + s);
}

ScalarField discrete_rhs(const ScalarField& s, const ScalarField& tdot_eps,
                         const ModelParams& params, const ScalarField* source)
{
    if (tdot_eps.size() != s.size() || (source && source->size() != s.size()))
        throw std::invalid_argument("discrete_rhs: fields live on different grids");
    require_finite(s.view(), "order parameter", 0, 0.0);
    require_finite(tdot_eps.view(), "coupling field", 0, 0.0);
    GradientData g;
    g.compute(s.view(), params.kappa, s.grid.dx());
    ScalarField out(s.grid);
    std::vector<double> flux;
    rhs_kernel(s.view(), tdot_eps.view(), source ? source->view() : std::span<const double>{}, g,
               params, s.grid.dx(), 0.0, flux, out.values);
    return out;
}

double flux_divergence_sum(const ScalarField& s, double kappa)
{
    const double dx = s.grid.dx();
    double total = 0.0;
    for (std::size_t i = 1; i + 1 < s.size(); ++i) {
        const double right = flux_primitive((s[i + 1] - s[i]) / dx, kappa);
        const double left = flux_primitive((s[i] - s[i - 1]) / dx, kappa);
        total += dx * (right - left) / dx;
    }
    return total;
}

double cfl_dt(const ScalarField& s, const ModelParams& params, double safety,
              double coupling_bound)
{
    GradientData g;
    g.compute(s.view(), params.kappa, s.grid.dx());
    std::vector<double> tdot(s.size(), 0.0), flux, out(s.size());
    const Bounds b = rhs_kernel(s.view(), tdot, {}, g, params, s.grid.dx(), coupling_bound, flux,
                                out);
    return dt_from_bounds(b, params, s.grid.dx(), safety);
}

std::pair<ScalarField, StepReport> step(const ScalarField& s, double t, const SolverConfig& config,
                                        const ModelParams& params, const BodyForce& b)
{
    params.validate();
    config.validate();
    const Grid& grid = s.grid;
    const double dx = grid.dx();
    require_finite(s.view(), "order parameter", 0, t);
    const ElasticityOperator op(params.stiffness, params.misfit, grid);
    const Vec3Field bf = b.sample(t, grid);
    const CorrectionPair corr =
        b.kind == BodyForce::Kind::Zero ? op.zero_correction() : op.solve_correction(bf);
    std::vector<double> tdot(s.size()), src, flux, rate(s.size());
    op.coupling_field(s.view(), corr, tdot);
    if (config.source) {
        src.assign(s.size(), 0.0);
        config.source(t, grid, src);
    }
    GradientData g;
    g.compute(s.view(), params.kappa, dx);
    const Bounds bounds = rhs_kernel(s.view(), tdot, src, g, params, dx, max_abs_of(tdot), flux, rate);
    const double dt = config.dt_override > 0.0 ? config.dt_override
                                               : dt_from_bounds(bounds, params, dx, config.cfl_safety);
    ScalarField next = s;
    for (std::size_t i = 0; i < s.size(); ++i)
        next[i] += dt * rate[i];
    require_finite(next.view(), "order parameter", 1, t + dt);

    StepReport r;
    r.t = t + dt;
    r.dt = dt;
    r.max_abs_S = next.max_abs();
    r.max_weight = smoothed_abs(bounds.max_forward, params.kappa);
    r.reaction_max = bounds.reaction_max;
    r.elasticity_residual = equilibrium_residual(op.assemble_stress(s, corr).T, bf, grid);
    return {std::move(next), r};
}

RunResult run_with_effective(const ScalarField& s0, const ModelParams& params,
                             const SolverConfig& config, const BodyForce& b,
                             const EffectiveOrder& effective)
{
    params.validate();
    config.validate();
    Integrator integ(s0, params, config, b, effective);
    return integ.run();
}

RunResult run(const ScalarField& s0, const ModelParams& params, const SolverConfig& config,
              const BodyForce& b)
{
    params.validate();
    config.validate();
    switch (config.coupling) {
    case CouplingMode::Direct:
        return run_with_effective(s0, params, config, b, {});
    case CouplingMode::Mollified: {
        bool truncated = false;
        CausalHistory history(s0, params, config.mollifier_samples);
        history.truncated_ = &truncated;
        Integrator integ(s0, params, config, b, std::ref(history));
        RunResult r = integ.run();
        r.kernel_truncated = truncated;
        return r;
    }
    case CouplingMode::Picard: {
        SolverConfig first = config;
        first.coupling = CouplingMode::Mollified;
        RunResult prev = run(s0, params, first, b);
        std::vector<double> distances;
        for (int k = 0; k < config.picard_sweeps; ++k) {
            PicardSweep sweep = picard_sweep(prev.traj, params, config, b);
            distances.push_back(sweep.distance);
            prev = std::move(sweep.result);
        }
        prev.picard_distances = std::move(distances);
        return prev;
    }
    }
    throw std::invalid_argument("run: unknown coupling mode");
}

PicardSweep picard_sweep(const Trajectory& traj_in, const ModelParams& params,
                         const SolverConfig& config, const BodyForce& b)
{
    if (traj_in.end_time() < params.t_end * (1.0 - 1e-12))
        throw std::invalid_argument("picard_sweep: input trajectory does not reach t_end");
    const MollifierKernel kernel(params.kappa, MollifierKernel::Support::Centered,
                                 config.mollifier_samples);
    bool truncated = false;
    EffectiveOrder eff = [&](double t, std::span<const double>, std::span<double> out) {
        const MollifiedSlice m = mollify_time(traj_in, kernel, t, params.t_end);
        truncated = truncated || m.truncated;
        std::copy(m.field.values.begin(), m.field.values.end(), out.begin());
    };
    PicardSweep sweep{run_with_effective(traj_in.initial(), params, config, b, eff), 0.0};
    sweep.result.kernel_truncated = truncated;
    sweep.distance = l2q_distance(traj_in, sweep.result.traj);
    return sweep;
}

ProfileKind parse_profile_kind(const std::string& name)
{
    if (name == "sine")
        return ProfileKind::Sine;
    if (name == "smoothed_step")
        return ProfileKind::SmoothedStep;
    if (name == "polynomial_bump")
        return ProfileKind::PolynomialBump;
    throw std::invalid_argument("unknown initial profile '" + name +
                                "' (expected sine, smoothed_step or polynomial_bump)");
}

std::string to_string(ProfileKind kind)
{
    switch (kind) {
    case ProfileKind::Sine:
        return "sine";
    case ProfileKind::SmoothedStep:
        return "smoothed_step";
    case ProfileKind::PolynomialBump:
        return "polynomial_bump";
    }
    return "unknown";
}

ScalarField make_initial_profile(ProfileKind kind, double amplitude, const Grid& grid,
                                 double width)
{
    const double len = grid.length();
    if (kind == ProfileKind::SmoothedStep && !(width > 0.0 && width <= 0.5 * len))
        throw std::invalid_argument("make_initial_profile: ramp width must lie in (0, L/2]");
    ScalarField s(grid);
    const auto ramp = [](double u) { return u * u * u * (10.0 - 15.0 * u + 6.0 * u * u); };
    for (int i = 1; i < grid.cells(); ++i) {
        const double xi = (grid.x(i) - grid.a()) / len;
        double v = 0.0;
        switch (kind) {
        case ProfileKind::Sine:
            v = std::sin(M_PI * xi);
            break;
        case ProfileKind::SmoothedStep: {
            const double left = std::min(grid.x(i) - grid.a(), width) / width;
            const double right = std::min(grid.d() - grid.x(i), width) / width;
            v = std::clamp(ramp(left) * ramp(right), 0.0, 1.0);
            break;
        }
        case ProfileKind::PolynomialBump:
            v = 16.0 * xi * xi * (1.0 - xi) * (1.0 - xi);
            break;
        }
        s[static_cast<std::size_t>(i)] = amplitude * v;
    }
    return s;
}

ScalarField reflect(const ScalarField& s)
{
    ScalarField out(s.grid);
    const std::size_t n = s.size();
    for (std::size_t i = 0; i < n; ++i)
        out[i] = s[n - 1 - i];
    return out;
}

} // namespace cfphase
