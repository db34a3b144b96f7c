#include "cfphase/convergence.hpp"

#include "cfphase/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <memory>
#include <sstream>
#include <stdexcept>

namespace cfphase {

namespace {

double ipow(double base, int m)
{
    double r = 1.0;
    for (int k = 0; k < m; ++k)
        r *= base;
    return r;
}

template <class Transform>
double transformed_gradient_distance(const Trajectory& a, const Trajectory& b, int time_samples,
                                     Transform f)
{
    if (!(a.grid() == b.grid()))
        throw std::invalid_argument("distance: trajectories live on different grids");
    if (time_samples < 1)
        throw std::invalid_argument("distance: need at least one time interval");
    const double horizon = std::min(a.end_time(), b.end_time());
    const double ht = horizon / time_samples;
    const double dx = a.grid().dx();
    std::vector<double> per_time(static_cast<std::size_t>(time_samples) + 1);
    for (int k = 0; k <= time_samples; ++k) {
        const double t = k == time_samples ? horizon : k * ht;
        const ScalarField sa = a.at(t), sb = b.at(t);
        double sum = 0.0;
        for (std::size_t i = 0; i + 1 < sa.size(); ++i) {
            const double ga = f((sa[i + 1] - sa[i]) / dx);
            const double gb = f((sb[i + 1] - sb[i]) / dx);
            sum += (ga - gb) * (ga - gb);
        }
        per_time[static_cast<std::size_t>(k)] = sum * dx;
    }
    return std::sqrt(trapezoid(per_time, ht));
}

double phi_l1_l2_norm(const TestFunction& phi, double t_end, double a, double d)
{
    constexpr int kTime = 1024, kSpace = 2048;
    const double ht = t_end / kTime, hx = (d - a) / kSpace;
    std::vector<double> per_time(kTime + 1), sq(kSpace + 1);
    for (int k = 0; k <= kTime; ++k) {
        const double t = k * ht;
        for (int i = 0; i <= kSpace; ++i) {
            const double v = phi.value(t, a + i * hx);
            sq[static_cast<std::size_t>(i)] = v * v;
        }
        per_time[static_cast<std::size_t>(k)] = std::sqrt(trapezoid(sq, hx));
    }
    return trapezoid(per_time, ht);
}

} // namespace

// -------------------------------------------------------------- TestFunction

TestFunction::TestFunction(std::vector<Term> terms, double t_end, double a, double d)
    : terms_(std::move(terms)), t_end_(t_end), a_(a), d_(d)
{
    if (!(t_end > 0.0) || !(a < d))
        throw std::invalid_argument("TestFunction: need t_end > 0 and a < d");
    for (const auto& term : terms_)
        if (term.m < 0 || term.n < 1)
            throw std::invalid_argument("TestFunction: need m >= 0 and n >= 1");
}

TestFunction TestFunction::mode(int m, int n, double t_end, double a, double d)
{
    return TestFunction({{1.0, m, n}}, t_end, a, d);
}

double TestFunction::value(double t, double x) const
{
    const double tau = 1.0 - t / t_end_;
    const double xi = M_PI * (x - a_) / (d_ - a_);
    double v = 0.0;
    for (const auto& term : terms_)
        v += term.coef * ipow(tau, term.m) * std::sin(term.n * xi);
    return v;
}

double TestFunction::dt(double t, double x) const
{
    const double tau = 1.0 - t / t_end_;
    const double xi = M_PI * (x - a_) / (d_ - a_);
    double v = 0.0;
    for (const auto& term : terms_)
        if (term.m > 0)
            v -= term.coef * term.m * ipow(tau, term.m - 1) / t_end_ * std::sin(term.n * xi);
    return v;
}

double TestFunction::dx(double t, double x) const
{
    const double tau = 1.0 - t / t_end_;
    const double k = M_PI / (d_ - a_);
    const double xi = k * (x - a_);
    double v = 0.0;
    for (const auto& term : terms_)
        v += term.coef * ipow(tau, term.m) * term.n * k * std::cos(term.n * xi);
    return v;
}

TestFunction TestFunction::combine(double alpha, const TestFunction& f, double beta,
                                   const TestFunction& g)
{
    if (f.t_end_ != g.t_end_ || f.a_ != g.a_ || f.d_ != g.d_)
        throw std::invalid_argument("TestFunction::combine: mismatched horizons or domains");
    std::vector<Term> terms;
    for (const auto& t : f.terms_)
        terms.push_back({alpha * t.coef, t.m, t.n});
    for (const auto& t : g.terms_)
        terms.push_back({beta * t.coef, t.m, t.n});
    return TestFunction(std::move(terms), f.t_end_, f.a_, f.d_);
}

std::string TestFunction::label() const
{
    std::ostringstream out;
    for (std::size_t j = 0; j < terms_.size(); ++j) {
        if (j)
            out << '+';
        if (terms_[j].coef != 1.0)
            out << terms_[j].coef << '*';
        out << "phi_" << terms_[j].m << '_' << terms_[j].n;
    }
    return out.str();
}

std::vector<TestFunction> test_family(double t_end, double a, double d, int M, int Nf)
{
    std::vector<TestFunction> out;
    for (int m = 1; m <= M; ++m)
        for (int n = 1; n <= Nf; ++n)
            out.push_back(TestFunction::mode(m, n, t_end, a, d));
    return out;
}

// -------------------------------------------------------------- weak residual

double spatial_pairing(const ScalarField& s, std::span<const double> tdot_eps,
                       const ModelParams& params, const TestFunction& phi, double t,
                       ResidualForm form)
{
    const Grid& grid = s.grid;
    const double dx = grid.dx();
    const std::size_t n = s.size();
    if (tdot_eps.size() != n)
        throw std::invalid_argument("spatial_pairing: coupling field has the wrong size");
    const bool limit = form == ResidualForm::Limit;

    double flux_sum = 0.0;
    for (std::size_t i = 0; i + 1 < n; ++i) {
        const double p = (s[i + 1] - s[i]) / dx;
        const double flux = limit ? 0.5 * std::abs(p) * p : flux_primitive(p, params.kappa);
        const double mid = grid.a() + (static_cast<double>(i) + 0.5) * dx;
        flux_sum += flux * phi.dx(t, mid);
    }
    // Interior nodes only: phi vanishes at both endpoints.
    double reaction_sum = 0.0;
    for (std::size_t i = 1; i + 1 < n; ++i) {
        const double p = (s[i + 1] - s[i - 1]) / (2.0 * dx);
        const double factor = limit ? std::abs(p) : smoothed_abs(p, params.kappa) - params.kappa;
        const double force = tdot_eps[i] - params.potential.derivative(s[i]);
        reaction_sum += force * factor * phi.value(t, grid.x(static_cast<int>(i)));
    }
    return -params.c * params.nu * flux_sum * dx + params.c * reaction_sum * dx;
}

WeakResidual weak_residual(const Trajectory& traj, const std::vector<ScalarField>& tdot_eps,
                           const ScalarField& s0, const ModelParams& params,
                           const TestFunction& phi, ResidualForm form)
{
    const auto& snaps = traj.snapshots();
    if (tdot_eps.size() != snaps.size()) {
        std::ostringstream msg;
        msg << "weak_residual: " << snaps.size() << " snapshots but " << tdot_eps.size()
            << " coupling fields";
        throw std::invalid_argument(msg.str());
    }
    if (!(s0.grid == traj.grid()))
        throw std::invalid_argument("weak_residual: initial data lives on a different grid");
    const Grid& grid = traj.grid();
    const double dx = grid.dx();
    const std::size_t n = grid.nodes();

    const auto nodal_pairing = [&](const ScalarField& s, double t, bool derivative) {
        std::vector<double> prod(n);
        for (std::size_t i = 0; i < n; ++i) {
            const double x = grid.x(static_cast<int>(i));
            prod[i] = s[i] * (derivative ? phi.dt(t, x) : phi.value(t, x));
        }
        return trapezoid(prod, dx);
    };

    std::vector<double> integrand(snaps.size()), times(snaps.size());
    for (std::size_t k = 0; k < snaps.size(); ++k) {
        const double t = snaps[k].t;
        times[k] = t;
        integrand[k] = nodal_pairing(snaps[k].S, t, true) +
                       spatial_pairing(snaps[k].S, tdot_eps[k].view(), params, phi, t, form);
    }
    WeakResidual r;
    r.raw = (snaps.size() > 1 ? trapezoid(integrand, times) : 0.0) +
            nodal_pairing(s0, 0.0, false) - nodal_pairing(snaps.back().S, snaps.back().t, false);
    const double norm = phi_l1_l2_norm(phi, params.t_end, grid.a(), grid.d());
    r.normalized = norm > 0.0 ? r.raw / norm : 0.0;
    return r;
}

double compactness_distance(const Trajectory& a, const Trajectory& b, int time_samples)
{
    return transformed_gradient_distance(a, b, time_samples, sqrt_flux_primitive_limit);
}

double flux_distance(const Trajectory& a, const Trajectory& b, int time_samples)
{
    return transformed_gradient_distance(a, b, time_samples,
                                         [](double p) { return 0.5 * std::abs(p) * p; });
}

ReactionGap reaction_gap(const Trajectory& traj, double kappa)
{
    const auto& snaps = traj.snapshots();
    const double dx = traj.grid().dx();
    std::vector<double> per_time(snaps.size()), times(snaps.size());
    for (std::size_t k = 0; k < snaps.size(); ++k) {
        const auto& s = snaps[k].S;
        double sum = 0.0;
        for (std::size_t i = 0; i + 1 < s.size(); ++i) {
            const double p = (s[i + 1] - s[i]) / dx;
            const double gap = (smoothed_abs(p, kappa) - kappa) - std::abs(p);
            sum += gap * gap;
        }
        per_time[k] = sum * dx;
        times[k] = snaps[k].t;
    }
    ReactionGap g;
    g.value = snaps.size() > 1 ? std::sqrt(trapezoid(per_time, times)) : 0.0;
    const double measure = traj.grid().length() * (traj.end_time() - traj.start_time());
    g.bound = 2.0 * kappa * std::sqrt(measure);
    g.holds = g.value <= g.bound;
    return g;
}

// -------------------------------------------------------- manufactured runs

double ManufacturedSolution::value(double t, double x, double a, double d) const
{
    return amplitude * std::exp(-t) * std::sin(M_PI * (x - a) / (d - a));
}

ScalarField ManufacturedSolution::sample(double t, const Grid& grid) const
{
    ScalarField s(grid);
    for (int i = 1; i < grid.cells(); ++i)
        s[static_cast<std::size_t>(i)] = value(t, grid.x(i), grid.a(), grid.d());
    return s;
}

SourceTerm ManufacturedSolution::source(const ModelParams& params) const
{
    const ElasticityOperator op(params.stiffness, params.misfit, Grid(params.a, params.d, 4));
    const double k_order = op.coupling_per_order();
    const double k_mean = op.coupling_per_mean();
    const double amp = amplitude;
    const ModelParams p = params;
    // sin/cos of the nodes are cached per grid; the hook runs every step.
    struct Table {
        Grid grid{0.0, 1.0, 4};
        std::vector<double> sin, cos;
    };
    auto table = std::make_shared<Table>();
    return [=](double t, const Grid& grid, std::span<double> out) {
        const double k = M_PI / grid.length();
        if (table->sin.size() != grid.nodes() || !(table->grid == grid)) {
            table->grid = grid;
            table->sin.resize(grid.nodes());
            table->cos.resize(grid.nodes());
            for (int i = 0; i <= grid.cells(); ++i) {
                const double xi = k * (grid.x(i) - grid.a());
                table->sin[static_cast<std::size_t>(i)] = std::sin(xi);
                table->cos[static_cast<std::size_t>(i)] = std::cos(xi);
            }
        }
        const double decay = amp * std::exp(-t);
        const double mean = decay * 2.0 / M_PI;
        out[0] = out[out.size() - 1] = 0.0;
        for (std::size_t i = 1; i + 1 < out.size(); ++i) {
            const double s = decay * table->sin[i];
            const double sx = decay * k * table->cos[i];
            const double sxx = -k * k * s;
            const double w = smoothed_abs(sx, p.kappa);
            const double tdot = k_order * s - k_mean * mean;
            const double st = -s;
            out[i] = st - p.c * p.nu * w * sxx - p.c * (tdot - p.potential.derivative(s)) * (w - p.kappa);
        }
    };
}

double OrderReport::min_order() const
{
    if (orders.empty())
        return std::numeric_limits<double>::quiet_NaN();
    return *std::min_element(orders.begin(), orders.end());
}

OrderReport manufactured_run(const ManufacturedSolution& exact, const ModelParams& params,
                             const SolverConfig& config, const std::vector<int>& cells,
                             int time_slices)
{
    if (time_slices < 1)
        throw std::invalid_argument("manufactured_run: time_slices must be >= 1");
    OrderReport report;
    for (int n : cells) {
        const Grid grid(params.a, params.d, n);
        SolverConfig cfg = config;
        cfg.coupling = CouplingMode::Direct;
        cfg.source = exact.source(params);
        cfg.snapshot_interval = params.t_end / time_slices;
        cfg.track_monitors = false;
        const RunResult r = run(exact.sample(0.0, grid), params, cfg, BodyForce::zero());

        const auto& snaps = r.traj.snapshots();
        std::vector<double> per_time(snaps.size()), times(snaps.size()), sq(grid.nodes());
        for (std::size_t k = 0; k < snaps.size(); ++k) {
            const ScalarField ref = exact.sample(snaps[k].t, grid);
            for (std::size_t i = 0; i < sq.size(); ++i) {
                const double e = snaps[k].S[i] - ref[i];
                sq[i] = e * e;
            }
            per_time[k] = trapezoid(sq, grid.dx());
            times[k] = snaps[k].t;
        }
        report.cells.push_back(n);
        report.errors.push_back(std::sqrt(trapezoid(per_time, times)));
        report.steps.push_back(r.steps);
    }
    for (std::size_t k = 0; k + 1 < report.errors.size(); ++k)
        report.orders.push_back(std::log2(report.errors[k] / report.errors[k + 1]));
    return report;
}

// ------------------------------------------------------------ kappa sweeps

const std::vector<std::string>& uniformity_monitors()
{
    static const std::vector<std::string> names = {
        "weighted_dissipation", "reciprocal_dissipation", "St_l2_sq_max", "dissipation_43",
        "grad_linf_83"};
    return names;
}

double monitor_by_name(const MonitorRow& row, const std::string& name)
{
    const auto& names = MonitorRow::column_names();
    const auto values = row.values();
    for (std::size_t k = 0; k < names.size(); ++k)
        if (names[k] == name)
            return values[k];
    throw std::invalid_argument("unknown monitor '" + name + "'");
}

bool SweepReport::all_ok() const
{
    return std::all_of(entries.begin(), entries.end(), [](const SweepEntry& e) { return e.ok; });
}

bool SweepReport::compactness_strictly_decreasing() const
{
    for (double d : compactness)
        if (!std::isfinite(d))
            return false;
    for (std::size_t k = 1; k < compactness.size(); ++k)
        if (!(compactness[k] < compactness[k - 1]))
            return false;
    return true;
}

bool SweepReport::uniform() const
{
    return !uniformity.empty() && std::all_of(uniformity.begin(), uniformity.end(),
                                              [](const UniformityVerdict& v) { return v.holds; });
}

SweepReport kappa_sweep(const ModelParams& base, const std::vector<double>& kappas,
                        const SweepSetup& setup)
{
    if (kappas.empty())
        throw std::invalid_argument("kappa_sweep: empty kappa list");
    for (std::size_t k = 0; k < kappas.size(); ++k) {
        if (!(kappas[k] > 0.0 && kappas[k] <= 1.0))
            throw std::invalid_argument("kappa_sweep: kappa must lie in (0,1]");
        if (k > 0 && !(kappas[k] < kappas[k - 1]))
            throw std::invalid_argument("kappa_sweep: kappa list must be strictly decreasing");
    }

    const auto one = [&](double kappa) {
        SweepEntry e;
        e.kappa = kappa;
        try {
            ModelParams p = base;
            p.kappa = kappa;
            RunResult r = run(setup.s0, p, setup.config, setup.body_force);
            if (!r.monitors.empty())
                e.final_row = r.monitors.final();
            for (const auto& phi : test_family(p.t_end, p.a, p.d, setup.family_m, setup.family_n))
                e.weak_residuals.push_back(
                    weak_residual(r.traj, r.coupling, setup.s0, p, phi).normalized);
            e.gap = reaction_gap(r.traj, kappa);
            e.result = std::move(r);
            e.ok = true;
        } catch (const std::exception& ex) {
            e.ok = false;
            e.error = ex.what();
        }
        return e;
    };

    SweepReport report;
    if (setup.concurrent) {
        std::vector<std::future<SweepEntry>> jobs;
        for (double kappa : kappas)
            jobs.push_back(std::async(std::launch::async, one, kappa));
        for (auto& j : jobs)
            report.entries.push_back(j.get());
    } else {
        for (double kappa : kappas)
            report.entries.push_back(one(kappa));
    }

    const double nan = std::numeric_limits<double>::quiet_NaN();
    for (std::size_t k = 0; k + 1 < report.entries.size(); ++k) {
        const auto& a = report.entries[k];
        const auto& b = report.entries[k + 1];
        if (a.ok && b.ok) {
            report.compactness.push_back(compactness_distance(a.result->traj, b.result->traj));
            report.flux.push_back(flux_distance(a.result->traj, b.result->traj));
        } else {
            report.compactness.push_back(nan);
            report.flux.push_back(nan);
        }
    }

    if (setup.config.track_monitors) {
        for (const auto& name : uniformity_monitors()) {
            UniformityVerdict v;
            v.monitor = name;
            bool any = false;
            for (const auto& e : report.entries) {
                if (!e.ok)
                    continue;
                const double x = monitor_by_name(e.final_row, name);
                v.min = any ? std::min(v.min, x) : x;
                v.max = any ? std::max(v.max, x) : x;
                any = true;
            }
            if (any) {
                v.ratio = v.min > 0.0 ? v.max / v.min : (v.max == 0.0 ? 1.0 : nan);
                v.holds = report.all_ok() && v.ratio <= SweepReport::kUniformityFactor;
            }
            report.uniformity.push_back(v);
        }
    }
    return report;
}

} // namespace cfphase
