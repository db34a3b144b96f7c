#include "cfphase/estimates.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace cfphase {

namespace {

double pow43(double x) { return x * std::cbrt(x); }

double pow83(double x)
{
    const double x2 = x * x;
    return x2 * std::cbrt(x2);
}

// Space sums shared by the accumulator and the standalone functions.

double sum_grad_sq(const GradientData& g, double dx)
{
    double s = 0.0;
    for (double p : g.forward)
        s += p * p;
    return s * dx;
}

double sum_weighted_dissipation(const GradientData& g, double dx)
{
    double s = 0.0;
    for (std::size_t i = 1; i + 1 < g.weight.size(); ++i)
        s += g.weight[i] * g.second[i] * g.second[i];
    return s * dx;
}

double sum_dissipation_43(const GradientData& g, double dx)
{
    double s = 0.0;
    for (std::size_t i = 1; i + 1 < g.weight.size(); ++i)
        s += pow43(g.weight[i] * std::abs(g.second[i]));
    return s * dx;
}

double sum_weight_sq(const GradientData& g, double dx)
{
    double s = 0.0;
    for (std::size_t i = 1; i + 1 < g.weight.size(); ++i)
        s += g.weight[i] * g.weight[i];
    return s * dx;
}

double max_abs_forward(const GradientData& g)
{
    double m = 0.0;
    for (double p : g.forward)
        m = std::max(m, std::abs(p));
    return m;
}

double sum_hessian_sq(const GradientData& g, double dx)
{
    double s = 0.0;
    for (std::size_t i = 1; i + 1 < g.weight.size(); ++i) {
        const double v = g.weight[i] * g.second[i];
        s += v * v;
    }
    return s * dx;
}

// Nodal trapezoid; the end weights are kappa and the ends carry no change for
// Dirichlet data, so this matches the interior sum there.
double sum_reciprocal(const GradientData& g, std::span<const double> delta, double dt, double dx)
{
    const std::size_t n = delta.size();
    const auto term = [&](std::size_t i) {
        const double rate = delta[i] / dt;
        return rate * rate / g.weight[i];
    };
    double s = 0.5 * (term(0) + term(n - 1));
    for (std::size_t i = 1; i + 1 < n; ++i)
        s += term(i);
    return s * dx;
}

double sum_rate_sq(std::span<const double> delta, double dt, double dx)
{
    const std::size_t n = delta.size();
    const auto term = [&](std::size_t i) {
        const double rate = delta[i] / dt;
        return rate * rate;
    };
    double s = 0.5 * (term(0) + term(n - 1));
    for (std::size_t i = 1; i + 1 < n; ++i)
        s += term(i);
    return s * dx;
}

double sum_lyapunov(std::span<const double> s, const GradientData& g, const ModelParams& params,
                    double dx)
{
    double grad = 0.0;
    for (double p : g.forward)
        grad += p * p;
    double pot = 0.5 * (params.potential.value(s.front()) + params.potential.value(s.back()));
    for (std::size_t i = 1; i + 1 < s.size(); ++i)
        pot += params.potential.value(s[i]);
    return 0.5 * params.nu * grad * dx + pot * dx;
}

GradientData gradients(const ScalarField& s, double kappa)
{
    GradientData g;
    g.compute(s.view(), kappa, s.grid.dx());
    return g;
}

std::vector<double> difference(const ScalarField& a, const ScalarField& b)
{
    if (a.size() != b.size())
        throw std::invalid_argument("monitor: slices live on different grids");
    std::vector<double> out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i)
        out[i] = a[i] - b[i];
    return out;
}

} // namespace

void GradientData::compute(std::span<const double> s, double kappa, double dx)
{
    const std::size_t n = s.size();
    forward.resize(n - 1);
    weight.resize(n);
    second.resize(n);
    const double inv_dx = 1.0 / dx;
    const double k2 = kappa * kappa;
    for (std::size_t i = 0; i + 1 < n; ++i)
        forward[i] = (s[i + 1] - s[i]) * inv_dx;
    weight.front() = weight.back() = kappa;
    second.front() = second.back() = 0.0;
    for (std::size_t i = 1; i + 1 < n; ++i) {
        const double central = 0.5 * (forward[i] + forward[i - 1]);
        weight[i] = std::sqrt(k2 + central * central);
        second[i] = (forward[i] - forward[i - 1]) * inv_dx;
    }
}

const std::array<std::string_view, MonitorRow::kColumns>& MonitorRow::column_names()
{
    static const std::array<std::string_view, kColumns> names = {
        "t",
        "sup_abs_S",
        "running_sup_abs_S",
        "grad_l2_sq",
        "weighted_dissipation",
        "reciprocal_dissipation",
        "St_l2_sq",
        "St_l2_sq_max",
        "weighted_hessian_norm",
        "lyapunov",
        "dissipation_43",
        "grad_linf_83",
        "weight_sq",
    };
    return names;
}

std::array<double, MonitorRow::kColumns> MonitorRow::values() const
{
    return {t,
            sup_abs_S,
            running_sup_abs_S,
            grad_l2_sq,
            weighted_dissipation,
            reciprocal_dissipation,
            st_l2_sq,
            st_l2_sq_max,
            weighted_hessian_norm,
            lyapunov,
            dissipation_43,
            grad_linf_83,
            weight_sq};
}

bool MonitorSeries::well_formed() const
{
    const MonitorRow* prev = nullptr;
    for (const auto& r : rows) {
        const auto v = r.values();
        for (double x : v)
            if (!std::isfinite(x) || x < 0.0)
                return false;
        if (prev) {
            if (r.weighted_dissipation < prev->weighted_dissipation ||
                r.reciprocal_dissipation < prev->reciprocal_dissipation ||
                r.dissipation_43 < prev->dissipation_43 || r.grad_linf_83 < prev->grad_linf_83 ||
                r.weight_sq < prev->weight_sq || r.st_l2_sq_max < prev->st_l2_sq_max ||
                r.running_sup_abs_S < prev->running_sup_abs_S)
                return false;
        }
        prev = &r;
    }
    return true;
}

// ---------------------------------------------------------------- standalone

double grad_l2_sq(const ScalarField& s) { return sum_grad_sq(gradients(s, 0.0), s.grid.dx()); }

double lyapunov(const ScalarField& s, const ModelParams& params)
{
    return sum_lyapunov(s.view(), gradients(s, params.kappa), params, s.grid.dx());
}

double weighted_hessian_norm(const ScalarField& s, const ModelParams& params)
{
    return std::sqrt(sum_hessian_sq(gradients(s, params.kappa), s.grid.dx()));
}

double st_l2_sq(const ScalarField& s_new, const ScalarField& s_old, double dt)
{
    return sum_rate_sq(difference(s_new, s_old), dt, s_new.grid.dx());
}

double weighted_dissipation_increment(const ScalarField& s, double dt, const ModelParams& params)
{
    return dt * sum_weighted_dissipation(gradients(s, params.kappa), s.grid.dx());
}

double reciprocal_dissipation_increment(const ScalarField& s_new, const ScalarField& s_old,
                                        double dt, const ModelParams& params)
{
    if (!(dt > 0.0))
        throw std::invalid_argument("reciprocal_dissipation_increment: dt must be > 0");
    return dt * sum_reciprocal(gradients(s_new, params.kappa), difference(s_new, s_old), dt,
                               s_new.grid.dx());
}

double dissipation_43_increment(const ScalarField& s, double dt, const ModelParams& params)
{
    return dt * sum_dissipation_43(gradients(s, params.kappa), s.grid.dx());
}

double grad_linf_83_increment(const ScalarField& s, double dt)
{
    return dt * pow83(max_abs_forward(gradients(s, 0.0)));
}

double weight_sq_increment(const ScalarField& s, double dt, const ModelParams& params)
{
    return dt * sum_weight_sq(gradients(s, params.kappa), s.grid.dx());
}

// --------------------------------------------------------------- accumulator

MonitorAccumulator::MonitorAccumulator(const ModelParams& params, double dx)
    : params_(params), dx_(dx)
{
}

void MonitorAccumulator::observe(std::span<const double> s)
{
    for (double v : s)
        running_sup_ = std::max(running_sup_, std::abs(v));
}

void MonitorAccumulator::add_step(const GradientData& g, double dt)
{
    weighted_ += dt * sum_weighted_dissipation(g, dx_);
    d43_ += dt * sum_dissipation_43(g, dx_);
    linf83_ += dt * pow83(max_abs_forward(g));
    weight_sq_ += dt * sum_weight_sq(g, dx_);
}

void MonitorAccumulator::add_rate(const GradientData& g, std::span<const double> delta, double dt)
{
    reciprocal_ += dt * sum_reciprocal(g, delta, dt, dx_);
    st_sq_ = sum_rate_sq(delta, dt, dx_);
    st_sq_max_ = std::max(st_sq_max_, st_sq_);
}

void MonitorAccumulator::set_initial_rate(std::span<const double> rate)
{
    st_sq_ = sum_rate_sq(rate, 1.0, dx_);
    st_sq_max_ = std::max(st_sq_max_, st_sq_);
}

MonitorRow MonitorAccumulator::row(double t, std::span<const double> s,
                                   const GradientData& g) const
{
    MonitorRow r;
    r.t = t;
    for (double v : s)
        r.sup_abs_S = std::max(r.sup_abs_S, std::abs(v));
    r.running_sup_abs_S = running_sup_;
    r.grad_l2_sq = sum_grad_sq(g, dx_);
    r.weighted_dissipation = weighted_;
    r.reciprocal_dissipation = reciprocal_;
    r.st_l2_sq = st_sq_;
    r.st_l2_sq_max = st_sq_max_;
    r.weighted_hessian_norm = std::sqrt(sum_hessian_sq(g, dx_));
    r.lyapunov = sum_lyapunov(s, g, params_, dx_);
    r.dissipation_43 = d43_;
    r.grad_linf_83 = linf83_;
    r.weight_sq = weight_sq_;
    return r;
}

MonitorSeries remaining_monitors(const Trajectory& traj, const ModelParams& params,
                                 const std::optional<ScalarField>& initial_rate)
{
    const double dx = traj.grid().dx();
    MonitorAccumulator acc(params, dx);
    MonitorSeries out;
    GradientData g;
    const auto& snaps = traj.snapshots();
    g.compute(snaps.front().S.view(), params.kappa, dx);
    acc.observe(snaps.front().S.view());
    if (initial_rate)
        acc.set_initial_rate(initial_rate->view());
    out.rows.push_back(acc.row(snaps.front().t, snaps.front().S.view(), g));
    for (std::size_t k = 1; k < snaps.size(); ++k) {
        const double dt = snaps[k].t - snaps[k - 1].t;
        acc.add_step(g, dt);
        const auto delta = difference(snaps[k].S, snaps[k - 1].S);
        g.compute(snaps[k].S.view(), params.kappa, dx);
        acc.add_rate(g, delta, dt);
        acc.observe(snaps[k].S.view());
        out.rows.push_back(acc.row(snaps[k].t, snaps[k].S.view(), g));
    }
    return out;
}

double holder_bound_43(const MonitorRow& row)
{
    return std::cbrt(row.weight_sq) * std::pow(row.weighted_dissipation, 2.0 / 3.0);
}

} // namespace cfphase
