#pragma once

// Discrete analogues of the kappa-uniform a priori estimates, evaluated as
// time series along a run. All quadratures are node/cell sums weighted by dx;
// time integrals are left Riemann sums over the solver's own step sequence.
//
//   S_x   ~ forward difference D+S on cells
//   |S_x|_k at nodes ~ |D0 S|_k with the central difference D0
//   S_xx  ~ 3-point second difference at interior nodes (Dirichlet neighbours)
//   S_t   ~ (S_new - S_old) / dt

#include "cfphase/core_model.hpp"

#include <array>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace cfphase {

/// Difference quotients of one slice, shared by the solver's right-hand side
/// and every monitor so both see identical arithmetic.
struct GradientData {
    std::vector<double> forward; ///< D+S_i, i = 0..N-1
    std::vector<double> weight;  ///< |D0 S_i|_k at interior nodes; kappa at the ends
    std::vector<double> second;  ///< D2 S_i at interior nodes; 0 at the ends

    void compute(std::span<const double> s, double kappa, double dx);
};

struct MonitorRow {
    double t = 0.0;
    double sup_abs_S = 0.0;              ///< max_x |S(t)|
    double running_sup_abs_S = 0.0;      ///< max over every step so far
    double grad_l2_sq = 0.0;             ///< ||S_x(t)||^2
    double weighted_dissipation = 0.0;   ///< int int |S_x|_k |S_xx|^2
    double reciprocal_dissipation = 0.0; ///< int int S_t^2 / |S_x|_k
    double st_l2_sq = 0.0;               ///< ||S_t(t)||^2
    double st_l2_sq_max = 0.0;           ///< sup over steps of ||S_t||^2
    double weighted_hessian_norm = 0.0;  ///< || |S_x|_k S_xx (t) ||
    double lyapunov = 0.0;               ///< int nu/2 |S_x|^2 + psi_hat(S)
    double dissipation_43 = 0.0;         ///< int int (|S_x|_k |S_xx|)^(4/3)
    double grad_linf_83 = 0.0;           ///< int ||S_x||_inf^(8/3)
    double weight_sq = 0.0;              ///< int int |S_x|_k^2 (Hoelder partner of dissipation_43)

    static constexpr std::size_t kColumns = 13;
    static const std::array<std::string_view, kColumns>& column_names();
    std::array<double, kColumns> values() const;
};

struct MonitorSeries {
    std::vector<MonitorRow> rows;

    bool empty() const { return rows.empty(); }
    const MonitorRow& final() const { return rows.back(); }
    /// Cumulative columns are non-decreasing and all entries finite and >= 0.
    bool well_formed() const;
};

// Per-slice functionals.
double grad_l2_sq(const ScalarField& s);
double lyapunov(const ScalarField& s, const ModelParams& params);
double weighted_hessian_norm(const ScalarField& s, const ModelParams& params);
double st_l2_sq(const ScalarField& s_new, const ScalarField& s_old, double dt);

// Per-step increments of the cumulative monitors (dt times the space sum).
double weighted_dissipation_increment(const ScalarField& s, double dt, const ModelParams& params);
double reciprocal_dissipation_increment(const ScalarField& s_new, const ScalarField& s_old,
                                        double dt, const ModelParams& params);
double dissipation_43_increment(const ScalarField& s, double dt, const ModelParams& params);
double grad_linf_83_increment(const ScalarField& s, double dt);
double weight_sq_increment(const ScalarField& s, double dt, const ModelParams& params);

/// Accumulates a MonitorSeries from the per-step gradient data. The solver
/// drives it; remaining_monitors() drives it from stored snapshots.
class MonitorAccumulator {
public:
    MonitorAccumulator(const ModelParams& params, double dx);

    void observe(std::span<const double> s);
    /// Increments whose integrand is evaluated at the start of the step.
    void add_step(const GradientData& old_grad, double dt);
    /// Rate-based increments; the weight uses the post-step gradient.
    void add_rate(const GradientData& new_grad, std::span<const double> delta, double dt);
    /// S_t at t = 0 taken from the discrete right-hand side.
    void set_initial_rate(std::span<const double> rate);

    MonitorRow row(double t, std::span<const double> s, const GradientData& grad) const;
    double running_sup() const { return running_sup_; }

private:
    ModelParams params_;
    double dx_;
    double running_sup_ = 0.0;
    double weighted_ = 0.0, reciprocal_ = 0.0, d43_ = 0.0, linf83_ = 0.0, weight_sq_ = 0.0;
    double st_sq_ = 0.0, st_sq_max_ = 0.0;
};

/// Monitor series recomputed from a trajectory, treating consecutive
/// snapshots as steps. With a snapshot at every solver step this reproduces
/// the solver's series. initial_rate supplies S_t at t = 0 (else zero).
MonitorSeries remaining_monitors(const Trajectory& traj, const ModelParams& params,
                                 const std::optional<ScalarField>& initial_rate = std::nullopt);

/// Discrete Hoelder bound of the (4/3)-dissipation by the weighted dissipation
/// and int int |S_x|_k^2: D43 <= W2^(1/3) * WD^(2/3).
double holder_bound_43(const MonitorRow& row);

} // namespace cfphase
