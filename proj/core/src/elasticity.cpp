#include "cfphase/elasticity.hpp"

#include "cfphase/quadrature.hpp"

#include <algorithm>
#include <numbers>
#include <stdexcept>

namespace cfphase {

Mat3 acoustic_matrix(const ElasticTensor& stiffness)
{
    Mat3 m;
    for (int k = 0; k < 3; ++k) {
        const SymMatrix3 unit = SymMatrix3::sym_first_column(Vec3::Unit(k));
        m.col(k) = stiffness.apply(unit).first_column();
    }
    return m;
}

UStar compute_ustar(const ElasticTensor& stiffness, const SymMatrix3& misfit)
{
    const Mat3 m = acoustic_matrix(stiffness);
    Eigen::LLT<Mat3> llt(m);
    if (llt.info() != Eigen::Success)
        throw std::invalid_argument("compute_ustar: acoustic matrix is not positive definite");
    const Vec3 rhs = stiffness.apply(misfit).first_column();
    const Vec3 u = llt.solve(rhs);
    return {u, SymMatrix3::sym_first_column(u)};
}

ElasticityOperator::ElasticityOperator(const ElasticTensor& stiffness, const SymMatrix3& misfit,
                                       const Grid& grid)
    : stiffness_(stiffness),
      misfit_(misfit),
      grid_(grid),
      acoustic_(acoustic_matrix(stiffness)),
      acoustic_llt_(acoustic_),
      ustar_(compute_ustar(stiffness, misfit))
{
    per_order_ = stiffness_.apply(ustar_.eps_star - misfit_);
    per_mean_ = stiffness_.apply(ustar_.eps_star);
    k_order_ = mat_dot(misfit_, per_order_);
    k_mean_ = mat_dot(misfit_, per_mean_);
}

double ElasticityOperator::mean(std::span<const double> s) const
{
    return trapezoid(s, grid_.dx()) / grid_.length();
}

CorrectionPair ElasticityOperator::zero_correction() const
{
    const std::size_t n = grid_.nodes();
    return {Vec3Field(n, Vec3::Zero()), Vec3Field(n, Vec3::Zero()), Vec3Field(n, Vec3::Zero()),
            std::vector<double>(n, 0.0)};
}

CorrectionPair ElasticityOperator::solve_correction(const Vec3Field& b) const
{
    const std::size_t n = grid_.nodes();
    if (b.size() != n)
        throw std::invalid_argument("solve_correction: body force not sampled on the grid");
    const double h = grid_.dx();

    // B(x) = int_a^x b, componentwise cumulative trapezoid.
    Vec3Field integral(n, Vec3::Zero());
    for (std::size_t i = 1; i < n; ++i)
        integral[i] = integral[i - 1] + 0.5 * h * (b[i - 1] + b[i]);
    Vec3 total = 0.5 * (integral.front() + integral.back());
    for (std::size_t i = 1; i + 1 < n; ++i)
        total += integral[i];
    const Vec3 offset = total * h / grid_.length();

    CorrectionPair out = zero_correction();
    for (std::size_t i = 0; i < n; ++i) {
        out.sigma1[i] = offset - integral[i];
        out.w_x[i] = acoustic_llt_.solve(out.sigma1[i]);
    }
    for (std::size_t i = 1; i < n; ++i)
        out.w[i] = out.w[i - 1] + 0.5 * h * (out.w_x[i - 1] + out.w_x[i]);
    for (std::size_t i = 0; i < n; ++i) {
        const SymMatrix3 sigma = stiffness_.apply(SymMatrix3::sym_first_column(out.w_x[i]));
        out.misfit_dot_sigma[i] = mat_dot(misfit_, sigma);
    }
    return out;
}

StressField ElasticityOperator::assemble_stress(const ScalarField& s_eff,
                                                const CorrectionPair& corr) const
{
    const std::size_t n = grid_.nodes();
    const double m = mean(s_eff.view());
    StressField out{std::vector<SymMatrix3>(n), ScalarField(grid_)};
    for (std::size_t i = 0; i < n; ++i) {
        const SymMatrix3 sigma = stiffness_.apply(SymMatrix3::sym_first_column(corr.w_x[i]));
        out.T[i] = per_order_ * s_eff[i] - per_mean_ * m + sigma;
    }
    coupling_field(s_eff.view(), corr, out.tdot_eps.values);
    return out;
}

void ElasticityOperator::coupling_field(std::span<const double> s_eff, const CorrectionPair& corr,
                                        std::span<double> out) const
{
    const double m = mean(s_eff);
    const double shift = k_mean_ * m;
    for (std::size_t i = 0; i < s_eff.size(); ++i)
        out[i] = k_order_ * s_eff[i] - shift + corr.misfit_dot_sigma[i];
}

Vec3Field ElasticityOperator::assemble_displacement(const ScalarField& s_eff,
                                                    const CorrectionPair& corr) const
{
    const std::size_t n = grid_.nodes();
    const auto running = cumulative_trapezoid(s_eff.view(), grid_.dx());
    const double total = running.back();
    Vec3Field u(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double frac = (grid_.x(static_cast<int>(i)) - grid_.a()) / grid_.length();
        u[i] = ustar_.u_star * (running[i] - frac * total) + corr.w[i];
    }
    return u;
}

// ----------------------------------------------------------------- BodyForce

BodyForce BodyForce::zero() { return {}; }

BodyForce BodyForce::constant(const Vec3& v)
{
    BodyForce b;
    b.kind = Kind::Constant;
    b.vector = v;
    return b;
}

BodyForce BodyForce::sine(const Vec3& amplitude, double wavenumber, double a, double d)
{
    BodyForce b;
    b.kind = Kind::Sine;
    b.vector = amplitude;
    b.wavenumber = wavenumber;
    b.origin = a;
    b.length = d - a;
    return b;
}

BodyForce BodyForce::custom(std::function<Vec3(double, double)> f, bool time_dependent)
{
    BodyForce b;
    b.kind = Kind::Custom;
    b.fn = std::move(f);
    b.time_dependent = time_dependent;
    return b;
}

Vec3 BodyForce::operator()(double t, double x) const
{
    switch (kind) {
    case Kind::Zero:
        return Vec3::Zero();
    case Kind::Constant:
        return vector;
    case Kind::Sine:
        return vector * std::sin(2.0 * std::numbers::pi * wavenumber * (x - origin) / length);
    case Kind::Custom:
        return fn(t, x);
    }
    return Vec3::Zero();
}

Vec3Field BodyForce::sample(double t, const Grid& grid) const
{
    Vec3Field out(grid.nodes());
    for (int i = 0; i <= grid.cells(); ++i)
        out[static_cast<std::size_t>(i)] = (*this)(t, grid.x(i));
    return out;
}

double equilibrium_residual(const std::vector<SymMatrix3>& stress, const Vec3Field& b,
                            const Grid& grid)
{
    double worst = 0.0;
    const double h2 = 2.0 * grid.dx();
    for (std::size_t i = 1; i + 1 < stress.size(); ++i) {
        const Vec3 dT1 = (stress[i + 1].first_column() - stress[i - 1].first_column()) / h2;
        worst = std::max(worst, (dT1 + b[i]).cwiseAbs().maxCoeff());
    }
    return worst;
}

} // namespace cfphase
