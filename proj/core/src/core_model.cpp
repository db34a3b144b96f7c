#include "cfphase/core_model.hpp"

#include "cfphase/quadrature.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>

namespace cfphase {

namespace {

constexpr double kSqrt2 = 1.41421356237309504880;

// Mandel index of the (i, j) entry; off-diagonal coordinates carry sqrt(2).
int mandel_index(int i, int j)
{
    if (i == j)
        return i;
    const int lo = std::min(i, j), hi = std::max(i, j);
    if (lo == 1 && hi == 2)
        return 3;
    if (lo == 0 && hi == 2)
        return 4;
    return 5;
}

std::vector<double> differentiate(const std::vector<double>& c)
{
    if (c.size() <= 1)
        return {0.0};
    std::vector<double> out(c.size() - 1);
    for (std::size_t k = 1; k < c.size(); ++k)
        out[k - 1] = static_cast<double>(k) * c[k];
    return out;
}

double horner(const std::vector<double>& c, double s)
{
    double acc = 0.0;
    for (auto it = c.rbegin(); it != c.rend(); ++it)
        acc = acc * s + *it;
    return acc;
}

} // namespace

// ---------------------------------------------------------------- SymMatrix3

SymMatrix3 SymMatrix3::from_components(double xx, double yy, double zz, double yz, double xz,
                                       double xy)
{
    Mandel6 m;
    m << xx, yy, zz, kSqrt2 * yz, kSqrt2 * xz, kSqrt2 * xy;
    return from_mandel(m);
}

SymMatrix3 SymMatrix3::from_mandel(const Mandel6& m)
{
    SymMatrix3 out;
    out.m_ = m;
    return out;
}

SymMatrix3 SymMatrix3::from_matrix(const Mat3& m)
{
    const Mat3 s = 0.5 * (m + m.transpose());
    return from_components(s(0, 0), s(1, 1), s(2, 2), s(1, 2), s(0, 2), s(0, 1));
}

SymMatrix3 SymMatrix3::diag(double xx, double yy, double zz)
{
    return from_components(xx, yy, zz, 0.0, 0.0, 0.0);
}

SymMatrix3 SymMatrix3::sym_first_column(const Vec3& v)
{
    return from_components(v(0), 0.0, 0.0, 0.0, 0.5 * v(2), 0.5 * v(1));
}

double SymMatrix3::operator()(int i, int j) const
{
    const int k = mandel_index(i, j);
    return k < 3 ? m_(k) : m_(k) / kSqrt2;
}

Mat3 SymMatrix3::to_matrix() const
{
    Mat3 out;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            out(i, j) = (*this)(i, j);
    return out;
}

Vec3 SymMatrix3::first_column() const { return Vec3((*this)(0, 0), (*this)(1, 0), (*this)(2, 0)); }

double mat_dot(const SymMatrix3& a, const SymMatrix3& b) { return a.mandel().dot(b.mandel()); }

// ------------------------------------------------------------- ElasticTensor

ElasticTensor::ElasticTensor(const Mat6& mandel) : d_(mandel)
{
    for (int i = 0; i < 6; ++i)
        for (int j = i + 1; j < 6; ++j)
            if (d_(i, j) != d_(j, i))
                throw std::invalid_argument("ElasticTensor: matrix is not symmetric");
    if (!d_.allFinite())
        throw std::invalid_argument("ElasticTensor: non-finite entry");
    Eigen::LLT<Mat6> llt(d_);
    if (llt.info() != Eigen::Success)
        throw std::invalid_argument("ElasticTensor: matrix is not positive definite");
}

ElasticTensor ElasticTensor::identity() { return ElasticTensor(Mat6::Identity()); }

ElasticTensor ElasticTensor::isotropic(double lambda, double mu)
{
    Mat6 d = Mat6::Zero();
    d.topLeftCorner<3, 3>().setConstant(lambda);
    d += 2.0 * mu * Mat6::Identity();
    return ElasticTensor(d);
}

SymMatrix3 ElasticTensor::apply(const SymMatrix3& eps) const
{
    return SymMatrix3::from_mandel(d_ * eps.mandel());
}

// ---------------------------------------------------------------- DoubleWell

DoubleWell DoubleWell::quartic()
{
    DoubleWell w;
    w.c0_ = {0.0, 0.0, 1.0, -2.0, 1.0};
    w.c1_ = differentiate(w.c0_);
    w.c2_ = differentiate(w.c1_);
    w.s_minus_ = 0.0;
    w.s_star_ = 0.5;
    w.s_plus_ = 1.0;
    w.quartic_ = true;
    return w;
}

DoubleWell DoubleWell::polynomial(std::vector<double> coeffs, double s_minus, double s_star,
                                  double s_plus)
{
    if (coeffs.empty())
        throw std::invalid_argument("DoubleWell: empty coefficient list");
    if (!(s_minus < s_star && s_star < s_plus))
        throw std::invalid_argument("DoubleWell: wells must satisfy S_minus < S_star < S_plus");
    DoubleWell w;
    w.c0_ = std::move(coeffs);
    w.c1_ = differentiate(w.c0_);
    w.c2_ = differentiate(w.c1_);
    w.s_minus_ = s_minus;
    w.s_star_ = s_star;
    w.s_plus_ = s_plus;

    constexpr int kSamples = 1000;
    const double span = s_plus - s_minus;
    for (int k = 0; k <= kSamples; ++k) {
        const double s = s_minus - span + 3.0 * span * k / kSamples;
        if (w.value(s) < 0.0)
            throw std::invalid_argument("DoubleWell: psi_hat negative at S = " + std::to_string(s));
    }
    for (int k = 1; k < kSamples; ++k) {
        const double left = s_minus + (s_star - s_minus) * k / kSamples;
        const double right = s_star + (s_plus - s_star) * k / kSamples;
        if (!(w.derivative(left) > 0.0))
            throw std::invalid_argument("DoubleWell: psi_hat' must be > 0 on (S_minus, S_star)");
        if (!(w.derivative(right) < 0.0))
            throw std::invalid_argument("DoubleWell: psi_hat' must be < 0 on (S_star, S_plus)");
    }
    return w;
}

double DoubleWell::value(double s) const
{
    if (quartic_) {
        const double q = s * (1.0 - s);
        return q * q;
    }
    return horner(c0_, s);
}

double DoubleWell::derivative(double s) const
{
    if (quartic_)
        return 2.0 * s * (1.0 - s) * (1.0 - 2.0 * s);
    return horner(c1_, s);
}

double DoubleWell::second_derivative(double s) const
{
    if (quartic_)
        return 2.0 - 12.0 * s + 12.0 * s * s;
    return horner(c2_, s);
}

// --------------------------------------------------------------- ModelParams

std::vector<std::string> ModelParams::violations() const
{
    std::vector<std::string> out;
    if (!(c > 0.0))
        out.emplace_back("c must be > 0");
    if (!(nu > 0.0))
        out.emplace_back("nu must be > 0");
    if (!(kappa > 0.0 && kappa <= 1.0))
        out.emplace_back("kappa must lie in (0,1]");
    if (!(a < d))
        out.emplace_back("domain endpoints must satisfy a < d");
    if (!(t_end > 0.0))
        out.emplace_back("t_end must be > 0");
    if (!misfit.mandel().allFinite())
        out.emplace_back("misfit strain must be finite");
    return out;
}

void ModelParams::validate() const
{
    const auto v = violations();
    if (v.empty())
        return;
    std::ostringstream msg;
    msg << "invalid model parameters:";
    for (const auto& s : v)
        msg << ' ' << s << ';';
    throw std::invalid_argument(msg.str());
}

// ---------------------------------------------------------------------- Grid

Grid::Grid(double a, double d, int cells) : a_(a), d_(d), n_(cells), dx_((d - a) / cells)
{
    if (cells < 4)
        throw std::invalid_argument("Grid: need at least 4 cells, got " + std::to_string(cells));
    if (!(a < d))
        throw std::invalid_argument("Grid: need a < d");
}

// --------------------------------------------------------------- ScalarField

ScalarField::ScalarField(const Grid& g, std::vector<double> v) : grid(g), values(std::move(v))
{
    if (values.size() != grid.nodes())
        throw std::invalid_argument("ScalarField: expected " + std::to_string(grid.nodes()) +
                                    " values, got " + std::to_string(values.size()));
}

bool ScalarField::all_finite() const
{
    return std::all_of(values.begin(), values.end(), [](double v) { return std::isfinite(v); });
}

double ScalarField::max_abs() const
{
    double m = 0.0;
    for (double v : values)
        m = std::max(m, std::abs(v));
    return m;
}

// ---------------------------------------------------------------- Trajectory

Trajectory::Trajectory(const ScalarField& initial) : grid_(initial.grid), initial_(initial)
{
    snaps_.push_back({0.0, initial});
}

void Trajectory::push(double t, const ScalarField& s)
{
    if (!(s.grid == grid_))
        throw std::invalid_argument("Trajectory: snapshot grid differs from trajectory grid");
    if (!(t > snaps_.back().t))
        throw std::invalid_argument("Trajectory: snapshot times must increase strictly");
    snaps_.push_back({t, s});
}

void Trajectory::replace_back(double t, const ScalarField& s)
{
    if (snaps_.size() < 2) {
        push(t, s);
        return;
    }
    if (!(s.grid == grid_))
        throw std::invalid_argument("Trajectory: snapshot grid differs from trajectory grid");
    if (!(t > snaps_[snaps_.size() - 2].t))
        throw std::invalid_argument("Trajectory: snapshot times must increase strictly");
    snaps_.back() = {t, s};
}

std::vector<double> Trajectory::times() const
{
    std::vector<double> out;
    out.reserve(snaps_.size());
    for (const auto& s : snaps_)
        out.push_back(s.t);
    return out;
}

ScalarField Trajectory::at(double t) const
{
    if (t <= snaps_.front().t)
        return snaps_.front().S;
    if (t >= snaps_.back().t)
        return snaps_.back().S;
    auto it = std::upper_bound(snaps_.begin(), snaps_.end(), t,
                               [](double v, const Snapshot& s) { return v < s.t; });
    const Snapshot& hi = *it;
    const Snapshot& lo = *(it - 1);
    const double theta = (t - lo.t) / (hi.t - lo.t);
    ScalarField out(grid_);
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = (1.0 - theta) * lo.S[i] + theta * hi.S[i];
    return out;
}

void Trajectory::prune_before(double t_keep)
{
    std::size_t first = 0;
    while (first + 1 < snaps_.size() && snaps_[first + 1].t <= t_keep)
        ++first;
    if (first > 0)
        snaps_.erase(snaps_.begin(), snaps_.begin() + static_cast<std::ptrdiff_t>(first));
}

double l2q_distance(const Trajectory& a, const Trajectory& b, int time_samples)
{
    if (!(a.grid() == b.grid()))
        throw std::invalid_argument("l2q_distance: trajectories live on different grids");
    if (time_samples < 1)
        throw std::invalid_argument("l2q_distance: need at least one time interval");
    const double horizon = std::min(a.end_time(), b.end_time());
    const double ht = horizon / time_samples;
    const double dx = a.grid().dx();
    std::vector<double> per_time(static_cast<std::size_t>(time_samples) + 1);
    for (int k = 0; k <= time_samples; ++k) {
        const double t = k == time_samples ? horizon : k * ht;
        const ScalarField sa = a.at(t), sb = b.at(t);
        std::vector<double> diff_sq(sa.size());
        for (std::size_t i = 0; i < sa.size(); ++i)
            diff_sq[i] = (sa[i] - sb[i]) * (sa[i] - sb[i]);
        per_time[static_cast<std::size_t>(k)] = trapezoid(diff_sq, dx);
    }
    return std::sqrt(trapezoid(per_time, ht));
}

// ------------------------------------------------------------ scalar kernels

double flux_primitive(double p, double kappa)
{
    const double s = std::abs(p);
    const double r = std::sqrt(s * s + kappa * kappa);
    const double value = 0.5 * (s * r + kappa * kappa * std::asinh(s / kappa));
    return p < 0.0 ? -value : value;
}

double sqrt_flux_primitive(double p, double kappa)
{
    if (kappa < 0.0)
        throw std::invalid_argument("sqrt_flux_primitive: kappa must be >= 0");
    if (kappa == 0.0)
        return sqrt_flux_primitive_limit(p);
    const double k2 = kappa * kappa;
    const double s = std::abs(p);
    const double value =
        adaptive_simpson([k2](double y) { return std::sqrt(std::sqrt(k2 + y * y)); }, 0.0, s, 1e-12);
    return p < 0.0 ? -value : value;
}

double free_energy(const SymMatrix3& eps, double s, const ModelParams& params)
{
    const SymMatrix3 elastic = eps - params.misfit * s;
    return 0.5 * mat_dot(params.stiffness.apply(elastic), elastic) + params.potential.value(s);
}

double driving_force(const SymMatrix3& stress, double s, const ModelParams& params)
{
    return params.c * (mat_dot(stress, params.misfit) - params.potential.derivative(s));
}

} // namespace cfphase
