#pragma once

// Model primitives for the one-dimensional phase-transition system driven by
// configurational forces: symmetric matrices and the elasticity tensor, the
// double-well potential, model parameters, the spatial grid and the discrete
// fields that live on it, plus the smoothed absolute value |p|_k and the exact
// flux primitives used by the solver and the diagnostics.

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace cfphase {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Mandel6 = Eigen::Matrix<double, 6, 1>;
using Mat6 = Eigen::Matrix<double, 6, 6>;

/// Symmetric 3x3 matrix stored as six Mandel coordinates
/// (xx, yy, zz, sqrt2*yz, sqrt2*xz, sqrt2*xy). The Mandel basis is
/// orthonormal for A . B = sum a_ij b_ij, so the matrix scalar product is the
/// Euclidean dot product of the coordinate vectors.
class SymMatrix3 {
public:
    SymMatrix3() : m_(Mandel6::Zero()) {}

    static SymMatrix3 from_components(double xx, double yy, double zz, double yz, double xz,
                                      double xy);
    static SymMatrix3 from_mandel(const Mandel6& m);
    /// Symmetric part of an arbitrary 3x3 matrix.
    static SymMatrix3 from_matrix(const Mat3& m);
    static SymMatrix3 diag(double xx, double yy, double zz);
    static SymMatrix3 identity() { return diag(1.0, 1.0, 1.0); }
    /// sym(v (x) e1): the strain eps(u_x) of a displacement gradient (u_x, 0, 0).
    static SymMatrix3 sym_first_column(const Vec3& v);

    double operator()(int i, int j) const;
    Mat3 to_matrix() const;
    const Mandel6& mandel() const { return m_; }
    Vec3 first_column() const;

    SymMatrix3 operator+(const SymMatrix3& o) const { return from_mandel(m_ + o.m_); }
    SymMatrix3 operator-(const SymMatrix3& o) const { return from_mandel(m_ - o.m_); }
    SymMatrix3 operator*(double s) const { return from_mandel(m_ * s); }
    friend SymMatrix3 operator*(double s, const SymMatrix3& a) { return a * s; }

private:
    Mandel6 m_;
};

/// A . B = sum_ij a_ij b_ij.
double mat_dot(const SymMatrix3& a, const SymMatrix3& b);

/// Linear, symmetric, positive definite map on symmetric matrices, represented
/// as a 6x6 matrix in the Mandel basis. Construction rejects non-symmetric or
/// non-SPD input.
class ElasticTensor {
public:
    explicit ElasticTensor(const Mat6& mandel);

    static ElasticTensor identity();
    /// D eps = lambda tr(eps) I + 2 mu eps.
    static ElasticTensor isotropic(double lambda, double mu);

    SymMatrix3 apply(const SymMatrix3& eps) const;
    double entry(int row, int col) const { return d_(row, col); }
    const Mat6& mandel() const { return d_; }

private:
    Mat6 d_;
};

/// Double-well potential psi_hat given as a polynomial in S (ascending
/// coefficients) together with its wells S_minus < S_plus and barrier S_star.
/// The set of potentials is closed: the default quartic or a user polynomial
/// that passes the sign-pattern validation.
class DoubleWell {
public:
    /// psi_hat(S) = (S (1 - S))^2 with wells 0, 1 and barrier 1/2.
    static DoubleWell quartic();
    /// Validates psi_hat >= 0 and the derivative sign pattern on sample grids.
    static DoubleWell polynomial(std::vector<double> coeffs, double s_minus, double s_star,
                                 double s_plus);

    double value(double s) const;
    double derivative(double s) const;
    double second_derivative(double s) const;

    double s_minus() const { return s_minus_; }
    double s_star() const { return s_star_; }
    double s_plus() const { return s_plus_; }
    const std::vector<double>& coefficients() const { return c0_; }
    bool is_default_quartic() const { return quartic_; }

private:
    DoubleWell() = default;
    std::vector<double> c0_, c1_, c2_;
    double s_minus_ = 0.0, s_star_ = 0.5, s_plus_ = 1.0;
    bool quartic_ = false;
};

struct ModelParams {
    double c = 1.0;      ///< kinetic coefficient
    double nu = 1.0;     ///< gradient-energy coefficient
    double kappa = 0.1;  ///< regularization, 0 < kappa <= 1
    SymMatrix3 misfit = SymMatrix3::diag(1.0, 0.0, 0.0);
    ElasticTensor stiffness = ElasticTensor::isotropic(1.0, 1.0);
    double a = 0.0;
    double d = 1.0;
    double t_end = 1.0;
    DoubleWell potential = DoubleWell::quartic();

    /// Throws std::invalid_argument naming every violated constraint.
    void validate() const;
    /// All constraint violations as messages; empty when valid.
    std::vector<std::string> violations() const;
};

/// Uniform grid on [a, d] with N cells; x_0 = a and x_N = d exactly.
class Grid {
public:
    Grid(double a, double d, int cells);

    double a() const { return a_; }
    double d() const { return d_; }
    int cells() const { return n_; }
    std::size_t nodes() const { return static_cast<std::size_t>(n_) + 1; }
    double dx() const { return dx_; }
    double length() const { return d_ - a_; }
    double x(int i) const { return i == n_ ? d_ : a_ + i * dx_; }

    bool operator==(const Grid& o) const { return a_ == o.a_ && d_ == o.d_ && n_ == o.n_; }

private:
    double a_, d_;
    int n_;
    double dx_;
};

struct ScalarField {
    explicit ScalarField(const Grid& g) : grid(g), values(g.nodes(), 0.0) {}
    ScalarField(const Grid& g, std::vector<double> v);

    std::size_t size() const { return values.size(); }
    double& operator[](std::size_t i) { return values[i]; }
    double operator[](std::size_t i) const { return values[i]; }
    std::span<const double> view() const { return values; }
    bool all_finite() const;
    double max_abs() const;

    Grid grid;
    std::vector<double> values;
};

using Vec3Field = std::vector<Vec3>;

struct Snapshot {
    double t;
    ScalarField S;
};

/// Time-stamped snapshots on a single grid. The first snapshot is the initial
/// field at t = 0; times are strictly increasing.
class Trajectory {
public:
    explicit Trajectory(const ScalarField& initial);

    void push(double t, const ScalarField& s);
    /// Replaces the newest snapshot (never the initial one) by (t, s).
    void replace_back(double t, const ScalarField& s);
    void record_step(double dt) { step_dt_.push_back(dt); }

    const Grid& grid() const { return grid_; }
    const ScalarField& initial() const { return initial_; }
    const std::vector<Snapshot>& snapshots() const { return snaps_; }
    std::size_t size() const { return snaps_.size(); }
    const Snapshot& operator[](std::size_t i) const { return snaps_[i]; }
    const Snapshot& back() const { return snaps_.back(); }
    const std::vector<double>& step_dt() const { return step_dt_; }
    double start_time() const { return snaps_.front().t; }
    double end_time() const { return snaps_.back().t; }
    std::vector<double> times() const;

    /// Piecewise-linear interpolation in time; t is clamped to the covered range.
    ScalarField at(double t) const;
    /// Drops leading snapshots strictly older than t_keep while keeping one
    /// snapshot at or before t_keep (so interpolation at t_keep stays valid).
    void prune_before(double t_keep);

private:
    Grid grid_;
    ScalarField initial_;
    std::vector<Snapshot> snaps_;
    std::vector<double> step_dt_;
};

/// L2(Q) distance of two trajectories on the same grid, resampled at
/// time_samples + 1 uniform times on [0, min(end times)] by linear
/// interpolation; trapezoid rule in time and space.
double l2q_distance(const Trajectory& a, const Trajectory& b, int time_samples = 256);

/// |p|_k = sqrt(k^2 + p^2).
inline double smoothed_abs(double p, double kappa) { return std::sqrt(kappa * kappa + p * p); }

/// F_k(p) = 1/2 (p |p|_k + k^2 asinh(p / k)), the primitive of |y|_k normalized
/// to F_k(0) = 0. Evaluated on |p| and signed so oddness is exact.
double flux_primitive(double p, double kappa);

/// G_k(p) = int_0^p (k^2 + y^2)^(1/4) dy by adaptive Simpson (kappa > 0) or the
/// closed form 2/3 sign(p) |p|^(3/2) (kappa == 0). Throws std::runtime_error if
/// the quadrature does not converge.
double sqrt_flux_primitive(double p, double kappa);

/// G_0(p) = 2/3 sign(p) |p|^(3/2).
inline double sqrt_flux_primitive_limit(double p)
{
    return std::copysign(2.0 / 3.0 * std::abs(p) * std::sqrt(std::abs(p)), p);
}

/// psi(eps, S) = 1/2 (D(eps - eps_bar S)) . (eps - eps_bar S) + psi_hat(S).
double free_energy(const SymMatrix3& eps, double s, const ModelParams& params);

/// Reaction coefficient c (T . eps_bar - psi_hat'(S)) = -c psi_S.
double driving_force(const SymMatrix3& stress, double s, const ModelParams& params);

} // namespace cfphase
