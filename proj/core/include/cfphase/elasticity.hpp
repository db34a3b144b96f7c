#pragma once

// Closed-form solution of the quasi-static elasticity subproblem
//   -T_1x = b,  T = D(eps(u_x) - eps_bar S_eff),  u(a) = u(d) = 0
// for a given order-parameter slice S_eff. The stress splits into a part
// linear in S_eff whose first column vanishes identically, a spatially
// constant part fixed by the mean of S_eff, and the correction sigma solving
// the same problem with the body force alone.

#include "cfphase/core_model.hpp"

#include <functional>
#include <vector>

namespace cfphase {

struct UStar {
    Vec3 u_star;
    SymMatrix3 eps_star;
};

/// Acoustic matrix: column k holds the first column of D sym(e_k (x) e_1).
Mat3 acoustic_matrix(const ElasticTensor& stiffness);

/// Solves M u* = first column of (D eps_bar) and returns u* with
/// eps* = sym((u*, 0, 0)). Throws std::invalid_argument if M is singular.
UStar compute_ustar(const ElasticTensor& stiffness, const SymMatrix3& misfit);

/// Solution of -sigma_1x = b, sigma = D eps(w_x), w(a) = w(d) = 0.
struct CorrectionPair {
    Vec3Field w;
    Vec3Field w_x;
    Vec3Field sigma1;
    /// eps_bar . sigma per node, cached for the coupling field.
    std::vector<double> misfit_dot_sigma;
};

struct StressField {
    std::vector<SymMatrix3> T;
    ScalarField tdot_eps;
};

class ElasticityOperator {
public:
    ElasticityOperator(const ElasticTensor& stiffness, const SymMatrix3& misfit, const Grid& grid);

    const Grid& grid() const { return grid_; }
    const Vec3& u_star() const { return ustar_.u_star; }
    const SymMatrix3& eps_star() const { return ustar_.eps_star; }
    const Mat3& acoustic() const { return acoustic_; }
    /// D(eps* - eps_bar): stress per unit S_eff; its first column is zero.
    const SymMatrix3& stress_per_order() const { return per_order_; }
    /// D eps*: stress per unit mean of S_eff (enters with a minus sign).
    const SymMatrix3& stress_per_mean() const { return per_mean_; }
    /// eps_bar . D(eps* - eps_bar).
    double coupling_per_order() const { return k_order_; }
    /// eps_bar . D eps*.
    double coupling_per_mean() const { return k_mean_; }

    CorrectionPair solve_correction(const Vec3Field& b) const;
    CorrectionPair zero_correction() const;

    StressField assemble_stress(const ScalarField& s_eff, const CorrectionPair& corr) const;
    /// Only T . eps_bar, written into out (size = nodes). Same arithmetic as
    /// assemble_stress(...).tdot_eps.
    void coupling_field(std::span<const double> s_eff, const CorrectionPair& corr,
                        std::span<double> out) const;
    Vec3Field assemble_displacement(const ScalarField& s_eff, const CorrectionPair& corr) const;

private:
    double mean(std::span<const double> s) const;

    ElasticTensor stiffness_;
    SymMatrix3 misfit_;
    Grid grid_;
    Mat3 acoustic_;
    Eigen::LLT<Mat3> acoustic_llt_;
    UStar ustar_;
    SymMatrix3 per_order_;
    SymMatrix3 per_mean_;
    double k_order_ = 0.0;
    double k_mean_ = 0.0;
};

/// Body force b(t, x). Time-independent forces allow the correction to be
/// computed once per run.
struct BodyForce {
    enum class Kind { Zero, Constant, Sine, Custom };

    static BodyForce zero();
    static BodyForce constant(const Vec3& v);
    /// b = amplitude * sin(2 pi k (x - a) / (d - a)).
    static BodyForce sine(const Vec3& amplitude, double wavenumber, double a = 0.0, double d = 1.0);
    static BodyForce custom(std::function<Vec3(double, double)> f, bool time_dependent);

    Vec3 operator()(double t, double x) const;
    Vec3Field sample(double t, const Grid& grid) const;

    Kind kind = Kind::Zero;
    Vec3 vector = Vec3::Zero();
    double wavenumber = 1.0;
    double origin = 0.0;
    double length = 1.0;
    bool time_dependent = false;
    std::function<Vec3(double, double)> fn;
};

/// Max over interior nodes of |central difference of T_1 + b|.
double equilibrium_residual(const std::vector<SymMatrix3>& stress, const Vec3Field& b,
                            const Grid& grid);

} // namespace cfphase
