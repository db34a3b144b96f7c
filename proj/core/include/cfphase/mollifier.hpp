#pragma once

// Temporal mollification (chi_k * S)(t, x) = int chi_k(t - s) S(s, x) ds of an
// order-parameter trajectory, with chi the standard bump exp(-1/(1 - tau^2))
// normalized to unit mass. Where the kernel support leaves [0, T_e] the
// truncated kernel is renormalized so constants are reproduced.

#include "cfphase/core_model.hpp"

namespace cfphase {

/// int_{-1}^{1} exp(-1/(1 - tau^2)) d tau, computed once by adaptive quadrature.
double bump_normalization();

class MollifierKernel {
public:
    enum class Support {
        Centered, ///< chi_k supported on [-k, k]
        Causal    ///< chi_k supported on [0, k]: only past states enter
    };

    MollifierKernel(double width, Support support, int samples = 512);

    double width() const { return width_; }
    Support support() const { return support_; }
    int samples() const { return samples_; }
    double normalization() const { return norm_; }

    /// chi_k(s); zero outside the support.
    double operator()(double s) const;
    /// Lower and upper offsets of the support relative to t: s in [t - hi, t - lo].
    double reach_back() const { return width_; }
    double reach_forward() const { return support_ == Support::Centered ? width_ : 0.0; }

private:
    double width_;
    Support support_;
    int samples_;
    double norm_;
};

struct MollifiedSlice {
    ScalarField field;
    /// Kernel support was clipped at 0 or at the horizon and renormalized.
    bool truncated = false;
    double retained_mass = 1.0;
};

/// Mollifies the trajectory at time t. The support is clipped to [0, horizon];
/// the trajectory must cover the clipped interval or std::out_of_range is thrown
/// naming the missing interval. Snapshots are linearly interpolated in time.
MollifiedSlice mollify_time(const Trajectory& traj, const MollifierKernel& kernel, double t,
                            double horizon);

} // namespace cfphase
