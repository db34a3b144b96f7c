#include "cfphase/mollifier.hpp"

#include "cfphase/quadrature.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>

namespace cfphase {

namespace {

double bump(double tau)
{
    if (tau <= -1.0 || tau >= 1.0)
        return 0.0;
    return std::exp(-1.0 / (1.0 - tau * tau));
}

} // namespace

double bump_normalization()
{
    static const double z = adaptive_simpson(bump, -1.0, 1.0, 1e-14);
    return z;
}

MollifierKernel::MollifierKernel(double width, Support support, int samples)
    : width_(width), support_(support), samples_(samples), norm_(bump_normalization())
{
    if (!(width > 0.0))
        throw std::invalid_argument("MollifierKernel: width must be > 0");
    if (samples < 2)
        throw std::invalid_argument("MollifierKernel: need at least 2 quadrature panels");
    if (samples_ % 2 != 0)
        ++samples_;
}

double MollifierKernel::operator()(double s) const
{
    if (support_ == Support::Centered)
        return bump(s / width_) / (norm_ * width_);
    // Causal profile: the bump mapped onto (0, 1), still of unit mass.
    return 2.0 * bump(2.0 * s / width_ - 1.0) / (norm_ * width_);
}

MollifiedSlice mollify_time(const Trajectory& traj, const MollifierKernel& kernel, double t,
                            double horizon)
{
    const double want_lo = t - kernel.reach_back();
    const double want_hi = t + kernel.reach_forward();
    const double lo = std::max(want_lo, 0.0);
    const double hi = std::min(want_hi, horizon);
    const double eps = 1e-12 * std::max(1.0, horizon);
    if (traj.start_time() > lo + eps || traj.end_time() < hi - eps) {
        std::ostringstream msg;
        msg << "mollify_time: trajectory covers [" << traj.start_time() << ", " << traj.end_time()
            << "] but the kernel at t = " << t << " needs [" << lo << ", " << hi << "]";
        throw std::out_of_range(msg.str());
    }

    MollifiedSlice out{ScalarField(traj.grid())};
    out.truncated = want_lo < 0.0 || want_hi > horizon;
    if (!(hi > lo)) {
        out.field = traj.at(t);
        out.retained_mass = 0.0;
        return out;
    }

    // Composite Simpson in s; the weights are non-negative, so normalizing by
    // their sum gives a convex combination of interpolated snapshots.
    const int panels = kernel.samples();
    const double h = (hi - lo) / panels;
    const auto& snaps = traj.snapshots();
    double weight_sum = 0.0;
    std::size_t seg = 0;
    for (int k = 0; k <= panels; ++k) {
        const double s = k == panels ? hi : lo + k * h;
        const double simpson = (k == 0 || k == panels) ? 1.0 : (k % 2 == 1 ? 4.0 : 2.0);
        const double w = simpson * kernel(t - s);
        if (w == 0.0)
            continue;
        weight_sum += w;
        while (seg + 1 < snaps.size() && snaps[seg + 1].t < s)
            ++seg;
        if (seg + 1 >= snaps.size() || s <= snaps[seg].t) {
            const auto& S = (s <= snaps[seg].t) ? snaps[seg].S : snaps.back().S;
            for (std::size_t i = 0; i < out.field.size(); ++i)
                out.field[i] += w * S[i];
            continue;
        }
        const auto& a = snaps[seg];
        const auto& b = snaps[seg + 1];
        const double theta = (s - a.t) / (b.t - a.t);
        const double wa = w * (1.0 - theta), wb = w * theta;
        for (std::size_t i = 0; i < out.field.size(); ++i)
            out.field[i] += wa * a.S[i] + wb * b.S[i];
    }
    out.retained_mass = weight_sum * h / 3.0;
    if (weight_sum > 0.0)
        for (auto& v : out.field.values)
            v /= weight_sum;
    else
        out.field = traj.at(t);
    return out;
}

} // namespace cfphase
