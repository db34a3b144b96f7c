#include "cfphase/quadrature.hpp"

#include <cmath>
#include <stdexcept>

namespace cfphase {

namespace {

struct SimpsonPanel {
    double lo, mid, hi;
    double flo, fmid, fhi;
    double whole;
};

double simpson_recurse(const std::function<double(double)>& f, const SimpsonPanel& p,
                       double tol, int depth)
{
    const double lm = 0.5 * (p.lo + p.mid);
    const double rm = 0.5 * (p.mid + p.hi);
    const double flm = f(lm);
    const double frm = f(rm);
    const double left = (p.mid - p.lo) / 6.0 * (p.flo + 4.0 * flm + p.fmid);
    const double right = (p.hi - p.mid) / 6.0 * (p.fmid + 4.0 * frm + p.fhi);
    const double delta = left + right - p.whole;
    if (std::abs(delta) <= 15.0 * tol)
        return left + right + delta / 15.0;
    if (depth <= 0)
        throw std::runtime_error("adaptive_simpson: tolerance not reached on [" +
                                 std::to_string(p.lo) + ", " + std::to_string(p.hi) + "]");
    return simpson_recurse(f, {p.lo, lm, p.mid, p.flo, flm, p.fmid, left}, 0.5 * tol, depth - 1) +
           simpson_recurse(f, {p.mid, rm, p.hi, p.fmid, frm, p.fhi, right}, 0.5 * tol, depth - 1);
}

} // namespace

double adaptive_simpson(const std::function<double(double)>& f, double lo, double hi,
                        double abs_tol, int max_depth)
{
    if (lo == hi)
        return 0.0;
    if (hi < lo)
        return -adaptive_simpson(f, hi, lo, abs_tol, max_depth);
    const double mid = 0.5 * (lo + hi);
    const double flo = f(lo), fmid = f(mid), fhi = f(hi);
    const double whole = (hi - lo) / 6.0 * (flo + 4.0 * fmid + fhi);
    return simpson_recurse(f, {lo, mid, hi, flo, fmid, fhi, whole}, abs_tol, max_depth);
}

double trapezoid(std::span<const double> values, double h)
{
    if (values.size() < 2)
        return 0.0;
    double sum = 0.5 * (values.front() + values.back());
    for (std::size_t i = 1; i + 1 < values.size(); ++i)
        sum += values[i];
    return sum * h;
}

std::vector<double> cumulative_trapezoid(std::span<const double> values, double h)
{
    std::vector<double> out(values.size(), 0.0);
    for (std::size_t i = 1; i < values.size(); ++i)
        out[i] = out[i - 1] + 0.5 * h * (values[i - 1] + values[i]);
    return out;
}

double trapezoid(std::span<const double> values, std::span<const double> abscissae)
{
    if (values.size() != abscissae.size())
        throw std::invalid_argument("trapezoid: value/abscissa length mismatch");
    double sum = 0.0;
    for (std::size_t i = 1; i < values.size(); ++i)
        sum += 0.5 * (abscissae[i] - abscissae[i - 1]) * (values[i] + values[i - 1]);
    return sum;
}

} // namespace cfphase
