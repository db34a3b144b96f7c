#pragma once

#include <functional>
#include <span>
#include <vector>

namespace cfphase {

/// Adaptive Simpson quadrature with Richardson correction. Throws
/// std::runtime_error when the recursion depth is exhausted before the
/// absolute tolerance is met.
double adaptive_simpson(const std::function<double(double)>& f, double lo, double hi,
                        double abs_tol = 1e-12, int max_depth = 50);

/// Composite trapezoid over uniformly spaced samples.
double trapezoid(std::span<const double> values, double h);

/// Running trapezoid integral; out[0] = 0, out.size() == values.size().
std::vector<double> cumulative_trapezoid(std::span<const double> values, double h);

/// Composite trapezoid over non-uniform abscissae.
double trapezoid(std::span<const double> values, std::span<const double> abscissae);

} // namespace cfphase
