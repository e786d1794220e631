#pragma once

#include <cmath>
#include <functional>
#include <vector>

namespace stfrac {

struct QuadResult {
    double value = 0.0;
    double error = 0.0; // absolute error estimate
};

/// Adaptive Gauss-Kronrod (7,15) on a finite interval.
QuadResult integrate(const std::function<double(double)>& f, double a, double b,
                     double abs_tol = 1e-12, double rel_tol = 1e-10, int max_depth = 30);

/// Integral over [a, infinity) of a function with eventually monotone decay.
/// Panels double in width; stops when panel contributions fall below tolerance.
QuadResult integrate_to_inf(const std::function<double(double)>& f, double a,
                            double abs_tol = 1e-12, double rel_tol = 1e-10,
                            double first_width = 1.0, int max_panels = 200);

/// Integral over [a, infinity) of f(u) * w(u) where w oscillates with
/// asymptotically equally spaced sign changes at a + k*spacing (k>=1 offsets
/// supplied by `next_break`). Integrates panel by panel between breaks and
/// accelerates the alternating tail with iterated Aitken extrapolation.
QuadResult integrate_oscillatory(const std::function<double(double)>& integrand,
                                 const std::function<double(int)>& break_point,
                                 double a, double abs_tol = 1e-12, int max_breaks = 4000);

/// Ordinary least squares fit y = intercept + slope * x.
struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double slope_stderr = 0.0;
};
LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

} // namespace stfrac
