#pragma once

namespace stfrac {

// Gamma-function family built on a Lanczos approximation (g=7, 9 terms) with
// reflection for arguments left of 1/2. Relative accuracy ~1e-14 on |x|<=170.

/// sin(pi*x) evaluated with exact integer phase splitting (no pi*x rounding).
double sinpi(double x);
/// cos(pi*x), same treatment.
double cospi(double x);

/// Gamma(x). Poles at non-positive integers raise no error; they return +/-inf.
double gamma_fn(double x);

/// log|Gamma(x)| for x not a non-positive integer.
double log_abs_gamma(double x);

/// 1/Gamma(x); exactly 0 at non-positive integers (reciprocal-Gamma convention).
double reciprocal_gamma(double x);

/// True if x is within tol of a non-positive integer.
bool is_nonpositive_integer(double x, double tol = 1e-12);

} // namespace stfrac
