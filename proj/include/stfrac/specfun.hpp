#pragma once

#include <string>

#include "stfrac/params.hpp"

namespace stfrac {

/// Closed-form kernel of neutral-order diffusion:
/// (1/pi) x^{1/theta} / (1 + 2 x^{1/theta} cos(pi theta) + x^{2/theta}),
/// continuous extension at x = 1. theta in (0,1), x > 0; always positive.
double neutral_kernel(double theta, double x);

/// Leading structure of the kernel profile g(x) = x^{-d} H(x^alpha) as x->0+,
/// where H is the H^{2,1}_{2,3} profile with aggregate second parameter eta.
enum class SmallXForm {
    Power,    // g ~ coefficient * x^exponent (exponent < 0: divergence)
    Log,      // g ~ coefficient * log(1/x)  (divergence)
    Constant, // g -> coefficient, |g - coefficient| ~ x^remainder_order
};

struct FoxCaseReport {
    int case_id = 0;                 // 1..9 classification
    SmallXForm form = SmallXForm::Constant;
    double leading_coefficient = 0.0; // of the leading term of g
    double leading_exponent = 0.0;    // power of x in the leading term (0 for Log/Constant)
    double remainder_order = 0.0;     // |g - leading| ~ x^remainder_order
    bool remainder_has_log = false;   // remainder carries a log(1/x) factor (case 8)
    std::string exponent_tag;         // human-readable leading behavior
    bool diverges() const { return form != SmallXForm::Constant || leading_exponent < 0.0; }
    /// Exponent governing |g(x) - limit| near zero (limit = 0 for divergent
    /// power cases); this is what a log-log slope measurement recovers.
    double measured_exponent() const {
        return form == SmallXForm::Constant ? remainder_order : leading_exponent;
    }
};

/// Classify the x->0 behavior per the nine-case table. eta must come from the
/// Green-kind mapping (ceil(beta) for Z, beta+gamma for Y, 1 for Zstar).
/// Case boundaries (eta vs beta, d vs alpha multiples) are resolved with
/// tolerance 1e-12; a vanishing Gamma-reciprocal on a boundary reclassifies
/// into the matching special case (4 or 8) instead of producing NaN.
FoxCaseReport fox_small_x(const FracParams& params, double eta);

/// Spatial tail of kind(1,x) as |x| -> infinity.
struct TailLaw {
    enum class Form { Power, StretchedExp } form = Form::Power;
    double A = 0.0; // amplitude
    double a = 0.0; // power of |x| in front of the exponential (alpha==2 only)
    double b = 0.0; // exponential rate (alpha==2 only)
    double c = 0.0; // stretching exponent 2/(2-beta) (alpha==2 only)
    /// Power form: A |x|^{-(d+alpha)}. Stretched form: A |x|^a exp(-b |x|^c).
    double operator()(double r, const FracParams& p) const;
};

/// Tail law of the given Green kind; for Z and Zstar the gamma argument of the
/// Y formulas is replaced by ceil(beta)-beta and 1 respectively.
TailLaw fox_tail(const FracParams& params, GreenKind kind);

} // namespace stfrac
