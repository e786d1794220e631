#pragma once

#include <memory>
#include <utility>
#include <vector>

#include "stfrac/params.hpp"
#include "stfrac/specfun.hpp"

namespace stfrac {

/// Sign classification of a fundamental solution over all (t,x).
enum class SignVerdict {
    NonnegativeI,   // beta in (0,1) (Z and Y), or beta = 1 with the gamma caveat
    NonnegativeII,  // beta = 1, gamma in {0} or (1,inf) (Y)
    NonnegativeIII, // 1 < beta < alpha <= 2, d <= 3 (Z, Zstar, Y)
    NonnegativeIV,  // 1 < beta = alpha < 2, d <= 3, gamma > (d+3)/2 - beta (Y)
    Indefinite,     // d >= 4, beta in (1,2), gamma = 0 (Y takes both signs)
    Unknown,
};

inline bool is_nonnegative(SignVerdict v) {
    return v == SignVerdict::NonnegativeI || v == SignVerdict::NonnegativeII ||
           v == SignVerdict::NonnegativeIII || v == SignVerdict::NonnegativeIV;
}

const char* to_string(SignVerdict v);

/// Behavior of kind(1,x) as x -> 0.
struct BoundaryBehavior {
    enum class Kind { Finite, DivergesPower, DivergesLog } kind = Kind::Finite;
    double limit = 0.0;       // finite case: lim_{x->0} kind(1,x)
    double coefficient = 0.0; // physical-scale coefficient of the leading term
    double exponent = 0.0;    // power of |x| (DivergesPower), else 0
    FoxCaseReport fox;        // underlying nine-case classification
};

struct EvalResult {
    double value = 0.0;
    double accuracy = 0.0; // absolute accuracy estimate
};

/// Cached t=1 radial profile of one fundamental solution.
class GreenProfile {
public:
    GreenProfile(FracParams p, GreenKind kind);

    /// Interpolated kind(1, r); r >= 0.
    EvalResult value(double r) const;
    double accuracy_estimate() const { return accuracy_estimate_; }
    const char* method_tag() const { return method_tag_; }
    const FracParams& params() const { return params_; }
    GreenKind kind() const { return kind_; }
    double r_max() const { return r_max_; }
    /// Radial grid and samples (log-spaced), exposed for mass/tail checks.
    const std::vector<double>& radii() const { return r_; }
    const std::vector<double>& samples() const { return g_; }

private:
    double value_interp_only(double r) const;

    FracParams params_;
    GreenKind kind_;
    BoundaryBehavior origin_;
    bool mainardi_path_ = false;
    double r_min_ = 0.0, r_max_ = 0.0;
    double g0_ = 0.0; // value at r = 0 when finite
    std::vector<double> r_, g_, slope_; // log-grid samples + Hermite slopes
    double accuracy_estimate_ = 0.0;
    const char* method_tag_ = "spectral-inversion";
};

/// Shared, insert-once profile cache.
std::shared_ptr<const GreenProfile> green_profile(const FracParams& p, GreenKind kind);

/// Exact spatial Fourier transform of kind(t, .) at radial frequency xi_mag.
double green_fourier(const FracParams& p, GreenKind kind, double t, double xi_mag);

/// Total mass = Fourier transform at frequency zero.
double total_mass(const FracParams& p, GreenKind kind, double t);

/// Scaling reduction of Y: Y(t,x) = prefactor * Y(1, reduced_x).
std::pair<double, std::vector<double>> scale_reduce(const FracParams& p, double t,
                                                    const std::vector<double>& x);

/// Pointwise evaluation. Default path scales to t=1 and interpolates the
/// cached radial profile (alpha=2, d=1 uses the closed form); exact=true
/// forces a fresh spectral quadrature at the reduced radius.
EvalResult green_eval_radial(const FracParams& p, GreenKind kind, double t, double r,
                             bool exact = false);
double green_eval(const FracParams& p, GreenKind kind, double t, const std::vector<double>& x,
                  bool exact = false);

/// Direct spectral inversion of kind(1, r) (no cache, no interpolation).
EvalResult spectral_invert(const FracParams& p, GreenKind kind, double r);

/// L2 norm: integral of Y(t,.)^2 over space = csharp * t^{2(beta+gamma-1)-d beta/alpha}.
/// Requires d < 2*alpha.
double l2_norm_sq(const FracParams& p, double t);
/// The constant in the L2 law (cached per params).
double csharp_constant(const FracParams& p);

SignVerdict classify_sign(const FracParams& p, GreenKind kind);
BoundaryBehavior small_x_classify(const FracParams& p, GreenKind kind);

/// Radius beyond which the tail law puts less than tail_mass_fraction of the
/// total mass (power case) or the profile falls below value_floor (alpha=2).
double tail_truncation_radius(const FracParams& p, GreenKind kind, double tail_mass_fraction,
                              double value_floor = 1e-12);

} // namespace stfrac
