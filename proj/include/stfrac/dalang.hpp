#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <utility>

#include "stfrac/params.hpp"

namespace stfrac {

/// Well-posedness report: Dalang's condition and the exponents derived from it.
struct DalangReport {
    double theta_cap = 0.0;      // Theta = 2 alpha + (alpha/beta) min(2 gamma - 1, 0)
    double sigma = 0.0;          // sigma = 2(1 - beta - gamma) + beta d / alpha
    bool admissible = false;     // d < Theta
    bool equivalent_form_ok = false; // beta+gamma > (1 + d beta/alpha)/2 and d < 2 alpha
    std::optional<double> holder_time;
    std::optional<double> holder_space;
    double intermittency_exponent = 0.0; // 1 + 1/(2(beta+gamma) - 1 - d beta/alpha)
};

DalangReport dalang_check(const FracParams& p);

/// Open upper Hoelder exponents (time, space) for slow diffusion.
std::pair<double, double> holder_exponents(const FracParams& p);

/// Exponent of the p-th moment Lyapunov upper bound C p^{1+1/(2(beta+gamma)-1-d beta/alpha)}.
double intermittency_upper(const FracParams& p, int p_moment);

/// Integral of w^{2(theta-1)} E_{beta,theta}(-lambda w^beta)^2 over (0,t).
double ml_time_integral(double beta, double theta, double lambda, double t);

/// Envelope of ml_time_integral: t^{2 theta - 1} / (1 + (t lambda^{1/beta})^{min(2 beta, 2 theta - 1)}).
double ml_time_envelope(double beta, double theta, double lambda, double t);

/// Squared L2 modulus of the spatial increment of the forcing kernel:
/// integral over frequency of (1 - cos(xi.h)) times the time-integrated
/// squared transform. h > 0 is the increment magnitude.
double space_increment_l2(const FracParams& p, double t, double h);

/// Squared L2 modulus of the time increment (both pieces combined):
/// the overlap integral on [0,s] plus the fresh-time piece on [s,t].
/// Requires beta <= 1, gamma <= ceil(beta) - beta, and admissibility.
double time_increment_l2(const FracParams& p, double s, double t);

/// Initial-data descriptor for admissibility checks and homogeneous solutions.
struct InitialDataSpec {
    enum class Form { Constant, BoundedDensity, Dirac, MeasureDensity } form = Form::Constant;
    double constant = 1.0;                         // Constant
    std::function<double(double)> density;         // BoundedDensity / MeasureDensity (d=1)
    double sup_bound = 0.0;                        // BoundedDensity
    double dirac_mass = 1.0, dirac_location = 0.0; // Dirac
    // Optional growth descriptor for MeasureDensity: |density| ~ exp(c |x|^p) (1+|x|)^q.
    bool has_growth_tag = false;
    double growth_c = 0.0, growth_p = 0.0, growth_q = 0.0;
    // Fast diffusion carries two slots (mu0, mu1); the second defaults to zero.
    std::shared_ptr<InitialDataSpec> velocity; // mu1, fast diffusion only

    static InitialDataSpec make_constant(double c) {
        InitialDataSpec s;
        s.form = Form::Constant;
        s.constant = c;
        return s;
    }
    static InitialDataSpec make_dirac(double mass, double loc) {
        InitialDataSpec s;
        s.form = Form::Dirac;
        s.dirac_mass = mass;
        s.dirac_location = loc;
        return s;
    }
};

/// True iff the initial data are admissible for the given parameters:
/// bounded/constant forms always; measures (d=1) per the alpha=2 convolution
/// test against exp(-eta |x|^{1+floor(beta)}) or the alpha in (1,2) weighted
/// supremum test.
bool admissible_initial(const FracParams& p, const InitialDataSpec& init);

} // namespace stfrac
