#pragma once

#include <cmath>
#include <string>

#include "stfrac/errors.hpp"

namespace stfrac {

/// Parameter tuple of the space-time fractional diffusion operator
/// (d^beta/dt^beta + (nu/2)(-Laplace)^{alpha/2}) u = I_t^gamma[ forcing ].
struct FracParams {
    double alpha = 2.0;  // space order, in (0,2]
    double beta = 1.0;   // time order, in (0,2)
    double gamma = 0.0;  // noise-smoothing order, >= 0
    double nu = 2.0;     // diffusion parameter, > 0
    int d = 1;           // space dimension, >= 1

    void validate() const {
        if (!(alpha > 0.0) || !(alpha <= 2.0) || !std::isfinite(alpha))
            throw DomainError("alpha must be in (0,2], got " + std::to_string(alpha));
        if (!(beta > 0.0) || !(beta < 2.0) || !std::isfinite(beta))
            throw DomainError("beta must be in (0,2), got " + std::to_string(beta));
        if (!(gamma >= 0.0) || !std::isfinite(gamma))
            throw DomainError("gamma must be >= 0, got " + std::to_string(gamma));
        if (!(nu > 0.0) || !std::isfinite(nu))
            throw DomainError("nu must be > 0, got " + std::to_string(nu));
        if (d < 1)
            throw DomainError("dimension d must be >= 1, got " + std::to_string(d));
    }

    bool slow_diffusion() const { return beta <= 1.0; }
    bool fast_diffusion() const { return beta > 1.0; }

    /// ceil(beta) restricted to {1,2} on (0,2).
    int ceil_beta() const { return beta <= 1.0 ? 1 : 2; }
    /// floor(beta) restricted to {0,1} on (0,2).
    int floor_beta() const { return beta < 1.0 ? 0 : 1; }

    bool operator==(const FracParams& o) const {
        return alpha == o.alpha && beta == o.beta && gamma == o.gamma && nu == o.nu && d == o.d;
    }
};

/// The triplet of fundamental solutions: Z propagates initial position data,
/// Zstar (beta in (1,2) only) initial velocity data, Y the forcing.
enum class GreenKind { Z, Y, Zstar };

inline const char* to_string(GreenKind k) {
    switch (k) {
        case GreenKind::Z: return "Z";
        case GreenKind::Y: return "Y";
        case GreenKind::Zstar: return "Zstar";
    }
    return "?";
}

inline void validate_kind(const FracParams& p, GreenKind k) {
    if (k == GreenKind::Zstar && !(p.beta > 1.0))
        throw DomainError("Zstar is defined only for beta in (1,2)");
}

/// Aggregate second H-function parameter: ceil(beta) for Z, beta+gamma for Y,
/// 1 for Zstar.
inline double eta_of(const FracParams& p, GreenKind k) {
    switch (k) {
        case GreenKind::Z: return static_cast<double>(p.ceil_beta());
        case GreenKind::Y: return p.beta + p.gamma;
        case GreenKind::Zstar: return 1.0;
    }
    return 0.0;
}

/// Time exponent of the t=1 reduction: kind(t,x) = t^{e - d*beta/alpha} kind(1, t^{-beta/alpha} x),
/// where e = ceil(beta)-1 for Z, beta+gamma-1 for Y, 0 for Zstar.
inline double scaling_time_exponent(const FracParams& p, GreenKind k) {
    const double e = (k == GreenKind::Z)   ? p.ceil_beta() - 1.0
                     : (k == GreenKind::Y) ? p.beta + p.gamma - 1.0
                                           : 0.0;
    return e - p.d * p.beta / p.alpha;
}

} // namespace stfrac
