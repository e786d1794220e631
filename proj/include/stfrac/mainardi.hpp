#pragma once

#include "stfrac/errors.hpp"

namespace stfrac {

/// Parameters of the two-parameter Mainardi function M_{lambda,mu}(z)
/// = sum_n (-1)^n z^n / (n! Gamma(mu - (n+1) lambda)), order lambda in [0,1).
struct MainardiParams {
    double lambda = 0.5;
    double mu = 1.0;
    int terms = 24; // series truncation length
    void validate() const {
        if (!(lambda >= 0.0 && lambda < 1.0))
            throw DomainError("Mainardi order lambda must be in [0,1)");
        if (terms < 1) throw DomainError("Mainardi truncation must be >= 1");
    }
};

struct MainardiResult {
    double value = 0.0;
    double last_term = 0.0;     // magnitude of the final series term (convergence report)
    double accuracy_loss = 0.0; // cancellation estimate: max |term| * quad epsilon
};

/// Truncated series with the reciprocal-Gamma convention (Gamma poles in a
/// denominator zero the term, never an error). z >= 0.
MainardiResult mainardi(const MainardiParams& p, double z);

/// Fully converged series (term count chosen adaptively), quad-precision
/// accumulation. accuracy_loss reports the cancellation floor; values are
/// meaningless once it exceeds |value|.
MainardiResult mainardi_full(double lambda, double mu, double z);

} // namespace stfrac
