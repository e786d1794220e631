#pragma once

#include <memory>

#include "stfrac/errors.hpp"

namespace stfrac {

/// Indices of the two-parameter Mittag-Leffler function E_{a,b}.
struct MLParams {
    double a = 1.0;
    double b = 1.0;
    void validate() const {
        if (!(a > 0.0)) throw DomainError("Mittag-Leffler index a must be > 0");
        if (!(b > 0.0)) throw DomainError("Mittag-Leffler index b must be > 0");
    }
};

namespace detail {
struct MLSeriesTable;
}

/// Evaluator for E_{a,b}(z) = sum_k z^k / Gamma(a k + b).
///
/// Branch layout: power series in quad precision for |z| below the crossover,
/// algebraic asymptotic series (optimally truncated) plus the exact
/// exponential branch terms beyond it. The crossover sits where both branches
/// deliver ~1e-12 relative accuracy; see ml_series_crossover.
class MittagLeffler {
public:
    explicit MittagLeffler(MLParams p);
    double operator()(double z) const;
    const MLParams& params() const { return p_; }

private:
    MLParams p_;
    std::shared_ptr<detail::MLSeriesTable> table_;
};

/// |z| above which the asymptotic branch takes over, as a function of a.
/// In "exponent units" the series loses ~|z|^{1/a} / ln 10 digits, so the
/// switch happens at |z|^{1/a} = 32 where quad precision still retains
/// ~19 digits and the truncated asymptotic error is ~e^{-32}.
double ml_series_crossover(double a);

double mittag_leffler(const MLParams& p, double z);
double mittag_leffler(double a, double b, double z);

namespace detail {
/// Series value computed with the same table machinery but forced to stay on
/// the series branch (test hook for the crossover-continuity check).
double ml_series_only(double a, double b, double z);
/// Asymptotic value forced (test hook); requires |z| large enough to converge.
double ml_asymptotic_only(double a, double b, double z);
/// The two pieces of the asymptotic branch: optimally truncated algebraic
/// series, and the exact exponential branch-point terms (nonzero for a >= 1).
double ml_asym_algebraic(double a, double b, double z);
double ml_asym_exponential(double a, double b, double z);
} // namespace detail

} // namespace stfrac
