#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "stfrac/gammafn.hpp"
#include "stfrac/mainardi.hpp"
#include "stfrac/mittag_leffler.hpp"
#include "stfrac/specfun.hpp"

using namespace stfrac;

namespace {

// Independent Mittag-Leffler oracle: 400-term series with compensated
// summation in long double. Valid while cancellation stays below ~1e5.
double ml_series_oracle(double a, double b, double z) {
    long double sum = 0.0L, comp = 0.0L, pw = 1.0L;
    for (int k = 0; k < 400; ++k) {
        const long double term = pw * static_cast<long double>(reciprocal_gamma(a * k + b));
        const long double y = term - comp;
        const long double t = sum + y;
        comp = (t - sum) - y;
        sum = t;
        pw *= z;
    }
    return static_cast<double>(sum);
}

} // namespace

TEST_CASE("gamma function accuracy and conventions") {
    CHECK(gamma_fn(0.5) == doctest::Approx(std::sqrt(M_PI)).epsilon(1e-14));
    CHECK(gamma_fn(1.0) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(gamma_fn(5.0) == doctest::Approx(24.0).epsilon(1e-14));
    CHECK(gamma_fn(170.0) == doctest::Approx(std::tgamma(170.0)).epsilon(1e-12));
    CHECK(gamma_fn(-0.5) == doctest::Approx(-2.0 * std::sqrt(M_PI)).epsilon(1e-13));
    CHECK(gamma_fn(-2.5) == doctest::Approx(std::tgamma(-2.5)).epsilon(1e-12));
    // reciprocal gamma vanishes exactly at the poles
    CHECK(reciprocal_gamma(0.0) == 0.0);
    CHECK(reciprocal_gamma(-1.0) == 0.0);
    CHECK(reciprocal_gamma(-17.0) == 0.0);
    CHECK(reciprocal_gamma(2.0) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(reciprocal_gamma(-1.5) == doctest::Approx(1.0 / std::tgamma(-1.5)).epsilon(1e-12));
    CHECK(sinpi(3.0) == 0.0);
    CHECK(sinpi(-41.0) == 0.0);
    CHECK(cospi(0.5) == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("mittag-leffler: pinned values") {
    // E_{1,1}(z) = e^z
    CHECK(mittag_leffler(1.0, 1.0, 1.0) == doctest::Approx(std::exp(1.0)).epsilon(1e-12));
    // k = 0 term of the series at z = 0
    CHECK(mittag_leffler(0.7, 1.3, 0.0) == doctest::Approx(reciprocal_gamma(1.3)).epsilon(1e-14));
    CHECK(mittag_leffler(1.5, 2.0, 0.0) == doctest::Approx(1.0).epsilon(1e-14));
    // Oracle: high-precision series, cross-checked against e*erfc(1).
    const double oracle = ml_series_oracle(0.5, 1.0, -1.0);
    CHECK(oracle == doctest::Approx(std::exp(1.0) * std::erfc(1.0)).epsilon(1e-12));
    CHECK(mittag_leffler(0.5, 1.0, -1.0) == doctest::Approx(0.42758357615580705).epsilon(1e-10));
    CHECK(mittag_leffler(0.5, 1.0, -1.0) == doctest::Approx(oracle).epsilon(1e-12));
    // E_{1/2,1}(-y) = e^{y^2} erfc(y) across the branch switch
    for (double y : {2.0, 4.0, 6.0, 9.0, 15.0}) {
        const double exact = std::exp(y * y) * std::erfc(y);
        CHECK(mittag_leffler(0.5, 1.0, -y) == doctest::Approx(exact).epsilon(1e-10));
    }
    // deep asymptotic range (post: 1e-6 relative on [-1e6, -50]);
    // leading term of the expansion is 1/(x sqrt(pi)) for these indices
    CHECK(mittag_leffler(0.5, 1.0, -1e6) ==
          doctest::Approx(1.0 / (1e6 * std::sqrt(M_PI))).epsilon(1e-6));
}

TEST_CASE("mittag-leffler: errors") {
    CHECK_THROWS_AS(mittag_leffler(0.0, 1.0, 0.0), DomainError);
    CHECK_THROWS_AS(mittag_leffler(1.0, 1.0, std::nan("")), DomainError);
    CHECK_THROWS_AS(mittag_leffler(0.5, 1.0, 1e7), SaturationError);
}

TEST_CASE("mittag-leffler: series/asymptotic crossover continuity") {
    for (double a : {0.4, 0.5, 0.8, 1.0, 1.2, 1.5, 1.9}) {
        for (double b : {a, 1.0, a + 0.7}) {
            if (a == 1.0 && b == 1.0) continue; // exponential special case below
            const double zc = ml_series_crossover(a);
            const double s = detail::ml_series_only(a, b, -zc);
            const double as = detail::ml_asymptotic_only(a, b, -zc);
            CHECK(std::abs(s - as) / std::abs(s) < 1e-6);
        }
    }
    // (a,b) = (1,1): the value at the crossover is e^{-zc}, exponentially
    // small; the evaluator returns exp(z) directly, and the asymptotic branch
    // reproduces it exactly while the raw series is cancellation-limited.
    const double zc = ml_series_crossover(1.0);
    CHECK(detail::ml_asymptotic_only(1.0, 1.0, -zc) ==
          doctest::Approx(std::exp(-zc)).epsilon(1e-10));
    CHECK(mittag_leffler(1.0, 1.0, -zc) == doctest::Approx(std::exp(-zc)).epsilon(1e-14));
    CHECK(detail::ml_series_only(1.0, 1.0, -zc) == doctest::Approx(std::exp(-zc)).epsilon(1e-4));
}

TEST_CASE("mittag-leffler: complete monotonicity sampling") {
    // a <= min(1, b): x -> E_{a,b}(-x) positive, non-increasing, with
    // non-positive first divided differences on a geometric grid.
    for (auto [a, b] : std::vector<std::pair<double, double>>{{0.5, 0.5}, {0.5, 1.0}, {1.0, 1.0}, {0.8, 1.5}}) {
        MittagLeffler ml(MLParams{a, b});
        double prev = ml(-1e-3);
        CHECK(prev > 0.0);
        for (double x = 1e-3 * 1.2; x <= 1e3; x *= 1.2) {
            const double cur = ml(-x);
            // positive until it underflows (E_{1,1}(-x) = e^{-x} hits the
            // double floor near x = 745)
            CHECK((cur > 0.0 || prev < 1e-300));
            CHECK(cur <= prev * (1.0 + 1e-12));
            prev = cur;
        }
    }
}

TEST_CASE("mainardi: pinned values and conventions") {
    // M_{1/2,1}(z) = exp(-z^2/4)/sqrt(pi)
    auto at0 = mainardi(MainardiParams{0.5, 1.0, 24}, 0.0);
    CHECK(at0.value == doctest::Approx(1.0 / std::sqrt(M_PI)).epsilon(1e-13));
    // n = 0 term at z = 0 for generic indices
    auto gen = mainardi(MainardiParams{0.3, 1.7, 10}, 0.0);
    CHECK(gen.value == doctest::Approx(reciprocal_gamma(1.7 - 0.3)).epsilon(1e-13));
    // closed form at z = 2 against the 24-term truncation; the first omitted
    // term is ~1.1e-9, which bounds the truncation error here
    auto z2 = mainardi(MainardiParams{0.5, 1.0, 24}, 2.0);
    CHECK(z2.value == doctest::Approx(std::exp(-1.0) / std::sqrt(M_PI)).epsilon(1e-8));
    CHECK(z2.last_term < 1e-8);
    auto z2full = mainardi_full(0.5, 1.0, 2.0);
    CHECK(z2full.value == doctest::Approx(std::exp(-1.0) / std::sqrt(M_PI)).epsilon(1e-13));
    // reciprocal-Gamma convention: mu = lambda - n hits poles, stays finite
    for (int n = 0; n <= 3; ++n) {
        auto r = mainardi(MainardiParams{0.5, 0.5 - n, 24}, 0.7);
        CHECK(std::isfinite(r.value));
    }
    // full-series evaluator agrees with the closed form well into the tail
    for (double z : {1.0, 4.0, 8.0, 11.0}) {
        auto r = mainardi_full(0.5, 1.0, z);
        const double exact = std::exp(-0.25 * z * z) / std::sqrt(M_PI);
        CHECK(r.value == doctest::Approx(exact).epsilon(1e-9));
    }
    CHECK_THROWS_AS(mainardi(MainardiParams{1.0, 1.0, 24}, 1.0), DomainError);
    CHECK_THROWS_AS(mainardi(MainardiParams{0.5, 1.0, 24}, -1.0), DomainError);
}

TEST_CASE("neutral kernel: closed form, positivity, integrability") {
    // value at x = 1 is the continuous extension 1/(2 pi (1 + cos(pi theta)))
    for (double th : {0.2, 0.5, 0.8}) {
        CHECK(neutral_kernel(th, 1.0) ==
              doctest::Approx(1.0 / (2.0 * M_PI * (1.0 + std::cos(M_PI * th)))).epsilon(1e-12));
    }
    CHECK(neutral_kernel(0.5, 1.0) == doctest::Approx(1.0 / (2.0 * M_PI)).epsilon(1e-13));
    CHECK(neutral_kernel(0.5, 1e-8) < 1e-6);
    // positivity on a grid and finiteness of the d x / x integral (trapezoid
    // over a log grid is a Riemann sum for the d(log x) measure)
    for (double th : {0.1, 0.3, 0.5, 0.7, 0.9}) {
        double acc = 0.0;
        double prev = neutral_kernel(th, 1e-6);
        for (double x = 1e-6; x <= 1e6; x *= 1.3) {
            const double v = neutral_kernel(th, x);
            CHECK(v > 0.0);
            acc += 0.5 * (v + prev) * std::log(1.3);
            prev = v;
        }
        CHECK(std::isfinite(acc));
        CHECK(acc > 0.0);
    }
    CHECK_THROWS_AS(neutral_kernel(1.0, 1.0), DomainError);
    CHECK_THROWS_AS(neutral_kernel(0.5, 0.0), DomainError);
}

TEST_CASE("fox small-x classification: pinned cases") {
    // eta = beta = 1: case 4, constant 2 Gamma(d/alpha) / (alpha Gamma(d/2))
    {
        FracParams p{1.3, 1.0, 0.0, 2.0, 2};
        auto r = fox_small_x(p, 1.0);
        CHECK(r.case_id == 4);
        CHECK(r.leading_coefficient ==
              doctest::Approx(2.0 * gamma_fn(2.0 / 1.3) / (1.3 * gamma_fn(1.0))).epsilon(1e-12));
    }
    {
        // heat-kernel parameters: the constant is exactly 1
        FracParams p{2.0, 1.0, 0.0, 2.0, 1};
        auto r = fox_small_x(p, 1.0);
        CHECK(r.case_id == 4);
        CHECK(r.leading_coefficient == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(r.remainder_order == doctest::Approx(2.0));
    }
    {
        // eta != beta, d < alpha: case 3 with the stated Gamma ratio
        FracParams p{2.0, 1.0, 0.5, 2.0, 1};
        const double eta = 1.5;
        auto r = fox_small_x(p, eta);
        CHECK(r.case_id == 3);
        const double expect = (2.0 / 2.0) * gamma_fn(1.0 - 0.5) * gamma_fn(0.5) *
                              reciprocal_gamma(eta - 0.5 * 1.0) * reciprocal_gamma(0.5);
        CHECK(r.leading_coefficient == doctest::Approx(expect).epsilon(1e-12));
    }
    {
        // boundary eta -> beta reclassifies into the special case, never NaN
        FracParams p{2.0, 0.75, 0.0, 2.0, 2};
        auto r = fox_small_x(p, 0.75 + 1e-15);
        CHECK(r.case_id == 8);
        CHECK(std::isfinite(r.leading_coefficient));
        CHECK(r.leading_coefficient == doctest::Approx(0.75 / gamma_fn(2.0)).epsilon(1e-12));
    }
    {
        // divergent cases carry finite nonzero coefficients
        FracParams p{1.5, 0.5, 0.5, 2.0, 2};
        auto r = fox_small_x(p, 1.0);
        CHECK(r.case_id == 1);
        CHECK(r.form == SmallXForm::Power);
        CHECK(r.leading_exponent == doctest::Approx(1.5 - 2.0));
        CHECK(std::isfinite(r.leading_coefficient));
        CHECK(r.leading_coefficient != 0.0);
    }
}

TEST_CASE("fox tail law: pinned constants") {
    // Cauchy configuration: A_1 = 1/pi, tail (1/pi)|x|^{-2}
    {
        FracParams p{1.0, 1.0, 0.0, 2.0, 1};
        TailLaw law = fox_tail(p, GreenKind::Y);
        CHECK(law.form == TailLaw::Form::Power);
        CHECK(law.A == doctest::Approx(1.0 / M_PI).epsilon(1e-12));
        CHECK(law(10.0, p) == doctest::Approx(1.0 / (M_PI * 100.0)).epsilon(1e-12));
    }
    // heat configuration: a = 0, b = 1/(2 nu), c = 2, A = (2 pi nu)^{-1/2}
    {
        FracParams p{2.0, 1.0, 0.0, 2.0, 1};
        TailLaw law = fox_tail(p, GreenKind::Y);
        CHECK(law.form == TailLaw::Form::StretchedExp);
        CHECK(law.a == doctest::Approx(0.0));
        CHECK(law.b == doctest::Approx(1.0 / (2.0 * p.nu)).epsilon(1e-12));
        CHECK(law.c == doctest::Approx(2.0));
        CHECK(law.A == doctest::Approx(1.0 / std::sqrt(2.0 * M_PI * p.nu)).epsilon(1e-12));
    }
    // A_alpha > 0 throughout alpha in (0,2)
    for (double alpha : {0.5, 1.0, 1.5, 1.9}) {
        FracParams p{alpha, 0.8, 0.2, 1.5, 1};
        CHECK(fox_tail(p, GreenKind::Y).A > 0.0);
        CHECK(fox_tail(p, GreenKind::Z).A > 0.0);
    }
    // c = 2/(2-beta) invariant for the alpha=2 family
    for (double beta : {0.5, 1.0, 1.5}) {
        FracParams p{2.0, beta, 0.1, 2.0, 1};
        CHECK(fox_tail(p, GreenKind::Y).c == doctest::Approx(2.0 / (2.0 - beta)).epsilon(1e-14));
    }
}
