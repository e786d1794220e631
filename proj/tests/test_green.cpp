#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <vector>

#include "stfrac/fft.hpp"
#include "stfrac/gammafn.hpp"
#include "stfrac/green.hpp"
#include "test_util.hpp"

using namespace stfrac;
using testutil::Rand;

namespace {
double gaussian_kernel(const FracParams& p, double t, double r) {
    return std::pow(2.0 * M_PI * p.nu * t, -0.5 * p.d) * std::exp(-r * r / (2.0 * p.nu * t));
}
} // namespace

TEST_CASE("heat-kernel degeneration (alpha=2, beta=1, gamma=0), d=1,2,3") {
    for (int d : {1, 2, 3}) {
        FracParams p{2.0, 1.0, 0.0, 2.0, d};
        Rand rng(17 + d);
        for (int i = 0; i < 40; ++i) {
            const double t = rng.uniform(0.05, 4.0);
            const double r = rng.uniform(0.0, 4.0 * std::sqrt(p.nu * t));
            // exact evaluation path: d = 1 via the closed form, d >= 2 via
            // direct spectral quadrature
            const double got = green_eval_radial(p, GreenKind::Y, t, r, true).value;
            const double want = gaussian_kernel(p, t, r);
            CHECK(got == doctest::Approx(want).epsilon(1e-8));
        }
        // the cached-profile path stays within its own accuracy estimate
        auto prof = green_profile(p, GreenKind::Y);
        const double g1 = green_eval_radial(p, GreenKind::Y, 1.0, 1.0).value;
        CHECK(std::abs(g1 - gaussian_kernel(p, 1.0, 1.0)) <= 4.0 * prof->accuracy_estimate() + 1e-12);
    }
}

TEST_CASE("Cauchy degeneration (alpha=1, beta=1, gamma=0, nu=2, d=1) on the spectral path") {
    FracParams p{1.0, 1.0, 0.0, 2.0, 1};
    Rand rng(5);
    for (int i = 0; i < 20; ++i) {
        const double t = rng.uniform(0.2, 3.0);
        const double x = rng.uniform(0.0, 8.0);
        const double want = t / (M_PI * (t * t + x * x));
        const double got = green_eval_radial(p, GreenKind::Y, t, x, true).value;
        CHECK(got == doctest::Approx(want).epsilon(1e-5));
    }
    // cached-profile path agrees too
    CHECK(green_eval_radial(p, GreenKind::Y, 1.0, 0.0).value ==
          doctest::Approx(1.0 / M_PI).epsilon(1e-6));
}

TEST_CASE("alpha=2, d=1: spectral inversion agrees with the Mainardi closed form") {
    // Cross-validation of the oscillatory quadrature against the independent
    // series representation.
    for (double beta : {0.75, 1.25}) {
        FracParams p{2.0, beta, 0.25, 2.0, 1};
        for (double r : {0.0, 0.4, 1.1, 2.5}) {
            const double closed = green_eval_radial(p, GreenKind::Y, 1.0, r, true).value;
            const double spectral = spectral_invert(p, GreenKind::Y, r).value;
            CHECK(spectral == doctest::Approx(closed).epsilon(1e-8));
        }
    }
}

TEST_CASE("green_fourier: pinned values") {
    FracParams p{1.7, 0.8, 0.3, 1.3, 2};
    // xi = 0: t^{beta+gamma-1} / Gamma(beta+gamma) for Y
    for (double t : {0.3, 1.0, 2.5}) {
        CHECK(green_fourier(p, GreenKind::Y, t, 0.0) ==
              doctest::Approx(std::pow(t, p.beta + p.gamma - 1.0) *
                              reciprocal_gamma(p.beta + p.gamma))
                  .epsilon(1e-12));
    }
    // Zstar at xi = 0 is 1
    FracParams pf{1.7, 1.4, 0.3, 1.3, 2};
    CHECK(green_fourier(pf, GreenKind::Zstar, 2.0, 0.0) == doctest::Approx(1.0).epsilon(1e-12));
    // heat configuration at t = 1, xi = 1: e^{-1}
    FracParams she{2.0, 1.0, 0.0, 2.0, 1};
    CHECK(green_fourier(she, GreenKind::Y, 1.0, 1.0) ==
          doctest::Approx(std::exp(-1.0)).epsilon(1e-12));
    CHECK_THROWS_AS(green_fourier(she, GreenKind::Y, 0.0, 1.0), DomainError);
    CHECK_THROWS_AS(green_fourier(she, GreenKind::Zstar, 1.0, 1.0), DomainError);
}

TEST_CASE("total mass: pinned values") {
    FracParams slow{1.5, 0.8, 0.4, 2.0, 1};
    CHECK(total_mass(slow, GreenKind::Z, 0.7) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(total_mass(slow, GreenKind::Z, 2.3) == doctest::Approx(1.0).epsilon(1e-12));
    FracParams fast{1.8, 1.5, 0.0, 2.0, 1};
    CHECK(total_mass(fast, GreenKind::Z, 1.7) == doctest::Approx(1.7).epsilon(1e-12));
    CHECK(total_mass(fast, GreenKind::Zstar, 1.7) == doctest::Approx(1.0).epsilon(1e-12));
    for (double t : {0.4, 1.0, 3.0}) {
        CHECK(total_mass(slow, GreenKind::Y, t) ==
              doctest::Approx(std::pow(t, slow.beta + slow.gamma - 1.0) *
                              reciprocal_gamma(slow.beta + slow.gamma))
                  .epsilon(1e-12));
    }
}

TEST_CASE("scale_reduce: pinned values and the scaling identity") {
    FracParams she{2.0, 1.0, 0.0, 2.0, 1};
    {
        auto [pref, xr] = scale_reduce(she, 1.0, {0.7});
        CHECK(pref == doctest::Approx(1.0));
        CHECK(xr[0] == doctest::Approx(0.7));
    }
    {
        auto [pref, xr] = scale_reduce(she, 4.0, {1.0});
        CHECK(pref == doctest::Approx(0.5).epsilon(1e-14));
        CHECK(xr[0] == doctest::Approx(0.5).epsilon(1e-14));
    }
    {
        FracParams p{1.4, 0.7, 0.3, 1.2, 2};
        auto [pref, xr] = scale_reduce(p, 2.5, {0.0, 0.0});
        CHECK(pref == doctest::Approx(std::pow(2.5, p.beta + p.gamma - 1.0 - p.d * p.beta / p.alpha)));
        CHECK(xr[0] == 0.0);
    }
    // identity at 100 random (t,x): the evaluator routes through the
    // reduction, so the two code paths must agree to machine level; the exact
    // path additionally matches the closed form
    Rand rng(99);
    for (int i = 0; i < 100; ++i) {
        const double t = rng.uniform(0.1, 5.0);
        const double x = rng.uniform(-6.0, 6.0);
        auto [pref, xr] = scale_reduce(she, t, {x});
        const double via_reduction =
            pref * green_eval_radial(she, GreenKind::Y, 1.0, std::abs(xr[0])).value;
        const double direct_eval = green_eval_radial(she, GreenKind::Y, t, std::abs(x)).value;
        CHECK(via_reduction == doctest::Approx(direct_eval).epsilon(1e-12));
        const double exact = pref * green_eval_radial(she, GreenKind::Y, 1.0, std::abs(xr[0]), true).value;
        CHECK(exact == doctest::Approx(gaussian_kernel(she, t, std::abs(x))).epsilon(1e-12));
    }
}

TEST_CASE("l2 law: pinned values, exponent, quadrature consistency") {
    FracParams she{2.0, 1.0, 0.0, 2.0, 1};
    // closed-form value at t=1 and the brute-force csharp oracle
    CHECK(l2_norm_sq(she, 1.0) == doctest::Approx(1.0 / (2.0 * std::sqrt(2.0 * M_PI))).epsilon(1e-10));
    {
        // brute quadrature of (2/(Gamma(1/2) (4 pi)^{1/2})) Int_0^inf e^{-2u^2} du
        auto f = [](double u) { return std::exp(-2.0 * u * u); };
        QuadResult q = integrate(f, 0.0, 10.0, 1e-14, 1e-12);
        const double want = 2.0 / (std::sqrt(M_PI) * std::sqrt(4.0 * M_PI)) * q.value;
        CHECK(csharp_constant(she) == doctest::Approx(want).epsilon(1e-10));
    }
    // exponent exact by the two-point log ratio
    for (auto p : {FracParams{2.0, 1.0, 0.0, 2.0, 1}, FracParams{1.6, 0.9, 0.3, 1.5, 1},
                   FracParams{1.5, 1.2, 0.4, 2.0, 2}}) {
        const double e_expected = 2.0 * (p.beta + p.gamma - 1.0) - p.d * p.beta / p.alpha;
        const double slope = std::log(l2_norm_sq(p, 4.0) / l2_norm_sq(p, 1.0)) / std::log(4.0);
        CHECK(slope == doctest::Approx(e_expected).epsilon(1e-12));
    }
    // direct spatial quadrature of Y^2 matches within 1e-3
    for (auto p : {FracParams{2.0, 1.0, 0.0, 2.0, 1}, FracParams{1.5, 0.8, 0.2, 2.0, 1}}) {
        auto prof = green_profile(p, GreenKind::Y);
        const auto& r = prof->radii();
        const auto& g = prof->samples();
        double acc = 0.0;
        for (std::size_t i = 0; i + 1 < r.size(); ++i) {
            const double f0 = std::pow(r[i], p.d - 1.0) * g[i] * g[i];
            const double f1 = std::pow(r[i + 1], p.d - 1.0) * g[i + 1] * g[i + 1];
            acc += 0.5 * (f0 + f1) * (r[i + 1] - r[i]);
        }
        auto b = small_x_classify(p, GreenKind::Y);
        acc += b.limit * b.limit * std::pow(r.front(), static_cast<double>(p.d)) / p.d;
        const double direct = testutil::surface_area(p.d) * acc;
        CHECK(direct == doctest::Approx(l2_norm_sq(p, 1.0)).epsilon(1e-3));
    }
    FracParams bad{0.6, 0.9, 0.8, 2.0, 2}; // d >= 2 alpha
    CHECK_THROWS_AS(l2_norm_sq(bad, 1.0), DivergenceError);
}

TEST_CASE("sign classification: pinned verdicts") {
    CHECK(classify_sign(FracParams{1.5, 0.5, 0.3, 2.0, 2}, GreenKind::Y) ==
          SignVerdict::NonnegativeI);
    CHECK(classify_sign(FracParams{1.0, 1.5, 0.0, 2.0, 4}, GreenKind::Y) == SignVerdict::Indefinite);
    CHECK(classify_sign(FracParams{2.0, 1.5, 0.0, 2.0, 3}, GreenKind::Zstar) ==
          SignVerdict::NonnegativeIII);
    CHECK(classify_sign(FracParams{2.0, 1.0, 0.0, 2.0, 1}, GreenKind::Y) ==
          SignVerdict::NonnegativeII);
    CHECK(classify_sign(FracParams{2.0, 1.0, 0.5, 2.0, 1}, GreenKind::Y) == SignVerdict::Unknown);
    CHECK(classify_sign(FracParams{2.0, 1.0, 1.5, 2.0, 1}, GreenKind::Y) ==
          SignVerdict::NonnegativeII);
    CHECK(classify_sign(FracParams{1.2, 1.5, 0.0, 2.0, 2}, GreenKind::Y) == SignVerdict::Unknown);
    CHECK(classify_sign(FracParams{1.5, 1.5, 3.0, 2.0, 1}, GreenKind::Y) ==
          SignVerdict::NonnegativeIV);
}

TEST_CASE("small-x classification: pinned behaviors") {
    // gamma > 0 and alpha <= d < 2 alpha: divergence
    {
        FracParams p{1.5, 0.5, 0.5, 2.0, 2};
        auto b = small_x_classify(p, GreenKind::Y);
        CHECK(b.kind == BoundaryBehavior::Kind::DivergesPower);
        CHECK(b.exponent == doctest::Approx(1.5 - 2.0));
    }
    // gamma = 0, beta = 1, alpha > d: finite
    {
        FracParams p{1.6, 1.0, 0.0, 2.0, 1};
        auto b = small_x_classify(p, GreenKind::Y);
        CHECK(b.kind == BoundaryBehavior::Kind::Finite);
        CHECK(std::isfinite(b.limit));
        CHECK(b.limit > 0.0);
    }
    // heat kernel: finite limit 1/(2 sqrt(pi))
    {
        FracParams p{2.0, 1.0, 0.0, 2.0, 1};
        auto b = small_x_classify(p, GreenKind::Y);
        CHECK(b.kind == BoundaryBehavior::Kind::Finite);
        CHECK(b.limit == doctest::Approx(1.0 / (2.0 * std::sqrt(M_PI))).epsilon(1e-12));
    }
    // log case: eta != beta and d = alpha
    {
        FracParams p{2.0, 0.5, 0.3, 2.0, 2};
        auto b = small_x_classify(p, GreenKind::Y);
        CHECK(b.kind == BoundaryBehavior::Kind::DivergesLog);
        CHECK(b.coefficient > 0.0);
    }
    // divergent case refuses evaluation at x = 0
    {
        FracParams p{1.5, 0.5, 0.5, 2.0, 2};
        CHECK_THROWS_AS(green_eval_radial(p, GreenKind::Y, 1.0, 0.0), PoleError);
    }
}

TEST_CASE("profile mass reproduces total_mass within 1e-4 (nonnegative cases)") {
    for (auto p : {FracParams{2.0, 1.0, 0.0, 2.0, 1}, FracParams{2.0, 0.75, 0.0, 2.0, 1},
                   FracParams{1.5, 0.8, 0.1, 2.0, 1}, FracParams{1.0, 0.9, 0.0, 2.0, 1}}) {
        REQUIRE(is_nonnegative(classify_sign(p, GreenKind::Y)));
        const double mass = testutil::profile_mass(p, GreenKind::Y);
        CHECK(mass == doctest::Approx(total_mass(p, GreenKind::Y, 1.0)).epsilon(1e-4));
    }
}

TEST_CASE("nonnegativity sampling for a classified profile") {
    FracParams p{1.5, 0.8, 0.1, 2.0, 1};
    REQUIRE(is_nonnegative(classify_sign(p, GreenKind::Y)));
    auto prof = green_profile(p, GreenKind::Y);
    Rand rng(3);
    double mn = 1e300;
    for (int i = 0; i < 2000; ++i) {
        const double t = rng.uniform(0.2, 3.0);
        const double x = rng.uniform(0.0, 20.0);
        mn = std::min(mn, green_eval_radial(p, GreenKind::Y, t, x).value);
    }
    CHECK(mn >= -prof->accuracy_estimate());
}

TEST_CASE("tail law: regression recovers exponent and constant") {
    // power case
    {
        FracParams p{1.2, 0.8, 0.0, 2.0, 1};
        TailLaw law = fox_tail(p, GreenKind::Y);
        const double R = tail_truncation_radius(p, GreenKind::Y, 1e-4);
        auto fit = testutil::fit_power_tail(p, GreenKind::Y, R, 20.0 * R);
        CHECK(fit.exponent == doctest::Approx(p.d + p.alpha).epsilon(0.02));
        CHECK(fit.amplitude == doctest::Approx(law.A).epsilon(0.10));
    }
    // stretched-exponential case (heat kernel: exact Gaussian)
    {
        FracParams p{2.0, 1.0, 0.0, 2.0, 1};
        TailLaw law = fox_tail(p, GreenKind::Y);
        auto fit = testutil::fit_stretched_tail(p, GreenKind::Y, law.c, law.a, 4.0, 9.0);
        CHECK(fit.exponent == doctest::Approx(law.b).epsilon(0.02));
        CHECK(fit.amplitude == doctest::Approx(law.A).epsilon(0.10));
    }
}

TEST_CASE("Fourier round-trip on a sampled profile") {
    // DFT of sampled Y(1,.) against the exact transform, d = 1.
    FracParams p{1.5, 0.8, 0.2, 2.0, 1};
    const double L = 80.0;
    const int n = 1 << 18;
    const double dx = 2.0 * L / n;
    auto prof = green_profile(p, GreenKind::Y);
    std::vector<cplx> f(n);
    for (int j = 0; j < n; ++j) {
        const double x = (j <= n / 2 ? j : j - n) * dx;
        f[static_cast<std::size_t>(j)] = prof->value(std::abs(x)).value;
    }
    fft(f, -1);
    const double dxi = M_PI / L;
    for (int m = 1; m <= 160; m += 7) {
        const double xi = m * dxi;
        if (xi > 12.0) break;
        const double got = f[static_cast<std::size_t>(m)].real() * dx;
        const double want = green_fourier(p, GreenKind::Y, 1.0, xi);
        CHECK(got == doctest::Approx(want).epsilon(1e-3));
    }
}

TEST_CASE("fast-diffusion profiles: Zstar defined, Z mass grows") {
    FracParams p{2.0, 1.5, 0.0, 2.0, 1};
    // closed-form path at t=1, x=0: Zstar(1,0) = M_{3/4,1}(0)/2 with nu=2
    const double got = green_eval_radial(p, GreenKind::Zstar, 1.0, 0.0, true).value;
    CHECK(got == doctest::Approx(0.5 * reciprocal_gamma(0.25)).epsilon(1e-10));
    CHECK_THROWS_AS(green_eval_radial(FracParams{2.0, 0.5, 0.0, 2.0, 1}, GreenKind::Zstar, 1.0, 0.5),
                    DomainError);
}
