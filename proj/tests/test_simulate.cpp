#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <fstream>
#include <vector>

#include "stfrac/gammafn.hpp"
#include "stfrac/green.hpp"
#include "stfrac/kernel.hpp"
#include "stfrac/simulate.hpp"
#include "test_util.hpp"

using namespace stfrac;

TEST_CASE("rho spec: forms and growth validation") {
    RhoSpec lin = RhoSpec::linear(2.0);
    lin.validate();
    CHECK(lin(3.0) == doctest::Approx(6.0));
    CHECK(lin.lip == doctest::Approx(2.0));
    RhoSpec aff = RhoSpec::affine(1.0, 0.5);
    aff.validate();
    CHECK(aff(2.0) == doctest::Approx(2.0));
    RhoSpec tab;
    tab.form = RhoSpec::Form::Table;
    tab.table = {{-1.0, -0.5}, {0.0, 0.0}, {1.0, 0.5}};
    tab.lip = 1.0;
    tab.V = 1.0;
    tab.validate();
    CHECK(tab(0.5) == doctest::Approx(0.25));
    CHECK(tab(10.0) == doctest::Approx(0.5)); // clipped beyond the table
    RhoSpec bad = RhoSpec::linear(1.0);
    bad.lip = 0.1; // claims a growth bound the function violates
    CHECK_THROWS_AS(bad.validate(), DomainError);
}

TEST_CASE("counter RNG: deterministic, mean/variance sane") {
    CHECK(counter_gaussian(7, 1, 2, 3) == counter_gaussian(7, 1, 2, 3));
    CHECK(counter_gaussian(7, 1, 2, 3) != counter_gaussian(7, 1, 2, 4));
    CHECK(counter_gaussian(7, 1, 2, 3) != counter_gaussian(8, 1, 2, 3));
    double s = 0.0, s2 = 0.0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
        const double z = counter_gaussian(42, i % 100, i / 100, i);
        s += z;
        s2 += z * z;
    }
    CHECK(std::abs(s / n) < 0.01);
    CHECK(s2 / n == doctest::Approx(1.0).epsilon(0.01));
}

TEST_CASE("j0: constants, dirac, densities") {
    FracParams she{2.0, 1.0, 0.0, 2.0, 1};
    // constant initial data propagate unchanged for beta <= 1
    CHECK(j0_eval(she, InitialDataSpec::make_constant(1.0), 0.7, {0.3}) ==
          doctest::Approx(1.0).epsilon(1e-12));
    FracParams slowfrac{2.0, 0.8, 0.2, 2.0, 1};
    CHECK(j0_eval(slowfrac, InitialDataSpec::make_constant(2.5), 1.3, {0.0}) ==
          doctest::Approx(2.5).epsilon(1e-12));
    // dirac: J0 = Z(t, x - loc)
    {
        const double got = j0_eval(she, InitialDataSpec::make_dirac(1.0, 0.2), 0.5, {1.0});
        const double want = green_eval_radial(she, GreenKind::Z, 0.5, 0.8).value;
        CHECK(got == doctest::Approx(want).epsilon(1e-10));
    }
    // fast diffusion with constant mu0 and zero mu1: total mass of Zstar is 1
    {
        FracParams fast{2.0, 1.5, 0.0, 2.0, 1};
        auto init = InitialDataSpec::make_constant(3.0);
        CHECK(j0_eval(fast, init, 1.2, {0.4}) == doctest::Approx(3.0).epsilon(1e-12));
        // grid version agrees
        GridSpec g{1.0, 16, 8.0, 64, 1};
        auto grid = j0_grid(fast, init, g);
        CHECK(grid[5 * g.cells() + 7] == doctest::Approx(3.0).epsilon(1e-9));
    }
    // bounded density: convolution against Z
    {
        InitialDataSpec dens;
        dens.form = InitialDataSpec::Form::BoundedDensity;
        dens.density = [](double x) { return 1.0 / (1.0 + x * x); };
        dens.sup_bound = 1.0;
        const double got = j0_eval(she, dens, 1.0, {0.0});
        // heat kernel convolved with the Cauchy bump, by quadrature oracle
        auto f = [&](double y) {
            return std::exp(-y * y / 4.0) / (2.0 * std::sqrt(M_PI)) / (1.0 + y * y);
        };
        QuadResult q = integrate(f, -40.0, 40.0, 1e-12, 1e-10);
        CHECK(got == doctest::Approx(q.value).epsilon(1e-6));
    }
}

TEST_CASE("deterministic solve: zero forcing, constant forcing, single mode") {
    FracParams p{2.0, 0.75, 0.25, 2.0, 1};
    GridSpec g{1.0, 64, 10.0, 128, 1};
    auto zero = [](double, const std::vector<double>&) { return 0.0; };
    auto one = [](double, const std::vector<double>&) { return 1.0; };
    {
        auto u = deterministic_solve(p, InitialDataSpec::make_constant(1.0), zero, g);
        auto j0 = j0_grid(p, InitialDataSpec::make_constant(1.0), g);
        for (std::size_t i = 0; i < u.size(); i += 37) CHECK(u[i] == doctest::Approx(j0[i]).epsilon(1e-12));
    }
    {
        // f == 1, zero init: u(t) = t^{beta+gamma} / Gamma(beta+gamma+1)
        auto u = deterministic_solve(p, InitialDataSpec::make_constant(0.0), one, g);
        const double bg = p.beta + p.gamma;
        for (int i : {15, 31, 63}) {
            const double t = (i + 1) * g.dt();
            const double want = std::pow(t, bg) * reciprocal_gamma(bg + 1.0);
            CHECK(u[static_cast<std::size_t>(i) * g.cells() + 11] ==
                  doctest::Approx(want).epsilon(1e-4));
        }
    }
    {
        // single spatial mode, constant in time: exact Mittag-Leffler
        // solution; the finer spatial grid keeps kernel aliasing below 1e-4
        GridSpec gm{1.0, 64, 10.0, 512, 1};
        const double k = 2.0 * M_PI / (2.0 * gm.x_max) * 3.0; // third grid mode
        auto mode = [k](double, const std::vector<double>& x) { return std::cos(k * x[0]); };
        auto u = deterministic_solve(p, InitialDataSpec::make_constant(0.0), mode, gm);
        for (int i : {31, 63}) {
            const double t = (i + 1) * gm.dt();
            for (int j : {0, 17}) {
                const double x = gm.displacement(j);
                const double want = spectral_mode_solution(p, k, 1.0, t) * std::cos(k * x);
                CHECK(u[static_cast<std::size_t>(i) * gm.cells() + j] ==
                      doctest::Approx(want).epsilon(1e-4));
            }
        }
    }
}

TEST_CASE("simulate: zero noise degenerates to the homogeneous solution") {
    FracParams she{2.0, 1.0, 0.0, 2.0, 1};
    GridSpec g{0.5, 32, 6.0, 64, 1};
    SimOptions opt;
    opt.store_fields = true;
    SimEnsemble e = simulate(she, RhoSpec::zero(), InitialDataSpec::make_constant(1.0), g, 5, 3, opt);
    for (int r = 0; r < 3; ++r)
        for (std::size_t i = 0; i < e.fields[r].size(); ++i) CHECK(e.fields[r][i] == e.j0[i]);
}

TEST_CASE("simulate: bitwise determinism across runs and thread counts") {
    FracParams she{2.0, 1.0, 0.0, 2.0, 1};
    GridSpec g{0.5, 32, 6.0, 64, 1};
    SimOptions one_thread;
    one_thread.threads = 1;
    one_thread.store_fields = true;
    SimOptions two_threads;
    two_threads.threads = 2;
    two_threads.store_fields = true;
    SimEnsemble a = simulate(she, RhoSpec::linear(1.0), InitialDataSpec::make_constant(1.0), g, 99,
                             20, one_thread);
    SimEnsemble b = simulate(she, RhoSpec::linear(1.0), InitialDataSpec::make_constant(1.0), g, 99,
                             20, two_threads);
    for (int r = 0; r < 20; ++r)
        for (std::size_t i = 0; i < a.fields[r].size(); ++i) REQUIRE(a.fields[r][i] == b.fields[r][i]);
    for (std::size_t i = 0; i < a.sum_u2.size(); ++i) REQUIRE(a.sum_u2[i] == b.sum_u2[i]);
    // different seed changes the fields
    SimEnsemble c = simulate(she, RhoSpec::linear(1.0), InitialDataSpec::make_constant(1.0), g, 100,
                             20, one_thread);
    CHECK(c.fields[0][100] != a.fields[0][100]);
}

TEST_CASE("simulate: mean preservation and small-lambda moment scaling") {
    FracParams she{2.0, 1.0, 0.0, 2.0, 1};
    GridSpec g{1.0, 64, 8.0, 128, 1};
    SimEnsemble e = simulate(she, RhoSpec::linear(1.0), InitialDataSpec::make_constant(1.0), g, 31,
                             400);
    // |empirical mean - 1| < 4 std/sqrt(R) at several points
    for (int i : {15, 31, 63}) {
        for (std::size_t c : {std::size_t{0}, std::size_t{40}}) {
            const double m1 = e.mean_at(i, c);
            const double m2 = e.second_moment_at(i, c);
            const double sd = std::sqrt(std::max(0.0, m2 - m1 * m1));
            CHECK(std::abs(m1 - 1.0) < 4.0 * sd / std::sqrt(400.0) + 1e-12);
        }
    }
    // Var(u) = E[u^2] - E[u]^2 scales like lambda^2 at leading order; the
    // centered estimator averaged over space removes the first-order noise of
    // the raw second moment. Fitted log-log slope is 2 +- 0.1.
    std::vector<double> lx, ly;
    for (double lam : {0.125, 0.25, 0.5}) {
        SimEnsemble el = simulate(she, RhoSpec::linear(lam), InitialDataSpec::make_constant(1.0), g,
                                  31, 400);
        double excess = 0.0;
        const int i = g.n_t - 1;
        for (std::size_t c = 0; c < g.cells(); ++c) {
            const double m1 = el.mean_at(i, c);
            excess += el.second_moment_at(i, c) - m1 * m1;
        }
        excess /= static_cast<double>(g.cells());
        REQUIRE(excess > 0.0);
        lx.push_back(std::log(lam));
        ly.push_back(std::log(excess));
    }
    auto f = fit_line(lx, ly);
    CHECK(std::abs(f.slope - 2.0) < 0.1);
}

TEST_CASE("moment estimate: zero-noise exactness, bootstrap at probes") {
    FracParams she{2.0, 1.0, 0.0, 2.0, 1};
    GridSpec g{0.5, 32, 6.0, 64, 1};
    SimEnsemble e = simulate(she, RhoSpec::zero(), InitialDataSpec::make_constant(1.0), g, 5, 120);
    auto m = moment_estimate(e, 4, 0.5, 0.0);
    CHECK(m.estimate == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(m.ci_high - m.ci_low == doctest::Approx(0.0));
    auto m3 = moment_estimate(e, 3, 0.5, 0.0);
    CHECK(m3.odd_p_note);
    // power-mean ordering within CI on a noisy ensemble
    SimEnsemble en = simulate(she, RhoSpec::linear(1.0), InitialDataSpec::make_constant(1.0), g, 6,
                              300);
    auto q2 = moment_estimate(en, 2, 0.5, 0.0);
    auto q4 = moment_estimate(en, 4, 0.5, 0.0);
    CHECK(std::pow(q2.estimate, 0.5) <= std::pow(q4.ci_high, 0.25) * (1.0 + 1e-9));
}

TEST_CASE("lyapunov estimate: zero for rho = 0, positive for strong coupling") {
    FracParams she{2.0, 1.0, 0.0, 2.0, 1};
    GridSpec g{1.0, 64, 8.0, 128, 1};
    {
        SimEnsemble e = simulate(she, RhoSpec::zero(), InitialDataSpec::make_constant(1.0), g, 5, 8);
        auto s = lyapunov_estimate(e, 2);
        CHECK(std::abs(s.slope) < 1e-12);
    }
    {
        SimEnsemble e = simulate(she, RhoSpec::linear(2.0), InitialDataSpec::make_constant(1.0), g,
                                 17, 600);
        auto s = lyapunov_estimate(e, 2);
        CHECK(s.slope > 3.0 * s.stderr_); // weak intermittency, type II signature
    }
    {
        InitialDataSpec dens;
        dens.form = InitialDataSpec::Form::BoundedDensity;
        dens.density = [](double x) { return 1.0 + 0.1 * std::sin(x); };
        dens.sup_bound = 1.1;
        GridSpec g2{0.5, 16, 6.0, 32, 1};
        SimEnsemble e = simulate(she, RhoSpec::linear(0.5), dens, g2, 3, 4);
        CHECK_THROWS_AS(lyapunov_estimate(e, 2), RegimeError);
    }
}

TEST_CASE("ensemble export round-trips a provenance header") {
    FracParams she{2.0, 1.0, 0.0, 2.0, 1};
    GridSpec g{0.25, 16, 4.0, 32, 1};
    SimEnsemble e = simulate(she, RhoSpec::linear(1.0), InitialDataSpec::make_constant(1.0), g, 5, 4);
    const std::string path = "/tmp/stfrac_ensemble_test.csv";
    write_ensemble(e, path);
    std::ifstream is(path);
    std::string first;
    std::getline(is, first);
    CHECK(first.find("\"seed\":5") != std::string::npos);
    CHECK(first.find("\"replicas\":4") != std::string::npos);
}
