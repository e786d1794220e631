#include "stfrac/simulate.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <condition_variable>
#include <fstream>
#include <mutex>
#include <thread>

#include <json.hpp>

#include "stfrac/fft.hpp"
#include "stfrac/gammafn.hpp"
#include "stfrac/green.hpp"
#include "stfrac/mittag_leffler.hpp"
#include "stfrac/quadrature.hpp"

namespace stfrac {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kTwoPi = 6.28318530717958647692;

std::uint64_t splitmix(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

double uniform_from_bits(std::uint64_t h) {
    return (static_cast<double>(h >> 11) + 1.0) * 0x1p-53; // (0, 1]
}

/// Radial frequency magnitude of the wrapped multi-index cell.
std::vector<double> frequency_magnitudes(const GridSpec& g) {
    const std::size_t cells = g.cells();
    std::vector<double> out(cells);
    const double base = kPi / g.x_max;
    for (std::size_t idx = 0; idx < cells; ++idx) {
        std::size_t rest = idx;
        double s2 = 0.0;
        for (int k = 0; k < g.d; ++k) {
            int j = static_cast<int>(rest % g.n_x);
            rest /= g.n_x;
            if (j > g.n_x / 2) j -= g.n_x;
            const double f = base * j;
            s2 += f * f;
        }
        out[idx] = std::sqrt(s2);
    }
    return out;
}

/// Fourier coefficients of the initial measure on the torus (unnormalized DFT
/// convention: multiplying by a kernel transform and inverse-FFT yields the
/// periodized convolution).
std::vector<cplx> initial_fourier(const InitialDataSpec& init, const GridSpec& g) {
    const std::size_t cells = g.cells();
    std::vector<cplx> mu(cells, cplx(0.0, 0.0));
    switch (init.form) {
        case InitialDataSpec::Form::Constant:
            mu.assign(cells, cplx(0.0, 0.0));
            mu[0] = cplx(init.constant * static_cast<double>(cells), 0.0);
            return mu;
        case InitialDataSpec::Form::Dirac: {
            if (g.d != 1) throw RegimeError("simulate: Dirac initial data supported for d = 1");
            // hat(mu)(xi_m) scaled to DFT units: mass/dx * exp(-i xi_m loc).
            const double base = kPi / g.x_max;
            for (int m = 0; m < g.n_x; ++m) {
                int mm = m > g.n_x / 2 ? m - g.n_x : m;
                const double phase = -base * mm * init.dirac_location;
                mu[m] = (init.dirac_mass / g.dx()) * cplx(std::cos(phase), std::sin(phase));
            }
            return mu;
        }
        case InitialDataSpec::Form::BoundedDensity:
        case InitialDataSpec::Form::MeasureDensity: {
            if (g.d != 1) throw RegimeError("simulate: density initial data supported for d = 1");
            std::vector<cplx> f(cells);
            for (int j = 0; j < g.n_x; ++j) f[j] = init.density(g.displacement(j));
            fft(f, -1);
            return f;
        }
    }
    return mu;
}

/// Initial field u(0, x) on the grid (for the first left-point noise slice).
std::vector<double> initial_field(const FracParams& p, const InitialDataSpec& init,
                                  const GridSpec& g, const std::vector<double>& j0_first) {
    const std::size_t cells = g.cells();
    std::vector<double> u0(cells, 0.0);
    switch (init.form) {
        case InitialDataSpec::Form::Constant:
            u0.assign(cells, init.constant);
            break;
        case InitialDataSpec::Form::BoundedDensity:
        case InitialDataSpec::Form::MeasureDensity:
            for (std::size_t c = 0; c < cells; ++c)
                u0[c] = init.density(g.displacement(static_cast<int>(c % g.n_x)));
            break;
        case InitialDataSpec::Form::Dirac:
            // No pointwise trace at t=0; seed the first slice with the
            // regularized profile at the first slice boundary.
            u0 = j0_first;
            break;
    }
    (void)p;
    return u0;
}

struct KindTables {
    // transform[j][m]: Fourier transform of the kind at lag (j+1) dt... see build.
    std::vector<std::vector<double>> rows;
};

/// FY(j dt, xi_m) for j = 1..n_t (row j-1).
std::vector<std::vector<double>> forcing_transform_table(const FracParams& p, const GridSpec& g) {
    const auto freq = frequency_magnitudes(g);
    const std::size_t cells = g.cells();
    std::vector<std::vector<double>> T(g.n_t, std::vector<double>(cells));
    MittagLeffler ml(MLParams{p.beta, p.beta + p.gamma});
    for (int j = 1; j <= g.n_t; ++j) {
        const double t = j * g.dt();
        const double tp = std::pow(t, p.beta + p.gamma - 1.0);
        const double tb = 0.5 * p.nu * std::pow(t, p.beta);
        auto& row = T[j - 1];
        for (std::size_t c = 0; c < cells; ++c)
            row[c] = tp * ml(-tb * std::pow(freq[c], p.alpha));
    }
    return T;
}

} // namespace

double RhoSpec::operator()(double u) const {
    switch (form) {
        case Form::Linear: return affine_b * u;
        case Form::Affine: return affine_a + affine_b * u;
        case Form::Table: {
            if (table.empty()) return 0.0;
            if (u <= table.front().first) {
                return table.front().second;
            }
            if (u >= table.back().first) {
                return table.back().second;
            }
            auto it = std::lower_bound(table.begin(), table.end(), std::make_pair(u, -1e300));
            auto lo = it - 1;
            const double w = (u - lo->first) / (it->first - lo->first);
            return lo->second + w * (it->second - lo->second);
        }
    }
    return 0.0;
}

void RhoSpec::validate() const {
    if (!(lip >= 0.0) || !(V >= 0.0)) throw DomainError("RhoSpec: need Lip >= 0, V >= 0");
    for (double u = -64.0; u <= 64.0; u += 0.5) {
        const double r = (*this)(u);
        const double bound = lip * lip * (V * V + u * u);
        if (r * r > bound * (1.0 + 1e-9) + 1e-12)
            throw DomainError("RhoSpec: growth bound |rho|^2 <= Lip^2 (V^2 + u^2) violated");
        if (lower_lip) {
            const double lb = (*lower_lip) * (*lower_lip) * (lower_v * lower_v + u * u);
            if (r * r < lb * (1.0 - 1e-9) - 1e-12)
                throw DomainError("RhoSpec: lower growth bound violated");
        }
    }
}

RhoSpec RhoSpec::affine(double a, double b) {
    RhoSpec r;
    r.form = Form::Affine;
    r.affine_a = a;
    r.affine_b = b;
    r.lip = std::sqrt(2.0) * std::max(std::abs(b), 1e-300);
    r.V = std::abs(b) > 0 ? std::abs(a / b) : std::abs(a);
    return r;
}

double counter_gaussian(std::uint64_t seed, std::uint64_t replica, std::uint64_t step,
                        std::uint64_t cell) {
    std::uint64_t h = splitmix(seed ^ 0x517cc1b727220a95ULL);
    h = splitmix(h ^ (replica * 0x2545f4914f6cdd1dULL + 0x9e3779b97f4a7c15ULL));
    h = splitmix(h ^ (step * 0xd6e8feb86659fd93ULL + 0x123456789abcdef1ULL));
    h = splitmix(h ^ (cell * 0xca01f9dd51b143dfULL + 0x0123456789abcdefULL));
    const double u1 = uniform_from_bits(h);
    const double u2 = uniform_from_bits(splitmix(h + 0x9e3779b97f4a7c15ULL));
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(kTwoPi * u2);
}

std::vector<double> j0_grid(const FracParams& p, const InitialDataSpec& init, const GridSpec& g) {
    p.validate();
    g.validate();
    const std::size_t cells = g.cells();
    const auto freq = frequency_magnitudes(g);
    std::vector<int> shape(static_cast<std::size_t>(g.d), g.n_x);
    std::vector<double> out(static_cast<std::size_t>(g.n_t) * cells, 0.0);

    MittagLeffler mlz(MLParams{p.beta, static_cast<double>(p.ceil_beta())});
    std::vector<cplx> mu = initial_fourier(init, g);
    std::vector<cplx> mu1;
    const bool fast = p.fast_diffusion();
    if (fast) {
        InitialDataSpec vel = init.velocity ? *init.velocity : InitialDataSpec::make_constant(0.0);
        mu1 = initial_fourier(vel, g);
    }
    MittagLeffler mlzs(MLParams{p.beta, 1.0});
    for (int i = 0; i < g.n_t; ++i) {
        const double t = (i + 1) * g.dt();
        const double tb = 0.5 * p.nu * std::pow(t, p.beta);
        std::vector<cplx> acc(cells);
        if (!fast) {
            for (std::size_t c = 0; c < cells; ++c)
                acc[c] = mu[c] * mlz(-tb * std::pow(freq[c], p.alpha));
        } else {
            const double tz = t; // FZ has prefactor t^{ceil(beta)-1} = t
            for (std::size_t c = 0; c < cells; ++c) {
                const double arg = -tb * std::pow(freq[c], p.alpha);
                acc[c] = mu[c] * mlzs(arg) + mu1[c] * (tz * mlz(arg));
            }
        }
        fft_nd(acc, shape, +1);
        for (std::size_t c = 0; c < cells; ++c)
            out[static_cast<std::size_t>(i) * cells + c] = acc[c].real();
    }
    return out;
}

double j0_eval(const FracParams& p, const InitialDataSpec& init, double t,
               const std::vector<double>& x) {
    p.validate();
    if (!(t > 0.0)) throw DomainError("j0_eval: t must be > 0");
    if (!admissible_initial(p, init)) throw RegimeError("j0_eval: initial data not admissible");
    const bool fast = p.fast_diffusion();
    auto conv_kind = [&](const InitialDataSpec& d, GreenKind kind) -> double {
        switch (d.form) {
            case InitialDataSpec::Form::Constant:
                return d.constant * total_mass(p, kind, t);
            case InitialDataSpec::Form::Dirac: {
                std::vector<double> y = x;
                y[0] -= d.dirac_location;
                return d.dirac_mass * green_eval(p, kind, t, y);
            }
            case InitialDataSpec::Form::BoundedDensity:
            case InitialDataSpec::Form::MeasureDensity: {
                if (p.d != 1) throw RegimeError("j0_eval: density data supported for d = 1");
                auto prof = green_profile(p, kind);
                const double pref = std::pow(t, scaling_time_exponent(p, kind));
                const double rs = std::pow(t, -p.beta / p.alpha);
                auto f = [&](double y) {
                    return d.density(y) * pref * prof->value(rs * std::abs(x[0] - y)).value;
                };
                const double R = std::pow(t, p.beta / p.alpha) *
                                     tail_truncation_radius(p, kind, 1e-7, 1e-10) +
                                 std::abs(x[0]) + 1.0;
                QuadResult q = integrate(f, x[0] - R, x[0] + R, 1e-11, 1e-8);
                return q.value;
            }
        }
        return 0.0;
    };
    if (!fast) return conv_kind(init, GreenKind::Z);
    InitialDataSpec vel = init.velocity ? *init.velocity : InitialDataSpec::make_constant(0.0);
    return conv_kind(init, GreenKind::Zstar) + conv_kind(vel, GreenKind::Z);
}

double spectral_mode_solution(const FracParams& p, double xi_mag, double fhat, double t) {
    const double theta = p.beta + p.gamma;
    return fhat * std::pow(t, theta) *
           mittag_leffler(p.beta, theta + 1.0, -0.5 * p.nu * std::pow(xi_mag, p.alpha) * std::pow(t, p.beta));
}

std::vector<double> deterministic_solve(const FracParams& p, const InitialDataSpec& init,
                                        const std::function<double(double, const std::vector<double>&)>& f,
                                        const GridSpec& g) {
    p.validate();
    g.validate();
    if (g.d != p.d) throw DomainError("deterministic_solve: grid dimension mismatch");
    const std::size_t cells = g.cells();
    const double dt = g.dt();
    const double dxd = std::pow(g.dx(), g.d);
    std::vector<int> shape(static_cast<std::size_t>(g.d), g.n_x);

    std::vector<double> u = j0_grid(p, init, g);

    // Forcing kernel slices W_j ~ Y((j+1/2) dt, .); the j = 0 slice carries
    // the exact integrated mass of the first lag cell.
    auto profile = green_profile(p, GreenKind::Y);
    const double texp = scaling_time_exponent(p, GreenKind::Y);
    const double sexp = -p.beta / p.alpha;
    std::vector<std::vector<cplx>> FW(g.n_t, std::vector<cplx>(cells));
    std::vector<double> radius(cells);
    for (std::size_t c = 0; c < cells; ++c) radius[c] = g.radius(c);
    // Cumulative mass M(T) = Int_0^T total_mass(Y, tau) dtau = T^{bg}/Gamma(bg+1).
    const double bg = p.beta + p.gamma;
    auto cum_mass = [&](double T) { return std::pow(T, bg) * reciprocal_gamma(bg + 1.0); };
    for (int j = 0; j < g.n_t; ++j) {
        const double lag = (j + 0.5) * dt;
        const double pref = std::pow(lag, texp);
        const double rs = std::pow(lag, sexp);
        std::vector<cplx> w(cells);
        double sum = 0.0;
        for (std::size_t c = 0; c < cells; ++c) {
            const double v = pref * profile->value(rs * radius[c]).value;
            w[c] = v;
            sum += v;
        }
        // Rescale each slice to its exact cell-averaged mass: this makes the
        // scheme mass-conserving despite grid aliasing of the algebraic
        // transform tails (and handles the singular first cell).
        const double want = (cum_mass((j + 1) * dt) - cum_mass(j * dt)) / dt;
        const double have = sum * dxd;
        if (have > 0.0)
            for (auto& v : w) v *= want / have;
        fft_nd(w, shape, -1);
        FW[j] = std::move(w);
    }

    // Forcing slices at midpoints.
    std::vector<std::vector<cplx>> Ff(g.n_t, std::vector<cplx>(cells));
    std::vector<double> pt(g.d);
    for (int k = 0; k < g.n_t; ++k) {
        const double s = (k + 0.5) * dt;
        std::vector<cplx> row(cells);
        for (std::size_t c = 0; c < cells; ++c) {
            std::size_t rest = c;
            for (int ax = 0; ax < g.d; ++ax) {
                pt[ax] = g.displacement(static_cast<int>(rest % g.n_x));
                rest /= g.n_x;
            }
            row[c] = f(s, pt);
        }
        fft_nd(row, shape, -1);
        Ff[k] = std::move(row);
    }

    for (int i = 0; i < g.n_t; ++i) {
        // u at t = (i+1) dt accumulates forcing slices k = 0..i with kernel lag
        // index i - k.
        std::vector<cplx> acc(cells, cplx(0.0, 0.0));
        for (int k = 0; k <= i; ++k) {
            const auto& w = FW[i - k];
            const auto& ff = Ff[k];
            for (std::size_t c = 0; c < cells; ++c) acc[c] += w[c] * ff[c];
        }
        const double scale = dt * dxd;
        fft_nd(acc, shape, +1);
        double* base = u.data() + static_cast<std::size_t>(i) * cells;
        for (std::size_t c = 0; c < cells; ++c) base[c] += scale * acc[c].real();
    }
    return u;
}

SimEnsemble simulate(const FracParams& p, const RhoSpec& rho, const InitialDataSpec& init,
                     const GridSpec& g, std::uint64_t master_seed, int replicas,
                     const SimOptions& options) {
    p.validate();
    g.validate();
    rho.validate();
    if (g.d != p.d) throw DomainError("simulate: grid dimension mismatch");
    if (replicas < 1) throw DomainError("simulate: need replicas >= 1");
    DalangReport rep = dalang_check(p);
    if (!rep.admissible) throw RegimeError("simulate: Dalang's condition fails for these parameters");
    if (!admissible_initial(p, init)) throw RegimeError("simulate: initial data not admissible");
    SignVerdict sv = classify_sign(p, GreenKind::Y);

    SimEnsemble e;
    e.params = p;
    e.rho = rho;
    e.init = init;
    e.grid = g;
    e.master_seed = master_seed;
    e.replicas = replicas;
    e.probe_cells = options.probe_cells;
    if (e.probe_cells.empty()) e.probe_cells = {0, g.cells() / 4};

    const std::size_t cells = g.cells();
    const int nt = g.n_t;
    const double dt = g.dt();
    const double dxd = std::pow(g.dx(), g.d);

    // Stability sanity check (explicit left-point rule).
    {
        BoundaryBehavior bb = small_x_classify(p, GreenKind::Y);
        double ypeak;
        if (bb.kind == BoundaryBehavior::Kind::Finite) {
            ypeak = green_eval_radial(p, GreenKind::Y, dt, 0.0).value;
        } else {
            ypeak = green_eval_radial(p, GreenKind::Y, dt, 0.5 * g.dx()).value;
        }
        const double factor = dt * ypeak * ypeak * dxd * rho.lip * rho.lip;
        if (factor > options.stability_threshold)
            throw NumericError(
                "simulate: explicit scheme unstable (dt * sup Y^2 * dx^d * Lip^2 = " +
                std::to_string(factor) + "); refine the grid (larger n_t, or smaller t_max)");
    }

    auto T = forcing_transform_table(p, g);
    e.j0 = j0_grid(p, init, g);
    std::vector<double> u0 =
        initial_field(p, init, g, std::vector<double>(e.j0.begin(), e.j0.begin() + cells));

    e.sum_u.assign(static_cast<std::size_t>(nt) * cells, 0.0);
    e.sum_u2.assign(static_cast<std::size_t>(nt) * cells, 0.0);
    e.sum_u4.assign(static_cast<std::size_t>(nt) * cells, 0.0);
    e.traces.assign(replicas, {});
    if (options.store_fields) e.fields.assign(replicas, {});

    // Variogram lags.
    if (options.collect_variograms) {
        for (int l : {4, 6, 8, 11, 16, 23, 32, 45, 64})
            if (l < nt / 3) e.time_lags.push_back(l);
        for (int l : {4, 6, 8, 11, 16, 23})
            if (l < g.n_x / 4) e.space_lags.push_back(l);
    }
    const int max_tlag = e.time_lags.empty() ? 0 : e.time_lags.back();
    e.vario_time.assign(e.time_lags.size(), 0.0);
    e.vario_space.assign(e.space_lags.size(), 0.0);

    const double noise_sd = std::sqrt(dt * dxd);
    std::vector<int> shape(static_cast<std::size_t>(g.d), g.n_x);

    int nthreads = options.threads > 0
                       ? options.threads
                       : std::min(8u, std::max(1u, std::thread::hardware_concurrency()));
    nthreads = std::min(nthreads, replicas);

    // Per-replica work, merged into the shared accumulators in replica-block
    // order so results do not depend on scheduling.
    const int block = 16;
    const int nblocks = (replicas + block - 1) / block;
    std::atomic<int> next_block{0};
    int merge_turn = 0;
    std::mutex merge_mutex;
    std::condition_variable merge_cv;

    auto worker = [&]() {
        std::vector<std::vector<cplx>> qhat(nt, std::vector<cplx>(cells));
        std::vector<double> u(cells);
        std::vector<std::vector<double>> ring(max_tlag + 1);
        std::vector<double> s1(e.sum_u.size()), s2(e.sum_u.size()), s4(e.sum_u.size());
        std::vector<double> vt(e.vario_time.size()), vs(e.vario_space.size());
        std::vector<std::vector<double>> btraces(block);
        std::vector<std::vector<double>> bfields;

        for (;;) {
            const int b = next_block.fetch_add(1);
            if (b >= nblocks) break;
            const int r0 = b * block, r1 = std::min(replicas, r0 + block);
            std::fill(s1.begin(), s1.end(), 0.0);
            std::fill(s2.begin(), s2.end(), 0.0);
            std::fill(s4.begin(), s4.end(), 0.0);
            std::fill(vt.begin(), vt.end(), 0.0);
            std::fill(vs.begin(), vs.end(), 0.0);
            if (options.store_fields)
                bfields.assign(r1 - r0, std::vector<double>(static_cast<std::size_t>(nt) * cells));
            for (int r = r0; r < r1; ++r) {
                auto& trace = btraces[r - r0];
                trace.assign(static_cast<std::size_t>(nt) * e.probe_cells.size(), 0.0);
                // Slice 0 noise from the initial field.
                {
                    auto& q = qhat[0];
                    for (std::size_t c = 0; c < cells; ++c) {
                        const double dw = noise_sd * counter_gaussian(master_seed, r, 0, c);
                        q[c] = rho(u0[c]) * dw;
                    }
                    fft_nd(q, shape, -1);
                }
                for (int i = 1; i <= nt; ++i) {
                    std::vector<cplx> acc(cells, cplx(0.0, 0.0));
                    for (int k = 0; k < i; ++k) {
                        const auto& row = T[i - k - 1]; // lag (i-k) dt
                        const auto& q = qhat[k];
                        for (std::size_t c = 0; c < cells; ++c) acc[c] += row[c] * q[c];
                    }
                    fft_nd(acc, shape, +1);
                    const double* j0row = e.j0.data() + static_cast<std::size_t>(i - 1) * cells;
                    for (std::size_t c = 0; c < cells; ++c) u[c] = j0row[c] + acc[c].real();
                    // Accumulate moments, traces, variograms.
                    double* s1r = s1.data() + static_cast<std::size_t>(i - 1) * cells;
                    double* s2r = s2.data() + static_cast<std::size_t>(i - 1) * cells;
                    double* s4r = s4.data() + static_cast<std::size_t>(i - 1) * cells;
                    for (std::size_t c = 0; c < cells; ++c) {
                        const double v = u[c];
                        s1r[c] += v;
                        const double v2 = v * v;
                        s2r[c] += v2;
                        s4r[c] += v2 * v2;
                    }
                    for (std::size_t j = 0; j < e.probe_cells.size(); ++j)
                        trace[static_cast<std::size_t>(i - 1) * e.probe_cells.size() + j] =
                            u[e.probe_cells[j]];
                    if (options.store_fields)
                        std::copy(u.begin(), u.end(),
                                  bfields[r - r0].begin() + static_cast<std::size_t>(i - 1) * cells);
                    if (!e.time_lags.empty()) {
                        ring[i % (max_tlag + 1)] = u;
                        if (i > nt / 2) {
                            for (std::size_t l = 0; l < e.time_lags.size(); ++l) {
                                const int lag = e.time_lags[l];
                                if (i - lag > nt / 4) {
                                    const auto& old = ring[(i - lag) % (max_tlag + 1)];
                                    if (!old.empty()) {
                                        double acc2 = 0.0;
                                        for (std::size_t c = 0; c < cells; ++c) {
                                            const double dd = u[c] - old[c];
                                            acc2 += dd * dd;
                                        }
                                        vt[l] += acc2 / cells;
                                    }
                                }
                            }
                        }
                    }
                    if (!e.space_lags.empty() && i > nt / 2 && g.d == 1) {
                        for (std::size_t l = 0; l < e.space_lags.size(); ++l) {
                            const int lag = e.space_lags[l];
                            double acc2 = 0.0;
                            for (std::size_t c = 0; c < cells; ++c) {
                                const double dd = u[(c + lag) % cells] - u[c];
                                acc2 += dd * dd;
                            }
                            vs[l] += acc2 / cells;
                        }
                    }
                    if (i < nt) {
                        auto& q = qhat[i];
                        for (std::size_t c = 0; c < cells; ++c) {
                            const double dw =
                                noise_sd * counter_gaussian(master_seed, r, i, c);
                            q[c] = rho(u[c]) * dw;
                        }
                        fft_nd(q, shape, -1);
                    }
                }
            }
            // Merge this block in order.
            {
                std::unique_lock<std::mutex> lk(merge_mutex);
                merge_cv.wait(lk, [&] { return merge_turn == b; });
                for (std::size_t i = 0; i < s1.size(); ++i) {
                    e.sum_u[i] += s1[i];
                    e.sum_u2[i] += s2[i];
                    e.sum_u4[i] += s4[i];
                }
                for (std::size_t i = 0; i < vt.size(); ++i) e.vario_time[i] += vt[i];
                for (std::size_t i = 0; i < vs.size(); ++i) e.vario_space[i] += vs[i];
                for (int r = r0; r < r1; ++r) {
                    e.traces[r] = std::move(btraces[r - r0]);
                    if (options.store_fields) e.fields[r] = std::move(bfields[r - r0]);
                }
                ++merge_turn;
            }
            merge_cv.notify_all();
        }
    };

    std::vector<std::thread> pool;
    for (int i = 0; i < nthreads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();

    // Normalize variogram accumulators to means.
    {
        // Count contributing (replica, time) pairs per lag.
        for (std::size_t l = 0; l < e.time_lags.size(); ++l) {
            int count = 0;
            for (int i = nt / 2 + 1; i <= nt; ++i)
                if (i - e.time_lags[l] > nt / 4) ++count;
            if (count > 0) e.vario_time[l] /= static_cast<double>(count) * replicas;
        }
        for (std::size_t l = 0; l < e.space_lags.size(); ++l) {
            const int count = nt - nt / 2;
            if (count > 0) e.vario_space[l] /= static_cast<double>(count) * replicas;
        }
    }
    (void)sv;
    return e;
}

MomentEstimate moment_estimate(const SimEnsemble& e, int p, double t, double x) {
    if (p < 1) throw DomainError("moment_estimate: p must be >= 1");
    if (e.replicas < 2) throw DomainError("moment_estimate: need at least 2 replicas");
    MomentEstimate out;
    out.odd_p_note = (p % 2 == 1);
    const GridSpec& g = e.grid;
    int slice = static_cast<int>(std::round(t / g.dt())) - 1;
    slice = std::clamp(slice, 0, g.n_t - 1);
    // Locate the cell: map x to the wrapped displacement index (d = 1 probe).
    std::size_t cell = 0;
    if (g.d == 1) {
        int j = static_cast<int>(std::llround(x / g.dx()));
        j = ((j % g.n_x) + g.n_x) % g.n_x;
        cell = static_cast<std::size_t>(j);
    }
    auto probe_it = std::find(e.probe_cells.begin(), e.probe_cells.end(), cell);
    if (probe_it != e.probe_cells.end() || !e.fields.empty()) {
        // Bootstrap CI from per-replica values.
        std::vector<double> vals(e.replicas);
        if (probe_it != e.probe_cells.end()) {
            const std::size_t j = static_cast<std::size_t>(probe_it - e.probe_cells.begin());
            for (int r = 0; r < e.replicas; ++r)
                vals[r] = std::pow(std::abs(e.traces[r][static_cast<std::size_t>(slice) *
                                                            e.probe_cells.size() +
                                                        j]),
                                   p);
        } else {
            for (int r = 0; r < e.replicas; ++r)
                vals[r] =
                    std::pow(std::abs(e.fields[r][static_cast<std::size_t>(slice) * g.cells() + cell]),
                             p);
        }
        double mean = 0.0;
        for (double v : vals) mean += v;
        mean /= e.replicas;
        out.estimate = mean;
        const int B = 200;
        std::vector<double> boot(B);
        for (int b = 0; b < B; ++b) {
            double m = 0.0;
            for (int r = 0; r < e.replicas; ++r) {
                const std::uint64_t h =
                    splitmix(e.master_seed ^ (0xb00* 1ull + b * 1000003ull + r * 7919ull));
                m += vals[h % e.replicas];
            }
            boot[b] = m / e.replicas;
        }
        std::sort(boot.begin(), boot.end());
        out.ci_low = boot[static_cast<int>(0.025 * B)];
        out.ci_high = boot[static_cast<int>(0.975 * B) - 1];
        return out;
    }
    // Moment sums: p = 2 (normal approximation via the 4th moment).
    if (p != 2)
        throw DomainError("moment_estimate: off-probe estimates support p = 2 only");
    const std::size_t idx = static_cast<std::size_t>(slice) * g.cells() + cell;
    const double m2 = e.sum_u2[idx] / e.replicas;
    const double m4 = e.sum_u4[idx] / e.replicas;
    const double se = std::sqrt(std::max(0.0, m4 - m2 * m2) / e.replicas);
    out.estimate = m2;
    out.ci_low = m2 - 1.96 * se;
    out.ci_high = m2 + 1.96 * se;
    return out;
}

SlopeEstimate lyapunov_estimate(const SimEnsemble& e, int p) {
    if (e.init.form != InitialDataSpec::Form::Constant)
        throw RegimeError("lyapunov_estimate: requires spatially constant initial data");
    const GridSpec& g = e.grid;
    std::vector<double> ts, logm;
    for (int i = g.n_t / 2; i < g.n_t; ++i) {
        // Average |u|^p over space and replicas from the moment sums (p in {1,2,4})
        double m = 0.0;
        const std::size_t cells = g.cells();
        const double* row = nullptr;
        if (p == 1)
            row = e.sum_u.data() + static_cast<std::size_t>(i) * cells;
        else if (p == 2)
            row = e.sum_u2.data() + static_cast<std::size_t>(i) * cells;
        else if (p == 4)
            row = e.sum_u4.data() + static_cast<std::size_t>(i) * cells;
        else
            throw DomainError("lyapunov_estimate: p must be 1, 2 or 4");
        for (std::size_t c = 0; c < cells; ++c) m += std::abs(row[c]);
        m /= static_cast<double>(cells) * e.replicas;
        if (m > 0.0) {
            ts.push_back((i + 1) * g.dt());
            logm.push_back(std::log(m));
        }
    }
    LineFit fit = fit_line(ts, logm);
    return {fit.slope, fit.slope_stderr};
}

HolderEstimate holder_estimate(const SimEnsemble& e) {
    if (e.params.beta > 1.0)
        throw RegimeError("holder_estimate: fast-diffusion ensembles are out of the proved regime");
    if (e.init.form == InitialDataSpec::Form::Dirac)
        throw RegimeError("holder_estimate: requires bounded initial data");
    if (e.time_lags.empty() || e.space_lags.empty())
        throw NumericError("holder_estimate: ensemble was run without variogram collection");
    HolderEstimate out;
    {
        std::vector<double> lx, ly;
        for (std::size_t l = 0; l < e.time_lags.size(); ++l) {
            if (e.vario_time[l] > 0.0) {
                lx.push_back(std::log(e.time_lags[l] * e.grid.dt()));
                ly.push_back(std::log(e.vario_time[l]));
            }
        }
        LineFit f = fit_line(lx, ly);
        out.time_exponent = 0.5 * f.slope;
        out.time_stderr = 0.5 * f.slope_stderr;
    }
    {
        std::vector<double> lx, ly;
        for (std::size_t l = 0; l < e.space_lags.size(); ++l) {
            if (e.vario_space[l] > 0.0) {
                lx.push_back(std::log(e.space_lags[l] * e.grid.dx()));
                ly.push_back(std::log(e.vario_space[l]));
            }
        }
        LineFit f = fit_line(lx, ly);
        out.space_exponent = 0.5 * f.slope;
        out.space_stderr = 0.5 * f.slope_stderr;
    }
    return out;
}

void write_ensemble(const SimEnsemble& e, const std::string& path, bool include_traces) {
    nlohmann::json hdr;
    hdr["params"] = {{"alpha", e.params.alpha}, {"beta", e.params.beta},  {"gamma", e.params.gamma},
                     {"nu", e.params.nu},       {"dim", e.params.d}};
    hdr["grid"] = {{"t_max", e.grid.t_max}, {"n_t", e.grid.n_t}, {"x_max", e.grid.x_max},
                   {"n_x", e.grid.n_x},     {"d", e.grid.d}};
    hdr["seed"] = e.master_seed;
    hdr["replicas"] = e.replicas;
    hdr["rho"] = {{"lip", e.rho.lip}, {"V", e.rho.V}};
    hdr["probe_cells"] = e.probe_cells;
    std::ofstream os(path);
    if (!os) throw NumericError("write_ensemble: cannot open " + path);
    os << "# " << hdr.dump() << "\n";
    os << "t,x,mean,second_moment,fourth_moment\n";
    os.precision(17);
    const std::size_t cells = e.grid.cells();
    for (int i = 0; i < e.grid.n_t; ++i) {
        for (std::size_t c = 0; c < cells; ++c) {
            os << (i + 1) * e.grid.dt() << ',' << e.grid.radius(c) << ','
               << e.sum_u[i * cells + c] / e.replicas << ',' << e.sum_u2[i * cells + c] / e.replicas
               << ',' << e.sum_u4[i * cells + c] / e.replicas << "\n";
        }
    }
    if (include_traces) {
        os << "# traces: replica,slice,probe,value\n";
        for (int r = 0; r < e.replicas; ++r)
            for (int i = 0; i < e.grid.n_t; ++i)
                for (std::size_t j = 0; j < e.probe_cells.size(); ++j)
                    os << "trace," << r << ',' << i << ',' << j << ','
                       << e.traces[r][static_cast<std::size_t>(i) * e.probe_cells.size() + j]
                       << "\n";
    }
}

} // namespace stfrac
