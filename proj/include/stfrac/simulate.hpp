#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "stfrac/dalang.hpp"
#include "stfrac/kernel.hpp"
#include "stfrac/params.hpp"

namespace stfrac {

/// Noise coefficient rho with its linear-growth data.
struct RhoSpec {
    enum class Form { Linear, Affine, Table } form = Form::Linear;
    double lip = 1.0; // global Lipschitz / growth constant Lip_rho
    double V = 0.0;   // growth offset
    // Optional lower growth bound |rho(x)|^2 >= lower_lip^2 (lower_v^2 + x^2).
    std::optional<double> lower_lip;
    double lower_v = 0.0;
    double affine_a = 0.0, affine_b = 1.0;
    std::vector<std::pair<double, double>> table; // piecewise-linear nodes (x, rho(x))

    double operator()(double u) const;
    void validate() const;

    static RhoSpec linear(double lam) {
        RhoSpec r;
        r.form = Form::Linear;
        r.lip = std::abs(lam);
        r.V = 0.0;
        r.affine_b = lam;
        if (lam != 0.0) {
            r.lower_lip = std::abs(lam);
            r.lower_v = 0.0;
        }
        return r;
    }
    static RhoSpec zero() {
        RhoSpec r = linear(0.0);
        r.lower_lip.reset();
        return r;
    }
    static RhoSpec affine(double a, double b);
};

struct SimOptions {
    int threads = 0;           // 0: hardware concurrency (capped at 8)
    bool store_fields = false; // keep every replica field (memory permitting)
    bool collect_variograms = true;
    std::vector<std::size_t> probe_cells; // default: {0, cells/4}
    double stability_threshold = 0.9;
};

/// Monte Carlo ensemble of the discretized mild solution.
struct SimEnsemble {
    FracParams params;
    RhoSpec rho;
    InitialDataSpec init;
    GridSpec grid;
    std::uint64_t master_seed = 0;
    int replicas = 0;

    // Moment accumulators over replicas, layout [slice * cells + cell].
    std::vector<double> sum_u, sum_u2, sum_u4;
    // Per-replica traces at probe cells: trace[r][slice * nprobe + j].
    std::vector<std::size_t> probe_cells;
    std::vector<std::vector<double>> traces;
    // Homogeneous solution on the grid, same layout as the sums.
    std::vector<double> j0;
    // Optional full fields (store_fields): fields[r][slice * cells + cell].
    std::vector<std::vector<double>> fields;

    // Variogram accumulators: mean of squared increments by lag (time, space).
    std::vector<int> time_lags, space_lags;
    std::vector<double> vario_time, vario_space;

    double mean_at(int slice, std::size_t cell) const {
        return sum_u[static_cast<std::size_t>(slice) * grid.cells() + cell] / replicas;
    }
    double second_moment_at(int slice, std::size_t cell) const {
        return sum_u2[static_cast<std::size_t>(slice) * grid.cells() + cell] / replicas;
    }
};

/// Homogeneous solution J0 on the periodized grid at slice-boundary times
/// t_i = (i+1) dt (spectral evaluation, layout [slice * cells + cell]).
std::vector<double> j0_grid(const FracParams& p, const InitialDataSpec& init, const GridSpec& grid);

/// Pointwise homogeneous solution at (t, x) (quadrature / closed form).
double j0_eval(const FracParams& p, const InitialDataSpec& init, double t,
               const std::vector<double>& x);

/// Deterministic Duhamel solution u = J0 + Y (space-time) f on the grid, with
/// f sampled at slice midpoints. Layout [slice * cells + cell], slice i at
/// time (i+1) dt.
std::vector<double> deterministic_solve(const FracParams& p, const InitialDataSpec& init,
                                        const std::function<double(double, const std::vector<double>&)>& f,
                                        const GridSpec& grid);

/// Exact single-mode solution of the forced equation with time-constant
/// forcing amplitude fhat at radial frequency xi: the Duhamel integral has the
/// closed Mittag-Leffler form fhat * t^{beta+gamma} E_{beta,beta+gamma+1}(-(nu/2)|xi|^alpha t^beta).
double spectral_mode_solution(const FracParams& p, double xi_mag, double fhat, double t);

SimEnsemble simulate(const FracParams& p, const RhoSpec& rho, const InitialDataSpec& init,
                     const GridSpec& grid, std::uint64_t master_seed, int replicas,
                     const SimOptions& options = {});

struct MomentEstimate {
    double estimate = 0.0;
    double ci_low = 0.0, ci_high = 0.0;
    bool odd_p_note = false; // p odd: absolute moment computed
};

/// Empirical p-th absolute moment at a grid point, bootstrap CI at probe
/// columns, normal-approximation CI elsewhere (p = 2 only).
MomentEstimate moment_estimate(const SimEnsemble& e, int p, double t, double x);

struct SlopeEstimate {
    double slope = 0.0;
    double stderr_ = 0.0;
};

/// Lyapunov slope: least-squares slope of log E|u|^p vs t over the last half
/// of the time window (requires spatially constant initial data).
SlopeEstimate lyapunov_estimate(const SimEnsemble& e, int p);

struct HolderEstimate {
    double time_exponent = 0.0, space_exponent = 0.0;
    double time_stderr = 0.0, space_stderr = 0.0;
};

/// Variogram exponents: log-log slope of E|u(t+h)-u(t)|^2 (and spatial
/// analogue) halved. Requires beta <= 1 and bounded initial data.
HolderEstimate holder_estimate(const SimEnsemble& e);

/// Counter-based normal variate: deterministic in (seed, replica, step, cell).
double counter_gaussian(std::uint64_t seed, std::uint64_t replica, std::uint64_t step,
                        std::uint64_t cell);

/// Ensemble export: JSON provenance header plus CSV moment table (and per-
/// replica probe traces). Binary-free portable format.
void write_ensemble(const SimEnsemble& e, const std::string& path, bool include_traces = true);

} // namespace stfrac
