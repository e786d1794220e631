#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "stfrac/params.hpp"

namespace stfrac {

/// Uniform space-time grid. Time slices are the cells [i dt, (i+1) dt) with
/// midpoint values; space is the torus [-x_max, x_max)^d sampled at spacing
/// dx = 2 x_max / n_x per axis, stored in wrapped-displacement layout
/// (index j <-> displacement j*dx for j <= n_x/2, (j - n_x)*dx beyond).
struct GridSpec {
    double t_max = 1.0;
    int n_t = 64;
    double x_max = 8.0;
    int n_x = 128;
    int d = 1;

    void validate() const {
        if (n_t < 8 || n_x < 8) throw DomainError("GridSpec: n_t and n_x must be >= 8");
        if (!(t_max > 0.0) || !(x_max > 0.0)) throw DomainError("GridSpec: t_max, x_max must be > 0");
        if (d < 1 || d > 3) throw DomainError("GridSpec: d must be 1, 2 or 3");
    }
    double dt() const { return t_max / n_t; }
    double dx() const { return 2.0 * x_max / n_x; }
    std::size_t cells() const {
        std::size_t c = 1;
        for (int k = 0; k < d; ++k) c *= static_cast<std::size_t>(n_x);
        return c;
    }
    /// Displacement coordinate of index j along one axis.
    double displacement(int j) const { return (j <= n_x / 2 ? j : j - n_x) * dx(); }
    /// Radius of the cell with flat index idx.
    double radius(std::size_t idx) const {
        double r2 = 0.0;
        for (int k = 0; k < d; ++k) {
            const int j = static_cast<int>(idx % n_x);
            idx /= n_x;
            const double c = displacement(j);
            r2 += c * c;
        }
        return std::sqrt(r2);
    }
    double slice_time(int i) const { return (i + 0.5) * dt(); }
};

/// Truncated moment-kernel series K(t,x;lambda) = sum_n lambda^{2(n+1)} L_n
/// with L_0 = Y^2 and L_{n+1} = L_0 (space-time convolution) L_n.
struct KernelSeries {
    FracParams params;
    double lambda = 0.0;
    GridSpec grid;
    std::vector<std::vector<double>> L_stack; // L_stack[n][i*cells + cell]
    std::vector<double> K_values;             // same layout
    int truncation_order = 0;
    double truncation_estimate = 0.0; // dropped tail of (1*K)(t_max) from the closed series
    bool sign_warning = false;        // Y not classified nonnegative

    double K_at(int slice, std::size_t cell) const {
        return K_values[static_cast<std::size_t>(slice) * grid.cells() + cell];
    }
    /// Space-integrated mass of one L_n time slice (includes dx^d).
    double slice_mass(int n, int slice) const;
    /// (1 * L_n)(T) at slice boundaries T = (j+1) dt: cumulative masses * dt.
    double one_star_Ln(int n, int upto_slice) const;
    /// Grid integration of K over space and [0, (j+1) dt].
    double one_star_K(int upto_slice) const;
};

enum class RefKernelVariant { Upper, Lower };

/// Unit-mass reference kernel (radial form).
double ref_kernel_eval(RefKernelVariant v, const FracParams& p, double t, double r);

struct SemigroupCheck {
    double lhs = 0.0; // integral of G(t, x-y) G(s, y) dy by quadrature
    double rhs = 0.0; // C1 * G(t+s, x)
    double c1 = 0.0;
    bool ok = false;
};

/// Sub-semigroup (upper) or super-semigroup (lower) check at one (t,s,|x|).
/// C1 comes from the proof where explicit (equality at alpha=2, beta=1;
/// 2^{d(beta-1)/2} for alpha=2, beta in (1,2); Poisson-kernel powers of two
/// for alpha < 2) and is determined numerically for alpha=2, beta in (0,1).
SemigroupCheck semigroup_check(RefKernelVariant v, const FracParams& p, double t, double s,
                               double r);

/// The C1 constant used by semigroup_check.
double semigroup_constant(RefKernelVariant v, const FracParams& p);

KernelSeries build_kernel_series(const FracParams& p, double lambda, const GridSpec& grid, int N);

/// Fitted envelope constants for the kernel bounds. The shape (sigma, the
/// lambda^{2/(1-sigma)} rate, the reference kernels) is fixed; C and Upsilon
/// are fitted to a built series and reported, never asserted as universal.
struct KernelBounds {
    bool has_upper = false, has_lower = false;
    double C = 0.0, Upsilon = 0.0;
    double C_lower = 0.0, Upsilon_lower = 0.0;
    double sigma = 0.0;
    std::string note;
};

KernelBounds kernel_bounds(const FracParams& p, double lambda, const KernelSeries& fit_series);

double kernel_upper_envelope(const KernelBounds& b, const FracParams& p, double lambda, double t,
                             double r);
double kernel_lower_envelope(const KernelBounds& b, const FracParams& p, double lambda, double t,
                             double r);

/// Time-space integral H(t;lambda) of the kernel series, via the exact
/// Beta-function recursion for the time-integrated terms, plus the
/// Mittag-Leffler comparison value E_{theta,theta+1}(csharp Gamma(theta)
/// lambda^2 t^theta) with theta = 1 - sigma.
struct HIntegral {
    double value = 0.0;
    double ml_bound = 0.0;
    double series_argument = 0.0; // csharp Gamma(theta) lambda^2 t^theta
};

HIntegral h_integral(const FracParams& p, double lambda, double t, int N);

} // namespace stfrac
