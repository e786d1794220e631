#include "stfrac/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>

namespace stfrac {

namespace {

// Gauss-Kronrod 15-point nodes/weights on [-1,1] (Kronrod extension of G7).
constexpr double kXgk[8] = {
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
};
constexpr double kWgk[8] = {
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
};
constexpr double kWg[4] = {
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
};

struct PanelResult {
    double value;
    double error;
};

struct PanelResult3 {
    double value;
    double error;
    double abs_integral; // integral of |f|, for the roundoff floor
};

PanelResult3 gk15(const std::function<double(double)>& f, double a, double b) {
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);
    double fc = f(c);
    double result_g = fc * kWg[3];
    double result_k = fc * kWgk[7];
    double result_abs = std::abs(fc) * kWgk[7];
    for (int j = 0; j < 7; ++j) {
        const double dx = h * kXgk[j];
        const double f1 = f(c - dx);
        const double f2 = f(c + dx);
        result_k += kWgk[j] * (f1 + f2);
        result_abs += kWgk[j] * (std::abs(f1) + std::abs(f2));
        if (j % 2 == 1) result_g += kWg[j / 2] * (f1 + f2);
    }
    result_g *= h;
    result_k *= h;
    result_abs *= std::abs(h);
    return {result_k, std::abs(result_k - result_g), result_abs};
}

void adapt(const std::function<double(double)>& f, double a, double b, double tol,
           int depth, int max_depth, double& value, double& error) {
    PanelResult3 r = gk15(f, a, b);
    // Noise floor: integrands built from tiered series evaluations carry
    // relative jitter well above machine epsilon; subdividing below it only
    // chases rounding noise.
    const double floor = 1e-13 * r.abs_integral;
    if (depth >= max_depth || r.error <= std::max(tol, floor) || !(std::isfinite(r.error))) {
        value += r.value;
        error += r.error;
        return;
    }
    const double c = 0.5 * (a + b);
    adapt(f, a, c, 0.5 * tol, depth + 1, max_depth, value, error);
    adapt(f, c, b, 0.5 * tol, depth + 1, max_depth, value, error);
}

} // namespace

QuadResult integrate(const std::function<double(double)>& f, double a, double b,
                     double abs_tol, double rel_tol, int max_depth) {
    if (a == b) return {0.0, 0.0};
    PanelResult3 first = gk15(f, a, b);
    double tol = std::max(abs_tol, rel_tol * std::abs(first.value));
    if (first.error <= std::max(tol, 1e-13 * first.abs_integral))
        return {first.value, first.error};
    double value = 0.0, error = 0.0;
    const double c = 0.5 * (a + b);
    adapt(f, a, c, 0.5 * tol, 1, max_depth, value, error);
    adapt(f, c, b, 0.5 * tol, 1, max_depth, value, error);
    return {value, error};
}

QuadResult integrate_to_inf(const std::function<double(double)>& f, double a,
                            double abs_tol, double rel_tol, double first_width,
                            int max_panels) {
    double value = 0.0, error = 0.0;
    double left = a;
    double width = first_width;
    int quiet = 0;
    for (int k = 0; k < max_panels; ++k) {
        QuadResult r = integrate(f, left, left + width, abs_tol * 0.25, rel_tol * 0.25);
        value += r.value;
        error += r.error;
        const double tol = std::max(abs_tol, rel_tol * std::abs(value));
        if (std::abs(r.value) < tol)
            ++quiet;
        else
            quiet = 0;
        if (quiet >= 3) break;
        left += width;
        width *= 2.0;
    }
    return {value, error};
}

QuadResult integrate_oscillatory(const std::function<double(double)>& integrand,
                                 const std::function<double(int)>& break_point,
                                 double a, double abs_tol, int max_breaks) {
    // Partial sums over the oscillation panels, accelerated by iterated Aitken.
    std::vector<double> partial;
    partial.reserve(64);
    double sum = 0.0;
    double err = 0.0;
    double prev = a;
    double accel = 0.0;
    double accel_err = std::numeric_limits<double>::infinity();
    int k = 1;
    for (; k <= max_breaks; ++k) {
        double b = break_point(k);
        if (b <= prev) continue;
        QuadResult r = integrate(integrand, prev, b, abs_tol * 0.1, 1e-12);
        prev = b;
        sum += r.value;
        err += r.error;
        partial.push_back(sum);

        // Plain convergence (integrand may die before oscillating much).
        if (std::abs(r.value) < abs_tol && partial.size() >= 3) {
            return {sum, err + std::abs(r.value)};
        }
        if (partial.size() >= 6) {
            // Iterated Aitken delta-squared on the tail of the partial sums.
            std::vector<double> s(partial.end() - std::min<std::size_t>(partial.size(), 24),
                                  partial.end());
            while (s.size() >= 3) {
                std::vector<double> t;
                t.reserve(s.size() - 2);
                for (std::size_t i = 0; i + 2 < s.size(); ++i) {
                    const double d1 = s[i + 1] - s[i];
                    const double d2 = s[i + 2] - s[i + 1];
                    const double den = d2 - d1;
                    if (den == 0.0) {
                        t.push_back(s[i + 2]);
                    } else {
                        t.push_back(s[i + 2] - d2 * d2 / den);
                    }
                }
                // Estimate error from the spread of the last transform stage.
                if (t.size() >= 2) {
                    accel = t.back();
                    accel_err = std::abs(t.back() - t[t.size() - 2]);
                } else if (t.size() == 1) {
                    accel_err = std::abs(t[0] - accel);
                    accel = t[0];
                }
                s.swap(t);
            }
            if (accel_err < abs_tol) return {accel, accel_err + err};
        }
    }
    // Fall back to the best accelerated value we have.
    if (!partial.empty() && accel_err < std::abs(partial.back() - accel) + 10 * abs_tol)
        return {accel, accel_err + err};
    return {sum, err + accel_err};
}

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = x.size();
    LineFit out;
    if (n < 2) return out;
    double sx = 0, sy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sx += x[i];
        sy += y[i];
    }
    const double mx = sx / n, my = sy / n;
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    out.slope = sxy / sxx;
    out.intercept = my - out.slope * mx;
    if (n > 2) {
        double ss = 0;
        for (std::size_t i = 0; i < n; ++i) {
            const double r = y[i] - (out.intercept + out.slope * x[i]);
            ss += r * r;
        }
        out.slope_stderr = std::sqrt(ss / ((n - 2) * sxx));
    }
    return out;
}

} // namespace stfrac
