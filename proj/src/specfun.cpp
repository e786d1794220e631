#include "stfrac/specfun.hpp"

#include <cmath>

#include "stfrac/gammafn.hpp"

namespace stfrac {

namespace {
constexpr double kPi = 3.14159265358979323846;
constexpr double kBoundaryTol = 1e-12;

bool near(double x, double y) { return std::abs(x - y) <= kBoundaryTol * std::max({1.0, std::abs(x), std::abs(y)}); }
} // namespace

double neutral_kernel(double theta, double x) {
    if (!(theta > 0.0 && theta < 1.0)) throw DomainError("neutral_kernel: theta must be in (0,1)");
    if (!(x > 0.0) || !std::isfinite(x)) throw DomainError("neutral_kernel: x must be > 0");
    const double p = std::pow(x, 1.0 / theta);
    return p / (kPi * (1.0 + 2.0 * p * cospi(theta) + p * p));
}

FoxCaseReport fox_small_x(const FracParams& params, double eta) {
    params.validate();
    const double alpha = params.alpha, beta = params.beta;
    const double d = static_cast<double>(params.d);
    FoxCaseReport r;

    const bool eta_eq_beta = near(eta, beta);
    const bool beta_is_one = near(beta, 1.0);

    if (!eta_eq_beta) {
        if (d > alpha && !near(d, alpha)) {
            r.case_id = 1;
            r.form = SmallXForm::Power;
            r.leading_exponent = alpha - d;
            r.leading_coefficient =
                gamma_fn((d - alpha) / 2.0) * reciprocal_gamma(eta - beta) * reciprocal_gamma(alpha / 2.0);
            r.remainder_order = std::min(2.0 * alpha - d, 0.0);
            r.exponent_tag = "x^{alpha-d}";
        } else if (near(d, alpha)) {
            r.case_id = 2;
            r.form = SmallXForm::Log;
            r.leading_exponent = 0.0;
            // coefficient of log(1/x)
            r.leading_coefficient = alpha * reciprocal_gamma(eta - beta) * reciprocal_gamma(1.0 + d / 2.0);
            r.remainder_order = 0.0;
            r.exponent_tag = "log x";
        } else {
            r.case_id = 3;
            r.form = SmallXForm::Constant;
            r.leading_coefficient = (2.0 / alpha) * gamma_fn(1.0 - d / alpha) * gamma_fn(d / alpha) *
                                    reciprocal_gamma(eta - d * beta / alpha) * reciprocal_gamma(d / 2.0);
            r.remainder_order = std::min(alpha - d, 2.0);
            r.exponent_tag = "const";
        }
        return r;
    }

    if (beta_is_one) {
        r.case_id = 4;
        r.form = SmallXForm::Constant;
        r.leading_coefficient = 2.0 * gamma_fn(d / alpha) * reciprocal_gamma(d / 2.0) / alpha;
        r.remainder_order = 2.0;
        r.exponent_tag = "const";
        return r;
    }

    const double ratio = d / alpha;
    if (ratio > 2.0 && !near(ratio, 2.0)) {
        r.case_id = 5;
        r.form = SmallXForm::Power;
        r.leading_exponent = 2.0 * alpha - d;
        r.leading_coefficient =
            -gamma_fn((d - 2.0 * alpha) / 2.0) * reciprocal_gamma(-beta) * reciprocal_gamma(alpha);
        r.remainder_order = std::min(3.0 * alpha - d, 0.0);
        r.exponent_tag = "x^{2alpha-d}";
    } else if (near(ratio, 2.0)) {
        r.case_id = 6;
        r.form = SmallXForm::Log;
        r.leading_exponent = 0.0;
        // coefficient of log(1/x); the raw log-x coefficient is +2alpha/(Gamma(-beta)Gamma(1+d/2)).
        r.leading_coefficient = -2.0 * alpha * reciprocal_gamma(-beta) * reciprocal_gamma(1.0 + d / 2.0);
        r.remainder_order = alpha;
        r.exponent_tag = "log x";
    } else if (ratio > 1.0 && !near(ratio, 1.0)) {
        r.case_id = 7;
        r.form = SmallXForm::Constant;
        r.leading_coefficient = (2.0 / alpha) * gamma_fn(1.0 - ratio) * gamma_fn(ratio) *
                                reciprocal_gamma(beta * (1.0 - ratio)) * reciprocal_gamma(d / 2.0);
        r.remainder_order = std::min(2.0 * alpha - d, 2.0);
        r.exponent_tag = "const";
    } else if (near(ratio, 1.0)) {
        // Double pole with a vanishing Gamma-reciprocal degenerates to a
        // finite limit: the appendix derivation gives +beta/Gamma(1+d/2).
        r.case_id = 8;
        r.form = SmallXForm::Constant;
        r.leading_coefficient = beta * reciprocal_gamma(1.0 + d / 2.0);
        r.remainder_order = alpha;
        // the next pole is double again (both Gamma families land on s = -2),
        // so the x^alpha remainder carries a log factor
        r.remainder_has_log = true;
        r.exponent_tag = "const";
    } else {
        r.case_id = 9;
        r.form = SmallXForm::Constant;
        r.leading_coefficient = (2.0 / alpha) * gamma_fn(1.0 - ratio) * gamma_fn(ratio) *
                                reciprocal_gamma(beta * (1.0 - ratio)) * reciprocal_gamma(d / 2.0);
        r.remainder_order = std::min(2.0 * alpha - d, 2.0);
        r.exponent_tag = "const";
    }
    return r;
}

double TailLaw::operator()(double r, const FracParams& p) const {
    if (form == Form::Power) return A * std::pow(r, -(p.d + p.alpha));
    return A * std::pow(r, a) * std::exp(-b * std::pow(r, c));
}

TailLaw fox_tail(const FracParams& params, GreenKind kind) {
    params.validate();
    validate_kind(params, kind);
    const double gamma_eff = (kind == GreenKind::Y)   ? params.gamma
                             : (kind == GreenKind::Z) ? params.ceil_beta() - params.beta
                                                      : 1.0;
    const double alpha = params.alpha, beta = params.beta, nu = params.nu;
    const double d = static_cast<double>(params.d);
    TailLaw law;
    if (near(alpha, 2.0)) {
        const double bg = beta + gamma_eff;
        law.form = TailLaw::Form::StretchedExp;
        law.A = std::pow(kPi, -d / 2.0) * std::pow(2.0 - beta, d / 2.0 - bg) *
                std::pow(beta, beta * (d + 2.0 - 2.0 * bg) / (2.0 * (2.0 - beta))) *
                std::pow(2.0 * nu, (2.0 * bg - (d + 2.0)) / (2.0 * (2.0 - beta)));
        law.a = (d * (beta - 1.0) - 2.0 * (bg - 1.0)) / (2.0 - beta);
        law.b = (2.0 - beta) * std::pow(beta, beta / (2.0 - beta)) * std::pow(2.0 * nu, 1.0 / (beta - 2.0));
        law.c = 2.0 / (2.0 - beta);
    } else {
        law.form = TailLaw::Form::Power;
        law.A = -std::pow(kPi, -d / 2.0) * nu * std::pow(2.0, alpha - 1.0) * gamma_fn((d + alpha) / 2.0) *
                reciprocal_gamma(2.0 * beta + gamma_eff) * reciprocal_gamma(-alpha / 2.0);
    }
    return law;
}

} // namespace stfrac
