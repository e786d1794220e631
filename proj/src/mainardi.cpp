#include "stfrac/mainardi.hpp"

#include <quadmath.h>

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <vector>

#include "stfrac/gammafn.hpp"

namespace stfrac {

namespace {

// 1/Gamma(mu - (n+1) lambda) in quad precision, cached per (lambda, mu).
struct MainardiTable {
    double lambda, mu;
    std::vector<__float128> rg;
    std::mutex grow_mutex;

    void ensure(std::size_t n) {
        if (rg.size() >= n) return;
        std::lock_guard<std::mutex> lock(grow_mutex);
        while (rg.size() < n) {
            const std::size_t k = rg.size();
            const double x = mu - (static_cast<double>(k) + 1.0) * lambda;
            if (is_nonpositive_integer(x)) {
                rg.push_back(0.0Q); // reciprocal-Gamma convention
            } else {
                const __float128 xq = static_cast<__float128>(mu) -
                                      (static_cast<__float128>(k) + 1.0Q) * static_cast<__float128>(lambda);
                // signgamq via sinq reflection for negative arguments.
                if (x > 0.0) {
                    rg.push_back(expq(-lgammaq(xq)));
                } else {
                    // 1/Gamma(x) = sin(pi x) Gamma(1-x) / pi
                    const __float128 s = sinq(M_PIq * xq);
                    rg.push_back(s * expq(lgammaq(1.0Q - xq)) / M_PIq);
                }
            }
        }
    }
};

std::map<std::pair<double, double>, std::shared_ptr<MainardiTable>> g_tables;
std::mutex g_tables_mutex;

std::shared_ptr<MainardiTable> table_for(double lambda, double mu) {
    std::lock_guard<std::mutex> lock(g_tables_mutex);
    auto key = std::make_pair(lambda, mu);
    auto it = g_tables.find(key);
    if (it != g_tables.end()) return it->second;
    auto t = std::make_shared<MainardiTable>();
    t->lambda = lambda;
    t->mu = mu;
    g_tables.emplace(key, t);
    return t;
}

MainardiResult sum_series(MainardiTable& tab, double z, int terms, bool adaptive) {
    const __float128 zq = z;
    __float128 pw = 1.0Q; // (-z)^n / n!
    __float128 sum = 0.0Q;
    __float128 max_mag = 0.0Q;
    __float128 last = 0.0Q;
    int n = 0;
    int quiet = 0;
    const int hard_cap = adaptive ? 20000 : terms;
    tab.ensure(static_cast<std::size_t>(adaptive ? 64 : terms));
    for (; n < hard_cap; ++n) {
        if (static_cast<std::size_t>(n) >= tab.rg.size()) tab.ensure(tab.rg.size() + 64);
        if (!isinfq(tab.rg[n])) {
            last = pw * tab.rg[n];
        } else if (pw == 0.0Q) {
            last = 0.0Q;
        } else {
            throw NumericError("mainardi: series coefficient exceeds quad-precision range");
        }
        sum += last;
        const __float128 mag = fabsq(last);
        if (mag > max_mag) max_mag = mag;
        pw *= -zq / (n + 1.0Q);
        if (adaptive) {
            if (n > 8 && mag < 1e-37Q * (fabsq(sum) + max_mag * 1e-4Q))
                ++quiet;
            else
                quiet = 0;
            if (quiet >= 8) break;
        }
    }
    if (adaptive && n >= hard_cap)
        throw NumericError("mainardi: series not converged within the term budget");
    MainardiResult out;
    out.value = static_cast<double>(sum);
    out.last_term = static_cast<double>(fabsq(last));
    out.accuracy_loss = static_cast<double>(max_mag) * 1.93e-34; // quad epsilon
    return out;
}

} // namespace

MainardiResult mainardi(const MainardiParams& p, double z) {
    p.validate();
    if (!(z >= 0.0) || !std::isfinite(z)) throw DomainError("mainardi: z must be >= 0");
    auto tab = table_for(p.lambda, p.mu);
    return sum_series(*tab, z, p.terms, false);
}

MainardiResult mainardi_full(double lambda, double mu, double z) {
    MainardiParams p{lambda, mu, 1};
    p.validate();
    if (!(z >= 0.0) || !std::isfinite(z)) throw DomainError("mainardi: z must be >= 0");
    auto tab = table_for(lambda, mu);
    return sum_series(*tab, z, 0, true);
}

} // namespace stfrac
