#include "pathmix/moments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace pathmix {

namespace {

// Poisson pmf over the 14-sigma window [t - 14 sqrt(t) - 30, t + 14 sqrt(t) + 30],
// clipped at 0. The neglected tail mass is below exp(-14^2/2), far under any
// tolerance used here. First value via logs, then the upward recurrence
// p_{k+1} = p_k * t / (k + 1); relative drift is ~window-width ulps.
struct WindowPmf {
    std::int64_t lo = 0;
    std::vector<double> p;

    std::int64_t hi() const { return lo + static_cast<std::int64_t>(p.size()) - 1; }
};

WindowPmf window_pmf(double t) {
    WindowPmf w;
    if (t <= 0.0) {
        w.p = {1.0};
        return w;
    }
    const double spread = 14.0 * std::sqrt(t) + 30.0;
    w.lo = std::max<std::int64_t>(0, static_cast<std::int64_t>(std::floor(t - spread)));
    const std::int64_t hi = static_cast<std::int64_t>(std::ceil(t + spread));
    w.p.resize(static_cast<std::size_t>(hi - w.lo + 1));
    const double klo = static_cast<double>(w.lo);
    w.p[0] = std::exp(klo * std::log(t) - t - std::lgamma(klo + 1.0));
    for (std::int64_t k = w.lo; k < hi; ++k)
        w.p[static_cast<std::size_t>(k - w.lo + 1)] =
            w.p[static_cast<std::size_t>(k - w.lo)] * t / static_cast<double>(k + 1);
    return w;
}

// x log x at the integers lo..hi inclusive, indexed by x - lo
std::vector<double> xlogx_table(std::int64_t lo, std::int64_t hi) {
    std::vector<double> t(static_cast<std::size_t>(hi - lo + 1));
    for (std::int64_t x = lo; x <= hi; ++x)
        t[static_cast<std::size_t>(x - lo)] = xlogx(static_cast<double>(x));
    return t;
}

double series_mean(const WindowPmf& w) {
    double acc = 0.0;
    for (std::size_t i = 0; i < w.p.size(); ++i)
        acc += w.p[i] * xlogx(static_cast<double>(w.lo + static_cast<std::int64_t>(i)));
    return acc;
}

void require_nonnegative(double mu, const char* what) {
    if (!(mu >= 0.0))
        throw std::invalid_argument(std::string(what) + " must be nonnegative, got " +
                                    std::to_string(mu));
}

// lambda - mu with rejection of genuinely negative gaps and clamping of
// floating-point dust, so that b(mu, mu) collapses to a(mu) exactly
double gap(double mu, double lambda, const char* what) {
    const double t = lambda - mu;
    if (t < -1e-9 * std::max(1.0, mu))
        throw std::invalid_argument(std::string(what) +
                                    " must be >= mu (shared component), got mu = " +
                                    std::to_string(mu) + ", " + what + " = " +
                                    std::to_string(lambda));
    return std::max(0.0, t);
}

// q[k - main.lo] = E[(k + V) log(k + V)], V ~ Poisson(t), for k over the main window
std::vector<double> shifted_means(const WindowPmf& main, double t) {
    std::vector<double> q(main.p.size());
    if (t <= 0.0) {
        for (std::size_t i = 0; i < q.size(); ++i)
            q[i] = xlogx(static_cast<double>(main.lo + static_cast<std::int64_t>(i)));
        return q;
    }
    const WindowPmf inner = window_pmf(t);
    const std::vector<double> tab = xlogx_table(main.lo + inner.lo, main.hi() + inner.hi());
    for (std::size_t i = 0; i < q.size(); ++i) {
        double acc = 0.0;
        const std::size_t base = i;  // (k + v) - (main.lo + inner.lo) = i + (v - inner.lo)
        for (std::size_t v = 0; v < inner.p.size(); ++v) acc += inner.p[v] * tab[base + v];
        q[i] = acc;
    }
    return q;
}

}  // namespace

double poisson_xlogx_mean_exact(double mu) {
    require_nonnegative(mu, "mu");
    if (mu == 0.0) return 0.0;
    return series_mean(window_pmf(mu));
}

double poisson_xlogx_mean_taylor(double mu) {
    require_nonnegative(mu, "mu");
    if (mu == 0.0) return 0.0;
    return mu * std::log(mu) + 0.5 + 1.0 / (12.0 * mu) + 1.0 / (12.0 * mu * mu);
}

double poisson_xlogx_mean(double mu) {
    require_nonnegative(mu, "mu");
    return mu <= kXlogxTaylorSwitch ? poisson_xlogx_mean_exact(mu)
                                    : poisson_xlogx_mean_taylor(mu);
}

double xlogx_var(double mu) {
    require_nonnegative(mu, "mu");
    if (mu == 0.0) return 0.0;
    const WindowPmf w = window_pmf(mu);
    const double f = series_mean(w);
    double acc = 0.0;
    for (std::size_t i = 0; i < w.p.size(); ++i) {
        const double d = xlogx(static_cast<double>(w.lo + static_cast<std::int64_t>(i))) - f;
        acc += w.p[i] * d * d;
    }
    return acc;
}

double xlogx_cov_b(double mu, double lambda) {
    require_nonnegative(mu, "mu");
    const double t = gap(mu, lambda, "lambda");
    if (mu == 0.0) return 0.0;
    const WindowPmf w = window_pmf(mu);
    const double fm = series_mean(w);
    const double fl = poisson_xlogx_mean_exact(mu + t);
    const std::vector<double> q = shifted_means(w, t);
    double acc = 0.0;
    for (std::size_t i = 0; i < w.p.size(); ++i) {
        const double d = xlogx(static_cast<double>(w.lo + static_cast<std::int64_t>(i))) - fm;
        acc += w.p[i] * d * (q[i] - fl);
    }
    return acc;
}

double xlogx_cov_c(double mu, double lambda, double gamma) {
    require_nonnegative(mu, "mu");
    const double t1 = gap(mu, lambda, "lambda");
    const double t2 = gap(mu, gamma, "gamma");
    if (mu == 0.0) return 0.0;
    const WindowPmf w = window_pmf(mu);
    const double fl = poisson_xlogx_mean_exact(mu + t1);
    const double fg = poisson_xlogx_mean_exact(mu + t2);
    const std::vector<double> q1 = shifted_means(w, t1);
    const std::vector<double> q2 = shifted_means(w, t2);
    double acc = 0.0;
    for (std::size_t i = 0; i < w.p.size(); ++i)
        acc += w.p[i] * (q1[i] - fl) * (q2[i] - fg);
    return acc;
}

XlogxMoments xlogx_moments(double mu, double lambda, double gamma) {
    XlogxMoments m;
    m.a = xlogx_var(mu);
    m.b = xlogx_cov_b(mu, lambda);
    m.c = xlogx_cov_c(mu, lambda, gamma);
    return m;
}

double poisson_x_xlogx_cov_taylor(double mu) {
    require_nonnegative(mu, "mu");
    if (mu == 0.0) return 0.0;
    return mu * std::log(mu) + mu - 1.0 / (12.0 * mu);
}

double xlogx_var_taylor(double mu) {
    require_nonnegative(mu, "mu");
    if (mu == 0.0) return 0.0;
    const double lm = std::log(mu);
    return mu * lm * lm + 2.0 * mu * lm + mu + 0.5 + 7.0 * lm / (15.0 * mu) -
           1.0 / (6.0 * mu) + lm / (mu * mu) - 13.0 / (144.0 * mu * mu);
}

double xlogx_cov_b_taylor(double mu, double lambda) {
    require_nonnegative(mu, "mu");
    gap(mu, lambda, "lambda");
    if (mu == 0.0) return 0.0;
    return (1.0 + std::log(lambda)) * poisson_x_xlogx_cov_taylor(mu);
}

double xlogx_cov_c_taylor(double mu, double lambda, double gamma) {
    require_nonnegative(mu, "mu");
    gap(mu, lambda, "lambda");
    gap(mu, gamma, "gamma");
    if (mu == 0.0) return 0.0;
    const double ll = std::log(lambda);
    const double lg = std::log(gamma);
    return mu * (ll * lg + ll + lg + 1.0);
}

XlogxMoments xlogx_moments_taylor(double mu, double lambda, double gamma) {
    XlogxMoments m;
    m.a = xlogx_var_taylor(mu);
    m.b = xlogx_cov_b_taylor(mu, lambda);
    m.c = xlogx_cov_c_taylor(mu, lambda, gamma);
    return m;
}

}  // namespace pathmix
