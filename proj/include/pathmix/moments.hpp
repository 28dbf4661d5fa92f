#pragma once

#include <cmath>

namespace pathmix {

/** x log x with the 0 log 0 = 0 convention. */
inline double xlogx(double x) { return x > 0.0 ? x * std::log(x) : 0.0; }

/** poisson_xlogx_mean switches from the truncated series to the expansion
 *  mu ln mu + 1/2 + 1/(12 mu) + 1/(12 mu^2) above this point. The two sides
 *  differ by less than 1e-8 at the switch. */
inline constexpr double kXlogxTaylorSwitch = 300.0;

/**
 * f(mu) = E[X log X] for X ~ Poisson(mu). Exact truncated series below
 * kXlogxTaylorSwitch (absolute error well under 1e-8), four-term expansion
 * above it. Monotone increasing; f(mu) >= mu log mu for mu >= 1 (Jensen).
 * Negative mu is rejected.
 */
double poisson_xlogx_mean(double mu);

/** The series branch of poisson_xlogx_mean, valid for any mu >= 0. The sum is
 *  taken over a 14-sigma window around mu, so cost grows like sqrt(mu). */
double poisson_xlogx_mean_exact(double mu);

/** The expansion branch: mu ln mu + 1/2 + 1/(12 mu) + 1/(12 mu^2).
 *  Truncation error is O(1/mu^3); intended for large mu. */
double poisson_xlogx_mean_taylor(double mu);

/**
 * Central moments of X log X under Poisson coupling. With X ~ Poisson(mu) and
 * independent U ~ Poisson(lambda - mu), W ~ Poisson(gamma - mu):
 *
 *   a(mu)              = Var(X log X)
 *   b(mu, lambda)      = Cov(X log X, (X+U) log(X+U))
 *   c(mu, lambda, gam) = Cov((X+U) log(X+U), (X+W) log(X+W))
 *
 * Exact evaluations use truncated double sums over 14-sigma windows (absolute
 * tolerance well under 1e-8). mu = 0 gives 0 (the shared variable is
 * degenerate). lambda < mu or gamma < mu is rejected; differences within
 * 1e-9 * max(1, mu) are treated as equal and clamped to zero, under which
 * b(mu, mu) = a(mu) exactly.
 */
double xlogx_var(double mu);
double xlogx_cov_b(double mu, double lambda);
double xlogx_cov_c(double mu, double lambda, double gamma);

struct XlogxMoments {
    double a = 0.0;
    double b = 0.0;
    double c = 0.0;
};

XlogxMoments xlogx_moments(double mu, double lambda, double gamma);

/**
 * Large-mean expansions of the same moments. Validity: the shared mean mu
 * should be large for a; b and c additionally require lambda (and gamma) to
 * dominate mu and exceed 1. These are reported as a separate mode because the
 * truncation errors of individual terms do not cancel when many are summed;
 * prefer the exact forms or Monte Carlo for aggregate variance work.
 *
 *   cov(X, X log X) ~ mu ln mu + mu - 1/(12 mu)
 *   a(mu)           ~ mu ln^2 mu + 2 mu ln mu + mu + 1/2 + 7 ln mu/(15 mu)
 *                     - 1/(6 mu) + ln mu/mu^2 - 13/(144 mu^2)
 *   b(mu, lambda)   ~ (1 + ln lambda) cov(X, X log X)
 *   c(mu, l, g)     ~ mu (ln l ln g + ln l + ln g + 1)
 */
double poisson_x_xlogx_cov_taylor(double mu);
double xlogx_var_taylor(double mu);
double xlogx_cov_b_taylor(double mu, double lambda);
double xlogx_cov_c_taylor(double mu, double lambda, double gamma);

XlogxMoments xlogx_moments_taylor(double mu, double lambda, double gamma);

}  // namespace pathmix
