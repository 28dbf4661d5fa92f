#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "pathmix/moments.hpp"

using pathmix::poisson_xlogx_mean;
using pathmix::xlogx_cov_b;
using pathmix::xlogx_cov_c;
using pathmix::xlogx_var;

namespace {

double rel_err(double approx, double exact) { return std::abs(approx - exact) / std::abs(exact); }

}  // namespace

TEST_CASE("xlogx handles the origin") {
    CHECK(pathmix::xlogx(0.0) == 0.0);
    CHECK(pathmix::xlogx(1.0) == 0.0);
    CHECK(pathmix::xlogx(std::exp(1.0)) == doctest::Approx(std::exp(1.0)));
}

TEST_CASE("Poisson mean of X log X matches high-precision references") {
    CHECK(poisson_xlogx_mean(0.0) == 0.0);
    CHECK(poisson_xlogx_mean(1.0) == doctest::Approx(0.5734028091226202).epsilon(1e-12));
    CHECK(poisson_xlogx_mean(2.0) == doctest::Approx(1.9559962819633622).epsilon(1e-12));
    CHECK(poisson_xlogx_mean(100.0) == doctest::Approx(461.01786042848906).epsilon(1e-12));
}

TEST_CASE("Poisson mean of X log X is monotone and dominates mu log mu") {
    double prev = -1.0;
    for (double mu :
         {0.0, 0.01, 0.1, 0.5, 1.0, 2.0, 5.0, 10.0, 50.0, 100.0, 299.0, 301.0, 1000.0, 1e4}) {
        const double f = poisson_xlogx_mean(mu);
        CHECK(f > prev);
        if (mu >= 1.0) CHECK(f >= pathmix::xlogx(mu));
        prev = f;
    }
}

TEST_CASE("series and expansion branches agree near the switch point") {
    const double gap = std::abs(pathmix::poisson_xlogx_mean_exact(pathmix::kXlogxTaylorSwitch) -
                                pathmix::poisson_xlogx_mean_taylor(pathmix::kXlogxTaylorSwitch));
    CHECK(gap < 1e-8);
}

TEST_CASE("series and expansion agree to 1e-4 at moderate and large means") {
    for (double mu : {50.0, 100.0, 1000.0}) {
        CHECK(std::abs(pathmix::poisson_xlogx_mean_exact(mu) -
                       pathmix::poisson_xlogx_mean_taylor(mu)) < 1e-4);
    }
}

TEST_CASE("negative means are rejected; zero means give zero moments") {
    CHECK_THROWS_AS(poisson_xlogx_mean(-0.5), std::invalid_argument);
    CHECK(xlogx_var(0.0) == 0.0);
    CHECK(xlogx_cov_b(0.0, 5.0) == 0.0);
    CHECK(xlogx_cov_c(0.0, 5.0, 7.0) == 0.0);
}

TEST_CASE("variance of X log X matches high-precision references") {
    CHECK(xlogx_var(1.0) == doctest::Approx(1.4361557601106973).epsilon(1e-10));
    CHECK(xlogx_var(2.0) == doctest::Approx(6.1325783656979556).epsilon(1e-10));
}

TEST_CASE("degenerate couplings collapse to the variance") {
    for (double mu : {0.5, 1.0, 3.0, 20.0}) {
        CHECK(xlogx_cov_b(mu, mu) == xlogx_var(mu));
        CHECK(xlogx_cov_c(mu, mu, mu) == xlogx_var(mu));
    }
    // tiny negative slack from forming lambda - mu in floating point is tolerated
    CHECK(xlogx_cov_b(3.0, 3.0 - 1e-12) == xlogx_var(3.0));
}

TEST_CASE("couplings below the shared mean are rejected") {
    CHECK_THROWS_AS(xlogx_cov_b(2.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(xlogx_cov_c(2.0, 3.0, 1.0), std::invalid_argument);
}

TEST_CASE("covariances respect symmetry and Cauchy-Schwarz") {
    CHECK(xlogx_cov_c(2.0, 5.0, 7.0) == doctest::Approx(xlogx_cov_c(2.0, 7.0, 5.0)).epsilon(1e-12));
    for (double mu : {0.5, 2.0, 8.0}) {
        for (double lambda : {1.0 * mu, 1.5 * mu, 4.0 * mu}) {
            const double bound = std::sqrt(xlogx_var(mu) * xlogx_var(lambda));
            CHECK(std::abs(xlogx_cov_b(mu, lambda)) <= bound * (1.0 + 1e-12));
        }
    }
}

TEST_CASE("moment bundle matches the individual functions") {
    const auto m = pathmix::xlogx_moments(2.0, 5.0, 7.0);
    CHECK(m.a == xlogx_var(2.0));
    CHECK(m.b == xlogx_cov_b(2.0, 5.0));
    CHECK(m.c == xlogx_cov_c(2.0, 5.0, 7.0));
}

TEST_CASE("large-mean expansions track the exact moments in their regime") {
    // variance expansion alone; the error contracts like 1/mu^2
    CHECK(rel_err(pathmix::xlogx_var_taylor(20.0), xlogx_var(20.0)) < 4e-4);
    CHECK(rel_err(pathmix::xlogx_var_taylor(50.0), xlogx_var(50.0)) < 1e-4);
    CHECK(rel_err(pathmix::xlogx_var_taylor(200.0), xlogx_var(200.0)) < 1e-5);
    // couplings with a dominating total mean
    CHECK(rel_err(pathmix::xlogx_cov_b_taylor(50.0, 5000.0), xlogx_cov_b(50.0, 5000.0)) < 1e-4);
    CHECK(rel_err(pathmix::xlogx_cov_c_taylor(50.0, 5000.0, 2000.0),
                  xlogx_cov_c(50.0, 5000.0, 2000.0)) < 1e-5);
    const auto t = pathmix::xlogx_moments_taylor(50.0, 5000.0, 2000.0);
    CHECK(t.a == pathmix::xlogx_var_taylor(50.0));
    CHECK(t.b == pathmix::xlogx_cov_b_taylor(50.0, 5000.0));
    CHECK(t.c == pathmix::xlogx_cov_c_taylor(50.0, 5000.0, 2000.0));
}
