#include <doctest.h>

#include <cmath>
#include <random>
#include <stdexcept>

#include "pathmix/errors.hpp"
#include "pathmix/model_selection.hpp"
#include "pathmix/models.hpp"
#include "pathmix/rng.hpp"
#include "pathmix/sampling.hpp"
#include "test_util.hpp"

using pathmix::FittedModel;
using pathmix::LabeledDigraph;
using pathmix::ModelKind;
using pathmix::NumericalError;
using pathmix::VarianceMethod;

namespace {

/** Fixed 8-node two-group null model with hand-frozen reference moments. */
FittedModel tiny_model() {
    FittedModel m;
    m.kind = ModelKind::DCSBM;
    m.theta_out.resize(8, 1);
    m.theta_out << 0.4, 0.3, 0.2, 0.1, 0.35, 0.3, 0.2, 0.15;
    m.theta_in.resize(8, 1);
    m.theta_in << 0.25, 0.25, 0.3, 0.2, 0.4, 0.25, 0.2, 0.15;
    m.omega.resize(2, 2);
    m.omega << 30.0, 12.0, 9.0, 24.0;
    m.group_of.resize(8);
    m.group_of << 0, 0, 0, 0, 1, 1, 1, 1;
    for (int i = 0; i < 8; ++i) m.node_ids.push_back("v" + std::to_string(i));
    m.group_ids = {"g0", "g1"};
    return m;
}

LabeledDigraph balanced_four() {
    std::vector<pathmix::EdgeRecord> edges = {{"1", "2"}, {"3", "4"}, {"1", "3"}, {"3", "1"}};
    std::vector<pathmix::NodeGroupRecord> groups = {{"1", "r"}, {"2", "r"}, {"3", "s"}, {"4", "s"}};
    return LabeledDigraph::build(edges, groups);
}

}  // namespace

TEST_CASE("the statistic equals the likelihood difference of the two fits") {
    std::mt19937_64 eng(301);
    for (int rep = 0; rep < 30; ++rep) {
        const LabeledDigraph g = testutil::random_graph(eng, 12, 3, 40, 3);
        const double direct = pathmix::llr_statistic(g);
        const double via_fits = pathmix::log_likelihood(pathmix::fit_mixed_group(g), g) -
                                pathmix::log_likelihood(pathmix::fit_dcsbm(g), g);
        CHECK(std::abs(direct - via_fits) < 1e-9);
        CHECK(direct >= -1e-9);  // nested models
    }
}

TEST_CASE("the statistic is zero for single-group graphs") {
    std::mt19937_64 eng(307);
    for (int rep = 0; rep < 10; ++rep) {
        const LabeledDigraph g = testutil::random_graph(eng, 10, 1, 30, 3);
        CHECK(std::abs(pathmix::llr_statistic(g)) < 1e-9);
    }
}

TEST_CASE("the statistic equals 4 ln 2 on the balanced four-node fixture") {
    CHECK(pathmix::llr_statistic(balanced_four()) ==
          doctest::Approx(4.0 * std::log(2.0)).epsilon(1e-12));
}

TEST_CASE("the aggregate form of the statistic matches the graph form") {
    std::mt19937_64 eng(311);
    const LabeledDigraph g = testutil::random_graph(eng, 15, 3, 50, 2);
    const pathmix::GroupStats st = pathmix::group_stats(g);
    CHECK(pathmix::llr_statistic(g) ==
          pathmix::llr_from_aggregates(st.d_out_node_group, st.d_in_node_group, st.m));
}

TEST_CASE("null mean of the statistic matches the frozen reference") {
    const FittedModel m = tiny_model();
    const auto mean = pathmix::expected_llr_null(m);
    CHECK(mean.dense == 6.0);  // (G - 1)(n - G)
    CHECK(mean.numeric == doctest::Approx(6.988597).epsilon(1e-5));
}

TEST_CASE("null mean is zero for a single-group model") {
    FittedModel m;
    m.kind = ModelKind::DCSBM;
    m.theta_out = Eigen::MatrixXd::Constant(5, 1, 0.2);
    m.theta_in = Eigen::MatrixXd::Constant(5, 1, 0.2);
    m.omega = Eigen::MatrixXd::Constant(1, 1, 40.0);
    m.group_of = Eigen::VectorXi::Zero(5);
    m.node_ids = {"a", "b", "c", "d", "e"};
    m.group_ids = {"g"};
    const auto mean = pathmix::expected_llr_null(m);
    CHECK(mean.dense == 0.0);
    CHECK(std::abs(mean.numeric) < 1e-9);
}

TEST_CASE("null mean rejects non-DCSBM models") {
    std::mt19937_64 eng(313);
    const LabeledDigraph g = testutil::random_graph(eng, 8, 2, 30, 2);
    CHECK_THROWS_AS(pathmix::expected_llr_null(pathmix::fit_mixed_group(g)),
                    std::invalid_argument);
}

TEST_CASE("exact null variance matches the frozen reference") {
    const double var = pathmix::llr_variance_null(tiny_model(), VarianceMethod::ExactNumeric);
    CHECK(var == doctest::Approx(7.230504).epsilon(2e-5));
}

TEST_CASE("the exact-variance cost guard points at the sampling fallback") {
    pathmix::VarianceBudget budget;
    budget.max_exact_nodes = 4;
    try {
        pathmix::llr_variance_null(tiny_model(), VarianceMethod::ExactNumeric, budget);
        FAIL("expected NumericalError");
    } catch (const NumericalError& e) {
        CHECK(std::string(e.what()).find("monte_carlo") != std::string::npos);
    }
}

TEST_CASE("aggregate draws agree with full network draws in distribution") {
    const FittedModel m = tiny_model();
    const int B = 2000;
    double sum_a = 0.0, sumsq_a = 0.0, sum_n = 0.0, sumsq_n = 0.0;
    for (int b = 0; b < B; ++b) {
        std::mt19937_64 eng_a = pathmix::make_stream(1717, b);
        const auto agg = pathmix::sample_aggregates(m, eng_a);
        const double va =
            pathmix::llr_from_aggregates(agg.d_out_node_group, agg.d_in_node_group, agg.m);
        sum_a += va;
        sumsq_a += va * va;

        std::mt19937_64 eng_n = pathmix::make_stream(2718, b);
        const double vn = pathmix::llr_statistic(pathmix::sample_network(m, eng_n));
        sum_n += vn;
        sumsq_n += vn * vn;
    }
    const double mean_a = sum_a / B, mean_n = sum_n / B;
    const double var_a = (sumsq_a - B * mean_a * mean_a) / (B - 1);
    const double var_n = (sumsq_n - B * mean_n * mean_n) / (B - 1);
    const double se = std::sqrt(var_a / B + var_n / B);
    CHECK(std::abs(mean_a - mean_n) <= 4.0 * se);
}

TEST_CASE("Monte Carlo null replicates are reproducible and job-count independent") {
    const FittedModel m = tiny_model();
    const auto a = pathmix::mc_llr_null(m, 64, 55, 1);
    const auto b = pathmix::mc_llr_null(m, 64, 55, 4);
    CHECK(a.values == b.values);
    CHECK(a.mean == b.mean);
    CHECK_THROWS_AS(pathmix::mc_llr_null(m, 1, 5), std::invalid_argument);
}

TEST_CASE("Monte Carlo null mean agrees with the numeric expectation") {
    const FittedModel m = tiny_model();
    const auto mc = pathmix::mc_llr_null(m, 3000, 909);
    const double se = mc.sd / std::sqrt(3000.0);
    CHECK(std::abs(mc.mean - pathmix::expected_llr_null(m).numeric) <= 4.0 * se);
    CHECK(pathmix::llr_variance_null(m, VarianceMethod::MonteCarlo,
                                     {3000, 909, 1, 500}) == doctest::Approx(mc.sd * mc.sd));
}

TEST_CASE("bootstrap null distributions are reproducible with valid p-values") {
    std::mt19937_64 eng(317);
    const LabeledDigraph g = testutil::random_graph(eng, 20, 2, 120, 2);
    const auto a = pathmix::bootstrap_llr_null(g, 120, 606, 1);
    const auto b = pathmix::bootstrap_llr_null(g, 120, 606, 3);
    CHECK(a.values == b.values);
    CHECK(a.observed == pathmix::llr_statistic(g));
    CHECK(a.p_value >= 1.0 / 121.0);
    CHECK(a.p_value <= 1.0);
    CHECK_THROWS_AS(pathmix::bootstrap_llr_null(g, 99, 1), std::invalid_argument);
}

TEST_CASE("sparsity diagnostic reports the smallest expected degree and flags it") {
    const FittedModel m = tiny_model();
    // smallest expected per-(node, group) degree: theta 0.1 against omega 12
    const auto rep = pathmix::sparsity_diagnostic(m, 5.0, 200, 11);
    CHECK(rep.min_expected_group_degree == doctest::Approx(1.2));
    CHECK(rep.sparse_flag);
    CHECK(rep.threshold == 5.0);
    CHECK(rep.bias_replicates == 200);
    CHECK(rep.plugin_bias_estimate >= 0.0);
    CHECK(std::isfinite(rep.bias_b1));
    CHECK(std::isfinite(rep.bias_b2));

    FittedModel dense = tiny_model();
    dense.omega *= 60.0;  // smallest expected degree becomes 72
    const auto rep2 = pathmix::sparsity_diagnostic(dense, 5.0, 200, 11);
    CHECK(rep2.min_expected_group_degree == doctest::Approx(72.0));
    CHECK(!rep2.sparse_flag);
}

TEST_CASE("the full report wires every stage together") {
    std::mt19937_64 eng(331);
    const LabeledDigraph g = testutil::random_graph(eng, 18, 2, 140, 2);
    pathmix::LlrOptions opt;
    opt.method = VarianceMethod::MonteCarlo;
    opt.variance_replicates = 400;
    opt.bootstrap_replicates = 150;
    opt.seed = 4242;
    const auto rep = pathmix::llr_report(g, opt);
    CHECK(rep.lambda_hat == pathmix::llr_statistic(g));
    CHECK(rep.variance_method == "monte_carlo");
    CHECK(rep.null_variance > 0.0);
    CHECK(rep.p_value_normal > 0.0);
    CHECK(rep.p_value_normal <= 1.0);
    REQUIRE(rep.p_value_bootstrap.has_value());
    CHECK(*rep.p_value_bootstrap >= 1.0 / 151.0);
    CHECK(rep.null_mean_dense ==
          (static_cast<double>(g.n_groups()) - 1.0) *
              (static_cast<double>(g.n_nodes()) - static_cast<double>(g.n_groups())));

    pathmix::LlrOptions no_boot = opt;
    no_boot.bootstrap_replicates = 0;
    CHECK(!pathmix::llr_report(g, no_boot).p_value_bootstrap.has_value());

    // identical options give identical reports
    const auto rep2 = pathmix::llr_report(g, opt);
    CHECK(rep2.null_variance == rep.null_variance);
    CHECK(rep2.p_value_normal == rep.p_value_normal);
}

TEST_CASE("variance method names round-trip") {
    for (const auto method : {VarianceMethod::ExactNumeric, VarianceMethod::Taylor,
                              VarianceMethod::MonteCarlo})
        CHECK(pathmix::variance_method_from_string(pathmix::to_string(method)) == method);
    CHECK_THROWS_AS(pathmix::variance_method_from_string("nope"), pathmix::DataError);
}
