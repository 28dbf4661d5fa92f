#include <doctest.h>

#include <cmath>
#include <random>
#include <stdexcept>

#include "pathmix/errors.hpp"
#include "pathmix/models.hpp"
#include "pathmix/paths.hpp"
#include "test_util.hpp"

using pathmix::DataError;
using pathmix::FittedModel;
using pathmix::GroupStats;
using pathmix::LabeledDigraph;
using pathmix::ModelKind;
using pathmix::NumericalError;

namespace {

// 1 -> 2, 3 -> 4, 1 -> 3, 3 -> 1 with groups {1, 2} and {3, 4}
LabeledDigraph balanced_four() {
    std::vector<pathmix::EdgeRecord> edges = {{"1", "2"}, {"3", "4"}, {"1", "3"}, {"3", "1"}};
    std::vector<pathmix::NodeGroupRecord> groups = {{"1", "r"}, {"2", "r"}, {"3", "s"}, {"4", "s"}};
    return LabeledDigraph::build(edges, groups);
}

// complete digraph on 4 nodes (no self-loops), groups {0, 1} and {2, 3}
LabeledDigraph complete_four() {
    std::vector<pathmix::Edge> edges;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j)
            if (i != j) edges.push_back({i, j, 1});
    Eigen::VectorXi grp(4);
    grp << 0, 0, 1, 1;
    return LabeledDigraph::from_indexed(std::move(edges), grp, {"a", "b", "c", "d"}, {"r", "s"});
}

}  // namespace

TEST_CASE("model kind names round-trip") {
    for (const auto kind : {ModelKind::DCSBM, ModelKind::MixedGroup, ModelKind::MixedNode})
        CHECK(pathmix::model_kind_from_string(pathmix::to_string(kind)) == kind);
    CHECK_THROWS_AS(pathmix::model_kind_from_string("bogus"), DataError);
}

TEST_CASE("degree-corrected fit recovers the closed-form estimates") {
    std::mt19937_64 eng(31);
    for (int rep = 0; rep < 20; ++rep) {
        const LabeledDigraph g = testutil::random_graph(eng, 20, 3, 50, 3);
        const GroupStats st = pathmix::group_stats(g);
        const FittedModel m = pathmix::fit_dcsbm(g);
        CHECK((m.omega.array() == st.m.cast<double>().array()).all());
        for (Eigen::Index i = 0; i < g.n_nodes(); ++i) {
            const int r = g.group_of(i);
            if (st.d_out_group[r] > 0)
                CHECK(m.theta_out(i, 0) ==
                      static_cast<double>(st.d_out_node[i]) / st.d_out_group[r]);
        }
        // group-wise normalization
        Eigen::VectorXd sums = Eigen::VectorXd::Zero(g.n_groups());
        for (Eigen::Index i = 0; i < g.n_nodes(); ++i) sums[g.group_of(i)] += m.theta_out(i, 0);
        CHECK((sums.array() - 1.0).abs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("zero-degree groups fall back to uniform propensities") {
    // group s has no out-edges at all
    std::vector<pathmix::EdgeRecord> edges = {{"a", "c"}, {"b", "c"}};
    std::vector<pathmix::NodeGroupRecord> groups = {{"a", "r"}, {"b", "r"}, {"c", "s"}, {"d", "s"}};
    const LabeledDigraph g = LabeledDigraph::build(edges, groups);
    const FittedModel m = pathmix::fit_dcsbm(g);
    CHECK(m.theta_out(2, 0) == 0.5);
    CHECK(m.theta_out(3, 0) == 0.5);
    CHECK(m.theta_in(3, 0) == 0.0);  // group s in-degree is 2, node d has none -> 0
    CHECK(m.theta_in(2, 0) == 1.0);
}

TEST_CASE("group-constraint fit satisfies its defining identities") {
    std::mt19937_64 eng(33);
    for (int rep = 0; rep < 20; ++rep) {
        const LabeledDigraph g = testutil::random_graph(eng, 24, 3, 60, 3);
        const GroupStats st = pathmix::group_stats(g);
        const FittedModel m = pathmix::fit_mixed_group(g);
        const Eigen::Index G = g.n_groups();
        CHECK((m.omega.array() == st.m.cast<double>().array()).all());

        // theta * block total reproduces each per-(node, group) degree exactly
        for (Eigen::Index i = 0; i < g.n_nodes(); ++i) {
            const int r = g.group_of(i);
            for (Eigen::Index s = 0; s < G; ++s) {
                if (st.m(r, s) > 0)
                    CHECK(m.theta_out(i, s) * static_cast<double>(st.m(r, s)) ==
                          static_cast<double>(st.d_out_node_group(i, s)));
                if (st.m(s, r) > 0)
                    CHECK(m.theta_in(i, s) * static_cast<double>(st.m(s, r)) ==
                          static_cast<double>(st.d_in_node_group(i, s)));
            }
        }

        // block normalization: out-propensities for (r, s) sum to 1 over r's members
        Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(G, G);
        for (Eigen::Index i = 0; i < g.n_nodes(); ++i)
            sums.row(g.group_of(i)) += m.theta_out.row(i);
        CHECK((sums.array() - 1.0).abs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("group-constraint fit gives empty blocks uniform propensities") {
    // no edges from r to s anywhere
    std::vector<pathmix::EdgeRecord> edges = {{"a", "b"}, {"c", "d"}, {"c", "a"}};
    std::vector<pathmix::NodeGroupRecord> groups = {{"a", "r"}, {"b", "r"}, {"c", "s"}, {"d", "s"}};
    const LabeledDigraph g = LabeledDigraph::build(edges, groups);
    const FittedModel m = pathmix::fit_mixed_group(g);
    CHECK(m.theta_out(0, 1) == 0.5);  // m(r, s) = 0 -> 1 / |r|
    CHECK(m.theta_out(1, 1) == 0.5);
}

TEST_CASE("node-constraint fit reaches the symmetric solution on a complete digraph") {
    const LabeledDigraph g = complete_four();
    const FittedModel m = pathmix::fit_mixed_node(g);
    for (Eigen::Index i = 0; i < 4; ++i) {
        const int own = g.group_of(i);
        CHECK(m.theta_out(i, own) == doctest::Approx(1.0 / 3.0).epsilon(1e-10));
        CHECK(m.theta_out(i, 1 - own) == doctest::Approx(2.0 / 3.0).epsilon(1e-10));
        CHECK(m.theta_in(i, own) == doctest::Approx(1.0 / 3.0).epsilon(1e-10));
    }
    CHECK(m.omega(0, 0) == doctest::Approx(4.5).epsilon(1e-10));
    CHECK(m.omega(0, 1) == doctest::Approx(2.25).epsilon(1e-10));
    CHECK(m.omega(1, 0) == doctest::Approx(2.25).epsilon(1e-10));
    CHECK(m.omega(1, 1) == doctest::Approx(4.5).epsilon(1e-10));
    CHECK(m.residual < 1e-8);
    CHECK(!m.init_rule.empty());
}

TEST_CASE("node-constraint fit is stationary and rows are normalized") {
    // seeds whose graphs admit an interior MLE; see the non-existence case below
    for (const std::uint64_t seed : {3u, 5u, 13u, 20u, 21u, 22u, 27u, 29u, 30u, 34u}) {
        std::mt19937_64 eng(seed);
        const LabeledDigraph g = testutil::random_graph(eng, 16, 2, 60, 3);
        const FittedModel m = pathmix::fit_mixed_node(g);
        CHECK((m.theta_out.rowwise().sum().array() - 1.0).abs().maxCoeff() < 1e-12);
        CHECK((m.theta_in.rowwise().sum().array() - 1.0).abs().maxCoeff() < 1e-12);
        CHECK(m.residual <= 1e-10);
        CHECK(pathmix::stationarity_residual(m, g) == m.residual);
    }
}

TEST_CASE("node-constraint solver reports instances whose supremum is not attained") {
    // this graph's likelihood rises toward its supremum only as one propensity
    // column collapses to zero with omega growing without bound
    std::mt19937_64 eng(47);
    const LabeledDigraph g = testutil::random_graph(eng, 16, 2, 60, 3);
    pathmix::SolverConfig cfg;
    cfg.max_iterations = 4000;
    try {
        pathmix::fit_mixed_node(g, cfg);
        FAIL("expected NumericalError");
    } catch (const NumericalError& e) {
        CHECK(e.has_residual());
        CHECK(e.residual() > 1e-6);
    }
}

TEST_CASE("node-constraint fit converges at the degree-fraction point on the four-node fixture") {
    const LabeledDigraph g = balanced_four();
    const FittedModel m = pathmix::fit_mixed_node(g);
    CHECK(m.iterations <= 3);
    CHECK((m.omega.array() - 1.0).abs().maxCoeff() < 1e-12);
    CHECK(m.theta_out(0, 0) == doctest::Approx(0.5));
    CHECK(m.theta_out(1, 0) == 0.5);  // zero-degree node: uniform row
    CHECK(m.theta_in(0, 1) == doctest::Approx(1.0));
}

TEST_CASE("node-constraint solver reports non-convergence with its residual") {
    const LabeledDigraph g = complete_four();
    pathmix::SolverConfig cfg;
    cfg.max_iterations = 0;
    try {
        pathmix::fit_mixed_node(g, cfg);
        FAIL("expected NumericalError");
    } catch (const NumericalError& e) {
        CHECK(e.has_residual());
    }
}

TEST_CASE("group-constraint likelihood dominates the other fits") {
    for (const std::uint64_t seed : {1u, 8u, 13u, 18u, 19u, 21u, 22u, 31u, 36u, 37u}) {
        std::mt19937_64 eng(seed);
        const LabeledDigraph g = testutil::random_graph(eng, 14, 2, 50, 3);
        const double ll_dc = pathmix::log_likelihood(pathmix::fit_dcsbm(g), g);
        const double ll_mg = pathmix::log_likelihood(pathmix::fit_mixed_group(g), g);
        const double ll_mn = pathmix::log_likelihood(pathmix::fit_mixed_node(g), g);
        CHECK(ll_mg >= ll_dc - 1e-9);
        CHECK(ll_mg >= ll_mn - 1e-9);
    }
}

TEST_CASE("log-likelihood matches the hand-computed value on the four-node fixture") {
    const LabeledDigraph g = balanced_four();
    const FittedModel m = pathmix::fit_dcsbm(g);
    // four edges, each with mean 1/2; total mean mass 4
    const double expect = 4.0 * std::log(0.5) - 4.0;
    CHECK(pathmix::log_likelihood(m, g) == doctest::Approx(expect).epsilon(1e-14));
}

TEST_CASE("mean degrees aggregate back to node and group totals") {
    std::mt19937_64 eng(59);
    const LabeledDigraph g = testutil::random_graph(eng, 18, 3, 70, 3);
    const GroupStats st = pathmix::group_stats(g);
    const FittedModel mg = pathmix::fit_mixed_group(g);
    const Eigen::MatrixXd Dout = pathmix::mean_out_degrees(mg);
    const Eigen::MatrixXd Din = pathmix::mean_in_degrees(mg);
    CHECK((Dout - st.d_out_node_group.cast<double>()).cwiseAbs().maxCoeff() == 0.0);
    CHECK((Din - st.d_in_node_group.cast<double>()).cwiseAbs().maxCoeff() == 0.0);

    const FittedModel dc = pathmix::fit_dcsbm(g);
    const Eigen::MatrixXd Ddc = pathmix::mean_out_degrees(dc);
    CHECK((Ddc.rowwise().sum() - st.d_out_node.cast<double>()).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("expected length-2 paths reproduce observed counts bit-for-bit without self-loops") {
    std::mt19937_64 eng(61);
    for (int rep = 0; rep < 30; ++rep) {
        const LabeledDigraph g = testutil::random_graph(eng, 15, 3, 40, 3, false);
        const FittedModel m = pathmix::fit_mixed_group(g);
        const auto expected = pathmix::expected_path_counts(m, g, 2);
        const auto observed = pathmix::path_counts(g, 2);
        CHECK((expected.counts.array() == observed.counts.cast<double>().array()).all());
        CHECK((expected.diag_self_loop_bias.array() == 0.0).all());
    }
}

TEST_CASE("self-loops shift the expected diagonal by exactly the loop count") {
    std::mt19937_64 eng(67);
    for (int rep = 0; rep < 30; ++rep) {
        const LabeledDigraph g = testutil::random_graph(eng, 12, 2, 35, 3, true);
        const GroupStats st = pathmix::group_stats(g);
        if (st.self_loops_per_group.sum() == 0) continue;
        const FittedModel m = pathmix::fit_mixed_group(g);
        const auto expected = pathmix::expected_path_counts(m, g, 2);
        const auto observed = pathmix::path_counts(g, 2);
        for (Eigen::Index r = 0; r < g.n_groups(); ++r) {
            for (Eigen::Index s = 0; s < g.n_groups(); ++s) {
                const double discrepancy =
                    expected.counts(r, s) - static_cast<double>(observed.counts(r, s));
                if (r == s) {
                    CHECK(discrepancy == static_cast<double>(st.self_loops_per_group[r]));
                    CHECK(expected.diag_self_loop_bias[r] == discrepancy);
                } else {
                    CHECK(discrepancy == 0.0);
                }
            }
        }
    }
}

TEST_CASE("expected length-1 paths reproduce the block totals for closed-form fits") {
    std::mt19937_64 eng(71);
    const LabeledDigraph g = testutil::random_graph(eng, 15, 3, 45, 2);
    const GroupStats st = pathmix::group_stats(g);
    for (const auto& m : {pathmix::fit_dcsbm(g), pathmix::fit_mixed_group(g)}) {
        const auto expected = pathmix::expected_path_counts(m, 1);
        CHECK((expected.counts - st.m.cast<double>()).cwiseAbs().maxCoeff() < 1e-9);
    }
    CHECK_THROWS_AS(pathmix::expected_path_counts(pathmix::fit_dcsbm(g), 3),
                    std::invalid_argument);
}

TEST_CASE("model and graph spaces must agree") {
    const LabeledDigraph g = balanced_four();
    // same node and group counts, different assignment
    std::vector<pathmix::EdgeRecord> edges = {{"1", "2"}};
    std::vector<pathmix::NodeGroupRecord> groups = {{"1", "r"}, {"2", "s"}, {"3", "r"}, {"4", "s"}};
    const LabeledDigraph h = LabeledDigraph::build(edges, groups);
    const FittedModel m = pathmix::fit_dcsbm(g);
    CHECK_THROWS_AS(pathmix::check_same_space(m, h), DataError);
    CHECK_THROWS_AS(pathmix::log_likelihood(m, h), DataError);
}

TEST_CASE("fitting an empty graph is a data error") {
    CHECK_THROWS_AS(pathmix::fit_dcsbm(LabeledDigraph::build({}, {})), DataError);
}

TEST_CASE("expected adjacency rejects out-of-range nodes") {
    const FittedModel m = pathmix::fit_dcsbm(balanced_four());
    CHECK(pathmix::expected_adjacency(m, 0, 1) == doctest::Approx(0.5));
    CHECK_THROWS_AS(pathmix::expected_adjacency(m, 0, 99), std::out_of_range);
}

TEST_CASE("stationarity residual is only defined for the node-constraint kind") {
    const LabeledDigraph g = balanced_four();
    CHECK_THROWS_AS(pathmix::stationarity_residual(pathmix::fit_dcsbm(g), g),
                    std::invalid_argument);
}
