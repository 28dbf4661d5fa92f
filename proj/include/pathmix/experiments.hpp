#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "pathmix/graph.hpp"
#include "pathmix/model_selection.hpp"
#include "pathmix/models.hpp"
#include "pathmix/sampling.hpp"

namespace pathmix {

/**
 * Synthetic DCSBM truth: equal-sized groups, an in-group edge share split
 * evenly over the diagonal (the rest evenly off-diagonal) scaled to the
 * target edge total, and propensities drawn i.i.d. from a truncated power
 * law on [powerlaw_min, powerlaw_max] (inverse-CDF on the continuous
 * density x^exponent) then normalized within each group. powerlaw_max <= 0
 * means n_nodes. Setting powerlaw_min = powerlaw_max gives flat
 * propensities. Out- and in-propensities are drawn independently.
 */
struct SynthConfig {
    int n_nodes = 0;
    int n_groups = 2;
    double target_total_edges = 0.0;
    double in_group_fraction = 0.70;
    double powerlaw_exponent = -0.3;
    double powerlaw_min = 1.0;
    double powerlaw_max = 0.0;
    std::uint64_t seed = 0;
};

FittedModel synth_dcsbm(const SynthConfig& cfg);

/**
 * Group-constraint truth with brokerage structure: within each group a few
 * randomly chosen brokers carry `cross_mass` of the group's propensity
 * toward every other group, while their own-group propensity is discounted
 * by `in_broker_discount`. Out- and in-propensities coincide. Graphs sampled
 * from this model have higher length-2 assortativity transfer through
 * brokers than any degree-corrected fit can reproduce.
 */
struct BrokerageConfig {
    int n_nodes = 0;
    int n_groups = 2;
    double total_edges = 0.0;
    double broker_fraction = 0.06;
    double cross_mass = 0.9;
    double in_broker_discount = 0.25;
    std::uint64_t seed = 0;
};

FittedModel brokerage_truth(const BrokerageConfig& cfg);

/** One density cell of the null-distribution sweep. Error bars are emitted
 *  both ways: normal SEs and empirical 2.5/97.5 percentiles. */
struct SweepCell {
    double target_edges = 0.0;
    double true_mc_mean = 0.0;
    double true_mc_se = 0.0;
    double true_ci_low = 0.0;
    double true_ci_high = 0.0;
    double bootstrap_mean = 0.0;
    double bootstrap_se = 0.0;
    double bootstrap_ci_low = 0.0;
    double bootstrap_ci_high = 0.0;
    double dense_formula = 0.0;
    double numeric_mean = 0.0;
};

struct SweepTable {
    SynthConfig base;
    std::vector<double> edge_grid;
    int replicates = 0;
    std::uint64_t seed = 0;
    std::vector<SweepCell> cells;
};

/**
 * For each edge total in the grid: build a truth model (base config with
 * that density), estimate the true null mean of the statistic by Monte
 * Carlo, then sample one network from the truth and run the parametric
 * bootstrap on it; also record the dense closed form and the numeric mean.
 * replicates >= 100 (bootstrap floor). Each cell derives its own sub-seeds
 * from `seed` in grid order, so the table is reproducible byte-for-byte.
 */
SweepTable run_llr_density_sweep(const SynthConfig& base, const std::vector<double>& edge_grid,
                                 int replicates, std::uint64_t seed, int jobs = 1);

/** One (graph, model kind, k) row of the predictive-check study. Rows where
 *  the observed assortativity is undefined are flagged, not dropped. */
struct PpcStudyRow {
    std::string graph_label;
    std::string model;
    int k = 0;
    double observed = 0.0;
    double mc_mean = 0.0;
    double ratio = 0.0;  // mc_mean / observed
    double ratio_ci_low = 0.0;
    double ratio_ci_high = 0.0;
    double p_two_tailed = 1.0;
    int degenerate_count = 0;
    bool degenerate = false;
};

/**
 * Predictive checks of every graph under both closed-form fits (dcsbm and
 * mixed-group) for every k in k_list, sorted by descending ratio (flagged
 * rows last). Sub-seeds are assigned in enumeration order before sorting.
 */
std::vector<PpcStudyRow> run_ppc_study(
    const std::vector<std::pair<std::string, LabeledDigraph>>& graphs,
    const std::vector<int>& k_list, int B, std::uint64_t seed, int jobs = 1);

}  // namespace pathmix
