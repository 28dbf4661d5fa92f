#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "pathmix/graph.hpp"
#include "pathmix/models.hpp"

namespace pathmix {

/**
 * Monte-Carlo distribution of the length-k assortativity over networks drawn
 * from one model. `values` is indexed by replicate; replicates whose
 * assortativity is undefined (no paths, or degenerate mixing) hold NaN and
 * are tallied in degenerate_count rather than dropped. mean/sd (sample sd)
 * and the 2.5/97.5 empirical percentile bounds are taken over defined values
 * only.
 */
struct McSummary {
    int k = 1;
    int replicates = 0;
    std::vector<double> values;
    double mean = 0.0;
    double sd = 0.0;
    double ci95_low = 0.0;
    double ci95_high = 0.0;
    int degenerate_count = 0;
};

/**
 * Predictive check of an observed assortativity against its Monte-Carlo
 * distribution under a fitted model. p_two_tailed = 2 min(frac >= observed,
 * frac <= observed) over defined replicates, clipped to [2/(B+1), 1].
 * ratio_observed = mean / observed (non-finite when observed = 0).
 */
struct PpcReport {
    double observed = 0.0;
    McSummary summary;
    double p_two_tailed = 1.0;
    double ratio_observed = 1.0;
};

/** One Poisson network draw: every ordered pair (i, j), self-pairs included,
 *  gets an independent Poisson(mu_ij) count. Runs blockwise per group pair:
 *  a Poisson block total, then endpoint placement by propensity weights,
 *  which is equivalent by Poisson thinning. Consumes `eng` sequentially. */
LabeledDigraph sample_network(const FittedModel& m, std::mt19937_64& eng);

/** Deterministic wrapper: draws from stream 0 of `seed`. */
LabeledDigraph sample_network(const FittedModel& m, std::uint64_t seed);

/** B replicates of sample -> path_counts -> assortativity; replicate b uses
 *  stream b of `seed`, so any jobs value gives identical output. B >= 2.
 *  Throws NumericalError when every replicate is degenerate. */
McSummary assortativity_distribution(const FittedModel& m, int k, int B, std::uint64_t seed,
                                     int jobs = 1);

/** Observed assortativity of g versus its distribution under m. The model
 *  must share g's node/group space. */
PpcReport predictive_check(const LabeledDigraph& g, const FittedModel& m, int k, int B,
                           std::uint64_t seed, int jobs = 1);

/** Linear-interpolation quantile of pre-sorted values (the common "type 7"
 *  convention: h = (n-1) p). Empty input is rejected. */
double empirical_quantile(const std::vector<double>& sorted_values, double p);

/** Builds the McSummary statistics from raw replicate values (NaN =
 *  degenerate). Exposed for reuse by other Monte-Carlo layers. */
McSummary summarize_replicates(int k, std::vector<double> values);

}  // namespace pathmix
