#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "pathmix/graph.hpp"
#include "pathmix/models.hpp"

namespace pathmix {

/**
 * Log-likelihood ratio of the group-constraint mixed model over DCSBM at
 * their respective MLEs. Closed form in the degree aggregates:
 *
 *   lambda = sum_{i,g} [xlogx(d_{i,g}^o) + xlogx(d_{i,g}^i)]
 *          - sum_i [xlogx(d_i^o) + xlogx(d_i^i)]
 *          - 2 sum_{r,s} xlogx(m_rs)
 *          + sum_r [xlogx(d_r^o) + xlogx(d_r^i)]
 *
 * Nonnegative up to rounding because the models are nested. Zero for any
 * single-group graph.
 */
double llr_statistic(const LabeledDigraph& g);

/** Same statistic from raw aggregates (per-node-per-group out/in degrees and
 *  the group pair counts); group degree totals are derived from m. */
double llr_from_aggregates(const CountMatrix& d_out_node_group,
                           const CountMatrix& d_in_node_group, const CountMatrix& m);

struct LlrNullMean {
    double dense = 0.0;    // (|G| - 1)(|N| - |G|)
    double numeric = 0.0;  // same sum pattern as the statistic with f(mu) terms
};

/** Null mean of the statistic when the DCSBM model m is the truth. The
 *  numeric value replaces each xlogx(count) by E[X log X] at the count's
 *  expectation; it exceeds the dense closed form on sparse models. DCSBM
 *  kind only. */
LlrNullMean expected_llr_null(const FittedModel& m);

enum class VarianceMethod { ExactNumeric, Taylor, MonteCarlo };

const char* to_string(VarianceMethod method);
VarianceMethod variance_method_from_string(const std::string& name);

struct VarianceBudget {
    int replicates = 2000;        // monte_carlo sample size
    std::uint64_t seed = 0;       // monte_carlo stream seed
    int jobs = 1;
    int max_exact_nodes = 500;    // cost guard for exact_numeric
};

/**
 * Null variance of the statistic under the DCSBM model m.
 *
 * exact_numeric sums the full covariance expansion of the statistic's terms
 * using the windowed Poisson moments; cost grows like (n G)^2 times a window
 * size, so it is guarded by budget.max_exact_nodes (NumericalError advising
 * monte_carlo when exceeded). taylor substitutes the large-mean expansions
 * term for term; the individual expansions are accurate but their truncation
 * errors do not cancel across the sum, so treat this mode as indicative
 * only. monte_carlo is the sample variance over aggregate resamples and is
 * the default elsewhere.
 */
double llr_variance_null(const FittedModel& m, VarianceMethod method,
                         const VarianceBudget& budget = {});

/** One draw of the sufficient statistics of a DCSBM model: per-(node, group)
 *  out-degrees are independent Poisson; group pair counts are their sums;
 *  per-(node, group) in-degrees are multinomial given the pair counts
 *  (sequential conditional binomials). The statistic needs nothing else, so
 *  null simulation never materializes a network. */
struct AggregateSample {
    CountMatrix d_out_node_group;
    CountMatrix d_in_node_group;
    CountMatrix m;
};

AggregateSample sample_aggregates(const FittedModel& m, std::mt19937_64& eng);

struct LlrNullMc {
    std::vector<double> values;  // statistic per replicate, by replicate index
    double mean = 0.0;
    double sd = 0.0;
};

/** B >= 2 null replicates of the statistic under m; replicate b uses stream b
 *  of seed, so output is identical for any jobs value. */
LlrNullMc mc_llr_null(const FittedModel& m, int B, std::uint64_t seed, int jobs = 1);

struct BootstrapLlr {
    double observed = 0.0;       // statistic of the input graph
    std::vector<double> values;  // statistic per bootstrap replicate
    double mean = 0.0;
    double sd = 0.0;
    double p_value = 1.0;        // frac(values >= observed), floored at 1/(B+1)
};

/** Parametric bootstrap: fit DCSBM to g, resample the statistic B times
 *  (B >= 100) from the fit. On sparse graphs the bootstrap mean
 *  underestimates the true null mean because plug-in parameters absorb
 *  noise; see sparsity_diagnostic. */
BootstrapLlr bootstrap_llr_null(const LabeledDigraph& g, int B, std::uint64_t seed,
                                int jobs = 1);

/**
 * Sparse-regime diagnostics for a DCSBM null model.
 *
 * min_expected_group_degree is the smallest of the per-(node, group) expected
 * out/in degrees theta_i^o omega_{g_i g} and theta_i^i omega_{g g_i}.
 * plugin_bias_estimate is a heuristic first-order estimate of how much a
 * plug-in (bootstrap) null mean falls short, built from 1/12-curvature terms
 * whose Jensen gaps are estimated by resampling refitted parameters;
 * clamped at zero (raw components reported alongside). Terms whose
 * denominators were never positive across resamples are skipped and counted.
 */
struct SparsityReport {
    double min_expected_group_degree = 0.0;
    double threshold = 5.0;
    bool sparse_flag = false;
    double plugin_bias_estimate = 0.0;  // max(0, b1 + b2)
    double bias_b1 = 0.0;
    double bias_b2 = 0.0;
    int bias_skipped_terms = 0;
    int bias_replicates = 0;
};

SparsityReport sparsity_diagnostic(const FittedModel& m, double threshold = 5.0,
                                   int bias_replicates = 400, std::uint64_t seed = 0);

struct LlrOptions {
    VarianceMethod method = VarianceMethod::MonteCarlo;
    int variance_replicates = 2000;
    int bootstrap_replicates = 0;  // 0 skips the bootstrap p-value
    std::uint64_t seed = 0;
    double sparse_threshold = 5.0;
    int bias_replicates = 400;
    int jobs = 1;
    int max_exact_nodes = 500;
};

/**
 * Full model-selection report for one graph. p_value_normal is one-sided
 * (large statistics reject the null) against a normal with the numeric null
 * mean and the chosen variance. Both the dense and numeric means are
 * reported so sparse inflation is visible. The variance, bootstrap, and bias
 * stages draw from sub-seeds derived from options.seed, so they never share
 * streams.
 */
struct LlrReport {
    double lambda_hat = 0.0;
    double null_mean_dense = 0.0;
    double null_mean_numeric = 0.0;
    std::string variance_method;
    double null_variance = 0.0;
    double p_value_normal = 1.0;
    std::optional<double> p_value_bootstrap;
    SparsityReport sparsity;
};

LlrReport llr_report(const LabeledDigraph& g, const LlrOptions& options = {});

}  // namespace pathmix
