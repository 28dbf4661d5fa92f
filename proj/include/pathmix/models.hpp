#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "pathmix/graph.hpp"

namespace pathmix {

enum class ModelKind { DCSBM, MixedGroup, MixedNode };

const char* to_string(ModelKind kind);
ModelKind model_kind_from_string(const std::string& name);

struct SolverConfig {
    int max_iterations = 20000;
    double tolerance = 1e-10;  // bound on both the per-sweep update max-norm
                               // and the stationarity residual at the solution
};

/**
 * Fitted parameter set. theta_out/theta_in are n x 1 for DCSBM (one scalar
 * propensity per node) and n x G for the mixed kinds (one per node-group
 * pair). omega is G x G in units of expected edge counts.
 *
 * Normalizations: DCSBM theta sums to 1 within each group; MixedGroup each
 * column sums to 1 within each group; MixedNode each row sums to 1.
 */
struct FittedModel {
    ModelKind kind = ModelKind::DCSBM;
    Eigen::MatrixXd theta_out;
    Eigen::MatrixXd theta_in;
    Eigen::MatrixXd omega;
    Eigen::VectorXi group_of;
    std::vector<std::string> node_ids;
    std::vector<std::string> group_ids;

    // MixedNode solver bookkeeping; zero/empty for closed-form kinds.
    int iterations = 0;
    double residual = 0.0;
    std::string init_rule;

    Eigen::Index n_nodes() const { return group_of.size(); }
    Eigen::Index n_groups() const { return omega.rows(); }

    /** Model mean for the ordered pair (i, j), self-pairs included. */
    double mu(Eigen::Index i, Eigen::Index j) const;
};

/** theta_i^o = d_i^o / d_{g_i}^o, omega = m. Zero-degree groups fall back to
 *  uniform theta (the matching omega row/column is zero, so expected counts
 *  stay zero). */
FittedModel fit_dcsbm(const LabeledDigraph& g);

/** theta_{i,s}^o = d_{i,s}^o / m_{g_i s}, theta_{i,s}^i = d_{i,s}^i / m_{s g_i},
 *  omega = m. Blocks with m = 0 get uniform theta. */
FittedModel fit_mixed_group(const LabeledDigraph& g);

/**
 * Node-constraint MLE by block coordinate ascent: omega from the pair-count
 * identity, then per-node exact constrained row maximizations (out side, then
 * in side). Each block update is an exact maximizer, so the likelihood is
 * nondecreasing. Converges when the max-norm of parameter updates drops below
 * cfg.tolerance; otherwise throws NumericalError carrying the last residual.
 *
 * Zero-degree nodes get uniform rows (the likelihood is flat there) and are
 * excluded from the stationarity residual. Uniqueness of this MLE is not
 * established; `iterations`, `residual`, and `init_rule` are reported so runs
 * can be compared.
 */
FittedModel fit_mixed_node(const LabeledDigraph& g, const SolverConfig& cfg = {});

/** Poisson log-likelihood sum over all ordered pairs including i = j, with
 *  0 log 0 = 0. Pairs with mu = 0 and A > 0 give -inf. */
double log_likelihood(const FittedModel& m, const LabeledDigraph& g);

double expected_adjacency(const FittedModel& m, Eigen::Index i, Eigen::Index j);

/** E[d_{i,s}^o] per (node, group), n x G; same for the in side. For MLE fits
 *  of the source graph these reproduce the observed per-(node, group)
 *  degrees exactly (MixedGroup) or the row-sum equivalents (DCSBM). */
Eigen::MatrixXd mean_out_degrees(const FittedModel& m);
Eigen::MatrixXd mean_in_degrees(const FittedModel& m);

/**
 * Model-expected path counts for k in {1, 2}.
 *
 * k = 2 entries are sum_j E[d_{j,r}^i] E[d_{j,s}^o]; the self-loop variance
 * and the edge-distinct correction cancel in expectation, so no diagonal
 * adjustment appears here. diag_self_loop_bias records, per group, how much
 * the diagonal expectation exceeds the expected edge-distinct count (the
 * model's expected self-loop mass); the overload taking the source graph
 * reports the observed self-loop counts instead, which is the exact
 * discrepancy against observed edge-distinct counts for MLE fits.
 */
struct ExpectedPathCounts {
    int k = 1;
    Eigen::MatrixXd counts;
    Eigen::VectorXd diag_self_loop_bias;
};

ExpectedPathCounts expected_path_counts(const FittedModel& m, int k);
ExpectedPathCounts expected_path_counts(const FittedModel& m, const LabeledDigraph& g, int k);

/**
 * Max over nodes of the spread of the node-constraint stationarity terms
 * d_{i,g}/theta_{i,g} - omega * (opposite-side group mass), over groups with
 * positive degree, both sides. Zero-degree nodes are skipped. At an interior
 * stationary point every node's terms are constant, so the spread vanishes.
 */
double stationarity_residual(const FittedModel& m, const LabeledDigraph& g);

/** Throws DataError unless the model and graph agree on node count and group
 *  labels. */
void check_same_space(const FittedModel& m, const LabeledDigraph& g);

}  // namespace pathmix
