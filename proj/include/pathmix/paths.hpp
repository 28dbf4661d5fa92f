#pragma once

#include <Eigen/Dense>

#include "pathmix/graph.hpp"

namespace pathmix {

/**
 * Group-to-group counts of directed edge-distinct paths of length k.
 *
 * A path of length k is an ordered sequence of k edge instances forming a
 * walk; no single instance may be used twice, but parallel edges are distinct
 * instances, opposite directions between the same pair are distinct, and
 * nodes may repeat. A self-loop of multiplicity c yields c*(c-1) length-2
 * paths at its node.
 */
struct PathCounts {
    int k = 1;
    CountMatrix counts;       // counts(r, s): paths starting in r, ending in s
    std::int64_t total = 0;   // sum of all entries
};

/** Mixing fractions and the assortativity coefficient derived from counts. */
struct MixingSummary {
    Eigen::MatrixXd e;   // e(r, s) = counts(r, s) / total
    Eigen::VectorXd a;   // row sums of e
    Eigen::VectorXd b;   // column sums of e
    double r_coeff = 0;  // (sum_r e_rr - sum_r a_r b_r) / (1 - sum_r a_r b_r)
};

/** Counts paths of length k in {1, 2, 3}. k = 1 reproduces the edge-count
 *  matrix m. Rejects other k. */
PathCounts path_counts(const LabeledDigraph& g, int k);
PathCounts path_counts(const LabeledDigraph& g, const GroupStats& st, int k);

/** Throws NumericalError "no paths" when total is zero and "degenerate
 *  mixing" when sum_r a_r b_r = 1 (e.g. a single group). */
MixingSummary assortativity(const PathCounts& pc);

/** Real-valued variant for model-expected count matrices. */
MixingSummary assortativity_from_mixing(const Eigen::MatrixXd& counts);

}  // namespace pathmix
