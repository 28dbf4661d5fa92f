#include "pathmix/paths.hpp"

#include <stdexcept>

#include "pathmix/errors.hpp"

namespace pathmix {

namespace {

// P^(2)_rs = sum_j d_{j,r}^i d_{j,s}^o - [r = s] * (self-loops in r).
// The subtraction removes the pairs that reuse one self-loop instance as both
// steps; a loop only links its own group to itself.
CountMatrix length2_counts(const LabeledDigraph& g, const GroupStats& st) {
    const Eigen::Index G = g.n_groups();
    CountMatrix P = st.d_in_node_group.transpose() * st.d_out_node_group;
    for (const Edge& e : g.edges())
        if (e.src == e.dst) P(g.group_of(e.src), g.group_of(e.src)) -= e.count;
    (void)G;
    return P;
}

// Length-3 inclusion-exclusion over the three ways an instance can repeat in
// (e1, e2, e3): e1=e2 and e2=e3 need a self-loop; e1=e3 is the i->j->i->j
// pattern; triples with all three equal (a self-loop used thrice) are
// restored twice.
CountMatrix length3_counts(const LabeledDigraph& g, const GroupStats& st) {
    const Eigen::Index G = g.n_groups();
    CountMatrix P = CountMatrix::Zero(G, G);

    // walks counted with multiplicity: middle edge (j -> k), any in-edge of j,
    // any out-edge of k
    for (const Edge& e : g.edges()) {
        for (Eigen::Index r = 0; r < G; ++r) {
            const std::int64_t din = st.d_in_node_group(e.src, r);
            if (din == 0) continue;
            for (Eigen::Index s = 0; s < G; ++s)
                P(r, s) += e.count * din * st.d_out_node_group(e.dst, s);
        }
    }

    for (const Edge& e : g.edges()) {
        if (e.src == e.dst) {
            const int gj = g.group_of(e.src);
            // e1 = e2: loop enters as the first two steps
            for (Eigen::Index s = 0; s < G; ++s)
                P(gj, s) -= e.count * st.d_out_node_group(e.src, s);
            // e2 = e3: loop leaves as the last two steps
            for (Eigen::Index r = 0; r < G; ++r)
                P(r, gj) -= e.count * st.d_in_node_group(e.src, r);
            // all three equal, subtracted three times above via e1=e3 too
            P(gj, gj) += 2 * e.count;
        }
        // e1 = e3: i -> j -> i -> j, shared instance of (i -> j)
        const std::int64_t back = g.multiplicity(e.dst, e.src);
        if (back > 0) P(g.group_of(e.src), g.group_of(e.dst)) -= e.count * back;
    }
    return P;
}

}  // namespace

PathCounts path_counts(const LabeledDigraph& g, const GroupStats& st, int k) {
    PathCounts pc;
    pc.k = k;
    switch (k) {
        case 1: pc.counts = st.m; break;
        case 2: pc.counts = length2_counts(g, st); break;
        case 3: pc.counts = length3_counts(g, st); break;
        default:
            throw std::invalid_argument("path length k must be 1, 2, or 3; got " +
                                        std::to_string(k));
    }
    pc.total = pc.counts.sum();
    return pc;
}

PathCounts path_counts(const LabeledDigraph& g, int k) {
    return path_counts(g, group_stats(g), k);
}

namespace {

MixingSummary mixing_from(const Eigen::MatrixXd& counts, double total) {
    if (total <= 0.0) throw NumericalError("no paths: path count total is zero");
    MixingSummary mx;
    mx.e = counts / total;
    mx.a = mx.e.rowwise().sum();
    mx.b = mx.e.colwise().sum().transpose();
    const double ab = mx.a.dot(mx.b);
    if (std::abs(1.0 - ab) < 1e-15)
        throw NumericalError("degenerate mixing: sum_r a_r b_r = 1");
    mx.r_coeff = (mx.e.trace() - ab) / (1.0 - ab);
    return mx;
}

}  // namespace

MixingSummary assortativity(const PathCounts& pc) {
    return mixing_from(pc.counts.cast<double>(), static_cast<double>(pc.total));
}

MixingSummary assortativity_from_mixing(const Eigen::MatrixXd& counts) {
    return mixing_from(counts, counts.sum());
}

}  // namespace pathmix
