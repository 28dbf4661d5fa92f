#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace pathmix {

using CountMatrix = Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic>;
using CountVector = Eigen::Matrix<std::int64_t, Eigen::Dynamic, 1>;

/** One row of an edge listing, as ingested (node ids are opaque strings). */
struct EdgeRecord {
    std::string source;
    std::string target;
    std::int64_t count = 1;
};

/** One row of a group listing. */
struct NodeGroupRecord {
    std::string node;
    std::string group;
};

/** Aggregated directed edge between dense node indices; count >= 1. */
struct Edge {
    std::int32_t src;
    std::int32_t dst;
    std::int64_t count;
};

/**
 * Directed multigraph with a group label per node. Immutable after
 * construction; safe to share across threads.
 *
 * Node and group indices are dense and assigned in first-appearance order of
 * the group listing, so the index spaces are stable for the object's lifetime.
 * Self-loops are counted once (directed convention): A_ii = c contributes c to
 * the node's out-degree and c to its in-degree.
 */
class LabeledDigraph {
public:
    /** Builds from string-keyed records. Every edge endpoint must appear in
     *  `groups`; repeated (source, target) rows have their counts summed;
     *  nodes without edges are retained with degree zero. */
    static LabeledDigraph build(const std::vector<EdgeRecord>& edges,
                                const std::vector<NodeGroupRecord>& groups);

    /** Trusted-index path used by samplers and generators. `edges` may contain
     *  duplicate (src, dst) pairs; they are merged. */
    static LabeledDigraph from_indexed(std::vector<Edge> edges,
                                       Eigen::VectorXi group_of,
                                       std::vector<std::string> node_ids,
                                       std::vector<std::string> group_ids);

    Eigen::Index n_nodes() const { return group_of_.size(); }
    Eigen::Index n_groups() const { return static_cast<Eigen::Index>(group_ids_.size()); }

    int group_of(Eigen::Index i) const { return group_of_[i]; }
    const Eigen::VectorXi& groups() const { return group_of_; }
    const std::vector<std::string>& node_ids() const { return node_ids_; }
    const std::vector<std::string>& group_ids() const { return group_ids_; }

    /** Sorted by (src, dst); one entry per ordered pair with positive count. */
    const std::vector<Edge>& edges() const { return edges_; }

    /** A_ij; zero when the pair is absent. O(log E). */
    std::int64_t multiplicity(Eigen::Index i, Eigen::Index j) const;

    std::int64_t total_edges() const { return total_edges_; }

private:
    LabeledDigraph() = default;

    std::vector<Edge> edges_;           // canonical COO, sorted, merged
    Eigen::VectorXi group_of_;
    std::vector<std::string> node_ids_;
    std::vector<std::string> group_ids_;
    std::int64_t total_edges_ = 0;
};

/**
 * Degree and edge-count aggregates for one graph. All fields are plain counts;
 * the balance identities (row sums of m equal group out-degrees, per-node
 * group degrees sum to node degrees, per-node group degrees sum over a group
 * to m) hold exactly.
 */
struct GroupStats {
    CountMatrix m;                    // m(r, s): edges from group r to group s
    CountVector d_out_group;          // d_r^o
    CountVector d_in_group;           // d_r^i
    CountVector d_out_node;           // d_i^o
    CountVector d_in_node;            // d_i^i
    CountMatrix d_out_node_group;     // n x G, d_{i,s}^o
    CountMatrix d_in_node_group;      // n x G, d_{i,s}^i
    CountVector self_loops_per_group; // sum of A_ii over i in each group
    CountVector group_size;
};

GroupStats group_stats(const LabeledDigraph& g);

/** Edge CSV: header `source,target[,count]`, missing count means 1, lines
 *  starting with '#' are ignored. Errors name the offending line number. */
std::vector<EdgeRecord> read_edge_csv(const std::string& path);

/** Group CSV: header `node,group`. */
std::vector<NodeGroupRecord> read_group_csv(const std::string& path);

LabeledDigraph load_graph(const std::string& edges_path, const std::string& groups_path);

void write_edge_csv(const LabeledDigraph& g, std::ostream& out);
void write_group_csv(const LabeledDigraph& g, std::ostream& out);

}  // namespace pathmix
