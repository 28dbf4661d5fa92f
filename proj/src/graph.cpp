#include "pathmix/graph.hpp"

#include <algorithm>
#include <fstream>
#include <ostream>
#include <sstream>
#include <unordered_map>

#include "pathmix/errors.hpp"

namespace pathmix {

LabeledDigraph LabeledDigraph::build(const std::vector<EdgeRecord>& edges,
                                     const std::vector<NodeGroupRecord>& groups) {
    LabeledDigraph g;
    std::unordered_map<std::string, std::int32_t> node_index;
    std::unordered_map<std::string, std::int32_t> group_index;
    std::vector<int> node_group;

    for (const auto& rec : groups) {
        auto git = group_index.find(rec.group);
        std::int32_t gidx;
        if (git == group_index.end()) {
            gidx = static_cast<std::int32_t>(g.group_ids_.size());
            group_index.emplace(rec.group, gidx);
            g.group_ids_.push_back(rec.group);
        } else {
            gidx = git->second;
        }
        auto nit = node_index.find(rec.node);
        if (nit == node_index.end()) {
            node_index.emplace(rec.node, static_cast<std::int32_t>(g.node_ids_.size()));
            g.node_ids_.push_back(rec.node);
            node_group.push_back(gidx);
        } else if (node_group[nit->second] != gidx) {
            throw DataError("node '" + rec.node + "' listed with two different groups");
        }
    }

    g.group_of_.resize(static_cast<Eigen::Index>(node_group.size()));
    for (std::size_t i = 0; i < node_group.size(); ++i)
        g.group_of_[static_cast<Eigen::Index>(i)] = node_group[i];

    std::vector<Edge> raw;
    raw.reserve(edges.size());
    for (const auto& rec : edges) {
        auto sit = node_index.find(rec.source);
        if (sit == node_index.end()) throw DataError("unknown node '" + rec.source + "'");
        auto tit = node_index.find(rec.target);
        if (tit == node_index.end()) throw DataError("unknown node '" + rec.target + "'");
        if (rec.count <= 0)
            throw DataError("non-positive multiplicity " + std::to_string(rec.count) +
                            " on edge " + rec.source + " -> " + rec.target);
        raw.push_back({sit->second, tit->second, rec.count});
    }

    return from_indexed(std::move(raw), g.group_of_, std::move(g.node_ids_),
                        std::move(g.group_ids_));
}

LabeledDigraph LabeledDigraph::from_indexed(std::vector<Edge> edges,
                                            Eigen::VectorXi group_of,
                                            std::vector<std::string> node_ids,
                                            std::vector<std::string> group_ids) {
    LabeledDigraph g;
    std::sort(edges.begin(), edges.end(), [](const Edge& a, const Edge& b) {
        return a.src != b.src ? a.src < b.src : a.dst < b.dst;
    });
    // merge duplicates in place
    std::vector<Edge> merged;
    merged.reserve(edges.size());
    for (const auto& e : edges) {
        if (!merged.empty() && merged.back().src == e.src && merged.back().dst == e.dst)
            merged.back().count += e.count;
        else
            merged.push_back(e);
    }
    g.edges_ = std::move(merged);
    g.group_of_ = std::move(group_of);
    g.node_ids_ = std::move(node_ids);
    g.group_ids_ = std::move(group_ids);
    g.total_edges_ = 0;
    for (const auto& e : g.edges_) g.total_edges_ += e.count;
    return g;
}

std::int64_t LabeledDigraph::multiplicity(Eigen::Index i, Eigen::Index j) const {
    Edge key{static_cast<std::int32_t>(i), static_cast<std::int32_t>(j), 0};
    auto it = std::lower_bound(edges_.begin(), edges_.end(), key,
                               [](const Edge& a, const Edge& b) {
                                   return a.src != b.src ? a.src < b.src : a.dst < b.dst;
                               });
    if (it != edges_.end() && it->src == key.src && it->dst == key.dst) return it->count;
    return 0;
}

GroupStats group_stats(const LabeledDigraph& g) {
    const Eigen::Index n = g.n_nodes();
    const Eigen::Index G = g.n_groups();
    GroupStats st;
    st.m = CountMatrix::Zero(G, G);
    st.d_out_node = CountVector::Zero(n);
    st.d_in_node = CountVector::Zero(n);
    st.d_out_node_group = CountMatrix::Zero(n, G);
    st.d_in_node_group = CountMatrix::Zero(n, G);
    st.self_loops_per_group = CountVector::Zero(G);
    st.group_size = CountVector::Zero(G);

    for (Eigen::Index i = 0; i < n; ++i) st.group_size[g.group_of(i)] += 1;

    for (const Edge& e : g.edges()) {
        const int gs = g.group_of(e.src);
        const int gt = g.group_of(e.dst);
        st.m(gs, gt) += e.count;
        st.d_out_node[e.src] += e.count;
        st.d_in_node[e.dst] += e.count;
        st.d_out_node_group(e.src, gt) += e.count;
        st.d_in_node_group(e.dst, gs) += e.count;
        if (e.src == e.dst) st.self_loops_per_group[gs] += e.count;
    }

    st.d_out_group = st.m.rowwise().sum();
    st.d_in_group = st.m.colwise().sum().transpose();
    return st;
}

namespace {

// Splits a line on commas. No quoting: node ids here are opaque tokens that
// may not contain commas.
std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            out.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(ch);
        }
    }
    out.push_back(cur);
    return out;
}

std::string strip(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

bool is_skippable(const std::string& line) {
    std::string t = strip(line);
    return t.empty() || t[0] == '#';
}

std::int64_t parse_count(const std::string& tok, const std::string& path, std::size_t lineno) {
    try {
        std::size_t used = 0;
        long long v = std::stoll(tok, &used);
        if (used != tok.size()) throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception&) {
        throw DataError(path + ":" + std::to_string(lineno) + ": bad count '" + tok + "'");
    }
}

}  // namespace

std::vector<EdgeRecord> read_edge_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open edge file '" + path + "'");
    std::vector<EdgeRecord> out;
    std::string line;
    std::size_t lineno = 0;
    bool header_seen = false;
    while (std::getline(in, line)) {
        ++lineno;
        if (is_skippable(line)) continue;
        auto cells = split_csv(strip(line));
        if (!header_seen) {
            header_seen = true;
            if (cells.size() < 2 || strip(cells[0]) != "source" || strip(cells[1]) != "target")
                throw DataError(path + ":" + std::to_string(lineno) +
                                ": expected header 'source,target[,count]'");
            continue;
        }
        if (cells.size() != 2 && cells.size() != 3)
            throw DataError(path + ":" + std::to_string(lineno) + ": expected 2 or 3 fields, got " +
                            std::to_string(cells.size()));
        EdgeRecord rec;
        rec.source = strip(cells[0]);
        rec.target = strip(cells[1]);
        rec.count = cells.size() == 3 ? parse_count(strip(cells[2]), path, lineno) : 1;
        if (rec.source.empty() || rec.target.empty())
            throw DataError(path + ":" + std::to_string(lineno) + ": empty node id");
        out.push_back(std::move(rec));
    }
    if (!header_seen) throw DataError(path + ": missing header 'source,target[,count]'");
    return out;
}

std::vector<NodeGroupRecord> read_group_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open group file '" + path + "'");
    std::vector<NodeGroupRecord> out;
    std::string line;
    std::size_t lineno = 0;
    bool header_seen = false;
    while (std::getline(in, line)) {
        ++lineno;
        if (is_skippable(line)) continue;
        auto cells = split_csv(strip(line));
        if (!header_seen) {
            header_seen = true;
            if (cells.size() != 2 || strip(cells[0]) != "node" || strip(cells[1]) != "group")
                throw DataError(path + ":" + std::to_string(lineno) + ": expected header 'node,group'");
            continue;
        }
        if (cells.size() != 2)
            throw DataError(path + ":" + std::to_string(lineno) + ": expected 2 fields, got " +
                            std::to_string(cells.size()));
        NodeGroupRecord rec{strip(cells[0]), strip(cells[1])};
        if (rec.node.empty() || rec.group.empty())
            throw DataError(path + ":" + std::to_string(lineno) + ": empty field");
        out.push_back(std::move(rec));
    }
    if (!header_seen) throw DataError(path + ": missing header 'node,group'");
    return out;
}

LabeledDigraph load_graph(const std::string& edges_path, const std::string& groups_path) {
    return LabeledDigraph::build(read_edge_csv(edges_path), read_group_csv(groups_path));
}

void write_edge_csv(const LabeledDigraph& g, std::ostream& out) {
    out << "source,target,count\n";
    for (const Edge& e : g.edges())
        out << g.node_ids()[e.src] << ',' << g.node_ids()[e.dst] << ',' << e.count << '\n';
}

void write_group_csv(const LabeledDigraph& g, std::ostream& out) {
    out << "node,group\n";
    for (Eigen::Index i = 0; i < g.n_nodes(); ++i)
        out << g.node_ids()[i] << ',' << g.group_ids()[g.group_of(i)] << '\n';
}

}  // namespace pathmix
