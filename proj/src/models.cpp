#include "pathmix/models.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "pathmix/errors.hpp"

namespace pathmix {

const char* to_string(ModelKind kind) {
    switch (kind) {
        case ModelKind::DCSBM: return "dcsbm";
        case ModelKind::MixedGroup: return "mixed-group";
        case ModelKind::MixedNode: return "mixed-node";
    }
    return "unknown";
}

ModelKind model_kind_from_string(const std::string& name) {
    if (name == "dcsbm") return ModelKind::DCSBM;
    if (name == "mixed-group") return ModelKind::MixedGroup;
    if (name == "mixed-node") return ModelKind::MixedNode;
    throw DataError("unknown model kind '" + name + "' (use dcsbm, mixed-group, mixed-node)");
}

double FittedModel::mu(Eigen::Index i, Eigen::Index j) const {
    const int r = group_of[i];
    const int s = group_of[j];
    if (kind == ModelKind::DCSBM) return theta_out(i, 0) * theta_in(j, 0) * omega(r, s);
    return theta_out(i, s) * theta_in(j, r) * omega(r, s);
}

void check_same_space(const FittedModel& m, const LabeledDigraph& g) {
    if (m.n_nodes() != g.n_nodes() || m.n_groups() != g.n_groups() ||
        (m.group_of.array() != g.groups().array()).any())
        throw DataError("model and graph node/group spaces do not match");
}

namespace {

void require_nonempty(const LabeledDigraph& g) {
    if (g.n_nodes() == 0) throw DataError("cannot fit an empty graph");
}

void carry_labels(FittedModel& m, const LabeledDigraph& g) {
    m.group_of = g.groups();
    m.node_ids = g.node_ids();
    m.group_ids = g.group_ids();
}

// Representable value of d / m whose product with m rounds back to d, so the
// fitted mean degree theta * omega reproduces the observed count to the last
// bit. fl(d / m) itself misses by one ulp for a few percent of integer pairs;
// fl(x * m) is monotone in x, so a short directional search finds the exact
// preimage when one exists (it always does for the magnitudes seen here).
double exact_ratio(std::int64_t d_count, std::int64_t m_count) {
    const double d = static_cast<double>(d_count);
    const double m = static_cast<double>(m_count);
    const double t0 = d / m;
    double t = t0;
    for (int step = 0; step < 4; ++step) {
        const double p = t * m;
        if (p == d) return t;
        t = std::nextafter(t, p < d ? std::numeric_limits<double>::infinity()
                                    : -std::numeric_limits<double>::infinity());
    }
    return t0;
}

}  // namespace

FittedModel fit_dcsbm(const LabeledDigraph& g) {
    require_nonempty(g);
    const GroupStats st = group_stats(g);
    const Eigen::Index n = g.n_nodes();

    FittedModel m;
    m.kind = ModelKind::DCSBM;
    carry_labels(m, g);
    m.omega = st.m.cast<double>();
    m.theta_out.resize(n, 1);
    m.theta_in.resize(n, 1);
    for (Eigen::Index i = 0; i < n; ++i) {
        const int r = g.group_of(i);
        m.theta_out(i, 0) = st.d_out_group[r] > 0
                                ? static_cast<double>(st.d_out_node[i]) / st.d_out_group[r]
                                : 1.0 / st.group_size[r];
        m.theta_in(i, 0) = st.d_in_group[r] > 0
                               ? static_cast<double>(st.d_in_node[i]) / st.d_in_group[r]
                               : 1.0 / st.group_size[r];
    }
    return m;
}

FittedModel fit_mixed_group(const LabeledDigraph& g) {
    require_nonempty(g);
    const GroupStats st = group_stats(g);
    const Eigen::Index n = g.n_nodes();
    const Eigen::Index G = g.n_groups();

    FittedModel m;
    m.kind = ModelKind::MixedGroup;
    carry_labels(m, g);
    m.omega = st.m.cast<double>();
    m.theta_out.resize(n, G);
    m.theta_in.resize(n, G);
    for (Eigen::Index i = 0; i < n; ++i) {
        const int r = g.group_of(i);
        for (Eigen::Index s = 0; s < G; ++s) {
            m.theta_out(i, s) = st.m(r, s) > 0
                                    ? exact_ratio(st.d_out_node_group(i, s), st.m(r, s))
                                    : 1.0 / st.group_size[r];
            m.theta_in(i, s) = st.m(s, r) > 0
                                   ? exact_ratio(st.d_in_node_group(i, s), st.m(s, r))
                                   : 1.0 / st.group_size[r];
        }
    }
    return m;
}

namespace {

// max over t of sum_s d_s ln t_s - C_s t_s  subject to  sum_s t_s = 1, t >= 0.
// Interior solution t_s = d_s / (C_s + nu) on the support {d_s > 0}; nu is the
// unique root of sum_s d_s/(C_s + nu) = 1, found by guarded Newton in
// u = nu + min(C). Zero-degree entries take t = 0 (optimal when C > 0, and
// harmless when C = 0 since the objective ignores them).
Eigen::VectorXd solve_theta_row(const Eigen::VectorXd& d, const Eigen::VectorXd& C) {
    const Eigen::Index G = d.size();
    const double sum_d = d.sum();
    if (sum_d <= 0.0) return Eigen::VectorXd::Constant(G, 1.0 / static_cast<double>(G));

    double c_min = std::numeric_limits<double>::infinity();
    for (Eigen::Index s = 0; s < G; ++s)
        if (d[s] > 0.0) c_min = std::min(c_min, C[s]);

    // h(u) = sum_{support} d_s / ((C_s - c_min) + u) - 1, strictly decreasing on u > 0
    auto h_and_slope = [&](double u, double& slope) {
        double h = -1.0;
        slope = 0.0;
        for (Eigen::Index s = 0; s < G; ++s) {
            if (d[s] <= 0.0) continue;
            const double denom = (C[s] - c_min) + u;
            h += d[s] / denom;
            slope -= d[s] / (denom * denom);
        }
        return h;
    };

    double slope;
    double hi = sum_d;                 // h(sum_d) <= 0 because every denominator >= u
    double lo = hi, prev = hi;
    while (h_and_slope(lo, slope) <= 0.0 && lo > 1e-300) {
        prev = lo;
        lo *= 0.5;
    }
    double a = lo, b = prev;           // h(a) > 0 >= h(b)
    double u = 0.5 * (a + b);
    for (int it = 0; it < 128; ++it) {
        const double h = h_and_slope(u, slope);
        if (h > 0.0) a = u; else b = u;
        double next = slope != 0.0 ? u - h / slope : 0.5 * (a + b);
        if (!(next > a && next < b)) next = 0.5 * (a + b);
        if (std::abs(next - u) <= 1e-16 * std::max(1.0, u)) { u = next; break; }
        u = next;
    }

    Eigen::VectorXd t = Eigen::VectorXd::Zero(G);
    double total = 0.0;
    for (Eigen::Index s = 0; s < G; ++s) {
        if (d[s] <= 0.0) continue;
        t[s] = d[s] / ((C[s] - c_min) + u);
        total += t[s];
    }
    t /= total;  // pin the constraint exactly
    return t;
}

// SO(r, s) = sum_{i in r} theta_out(i, s); TI(s, r) = sum_{j in s} theta_in(j, r)
Eigen::MatrixXd group_mass(const Eigen::MatrixXd& theta, const Eigen::VectorXi& group_of,
                           Eigen::Index G) {
    Eigen::MatrixXd mass = Eigen::MatrixXd::Zero(G, theta.cols());
    for (Eigen::Index i = 0; i < theta.rows(); ++i) mass.row(group_of[i]) += theta.row(i);
    return mass;
}

}  // namespace

FittedModel fit_mixed_node(const LabeledDigraph& g, const SolverConfig& cfg) {
    require_nonempty(g);
    const GroupStats st = group_stats(g);
    const Eigen::Index n = g.n_nodes();
    const Eigen::Index G = g.n_groups();

    const Eigen::MatrixXd digo = st.d_out_node_group.cast<double>();
    const Eigen::MatrixXd digi = st.d_in_node_group.cast<double>();

    FittedModel m;
    m.kind = ModelKind::MixedNode;
    carry_labels(m, g);
    m.init_rule = "per-node degree fractions d_{i,s}/d_i; uniform rows for zero-degree nodes";
    m.theta_out.resize(n, G);
    m.theta_in.resize(n, G);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double d_o = digo.row(i).sum();
        const double d_i = digi.row(i).sum();
        if (d_o > 0)
            m.theta_out.row(i) = digo.row(i) / d_o;
        else
            m.theta_out.row(i).setConstant(1.0 / static_cast<double>(G));
        if (d_i > 0)
            m.theta_in.row(i) = digi.row(i) / d_i;
        else
            m.theta_in.row(i).setConstant(1.0 / static_cast<double>(G));
    }
    m.omega = Eigen::MatrixXd::Zero(G, G);

    // Converged means both the last sweep's max parameter update and the
    // stationarity spread are within tolerance; small updates alone can hide a
    // slow crawl along a degenerate direction (the node-constraint likelihood
    // can approach its supremum only as a propensity column collapses to zero
    // with omega growing without bound, in which case no MLE exists and the
    // iteration must be reported as non-convergent).
    double delta = std::numeric_limits<double>::infinity();
    double res = std::numeric_limits<double>::infinity();
    bool converged = false;
    int it = 0;
    for (; it < cfg.max_iterations && !converged; ++it) {
        delta = 0.0;

        Eigen::MatrixXd SO = group_mass(m.theta_out, m.group_of, G);
        Eigen::MatrixXd TI = group_mass(m.theta_in, m.group_of, G);
        for (Eigen::Index r = 0; r < G; ++r) {
            for (Eigen::Index s = 0; s < G; ++s) {
                const double denom = SO(r, s) * TI(s, r);
                const double next = (st.m(r, s) > 0 && denom > 0.0) ? st.m(r, s) / denom : 0.0;
                delta = std::max(delta, std::abs(next - m.omega(r, s)) / (1.0 + std::abs(next)));
                m.omega(r, s) = next;
            }
        }

        // out rows: C_s = omega(r, s) * TI(s, r), fixed during this sweep
        for (Eigen::Index i = 0; i < n; ++i) {
            const int r = m.group_of[i];
            Eigen::VectorXd C(G);
            for (Eigen::Index s = 0; s < G; ++s) C[s] = m.omega(r, s) * TI(s, r);
            Eigen::VectorXd t = solve_theta_row(digo.row(i).transpose(), C);
            delta = std::max(delta, (t.transpose() - m.theta_out.row(i)).cwiseAbs().maxCoeff());
            m.theta_out.row(i) = t.transpose();
        }

        // in rows see the refreshed out masses
        SO = group_mass(m.theta_out, m.group_of, G);
        for (Eigen::Index j = 0; j < n; ++j) {
            const int s = m.group_of[j];
            Eigen::VectorXd C(G);
            for (Eigen::Index r = 0; r < G; ++r) C[r] = m.omega(r, s) * SO(r, s);
            Eigen::VectorXd t = solve_theta_row(digi.row(j).transpose(), C);
            delta = std::max(delta, (t.transpose() - m.theta_in.row(j)).cwiseAbs().maxCoeff());
            m.theta_in.row(j) = t.transpose();
        }

        if (delta <= cfg.tolerance) {
            res = stationarity_residual(m, g);
            converged = res <= cfg.tolerance;
        }
    }

    m.iterations = it;
    m.residual = converged ? res : stationarity_residual(m, g);
    if (!converged)
        throw NumericalError("node-constraint solver did not converge in " +
                                 std::to_string(cfg.max_iterations) +
                                 " iterations (last update " + std::to_string(delta) +
                                 ", stationarity residual " + std::to_string(m.residual) + ")",
                             m.residual);
    return m;
}

double log_likelihood(const FittedModel& m, const LabeledDigraph& g) {
    check_same_space(m, g);
    const Eigen::Index G = m.n_groups();

    // sum of mu over all ordered pairs, blockwise
    const Eigen::MatrixXd SO = group_mass(m.theta_out, m.group_of, G);
    const Eigen::MatrixXd TI = group_mass(m.theta_in, m.group_of, G);
    double mu_total = 0.0;
    for (Eigen::Index r = 0; r < G; ++r)
        for (Eigen::Index s = 0; s < G; ++s) {
            const double so = m.kind == ModelKind::DCSBM ? SO(r, 0) : SO(r, s);
            const double ti = m.kind == ModelKind::DCSBM ? TI(s, 0) : TI(s, r);
            mu_total += m.omega(r, s) * so * ti;
        }

    double ll = -mu_total;
    for (const Edge& e : g.edges()) {
        const double mu = m.mu(e.src, e.dst);
        if (mu <= 0.0) return -std::numeric_limits<double>::infinity();
        ll += e.count * std::log(mu) - std::lgamma(static_cast<double>(e.count) + 1.0);
    }
    return ll;
}

double expected_adjacency(const FittedModel& m, Eigen::Index i, Eigen::Index j) {
    if (i < 0 || j < 0 || i >= m.n_nodes() || j >= m.n_nodes())
        throw std::out_of_range("expected_adjacency: node index out of range");
    return m.mu(i, j);
}

Eigen::MatrixXd mean_out_degrees(const FittedModel& m) {
    const Eigen::Index n = m.n_nodes();
    const Eigen::Index G = m.n_groups();
    Eigen::MatrixXd D(n, G);
    const Eigen::MatrixXd TI = m.kind == ModelKind::MixedNode
                                   ? group_mass(m.theta_in, m.group_of, G)
                                   : Eigen::MatrixXd();
    for (Eigen::Index i = 0; i < n; ++i) {
        const int r = m.group_of[i];
        for (Eigen::Index s = 0; s < G; ++s) {
            switch (m.kind) {
                case ModelKind::DCSBM: D(i, s) = m.theta_out(i, 0) * m.omega(r, s); break;
                case ModelKind::MixedGroup: D(i, s) = m.theta_out(i, s) * m.omega(r, s); break;
                case ModelKind::MixedNode:
                    D(i, s) = m.theta_out(i, s) * m.omega(r, s) * TI(s, r);
                    break;
            }
        }
    }
    return D;
}

Eigen::MatrixXd mean_in_degrees(const FittedModel& m) {
    const Eigen::Index n = m.n_nodes();
    const Eigen::Index G = m.n_groups();
    Eigen::MatrixXd D(n, G);
    const Eigen::MatrixXd SO = m.kind == ModelKind::MixedNode
                                   ? group_mass(m.theta_out, m.group_of, G)
                                   : Eigen::MatrixXd();
    for (Eigen::Index j = 0; j < n; ++j) {
        const int s = m.group_of[j];
        for (Eigen::Index r = 0; r < G; ++r) {
            switch (m.kind) {
                case ModelKind::DCSBM: D(j, r) = m.theta_in(j, 0) * m.omega(r, s); break;
                case ModelKind::MixedGroup: D(j, r) = m.theta_in(j, r) * m.omega(r, s); break;
                case ModelKind::MixedNode:
                    D(j, r) = m.theta_in(j, r) * m.omega(r, s) * SO(r, s);
                    break;
            }
        }
    }
    return D;
}

ExpectedPathCounts expected_path_counts(const FittedModel& m, int k) {
    if (k != 1 && k != 2)
        throw std::invalid_argument("expected path counts support k in {1, 2}; got " +
                                    std::to_string(k));
    const Eigen::Index n = m.n_nodes();
    const Eigen::Index G = m.n_groups();
    ExpectedPathCounts out;
    out.k = k;
    out.diag_self_loop_bias = Eigen::VectorXd::Zero(G);
    for (Eigen::Index i = 0; i < n; ++i)
        out.diag_self_loop_bias[m.group_of[i]] += m.mu(i, i);

    if (k == 1) {
        const Eigen::MatrixXd SO = group_mass(m.theta_out, m.group_of, G);
        const Eigen::MatrixXd TI = group_mass(m.theta_in, m.group_of, G);
        out.counts.resize(G, G);
        for (Eigen::Index r = 0; r < G; ++r)
            for (Eigen::Index s = 0; s < G; ++s) {
                const double so = m.kind == ModelKind::DCSBM ? SO(r, 0) : SO(r, s);
                const double ti = m.kind == ModelKind::DCSBM ? TI(s, 0) : TI(s, r);
                out.counts(r, s) = m.omega(r, s) * so * ti;
            }
        out.diag_self_loop_bias.setZero();  // no reuse correction at k = 1
        return out;
    }

    const Eigen::MatrixXd Dout = mean_out_degrees(m);
    const Eigen::MatrixXd Din = mean_in_degrees(m);
    out.counts = Din.transpose() * Dout;
    return out;
}

ExpectedPathCounts expected_path_counts(const FittedModel& m, const LabeledDigraph& g, int k) {
    check_same_space(m, g);
    ExpectedPathCounts out = expected_path_counts(m, k);
    if (k == 2) {
        const GroupStats st = group_stats(g);
        out.diag_self_loop_bias = st.self_loops_per_group.cast<double>();
    }
    return out;
}

double stationarity_residual(const FittedModel& m, const LabeledDigraph& g) {
    if (m.kind != ModelKind::MixedNode)
        throw std::invalid_argument("stationarity residual is defined for the node-constraint model");
    check_same_space(m, g);
    const GroupStats st = group_stats(g);
    const Eigen::Index n = m.n_nodes();
    const Eigen::Index G = m.n_groups();
    const Eigen::MatrixXd SO = group_mass(m.theta_out, m.group_of, G);
    const Eigen::MatrixXd TI = group_mass(m.theta_in, m.group_of, G);

    double res = 0.0;
    auto spread = [&](auto term, Eigen::Index count) {
        double tmin = std::numeric_limits<double>::infinity();
        double tmax = -tmin;
        int seen = 0;
        for (Eigen::Index gidx = 0; gidx < count; ++gidx) {
            double v;
            if (!term(gidx, v)) continue;
            tmin = std::min(tmin, v);
            tmax = std::max(tmax, v);
            ++seen;
        }
        if (seen > 1) res = std::max(res, tmax - tmin);
    };

    for (Eigen::Index i = 0; i < n; ++i) {
        const int r = m.group_of[i];
        spread(
            [&](Eigen::Index s, double& v) {
                if (st.d_out_node_group(i, s) == 0) return false;
                v = m.omega(r, s) * TI(s, r) -
                    st.d_out_node_group(i, s) / m.theta_out(i, s);
                return true;
            },
            G);
        spread(
            [&](Eigen::Index s, double& v) {
                if (st.d_in_node_group(i, s) == 0) return false;
                v = m.omega(s, r) * SO(s, r) -
                    st.d_in_node_group(i, s) / m.theta_in(i, s);
                return true;
            },
            G);
    }
    return res;
}

}  // namespace pathmix
