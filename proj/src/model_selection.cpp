#include "pathmix/model_selection.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "pathmix/errors.hpp"
#include "pathmix/moments.hpp"
#include "pathmix/parallel.hpp"
#include "pathmix/rng.hpp"

namespace pathmix {

namespace {

void require_dcsbm(const FittedModel& m, const char* op) {
    if (m.kind != ModelKind::DCSBM)
        throw std::invalid_argument(std::string(op) + " requires a dcsbm model, got " +
                                    to_string(m.kind));
}

std::vector<std::vector<Eigen::Index>> group_members(const Eigen::VectorXi& group_of,
                                                     Eigen::Index G) {
    std::vector<std::vector<Eigen::Index>> members(static_cast<std::size_t>(G));
    for (Eigen::Index i = 0; i < group_of.size(); ++i)
        members[static_cast<std::size_t>(group_of[i])].push_back(i);
    return members;
}

void mean_sd(const std::vector<double>& v, double& mean, double& sd) {
    const double n = static_cast<double>(v.size());
    mean = 0.0;
    for (const double x : v) mean += x;
    mean /= n;
    double ss = 0.0;
    for (const double x : v) ss += (x - mean) * (x - mean);
    sd = v.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
}

}  // namespace

const char* to_string(VarianceMethod method) {
    switch (method) {
        case VarianceMethod::ExactNumeric: return "exact_numeric";
        case VarianceMethod::Taylor: return "taylor";
        case VarianceMethod::MonteCarlo: return "monte_carlo";
    }
    return "unknown";
}

VarianceMethod variance_method_from_string(const std::string& name) {
    if (name == "exact_numeric") return VarianceMethod::ExactNumeric;
    if (name == "taylor") return VarianceMethod::Taylor;
    if (name == "monte_carlo") return VarianceMethod::MonteCarlo;
    throw DataError("unknown variance method '" + name +
                    "' (use exact_numeric, taylor, monte_carlo)");
}

double llr_from_aggregates(const CountMatrix& d_out_node_group,
                           const CountMatrix& d_in_node_group, const CountMatrix& m) {
    double acc = 0.0;
    for (Eigen::Index i = 0; i < d_out_node_group.rows(); ++i) {
        std::int64_t row_o = 0, row_i = 0;
        for (Eigen::Index g = 0; g < d_out_node_group.cols(); ++g) {
            acc += xlogx(static_cast<double>(d_out_node_group(i, g)));
            acc += xlogx(static_cast<double>(d_in_node_group(i, g)));
            row_o += d_out_node_group(i, g);
            row_i += d_in_node_group(i, g);
        }
        acc -= xlogx(static_cast<double>(row_o)) + xlogx(static_cast<double>(row_i));
    }
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        for (Eigen::Index s = 0; s < m.cols(); ++s) acc -= 2.0 * xlogx(static_cast<double>(m(r, s)));
        acc += xlogx(static_cast<double>(m.row(r).sum()));
        acc += xlogx(static_cast<double>(m.col(r).sum()));
    }
    return acc;
}

double llr_statistic(const LabeledDigraph& g) {
    if (g.n_nodes() == 0) throw DataError("log-likelihood ratio of an empty graph");
    const GroupStats st = group_stats(g);
    return llr_from_aggregates(st.d_out_node_group, st.d_in_node_group, st.m);
}

LlrNullMean expected_llr_null(const FittedModel& m) {
    require_dcsbm(m, "expected_llr_null");
    const Eigen::Index n = m.n_nodes();
    const Eigen::Index G = m.n_groups();
    const Eigen::VectorXd w_row = m.omega.rowwise().sum();
    const Eigen::VectorXd w_col = m.omega.colwise().sum().transpose();

    LlrNullMean out;
    out.dense = static_cast<double>((G - 1) * (n - G));
    double acc = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        const int r = m.group_of[i];
        const double to = m.theta_out(i, 0);
        const double ti = m.theta_in(i, 0);
        for (Eigen::Index g = 0; g < G; ++g) {
            acc += poisson_xlogx_mean(to * m.omega(r, g));
            acc += poisson_xlogx_mean(ti * m.omega(g, r));
        }
        acc -= poisson_xlogx_mean(to * w_row[r]);
        acc -= poisson_xlogx_mean(ti * w_col[r]);
    }
    for (Eigen::Index r = 0; r < G; ++r) {
        for (Eigen::Index s = 0; s < G; ++s) acc -= 2.0 * poisson_xlogx_mean(m.omega(r, s));
        acc += poisson_xlogx_mean(w_row[r]);
        acc += poisson_xlogx_mean(w_col[r]);
    }
    out.numeric = acc;
    return out;
}

namespace {

// Covariance expansion of the statistic's xlogx terms under the null. The
// five sweeps below mirror the statistic's five kinds of count (per-node
// pair degrees, pair totals, node totals, group totals, and the cross-node
// couplings through shared pair totals). i = j is included in the last
// sweep: a node's out- and in-degrees toward a pair are coupled through that
// pair's total like any two distinct nodes.
double assemble_variance(const FittedModel& model, bool taylor_mode) {
    const Eigen::Index G = model.n_groups();
    const auto members = group_members(model.group_of, G);
    const Eigen::VectorXd w_row = model.omega.rowwise().sum();
    const Eigen::VectorXd w_col = model.omega.colwise().sum().transpose();

    const auto a = [taylor_mode](double mu) {
        return taylor_mode ? xlogx_var_taylor(mu) : xlogx_var(mu);
    };
    const auto b = [taylor_mode](double mu, double lam) {
        return taylor_mode ? xlogx_cov_b_taylor(mu, lam) : xlogx_cov_b(mu, lam);
    };
    const auto c = [taylor_mode](double mu, double lam, double gam) {
        return taylor_mode ? xlogx_cov_c_taylor(mu, lam, gam) : xlogx_cov_c(mu, lam, gam);
    };

    double V = 0.0;
    for (Eigen::Index r = 0; r < G; ++r) {
        for (Eigen::Index s = 0; s < G; ++s) {
            const double w_rs = model.omega(r, s);
            const double w_sr = model.omega(s, r);
            for (const Eigen::Index i : members[static_cast<std::size_t>(r)]) {
                const double to = model.theta_out(i, 0);
                const double ti = model.theta_in(i, 0);
                const double mu_o = to * w_rs;
                const double mu_i = ti * w_sr;
                V += a(mu_o) + a(mu_i);
                V += -4.0 * b(mu_o, w_rs) - 4.0 * b(mu_i, w_sr);
                V += -2.0 * b(mu_o, to * w_row[r]) - 2.0 * b(mu_i, ti * w_col[r]);
                V += 2.0 * b(mu_o, w_row[r]) + 2.0 * b(mu_i, w_col[r]);
                V += 2.0 * b(mu_o, w_col[s]) + 2.0 * b(mu_i, w_row[s]);
                V += 4.0 * c(mu_o, w_rs, to * w_row[r]);
                V += 4.0 * c(mu_i, w_sr, ti * w_col[r]);
                V += -2.0 * c(mu_o, w_col[s], to * w_row[r]);
                V += -2.0 * c(mu_i, w_row[s], ti * w_col[r]);
            }
        }
    }
    for (Eigen::Index r = 0; r < G; ++r) {
        for (Eigen::Index s = 0; s < G; ++s) {
            const double w_rs = model.omega(r, s);
            V += 4.0 * a(w_rs);
            V += -4.0 * b(w_rs, w_row[r]) - 4.0 * b(w_rs, w_col[s]);
            V += 2.0 * c(w_rs, w_row[r], w_col[s]);
        }
    }
    for (Eigen::Index r = 0; r < G; ++r) {
        for (const Eigen::Index i : members[static_cast<std::size_t>(r)]) {
            const double to = model.theta_out(i, 0);
            const double ti = model.theta_in(i, 0);
            V += a(to * w_row[r]) + a(ti * w_col[r]);
            V += -2.0 * b(to * w_row[r], w_row[r]) - 2.0 * b(ti * w_col[r], w_col[r]);
        }
    }
    for (Eigen::Index r = 0; r < G; ++r) V += a(w_row[r]) + a(w_col[r]);

    for (Eigen::Index r = 0; r < G; ++r) {
        for (Eigen::Index s = 0; s < G; ++s) {
            const double w_rs = model.omega(r, s);
            const double w_sr = model.omega(s, r);
            for (const Eigen::Index i : members[static_cast<std::size_t>(r)]) {
                const double to_i = model.theta_out(i, 0);
                const double ti_i = model.theta_in(i, 0);
                for (const Eigen::Index j : members[static_cast<std::size_t>(s)]) {
                    const double to_j = model.theta_out(j, 0);
                    const double ti_j = model.theta_in(j, 0);
                    const double mu_ij = to_i * ti_j * w_rs;
                    const double mu_ji = to_j * ti_i * w_sr;
                    V += 2.0 * c(mu_ij, to_i * w_rs, ti_j * w_rs);
                    V += -2.0 * c(mu_ij, to_i * w_rs, ti_j * w_col[s]);
                    V += -2.0 * c(mu_ji, ti_i * w_sr, to_j * w_row[s]);
                    V += 2.0 * c(mu_ij, to_i * w_row[r], ti_j * w_col[s]);
                }
            }
        }
    }
    return V;
}

}  // namespace

double llr_variance_null(const FittedModel& m, VarianceMethod method,
                         const VarianceBudget& budget) {
    require_dcsbm(m, "llr_variance_null");
    switch (method) {
        case VarianceMethod::ExactNumeric:
            if (m.n_nodes() > budget.max_exact_nodes)
                throw NumericalError(
                    "exact_numeric variance on " + std::to_string(m.n_nodes()) +
                    " nodes exceeds the cost guard (" + std::to_string(budget.max_exact_nodes) +
                    "); use monte_carlo");
            return assemble_variance(m, /*taylor_mode=*/false);
        case VarianceMethod::Taylor:
            return assemble_variance(m, /*taylor_mode=*/true);
        case VarianceMethod::MonteCarlo: {
            const LlrNullMc mc = mc_llr_null(m, budget.replicates, budget.seed, budget.jobs);
            return mc.sd * mc.sd;
        }
    }
    throw std::invalid_argument("unknown variance method");
}

AggregateSample sample_aggregates(const FittedModel& model, std::mt19937_64& eng) {
    require_dcsbm(model, "sample_aggregates");
    const Eigen::Index n = model.n_nodes();
    const Eigen::Index G = model.n_groups();
    const auto members = group_members(model.group_of, G);

    AggregateSample out;
    out.d_out_node_group = CountMatrix::Zero(n, G);
    out.d_in_node_group = CountMatrix::Zero(n, G);
    out.m = CountMatrix::Zero(G, G);

    for (Eigen::Index i = 0; i < n; ++i) {
        const int r = model.group_of[i];
        for (Eigen::Index s = 0; s < G; ++s) {
            const std::int64_t v = draw_poisson(eng, model.theta_out(i, 0) * model.omega(r, s));
            out.d_out_node_group(i, s) = v;
            out.m(r, s) += v;
        }
    }

    // in-degrees conditional on the pair totals: multinomial over the target
    // group's in-propensities, realized as sequential binomials
    for (Eigen::Index r = 0; r < G; ++r) {
        for (Eigen::Index s = 0; s < G; ++s) {
            std::int64_t remaining = out.m(r, s);
            if (remaining == 0) continue;
            const auto& pool = members[static_cast<std::size_t>(s)];
            double wsum = 0.0;
            for (const Eigen::Index j : pool) wsum += model.theta_in(j, 0);
            for (std::size_t idx = 0; idx < pool.size() && remaining > 0; ++idx) {
                const Eigen::Index j = pool[idx];
                std::int64_t take;
                if (idx + 1 == pool.size()) {
                    take = remaining;
                } else {
                    const double p = std::clamp(model.theta_in(j, 0) / wsum, 0.0, 1.0);
                    take = draw_binomial(eng, remaining, p);
                }
                out.d_in_node_group(j, r) += take;
                remaining -= take;
                wsum -= model.theta_in(j, 0);
            }
        }
    }
    return out;
}

LlrNullMc mc_llr_null(const FittedModel& m, int B, std::uint64_t seed, int jobs) {
    require_dcsbm(m, "mc_llr_null");
    if (B < 2) throw std::invalid_argument("need at least 2 replicates, got " + std::to_string(B));

    LlrNullMc mc;
    mc.values.assign(static_cast<std::size_t>(B), 0.0);
    for_each_replicate(B, jobs, [&](int bidx) {
        auto eng = make_stream(seed, static_cast<std::uint64_t>(bidx));
        const AggregateSample agg = sample_aggregates(m, eng);
        mc.values[static_cast<std::size_t>(bidx)] =
            llr_from_aggregates(agg.d_out_node_group, agg.d_in_node_group, agg.m);
    });
    mean_sd(mc.values, mc.mean, mc.sd);
    return mc;
}

BootstrapLlr bootstrap_llr_null(const LabeledDigraph& g, int B, std::uint64_t seed, int jobs) {
    if (B < 100)
        throw std::invalid_argument("bootstrap needs at least 100 replicates, got " +
                                    std::to_string(B));
    BootstrapLlr bs;
    bs.observed = llr_statistic(g);
    const FittedModel fit = fit_dcsbm(g);
    LlrNullMc mc = mc_llr_null(fit, B, seed, jobs);
    bs.values = std::move(mc.values);
    bs.mean = mc.mean;
    bs.sd = mc.sd;

    std::int64_t ge = 0;
    for (const double v : bs.values)
        if (v >= bs.observed) ++ge;
    bs.p_value = std::max(static_cast<double>(ge) / static_cast<double>(B),
                          1.0 / (static_cast<double>(B) + 1.0));
    return bs;
}

SparsityReport sparsity_diagnostic(const FittedModel& m, double threshold, int bias_replicates,
                                   std::uint64_t seed) {
    require_dcsbm(m, "sparsity_diagnostic");
    const Eigen::Index n = m.n_nodes();
    const Eigen::Index G = m.n_groups();
    const Eigen::VectorXd w_row = m.omega.rowwise().sum();
    const Eigen::VectorXd w_col = m.omega.colwise().sum().transpose();

    Eigen::MatrixXd mean_digo(n, G), mean_digi(n, G);
    for (Eigen::Index i = 0; i < n; ++i) {
        const int r = m.group_of[i];
        for (Eigen::Index g = 0; g < G; ++g) {
            mean_digo(i, g) = m.theta_out(i, 0) * m.omega(r, g);
            mean_digi(i, g) = m.theta_in(i, 0) * m.omega(g, r);
        }
    }

    SparsityReport rep;
    rep.threshold = threshold;
    rep.min_expected_group_degree = std::min(mean_digo.minCoeff(), mean_digi.minCoeff());
    rep.sparse_flag = rep.min_expected_group_degree < threshold;
    rep.bias_replicates = bias_replicates;
    if (bias_replicates <= 0) return rep;

    // Jensen-gap accumulators: E[1 / refitted quantity], conditional on the
    // quantity being positive in a resample
    Eigen::MatrixXd acc_two(n, G), acc_twi(n, G), cnt_two(n, G), cnt_twi(n, G);
    acc_two.setZero(); acc_twi.setZero(); cnt_two.setZero(); cnt_twi.setZero();
    Eigen::VectorXd acc_to = Eigen::VectorXd::Zero(n), cnt_to = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd acc_ti = Eigen::VectorXd::Zero(n), cnt_ti = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd acc_wr = Eigen::VectorXd::Zero(G), cnt_wr = Eigen::VectorXd::Zero(G);
    Eigen::VectorXd acc_wc = Eigen::VectorXd::Zero(G), cnt_wc = Eigen::VectorXd::Zero(G);
    Eigen::MatrixXd acc_m = Eigen::MatrixXd::Zero(G, G), cnt_m = Eigen::MatrixXd::Zero(G, G);

    CountMatrix digo(n, G), digi(n, G);
    for (int rep_idx = 0; rep_idx < bias_replicates; ++rep_idx) {
        auto eng = make_stream(seed, static_cast<std::uint64_t>(rep_idx));
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index g = 0; g < G; ++g) digo(i, g) = draw_poisson(eng, mean_digo(i, g));
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index g = 0; g < G; ++g) digi(i, g) = draw_poisson(eng, mean_digi(i, g));

        CountMatrix mm = CountMatrix::Zero(G, G);
        CountVector d_i_o = digo.rowwise().sum();
        CountVector d_i_i = digi.rowwise().sum();
        CountVector d_r_o = CountVector::Zero(G), d_r_i = CountVector::Zero(G);
        for (Eigen::Index i = 0; i < n; ++i) {
            const int r = m.group_of[i];
            for (Eigen::Index g = 0; g < G; ++g) mm(r, g) += digo(i, g);
            d_r_o[r] += d_i_o[i];
            d_r_i[r] += d_i_i[i];
        }

        for (Eigen::Index i = 0; i < n; ++i) {
            const int gi = m.group_of[i];
            for (Eigen::Index g = 0; g < G; ++g) {
                const double tw = d_r_o[gi] > 0 ? static_cast<double>(d_i_o[i]) / d_r_o[gi] * mm(gi, g)
                                                : 0.0;
                if (tw > 0) { acc_two(i, g) += 1.0 / tw; cnt_two(i, g) += 1.0; }
                const double twi = d_r_i[gi] > 0 ? static_cast<double>(d_i_i[i]) / d_r_i[gi] * mm(g, gi)
                                                 : 0.0;
                if (twi > 0) { acc_twi(i, g) += 1.0 / twi; cnt_twi(i, g) += 1.0; }
            }
            if (d_i_o[i] > 0) { acc_to[i] += 1.0 / d_i_o[i]; cnt_to[i] += 1.0; }
            if (d_i_i[i] > 0) { acc_ti[i] += 1.0 / d_i_i[i]; cnt_ti[i] += 1.0; }
        }
        for (Eigen::Index r = 0; r < G; ++r) {
            if (d_r_o[r] > 0) { acc_wr[r] += 1.0 / d_r_o[r]; cnt_wr[r] += 1.0; }
            if (d_r_i[r] > 0) { acc_wc[r] += 1.0 / d_r_i[r]; cnt_wc[r] += 1.0; }
            for (Eigen::Index s = 0; s < G; ++s)
                if (mm(r, s) > 0) { acc_m(r, s) += 1.0 / mm(r, s); cnt_m(r, s) += 1.0; }
        }
    }

    double b1 = 0.0, b2 = 0.0;
    int skip = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
        const int gi = m.group_of[i];
        for (Eigen::Index g = 0; g < G; ++g) {
            if (mean_digo(i, g) > 0 && cnt_two(i, g) > 0)
                b1 += (1.0 / mean_digo(i, g) - acc_two(i, g) / cnt_two(i, g)) / 12.0;
            else
                ++skip;
            if (mean_digi(i, g) > 0 && cnt_twi(i, g) > 0)
                b1 += (1.0 / mean_digi(i, g) - acc_twi(i, g) / cnt_twi(i, g)) / 12.0;
            else
                ++skip;
        }
        const double muo = m.theta_out(i, 0) * w_row[gi];
        const double mui = m.theta_in(i, 0) * w_col[gi];
        if (muo > 0 && cnt_to[i] > 0) b1 -= (1.0 / muo - acc_to[i] / cnt_to[i]) / 12.0;
        if (mui > 0 && cnt_ti[i] > 0) b1 -= (1.0 / mui - acc_ti[i] / cnt_ti[i]) / 12.0;
    }
    for (Eigen::Index r = 0; r < G; ++r) {
        if (cnt_wr[r] > 0 && w_row[r] > 0) b2 += (1.0 / w_row[r] - acc_wr[r] / cnt_wr[r]) / 12.0;
        if (cnt_wc[r] > 0 && w_col[r] > 0) b2 += (1.0 / w_col[r] - acc_wc[r] / cnt_wc[r]) / 12.0;
        for (Eigen::Index s = 0; s < G; ++s)
            if (m.omega(r, s) > 0 && cnt_m(r, s) > 0)
                b2 -= 2.0 * (1.0 / m.omega(r, s) - acc_m(r, s) / cnt_m(r, s)) / 12.0;
    }

    rep.bias_b1 = b1;
    rep.bias_b2 = b2;
    rep.bias_skipped_terms = skip;
    rep.plugin_bias_estimate = std::max(0.0, b1 + b2);
    return rep;
}

LlrReport llr_report(const LabeledDigraph& g, const LlrOptions& options) {
    LlrReport rep;
    rep.lambda_hat = llr_statistic(g);
    const FittedModel fit = fit_dcsbm(g);
    const LlrNullMean means = expected_llr_null(fit);
    rep.null_mean_dense = means.dense;
    rep.null_mean_numeric = means.numeric;

    // independent sub-seeds so the variance, bootstrap, and bias stages never
    // share replicate streams
    std::uint64_t state = options.seed;
    const std::uint64_t seed_var = splitmix64(state);
    const std::uint64_t seed_boot = splitmix64(state);
    const std::uint64_t seed_bias = splitmix64(state);

    VarianceBudget budget;
    budget.replicates = options.variance_replicates;
    budget.seed = seed_var;
    budget.jobs = options.jobs;
    budget.max_exact_nodes = options.max_exact_nodes;
    rep.null_variance = llr_variance_null(fit, options.method, budget);
    rep.variance_method = to_string(options.method);

    const double sd = std::sqrt(std::max(0.0, rep.null_variance));
    double p;
    if (sd > 0.0) {
        p = 0.5 * std::erfc((rep.lambda_hat - rep.null_mean_numeric) /
                            (sd * std::numbers::sqrt2));
    } else {
        p = rep.lambda_hat > rep.null_mean_numeric ? 0.0 : 1.0;
    }
    rep.p_value_normal = std::clamp(p, std::numeric_limits<double>::min(), 1.0);

    if (options.bootstrap_replicates > 0)
        rep.p_value_bootstrap =
            bootstrap_llr_null(g, options.bootstrap_replicates, seed_boot, options.jobs).p_value;

    rep.sparsity =
        sparsity_diagnostic(fit, options.sparse_threshold, options.bias_replicates, seed_bias);
    return rep;
}

}  // namespace pathmix
