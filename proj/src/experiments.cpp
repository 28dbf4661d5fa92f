#include "pathmix/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "pathmix/errors.hpp"
#include "pathmix/paths.hpp"
#include "pathmix/rng.hpp"

namespace pathmix {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void require_fraction(double v, const char* what) {
    if (!(v > 0.0 && v < 1.0))
        throw std::invalid_argument(std::string(what) + " must lie in (0, 1), got " +
                                    std::to_string(v));
}

Eigen::VectorXi equal_groups(int n, int G) {
    if (n <= 0) throw std::invalid_argument("n_nodes must be positive");
    if (G <= 0) throw std::invalid_argument("n_groups must be positive");
    if (n % G != 0)
        throw std::invalid_argument("n_nodes (" + std::to_string(n) +
                                    ") must be divisible by n_groups (" + std::to_string(G) + ")");
    Eigen::VectorXi g(n);
    const int per = n / G;
    for (int i = 0; i < n; ++i) g[i] = i / per;
    return g;
}

void synthetic_labels(FittedModel& m, int n, int G) {
    m.node_ids.reserve(n);
    for (int i = 0; i < n; ++i) m.node_ids.push_back("v" + std::to_string(i));
    m.group_ids.reserve(G);
    for (int r = 0; r < G; ++r) m.group_ids.push_back("g" + std::to_string(r));
}

Eigen::MatrixXd block_rates(int G, double in_fraction, double total) {
    Eigen::MatrixXd omega(G, G);
    if (G == 1) {
        omega(0, 0) = total;
        return omega;
    }
    const double off = (1.0 - in_fraction) / (G * (G - 1.0)) * total;
    omega.setConstant(off);
    omega.diagonal().setConstant(in_fraction / G * total);
    return omega;
}

std::vector<double> ci_bounds(std::vector<double> values) {
    std::sort(values.begin(), values.end());
    return {empirical_quantile(values, 0.025), empirical_quantile(values, 0.975)};
}

}  // namespace

FittedModel synth_dcsbm(const SynthConfig& cfg) {
    const Eigen::VectorXi g_of = equal_groups(cfg.n_nodes, cfg.n_groups);
    require_fraction(cfg.in_group_fraction, "in_group_fraction");
    if (cfg.target_total_edges < 0.0)
        throw std::invalid_argument("target_total_edges must be nonnegative");
    const double lo = cfg.powerlaw_min;
    const double hi = cfg.powerlaw_max > 0.0 ? cfg.powerlaw_max : static_cast<double>(cfg.n_nodes);
    if (!(lo > 0.0) || hi < lo)
        throw std::invalid_argument("powerlaw range must satisfy 0 < min <= max");
    const double alpha = 1.0 + cfg.powerlaw_exponent;
    if (alpha == 0.0)
        throw std::invalid_argument("powerlaw_exponent = -1 is not supported by the inverse CDF");

    const int n = cfg.n_nodes;
    const int G = cfg.n_groups;
    auto eng = make_stream(cfg.seed, 0);
    // inverse CDF of the truncated density x^exponent on [lo, hi]
    const auto draw = [&] {
        const double u = draw_uniform01(eng);
        return std::pow(u * (std::pow(hi, alpha) - std::pow(lo, alpha)) + std::pow(lo, alpha),
                        1.0 / alpha);
    };
    Eigen::VectorXd x_out(n), x_in(n);
    for (int i = 0; i < n; ++i) x_out[i] = draw();
    for (int i = 0; i < n; ++i) x_in[i] = draw();

    Eigen::VectorXd sum_out = Eigen::VectorXd::Zero(G), sum_in = Eigen::VectorXd::Zero(G);
    for (int i = 0; i < n; ++i) {
        sum_out[g_of[i]] += x_out[i];
        sum_in[g_of[i]] += x_in[i];
    }

    FittedModel m;
    m.kind = ModelKind::DCSBM;
    m.group_of = g_of;
    synthetic_labels(m, n, G);
    m.omega = block_rates(G, cfg.in_group_fraction, cfg.target_total_edges);
    m.theta_out.resize(n, 1);
    m.theta_in.resize(n, 1);
    for (int i = 0; i < n; ++i) {
        m.theta_out(i, 0) = x_out[i] / sum_out[g_of[i]];
        m.theta_in(i, 0) = x_in[i] / sum_in[g_of[i]];
    }
    return m;
}

FittedModel brokerage_truth(const BrokerageConfig& cfg) {
    const Eigen::VectorXi g_of = equal_groups(cfg.n_nodes, cfg.n_groups);
    if (cfg.n_groups < 2)
        throw std::invalid_argument("brokerage structure needs at least 2 groups");
    require_fraction(cfg.broker_fraction, "broker_fraction");
    require_fraction(cfg.cross_mass, "cross_mass");
    if (!(cfg.in_broker_discount > 0.0 && cfg.in_broker_discount <= 1.0))
        throw std::invalid_argument("in_broker_discount must lie in (0, 1]");
    if (!(cfg.total_edges > 0.0)) throw std::invalid_argument("total_edges must be positive");

    const int n = cfg.n_nodes;
    const int G = cfg.n_groups;
    auto eng = make_stream(cfg.seed, 0);

    FittedModel m;
    m.kind = ModelKind::MixedGroup;
    m.group_of = g_of;
    synthetic_labels(m, n, G);
    m.omega = block_rates(G, 0.7, cfg.total_edges);
    m.theta_out.setZero(n, G);
    m.theta_in.setZero(n, G);

    for (int grp = 0; grp < G; ++grp) {
        std::vector<int> members;
        for (int i = 0; i < n; ++i)
            if (g_of[i] == grp) members.push_back(i);
        const int size = static_cast<int>(members.size());
        const int nb = std::max(1, static_cast<int>(std::lround(cfg.broker_fraction * size)));

        // Fisher-Yates prefix: the first nb entries become the group's brokers
        for (int t = 0; t < nb; ++t) {
            const int pick =
                t + static_cast<int>(draw_uniform01(eng) * static_cast<double>(size - t));
            std::swap(members[t], members[std::min(pick, size - 1)]);
        }
        std::vector<bool> is_broker(members.size(), false);
        for (int t = 0; t < nb; ++t) is_broker[t] = true;

        const int n_nonb = size - nb;
        for (int s = 0; s < G; ++s) {
            double total = 0.0;
            std::vector<double> w(members.size());
            for (std::size_t idx = 0; idx < members.size(); ++idx) {
                if (s == grp)
                    w[idx] = is_broker[idx] ? cfg.in_broker_discount : 1.0;
                else
                    w[idx] = is_broker[idx] ? cfg.cross_mass / nb
                                            : (1.0 - cfg.cross_mass) / std::max(n_nonb, 1);
                total += w[idx];
            }
            for (std::size_t idx = 0; idx < members.size(); ++idx) {
                const double v = w[idx] / total;
                m.theta_out(members[idx], s) = v;
                m.theta_in(members[idx], s) = v;
            }
        }
    }
    return m;
}

SweepTable run_llr_density_sweep(const SynthConfig& base, const std::vector<double>& edge_grid,
                                 int replicates, std::uint64_t seed, int jobs) {
    if (edge_grid.empty()) throw std::invalid_argument("empty density grid");
    if (replicates < 100)
        throw std::invalid_argument("sweep needs at least 100 replicates (bootstrap floor), got " +
                                    std::to_string(replicates));

    SweepTable table;
    table.base = base;
    table.edge_grid = edge_grid;
    table.replicates = replicates;
    table.seed = seed;

    std::uint64_t state = seed;
    for (const double edges : edge_grid) {
        const std::uint64_t mc_seed = splitmix64(state);
        const std::uint64_t net_seed = splitmix64(state);
        const std::uint64_t boot_seed = splitmix64(state);

        // one propensity draw shared by every cell: the grid varies density only
        SynthConfig cfg = base;
        cfg.target_total_edges = edges;
        const FittedModel truth = synth_dcsbm(cfg);

        const LlrNullMc mc = mc_llr_null(truth, replicates, mc_seed, jobs);
        const LabeledDigraph net = sample_network(truth, net_seed);
        const BootstrapLlr bs = bootstrap_llr_null(net, replicates, boot_seed, jobs);
        const LlrNullMean means = expected_llr_null(truth);

        SweepCell cell;
        cell.target_edges = edges;
        cell.true_mc_mean = mc.mean;
        cell.true_mc_se = mc.sd / std::sqrt(static_cast<double>(replicates));
        const auto true_ci = ci_bounds(mc.values);
        cell.true_ci_low = true_ci[0];
        cell.true_ci_high = true_ci[1];
        cell.bootstrap_mean = bs.mean;
        cell.bootstrap_se = bs.sd / std::sqrt(static_cast<double>(replicates));
        const auto boot_ci = ci_bounds(bs.values);
        cell.bootstrap_ci_low = boot_ci[0];
        cell.bootstrap_ci_high = boot_ci[1];
        cell.dense_formula = means.dense;
        cell.numeric_mean = means.numeric;
        table.cells.push_back(cell);
    }
    return table;
}

std::vector<PpcStudyRow> run_ppc_study(
    const std::vector<std::pair<std::string, LabeledDigraph>>& graphs,
    const std::vector<int>& k_list, int B, std::uint64_t seed, int jobs) {
    if (graphs.empty()) throw std::invalid_argument("no graphs given");
    if (k_list.empty()) throw std::invalid_argument("no path lengths given");

    std::vector<PpcStudyRow> rows;
    std::uint64_t state = seed;
    for (const auto& [label, g] : graphs) {
        FittedModel fits[2] = {fit_dcsbm(g), fit_mixed_group(g)};
        for (const FittedModel& fit : fits) {
            for (const int k : k_list) {
                const std::uint64_t row_seed = splitmix64(state);
                PpcStudyRow row;
                row.graph_label = label;
                row.model = to_string(fit.kind);
                row.k = k;
                try {
                    const PpcReport rep = predictive_check(g, fit, k, B, row_seed, jobs);
                    row.observed = rep.observed;
                    row.mc_mean = rep.summary.mean;
                    row.ratio = rep.ratio_observed;
                    const double lo = rep.summary.ci95_low / rep.observed;
                    const double hi = rep.summary.ci95_high / rep.observed;
                    row.ratio_ci_low = std::min(lo, hi);
                    row.ratio_ci_high = std::max(lo, hi);
                    row.p_two_tailed = rep.p_two_tailed;
                    row.degenerate_count = rep.summary.degenerate_count;
                } catch (const NumericalError&) {
                    row.degenerate = true;
                    row.observed = kNaN;
                    row.mc_mean = kNaN;
                    row.ratio = kNaN;
                    row.ratio_ci_low = kNaN;
                    row.ratio_ci_high = kNaN;
                    row.p_two_tailed = kNaN;
                }
                rows.push_back(std::move(row));
            }
        }
    }
    // rows without a finite ratio (degenerate, or observed assortativity 0)
    // are unrankable and collect at the tail
    std::stable_sort(rows.begin(), rows.end(), [](const PpcStudyRow& x, const PpcStudyRow& y) {
        const bool xu = !std::isfinite(x.ratio), yu = !std::isfinite(y.ratio);
        if (xu != yu) return !xu;
        if (xu) return false;
        return x.ratio > y.ratio;
    });
    return rows;
}

}  // namespace pathmix
