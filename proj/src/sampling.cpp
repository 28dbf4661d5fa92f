#include "pathmix/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "pathmix/errors.hpp"
#include "pathmix/parallel.hpp"
#include "pathmix/paths.hpp"
#include "pathmix/rng.hpp"

namespace pathmix {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::vector<std::vector<std::int32_t>> group_members(const Eigen::VectorXi& group_of,
                                                     Eigen::Index G) {
    std::vector<std::vector<std::int32_t>> members(static_cast<std::size_t>(G));
    for (Eigen::Index i = 0; i < group_of.size(); ++i)
        members[static_cast<std::size_t>(group_of[i])].push_back(static_cast<std::int32_t>(i));
    return members;
}

}  // namespace

LabeledDigraph sample_network(const FittedModel& m, std::mt19937_64& eng) {
    const Eigen::Index G = m.n_groups();
    const auto members = group_members(m.group_of, G);

    std::vector<Edge> raw;
    std::vector<double> cum_src, cum_dst;
    for (Eigen::Index r = 0; r < G; ++r) {
        for (Eigen::Index s = 0; s < G; ++s) {
            const Eigen::Index col_out = m.kind == ModelKind::DCSBM ? 0 : s;
            const Eigen::Index col_in = m.kind == ModelKind::DCSBM ? 0 : r;
            const auto& src_pool = members[static_cast<std::size_t>(r)];
            const auto& dst_pool = members[static_cast<std::size_t>(s)];

            double so = 0.0, ti = 0.0;
            for (const auto i : src_pool) so += m.theta_out(i, col_out);
            for (const auto j : dst_pool) ti += m.theta_in(j, col_in);
            const double mean = m.omega(r, s) * so * ti;
            if (mean <= 0.0) continue;

            const std::int64_t n_edges = draw_poisson(eng, mean);
            if (n_edges == 0) continue;

            cum_src.clear();
            double acc = 0.0;
            for (const auto i : src_pool) cum_src.push_back(acc += m.theta_out(i, col_out));
            cum_dst.clear();
            acc = 0.0;
            for (const auto j : dst_pool) cum_dst.push_back(acc += m.theta_in(j, col_in));

            for (std::int64_t e = 0; e < n_edges; ++e) {
                const auto src = src_pool[pick_index(cum_src, draw_uniform01(eng))];
                const auto dst = dst_pool[pick_index(cum_dst, draw_uniform01(eng))];
                raw.push_back(Edge{src, dst, 1});
            }
        }
    }
    return LabeledDigraph::from_indexed(std::move(raw), m.group_of, m.node_ids, m.group_ids);
}

LabeledDigraph sample_network(const FittedModel& m, std::uint64_t seed) {
    auto eng = make_stream(seed, 0);
    return sample_network(m, eng);
}

double empirical_quantile(const std::vector<double>& sorted_values, double p) {
    if (sorted_values.empty()) throw std::invalid_argument("quantile of empty sample");
    if (sorted_values.size() == 1) return sorted_values.front();
    const double h = (static_cast<double>(sorted_values.size()) - 1.0) * p;
    const auto lo = static_cast<std::size_t>(std::clamp(
        std::floor(h), 0.0, static_cast<double>(sorted_values.size() - 2)));
    const double frac = h - static_cast<double>(lo);
    return sorted_values[lo] + frac * (sorted_values[lo + 1] - sorted_values[lo]);
}

McSummary summarize_replicates(int k, std::vector<double> values) {
    McSummary s;
    s.k = k;
    s.replicates = static_cast<int>(values.size());
    s.values = std::move(values);

    std::vector<double> defined;
    defined.reserve(s.values.size());
    for (const double v : s.values) {
        if (std::isnan(v))
            ++s.degenerate_count;
        else
            defined.push_back(v);
    }
    if (defined.empty())
        throw NumericalError("all " + std::to_string(s.replicates) +
                             " replicates were degenerate (no defined assortativity)");

    const double n = static_cast<double>(defined.size());
    double mean = 0.0;
    for (const double v : defined) mean += v;
    mean /= n;
    double ss = 0.0;
    for (const double v : defined) ss += (v - mean) * (v - mean);
    s.mean = mean;
    s.sd = defined.size() > 1 ? std::sqrt(ss / (n - 1.0)) : kNaN;

    std::sort(defined.begin(), defined.end());
    s.ci95_low = empirical_quantile(defined, 0.025);
    s.ci95_high = empirical_quantile(defined, 0.975);
    return s;
}

McSummary assortativity_distribution(const FittedModel& m, int k, int B, std::uint64_t seed,
                                     int jobs) {
    if (B < 2) throw std::invalid_argument("need at least 2 replicates, got " + std::to_string(B));

    std::vector<double> values(static_cast<std::size_t>(B), kNaN);
    for_each_replicate(B, jobs, [&](int b) {
        auto eng = make_stream(seed, static_cast<std::uint64_t>(b));
        const LabeledDigraph net = sample_network(m, eng);
        try {
            values[static_cast<std::size_t>(b)] = assortativity(path_counts(net, k)).r_coeff;
        } catch (const NumericalError&) {
            // degenerate replicate: stays NaN, tallied by the summary
        }
    });
    return summarize_replicates(k, std::move(values));
}

PpcReport predictive_check(const LabeledDigraph& g, const FittedModel& m, int k, int B,
                           std::uint64_t seed, int jobs) {
    check_same_space(m, g);
    PpcReport rep;
    rep.observed = assortativity(path_counts(g, k)).r_coeff;
    rep.summary = assortativity_distribution(m, k, B, seed, jobs);

    std::int64_t ge = 0, le = 0, defined = 0;
    for (const double v : rep.summary.values) {
        if (std::isnan(v)) continue;
        ++defined;
        if (v >= rep.observed) ++ge;
        if (v <= rep.observed) ++le;
    }
    const double frac_ge = static_cast<double>(ge) / static_cast<double>(defined);
    const double frac_le = static_cast<double>(le) / static_cast<double>(defined);
    const double floor_p = 2.0 / (static_cast<double>(B) + 1.0);
    rep.p_two_tailed = std::clamp(2.0 * std::min(frac_ge, frac_le), floor_p, 1.0);
    rep.ratio_observed = rep.summary.mean / rep.observed;
    return rep;
}

}  // namespace pathmix
