// pathmix command-line front end.
//
// Exit codes: 0 success, 1 usage, 2 data error (bad inputs, refusing to
// overwrite), 3 numerical failure (non-convergence, cost guards, degenerate
// statistics). Every randomized subcommand either takes --seed or generates
// one and prints it on stderr; the seed is embedded in all outputs, so any
// artifact can be reproduced byte-for-byte from its recorded run block.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "pathmix/errors.hpp"
#include "pathmix/experiments.hpp"
#include "pathmix/graph.hpp"
#include "pathmix/model_selection.hpp"
#include "pathmix/models.hpp"
#include "pathmix/paths.hpp"
#include "pathmix/sampling.hpp"
#include "pathmix/serialize.hpp"
#include "pathmix/version.hpp"

namespace {

using nlohmann::json;

// command-line misuse detected after parsing (maps to exit 1)
class UsageError : public std::runtime_error {
public:
    explicit UsageError(const std::string& msg) : std::runtime_error(msg) {}
};

int default_jobs() {
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

std::uint64_t ensure_seed(std::optional<std::uint64_t>& seed) {
    if (!seed) {
        std::random_device rd;
        const std::uint64_t s =
            (static_cast<std::uint64_t>(rd()) << 32) ^ static_cast<std::uint64_t>(rd());
        seed = s;
        std::cerr << "generated seed: " << s << "\n";
    }
    return *seed;
}

json run_block(const std::string& command, json config, std::optional<std::uint64_t> seed) {
    json j;
    j["command"] = command;
    j["config"] = std::move(config);
    if (seed) j["seed"] = *seed;
    j["library_version"] = pathmix::kVersion;
    j["report_format_version"] = pathmix::kReportFormatVersion;
    return j;
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

// Writes into the --out directory (fixed per-subcommand filenames) or, when
// no directory was given, prints the primary payload to stdout.
class Emitter {
public:
    Emitter(std::string dir, bool force) : dir_(std::move(dir)), force_(force) {
        if (!dir_.empty()) std::filesystem::create_directories(dir_);
    }

    bool to_files() const { return !dir_.empty(); }

    void file(const std::string& name, const std::string& content) const {
        pathmix::write_text_file((std::filesystem::path(dir_) / name).string(), content, force_);
    }

private:
    std::string dir_;
    bool force_;
};

json count_matrix_json(const pathmix::CountMatrix& m) {
    json rows = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index s = 0; s < m.cols(); ++s) row.push_back(m(r, s));
        rows.push_back(std::move(row));
    }
    return rows;
}

json real_matrix_json(const Eigen::MatrixXd& m) {
    json rows = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index s = 0; s < m.cols(); ++s) row.push_back(m(r, s));
        rows.push_back(std::move(row));
    }
    return rows;
}

json real_vector_json(const Eigen::VectorXd& v) {
    json arr = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v[i]);
    return arr;
}

std::int64_t parameter_count(const pathmix::FittedModel& m) {
    const std::int64_t n = m.n_nodes();
    const std::int64_t G = m.n_groups();
    switch (m.kind) {
        case pathmix::ModelKind::DCSBM: return 2 * (n - G) + G * G;
        case pathmix::ModelKind::MixedGroup: return 2 * (n * G - G * G) + G * G;
        case pathmix::ModelKind::MixedNode: return 2 * n * (G - 1) + G * G;
    }
    return 0;
}

pathmix::FittedModel fit_kind(const pathmix::LabeledDigraph& g, const std::string& kind,
                              const pathmix::SolverConfig& cfg) {
    switch (pathmix::model_kind_from_string(kind)) {
        case pathmix::ModelKind::DCSBM: return pathmix::fit_dcsbm(g);
        case pathmix::ModelKind::MixedGroup: return pathmix::fit_mixed_group(g);
        case pathmix::ModelKind::MixedNode: return pathmix::fit_mixed_node(g, cfg);
    }
    throw pathmix::DataError("unknown model kind");
}

struct CommonArgs {
    std::string edges;
    std::string groups;
    std::string out;
    std::string format = "json";
    bool force = false;
    int jobs = default_jobs();
    std::optional<std::uint64_t> seed;
};

void require_json_format(const CommonArgs& args, const std::string& command) {
    if (args.format != "json")
        throw UsageError(command + " only emits json on stdout; use --out for files");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Block-model fitting, path assortativity, and model selection for directed "
                 "multigraphs"};
    app.require_subcommand(1);
    app.set_version_flag("--version", pathmix::kVersion);

    auto add_common = [&](CLI::App* cmd, CommonArgs& args, bool needs_graph, bool randomized) {
        if (needs_graph) {
            cmd->add_option("--edges", args.edges, "edge CSV (source,target[,count])")->required();
            cmd->add_option("--groups", args.groups, "group CSV (node,group)")->required();
        }
        cmd->add_option("--out", args.out, "output directory (fixed per-subcommand filenames)");
        cmd->add_flag("--force", args.force, "overwrite existing output files");
        cmd->add_option("--format", args.format, "stdout format when --out is absent")
            ->check(CLI::IsMember({"json", "csv"}));
        cmd->add_option("--jobs", args.jobs, "max replicate parallelism")
            ->check(CLI::PositiveNumber);
        if (randomized)
            cmd->add_option("--seed", args.seed, "master seed (generated and printed if absent)");
    };

    // ---- fit ----
    auto fit_args = std::make_shared<CommonArgs>();
    auto fit_model = std::make_shared<std::string>();
    auto fit_solver = std::make_shared<pathmix::SolverConfig>();
    CLI::App* cmd_fit = app.add_subcommand("fit", "Fit a model and serialize it");
    add_common(cmd_fit, *fit_args, true, false);
    cmd_fit->add_option("--model", *fit_model, "model kind")
        ->required()
        ->check(CLI::IsMember({"dcsbm", "mixed-group", "mixed-node"}));
    cmd_fit->add_option("--max-iterations", fit_solver->max_iterations,
                        "solver iteration cap (mixed-node)");
    cmd_fit->add_option("--tolerance", fit_solver->tolerance,
                        "solver convergence tolerance (mixed-node)");
    cmd_fit->callback([fit_args, fit_model, fit_solver] {
        require_json_format(*fit_args, "fit");
        const pathmix::LabeledDigraph g = pathmix::load_graph(fit_args->edges, fit_args->groups);
        const pathmix::FittedModel m = fit_kind(g, *fit_model, *fit_solver);
        json j = pathmix::to_json(m);
        j["fit_summary"] = {{"log_likelihood", pathmix::log_likelihood(m, g)},
                            {"n_nodes", m.n_nodes()},
                            {"n_groups", m.n_groups()},
                            {"n_parameters", parameter_count(m)},
                            {"total_edges", g.total_edges()},
                            {"iterations", m.iterations},
                            {"residual", m.residual}};
        j["run"] = run_block("fit",
                             {{"edges", fit_args->edges},
                              {"groups", fit_args->groups},
                              {"model", *fit_model},
                              {"max_iterations", fit_solver->max_iterations},
                              {"tolerance", fit_solver->tolerance}},
                             std::nullopt);
        Emitter out(fit_args->out, fit_args->force);
        if (out.to_files())
            out.file("model.json", dump(j));
        else
            std::cout << dump(j);
    });

    // ---- sample ----
    auto sample_args = std::make_shared<CommonArgs>();
    auto sample_model_file = std::make_shared<std::string>();
    auto sample_kind = std::make_shared<std::string>();
    CLI::App* cmd_sample = app.add_subcommand("sample", "Draw one network from a model");
    add_common(cmd_sample, *sample_args, false, true);
    cmd_sample->add_option("--model-file", *sample_model_file, "fitted model JSON");
    cmd_sample->add_option("--edges", sample_args->edges, "edge CSV (fit on the fly)");
    cmd_sample->add_option("--groups", sample_args->groups, "group CSV (fit on the fly)");
    cmd_sample->add_option("--model", *sample_kind, "model kind when fitting on the fly")
        ->check(CLI::IsMember({"dcsbm", "mixed-group", "mixed-node"}));
    cmd_sample->callback([sample_args, sample_model_file, sample_kind] {
        if (sample_args->out.empty())
            throw UsageError("sample writes CSV files; --out is required");
        pathmix::FittedModel m;
        if (!sample_model_file->empty()) {
            m = pathmix::model_from_json(
                json::parse(pathmix::read_text_file(*sample_model_file)));
        } else if (!sample_args->edges.empty() && !sample_args->groups.empty() &&
                   !sample_kind->empty()) {
            m = fit_kind(pathmix::load_graph(sample_args->edges, sample_args->groups),
                         *sample_kind, {});
        } else {
            throw UsageError("sample needs --model-file or all of --edges/--groups/--model");
        }
        const std::uint64_t seed = ensure_seed(sample_args->seed);
        const pathmix::LabeledDigraph net = pathmix::sample_network(m, seed);

        std::ostringstream edges_csv, groups_csv;
        pathmix::write_edge_csv(net, edges_csv);
        pathmix::write_group_csv(net, groups_csv);
        json manifest;
        manifest["run"] = run_block("sample",
                                    {{"model_file", *sample_model_file},
                                     {"edges", sample_args->edges},
                                     {"groups", sample_args->groups},
                                     {"model", *sample_kind}},
                                    seed);
        manifest["n_nodes"] = net.n_nodes();
        manifest["total_edges"] = net.total_edges();
        manifest["files"] = {"sampled_edges.csv", "sampled_groups.csv"};
        Emitter out(sample_args->out, sample_args->force);
        out.file("sampled_edges.csv", edges_csv.str());
        out.file("sampled_groups.csv", groups_csv.str());
        out.file("sample.json", dump(manifest));
    });

    // ---- assort ----
    auto assort_args = std::make_shared<CommonArgs>();
    auto assort_ks = std::make_shared<std::vector<int>>();
    CLI::App* cmd_assort = app.add_subcommand("assort", "Path-count assortativity of a graph");
    add_common(cmd_assort, *assort_args, true, false);
    cmd_assort->add_option("--k", *assort_ks, "path lengths (1..3)")->expected(-1);
    cmd_assort->callback([assort_args, assort_ks] {
        require_json_format(*assort_args, "assort");
        if (assort_ks->empty()) assort_ks->push_back(2);
        const pathmix::LabeledDigraph g =
            pathmix::load_graph(assort_args->edges, assort_args->groups);
        const pathmix::GroupStats st = pathmix::group_stats(g);
        json results = json::array();
        for (const int k : *assort_ks) {
            const pathmix::PathCounts pc = pathmix::path_counts(g, st, k);
            const pathmix::MixingSummary mix = pathmix::assortativity(pc);
            results.push_back({{"k", k},
                               {"counts", count_matrix_json(pc.counts)},
                               {"total", pc.total},
                               {"e", real_matrix_json(mix.e)},
                               {"a", real_vector_json(mix.a)},
                               {"b", real_vector_json(mix.b)},
                               {"r_coeff", mix.r_coeff}});
        }
        json j;
        j["run"] = run_block("assort",
                             {{"edges", assort_args->edges},
                              {"groups", assort_args->groups},
                              {"k", *assort_ks}},
                             std::nullopt);
        j["group_ids"] = g.group_ids();
        j["results"] = std::move(results);
        Emitter out(assort_args->out, assort_args->force);
        if (out.to_files())
            out.file("assort.json", dump(j));
        else
            std::cout << dump(j);
    });

    // ---- ppc ----
    auto ppc_args = std::make_shared<CommonArgs>();
    auto ppc_kind = std::make_shared<std::string>("mixed-group");
    auto ppc_ks = std::make_shared<std::vector<int>>();
    auto ppc_reps = std::make_shared<int>(200);
    CLI::App* cmd_ppc = app.add_subcommand("ppc", "Predictive check of assortativity under a fit");
    add_common(cmd_ppc, *ppc_args, true, true);
    cmd_ppc->add_option("--model", *ppc_kind, "model kind to fit")
        ->check(CLI::IsMember({"dcsbm", "mixed-group", "mixed-node"}));
    cmd_ppc->add_option("--k", *ppc_ks, "path lengths (1..3)")->expected(-1);
    cmd_ppc->add_option("--replicates", *ppc_reps, "Monte Carlo replicates")
        ->check(CLI::PositiveNumber);
    cmd_ppc->callback([ppc_args, ppc_kind, ppc_ks, ppc_reps] {
        if (ppc_ks->empty()) ppc_ks->push_back(2);
        const pathmix::LabeledDigraph g = pathmix::load_graph(ppc_args->edges, ppc_args->groups);
        const pathmix::FittedModel m = fit_kind(g, *ppc_kind, {});
        const std::uint64_t seed = ensure_seed(ppc_args->seed);

        json reports = json::array();
        std::ostringstream values_csv;
        values_csv << "k,replicate,value\n";
        for (const int k : *ppc_ks) {
            const pathmix::PpcReport rep =
                pathmix::predictive_check(g, m, k, *ppc_reps, seed, ppc_args->jobs);
            json jr = pathmix::to_json(rep);
            jr["k"] = k;
            reports.push_back(std::move(jr));
            for (std::size_t b = 0; b < rep.summary.values.size(); ++b) {
                values_csv << k << ',' << b << ',';
                const double v = rep.summary.values[b];
                if (std::isnan(v))
                    values_csv << "nan";
                else
                    values_csv << json(v).dump();
                values_csv << '\n';
            }
        }
        json j;
        j["run"] = run_block("ppc",
                             {{"edges", ppc_args->edges},
                              {"groups", ppc_args->groups},
                              {"model", *ppc_kind},
                              {"k", *ppc_ks},
                              {"replicates", *ppc_reps},
                              {"jobs", ppc_args->jobs}},
                             seed);
        j["reports"] = std::move(reports);
        Emitter out(ppc_args->out, ppc_args->force);
        if (out.to_files()) {
            out.file("ppc.json", dump(j));
            out.file("ppc_values.csv", values_csv.str());
        } else if (ppc_args->format == "csv") {
            std::cout << values_csv.str();
        } else {
            std::cout << dump(j);
        }
    });

    // ---- llr ----
    auto llr_args = std::make_shared<CommonArgs>();
    auto llr_opt = std::make_shared<pathmix::LlrOptions>();
    auto llr_method = std::make_shared<std::string>("monte_carlo");
    CLI::App* cmd_llr = app.add_subcommand("llr", "Model-selection report (mixed-group vs dcsbm)");
    add_common(cmd_llr, *llr_args, true, true);
    cmd_llr->add_option("--variance-method", *llr_method, "null variance estimator")
        ->check(CLI::IsMember({"exact_numeric", "taylor", "monte_carlo"}));
    cmd_llr->add_option("--replicates", llr_opt->variance_replicates,
                        "Monte Carlo variance replicates")
        ->check(CLI::PositiveNumber);
    cmd_llr->add_option("--bootstrap-replicates", llr_opt->bootstrap_replicates,
                        "parametric bootstrap replicates (0 skips)");
    cmd_llr->add_option("--sparse-threshold", llr_opt->sparse_threshold,
                        "flag threshold on the min expected group degree");
    cmd_llr->add_option("--bias-replicates", llr_opt->bias_replicates,
                        "resamples for the plug-in bias heuristic");
    cmd_llr->add_option("--max-exact-nodes", llr_opt->max_exact_nodes,
                        "cost guard for exact_numeric");
    cmd_llr->callback([llr_args, llr_opt, llr_method] {
        require_json_format(*llr_args, "llr");
        const pathmix::LabeledDigraph g = pathmix::load_graph(llr_args->edges, llr_args->groups);
        llr_opt->method = pathmix::variance_method_from_string(*llr_method);
        llr_opt->seed = ensure_seed(llr_args->seed);
        llr_opt->jobs = llr_args->jobs;
        const pathmix::LlrReport rep = pathmix::llr_report(g, *llr_opt);
        json j = pathmix::to_json(rep);
        j["run"] = run_block("llr",
                             {{"edges", llr_args->edges},
                              {"groups", llr_args->groups},
                              {"variance_method", *llr_method},
                              {"replicates", llr_opt->variance_replicates},
                              {"bootstrap_replicates", llr_opt->bootstrap_replicates},
                              {"sparse_threshold", llr_opt->sparse_threshold},
                              {"bias_replicates", llr_opt->bias_replicates},
                              {"max_exact_nodes", llr_opt->max_exact_nodes},
                              {"jobs", llr_args->jobs}},
                             llr_opt->seed);
        Emitter out(llr_args->out, llr_args->force);
        if (out.to_files())
            out.file("llr.json", dump(j));
        else
            std::cout << dump(j);
    });

    // ---- bootstrap ----
    auto boot_args = std::make_shared<CommonArgs>();
    auto boot_reps = std::make_shared<int>(500);
    CLI::App* cmd_boot =
        app.add_subcommand("bootstrap", "Parametric bootstrap null distribution of the LLR");
    add_common(cmd_boot, *boot_args, true, true);
    cmd_boot->add_option("--replicates", *boot_reps, "bootstrap replicates (>= 100)");
    cmd_boot->callback([boot_args, boot_reps] {
        const pathmix::LabeledDigraph g = pathmix::load_graph(boot_args->edges, boot_args->groups);
        const std::uint64_t seed = ensure_seed(boot_args->seed);
        const pathmix::BootstrapLlr bs =
            pathmix::bootstrap_llr_null(g, *boot_reps, seed, boot_args->jobs);
        json j = pathmix::to_json(bs);
        j["run"] = run_block("bootstrap",
                             {{"edges", boot_args->edges},
                              {"groups", boot_args->groups},
                              {"replicates", *boot_reps},
                              {"jobs", boot_args->jobs}},
                             seed);
        const std::string values = pathmix::replicate_values_csv(bs.values);
        Emitter out(boot_args->out, boot_args->force);
        if (out.to_files()) {
            out.file("bootstrap.json", dump(j));
            out.file("bootstrap_values.csv", values);
        } else if (boot_args->format == "csv") {
            std::cout << values;
        } else {
            std::cout << dump(j);
        }
    });

    // ---- sweep ----
    auto sweep_args = std::make_shared<CommonArgs>();
    auto sweep_cfg = std::make_shared<pathmix::SynthConfig>();
    auto sweep_grid = std::make_shared<std::vector<double>>();
    auto sweep_reps = std::make_shared<int>(200);
    auto sweep_large = std::make_shared<bool>(false);
    CLI::App* cmd_sweep =
        app.add_subcommand("sweep", "Null LLR distribution versus density on synthetic models");
    add_common(cmd_sweep, *sweep_args, false, true);
    cmd_sweep->add_option("--n-nodes", sweep_cfg->n_nodes, "nodes")->required();
    cmd_sweep->add_option("--n-groups", sweep_cfg->n_groups, "groups (equal sizes)");
    cmd_sweep->add_option("--grid", *sweep_grid, "edge totals to sweep")
        ->required()
        ->expected(-1);
    cmd_sweep->add_option("--replicates", *sweep_reps, "replicates per cell (>= 100)");
    cmd_sweep->add_option("--in-fraction", sweep_cfg->in_group_fraction, "in-group edge share");
    cmd_sweep->add_option("--powerlaw-exponent", sweep_cfg->powerlaw_exponent,
                          "propensity power-law exponent");
    cmd_sweep->add_option("--powerlaw-min", sweep_cfg->powerlaw_min, "propensity lower cut");
    cmd_sweep->add_option("--powerlaw-max", sweep_cfg->powerlaw_max,
                          "propensity upper cut (0 = n-nodes)");
    cmd_sweep->add_flag("--allow-large", *sweep_large,
                        "permit n-nodes > 5000 (long running)");
    cmd_sweep->callback([sweep_args, sweep_cfg, sweep_grid, sweep_reps, sweep_large] {
        if (sweep_cfg->n_nodes > 5000 && !*sweep_large)
            throw UsageError("n-nodes > 5000 requires --allow-large");
        const std::uint64_t seed = ensure_seed(sweep_args->seed);
        sweep_cfg->seed = seed;  // one propensity draw shared by every grid cell
        const pathmix::SweepTable table = pathmix::run_llr_density_sweep(
            *sweep_cfg, *sweep_grid, *sweep_reps, seed, sweep_args->jobs);
        json j = pathmix::to_json(table);
        j["run"] = run_block("sweep",
                             {{"n_nodes", sweep_cfg->n_nodes},
                              {"n_groups", sweep_cfg->n_groups},
                              {"grid", *sweep_grid},
                              {"replicates", *sweep_reps},
                              {"in_fraction", sweep_cfg->in_group_fraction},
                              {"powerlaw_exponent", sweep_cfg->powerlaw_exponent},
                              {"powerlaw_min", sweep_cfg->powerlaw_min},
                              {"powerlaw_max", sweep_cfg->powerlaw_max},
                              {"jobs", sweep_args->jobs}},
                             seed);
        const std::string csv = pathmix::sweep_csv(table);
        Emitter out(sweep_args->out, sweep_args->force);
        if (out.to_files()) {
            out.file("sweep.json", dump(j));
            out.file("sweep.csv", csv);
        } else if (sweep_args->format == "csv") {
            std::cout << csv;
        } else {
            std::cout << dump(j);
        }
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 1;
    } catch (const pathmix::NumericalError& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return 3;
    } catch (const pathmix::DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 2;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
