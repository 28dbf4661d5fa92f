#include "pathmix/serialize.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "pathmix/errors.hpp"
#include "pathmix/version.hpp"

namespace pathmix {

namespace {

nlohmann::json matrix_json(const Eigen::MatrixXd& m) {
    nlohmann::json rows = nlohmann::json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        nlohmann::json row = nlohmann::json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

Eigen::MatrixXd matrix_from_json(const nlohmann::json& j, const char* what) {
    if (!j.is_array() || j.empty())
        throw DataError(std::string("model JSON: ") + what + " must be a non-empty array");
    const Eigen::Index rows = static_cast<Eigen::Index>(j.size());
    const Eigen::Index cols = static_cast<Eigen::Index>(j.front().size());
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
        const auto& row = j[static_cast<std::size_t>(i)];
        if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols)
            throw DataError(std::string("model JSON: ragged rows in ") + what);
        for (Eigen::Index c = 0; c < cols; ++c)
            m(i, c) = row[static_cast<std::size_t>(c)].get<double>();
    }
    return m;
}

void csv_number(std::ostringstream& out, double v) {
    if (std::isnan(v)) {
        out << "nan";
    } else if (std::isinf(v)) {
        out << (v > 0 ? "inf" : "-inf");
    } else {
        out << nlohmann::json(v).dump();  // shortest round-trip formatting
    }
}

// JSON has no NaN/inf literal; report fields that may be undefined are null
nlohmann::json finite_or_null(double v) {
    if (std::isfinite(v)) return v;
    return nullptr;
}

nlohmann::json values_json(const std::vector<double>& values) {
    nlohmann::json arr = nlohmann::json::array();
    for (const double v : values) arr.push_back(finite_or_null(v));
    return arr;
}

}  // namespace

nlohmann::json to_json(const FittedModel& m) {
    nlohmann::json j;
    j["format_version"] = kModelFormatVersion;
    j["library_version"] = kVersion;
    j["kind"] = to_string(m.kind);
    j["node_ids"] = m.node_ids;
    j["group_ids"] = m.group_ids;
    j["group_of"] = std::vector<int>(m.group_of.data(), m.group_of.data() + m.group_of.size());
    j["theta_out"] = matrix_json(m.theta_out);
    j["theta_in"] = matrix_json(m.theta_in);
    j["omega"] = matrix_json(m.omega);
    j["iterations"] = m.iterations;
    j["residual"] = m.residual;
    j["init_rule"] = m.init_rule;
    return j;
}

FittedModel model_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw DataError("model JSON: expected an object");
    if (j.value("format_version", -1) != kModelFormatVersion)
        throw DataError("model JSON: unsupported format_version");

    FittedModel m;
    try {
        m.kind = model_kind_from_string(j.at("kind").get<std::string>());
        m.node_ids = j.at("node_ids").get<std::vector<std::string>>();
        m.group_ids = j.at("group_ids").get<std::vector<std::string>>();
        const auto groups = j.at("group_of").get<std::vector<int>>();
        m.group_of = Eigen::Map<const Eigen::VectorXi>(groups.data(),
                                                       static_cast<Eigen::Index>(groups.size()));
        m.theta_out = matrix_from_json(j.at("theta_out"), "theta_out");
        m.theta_in = matrix_from_json(j.at("theta_in"), "theta_in");
        m.omega = matrix_from_json(j.at("omega"), "omega");
        m.iterations = j.value("iterations", 0);
        m.residual = j.value("residual", 0.0);
        m.init_rule = j.value("init_rule", std::string{});
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("model JSON: ") + e.what());
    }

    const Eigen::Index n = m.group_of.size();
    const Eigen::Index G = static_cast<Eigen::Index>(m.group_ids.size());
    if (static_cast<Eigen::Index>(m.node_ids.size()) != n || m.omega.rows() != G ||
        m.omega.cols() != G || m.theta_out.rows() != n || m.theta_in.rows() != n)
        throw DataError("model JSON: inconsistent dimensions");
    const Eigen::Index want = m.kind == ModelKind::DCSBM ? 1 : G;
    if (m.theta_out.cols() != want || m.theta_in.cols() != want)
        throw DataError("model JSON: theta width does not match the model kind");
    for (Eigen::Index i = 0; i < n; ++i)
        if (m.group_of[i] < 0 || m.group_of[i] >= G)
            throw DataError("model JSON: group index out of range");
    return m;
}

nlohmann::json to_json(const McSummary& s) {
    nlohmann::json j;
    j["format_version"] = kReportFormatVersion;
    j["k"] = s.k;
    j["replicates"] = s.replicates;
    j["mean"] = finite_or_null(s.mean);
    j["sd"] = finite_or_null(s.sd);
    j["ci95_low"] = finite_or_null(s.ci95_low);
    j["ci95_high"] = finite_or_null(s.ci95_high);
    j["degenerate_count"] = s.degenerate_count;
    j["values"] = values_json(s.values);
    return j;
}

nlohmann::json to_json(const PpcReport& r) {
    nlohmann::json j;
    j["format_version"] = kReportFormatVersion;
    j["observed"] = finite_or_null(r.observed);
    j["p_two_tailed"] = finite_or_null(r.p_two_tailed);
    j["ratio_observed"] = finite_or_null(r.ratio_observed);
    j["mc"] = to_json(r.summary);
    return j;
}

nlohmann::json to_json(const SparsityReport& r) {
    nlohmann::json j;
    j["min_expected_group_degree"] = r.min_expected_group_degree;
    j["threshold"] = r.threshold;
    j["sparse_flag"] = r.sparse_flag;
    j["plugin_bias_estimate"] = finite_or_null(r.plugin_bias_estimate);
    j["bias_b1"] = finite_or_null(r.bias_b1);
    j["bias_b2"] = finite_or_null(r.bias_b2);
    j["bias_skipped_terms"] = r.bias_skipped_terms;
    j["bias_replicates"] = r.bias_replicates;
    return j;
}

nlohmann::json to_json(const LlrReport& r) {
    nlohmann::json j;
    j["format_version"] = kReportFormatVersion;
    j["lambda_hat"] = finite_or_null(r.lambda_hat);
    j["null_mean_dense"] = finite_or_null(r.null_mean_dense);
    j["null_mean_numeric"] = finite_or_null(r.null_mean_numeric);
    j["variance_method"] = r.variance_method;
    j["null_variance"] = finite_or_null(r.null_variance);
    j["p_value_normal"] = finite_or_null(r.p_value_normal);
    if (r.p_value_bootstrap)
        j["p_value_bootstrap"] = *r.p_value_bootstrap;
    else
        j["p_value_bootstrap"] = nullptr;
    j["sparsity"] = to_json(r.sparsity);
    return j;
}

nlohmann::json to_json(const BootstrapLlr& b) {
    nlohmann::json j;
    j["format_version"] = kReportFormatVersion;
    j["observed"] = b.observed;
    j["mean"] = b.mean;
    j["sd"] = b.sd;
    j["p_value"] = b.p_value;
    j["values"] = b.values;
    return j;
}

nlohmann::json to_json(const SynthConfig& cfg) {
    nlohmann::json j;
    j["n_nodes"] = cfg.n_nodes;
    j["n_groups"] = cfg.n_groups;
    j["target_total_edges"] = cfg.target_total_edges;
    j["in_group_fraction"] = cfg.in_group_fraction;
    j["powerlaw_exponent"] = cfg.powerlaw_exponent;
    j["powerlaw_min"] = cfg.powerlaw_min;
    j["powerlaw_max"] = cfg.powerlaw_max;
    j["seed"] = cfg.seed;
    return j;
}

nlohmann::json to_json(const SweepTable& t) {
    nlohmann::json j;
    j["format_version"] = kReportFormatVersion;
    j["library_version"] = kVersion;
    j["base_config"] = to_json(t.base);
    j["edge_grid"] = t.edge_grid;
    j["replicates"] = t.replicates;
    j["seed"] = t.seed;
    nlohmann::json cells = nlohmann::json::array();
    for (const SweepCell& c : t.cells) {
        nlohmann::json jc;
        jc["target_edges"] = c.target_edges;
        jc["true_mc_mean"] = c.true_mc_mean;
        jc["true_mc_se"] = c.true_mc_se;
        jc["true_ci_low"] = c.true_ci_low;
        jc["true_ci_high"] = c.true_ci_high;
        jc["bootstrap_mean"] = c.bootstrap_mean;
        jc["bootstrap_se"] = c.bootstrap_se;
        jc["bootstrap_ci_low"] = c.bootstrap_ci_low;
        jc["bootstrap_ci_high"] = c.bootstrap_ci_high;
        jc["dense_formula"] = c.dense_formula;
        jc["numeric_mean"] = c.numeric_mean;
        cells.push_back(std::move(jc));
    }
    j["cells"] = std::move(cells);
    return j;
}

nlohmann::json to_json(const std::vector<PpcStudyRow>& rows) {
    nlohmann::json arr = nlohmann::json::array();
    for (const PpcStudyRow& r : rows) {
        nlohmann::json j;
        j["graph"] = r.graph_label;
        j["model"] = r.model;
        j["k"] = r.k;
        j["observed"] = finite_or_null(r.observed);
        j["mc_mean"] = finite_or_null(r.mc_mean);
        j["ratio"] = finite_or_null(r.ratio);
        j["ratio_ci_low"] = finite_or_null(r.ratio_ci_low);
        j["ratio_ci_high"] = finite_or_null(r.ratio_ci_high);
        j["p_two_tailed"] = finite_or_null(r.p_two_tailed);
        j["degenerate_count"] = r.degenerate_count;
        j["degenerate"] = r.degenerate;
        arr.push_back(std::move(j));
    }
    nlohmann::json j;
    j["format_version"] = kReportFormatVersion;
    j["library_version"] = kVersion;
    j["rows"] = std::move(arr);
    return j;
}

std::string sweep_csv(const SweepTable& t) {
    std::ostringstream out;
    out << "target_edges,true_mc_mean,true_mc_se,true_ci_low,true_ci_high,"
           "bootstrap_mean,bootstrap_se,bootstrap_ci_low,bootstrap_ci_high,"
           "dense_formula,numeric_mean\n";
    for (const SweepCell& c : t.cells) {
        const double cols[] = {c.target_edges,     c.true_mc_mean,     c.true_mc_se,
                               c.true_ci_low,      c.true_ci_high,     c.bootstrap_mean,
                               c.bootstrap_se,     c.bootstrap_ci_low, c.bootstrap_ci_high,
                               c.dense_formula,    c.numeric_mean};
        for (std::size_t i = 0; i < std::size(cols); ++i) {
            if (i) out << ',';
            csv_number(out, cols[i]);
        }
        out << '\n';
    }
    return out.str();
}

std::string ppc_rows_csv(const std::vector<PpcStudyRow>& rows) {
    std::ostringstream out;
    out << "graph,model,k,observed,mc_mean,ratio,ratio_ci_low,ratio_ci_high,"
           "p_two_tailed,degenerate_count,degenerate\n";
    for (const PpcStudyRow& r : rows) {
        out << r.graph_label << ',' << r.model << ',' << r.k << ',';
        const double cols[] = {r.observed, r.mc_mean, r.ratio, r.ratio_ci_low, r.ratio_ci_high,
                               r.p_two_tailed};
        for (const double v : cols) {
            csv_number(out, v);
            out << ',';
        }
        out << r.degenerate_count << ',' << (r.degenerate ? "true" : "false") << '\n';
    }
    return out.str();
}

std::string replicate_values_csv(const std::vector<double>& values) {
    std::ostringstream out;
    out << "replicate,value\n";
    for (std::size_t b = 0; b < values.size(); ++b) {
        out << b << ',';
        csv_number(out, values[b]);
        out << '\n';
    }
    return out.str();
}

void write_text_file(const std::string& path, const std::string& content, bool force) {
    if (!force && std::filesystem::exists(path))
        throw DataError("refusing to overwrite existing file '" + path +
                        "' (pass --force to allow)");
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot open '" + path + "' for writing");
    out << content;
    if (!out) throw DataError("failed while writing '" + path + "'");
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open '" + path + "' for reading");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

}  // namespace pathmix
