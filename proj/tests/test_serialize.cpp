#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include <json.hpp>

#include "pathmix/errors.hpp"
#include "pathmix/model_selection.hpp"
#include "pathmix/models.hpp"
#include "pathmix/sampling.hpp"
#include "pathmix/serialize.hpp"
#include "pathmix/version.hpp"
#include "test_util.hpp"

using nlohmann::json;
using pathmix::DataError;
using pathmix::FittedModel;

TEST_CASE("fitted models survive a JSON round-trip bit-for-bit") {
    // seed picked so the node-constraint solver converges on this graph
    std::mt19937_64 eng(884);
    const auto g = testutil::random_graph(eng, 14, 3, 50, 2);
    for (const FittedModel& m :
         {pathmix::fit_dcsbm(g), pathmix::fit_mixed_group(g), pathmix::fit_mixed_node(g)}) {
        const json j = pathmix::to_json(m);
        CHECK(j.at("format_version").get<int>() == pathmix::kModelFormatVersion);
        const FittedModel back = pathmix::model_from_json(j);
        CHECK(back.kind == m.kind);
        CHECK(back.theta_out == m.theta_out);
        CHECK(back.theta_in == m.theta_in);
        CHECK(back.omega == m.omega);
        CHECK(back.group_of == m.group_of);
        CHECK(back.node_ids == m.node_ids);
        CHECK(back.group_ids == m.group_ids);
        CHECK(back.iterations == m.iterations);
        CHECK(back.residual == m.residual);
        CHECK(back.init_rule == m.init_rule);
        // serialize -> parse -> serialize is byte-stable
        CHECK(pathmix::to_json(back).dump() == j.dump());
    }
}

TEST_CASE("model deserialization validates shape and versions") {
    std::mt19937_64 eng(809);
    const auto g = testutil::random_graph(eng, 6, 2, 15, 2);
    const json good = pathmix::to_json(pathmix::fit_mixed_group(g));

    json bad = good;
    bad["format_version"] = 999;
    CHECK_THROWS_AS(pathmix::model_from_json(bad), DataError);

    bad = good;
    bad["theta_out"][0] = json::array({0.5});  // ragged width
    CHECK_THROWS_AS(pathmix::model_from_json(bad), DataError);

    bad = good;
    bad["group_of"][0] = 7;  // out of range
    CHECK_THROWS_AS(pathmix::model_from_json(bad), DataError);

    bad = good;
    bad["kind"] = "bogus";
    CHECK_THROWS_AS(pathmix::model_from_json(bad), DataError);

    bad = good;
    bad.erase("omega");
    CHECK_THROWS_AS(pathmix::model_from_json(bad), DataError);
}

TEST_CASE("degenerate replicates serialize as null entries") {
    pathmix::McSummary s = pathmix::summarize_replicates(2, {0.25, std::nan(""), 0.75});
    const json j = pathmix::to_json(s);
    CHECK(j.at("values").size() == 3);
    CHECK(j.at("values")[0].get<double>() == 0.25);
    CHECK(j.at("values")[1].is_null());
    CHECK(j.at("degenerate_count").get<int>() == 1);
}

TEST_CASE("model-selection reports include the optional bootstrap p-value") {
    pathmix::LlrReport rep;
    rep.lambda_hat = 1.5;
    rep.variance_method = "monte_carlo";
    json j = pathmix::to_json(rep);
    CHECK(j.at("p_value_bootstrap").is_null());
    CHECK(j.at("sparsity").is_object());
    rep.p_value_bootstrap = 0.25;
    j = pathmix::to_json(rep);
    CHECK(j.at("p_value_bootstrap").get<double>() == 0.25);
}

TEST_CASE("sweep CSV has the documented header and one line per cell") {
    pathmix::SweepTable t;
    t.replicates = 100;
    t.cells.resize(2);
    t.cells[0].target_edges = 100.0;
    t.cells[0].true_mc_mean = 5.25;
    t.cells[1].target_edges = 200.0;
    const std::string csv = pathmix::sweep_csv(t);
    std::istringstream lines(csv);
    std::string line;
    std::getline(lines, line);
    CHECK(line ==
          "target_edges,true_mc_mean,true_mc_se,true_ci_low,true_ci_high,bootstrap_mean,"
          "bootstrap_se,bootstrap_ci_low,bootstrap_ci_high,dense_formula,numeric_mean");
    int rows = 0;
    while (std::getline(lines, line))
        if (!line.empty()) ++rows;
    CHECK(rows == 2);
    CHECK(csv.find("5.25") != std::string::npos);
}

TEST_CASE("predictive-check CSV flags degenerate rows with nan fields") {
    std::vector<pathmix::PpcStudyRow> rows(1);
    rows[0].graph_label = "g1";
    rows[0].model = "dcsbm";
    rows[0].k = 2;
    rows[0].observed = std::nan("");
    rows[0].ratio = std::nan("");
    rows[0].degenerate = true;
    const std::string csv = pathmix::ppc_rows_csv(rows);
    CHECK(csv.find("graph,model,k,observed,mc_mean,ratio,ratio_ci_low,ratio_ci_high,"
                   "p_two_tailed,degenerate_count,degenerate") != std::string::npos);
    CHECK(csv.find("nan") != std::string::npos);
    CHECK(csv.find("g1,dcsbm,2,") != std::string::npos);
}

TEST_CASE("replicate CSV lists one value per line") {
    const std::string csv = pathmix::replicate_values_csv({1.5, 2.5});
    CHECK(csv == "replicate,value\n0,1.5\n1,2.5\n");
}

TEST_CASE("file writes refuse to clobber without force") {
    testutil::TempDir tmp;
    const std::string path = tmp.file("out.json");
    pathmix::write_text_file(path, "first", false);
    CHECK(pathmix::read_text_file(path) == "first");
    try {
        pathmix::write_text_file(path, "second", false);
        FAIL("expected DataError");
    } catch (const DataError& e) {
        CHECK(std::string(e.what()).find("--force") != std::string::npos);
    }
    CHECK(pathmix::read_text_file(path) == "first");
    pathmix::write_text_file(path, "second", true);
    CHECK(pathmix::read_text_file(path) == "second");
    CHECK_THROWS_AS(pathmix::read_text_file(tmp.file("absent.txt")), DataError);
}
