// Command-line front end: norm linting, one-shot matching, scenario
// simulation, report inspection and per-norm explanations.

#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "normroute/normroute.hpp"

namespace {

using namespace normroute;

int cmd_check(const std::string& path) {
    std::string text = read_file(path);
    ParseResult pr = parse_norms(text);
    if (!pr.ok()) {
        for (const auto& d : pr.diagnostics) std::cerr << d.render(path) << "\n";
        return 1;
    }
    auto diags = lint_norms(pr.norms, engine_schema());
    for (const auto& d : diags) std::cerr << d.render(path) << "\n";
    return diags.empty() ? 0 : 1;
}

int cmd_match(const std::string& community_path, const std::string& query_path) {
    Community c = load_community(community_path);
    std::ifstream in(query_path);
    if (!in) throw IoError("cannot open '" + query_path + "' for reading");
    MatchQuery q = match_query_from_json(nlohmann::json::parse(in));
    if (q.questioner.empty())
        throw ValidationError("query file must name a questioner");
    MetricParams params;
    auto ranked = rank_candidates(q, c, params);
    auto selected = select_responders(q, c, params);
    std::cout << scores_to_csv(ranked, selected, q);
    return 0;
}

int cmd_simulate(const std::string& scenario_path, std::optional<std::uint64_t> seed,
                 const std::string& out_path) {
    Scenario sc = load_scenario(scenario_path);
    if (seed) sc.seed = *seed;
    SimulationReport report = run_scenario(sc);
    std::string serialized = serialize_report(report);
    if (out_path.empty()) {
        std::cout << serialized;
    } else {
        std::ofstream out(out_path, std::ios::trunc | std::ios::binary);
        if (!out) throw IoError("cannot open '" + out_path + "' for writing");
        out << serialized;
    }
    return 0;
}

nlohmann::json load_report_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path + "' for reading");
    return nlohmann::json::parse(in);
}

int cmd_report(const std::string& report_path, bool show_histogram,
               const std::string& csv_path) {
    nlohmann::json r = load_report_json(report_path);
    std::cout << "seed: " << r.at("seed") << "\n";
    std::cout << "community: " << r.at("community").at("id").get<std::string>() << " ("
              << r.at("community").at("size") << " members)\n";
    std::cout << "questions: " << r.at("questions").size() << "\n";
    std::size_t dispatched = 0;
    for (const auto& q : r.at("questions")) dispatched += q.at("selected").size();
    std::cout << "dispatched messages: " << dispatched << "\n";
    if (!r.at("k_trajectory").empty())
        std::cout << "adapted k: " << r.at("k_trajectory").back() << "\n";

    std::vector<HistogramBin> bins;
    for (const auto& b : r.at("histogram"))
        bins.push_back({b.at("low"), b.at("high"), b.at("count")});
    if (show_histogram) {
        std::cout << "\nmatching-score histogram (log scale):\n"
                  << render_histogram(bins);
    }
    if (!csv_path.empty()) {
        std::ofstream out(csv_path, std::ios::trunc);
        if (!out) throw IoError("cannot open '" + csv_path + "' for writing");
        out << histogram_to_csv(bins);
    }
    return 0;
}

int cmd_explain(const std::string& report_path, const std::string& question,
                const std::string& norm) {
    nlohmann::json r = load_report_json(report_path);
    for (const auto& q : r.at("questions")) {
        if (q.at("id").get<std::string>() != question) continue;
        std::vector<ExplanationTrace> traces;
        for (const auto& tj : q.at("traces")) traces.push_back(trace_from_json(tj));
        std::cout << explain(traces, norm);
        return 0;
    }
    throw ValidationError("no question '" + question + "' in report");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"norm-mediated question routing with diversity-aware selection"};
    app.require_subcommand(1);

    std::string norms_path;
    auto* check = app.add_subcommand("check", "lint a norm file");
    check->add_option("norms", norms_path, "norm file (.nm)")->required();

    std::string community_path, query_path;
    auto* match = app.add_subcommand("match", "rank and select responders for one query");
    match->add_option("community", community_path, "community JSON file")->required();
    match->add_option("query", query_path, "match query JSON file")->required();

    std::string scenario_path, out_path;
    std::optional<std::uint64_t> seed;
    auto* simulate = app.add_subcommand("simulate", "run a scripted scenario");
    simulate->add_option("scenario", scenario_path, "scenario JSON file")->required();
    simulate->add_option("--seed", seed, "override the scenario's run seed");
    simulate->add_option("--out", out_path, "write the report here instead of stdout");

    std::string report_path, csv_path;
    bool show_histogram = false;
    auto* report = app.add_subcommand("report", "summarize a simulation report");
    report->add_option("report", report_path, "report JSON file")->required();
    report->add_flag("--histogram", show_histogram, "print the matching-score histogram");
    report->add_option("--csv", csv_path, "export the histogram as CSV");

    std::string ex_report, ex_question, ex_norm;
    auto* explain_cmd = app.add_subcommand("explain", "why a norm did or did not fire");
    explain_cmd->add_option("report", ex_report, "report JSON file")->required();
    explain_cmd->add_option("--question", ex_question, "question id")->required();
    explain_cmd->add_option("--norm", ex_norm, "norm name")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return e.get_exit_code() == 0 ? 0 : 2;
    }

    try {
        if (*check) return cmd_check(norms_path);
        if (*match) return cmd_match(community_path, query_path);
        if (*simulate) return cmd_simulate(scenario_path, seed, out_path);
        if (*report) return cmd_report(report_path, show_histogram, csv_path);
        if (*explain_cmd) return cmd_explain(ex_report, ex_question, ex_norm);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
