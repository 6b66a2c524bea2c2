// Command-line entry point: diagnose, forecast, report and bench verbs.

#include "tsci/advisor.hpp"
#include "tsci/pipeline.hpp"
#include "tsci/preprocess.hpp"
#include "tsci/profile.hpp"
#include "tsci/reporter.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Flags {
    std::string config_file;
    std::string input;
    std::string column;
    std::size_t slices = 0;
    std::size_t input_length = 0;
    std::vector<std::size_t> horizons;
    std::uint64_t seed = 0;
    std::string advisor;
    std::string out;
    std::size_t workers = 0;
    std::string llm_endpoint;
    std::string llm_model;
};

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw std::runtime_error(fmt::format("cannot open '{}'", p.string()));
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const fs::path& p, const std::string& content) {
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error(fmt::format("cannot write '{}'", p.string()));
    out << content;
}

/// Run-configuration options shared by the verbs that read a dataset.
void add_run_options(CLI::App* cmd, Flags& f) {
    cmd->add_option("--config", f.config_file, "JSON run configuration (flags override its values)");
    cmd->add_option("--input", f.input, "CSV file with a header row");
    cmd->add_option("--column", f.column, "Column name (or 0-based index) holding the series");
    cmd->add_option("--slices", f.slices, "Number of evaluation slices per horizon");
    cmd->add_option("--input-length", f.input_length, "Input window length T");
    cmd->add_option("--horizons", f.horizons, "Forecast horizons, comma separated")->delimiter(',');
    cmd->add_option("--seed", f.seed, "Random seed for configuration sampling");
    cmd->add_option("--advisor", f.advisor, "Decision backend")->check(CLI::IsMember({"rules", "llm"}));
    cmd->add_option("--out", f.out, "Output directory");
    cmd->add_option("--workers", f.workers, "Worker threads");
    cmd->add_option("--llm-endpoint", f.llm_endpoint, "Chat-completion endpoint URL (llm advisor)");
    cmd->add_option("--llm-model", f.llm_model, "Model name sent to the endpoint (llm advisor)");
}

/// Defaults, then the config file, then explicit flags.
tsci::RunConfig resolve_config(const CLI::App* cmd, const Flags& f) {
    tsci::RunConfig c;
    if (!f.config_file.empty()) from_json(json::parse(read_file(f.config_file)), c);
    const auto given = [cmd](const char* name) { return cmd->count(name) > 0; };
    if (given("--input")) c.input_path = f.input;
    if (given("--column")) c.column = f.column;
    if (given("--slices")) c.slice_count = f.slices;
    if (given("--input-length")) c.input_length = f.input_length;
    if (given("--horizons")) c.horizons = f.horizons;
    if (given("--seed")) c.seed = f.seed;
    if (given("--advisor")) c.advisor.mode = f.advisor == "llm" ? tsci::AdvisorMode::llm : tsci::AdvisorMode::rules;
    if (given("--out")) c.out_dir = f.out;
    if (given("--workers")) c.workers = f.workers;
    if (given("--llm-endpoint")) c.advisor.endpoint = f.llm_endpoint;
    if (given("--llm-model")) c.advisor.model_name = f.llm_model;
    c.validate();
    if (c.input_path.empty()) throw std::invalid_argument("--input (or \"input\" in the config file) is required");
    return c;
}

int cmd_diagnose(const tsci::RunConfig& c) {
    const auto series = tsci::ingest_csv(c.input_path, c.column);
    const auto diagnostics = tsci::diagnose(series, tsci::default_preprocess_policy());
    json out;
    json diag;
    tsci::to_json(diag, diagnostics);
    out["diagnostics"] = diag;
    const fs::path dir = fs::path(c.out_dir) / "diagnose";
    fs::create_directories(dir / "plots");
    try {
        const auto decision = tsci::advise_preprocess(diagnostics);
        out["advisor"] = tsci::to_json(decision);
        const auto choice = tsci::policy_from_decision(decision.payload);
        const auto cleaned = tsci::apply_preprocessing(series, choice.policy).dense();
        const auto profile = tsci::build_profile(cleaned);
        json pj;
        tsci::to_json(pj, profile);
        out["profile"] = pj;
        out["notes"] = choice.notes;

        tsci::PlotData plots;
        plots.series = cleaned;
        plots.decomposition = tsci::decompose(cleaned, profile.decomposition_period);
        plots.correlogram = tsci::acf_pacf(cleaned, std::min(tsci::kCorrelogramLags, cleaned.size() - 1));
        for (const auto& [name, svg] : tsci::render_plots(plots))
            if (name != "ensemble_forecast.svg") write_file(dir / "plots" / name, svg);
    } catch (const tsci::DataQualityError& e) {
        out["error"] = e.what();
    }
    write_file(dir / "curator.json", out.dump(2) + "\n");
    std::cout << out.dump(2) << "\n";
    std::cerr << fmt::format("wrote {}\n", (dir / "curator.json").string());
    return out.contains("error") ? 2 : 0;
}

int cmd_forecast(const tsci::RunConfig& c) {
    std::unique_ptr<tsci::ChatTransport> transport;
    if (c.advisor.mode == tsci::AdvisorMode::llm) transport = tsci::make_http_transport(c.advisor);
    const auto summary = tsci::run_pipeline(c, transport.get());
    for (const auto& w : summary.warnings) std::cerr << "warning: " << w << "\n";
    for (const auto& s : summary.slices)
        if (!s.ok) std::cerr << fmt::format("slice H={} #{} failed: {}\n", s.horizon, s.index, s.error);
    std::cout << tsci::aggregate_csv(summary);
    std::cerr << fmt::format("outputs in {}\n", c.out_dir);
    return 0;
}

/// Every directory below `root` (inclusive) holding a log.ndjson with a report event.
std::vector<fs::path> slice_dirs(const fs::path& root) {
    std::vector<fs::path> dirs;
    if (fs::exists(root / "log.ndjson")) dirs.push_back(root);
    if (fs::is_directory(root))
        for (const auto& e : fs::recursive_directory_iterator(root))
            if (e.is_regular_file() && e.path().filename() == "log.ndjson" && e.path().parent_path() != root)
                dirs.push_back(e.path().parent_path());
    std::sort(dirs.begin(), dirs.end());
    return dirs;
}

int cmd_report(const fs::path& root) {
    const auto dirs = slice_dirs(root);
    if (dirs.empty()) throw std::runtime_error(fmt::format("no log.ndjson found under '{}'", root.string()));
    int mismatches = 0;
    std::size_t rendered = 0;
    for (const auto& dir : dirs) {
        const auto log = tsci::WorkflowLog::from_ndjson(read_file(dir / "log.ndjson"));
        if (!log.contains("report")) {
            std::cerr << fmt::format("{}: slice did not complete, skipped\n", dir.string());
            continue;
        }
        const auto run = tsci::rebuild_from_log(log);
        if (run.forecast != tsci::logged_forecast(log)) {
            std::cerr << fmt::format("{}: replayed forecast differs from the logged forecast\n", dir.string());
            ++mismatches;
            continue;
        }
        tsci::write_slice_outputs(dir, run);
        ++rendered;
    }
    std::cout << fmt::format("re-rendered {} slice(s), {} replay mismatch(es)\n", rendered, mismatches);
    return mismatches == 0 ? 0 : 1;
}

/// Parses a slices.csv written by `forecast` back into per-slice results.
tsci::RunSummary read_slices_csv(const fs::path& path) {
    std::istringstream in(read_file(path));
    std::string line;
    std::getline(in, line);  // header
    tsci::RunSummary summary;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> f;
        std::string cur;
        bool quoted = false;
        for (char ch : line) {
            if (ch == '"') quoted = !quoted;
            else if (ch == ',' && !quoted) {
                f.push_back(cur);
                cur.clear();
            } else cur += ch;
        }
        f.push_back(cur);
        if (f.size() < 8) throw std::runtime_error(fmt::format("{}: malformed row '{}'", path.string(), line));
        tsci::SliceResult s;
        s.horizon = std::stoul(f[0]);
        s.index = std::stoul(f[1]);
        s.start = std::stoul(f[2]);
        s.ok = f[3] == "ok";
        s.strategy = f[4];
        if (!f[6].empty() && !f[7].empty()) s.ensemble_test = tsci::MetricsPair{std::stod(f[6]), std::stod(f[7])};
        summary.slices.push_back(std::move(s));
    }
    tsci::aggregate(summary);
    return summary;
}

int cmd_bench(const std::vector<std::string>& runs, const std::string& output) {
    std::string md = "| run | horizon | slices | failed | MAE | MAPE (%) |\n|---|---:|---:|---:|---:|---:|\n";
    for (const auto& run : runs) {
        const auto summary = read_slices_csv(fs::path(run) / "slices.csv");
        const auto row = [&](const std::string& h, const tsci::HorizonAggregate& a) {
            md += fmt::format("| {} | {} | {} | {} | {:.4g} | {:.4g} |\n", run, h, a.included, a.failed, a.mae, a.mape);
        };
        for (const auto& a : summary.aggregates) row(std::to_string(a.horizon), a);
        if (summary.average) row("avg", *summary.average);
    }
    if (!output.empty()) write_file(output, md);
    std::cout << md;
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Automated time-series forecasting pipeline"};
    app.require_subcommand(1);

    Flags diag_flags, fc_flags;
    auto* diagnose = app.add_subcommand("diagnose", "Data-quality diagnostics, preprocessing advice and profile");
    add_run_options(diagnose, diag_flags);
    auto* forecast = app.add_subcommand("forecast", "Full pipeline over every horizon and slice");
    add_run_options(forecast, fc_flags);

    std::string report_dir = "out";
    auto* report = app.add_subcommand("report", "Replay slice logs and re-render their reports");
    report->add_option("--out,dir", report_dir, "Run or slice directory")->capture_default_str();

    std::vector<std::string> bench_runs;
    std::string bench_output;
    auto* bench = app.add_subcommand("bench", "Aggregate table over one or more forecast runs");
    bench->add_option("--out,runs", bench_runs, "Run directories containing slices.csv")->required();
    bench->add_option("--output", bench_output, "Also write the Markdown table to this file");

    CLI11_PARSE(app, argc, argv);
    try {
        if (*diagnose) return cmd_diagnose(resolve_config(diagnose, diag_flags));
        if (*forecast) return cmd_forecast(resolve_config(forecast, fc_flags));
        if (*report) return cmd_report(report_dir);
        if (*bench) return cmd_bench(bench_runs, bench_output);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
