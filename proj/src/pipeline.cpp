#include "tsci/pipeline.hpp"

#include "tsci/planner.hpp"
#include "tsci/preprocess.hpp"
#include "tsci/profile.hpp"
#include "tsci/scaler.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <atomic>
#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

namespace tsci {

namespace fs = std::filesystem;
using nlohmann::json;

// --- configuration ---------------------------------------------------------

void RunConfig::validate() const {
    if (input_length < 64) throw std::invalid_argument(fmt::format("input length must be >= 64, got {}", input_length));
    if (horizons.empty()) throw std::invalid_argument("at least one horizon is required");
    for (std::size_t h : horizons)
        if (h < 1) throw std::invalid_argument("horizons must be >= 1");
    if (slice_count < 1) throw std::invalid_argument("slice count must be >= 1");
    if (workers < 1) throw std::invalid_argument("worker count must be >= 1");
    if (pool_size < 1 || pool_size > registered_models().size())
        throw std::invalid_argument(fmt::format("pool size must be in [1, {}]", registered_models().size()));
    if (configs_per_model < 1) throw std::invalid_argument("configs per model must be >= 1");
    if (top_k < 1) throw std::invalid_argument("top-k must be >= 1");
    if (!(interval_level > 0.0 && interval_level < 100.0))
        throw std::invalid_argument("interval level must lie in (0, 100)");
    if (out_dir.empty()) throw std::invalid_argument("output directory must not be empty");
    ensemble.validate();
    advisor.validate();
}

void to_json(json& j, const RunConfig& c) {
    json advisor;
    to_json(advisor, c.advisor);
    json ensemble;
    to_json(ensemble, c.ensemble);
    j = json{{"input", c.input_path},
             {"column", c.column},
             {"slices", c.slice_count},
             {"input_length", c.input_length},
             {"horizons", c.horizons},
             {"seed", c.seed},
             {"workers", c.workers},
             {"pool_size", c.pool_size},
             {"configs_per_model", c.configs_per_model},
             {"top_k", c.top_k},
             {"interval_level", c.interval_level},
             {"advisor", advisor},
             {"ensemble", ensemble},
             {"out", c.out_dir}};
}

void from_json(const json& j, RunConfig& c) {
    if (!j.is_object()) throw std::invalid_argument("run configuration must be a JSON object");
    static const std::vector<std::string> known = {"input", "column", "slices", "input_length", "horizons",
                                                   "seed", "workers", "pool_size", "configs_per_model", "top_k",
                                                   "interval_level", "advisor", "ensemble", "out"};
    for (const auto& [key, _] : j.items())
        if (std::find(known.begin(), known.end(), key) == known.end())
            throw std::invalid_argument(fmt::format("unknown configuration key '{}'", key));
    if (j.contains("input")) c.input_path = j.at("input").get<std::string>();
    if (j.contains("column")) c.column = j.at("column").get<std::string>();
    if (j.contains("slices")) c.slice_count = j.at("slices").get<std::size_t>();
    if (j.contains("input_length")) c.input_length = j.at("input_length").get<std::size_t>();
    if (j.contains("horizons")) c.horizons = j.at("horizons").get<std::vector<std::size_t>>();
    if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("workers")) c.workers = j.at("workers").get<std::size_t>();
    if (j.contains("pool_size")) c.pool_size = j.at("pool_size").get<std::size_t>();
    if (j.contains("configs_per_model")) c.configs_per_model = j.at("configs_per_model").get<std::size_t>();
    if (j.contains("top_k")) c.top_k = j.at("top_k").get<std::size_t>();
    if (j.contains("interval_level")) c.interval_level = j.at("interval_level").get<double>();
    if (j.contains("out")) c.out_dir = j.at("out").get<std::string>();
    // Nested sections are merged over the current values so a file may name
    // only the fields it changes.
    if (j.contains("advisor")) {
        json merged;
        to_json(merged, c.advisor);
        merged.merge_patch(j.at("advisor"));
        from_json(merged, c.advisor);
    }
    if (j.contains("ensemble")) {
        json merged;
        to_json(merged, c.ensemble);
        merged.merge_patch(j.at("ensemble"));
        from_json(merged, c.ensemble);
    }
}

// --- ingestion -------------------------------------------------------------

namespace {

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

/// Comma-separated fields with double-quote quoting ("" escapes a quote).
std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char ch = line[i];
        if (quoted) {
            if (ch == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                cur += '"';
                ++i;
            } else if (ch == '"') {
                quoted = false;
            } else {
                cur += ch;
            }
        } else if (ch == '"') {
            quoted = true;
        } else if (ch == ',') {
            fields.push_back(trim(cur));
            cur.clear();
        } else {
            cur += ch;
        }
    }
    fields.push_back(trim(cur));
    return fields;
}

std::optional<std::size_t> as_index(const std::string& s) {
    if (s.empty() || !std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isdigit(c) != 0; }))
        return std::nullopt;
    return static_cast<std::size_t>(std::stoull(s));
}

}  // namespace

Series parse_csv(std::istream& in, const std::string& column, const std::string& source) {
    std::string line;
    std::size_t line_no = 0;
    std::vector<std::string> header;
    while (std::getline(in, line)) {
        ++line_no;
        if (!trim(line).empty()) {
            header = split_csv_line(line);
            break;
        }
    }
    if (header.empty()) throw std::runtime_error(fmt::format("{}: no header row", source));
    if (!header.front().empty() && header.front().rfind("\xEF\xBB\xBF", 0) == 0) header.front().erase(0, 3);

    std::optional<std::size_t> col;
    for (std::size_t i = 0; i < header.size(); ++i)
        if (header[i] == column) {
            col = i;
            break;
        }
    if (!col) {
        const auto idx = as_index(column);
        if (!idx || *idx >= header.size())
            throw std::runtime_error(fmt::format("{}: column '{}' not found in header", source, column));
        col = idx;
    }

    std::vector<std::optional<double>> values;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const auto fields = split_csv_line(line);
        if (*col >= fields.size())
            throw std::runtime_error(fmt::format("{}: line {} has {} field(s), column {} is missing", source, line_no,
                                                 fields.size(), *col + 1));
        const std::string& cell = fields[*col];
        if (cell.empty()) {
            values.emplace_back(std::nullopt);
            continue;
        }
        errno = 0;
        char* end = nullptr;
        const double v = std::strtod(cell.c_str(), &end);
        if (end != cell.c_str() + cell.size() || errno == ERANGE || !std::isfinite(v))
            throw std::runtime_error(fmt::format("{}: line {}: cannot parse '{}' as a finite number", source, line_no, cell));
        values.emplace_back(v);
    }
    return Series(std::move(values));
}

Series ingest_csv(const std::string& path, const std::string& column) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error(fmt::format("cannot open '{}'", path));
    return parse_csv(in, column, path);
}

// --- slicing ---------------------------------------------------------------

SlicePlan make_slices(const Series& series, std::size_t input_length, std::size_t slice_count, std::size_t horizon) {
    if (slice_count == 0) throw std::invalid_argument("slice count must be >= 1");
    const std::size_t n = series.size();
    const std::size_t need = input_length + horizon;
    if (n < need)
        throw std::invalid_argument(
            fmt::format("series has {} points but one slice needs {} (T={} + H={})", n, need, input_length, horizon));
    SlicePlan plan;
    const std::size_t span = n - need;
    std::size_t s = slice_count;
    if (s > span + 1) {
        s = span + 1;
        plan.warnings.push_back(fmt::format("H={}: {} slices requested but only {} distinct windows fit; using {}",
                                            horizon, slice_count, s, s));
    }
    for (std::size_t i = 0; i < s; ++i) {
        // round(i * span / (s - 1)) with halves rounded up, in exact integer arithmetic.
        const std::size_t start = s == 1 ? 0 : (2 * i * span + (s - 1)) / (2 * (s - 1));
        plan.windows.push_back({i, start, series.slice(start, input_length), series.slice(start + input_length, horizon)});
    }
    return plan;
}

const Series& TestWindowGuard::read(WorkflowLog& log) {
    if (consumed_) throw std::logic_error("the test window may be read only once");
    if (!log.contains("ensemble")) throw std::logic_error("the test window may not be read before the ensemble decision");
    consumed_ = true;
    log.append("test_read", {{"horizon", test_.size()}, {"observed", test_.size() - test_.missing_count()}});
    return test_;
}

// --- slice execution -------------------------------------------------------

namespace {

json slots_to_json(const Series& s) {
    json a = json::array();
    for (const auto& v : s.slots()) a.push_back(v ? json(*v) : json(nullptr));
    return a;
}

Series series_from_json(const json& slots, long start) {
    std::vector<std::optional<double>> v;
    for (const auto& x : slots) v.push_back(x.is_null() ? std::nullopt : std::optional<double>(x.get<double>()));
    return Series(std::move(v), start);
}

std::vector<double> with_nan(const Series& s) {
    std::vector<double> out;
    for (const auto& v : s.slots()) out.push_back(v ? *v : std::nan(""));
    return out;
}

std::optional<MetricsPair> try_score(const Series& actual, std::span<const double> forecast) {
    try {
        if (actual.missing_count() == actual.size()) return std::nullopt;
        return score_observed(actual, forecast);
    } catch (const std::domain_error&) {
        return std::nullopt;  // MAPE undefined: every observed target is (near) zero
    }
}

json metrics_json(const std::optional<MetricsPair>& m) {
    if (!m) return nullptr;
    return {{"mae", m->mae}, {"mape", m->mape}};
}

/// Top-k records in ranking order, looked up by model id.
std::vector<BacktestRecord> ranked_records(const std::vector<BacktestRecord>& records,
                                           const std::vector<std::string>& ids) {
    std::vector<BacktestRecord> out;
    for (const auto& id : ids) {
        const auto it = std::find_if(records.begin(), records.end(),
                                     [&](const BacktestRecord& r) { return to_string(r.spec.id) == id; });
        if (it == records.end()) throw std::invalid_argument(fmt::format("ranked model {} has no backtest record", id));
        out.push_back(*it);
    }
    return out;
}

struct Finalized {
    std::vector<std::vector<double>> member_forecasts;  // original units
    std::vector<double> forecast;
    IntervalForecast intervals;
    double val_residual_std = 0.0;
};

/// Shared by the live run and log replay, so both produce the same bits:
/// refit each member's selected configuration on the scaled train+validation
/// input, combine under the decision, and attach intervals.
Finalized finalize(const std::vector<double>& cleaned, const SplitSpec& split, const AffineScaler& scaler,
                   const std::vector<BacktestRecord>& top, const EnsembleDecision& decision,
                   const EnsembleConfig& config, double level) {
    Finalized f;
    const auto scaled = scaler.transform(cleaned);
    std::vector<std::vector<double>> scaled_members;
    std::vector<std::vector<double>> val_members;
    for (const auto& r : top) {
        auto fc = fit_forecast(r.spec, scaled, split.test_horizon);
        for (double v : fc)
            if (!std::isfinite(v))
                throw ModelFailure(fmt::format("{} produced a non-finite forecast after refitting", to_string(r.spec.id)));
        f.member_forecasts.push_back(scaler.inverse(fc));
        scaled_members.push_back(std::move(fc));
        val_members.push_back(r.val_forecast);
    }
    f.forecast = combine(decision, scaled_members, scaler, config.rho);

    // Residual spread of the same combination on the validation segment.
    const auto val_combined = combine(decision, val_members, std::nullopt, config.rho);
    double ss = 0.0;
    for (std::size_t i = 0; i < val_combined.size(); ++i) {
        const double e = val_combined[i] - cleaned[split.train_len + i];
        ss += e * e;
    }
    f.val_residual_std = val_combined.empty() ? 0.0 : std::sqrt(ss / static_cast<double>(val_combined.size()));
    f.intervals = build_intervals(f.member_forecasts, f.forecast, f.val_residual_std, level);
    return f;
}

const std::vector<std::string>& plot_files() {
    static const std::vector<std::string> files = {"plots/overview.svg", "plots/decomposition.svg",
                                                   "plots/correlogram.svg", "plots/ensemble_forecast.svg"};
    return files;
}

PlotData make_plot_data(const std::vector<double>& cleaned, const TemporalProfile& profile, const ReportInputs& report,
                        const Finalized& fin, const Series& actual) {
    PlotData p;
    p.series = cleaned;
    p.decomposition = decompose(cleaned, profile.decomposition_period);
    p.correlogram = acf_pacf(cleaned, std::min(kCorrelogramLags, cleaned.size() - 1));
    for (const auto& m : report.members) p.member_names.emplace_back(to_string(m.spec.id));
    p.member_forecasts = fin.member_forecasts;
    p.intervals = fin.intervals;
    p.actual = with_nan(actual);
    return p;
}

json preprocess_context(const Series& input, const QualityDiagnostics& diag) {
    json stats;
    to_json(stats, diag.stats);
    const std::size_t n = std::min<std::size_t>(48, input.size());
    return {{"length", input.size()},
            {"statistics", stats},
            {"outlier_count", diag.outlier_indices.size()},
            {"head", slots_to_json(input.slice(0, n))},
            {"tail", slots_to_json(input.slice(input.size() - n, n))}};
}

}  // namespace

SliceRun run_slice(const Series& input, TestWindowGuard& test, std::size_t horizon, const RunConfig& config,
                   ChatTransport* transport, const std::string& title) {
    SliceRun run;
    WorkflowLog& log = run.log;
    const bool llm = config.advisor.mode == AdvisorMode::llm;
    if (llm && transport == nullptr) throw std::invalid_argument("llm advisor mode needs a transport");
    std::string stage = "diagnose";
    try {
        const SplitSpec split = default_split(input.size(), horizon);
        const auto diagnostics = diagnose(input, default_preprocess_policy());
        json diag_json;
        to_json(diag_json, diagnostics);
        log.append("diagnose", {{"start_index", input.start_index()},
                                {"input", slots_to_json(input)},
                                {"horizon", horizon},
                                {"split", {{"train", split.train_len}, {"val", split.val_len}, {"test", split.test_horizon}}},
                                {"diagnostics", diag_json}});

        stage = "preprocess";
        AdvisorDecision pre = advise_preprocess(diagnostics);
        if (llm) {
            pre = advise_via_llm({DecisionKind::preprocess, preprocess_prompt(preprocess_context(input, diagnostics)), pre,
                                  [](json& p) { return check_preprocess_payload(p); }},
                                 config.advisor, *transport);
        }
        const PolicyChoice choice = policy_from_decision(pre.payload);
        json policy_json;
        to_json(policy_json, choice.policy);
        log.append("preprocess", {{"advisor", to_json(pre)}, {"policy", policy_json}, {"notes", choice.notes}},
                   std::string(to_string(pre.source)));
        const std::vector<double> cleaned = apply_preprocessing(input, choice.policy).dense();
        const std::span<const double> train(cleaned.data(), split.train_len);
        const std::span<const double> val(cleaned.data() + split.train_len, split.val_len);

        stage = "profile";
        const TemporalProfile profile = build_profile(cleaned);
        json profile_json;
        to_json(profile_json, profile);
        log.append("profile", profile_json);

        stage = "select";
        AdvisorDecision sel = advise_models(profile, config.pool_size);
        if (llm) {
            const std::size_t n = config.pool_size;
            sel = advise_via_llm({DecisionKind::model_selection, model_selection_prompt(profile_json, n), sel,
                                  [n](json& p) { return check_model_payload(p, n); }},
                                 config.advisor, *transport);
        }
        const CandidatePool pool =
            sel.source == DecisionSource::llm ? pool_from_selection(sel.payload) : select_candidates(profile, config.pool_size);
        log.append("select", {{"advisor", to_json(sel)}, {"pool", selection_record(pool)}},
                   std::string(to_string(sel.source)));

        stage = "backtest";
        // Intermittent series keep their exact zeros: scale only, no centring.
        const AffineScaler scaler = AffineScaler::fit(train, profile.intermittency <= kIntermittencyThreshold);
        BacktestOptions opts;
        opts.configs_per_model = config.configs_per_model;
        opts.seed = config.seed;
        opts.workers = config.workers;
        opts.scaler = scaler;
        const auto records = backtest(pool, train, val, opts);
        const RankedModels ranked = rank_top_k(records, config.top_k);
        std::vector<std::string> ranked_ids;
        for (const auto& r : ranked.top_k) ranked_ids.emplace_back(to_string(r.spec.id));
        json scaler_json;
        to_json(scaler_json, scaler);
        json records_json = json::array();
        for (const auto& r : records) records_json.push_back(to_json(r, true));
        log.append("backtest", {{"scaler", scaler_json},
                                {"seed", config.seed},
                                {"configs_per_model", config.configs_per_model},
                                {"records", records_json},
                                {"ranked", ranked_ids}});

        stage = "ensemble";
        std::vector<std::vector<double>> val_forecasts;
        for (const auto& r : ranked.top_k) val_forecasts.push_back(r.val_forecast);
        const double disagreement = validation_disagreement(val_forecasts, val);
        const EnsembleDecision rules = decide(ranked, config.ensemble, disagreement);
        AdvisorDecision ens = advise_ensemble(ranked, config.ensemble, disagreement);
        if (llm) {
            json individual = json::object();
            json scores = json::object();
            for (std::size_t i = 0; i < ranked.top_k.size(); ++i) {
                const auto& r = ranked.top_k[i];
                individual[ranked_ids[i]] = {
                    {"validation_forecast", r.val_forecast}, {"val_mae", r.val_mae}, {"val_mape", r.val_mape}};
                scores[ranked_ids[i]] = rules.scores[i];
            }
            const json viz = {{"validation_disagreement", disagreement}, {"aggregated_scores", scores},
                              {"relative_gap", std::isinf(rules.gap) ? json("inf") : json(rules.gap)}};
            ens = advise_via_llm({DecisionKind::ensemble, ensemble_prompt(individual, viz), ens,
                                  [&ranked_ids](json& p) { return check_ensemble_payload(p, ranked_ids); }},
                                 config.advisor, *transport);
        }
        const EnsembleDecision decision =
            ens.source == DecisionSource::llm ? decision_from_wire(ens.payload, rules, config.ensemble) : rules;
        json ens_config;
        to_json(ens_config, config.ensemble);
        log.append("ensemble", {{"advisor", to_json(ens)}, {"decision", to_log_json(decision)}, {"config", ens_config}},
                   std::string(to_string(ens.source)));

        stage = "forecast";
        const Finalized fin =
            finalize(cleaned, split, scaler, ranked.top_k, decision, config.ensemble, config.interval_level);
        log.append("forecast", {{"forecast", fin.forecast},
                                {"lower", fin.intervals.lower},
                                {"upper", fin.intervals.upper},
                                {"level", fin.intervals.level},
                                {"member_forecasts", fin.member_forecasts},
                                {"val_residual_std", fin.val_residual_std}});

        stage = "score";
        const Series& actual = test.read(log);
        ReportInputs& rep = run.report;
        rep.title = title;
        rep.horizon = horizon;
        rep.split = split;
        rep.diagnostics = diagnostics;
        rep.preprocess_decision = to_json(pre);
        rep.preprocess_notes = choice.notes;
        rep.profile = profile;
        rep.pool = pool;
        rep.selection_source = std::string(to_string(sel.source));
        rep.records = records;
        json member_scores = json::array();
        for (std::size_t i = 0; i < ranked.top_k.size(); ++i) {
            const auto& r = ranked.top_k[i];
            const auto m = try_score(actual, fin.member_forecasts[i]);
            rep.members.push_back({r.spec, r.val_mae, r.val_mape, m});
            member_scores.push_back({{"model", ranked_ids[i]}, {"test", metrics_json(m)}});
        }
        rep.decision = decision;
        rep.decision_source = std::string(to_string(ens.source));
        rep.ensemble_test = try_score(actual, fin.forecast);
        rep.intervals = fin.intervals;
        rep.val_residual_std = fin.val_residual_std;
        rep.plot_files = plot_files();
        log.append("score", {{"actual", slots_to_json(actual)},
                             {"members", member_scores},
                             {"ensemble", metrics_json(rep.ensemble_test)}});

        stage = "report";
        rep.log_events = log.size() + 1;  // including the report event below
        log.append("report", {{"title", title}, {"sections", report_sections()}, {"plots", plot_files()},
                              {"files", {"report.md", "metrics.csv", "log.ndjson"}}});
        run.plots = make_plot_data(cleaned, profile, rep, fin, actual);
        run.forecast = fin.forecast;
    } catch (const std::exception& e) {
        log.append("failed", {{"stage", stage}, {"error", e.what()}});
        throw SliceError(fmt::format("{} stage failed: {}", stage, e.what()), log);
    }
    return run;
}

SliceRun rebuild_from_log(const WorkflowLog& log) {
    const auto need = [&log](const std::string& stage) {
        auto e = log.find(stage);
        if (!e) throw std::invalid_argument(fmt::format("log has no '{}' event", stage));
        return *e;
    };
    const auto diag_e = need("diagnose");
    const auto pre_e = need("preprocess");
    const auto sel_e = need("select");
    const auto bt_e = need("backtest");
    const auto ens_e = need("ensemble");
    const auto fc_e = need("forecast");
    const auto score_e = need("score");
    const auto report_e = need("report");

    const auto& dd = diag_e.decision;
    const Series input = series_from_json(dd.at("input"), dd.at("start_index").get<long>());
    const std::size_t horizon = dd.at("horizon").get<std::size_t>();
    const SplitSpec split{dd.at("split").at("train").get<std::size_t>(), dd.at("split").at("val").get<std::size_t>(),
                          dd.at("split").at("test").get<std::size_t>()};
    if (split.input_length() != input.size() || split.test_horizon != horizon)
        throw std::invalid_argument("logged split does not match the logged input window");

    PreprocessPolicy policy;
    from_json(pre_e.decision.at("policy"), policy);
    const std::vector<double> cleaned = apply_preprocessing(input, policy).dense();
    const TemporalProfile profile = build_profile(cleaned);

    AffineScaler scaler;
    from_json(bt_e.decision.at("scaler"), scaler);
    std::vector<BacktestRecord> records;
    for (const auto& r : bt_e.decision.at("records")) records.push_back(backtest_record_from_json(r));
    const auto ids = bt_e.decision.at("ranked").get<std::vector<std::string>>();
    const auto top = ranked_records(records, ids);

    const EnsembleDecision decision = decision_from_log_json(ens_e.decision.at("decision"));
    EnsembleConfig ens_config;
    from_json(ens_e.decision.at("config"), ens_config);
    const double level = fc_e.decision.at("level").get<double>();
    const Finalized fin = finalize(cleaned, split, scaler, top, decision, ens_config, level);

    const Series actual = series_from_json(score_e.decision.at("actual"), input.start_index() + static_cast<long>(input.size()));

    SliceRun run;
    run.log = log;
    ReportInputs& rep = run.report;
    rep.title = report_e.decision.at("title").get<std::string>();
    rep.horizon = horizon;
    rep.split = split;
    rep.diagnostics = diagnose(input, default_preprocess_policy());
    rep.preprocess_decision = pre_e.decision.at("advisor");
    rep.preprocess_notes = pre_e.decision.at("notes").get<std::vector<std::string>>();
    rep.profile = profile;
    rep.pool = pool_from_selection(sel_e.decision.at("pool"));
    rep.selection_source = sel_e.provenance;
    rep.records = records;
    for (std::size_t i = 0; i < top.size(); ++i)
        rep.members.push_back({top[i].spec, top[i].val_mae, top[i].val_mape, try_score(actual, fin.member_forecasts[i])});
    rep.decision = decision;
    rep.decision_source = ens_e.provenance;
    rep.ensemble_test = try_score(actual, fin.forecast);
    rep.intervals = fin.intervals;
    rep.val_residual_std = fin.val_residual_std;
    rep.plot_files = report_e.decision.at("plots").get<std::vector<std::string>>();
    rep.log_events = report_e.seq;
    run.plots = make_plot_data(cleaned, profile, rep, fin, actual);
    run.forecast = fin.forecast;
    return run;
}

std::vector<double> logged_forecast(const WorkflowLog& log) {
    const auto e = log.find("forecast");
    if (!e) throw std::invalid_argument("log has no 'forecast' event");
    return e->decision.at("forecast").get<std::vector<double>>();
}

namespace {

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error(fmt::format("cannot write '{}'", path.string()));
    out << content;
    if (!out) throw std::runtime_error(fmt::format("write to '{}' failed", path.string()));
}

}  // namespace

void write_slice_outputs(const fs::path& dir, const SliceRun& run) {
    fs::create_directories(dir / "plots");
    write_file(dir / "report.md", render_report(run.report));
    write_file(dir / "metrics.csv", metrics_csv(run.report));
    write_file(dir / "log.ndjson", run.log.to_ndjson());
    for (const auto& [name, svg] : render_plots(run.plots)) write_file(dir / "plots" / name, svg);
    fs::remove(dir / "error.txt");
}

// --- aggregation -----------------------------------------------------------

void aggregate(RunSummary& summary) {
    summary.aggregates.clear();
    summary.average.reset();
    std::vector<std::size_t> horizons;
    for (const auto& s : summary.slices)
        if (std::find(horizons.begin(), horizons.end(), s.horizon) == horizons.end()) horizons.push_back(s.horizon);
    for (std::size_t h : horizons) {
        HorizonAggregate a;
        a.horizon = h;
        double mae_sum = 0.0;
        double mape_sum = 0.0;
        for (const auto& s : summary.slices) {
            if (s.horizon != h) continue;
            if (s.ok && s.ensemble_test) {
                ++a.included;
                mae_sum += s.ensemble_test->mae;
                mape_sum += s.ensemble_test->mape;
            } else {
                ++a.failed;
            }
        }
        if (a.included > 0) {
            a.mae = mae_sum / static_cast<double>(a.included);
            a.mape = mape_sum / static_cast<double>(a.included);
        } else {
            a.mae = a.mape = std::nan("");
        }
        summary.aggregates.push_back(a);
    }
    // The all-horizon row averages the per-horizon values directly.
    HorizonAggregate avg;
    std::size_t used = 0;
    for (const auto& a : summary.aggregates) {
        avg.failed += a.failed;
        avg.included += a.included;
        if (a.included == 0) continue;
        avg.mae += a.mae;
        avg.mape += a.mape;
        ++used;
    }
    if (used > 0) {
        avg.mae /= static_cast<double>(used);
        avg.mape /= static_cast<double>(used);
        summary.average = avg;
    }
}

namespace {

std::string num(double v) { return std::isfinite(v) ? fmt::format("{:.17g}", v) : std::string(); }

}  // namespace

std::string aggregate_csv(const RunSummary& summary) {
    std::string out = "horizon,included,failed,mae,mape\n";
    for (const auto& a : summary.aggregates)
        out += fmt::format("{},{},{},{},{}\n", a.horizon, a.included, a.failed, num(a.mae), num(a.mape));
    if (summary.average)
        out += fmt::format("avg,{},{},{},{}\n", summary.average->included, summary.average->failed,
                           num(summary.average->mae), num(summary.average->mape));
    return out;
}

std::string slices_csv(const RunSummary& summary) {
    std::string out = "horizon,slice,start,status,strategy,members,ensemble_mae,ensemble_mape,error\n";
    for (const auto& s : summary.slices) {
        std::string members;
        for (const auto& m : s.members) members += (members.empty() ? "" : ";") + std::string(to_string(m.spec.id));
        std::string error = s.error;
        std::replace(error.begin(), error.end(), '"', '\'');
        std::replace(error.begin(), error.end(), '\n', ' ');
        out += fmt::format("{},{},{},{},{},{},{},{},\"{}\"\n", s.horizon, s.index, s.start, s.ok ? "ok" : "failed",
                           s.strategy, members, s.ensemble_test ? num(s.ensemble_test->mae) : "",
                           s.ensemble_test ? num(s.ensemble_test->mape) : "", error);
    }
    return out;
}

std::string slice_dir_name(std::size_t index) { return fmt::format("slice_{:02}", index); }

RunSummary run_pipeline(const RunConfig& config, ChatTransport* transport) {
    config.validate();
    if (config.input_path.empty()) throw std::invalid_argument("no input file given");
    return run_pipeline(ingest_csv(config.input_path, config.column), config, transport);
}

RunSummary run_pipeline(const Series& series, const RunConfig& config, ChatTransport* transport) {
    config.validate();
    RunSummary summary;
    struct Job {
        std::size_t horizon;
        SliceWindow window;
    };
    std::vector<Job> jobs;
    for (std::size_t h : config.horizons) {
        auto plan = make_slices(series, config.input_length, config.slice_count, h);
        for (auto& w : plan.warnings) summary.warnings.push_back(std::move(w));
        for (auto& w : plan.windows) jobs.push_back({h, std::move(w)});
    }

    const fs::path out_dir(config.out_dir);
    fs::create_directories(out_dir);
    summary.slices.resize(jobs.size());

    // Slices run in parallel in rules mode; a shared service transport is used
    // from one slice at a time. Backtests inside a slice get the spare workers.
    const std::size_t slice_workers =
        transport != nullptr ? 1 : std::max<std::size_t>(1, std::min(config.workers, jobs.size()));
    RunConfig inner = config;
    inner.workers = slice_workers > 1 ? 1 : config.workers;

    std::atomic<std::size_t> next{0};
    const auto worker = [&] {
        for (std::size_t t = next++; t < jobs.size(); t = next++) {
            const auto& job = jobs[t];
            SliceResult& res = summary.slices[t];
            res.index = job.window.index;
            res.horizon = job.horizon;
            res.start = job.window.start;
            const fs::path dir = out_dir / fmt::format("h{}", job.horizon) / slice_dir_name(job.window.index);
            try {
                TestWindowGuard guard(job.window.test);
                const std::string title = fmt::format("H={} slice {} (start {})", job.horizon, job.window.index, job.window.start);
                SliceRun run = run_slice(job.window.input, guard, job.horizon, inner, transport, title);
                write_slice_outputs(dir, run);
                res.ok = true;
                res.members = run.report.members;
                res.ensemble_test = run.report.ensemble_test;
                res.strategy = std::string(to_wire(run.report.decision.strategy));
            } catch (const SliceError& e) {
                res.ok = false;
                res.error = e.what();
                fs::create_directories(dir);
                write_file(dir / "log.ndjson", e.log().to_ndjson());
                write_file(dir / "error.txt", res.error + "\n");
            } catch (const std::exception& e) {
                res.ok = false;
                res.error = e.what();
                fs::create_directories(dir);
                write_file(dir / "error.txt", res.error + "\n");
            }
        }
    };
    if (slice_workers == 1) {
        worker();
    } else {
        std::vector<std::thread> threads;
        for (std::size_t w = 0; w < slice_workers; ++w) threads.emplace_back(worker);
        for (auto& th : threads) th.join();
    }

    aggregate(summary);
    json cfg;
    to_json(cfg, config);
    write_file(out_dir / "config.json", cfg.dump(2) + "\n");
    write_file(out_dir / "aggregate.csv", aggregate_csv(summary));
    write_file(out_dir / "slices.csv", slices_csv(summary));
    return summary;
}

}  // namespace tsci
