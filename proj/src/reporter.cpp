#include "tsci/reporter.hpp"

#include "tsci/stats.hpp"

#include <boost/math/distributions/normal.hpp>
#include <fmt/format.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace tsci {

// --- intervals -------------------------------------------------------------

IntervalForecast build_intervals(const std::vector<std::vector<double>>& members, std::span<const double> point,
                                 double val_residual_std, double level) {
    if (members.empty()) throw std::invalid_argument("intervals need at least one member forecast");
    if (!(val_residual_std >= 0.0) || !std::isfinite(val_residual_std))
        throw std::invalid_argument("residual standard deviation must be finite and non-negative");
    if (!(level > 0.0 && level < 100.0)) throw std::invalid_argument("interval level must lie in (0, 100)");
    const std::size_t h = point.size();
    for (const auto& m : members)
        if (m.size() != h) throw std::invalid_argument("member forecasts must match the point forecast length");

    const boost::math::normal_distribution<double> normal;
    const double z = boost::math::quantile(normal, 0.5 + level / 200.0);
    IntervalForecast out;
    out.level = level;
    out.point.assign(point.begin(), point.end());
    out.lower.resize(h);
    out.upper.resize(h);
    std::vector<double> column(members.size());
    for (std::size_t t = 0; t < h; ++t) {
        for (std::size_t i = 0; i < members.size(); ++i) column[i] = members[i][t];
        const double half = z * std::sqrt(stats::variance(column) + val_residual_std * val_residual_std);
        out.lower[t] = point[t] - half;
        out.upper[t] = point[t] + half;
    }
    return out;
}

void to_json(nlohmann::json& j, const IntervalForecast& f) {
    j = {{"level", f.level}, {"point", f.point}, {"lower", f.lower}, {"upper", f.upper}};
}

// --- workflow log ----------------------------------------------------------

namespace {

std::string utc_now() {
    const auto now = std::chrono::system_clock::now();
    const auto secs = std::chrono::time_point_cast<std::chrono::seconds>(now);
    const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(now - secs).count();
    const std::time_t t = std::chrono::system_clock::to_time_t(secs);
    std::tm tm{};
    gmtime_r(&t, &tm);
    return fmt::format("{:04}-{:02}-{:02}T{:02}:{:02}:{:02}.{:03}Z", tm.tm_year + 1900, tm.tm_mon + 1, tm.tm_mday,
                       tm.tm_hour, tm.tm_min, tm.tm_sec, ms);
}

}  // namespace

WorkflowLog::WorkflowLog(const WorkflowLog& other) : events_(other.events()) {}

WorkflowLog& WorkflowLog::operator=(const WorkflowLog& other) {
    if (this != &other) {
        auto copy = other.events();
        std::lock_guard lock(mutex_);
        events_ = std::move(copy);
    }
    return *this;
}

std::size_t WorkflowLog::append(const std::string& stage, nlohmann::json decision, const std::string& provenance) {
    std::lock_guard lock(mutex_);
    const std::size_t seq = events_.empty() ? 1 : events_.back().seq + 1;
    events_.push_back({seq, stage, utc_now(), provenance, std::move(decision)});
    return seq;
}

void WorkflowLog::log_event(const std::string& stage, nlohmann::json decision, std::size_t seq,
                            const std::string& provenance) {
    std::lock_guard lock(mutex_);
    if (!events_.empty() && seq <= events_.back().seq)
        throw std::invalid_argument(
            fmt::format("log sequence regression: {} after {} (stage {})", seq, events_.back().seq, stage));
    events_.push_back({seq, stage, utc_now(), provenance, std::move(decision)});
}

std::vector<LogEvent> WorkflowLog::events() const {
    std::lock_guard lock(mutex_);
    return events_;
}

std::size_t WorkflowLog::size() const {
    std::lock_guard lock(mutex_);
    return events_.size();
}

std::optional<LogEvent> WorkflowLog::find(const std::string& stage) const {
    std::lock_guard lock(mutex_);
    for (const auto& e : events_)
        if (e.stage == stage) return e;
    return std::nullopt;
}

std::string WorkflowLog::to_ndjson() const {
    std::string out;
    for (const auto& e : events()) {
        const nlohmann::json line = {{"schema", kLogSchema},
                                     {"seq", e.seq},
                                     {"stage", e.stage},
                                     {"timestamp", e.timestamp},
                                     {"provenance", e.provenance},
                                     {"decision", e.decision}};
        out += line.dump();
        out += '\n';
    }
    return out;
}

WorkflowLog WorkflowLog::from_ndjson(const std::string& text) {
    WorkflowLog log;
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto j = nlohmann::json::parse(line);
        if (j.value("schema", "") != kLogSchema)
            throw std::invalid_argument(fmt::format("log line {}: unsupported schema", line_no));
        LogEvent e{j.at("seq").get<std::size_t>(), j.at("stage").get<std::string>(), j.at("timestamp").get<std::string>(),
                   j.at("provenance").get<std::string>(), j.at("decision")};
        if (!log.events_.empty() && e.seq <= log.events_.back().seq)
            throw std::invalid_argument(fmt::format("log line {}: sequence regression", line_no));
        log.events_.push_back(std::move(e));
    }
    return log;
}

// --- report ----------------------------------------------------------------

const std::vector<std::string>& report_sections() {
    static const std::vector<std::string> sections{"1. Forecast", "2. Performance Summary", "3. Interpretability",
                                                   "4. Visualizations", "5. Workflow Documentation"};
    return sections;
}

namespace {

std::string sig4(double v) {
    if (std::isnan(v)) return "n/a";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    return fmt::format("{:.4g}", v);
}

std::string params_text(const Hyperparameters& h) {
    std::string out;
    for (const auto& [name, value] : h) {
        if (!out.empty()) out += ", ";
        out += name + "=" + to_json_value(value).dump();
    }
    return out.empty() ? "-" : out;
}

std::string test_cell(const std::optional<MetricsPair>& m, bool mape) {
    if (!m) return "n/a";
    return sig4(mape ? m->mape : m->mae);
}

}  // namespace

std::string render_report(const ReportInputs& in) {
    const auto& sec = report_sections();
    std::string md;
    const auto line = [&md](const std::string& s = {}) {
        md += s;
        md += '\n';
    };

    line(fmt::format("# Forecast Report: {}", in.title));
    line();
    line(fmt::format("Input window {} points (train {}, validation {}), forecast horizon {}.", in.split.input_length(),
                     in.split.train_len, in.split.val_len, in.horizon));
    line();

    // 1. Forecast
    line("## " + sec[0]);
    line();
    line(fmt::format("Final forecast from the `{}` ensemble over {} model(s), with {}% intervals "
                     "(member spread plus validation residual spread, Gaussian quantile).",
                     to_wire(in.decision.strategy), in.decision.members.size(), sig4(in.intervals.level)));
    line();
    line("| step | forecast | lower | upper |");
    line("|---:|---:|---:|---:|");
    for (std::size_t t = 0; t < in.intervals.point.size(); ++t)
        line(fmt::format("| {} | {} | {} | {} |", t + 1, sig4(in.intervals.point[t]), sig4(in.intervals.lower[t]),
                         sig4(in.intervals.upper[t])));
    line();

    // 2. Performance Summary
    line("## " + sec[1]);
    line();
    line("Validation metrics select and rank the models; test metrics are computed once, after the ensemble "
         "decision was fixed. MAPE is in percent.");
    line();
    line("| model | hyperparameters | val MAE | val MAPE | test MAE | test MAPE |");
    line("|---|---|---:|---:|---:|---:|");
    for (const auto& m : in.members)
        line(fmt::format("| {} | {} | {} | {} | {} | {} |", to_string(m.spec.id), params_text(m.spec.params),
                         sig4(m.val_mae), sig4(m.val_mape), test_cell(m.test, false), test_cell(m.test, true)));
    line(fmt::format("| **ensemble** ({}) | - | - | - | {} | {} |", to_wire(in.decision.strategy),
                     test_cell(in.ensemble_test, false), test_cell(in.ensemble_test, true)));
    line();
    std::size_t ok = 0;
    std::vector<std::string> failed;
    for (const auto& r : in.records) {
        if (r.status == BacktestStatus::ok) ++ok;
        else failed.emplace_back(to_string(r.spec.id));
    }
    line(fmt::format("Backtesting evaluated {} candidate model(s); {} produced usable validation forecasts.",
                     in.records.size(), ok));
    if (!failed.empty()) {
        std::string list;
        for (const auto& f : failed) list += (list.empty() ? "" : ", ") + f;
        line(fmt::format("Excluded after every configuration failed: {}.", list));
    }
    line();

    // 3. Interpretability
    line("## " + sec[2]);
    line();
    const auto& st = in.diagnostics.stats;
    line("### Data quality");
    line();
    line(fmt::format("- {} observations, {} missing ({}%), {} flagged outliers; quality score {}.", st.length,
                     st.missing_count, sig4(100.0 * st.missing_fraction()), in.diagnostics.outlier_indices.size(),
                     sig4(in.diagnostics.quality_score)));
    line(fmt::format("- Mean {}, std {}, range [{}, {}], skewness {}, excess kurtosis {}, trend {}.", sig4(st.mean),
                     sig4(st.std), sig4(st.min), sig4(st.max), sig4(st.skewness), sig4(st.excess_kurtosis),
                     to_string(st.trend)));
    if (in.preprocess_decision.contains("payload")) {
        const auto& rs = in.preprocess_decision.at("payload").at("recommended_strategies");
        line(fmt::format("- Preprocessing ({}): missing values `{}`, outlier detection `{}`, outlier handling `{}`.",
                         in.preprocess_decision.value("source", "rules"), rs.value("missing_value_strategy", ""),
                         rs.value("outlier_detect_strategy", ""), rs.value("outlier_handle_strategy", "")));
    }
    for (const auto& note : in.preprocess_notes) line("- Note: " + note);
    line();
    line("### Temporal profile");
    line();
    const auto& p = in.profile;
    line(fmt::format("- Trend: {} (strength {}).", to_string(p.trend.label), sig4(p.trend.strength)));
    if (p.seasonality.detected)
        line(fmt::format("- Seasonality: period {} (strength {}).", p.seasonality.period, sig4(p.seasonality.strength)));
    else
        line(fmt::format("- Seasonality: none detected (strength {} at period {}).", sig4(p.seasonality.strength),
                         p.decomposition_period));
    line(fmt::format("- Stationarity: ADF statistic {} vs critical value {} with {} lag(s): {}.",
                     sig4(p.stationarity.statistic), sig4(p.stationarity.critical_value), p.stationarity.lags,
                     p.stationarity.is_stationary ? "stationary" : "non-stationary"));
    line(fmt::format("- Intermittency (share of zeros): {}.", sig4(p.intermittency)));
    line();
    line(fmt::format("### Model selection ({})", in.selection_source));
    line();
    for (const auto& c : in.pool.candidates) line(fmt::format("- `{}`: {}", to_string(c.model), c.rationale));
    line();
    line(fmt::format("### Ensemble decision ({})", in.decision_source));
    line();
    line(fmt::format("- Strategy: `{}`; confidence {}.", to_wire(in.decision.strategy), in.decision.confidence));
    if (in.decision.strategy == EnsembleStrategy::single_best)
        line(fmt::format("- Selected model: `{}` with relative score gap {}.", in.decision.selected_model,
                         sig4(in.decision.gap)));
    else
        line(fmt::format("- Relative score gap {}; validation disagreement {}.", sig4(in.decision.gap),
                         sig4(in.decision.disagreement)));
    std::string weights;
    for (std::size_t i = 0; i < in.decision.members.size(); ++i)
        weights += fmt::format("{}{} = {}", i == 0 ? "" : ", ", in.decision.members[i], sig4(in.decision.weights.at(i)));
    line("- Weights: " + weights + ".");
    line("- Reasoning: " + in.decision.rationale);
    line(fmt::format("- Validation residual standard deviation of the combination: {}.", sig4(in.val_residual_std)));
    line();

    // 4. Visualizations
    line("## " + sec[3]);
    line();
    for (const auto& f : in.plot_files) {
        auto stem = f.substr(f.find_last_of('/') + 1);
        stem = stem.substr(0, stem.find('.'));
        line(fmt::format("![{}]({})", stem, f));
        line();
    }

    // 5. Workflow Documentation
    line("## " + sec[4]);
    line();
    line(fmt::format("Every decision is recorded in `log.ndjson` ({} events, one JSON object per line with stage, "
                     "sequence number, timestamp, provenance and payload). Re-running `report` on this directory "
                     "replays the logged policies and reproduces the forecast exactly.",
                     in.log_events));
    line();
    line("| stage | provenance |");
    line("|---|---|");
    line(fmt::format("| preprocess | {} |", in.preprocess_decision.value("source", "rules")));
    line(fmt::format("| select | {} |", in.selection_source));
    line(fmt::format("| ensemble | {} |", in.decision_source));
    return md;
}

namespace {

std::string csv_quote(const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

std::string csv_num(double v) { return fmt::format("{:.17g}", v); }

}  // namespace

std::string metrics_csv(const ReportInputs& in) {
    std::string out = "model_id,params,val_mae,val_mape,test_mae,test_mape\n";
    for (const auto& m : in.members) {
        out += fmt::format("{},{},{},{},{},{}\n", to_string(m.spec.id),
                           csv_quote(hyperparameters_to_json(m.spec.params).dump()), csv_num(m.val_mae),
                           csv_num(m.val_mape), m.test ? csv_num(m.test->mae) : "", m.test ? csv_num(m.test->mape) : "");
    }
    out += fmt::format("ensemble,{},,,{},{}\n", csv_quote(std::string(to_wire(in.decision.strategy))),
                       in.ensemble_test ? csv_num(in.ensemble_test->mae) : "",
                       in.ensemble_test ? csv_num(in.ensemble_test->mape) : "");
    return out;
}

}  // namespace tsci
