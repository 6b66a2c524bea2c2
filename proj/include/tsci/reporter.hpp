#pragma once

#include "tsci/advisor.hpp"
#include "tsci/ensemble.hpp"
#include "tsci/planner.hpp"
#include "tsci/preprocess.hpp"
#include "tsci/profile.hpp"
#include "tsci/series.hpp"

#include <json.hpp>

#include <cstddef>
#include <map>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace tsci {

// --- intervals -------------------------------------------------------------

struct IntervalForecast {
    std::vector<double> point;
    std::vector<double> lower;
    std::vector<double> upper;
    double level = 95.0;  // percent
};

/// half-width_h = z(level) * sqrt(var_h(members) + residual_std^2), with the
/// population variance across members at each step.
IntervalForecast build_intervals(const std::vector<std::vector<double>>& members, std::span<const double> point,
                                 double val_residual_std, double level = 95.0);

void to_json(nlohmann::json& j, const IntervalForecast& f);

// --- workflow log ----------------------------------------------------------

inline constexpr const char* kLogSchema = "tsci.workflow-log/1";

struct LogEvent {
    std::size_t seq = 0;
    std::string stage;
    std::string timestamp;   // UTC, ISO 8601
    std::string provenance;  // rules / llm / llm_fallback / pipeline
    nlohmann::json decision;
};

/// Append-only decision log. Sequence numbers start at 1 and strictly increase;
/// appends from concurrent tasks are serialised at the sink.
class WorkflowLog {
public:
    WorkflowLog() = default;
    WorkflowLog(const WorkflowLog& other);
    WorkflowLog& operator=(const WorkflowLog& other);

    /// Assigns the next sequence number.
    std::size_t append(const std::string& stage, nlohmann::json decision, const std::string& provenance = "pipeline");
    /// Explicit sequence number; throws std::invalid_argument on regression.
    void log_event(const std::string& stage, nlohmann::json decision, std::size_t seq,
                   const std::string& provenance = "pipeline");

    std::vector<LogEvent> events() const;
    std::size_t size() const;
    /// First event of `stage`, if any.
    std::optional<LogEvent> find(const std::string& stage) const;
    bool contains(const std::string& stage) const { return find(stage).has_value(); }

    std::string to_ndjson() const;
    static WorkflowLog from_ndjson(const std::string& text);

private:
    mutable std::mutex mutex_;
    std::vector<LogEvent> events_;
};

// --- report ----------------------------------------------------------------

struct MemberOutcome {
    ModelSpec spec;
    double val_mae = 0.0;
    double val_mape = 0.0;
    std::optional<MetricsPair> test;
};

/// Everything the Markdown report is rendered from.
struct ReportInputs {
    std::string title;
    std::size_t horizon = 0;
    SplitSpec split;
    QualityDiagnostics diagnostics;
    nlohmann::json preprocess_decision;  // AdvisorDecision JSON
    std::vector<std::string> preprocess_notes;
    TemporalProfile profile;
    CandidatePool pool;
    std::string selection_source;
    std::vector<BacktestRecord> records;
    std::vector<MemberOutcome> members;  // ranked top-k
    EnsembleDecision decision;
    std::string decision_source;
    std::optional<MetricsPair> ensemble_test;
    IntervalForecast intervals;
    double val_residual_std = 0.0;
    std::vector<std::string> plot_files;  // relative paths
    std::size_t log_events = 0;
};

/// Section headings, in their fixed order.
const std::vector<std::string>& report_sections();

/// Deterministic Markdown (no timestamps); metrics to 4 significant figures.
std::string render_report(const ReportInputs& in);

/// model_id, params, val_mae, val_mape, test_mae, test_mape; one row per member
/// plus an "ensemble" row.
std::string metrics_csv(const ReportInputs& in);

// --- plots -----------------------------------------------------------------

inline constexpr const char* kPrimaryColor = "#c83e4b";
inline constexpr std::size_t kOverviewWindow = 24;
inline constexpr std::size_t kCorrelogramLags = 40;

struct PlotData {
    std::vector<double> series;  // cleaned input window
    Decomposition decomposition;
    Correlogram correlogram;
    std::vector<std::string> member_names;
    std::vector<std::vector<double>> member_forecasts;
    IntervalForecast intervals;
    std::vector<double> actual;  // test window, may be empty
};

/// overview.svg, decomposition.svg, correlogram.svg, ensemble_forecast.svg.
/// Every declared line series is drawn as exactly one <path>.
std::map<std::string, std::string> render_plots(const PlotData& data);

}  // namespace tsci
