#pragma once

#include "tsci/advisor.hpp"
#include "tsci/ensemble.hpp"
#include "tsci/reporter.hpp"
#include "tsci/series.hpp"

#include <json.hpp>

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <istream>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace tsci {

struct RunConfig {
    std::string input_path;
    std::string column = "value";
    std::size_t slice_count = 25;
    std::size_t input_length = 512;
    std::vector<std::size_t> horizons{96, 192, 336, 720};
    std::uint64_t seed = 42;
    std::size_t workers = 1;
    std::size_t pool_size = kDefaultPoolSize;
    std::size_t configs_per_model = kDefaultConfigsPerModel;
    std::size_t top_k = kDefaultTopK;
    double interval_level = 95.0;
    AdvisorBackend advisor;
    EnsembleConfig ensemble;
    std::string out_dir = "out";

    /// T >= 64, horizons >= 1, slice_count >= 1, sane pool/top-k/worker counts.
    void validate() const;
};

void to_json(nlohmann::json& j, const RunConfig& c);
/// Missing keys keep their current values, so a file only overrides what it names.
void from_json(const nlohmann::json& j, RunConfig& c);

/// CSV with a header row. `column` is a header name (or a 0-based index when no
/// header matches). Empty cells become missing; any other unparseable or
/// non-finite cell throws std::runtime_error naming the file line.
Series parse_csv(std::istream& in, const std::string& column, const std::string& source = "<stream>");
Series ingest_csv(const std::string& path, const std::string& column);

struct SliceWindow {
    std::size_t index = 0;
    std::size_t start = 0;
    Series input;  // first T points
    Series test;   // last H points
};

struct SlicePlan {
    std::vector<SliceWindow> windows;
    std::vector<std::string> warnings;
};

/// Evenly spaced windows of length T + H: start_i = round(i (n - (T+H)) / (S - 1)).
/// Too few points for S slices reduces S to n - (T+H) + 1 with a warning; a
/// series shorter than T + H throws std::invalid_argument.
SlicePlan make_slices(const Series& series, std::size_t input_length, std::size_t slice_count, std::size_t horizon);

/// Hands out the test window exactly once, and only after the ensemble decision
/// is in the log. The read itself is logged.
class TestWindowGuard {
public:
    explicit TestWindowGuard(Series test) : test_(std::move(test)) {}
    const Series& read(WorkflowLog& log);
    bool consumed() const noexcept { return consumed_; }
    std::size_t size() const noexcept { return test_.size(); }

private:
    Series test_;
    bool consumed_ = false;
};

/// Everything one slice produces.
struct SliceRun {
    ReportInputs report;
    PlotData plots;
    WorkflowLog log;
    std::vector<double> forecast;  // ensemble, original units
};

/// Raised when a slice cannot be completed; carries the log written so far
/// (ending in a "failed" event) so the failure is documented.
class SliceError : public std::runtime_error {
public:
    SliceError(const std::string& what, WorkflowLog log) : std::runtime_error(what), log_(std::move(log)) {}
    const WorkflowLog& log() const noexcept { return log_; }

private:
    WorkflowLog log_;
};

/// diagnose -> preprocess -> profile -> select -> backtest -> ensemble ->
/// forecast -> (test read) -> score -> report. `transport` is used in llm
/// advisor mode. Throws SliceError.
SliceRun run_slice(const Series& input, TestWindowGuard& test, std::size_t horizon, const RunConfig& config,
                   ChatTransport* transport = nullptr, const std::string& title = "slice");

/// Rebuilds a slice from its log alone: the logged policy, scaler, members and
/// ensemble decision are re-applied to the logged input window.
SliceRun rebuild_from_log(const WorkflowLog& log);

/// The ensemble forecast recorded in a log's forecast event.
std::vector<double> logged_forecast(const WorkflowLog& log);

/// report.md, metrics.csv, plots/*.svg and log.ndjson under `dir`.
void write_slice_outputs(const std::filesystem::path& dir, const SliceRun& run);

struct SliceResult {
    std::size_t index = 0;
    std::size_t horizon = 0;
    std::size_t start = 0;
    bool ok = false;
    std::string error;
    std::vector<MemberOutcome> members;
    std::optional<MetricsPair> ensemble_test;
    std::string strategy;
};

struct HorizonAggregate {
    std::size_t horizon = 0;  // 0 marks the all-horizon average
    std::size_t included = 0;
    std::size_t failed = 0;
    double mae = 0.0;
    double mape = 0.0;
};

struct RunSummary {
    std::vector<SliceResult> slices;
    std::vector<HorizonAggregate> aggregates;
    std::optional<HorizonAggregate> average;
    std::vector<std::string> warnings;
};

/// Per-horizon means over slices with test metrics, plus the direct mean of the
/// per-horizon values.
void aggregate(RunSummary& summary);

std::string aggregate_csv(const RunSummary& summary);
std::string slices_csv(const RunSummary& summary);

/// Ingests config.input_path, runs every horizon x slice and writes all outputs
/// under config.out_dir.
RunSummary run_pipeline(const RunConfig& config, ChatTransport* transport = nullptr);
/// Same on an already loaded series.
RunSummary run_pipeline(const Series& series, const RunConfig& config, ChatTransport* transport = nullptr);

std::string slice_dir_name(std::size_t index);

}  // namespace tsci
