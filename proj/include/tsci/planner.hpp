#pragma once

#include "tsci/models.hpp"
#include "tsci/scaler.hpp"
#include "tsci/profile.hpp"
#include "tsci/series.hpp"

#include <json.hpp>

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace tsci {

struct Candidate {
    ModelId model = ModelId::random_walk;
    std::string rationale;
    HyperparameterSpace space;
};

/// Ordered candidate models, each with the rule (or advisor) rationale that
/// put it there and the hyperparameter space to search.
struct CandidatePool {
    std::vector<Candidate> candidates;

    std::size_t size() const noexcept { return candidates.size(); }
    /// Distinct models, non-empty rationales, non-empty spaces.
    void validate() const;
};

inline constexpr std::size_t kDefaultPoolSize = 5;
inline constexpr std::size_t kDefaultConfigsPerModel = 10;
inline constexpr std::size_t kDefaultTopK = 3;

/// Rule-table pool of exactly `n_p` models with default spaces (the exp_smoothing
/// space gains its seasonal branch when the profile found a period).
CandidatePool select_candidates(const TemporalProfile& profile, std::size_t n_p);

/// min(n, |space|) distinct configurations: the full enumeration when it fits,
/// otherwise a seeded uniform sample without replacement, kept in enumeration order.
std::vector<Hyperparameters> sample_configs(const HyperparameterSpace& space, std::size_t n, std::uint64_t seed);
/// Same as sample_configs but returns enumeration indices.
std::vector<std::size_t> sample_config_indices(const HyperparameterSpace& space, std::size_t n, std::uint64_t seed);

enum class BacktestStatus { ok, failed };
std::string_view to_string(BacktestStatus s) noexcept;

struct ConfigTrial {
    std::size_t config_index = 0;  // position in the space's enumeration
    Hyperparameters params;
    bool ok = false;
    double val_mae = 0.0;
    double val_mape = 0.0;
    std::string error;
};

struct BacktestRecord {
    ModelSpec spec;
    double val_mape = 0.0;
    double val_mae = 0.0;
    BacktestStatus status = BacktestStatus::failed;
    std::string rationale;
    std::size_t config_index = 0;
    /// Forecast of the validation segment under the selected configuration,
    /// in original units.
    std::vector<double> val_forecast;
    std::vector<ConfigTrial> trials;
};

struct BacktestOptions {
    std::size_t configs_per_model = kDefaultConfigsPerModel;
    std::uint64_t seed = 42;
    std::size_t workers = 1;
    /// When set, models are fitted on the scaled training data and their
    /// forecasts inverted before scoring, so metrics stay in original units.
    std::optional<AffineScaler> scaler;
};

/// Hyperparameter search per candidate: every sampled configuration is fitted on
/// `train` and scored on the `val`-length forecast. The kept configuration
/// minimises validation MAPE (ties: lower MAE, then earlier enumeration index).
/// Results are identical for any worker count. Only train and validation are
/// visible here.
std::vector<BacktestRecord> backtest(const CandidatePool& pool, std::span<const double> train,
                                     std::span<const double> val, const BacktestOptions& options = {});
std::vector<BacktestRecord> backtest(const CandidatePool& pool, const Series& train, const Series& val,
                                     const BacktestOptions& options = {});

struct RankedModels {
    std::vector<BacktestRecord> top_k;
};

/// Ok records ascending by validation MAPE (ties: MAE, then model id), first k.
/// Throws std::invalid_argument when no record is ok.
RankedModels rank_top_k(const std::vector<BacktestRecord>& records, std::size_t k);

/// {"selected_models":[{"model","hyperparameters","reason"}]} with each
/// hyperparameter listed as its candidate array.
nlohmann::json selection_record(const CandidatePool& pool);
/// Inverse of selection_record; validates every model name and space.
CandidatePool pool_from_selection(const nlohmann::json& j);

nlohmann::json to_json(const BacktestRecord& r, bool include_trials = true);
BacktestRecord backtest_record_from_json(const nlohmann::json& j);

}  // namespace tsci
