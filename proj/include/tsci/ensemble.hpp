#pragma once

#include "tsci/planner.hpp"
#include "tsci/scaler.hpp"
#include "tsci/series.hpp"

#include <json.hpp>

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace tsci {

enum class EnsembleStrategy { single_best, weighted_average, median, trimmed_mean, custom_weights };

/// Wire vocabulary: best_model, weighted_average, median, trimmed_mean, custom_weights.
std::string_view to_wire(EnsembleStrategy s) noexcept;
EnsembleStrategy strategy_from_wire(std::string_view s);

struct EnsembleConfig {
    double delta = 0.05;      // gap margin for single-best
    double beta = 1.0;        // inverse-loss power
    double tau = 1.0;         // temperature
    double lambda = 0.1;      // shrinkage toward uniform
    double w_min = 0.02;
    double w_max = 0.80;
    double rho = 0.1;         // trimming fraction
    double epsilon = 1e-8;
    double alpha_mae = 0.5;
    double alpha_mape = 0.5;
    /// Validation disagreement above which the robust branch is taken.
    double disagreement_threshold = 0.25;
    /// Pooling used by the robust branch; trimmed_mean only when asked for.
    EnsembleStrategy robust_strategy = EnsembleStrategy::median;

    void validate() const;
};

void to_json(nlohmann::json& j, const EnsembleConfig& c);
void from_json(const nlohmann::json& j, EnsembleConfig& c);

/// s_i = a_mae * norm(mae_i) + a_mape * norm(mape_i), min-max normalised across
/// the candidates; a metric with zero range contributes 0 for everyone.
std::vector<double> aggregate_scores(std::span<const MetricsPair> metrics, const EnsembleConfig& config);
std::vector<double> aggregate_scores(const RankedModels& ranked, const EnsembleConfig& config);

/// (s(2) - s(1)) / s(1) on ascending scores; +inf for a strictly better zero
/// leader, 0 when the two leading scores are both zero.
double relative_gap(std::span<const double> sorted_scores);
bool gap_test(std::span<const double> sorted_scores, double delta);

/// Inverse-power weights, tempered, clipped to [w_min, w_max], blended with the
/// uniform vector by lambda and renormalised to sum to 1.
std::vector<double> performance_weights(std::span<const double> scores, const EnsembleConfig& config);

/// Per-step median or trimmed mean (floor(rho k) removed from each side).
std::vector<double> robust_aggregate(const std::vector<std::vector<double>>& members, EnsembleStrategy mode,
                                     double rho = 0.1);

/// Mean over steps of (max - min across members) divided by the interquartile
/// range of the validation targets (fallbacks: max |target|, then 1).
double validation_disagreement(const std::vector<std::vector<double>>& member_val_forecasts,
                               std::span<const double> val_targets);

struct EnsembleDecision {
    EnsembleStrategy strategy = EnsembleStrategy::single_best;
    std::vector<std::string> members;  // model ids, ranking order
    std::vector<double> weights;       // aligned with members; one-hot for single_best
    std::string selected_model;        // single_best only
    std::string rationale;
    std::string confidence;            // high / medium / low (rules)
    std::vector<double> scores;        // aggregated validation scores, aligned with members
    double gap = 0.0;
    double disagreement = 0.0;
};

/// Strategy choice from validation evidence only: gap rule, then the robust
/// branch on high disagreement, else performance-aware weights.
EnsembleDecision decide(const RankedModels& ranked, const EnsembleConfig& config, double disagreement);
/// Same policy on already aggregated scores.
EnsembleDecision decide_from_scores(const std::vector<std::string>& members, std::span<const double> scores,
                                    const EnsembleConfig& config, double disagreement);

/// Member forecasts are in the scaled space; the combination is inverted with
/// `scaler` (identity when absent). Members must align with decision.members.
std::vector<double> combine(const EnsembleDecision& decision, const std::vector<std::vector<double>>& members,
                            const std::optional<AffineScaler>& scaler = std::nullopt, double rho = 0.1);

/// Wire JSON: integration_strategy, weights (weighted strategies), selected_model
/// (best_model), reasoning, confidence.
nlohmann::json to_wire_json(const EnsembleDecision& d);
/// Wire JSON plus members, scores, gap and disagreement for the workflow log.
nlohmann::json to_log_json(const EnsembleDecision& d);
EnsembleDecision decision_from_log_json(const nlohmann::json& j);

}  // namespace tsci
