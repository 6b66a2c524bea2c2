#include "tsci/ensemble.hpp"

#include "tsci/stats.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace tsci {

std::string_view to_wire(EnsembleStrategy s) noexcept {
    switch (s) {
        case EnsembleStrategy::single_best: return "best_model";
        case EnsembleStrategy::weighted_average: return "weighted_average";
        case EnsembleStrategy::median: return "median";
        case EnsembleStrategy::trimmed_mean: return "trimmed_mean";
        case EnsembleStrategy::custom_weights: return "custom_weights";
    }
    return "best_model";
}

EnsembleStrategy strategy_from_wire(std::string_view s) {
    for (auto v : {EnsembleStrategy::single_best, EnsembleStrategy::weighted_average, EnsembleStrategy::median,
                   EnsembleStrategy::trimmed_mean, EnsembleStrategy::custom_weights})
        if (to_wire(v) == s) return v;
    throw std::invalid_argument(fmt::format("unknown integration strategy '{}'", s));
}

void EnsembleConfig::validate() const {
    const auto finite = [](double v) { return std::isfinite(v); };
    if (!finite(delta) || delta < 0.0) throw std::invalid_argument("delta must be a finite non-negative margin");
    if (!finite(beta) || beta <= 0.0) throw std::invalid_argument("beta must be positive");
    if (!finite(tau) || tau <= 0.0) throw std::invalid_argument("tau must be positive");
    if (!finite(lambda) || lambda < 0.0 || lambda > 1.0) throw std::invalid_argument("lambda must lie in [0, 1]");
    if (!finite(w_min) || !finite(w_max) || w_min <= 0.0 || w_min > w_max || w_max > 1.0)
        throw std::invalid_argument("weight bounds must satisfy 0 < w_min <= w_max <= 1");
    if (!finite(rho) || rho < 0.0 || rho >= 0.25) throw std::invalid_argument("rho must lie in [0, 0.25)");
    if (!finite(epsilon) || epsilon <= 0.0) throw std::invalid_argument("epsilon must be positive");
    if (!finite(alpha_mae) || !finite(alpha_mape) || alpha_mae < 0.0 || alpha_mape < 0.0 ||
        std::abs(alpha_mae + alpha_mape - 1.0) > 1e-12)
        throw std::invalid_argument("metric weights must be non-negative and sum to 1");
    if (!finite(disagreement_threshold) || disagreement_threshold < 0.0)
        throw std::invalid_argument("disagreement threshold must be non-negative");
    if (robust_strategy != EnsembleStrategy::median && robust_strategy != EnsembleStrategy::trimmed_mean)
        throw std::invalid_argument("robust strategy must be median or trimmed_mean");
}

void to_json(nlohmann::json& j, const EnsembleConfig& c) {
    j = {{"delta", c.delta},
         {"beta", c.beta},
         {"tau", c.tau},
         {"lambda", c.lambda},
         {"w_min", c.w_min},
         {"w_max", c.w_max},
         {"rho", c.rho},
         {"epsilon", c.epsilon},
         {"alpha_mae", c.alpha_mae},
         {"alpha_mape", c.alpha_mape},
         {"disagreement_threshold", c.disagreement_threshold},
         {"robust_strategy", to_wire(c.robust_strategy)}};
}

void from_json(const nlohmann::json& j, EnsembleConfig& c) {
    const auto read = [&](const char* key, double& field) {
        if (j.contains(key)) field = j.at(key).get<double>();
    };
    read("delta", c.delta);
    read("beta", c.beta);
    read("tau", c.tau);
    read("lambda", c.lambda);
    read("w_min", c.w_min);
    read("w_max", c.w_max);
    read("rho", c.rho);
    read("epsilon", c.epsilon);
    read("alpha_mae", c.alpha_mae);
    read("alpha_mape", c.alpha_mape);
    read("disagreement_threshold", c.disagreement_threshold);
    if (j.contains("robust_strategy")) c.robust_strategy = strategy_from_wire(j.at("robust_strategy").get<std::string>());
    c.validate();
}

// --- scores and weights ----------------------------------------------------

namespace {

std::vector<double> min_max(const std::vector<double>& v) {
    const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
    const double range = *hi - *lo;
    std::vector<double> out(v.size(), 0.0);
    if (range > 0.0)
        for (std::size_t i = 0; i < v.size(); ++i) out[i] = (v[i] - *lo) / range;
    return out;
}

}  // namespace

std::vector<double> aggregate_scores(std::span<const MetricsPair> metrics, const EnsembleConfig& config) {
    if (metrics.empty()) throw std::invalid_argument("cannot aggregate scores of zero models");
    std::vector<double> maes, mapes;
    for (const auto& m : metrics) {
        if (!std::isfinite(m.mae) || !std::isfinite(m.mape)) throw std::invalid_argument("metrics must be finite");
        maes.push_back(m.mae);
        mapes.push_back(m.mape);
    }
    const auto n_mae = min_max(maes);
    const auto n_mape = min_max(mapes);
    std::vector<double> s(metrics.size());
    for (std::size_t i = 0; i < s.size(); ++i) s[i] = config.alpha_mae * n_mae[i] + config.alpha_mape * n_mape[i];
    return s;
}

std::vector<double> aggregate_scores(const RankedModels& ranked, const EnsembleConfig& config) {
    std::vector<MetricsPair> metrics;
    for (const auto& r : ranked.top_k) metrics.push_back({r.val_mae, r.val_mape});
    return aggregate_scores(metrics, config);
}

double relative_gap(std::span<const double> sorted_scores) {
    if (sorted_scores.size() < 2) throw std::invalid_argument("the gap needs at least two scores");
    const double s1 = sorted_scores[0];
    const double s2 = sorted_scores[1];
    if (s1 > s2) throw std::invalid_argument("scores must be sorted ascending");
    if (s1 == 0.0) return s2 > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
    return (s2 - s1) / s1;
}

bool gap_test(std::span<const double> sorted_scores, double delta) { return relative_gap(sorted_scores) >= delta; }

std::vector<double> performance_weights(std::span<const double> scores, const EnsembleConfig& config) {
    if (scores.empty()) throw std::invalid_argument("cannot weight zero models");
    const auto k = static_cast<double>(scores.size());
    std::vector<double> w(scores.size());
    double total = 0.0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        if (!(scores[i] >= 0.0)) throw std::invalid_argument("scores must be non-negative");
        const double inverse = std::pow(scores[i] + config.epsilon, -config.beta);
        w[i] = std::pow(inverse, 1.0 / config.tau);
        total += w[i];
    }
    double blended_total = 0.0;
    for (double& v : w) {
        const double perf = v / total;
        v = (1.0 - config.lambda) * std::clamp(perf, config.w_min, config.w_max) + config.lambda / k;
        blended_total += v;
    }
    // Clipping can move the blended sum away from 1; restore it.
    for (double& v : w) v /= blended_total;
    return w;
}

std::vector<double> robust_aggregate(const std::vector<std::vector<double>>& members, EnsembleStrategy mode,
                                     double rho) {
    if (members.empty()) throw std::invalid_argument("robust pooling needs at least one member");
    const std::size_t h = members.front().size();
    for (const auto& m : members)
        if (m.size() != h) throw std::invalid_argument("member forecasts must have equal lengths");
    const std::size_t k = members.size();
    const auto trim = static_cast<std::size_t>(std::floor(rho * static_cast<double>(k)));
    if (mode == EnsembleStrategy::trimmed_mean && 2 * trim >= k)
        throw std::invalid_argument("trimming would remove every member");
    if (mode != EnsembleStrategy::median && mode != EnsembleStrategy::trimmed_mean)
        throw std::invalid_argument("robust pooling mode must be median or trimmed_mean");

    std::vector<double> out(h);
    std::vector<double> column(k);
    for (std::size_t t = 0; t < h; ++t) {
        for (std::size_t i = 0; i < k; ++i) column[i] = members[i][t];
        std::sort(column.begin(), column.end());
        if (mode == EnsembleStrategy::median) {
            out[t] = stats::median_sorted(column);
        } else {
            double sum = 0.0;
            for (std::size_t i = trim; i < k - trim; ++i) sum += column[i];
            out[t] = sum / static_cast<double>(k - 2 * trim);
        }
    }
    return out;
}

double validation_disagreement(const std::vector<std::vector<double>>& member_val_forecasts,
                               std::span<const double> val_targets) {
    if (member_val_forecasts.empty() || val_targets.empty()) return 0.0;
    const std::size_t h = val_targets.size();
    for (const auto& m : member_val_forecasts)
        if (m.size() != h) throw std::invalid_argument("validation forecasts must match the validation length");

    double scale = stats::quantile({val_targets.begin(), val_targets.end()}, 0.75) -
                   stats::quantile({val_targets.begin(), val_targets.end()}, 0.25);
    if (!(scale > 0.0)) {
        scale = 0.0;
        for (double v : val_targets) scale = std::max(scale, std::abs(v));
    }
    if (!(scale > 0.0)) scale = 1.0;

    double total = 0.0;
    for (std::size_t t = 0; t < h; ++t) {
        double lo = member_val_forecasts.front()[t];
        double hi = lo;
        for (const auto& m : member_val_forecasts) {
            lo = std::min(lo, m[t]);
            hi = std::max(hi, m[t]);
        }
        total += (hi - lo) / scale;
    }
    return total / static_cast<double>(h);
}

// --- decision --------------------------------------------------------------

namespace {

std::string confidence_label(double spread) {
    if (spread >= 0.5) return "high";
    if (spread >= 0.1) return "medium";
    return "low";
}

std::string format_gap(double gap) { return std::isinf(gap) ? std::string("inf") : fmt::format("{:.4g}", gap); }

}  // namespace

EnsembleDecision decide_from_scores(const std::vector<std::string>& members, std::span<const double> scores,
                                    const EnsembleConfig& config, double disagreement) {
    config.validate();
    if (members.empty()) throw std::invalid_argument("ensemble decision needs at least one member");
    if (members.size() != scores.size()) throw std::invalid_argument("one score per member is required");

    EnsembleDecision d;
    d.members = members;
    d.scores.assign(scores.begin(), scores.end());
    d.disagreement = disagreement;
    const std::size_t k = members.size();

    // Leader: lowest score, earliest position on ties (members arrive ranked).
    std::size_t leader = 0;
    for (std::size_t i = 1; i < k; ++i)
        if (scores[i] < scores[leader]) leader = i;

    if (k == 1) {
        d.strategy = EnsembleStrategy::single_best;
        d.selected_model = members[0];
        d.weights = {1.0};
        d.gap = std::numeric_limits<double>::infinity();
        d.confidence = "medium";
        d.rationale = fmt::format("Only one model ({}) passed validation, so it is used alone.", members[0]);
        return d;
    }

    std::vector<double> sorted(scores.begin(), scores.end());
    std::sort(sorted.begin(), sorted.end());
    d.gap = relative_gap(sorted);
    d.confidence = confidence_label(sorted[1] - sorted[0]);

    if (d.gap >= config.delta) {
        d.strategy = EnsembleStrategy::single_best;
        d.selected_model = members[leader];
        d.weights.assign(k, 0.0);
        d.weights[leader] = 1.0;
        d.rationale = fmt::format(
            "Single-best: {} leads the validation score ranking with relative gap {} >= delta {}, so averaging "
            "would only dilute it.",
            members[leader], format_gap(d.gap), config.delta);
        return d;
    }
    if (disagreement > config.disagreement_threshold) {
        d.strategy = config.robust_strategy;
        d.weights.assign(k, 1.0 / static_cast<double>(k));
        d.rationale = fmt::format(
            "Robust pooling ({}): relative gap {} < delta {} and validation disagreement {:.4g} exceeds the "
            "threshold {}; order statistics limit the influence of any single divergent member.",
            to_wire(config.robust_strategy), format_gap(d.gap), config.delta, disagreement,
            config.disagreement_threshold);
        return d;
    }
    d.strategy = EnsembleStrategy::weighted_average;
    d.weights = performance_weights(scores, config);
    d.rationale = fmt::format(
        "Performance-weighted average: relative gap {} < delta {} and validation disagreement {:.4g} is within "
        "the threshold {}; inverse-loss weights with shrinkage lambda {}.",
        format_gap(d.gap), config.delta, disagreement, config.disagreement_threshold, config.lambda);
    return d;
}

EnsembleDecision decide(const RankedModels& ranked, const EnsembleConfig& config, double disagreement) {
    if (ranked.top_k.empty()) throw std::invalid_argument("ensemble decision needs at least one ranked model");
    std::vector<std::string> members;
    for (const auto& r : ranked.top_k) members.emplace_back(to_string(r.spec.id));
    const auto scores = aggregate_scores(ranked, config);
    return decide_from_scores(members, scores, config, disagreement);
}

std::vector<double> combine(const EnsembleDecision& decision, const std::vector<std::vector<double>>& members,
                            const std::optional<AffineScaler>& scaler, double rho) {
    if (members.size() != decision.members.size())
        throw std::invalid_argument("member forecasts do not match the decision's member set");
    if (members.empty()) throw std::invalid_argument("nothing to combine");
    const std::size_t h = members.front().size();
    for (const auto& m : members)
        if (m.size() != h) throw std::invalid_argument("member forecasts must have equal lengths");

    std::vector<double> out;
    switch (decision.strategy) {
        case EnsembleStrategy::single_best: {
            const auto it = std::find(decision.members.begin(), decision.members.end(), decision.selected_model);
            if (it == decision.members.end()) throw std::invalid_argument("selected model is not a member");
            out = members[static_cast<std::size_t>(it - decision.members.begin())];
            break;
        }
        case EnsembleStrategy::weighted_average:
        case EnsembleStrategy::custom_weights: {
            if (decision.weights.size() != members.size())
                throw std::invalid_argument("one weight per member is required");
            out.assign(h, 0.0);
            for (std::size_t i = 0; i < members.size(); ++i)
                for (std::size_t t = 0; t < h; ++t) out[t] += decision.weights[i] * members[i][t];
            break;
        }
        case EnsembleStrategy::median:
        case EnsembleStrategy::trimmed_mean: out = robust_aggregate(members, decision.strategy, rho); break;
    }
    if (scaler) out = scaler->inverse(out);
    return out;
}

// --- JSON ------------------------------------------------------------------

nlohmann::json to_wire_json(const EnsembleDecision& d) {
    nlohmann::json j;
    j["integration_strategy"] = to_wire(d.strategy);
    if (d.strategy == EnsembleStrategy::weighted_average || d.strategy == EnsembleStrategy::custom_weights) {
        nlohmann::json w = nlohmann::json::object();
        for (std::size_t i = 0; i < d.members.size(); ++i) w[d.members[i]] = d.weights.at(i);
        j["weights"] = w;
    }
    if (d.strategy == EnsembleStrategy::single_best) j["selected_model"] = d.selected_model;
    j["reasoning"] = d.rationale;
    j["confidence"] = d.confidence;
    return j;
}

nlohmann::json to_log_json(const EnsembleDecision& d) {
    nlohmann::json j = to_wire_json(d);
    j["members"] = d.members;
    j["member_weights"] = d.weights;
    j["scores"] = d.scores;
    j["gap"] = std::isinf(d.gap) ? nlohmann::json("inf") : nlohmann::json(d.gap);
    j["disagreement"] = d.disagreement;
    return j;
}

EnsembleDecision decision_from_log_json(const nlohmann::json& j) {
    EnsembleDecision d;
    d.strategy = strategy_from_wire(j.at("integration_strategy").get<std::string>());
    d.members = j.at("members").get<std::vector<std::string>>();
    d.weights = j.at("member_weights").get<std::vector<double>>();
    if (j.contains("selected_model")) d.selected_model = j.at("selected_model").get<std::string>();
    d.rationale = j.value("reasoning", "");
    d.confidence = j.value("confidence", "");
    d.scores = j.value("scores", std::vector<double>{});
    const auto& gap = j.at("gap");
    d.gap = gap.is_string() ? std::numeric_limits<double>::infinity() : gap.get<double>();
    d.disagreement = j.value("disagreement", 0.0);
    if (d.weights.size() != d.members.size()) throw std::invalid_argument("logged weights do not match members");
    return d;
}

}  // namespace tsci
