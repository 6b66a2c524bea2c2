#include "tsci/advisor.hpp"

#include "tsci/embedded_assets.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <set>

namespace tsci {

std::string_view to_string(DecisionKind k) noexcept {
    switch (k) {
        case DecisionKind::preprocess: return "preprocess";
        case DecisionKind::model_selection: return "model_selection";
        case DecisionKind::ensemble: return "ensemble";
    }
    return "preprocess";
}

std::string_view to_string(DecisionSource s) noexcept {
    switch (s) {
        case DecisionSource::rules: return "rules";
        case DecisionSource::llm: return "llm";
        case DecisionSource::llm_fallback: return "llm_fallback";
    }
    return "rules";
}

nlohmann::json to_json(const AdvisorDecision& d) {
    nlohmann::json j = {{"kind", to_string(d.kind)}, {"source", to_string(d.source)}, {"payload", d.payload}};
    if (!d.raw_responses.empty()) j["raw_responses"] = d.raw_responses;
    if (!d.failure.empty()) j["failure"] = d.failure;
    return j;
}

// --- preprocessing rules ---------------------------------------------------

AdvisorDecision advise_preprocess(const QualityDiagnostics& diagnostics) {
    const auto& st = diagnostics.stats;
    const double missing = st.missing_fraction();
    if (missing > kMaxMissingFraction)
        throw DataQualityError(fmt::format("insufficient data quality: {:.4g}% of observations are missing (limit {}%)",
                                           100.0 * missing, 100.0 * kMaxMissingFraction));

    const bool heavy_tails = std::abs(st.skewness) > kHeavySkew || st.excess_kurtosis > kHeavyExcessKurtosis;
    const std::size_t outliers = diagnostics.outlier_indices.size();

    nlohmann::json issues = nlohmann::json::array();
    if (st.missing_count > 0) issues.push_back("missing_values");
    if (outliers > 0) issues.push_back("outliers");
    if (heavy_tails) issues.push_back("heavy_tails");

    nlohmann::json payload;
    payload["basic_stats"] = {
        {"mean", st.mean}, {"std", st.std}, {"min", st.min}, {"max", st.max}, {"trend", to_string(st.trend)}};
    payload["missing_info"] = {{"missing_count", st.missing_count}, {"missing_percentage", 100.0 * missing}};
    payload["outlier_info"] = {
        {"outlier_count", outliers},
        {"outlier_percentage", st.length == 0 ? 0.0 : static_cast<double>(outliers) / static_cast<double>(st.length)}};
    payload["quality_assessment"] = {{"data_quality_score", diagnostics.quality_score}, {"main_issues", issues}};
    payload["recommended_strategies"] = {
        {"missing_value_strategy", missing < kLightMissingFraction ? "interpolate" : "median"},
        {"outlier_detect_strategy", heavy_tails ? "zscore" : "iqr"},
        {"outlier_handle_strategy", heavy_tails ? "median" : "interpolate"}};
    payload["detection_parameters"] = heavy_tails
                                          ? nlohmann::json{{"window", 24}, {"alpha", kRobustZscoreAlpha}, {"robust", true}}
                                          : nlohmann::json{{"window", 24}, {"alpha", 1.5}, {"robust", false}};
    return {DecisionKind::preprocess, std::move(payload), DecisionSource::rules, {}, {}};
}

PolicyChoice policy_from_decision(const nlohmann::json& payload) {
    PolicyChoice out;
    auto& p = out.policy;
    const auto& rs = payload.at("recommended_strategies");

    const auto missing = rs.at("missing_value_strategy").get<std::string>();
    if (missing == "interpolate") p.repair.missing_fill = MissingFill::interpolate;
    else if (missing == "forward_fill") p.repair.missing_fill = MissingFill::ffill;
    else if (missing == "backward_fill") p.repair.missing_fill = MissingFill::bfill;
    else if (missing == "mean") p.repair.missing_fill = MissingFill::local_mean;
    else if (missing == "median") p.repair.missing_fill = MissingFill::local_median;
    else if (missing == "zero") p.repair.missing_fill = MissingFill::zero;
    else if (missing == "drop") {
        p.repair.missing_fill = MissingFill::interpolate;
        out.notes.push_back("missing_value_strategy 'drop' would break the uniform index; interpolate used instead");
    } else {
        throw std::invalid_argument(fmt::format("unknown missing value strategy '{}'", missing));
    }

    const auto detect = rs.at("outlier_detect_strategy").get<std::string>();
    if (detect == "iqr") {
        p.detection.method = DetectionMethod::rolling_iqr;
        p.detection.alpha = 1.5;
    } else if (detect == "zscore") {
        p.detection.method = DetectionMethod::rolling_zscore;
        p.detection.alpha = 3.0;
    } else if (detect == "percentile") {
        p.detection.method = DetectionMethod::percentile;
    } else if (detect == "none") {
        p.detection.method = DetectionMethod::none;
    } else {
        throw std::invalid_argument(fmt::format("unknown outlier detection strategy '{}'", detect));
    }
    if (payload.contains("detection_parameters")) {
        const auto& dp = payload.at("detection_parameters");
        if (dp.contains("window")) p.detection.window = dp.at("window").get<std::size_t>();
        if (dp.contains("alpha")) p.detection.alpha = dp.at("alpha").get<double>();
        if (dp.contains("robust")) p.detection.robust_center = dp.at("robust").get<bool>();
    }

    const auto handle = rs.at("outlier_handle_strategy").get<std::string>();
    if (handle == "clip") p.repair.outlier_handle = OutlierHandling::clip;
    else if (handle == "interpolate") p.repair.outlier_handle = OutlierHandling::interpolate;
    else if (handle == "ffill") p.repair.outlier_handle = OutlierHandling::ffill;
    else if (handle == "bfill") p.repair.outlier_handle = OutlierHandling::bfill;
    else if (handle == "mean") p.repair.outlier_handle = OutlierHandling::local_mean;
    else if (handle == "median") p.repair.outlier_handle = OutlierHandling::local_median;
    else if (handle == "smooth") p.repair.outlier_handle = OutlierHandling::smooth;
    else if (handle == "drop") {
        p.repair.outlier_handle = OutlierHandling::interpolate;
        out.notes.push_back("outlier_handle_strategy 'drop' would break the uniform index; interpolate used instead");
    } else {
        throw std::invalid_argument(fmt::format("unknown outlier handling strategy '{}'", handle));
    }
    p.detection.validate();
    p.repair.validate();
    return out;
}

// --- model rules -----------------------------------------------------------

std::vector<ModelRecommendation> model_rules(const TemporalProfile& profile, std::size_t n_p) {
    const std::size_t registry = registered_models().size();
    if (n_p == 0) throw std::invalid_argument("the candidate pool needs at least one model");
    if (n_p > registry)
        throw std::invalid_argument(fmt::format("pool size {} exceeds the {} registered models", n_p, registry));

    std::vector<ModelRecommendation> ruled;
    const auto add = [&](ModelId id, std::string why) {
        for (const auto& r : ruled)
            if (r.model == id) return;
        ruled.push_back({id, std::move(why)});
    };

    const auto& season = profile.seasonality;
    const bool strong_trend = profile.trend.label != TrendDirection::stable && profile.trend.strength >= kStrongTrend;
    const bool stationary = profile.stationarity.is_stationary;

    if (profile.intermittency > kIntermittencyThreshold)
        add(ModelId::croston, fmt::format("intermittency {:.3g} > {}: sparse demand suits separate size/interval "
                                          "smoothing",
                                          profile.intermittency, kIntermittencyThreshold));
    if (season.detected) {
        const auto why = fmt::format("seasonality detected at period {} (strength {:.3g})", season.period, season.strength);
        add(ModelId::exp_smoothing, why + ": seasonal Holt-Winters captures the repeating pattern");
        add(ModelId::theta, why + ": theta decomposition handles level plus curvature");
        add(ModelId::arima, why + (stationary ? "" : " with non-stationarity") + ": differenced ARIMA");
    }
    if (strong_trend) {
        const auto why = fmt::format("{} trend with strength {:.3g} >= {}", to_string(profile.trend.label),
                                     profile.trend.strength, kStrongTrend);
        add(ModelId::linear_regression, why + ": lag regression extrapolates the drift");
        add(ModelId::exp_smoothing, why + ": smoothing with a trend component follows the slope");
    }
    if (stationary && !season.detected) {
        const auto why = fmt::format("stationary (ADF statistic {:.3g} < {}) with no seasonality",
                                     profile.stationarity.statistic, profile.stationarity.critical_value);
        add(ModelId::arima, why + ": ARMA structure");
        add(ModelId::moving_average, why + ": a level-tracking average is a strong simple baseline");
    }

    const bool reserve_baseline = n_p >= 4;
    const std::size_t capacity = n_p - (reserve_baseline ? 1 : 0);
    if (ruled.size() > capacity) ruled.resize(capacity);

    static const ModelId priority[] = {ModelId::linear_regression, ModelId::exp_smoothing, ModelId::theta,
                                       ModelId::arima,             ModelId::moving_average, ModelId::ridge_regression,
                                       ModelId::polynomial_regression, ModelId::lasso_regression, ModelId::croston,
                                       ModelId::random_walk};
    const auto fill_reason = fmt::format(
        "priority fill: trend {} (strength {:.3g}), {}, {}", to_string(profile.trend.label), profile.trend.strength,
        stationary ? "stationary" : "non-stationary", season.detected ? "seasonal" : "no seasonality");
    for (ModelId id : priority) {
        if (ruled.size() >= capacity) break;
        if (reserve_baseline && id == ModelId::random_walk) continue;
        add(id, fill_reason);
    }
    if (reserve_baseline)
        add(ModelId::random_walk, "naive baseline: every pool keeps a random walk reference when there is room");
    return ruled;
}

AdvisorDecision advise_models(const TemporalProfile& profile, std::size_t n_p) {
    return {DecisionKind::model_selection, selection_record(select_candidates(profile, n_p)), DecisionSource::rules,
            {}, {}};
}

AdvisorDecision advise_ensemble(const RankedModels& ranked, const EnsembleConfig& config, double disagreement) {
    return {DecisionKind::ensemble, to_wire_json(decide(ranked, config, disagreement)), DecisionSource::rules, {}, {}};
}

// --- prompts ---------------------------------------------------------------

std::string render_template(std::string_view tmpl, const std::vector<std::pair<std::string, std::string>>& values) {
    std::string out;
    std::size_t pos = 0;
    while (pos < tmpl.size()) {
        const auto open = tmpl.find("{{", pos);
        if (open == std::string_view::npos) {
            out.append(tmpl.substr(pos));
            break;
        }
        const auto close = tmpl.find("}}", open + 2);
        const auto name = close == std::string_view::npos ? std::string_view{} : tmpl.substr(open + 2, close - open - 2);
        const bool is_marker = !name.empty() && std::all_of(name.begin(), name.end(), [](char c) {
            return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
        });
        if (!is_marker) {
            out.append(tmpl.substr(pos, open + 2 - pos));
            pos = open + 2;
            continue;
        }
        out.append(tmpl.substr(pos, open - pos));
        const auto it = std::find_if(values.begin(), values.end(), [&](const auto& kv) { return kv.first == name; });
        if (it == values.end()) throw std::invalid_argument(fmt::format("no value for template marker '{}'", name));
        out.append(it->second);
        pos = close + 2;
    }
    return out;
}

Prompt preprocess_prompt(const nlohmann::json& context) {
    return {std::string(assets::curator_system), render_template(assets::data_analysis, {{"sample", context.dump()}})};
}

Prompt model_selection_prompt(const nlohmann::json& analysis, std::size_t n_candidates) {
    nlohmann::json available = nlohmann::json::array();
    for (ModelId id : registered_models()) available.push_back(to_string(id));
    return {std::string(assets::model_selection_system),
            render_template(assets::model_selection, {{"analysis", analysis.dump()},
                                                      {"available_models", available.dump()},
                                                      {"n_candidates", std::to_string(n_candidates)}})};
}

Prompt ensemble_prompt(const nlohmann::json& individual_forecasts, const nlohmann::json& viz_info) {
    return {std::string(assets::forecaster_system),
            render_template(assets::ensemble_decision,
                            {{"individual_forecasts", individual_forecasts.dump(2)}, {"viz_info", viz_info.dump()}})};
}

const nlohmann::json& decision_schema(DecisionKind kind) {
    static const nlohmann::json preprocess = nlohmann::json::parse(assets::preprocess_schema);
    static const nlohmann::json models = nlohmann::json::parse(assets::model_selection_schema);
    static const nlohmann::json ensemble = nlohmann::json::parse(assets::ensemble_schema);
    switch (kind) {
        case DecisionKind::preprocess: return preprocess;
        case DecisionKind::model_selection: return models;
        case DecisionKind::ensemble: return ensemble;
    }
    return preprocess;
}

// --- schema subset ---------------------------------------------------------

namespace {

bool type_matches(const nlohmann::json& v, const std::string& type) {
    if (type == "object") return v.is_object();
    if (type == "array") return v.is_array();
    if (type == "string") return v.is_string();
    if (type == "boolean") return v.is_boolean();
    if (type == "null") return v.is_null();
    if (type == "integer") return v.is_number_integer() || (v.is_number_float() && std::trunc(v.get<double>()) == v.get<double>());
    if (type == "number") return v.is_number();
    throw std::invalid_argument(fmt::format("unsupported schema type '{}'", type));
}

void check(const nlohmann::json& v, const nlohmann::json& schema, const std::string& path, std::vector<std::string>& errors) {
    if (schema.contains("type")) {
        const auto& t = schema.at("type");
        bool ok = false;
        if (t.is_array()) {
            for (const auto& alt : t) ok = ok || type_matches(v, alt.get<std::string>());
        } else {
            ok = type_matches(v, t.get<std::string>());
        }
        if (!ok) {
            errors.push_back(fmt::format("{}: expected type {}", path, t.dump()));
            return;
        }
    }
    if (schema.contains("enum")) {
        const auto& e = schema.at("enum");
        if (std::find(e.begin(), e.end(), v) == e.end())
            errors.push_back(fmt::format("{}: value {} is not one of {}", path, v.dump(), e.dump()));
    }
    if (v.is_number()) {
        if (schema.contains("minimum") && v.get<double>() < schema.at("minimum").get<double>())
            errors.push_back(fmt::format("{}: below minimum {}", path, schema.at("minimum").dump()));
        if (schema.contains("maximum") && v.get<double>() > schema.at("maximum").get<double>())
            errors.push_back(fmt::format("{}: above maximum {}", path, schema.at("maximum").dump()));
    }
    if (v.is_object()) {
        if (schema.contains("required"))
            for (const auto& key : schema.at("required"))
                if (!v.contains(key.get<std::string>()))
                    errors.push_back(fmt::format("{}: missing required field '{}'", path, key.get<std::string>()));
        const nlohmann::json props = schema.value("properties", nlohmann::json::object());
        for (const auto& [key, child] : v.items()) {
            const std::string child_path = path + "." + key;
            if (props.contains(key)) {
                check(child, props.at(key), child_path, errors);
            } else if (schema.contains("additionalProperties")) {
                const auto& extra = schema.at("additionalProperties");
                if (extra.is_boolean()) {
                    if (!extra.get<bool>()) errors.push_back(fmt::format("{}: unexpected field", child_path));
                } else {
                    check(child, extra, child_path, errors);
                }
            }
        }
    }
    if (v.is_array()) {
        if (schema.contains("minItems") && v.size() < schema.at("minItems").get<std::size_t>())
            errors.push_back(fmt::format("{}: fewer than {} items", path, schema.at("minItems").dump()));
        if (schema.contains("maxItems") && v.size() > schema.at("maxItems").get<std::size_t>())
            errors.push_back(fmt::format("{}: more than {} items", path, schema.at("maxItems").dump()));
        if (schema.contains("items"))
            for (std::size_t i = 0; i < v.size(); ++i) check(v[i], schema.at("items"), fmt::format("{}[{}]", path, i), errors);
    }
}

}  // namespace

std::vector<std::string> validate_against_schema(const nlohmann::json& instance, const nlohmann::json& schema) {
    std::vector<std::string> errors;
    check(instance, schema, "$", errors);
    return errors;
}

std::string strip_code_fences(std::string_view text) {
    const auto trim = [](std::string_view s) {
        while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
        while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
        return s;
    };
    const auto open = text.find("```");
    if (open == std::string_view::npos) return std::string(trim(text));
    const auto line_end = text.find('\n', open);
    if (line_end == std::string_view::npos) return std::string(trim(text));
    const auto close = text.find("```", line_end + 1);
    const auto body = close == std::string_view::npos ? text.substr(line_end + 1) : text.substr(line_end + 1, close - line_end - 1);
    return std::string(trim(body));
}

// --- backend ---------------------------------------------------------------

void AdvisorBackend::validate() const {
    if (mode == AdvisorMode::rules) return;
    if (endpoint.empty()) throw std::invalid_argument("llm advisor mode requires an endpoint");
    if (model_name.empty()) throw std::invalid_argument("llm advisor mode requires a model name");
    if (credential_env.empty()) throw std::invalid_argument("llm advisor mode requires a credential variable name");
    const char* cred = std::getenv(credential_env.c_str());
    if (cred == nullptr || *cred == '\0')
        throw std::invalid_argument(fmt::format("credential variable {} is not set", credential_env));
    if (timeout.count() <= 0) throw std::invalid_argument("advisor timeout must be positive");
}

void to_json(nlohmann::json& j, const AdvisorBackend& b) {
    j = {{"mode", b.mode == AdvisorMode::rules ? "rules" : "llm"},
         {"endpoint", b.endpoint},
         {"model_name", b.model_name},
         {"timeout_ms", b.timeout.count()},
         {"max_retries", b.max_retries},
         {"credential_env", b.credential_env}};
}

void from_json(const nlohmann::json& j, AdvisorBackend& b) {
    if (j.contains("mode")) {
        const auto m = j.at("mode").get<std::string>();
        if (m == "rules") b.mode = AdvisorMode::rules;
        else if (m == "llm") b.mode = AdvisorMode::llm;
        else throw std::invalid_argument(fmt::format("unknown advisor mode '{}'", m));
    }
    if (j.contains("endpoint")) b.endpoint = j.at("endpoint").get<std::string>();
    if (j.contains("model_name")) b.model_name = j.at("model_name").get<std::string>();
    if (j.contains("timeout_ms")) b.timeout = std::chrono::milliseconds(j.at("timeout_ms").get<long>());
    if (j.contains("max_retries")) b.max_retries = j.at("max_retries").get<std::size_t>();
    if (j.contains("credential_env")) b.credential_env = j.at("credential_env").get<std::string>();
}

nlohmann::json chat_request(const AdvisorBackend& backend, const Prompt& prompt) {
    return {{"model", backend.model_name},
            {"messages",
             nlohmann::json::array({{{"role", "system"}, {"content", prompt.system}},
                                    {{"role", "user"}, {"content", prompt.user}}})},
            {"temperature", 0}};
}

AdvisorDecision advise_via_llm(const LlmRequest& request, const AdvisorBackend& backend, ChatTransport& transport) {
    const auto body = chat_request(backend, request.prompt);
    std::vector<std::string> raw;
    std::string failure;
    for (std::size_t attempt = 0; attempt <= backend.max_retries; ++attempt) {
        try {
            const std::string response = transport.send(body);
            raw.push_back(response);
            const auto envelope = nlohmann::json::parse(response);
            const auto content = envelope.at("choices").at(0).at("message").at("content").get<std::string>();
            auto payload = nlohmann::json::parse(strip_code_fences(content));
            const auto errors = validate_against_schema(payload, decision_schema(request.kind));
            if (!errors.empty()) throw std::invalid_argument("schema violation: " + errors.front());
            if (request.check)
                if (const auto problem = request.check(payload)) throw std::invalid_argument(*problem);
            return {request.kind, std::move(payload), DecisionSource::llm, std::move(raw), {}};
        } catch (const std::exception& e) {
            failure = fmt::format("attempt {}: {}", attempt + 1, e.what());
        }
    }
    AdvisorDecision fallback = request.fallback;
    fallback.source = DecisionSource::llm_fallback;
    fallback.raw_responses = std::move(raw);
    fallback.failure = std::move(failure);
    return fallback;
}

// --- semantic checks -------------------------------------------------------

std::optional<std::string> check_preprocess_payload(nlohmann::json& payload) {
    try {
        (void)policy_from_decision(payload);
    } catch (const std::exception& e) {
        return std::string("unusable preprocessing strategy: ") + e.what();
    }
    return std::nullopt;
}

std::optional<std::string> check_model_payload(nlohmann::json& payload, std::size_t n_candidates) {
    const auto& models = payload.at("selected_models");
    if (models.size() != n_candidates)
        return fmt::format("expected exactly {} models, got {}", n_candidates, models.size());
    try {
        for (auto& m : payload.at("selected_models"))
            m["model"] = std::string(to_string(model_from_string(m.at("model").get<std::string>())));
        (void)pool_from_selection(payload);
    } catch (const std::exception& e) {
        return std::string("invalid model selection: ") + e.what();
    }
    return std::nullopt;
}

namespace {

std::optional<std::size_t> member_position(const std::vector<std::string>& members, const std::string& name) {
    std::string id;
    try {
        id = std::string(to_string(model_from_string(name)));
    } catch (const std::exception&) {
        return std::nullopt;
    }
    const auto it = std::find(members.begin(), members.end(), id);
    if (it == members.end()) return std::nullopt;
    return static_cast<std::size_t>(it - members.begin());
}

}  // namespace

std::optional<std::string> check_ensemble_payload(nlohmann::json& payload, const std::vector<std::string>& members) {
    const auto strategy = strategy_from_wire(payload.at("integration_strategy").get<std::string>());
    if (strategy == EnsembleStrategy::single_best) {
        if (!payload.contains("selected_model")) return std::string("best_model requires selected_model");
        const auto pos = member_position(members, payload.at("selected_model").get<std::string>());
        if (!pos) return fmt::format("selected_model {} is not an ensemble member", payload.at("selected_model").dump());
        payload["selected_model"] = members[*pos];
    }
    const bool weighted = strategy == EnsembleStrategy::weighted_average || strategy == EnsembleStrategy::custom_weights;
    if (strategy == EnsembleStrategy::custom_weights && !payload.contains("weights"))
        return std::string("custom_weights requires weights");
    if (weighted && payload.contains("weights")) {
        std::vector<double> w(members.size(), 0.0);
        for (const auto& [name, value] : payload.at("weights").items()) {
            const auto pos = member_position(members, name);
            if (!pos) return fmt::format("weight given for unknown member '{}'", name);
            double v = 0.0;
            try {
                v = value.is_string() ? std::stod(value.get<std::string>()) : value.get<double>();
            } catch (const std::exception&) {
                return fmt::format("weight for '{}' is not a number", name);
            }
            if (!std::isfinite(v) || v < 0.0) return fmt::format("weight for '{}' must be finite and non-negative", name);
            w[*pos] += v;
        }
        double total = 0.0;
        for (double v : w) total += v;
        if (!(total > 0.0)) return std::string("weights sum to zero");
        nlohmann::json normalised = nlohmann::json::object();
        for (std::size_t i = 0; i < members.size(); ++i) normalised[members[i]] = w[i] / total;
        payload["weights"] = normalised;
    }
    return std::nullopt;
}

EnsembleDecision decision_from_wire(const nlohmann::json& payload, const EnsembleDecision& rules,
                                   const EnsembleConfig& config) {
    EnsembleDecision d;
    d.members = rules.members;
    d.scores = rules.scores;
    d.gap = rules.gap;
    d.disagreement = rules.disagreement;
    d.strategy = strategy_from_wire(payload.at("integration_strategy").get<std::string>());
    d.rationale = "[LLM] " + payload.at("reasoning").get<std::string>();
    d.confidence = payload.at("confidence").get<std::string>();
    const std::size_t k = d.members.size();
    switch (d.strategy) {
        case EnsembleStrategy::single_best: {
            d.selected_model = payload.at("selected_model").get<std::string>();
            d.weights.assign(k, 0.0);
            const auto it = std::find(d.members.begin(), d.members.end(), d.selected_model);
            if (it == d.members.end()) throw std::invalid_argument("selected model is not a member");
            d.weights[static_cast<std::size_t>(it - d.members.begin())] = 1.0;
            break;
        }
        case EnsembleStrategy::weighted_average:
        case EnsembleStrategy::custom_weights:
            if (payload.contains("weights")) {
                d.weights.assign(k, 0.0);
                for (std::size_t i = 0; i < k; ++i) d.weights[i] = payload.at("weights").value(d.members[i], 0.0);
            } else {
                d.weights = performance_weights(d.scores, config);
            }
            break;
        case EnsembleStrategy::median:
        case EnsembleStrategy::trimmed_mean: d.weights.assign(k, 1.0 / static_cast<double>(k)); break;
    }
    return d;
}

}  // namespace tsci
