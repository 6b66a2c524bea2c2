#pragma once

#include "tsci/ensemble.hpp"
#include "tsci/models.hpp"
#include "tsci/planner.hpp"
#include "tsci/preprocess.hpp"
#include "tsci/profile.hpp"

#include <json.hpp>

#include <chrono>
#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace tsci {

// --- decisions -------------------------------------------------------------

enum class DecisionKind { preprocess, model_selection, ensemble };
enum class DecisionSource { rules, llm, llm_fallback };

std::string_view to_string(DecisionKind k) noexcept;
std::string_view to_string(DecisionSource s) noexcept;

struct AdvisorDecision {
    DecisionKind kind = DecisionKind::preprocess;
    /// Validates against the schema of `kind`, whatever the source.
    nlohmann::json payload;
    DecisionSource source = DecisionSource::rules;
    /// Raw service responses, one per attempt (llm and llm_fallback only).
    std::vector<std::string> raw_responses;
    /// Why the service answer was rejected (llm_fallback only).
    std::string failure;
};

nlohmann::json to_json(const AdvisorDecision& d);

/// Raised when the data cannot be repaired responsibly (more than 20% missing).
class DataQualityError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// --- rule engine -----------------------------------------------------------

inline constexpr double kMaxMissingFraction = 0.20;
inline constexpr double kLightMissingFraction = 0.05;
inline constexpr double kHeavySkew = 1.0;
inline constexpr double kHeavyExcessKurtosis = 3.0;
inline constexpr double kRobustZscoreAlpha = 3.5;
inline constexpr double kIntermittencyThreshold = 0.4;
inline constexpr double kStrongTrend = 0.5;

/// Preprocessing recommendation in the data-analysis wire shape. Throws
/// DataQualityError above 20% missing.
AdvisorDecision advise_preprocess(const QualityDiagnostics& diagnostics);

struct PolicyChoice {
    PreprocessPolicy policy;
    /// Substitutions applied while mapping wire strategies (e.g. drop).
    std::vector<std::string> notes;
};
/// Maps a validated preprocess payload onto a concrete policy. `drop` is never
/// applied: it becomes interpolate and is noted.
PolicyChoice policy_from_decision(const nlohmann::json& payload);

struct ModelRecommendation {
    ModelId model = ModelId::random_walk;
    std::string rationale;
};

/// Priority-ordered, de-duplicated rule table filled to exactly n_p models.
/// Throws std::invalid_argument when n_p is 0 or exceeds the registry.
std::vector<ModelRecommendation> model_rules(const TemporalProfile& profile, std::size_t n_p);

AdvisorDecision advise_models(const TemporalProfile& profile, std::size_t n_p);
AdvisorDecision advise_ensemble(const RankedModels& ranked, const EnsembleConfig& config, double disagreement);

// --- prompts and schemas ---------------------------------------------------

struct Prompt {
    std::string system;
    std::string user;
};

/// Replaces each {{name}} marker; throws on markers left without a value.
std::string render_template(std::string_view tmpl, const std::vector<std::pair<std::string, std::string>>& values);

Prompt preprocess_prompt(const nlohmann::json& context);
Prompt model_selection_prompt(const nlohmann::json& analysis, std::size_t n_candidates);
Prompt ensemble_prompt(const nlohmann::json& individual_forecasts, const nlohmann::json& viz_info);

const nlohmann::json& decision_schema(DecisionKind kind);

/// Subset JSON-schema check (type, required, properties, additionalProperties,
/// items, enum, minItems, maxItems, minimum, maximum). Empty result = valid.
std::vector<std::string> validate_against_schema(const nlohmann::json& instance, const nlohmann::json& schema);

/// Removes a surrounding markdown code fence (``` or ```json), if present.
std::string strip_code_fences(std::string_view text);

// --- external service ------------------------------------------------------

enum class AdvisorMode { rules, llm };

struct AdvisorBackend {
    AdvisorMode mode = AdvisorMode::rules;
    std::string endpoint;  // e.g. https://host/v1/chat/completions
    std::string model_name;
    std::chrono::milliseconds timeout{30000};
    std::size_t max_retries = 2;
    std::string credential_env = "TSCI_LLM_API_KEY";

    /// llm mode requires an endpoint, a model name and the credential variable set.
    void validate() const;
};

void to_json(nlohmann::json& j, const AdvisorBackend& b);
void from_json(const nlohmann::json& j, AdvisorBackend& b);

class TransportError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Sends one chat-completion request body and returns the raw response body.
class ChatTransport {
public:
    virtual ~ChatTransport() = default;
    virtual std::string send(const nlohmann::json& request) = 0;
};

/// HTTP(S) POST with a bearer credential read from the configured variable.
std::unique_ptr<ChatTransport> make_http_transport(const AdvisorBackend& backend);

/// {"model", "messages": [system, user], "temperature": 0}.
nlohmann::json chat_request(const AdvisorBackend& backend, const Prompt& prompt);

/// Everything an LLM-backed decision needs besides the transport.
struct LlmRequest {
    DecisionKind kind = DecisionKind::preprocess;
    Prompt prompt;
    /// Rule-engine decision substituted on any failure.
    AdvisorDecision fallback;
    /// Semantic check beyond the schema (vocabulary, member names, counts);
    /// returns an error message or nothing. May normalise the payload.
    std::function<std::optional<std::string>(nlohmann::json&)> check;
};

/// One request per attempt, up to 1 + max_retries attempts. Never throws for
/// service problems: the fallback is returned with source llm_fallback.
AdvisorDecision advise_via_llm(const LlmRequest& request, const AdvisorBackend& backend, ChatTransport& transport);

/// Semantic checks used by the pipeline for each kind.
std::optional<std::string> check_preprocess_payload(nlohmann::json& payload);
std::optional<std::string> check_model_payload(nlohmann::json& payload, std::size_t n_candidates);
std::optional<std::string> check_ensemble_payload(nlohmann::json& payload, const std::vector<std::string>& members);

/// Ensemble decision from a validated wire payload: best_model picks the named
/// member; weighted strategies use the given weights (renormalised) or, when
/// weighted_average arrives without weights, performance weights on the rule
/// decision's scores. Members, scores, gap and disagreement come from `rules`.
EnsembleDecision decision_from_wire(const nlohmann::json& payload, const EnsembleDecision& rules,
                                   const EnsembleConfig& config);

}  // namespace tsci
