#include "tsci/advisor.hpp"

#include "stub_server.hpp"
#include "support.hpp"

#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

using namespace tsci;
using namespace tsci::testing;

namespace {

QualityDiagnostics diagnostics_with(std::size_t length, std::size_t missing, double skew = 0.0, double kurt = 0.0) {
    QualityDiagnostics d;
    d.stats.length = length;
    d.stats.missing_count = missing;
    d.stats.mean = 10.0;
    d.stats.std = 2.0;
    d.stats.min = 4.0;
    d.stats.max = 16.0;
    d.stats.skewness = skew;
    d.stats.excess_kurtosis = kurt;
    for (std::size_t i = 0; i < missing; ++i) d.missing_indices.push_back(i);
    d.quality_score = 0.9;
    return d;
}

TemporalProfile seasonal_profile() {
    TemporalProfile p;
    p.seasonality.detected = true;
    p.seasonality.period = 24;
    p.seasonality.strength = 0.7;
    p.trend.strength = 0.2;
    p.decomposition_period = 24;
    return p;
}

/// Compares `text` with tests/golden/<name>; TSCI_UPDATE_GOLDEN=1 rewrites the file.
void check_golden(const std::string& name, const std::string& text) {
    const auto path = source_path("tests/golden/" + name);
    if (const char* update = std::getenv("TSCI_UPDATE_GOLDEN"); update != nullptr && std::string(update) == "1") {
        std::ofstream(path, std::ios::binary) << text;
        return;
    }
    std::ifstream in(path, std::ios::binary);
    REQUIRE_MESSAGE(in.good(), "missing golden file " << path);
    std::stringstream buf;
    buf << in.rdbuf();
    CHECK_MESSAGE(buf.str() == text, "rendered prompt differs from " << path);
}

std::string valid_preprocess_content() {
    auto payload = advise_preprocess(diagnostics_with(512, 3)).payload;
    payload["recommended_strategies"]["outlier_handle_strategy"] = "clip";
    payload.erase("detection_parameters");
    return payload.dump();
}

LlmRequest preprocess_request() {
    LlmRequest r;
    r.kind = DecisionKind::preprocess;
    r.prompt = preprocess_prompt({{"value", {1.0, 2.0, 3.0}}});
    r.fallback = advise_preprocess(diagnostics_with(512, 3));
    r.check = check_preprocess_payload;
    return r;
}

AdvisorBackend backend_for(const std::string& endpoint) {
    AdvisorBackend b;
    b.mode = AdvisorMode::llm;
    b.endpoint = endpoint;
    b.model_name = "stub-model";
    b.max_retries = 1;
    b.timeout = std::chrono::milliseconds(5000);
    return b;
}

class ScriptedTransport final : public ChatTransport {
public:
    explicit ScriptedTransport(std::vector<std::string> contents) : contents_(std::move(contents)) {}
    std::string send(const nlohmann::json& request) override {
        requests.push_back(request);
        if (calls_ >= contents_.size()) throw TransportError("no more scripted answers");
        const nlohmann::json body = {{"choices", {{{"message", {{"role", "assistant"}, {"content", contents_[calls_++]}}}}}}};
        return body.dump();
    }
    std::vector<nlohmann::json> requests;

private:
    std::vector<std::string> contents_;
    std::size_t calls_ = 0;
};

}  // namespace

TEST_CASE("preprocessing rules") {
    const auto light = advise_preprocess(diagnostics_with(100, 1));
    CHECK(light.source == DecisionSource::rules);
    CHECK(light.payload["recommended_strategies"]["missing_value_strategy"] == "interpolate");
    CHECK(light.payload["recommended_strategies"]["outlier_detect_strategy"] == "iqr");
    CHECK(light.payload["missing_info"]["missing_percentage"].get<double>() == doctest::Approx(1.0));
    CHECK(validate_against_schema(light.payload, decision_schema(DecisionKind::preprocess)).empty());

    const auto moderate = advise_preprocess(diagnostics_with(100, 10));
    CHECK(moderate.payload["recommended_strategies"]["missing_value_strategy"] == "median");
    CHECK_THROWS_AS(advise_preprocess(diagnostics_with(100, 25)), DataQualityError);
    CHECK_NOTHROW(advise_preprocess(diagnostics_with(100, 20)));

    const auto heavy = advise_preprocess(diagnostics_with(100, 0, 0.2, 5.0));
    CHECK(heavy.payload["recommended_strategies"]["outlier_detect_strategy"] == "zscore");
    const auto policy = policy_from_decision(heavy.payload).policy;
    CHECK(policy.detection.method == DetectionMethod::rolling_zscore);
    CHECK(policy.detection.robust_center);
    CHECK(policy.detection.alpha == kRobustZscoreAlpha);
    CHECK(advise_preprocess(diagnostics_with(100, 0, -1.5, 0.0)).payload["recommended_strategies"]["outlier_detect_strategy"] ==
          "zscore");
}

TEST_CASE("policy mapping never drops observations") {
    auto payload = advise_preprocess(diagnostics_with(100, 1)).payload;
    payload["recommended_strategies"]["missing_value_strategy"] = "drop";
    payload["recommended_strategies"]["outlier_handle_strategy"] = "drop";
    const auto choice = policy_from_decision(payload);
    CHECK(choice.policy.repair.missing_fill == MissingFill::interpolate);
    CHECK(choice.policy.repair.outlier_handle == OutlierHandling::interpolate);
    CHECK(choice.notes.size() == 2);
    payload["recommended_strategies"]["missing_value_strategy"] = "guess";
    CHECK_THROWS(policy_from_decision(payload));
}

TEST_CASE("model rules fill the pool to the requested size") {
    const auto recs = model_rules(seasonal_profile(), 5);
    REQUIRE(recs.size() == 5);
    CHECK(recs[0].model == ModelId::exp_smoothing);
    CHECK(recs.back().model == ModelId::random_walk);
    const auto decision = advise_models(seasonal_profile(), 5);
    CHECK(validate_against_schema(decision.payload, decision_schema(DecisionKind::model_selection)).empty());
    CHECK_THROWS(model_rules(seasonal_profile(), 0));
    CHECK_THROWS(model_rules(seasonal_profile(), 11));
}

TEST_CASE("schema subset validation") {
    const auto& schema = decision_schema(DecisionKind::ensemble);
    CHECK(validate_against_schema(nlohmann::json::parse(
                                      R"({"integration_strategy":"median","reasoning":"r","confidence":"low"})"),
                                  schema)
              .empty());
    CHECK_FALSE(validate_against_schema(nlohmann::json::parse(R"({"integration_strategy":"median"})"), schema).empty());
    CHECK_FALSE(validate_against_schema(
                    nlohmann::json::parse(R"({"integration_strategy":"vote","reasoning":"r","confidence":"low"})"), schema)
                    .empty());
    CHECK_FALSE(validate_against_schema(nlohmann::json::parse(R"({"integration_strategy":"median","reasoning":"r",
                                          "confidence":"low","weights":{"a":true}})"),
                                        schema)
                    .empty());
    auto pre = advise_preprocess(diagnostics_with(100, 1)).payload;
    pre["missing_info"]["missing_percentage"] = 150.0;
    CHECK_FALSE(validate_against_schema(pre, decision_schema(DecisionKind::preprocess)).empty());
}

TEST_CASE("code fences are stripped") {
    CHECK(strip_code_fences("```json\n{\"a\": 1}\n```") == "{\"a\": 1}");
    CHECK(strip_code_fences("```\n{}\n```\n") == "{}");
    CHECK(strip_code_fences("  {\"a\": 2}  ") == "{\"a\": 2}");
    CHECK(strip_code_fences("Here you go:\n```json\n[1]\n```\nthanks") == "[1]");
}

TEST_CASE("template rendering") {
    CHECK(render_template("a {{x}} b {{y}}", {{"x", "1"}, {"y", "2"}}) == "a 1 b 2");
    CHECK(render_template("{\"k\": {...}}", {}) == "{\"k\": {...}}");
    CHECK_THROWS(render_template("{{missing}}", {}));
}

TEST_CASE("rendered prompts match the golden files") {
    const nlohmann::json sample = {{"value", {12.5, 13.0, nullptr, 14.25}}};
    const auto pre = preprocess_prompt(sample);
    check_golden("preprocess_system.txt", pre.system);
    check_golden("preprocess_user.txt", pre.user);

    const nlohmann::json analysis = {{"seasonality", {{"detected", true}, {"period", 24}}}, {"trend", "increasing"}};
    const auto sel = model_selection_prompt(analysis, 5);
    check_golden("model_selection_system.txt", sel.system);
    check_golden("model_selection_user.txt", sel.user);

    const nlohmann::json forecasts = {{"arima", {1.0, 2.0}}, {"theta", {1.5, 2.5}}};
    const nlohmann::json viz = {{"plots", {"ensemble_forecast.svg"}}};
    const auto ens = ensemble_prompt(forecasts, viz);
    check_golden("ensemble_system.txt", ens.system);
    check_golden("ensemble_user.txt", ens.user);
}

TEST_CASE("backend validation") {
    AdvisorBackend b;
    CHECK_NOTHROW(b.validate());
    b.mode = AdvisorMode::llm;
    CHECK_THROWS(b.validate());
    b.endpoint = "http://127.0.0.1:1/v1/chat/completions";
    b.model_name = "m";
    b.credential_env = "TSCI_TEST_UNSET_CREDENTIAL";
    ::unsetenv("TSCI_TEST_UNSET_CREDENTIAL");
    CHECK_THROWS(b.validate());
    ::setenv("TSCI_TEST_UNSET_CREDENTIAL", "x", 1);
    CHECK_NOTHROW(b.validate());
    const AdvisorBackend back = nlohmann::json(b).get<AdvisorBackend>();
    CHECK(nlohmann::json(back) == nlohmann::json(b));
    const auto req = chat_request(b, {"sys", "usr"});
    CHECK(req["messages"].size() == 2);
    CHECK(req["messages"][0]["role"] == "system");
    CHECK(req["temperature"] == 0);
}

TEST_CASE("llm decisions through a scripted transport") {
    const auto backend = backend_for("http://unused/v1/chat/completions");
    {
        ScriptedTransport t({valid_preprocess_content()});
        const auto d = advise_via_llm(preprocess_request(), backend, t);
        CHECK(d.source == DecisionSource::llm);
        CHECK(d.raw_responses.size() == 1);
        CHECK(d.payload["recommended_strategies"]["outlier_handle_strategy"] == "clip");
    }
    {
        ScriptedTransport t({"not json at all", "```json\n" + valid_preprocess_content() + "\n```"});
        const auto d = advise_via_llm(preprocess_request(), backend, t);
        CHECK(d.source == DecisionSource::llm);
        CHECK(d.raw_responses.size() == 2);
    }
    {
        ScriptedTransport t({"{\"basic_stats\": 3}", "still wrong"});
        const auto d = advise_via_llm(preprocess_request(), backend, t);
        CHECK(d.source == DecisionSource::llm_fallback);
        CHECK(d.raw_responses.size() == 2);
        CHECK_FALSE(d.failure.empty());
        CHECK(d.payload == preprocess_request().fallback.payload);
    }
    {
        ScriptedTransport t({});
        const auto d = advise_via_llm(preprocess_request(), backend, t);
        CHECK(d.source == DecisionSource::llm_fallback);
        CHECK(d.raw_responses.empty());
    }
}

TEST_CASE("llm decisions against a local chat-completion server") {
    struct Case {
        std::string content;
        DecisionSource expected;
    };
    const std::vector<Case> cases = {{valid_preprocess_content(), DecisionSource::llm},
                                     {"```json\n" + valid_preprocess_content() + "\n```", DecisionSource::llm},
                                     {"I would interpolate.", DecisionSource::llm_fallback}};
    for (const auto& c : cases) {
        StubChatServer server({c.content});
        const auto backend = backend_for(server.endpoint());
        CHECK_NOTHROW(backend.validate());
        auto transport = make_http_transport(backend);
        const auto d = advise_via_llm(preprocess_request(), backend, *transport);
        CHECK(d.source == c.expected);
        CHECK_FALSE(d.raw_responses.empty());
        const auto reqs = server.requests();
        REQUIRE_FALSE(reqs.empty());
        CHECK(reqs.front()["model"] == "stub-model");
        CHECK(reqs.front()["messages"][1]["content"] == preprocess_request().prompt.user);
    }
}

TEST_CASE("unreachable service falls back") {
    auto backend = backend_for("http://127.0.0.1:9/v1/chat/completions");
    backend.timeout = std::chrono::milliseconds(300);
    auto transport = make_http_transport(backend);
    const auto d = advise_via_llm(preprocess_request(), backend, *transport);
    CHECK(d.source == DecisionSource::llm_fallback);
    CHECK(d.failure.find("request failed") != std::string::npos);
}

TEST_CASE("model selection payload checks") {
    auto payload = advise_models(seasonal_profile(), 3).payload;
    CHECK_FALSE(check_model_payload(payload, 3).has_value());
    CHECK(check_model_payload(payload, 4).has_value());
    payload["selected_models"][0]["model"] = "ExponentialSmoothing";
    CHECK_FALSE(check_model_payload(payload, 3).has_value());
    CHECK(payload["selected_models"][0]["model"] == "exp_smoothing");
    payload["selected_models"][1]["model"] = "Prophet";
    CHECK(check_model_payload(payload, 3).has_value());
}

TEST_CASE("ensemble payload checks and custom weights") {
    const std::vector<std::string> members{"arima", "theta", "exp_smoothing"};
    const EnsembleConfig config;
    const auto rules = decide_from_scores(members, std::vector<double>{0.0, 0.5, 1.0}, config, 0.0);

    auto custom = nlohmann::json::parse(R"({"integration_strategy":"custom_weights",
        "weights":{"ARIMA":"2","theta":1,"ExponentialSmoothing":1},"reasoning":"r","confidence":"high"})");
    CHECK(validate_against_schema(custom, decision_schema(DecisionKind::ensemble)).empty());
    CHECK_FALSE(check_ensemble_payload(custom, members).has_value());
    const auto d = decision_from_wire(custom, rules, config);
    CHECK(d.strategy == EnsembleStrategy::custom_weights);
    CHECK(d.weights == std::vector<double>{0.5, 0.25, 0.25});
    CHECK(d.scores == rules.scores);
    CHECK(d.rationale.rfind("[LLM]", 0) == 0);

    auto best = nlohmann::json::parse(
        R"({"integration_strategy":"best_model","selected_model":"Theta","reasoning":"r","confidence":"low"})");
    CHECK_FALSE(check_ensemble_payload(best, members).has_value());
    CHECK(decision_from_wire(best, rules, config).weights == std::vector<double>{0.0, 1.0, 0.0});

    auto plain = nlohmann::json::parse(R"({"integration_strategy":"weighted_average","reasoning":"r","confidence":"low"})");
    CHECK_FALSE(check_ensemble_payload(plain, members).has_value());
    CHECK(decision_from_wire(plain, rules, config).weights == performance_weights(rules.scores, config));

    auto no_weights = nlohmann::json::parse(R"({"integration_strategy":"custom_weights","reasoning":"r","confidence":"low"})");
    CHECK(check_ensemble_payload(no_weights, members).has_value());
    auto stranger = nlohmann::json::parse(
        R"({"integration_strategy":"custom_weights","weights":{"lstm":1},"reasoning":"r","confidence":"low"})");
    CHECK(check_ensemble_payload(stranger, members).has_value());
    auto negative = nlohmann::json::parse(
        R"({"integration_strategy":"custom_weights","weights":{"arima":-1,"theta":2},"reasoning":"r","confidence":"low"})");
    CHECK(check_ensemble_payload(negative, members).has_value());
    auto outsider = nlohmann::json::parse(
        R"({"integration_strategy":"best_model","selected_model":"croston","reasoning":"r","confidence":"low"})");
    CHECK(check_ensemble_payload(outsider, members).has_value());
}
