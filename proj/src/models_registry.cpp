#include "models_detail.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>

namespace tsci {

namespace {

struct RegistryEntry {
    ModelId id;
    std::string_view name;
    std::string_view display;
};

constexpr std::array<RegistryEntry, 10> kRegistry{{
    {ModelId::random_walk, "random_walk", "RandomWalk"},
    {ModelId::moving_average, "moving_average", "MovingAverage"},
    {ModelId::exp_smoothing, "exp_smoothing", "ExponentialSmoothing"},
    {ModelId::arima, "arima", "ARIMA"},
    {ModelId::theta, "theta", "Theta"},
    {ModelId::croston, "croston", "Croston"},
    {ModelId::linear_regression, "linear_regression", "LinearRegression"},
    {ModelId::polynomial_regression, "polynomial_regression", "PolynomialRegression"},
    {ModelId::ridge_regression, "ridge_regression", "RidgeRegression"},
    {ModelId::lasso_regression, "lasso_regression", "LassoRegression"},
}};

std::string fold(std::string_view s) {
    std::string out;
    for (char c : s)
        if (c != '_' && c != ' ' && c != '-') out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    return out;
}

std::vector<ParamValue> ints(std::initializer_list<long> v) { return {v.begin(), v.end()}; }
std::vector<ParamValue> reals(std::initializer_list<double> v) { return {v.begin(), v.end()}; }

const ParamValue& require(const Hyperparameters& h, const std::string& name) {
    const auto it = h.find(name);
    if (it == h.end()) throw std::invalid_argument("missing hyperparameter '" + name + "'");
    return it->second;
}

bool has(const Hyperparameters& h, const std::string& name) { return h.find(name) != h.end(); }

}  // namespace

const std::vector<ModelId>& registered_models() {
    static const std::vector<ModelId> ids = [] {
        std::vector<ModelId> v;
        for (const auto& e : kRegistry) v.push_back(e.id);
        return v;
    }();
    return ids;
}

std::string_view to_string(ModelId id) noexcept {
    for (const auto& e : kRegistry)
        if (e.id == id) return e.name;
    return "unknown";
}

std::string_view display_name(ModelId id) noexcept {
    for (const auto& e : kRegistry)
        if (e.id == id) return e.display;
    return "Unknown";
}

ModelId model_from_string(std::string_view name) {
    const auto key = fold(name);
    for (const auto& e : kRegistry)
        if (fold(e.name) == key || fold(e.display) == key) return e.id;
    throw std::invalid_argument("unknown model '" + std::string(name) + "'");
}

std::size_t HyperparameterSpace::size() const noexcept {
    std::size_t total = 1;
    for (const auto& [name, values] : params) total *= values.size();
    return params.empty() ? 1 : total;
}

Hyperparameters HyperparameterSpace::config_at(std::size_t index) const {
    if (index >= size()) throw std::out_of_range("configuration index outside the space");
    Hyperparameters h;
    for (auto it = params.rbegin(); it != params.rend(); ++it) {
        const auto& [name, values] = *it;
        h[name] = values[index % values.size()];
        index /= values.size();
    }
    return h;
}

HyperparameterSpace hyperparameter_space(ModelId id, std::optional<std::size_t> seasonal_period) {
    HyperparameterSpace s;
    switch (id) {
        case ModelId::random_walk: s.params = {{"drift", {false, true}}}; break;
        case ModelId::moving_average: s.params = {{"window", ints({3, 6, 12, 24})}}; break;
        case ModelId::exp_smoothing:
            s.params = {{"alpha", reals({0.2, 0.5, 0.8})}, {"trend", {false, true}}};
            if (seasonal_period && *seasonal_period >= 2) {
                s.params.push_back({"seasonal", {false, true}});
                s.params.push_back({"period", ints({static_cast<long>(*seasonal_period)})});
            } else {
                s.params.push_back({"seasonal", {false}});
            }
            break;
        case ModelId::arima: s.params = {{"p", ints({0, 1, 2})}, {"d", ints({0, 1})}, {"q", ints({0, 1, 2})}}; break;
        case ModelId::theta: s.params = {{"ses_alpha", reals({0.2, 0.5, 0.8})}}; break;
        case ModelId::croston: s.params = {{"alpha", reals({0.1, 0.3, 0.5})}}; break;
        case ModelId::linear_regression: s.params = {{"num_lags", ints({4, 8, 24})}}; break;
        case ModelId::polynomial_regression:
            s.params = {{"num_lags", ints({4, 8, 24})}, {"degree", ints({2, 3})}};
            break;
        case ModelId::ridge_regression:
        case ModelId::lasso_regression:
            s.params = {{"num_lags", ints({4, 8, 24})}, {"lambda", reals({0.1, 1.0, 10.0})}};
            break;
    }
    return s;
}

double param_double(const Hyperparameters& h, const std::string& name) {
    const auto& v = require(h, name);
    if (const auto* d = std::get_if<double>(&v)) return *d;
    if (const auto* l = std::get_if<long>(&v)) return static_cast<double>(*l);
    throw std::invalid_argument("hyperparameter '" + name + "' must be numeric");
}

long param_int(const Hyperparameters& h, const std::string& name) {
    const auto& v = require(h, name);
    if (const auto* l = std::get_if<long>(&v)) return *l;
    if (const auto* d = std::get_if<double>(&v); d && std::floor(*d) == *d) return static_cast<long>(*d);
    throw std::invalid_argument("hyperparameter '" + name + "' must be an integer");
}

bool param_bool(const Hyperparameters& h, const std::string& name) {
    const auto& v = require(h, name);
    if (const auto* b = std::get_if<bool>(&v)) return *b;
    throw std::invalid_argument("hyperparameter '" + name + "' must be a boolean");
}

namespace {

void check_names(const ModelSpec& spec, std::initializer_list<std::string_view> allowed) {
    for (const auto& [name, value] : spec.params) {
        if (std::find(allowed.begin(), allowed.end(), name) == allowed.end())
            throw std::invalid_argument(fmt::format("{} does not take hyperparameter '{}'", to_string(spec.id), name));
    }
}

void check_unit(const Hyperparameters& h, const std::string& name) {
    const double v = param_double(h, name);
    if (!(v > 0.0 && v <= 1.0)) throw std::invalid_argument("hyperparameter '" + name + "' must lie in (0, 1]");
}

void check_range(const Hyperparameters& h, const std::string& name, long lo, long hi) {
    const long v = param_int(h, name);
    if (v < lo || v > hi)
        throw std::invalid_argument(fmt::format("hyperparameter '{}' must lie in [{}, {}]", name, lo, hi));
}

}  // namespace

void validate_spec(const ModelSpec& spec) {
    const auto& h = spec.params;
    switch (spec.id) {
        case ModelId::random_walk:
            check_names(spec, {"drift"});
            if (has(h, "drift")) param_bool(h, "drift");
            break;
        case ModelId::moving_average:
            check_names(spec, {"window"});
            check_range(h, "window", 1, 100000);
            break;
        case ModelId::exp_smoothing:
            check_names(spec, {"alpha", "beta", "gamma", "trend", "seasonal", "period"});
            for (const char* name : {"alpha", "beta", "gamma"})
                if (has(h, name)) check_unit(h, name);
            if (has(h, "trend")) param_bool(h, "trend");
            if (has(h, "seasonal") && param_bool(h, "seasonal")) check_range(h, "period", 2, 100000);
            break;
        case ModelId::arima:
            check_names(spec, {"p", "d", "q"});
            check_range(h, "p", 0, 10);
            check_range(h, "d", 0, 2);
            check_range(h, "q", 0, 10);
            break;
        case ModelId::theta:
            check_names(spec, {"ses_alpha"});
            check_unit(h, "ses_alpha");
            break;
        case ModelId::croston:
            check_names(spec, {"alpha"});
            check_unit(h, "alpha");
            break;
        case ModelId::linear_regression:
            check_names(spec, {"num_lags"});
            check_range(h, "num_lags", 1, 10000);
            break;
        case ModelId::polynomial_regression:
            check_names(spec, {"num_lags", "degree"});
            check_range(h, "num_lags", 1, 10000);
            check_range(h, "degree", 1, 5);
            break;
        case ModelId::ridge_regression:
        case ModelId::lasso_regression: {
            check_names(spec, {"num_lags", "lambda"});
            check_range(h, "num_lags", 1, 10000);
            const double lambda = param_double(h, "lambda");
            if (!(lambda >= 0.0)) throw std::invalid_argument("hyperparameter 'lambda' must be >= 0");
            break;
        }
    }
}

std::size_t minimum_train_length(const ModelSpec& spec) {
    validate_spec(spec);
    const auto& h = spec.params;
    switch (spec.id) {
        case ModelId::random_walk: return has(h, "drift") && param_bool(h, "drift") ? 2 : 1;
        case ModelId::moving_average: return static_cast<std::size_t>(param_int(h, "window"));
        case ModelId::exp_smoothing:
            if (has(h, "seasonal") && param_bool(h, "seasonal")) return 2 * static_cast<std::size_t>(param_int(h, "period"));
            return has(h, "trend") && param_bool(h, "trend") ? 3 : 2;
        case ModelId::arima:
            return static_cast<std::size_t>(param_int(h, "p") + param_int(h, "d") + param_int(h, "q") + 12);
        case ModelId::theta: return 4;
        case ModelId::croston: return 2;
        case ModelId::linear_regression:
        case ModelId::polynomial_regression:
        case ModelId::ridge_regression:
        case ModelId::lasso_regression: return static_cast<std::size_t>(param_int(h, "num_lags")) + 2;
    }
    return 1;
}

std::vector<double> fit_forecast(const ModelSpec& spec, std::span<const double> train, std::size_t horizon) {
    if (horizon == 0) throw std::invalid_argument("horizon must be >= 1");
    const std::size_t need = minimum_train_length(spec);
    if (train.size() < need)
        throw ModelFailure(fmt::format("{} needs at least {} training points, got {}", describe(spec), need, train.size()));
    for (double v : train)
        if (!std::isfinite(v)) throw std::invalid_argument("training values must be finite");

    const auto& h = spec.params;
    std::vector<double> out;
    switch (spec.id) {
        case ModelId::random_walk:
            out = detail::forecast_random_walk(train, has(h, "drift") && param_bool(h, "drift"), horizon);
            break;
        case ModelId::moving_average:
            out = detail::forecast_moving_average(train, static_cast<std::size_t>(param_int(h, "window")), horizon);
            break;
        case ModelId::exp_smoothing: {
            detail::SmoothingParams p;
            if (has(h, "alpha")) p.alpha = param_double(h, "alpha");
            if (has(h, "beta")) p.beta = param_double(h, "beta");
            if (has(h, "gamma")) p.gamma = param_double(h, "gamma");
            p.trend = has(h, "trend") && param_bool(h, "trend");
            if (has(h, "seasonal") && param_bool(h, "seasonal")) p.period = static_cast<std::size_t>(param_int(h, "period"));
            out = detail::forecast_exp_smoothing(train, p, horizon);
            break;
        }
        case ModelId::arima:
            out = detail::forecast_arima(train, static_cast<std::size_t>(param_int(h, "p")),
                                         static_cast<std::size_t>(param_int(h, "d")),
                                         static_cast<std::size_t>(param_int(h, "q")), horizon);
            break;
        case ModelId::theta: out = detail::forecast_theta(train, param_double(h, "ses_alpha"), horizon); break;
        case ModelId::croston: out = detail::forecast_croston(train, param_double(h, "alpha"), horizon); break;
        case ModelId::linear_regression:
        case ModelId::polynomial_regression:
        case ModelId::ridge_regression:
        case ModelId::lasso_regression: {
            detail::LagRegression cfg;
            cfg.num_lags = static_cast<std::size_t>(param_int(h, "num_lags"));
            if (spec.id == ModelId::polynomial_regression) cfg.degree = static_cast<std::size_t>(param_int(h, "degree"));
            if (spec.id == ModelId::ridge_regression) cfg.penalty = detail::Penalty::ridge;
            if (spec.id == ModelId::lasso_regression) cfg.penalty = detail::Penalty::lasso;
            if (cfg.penalty != detail::Penalty::none) cfg.lambda = param_double(h, "lambda");
            out = detail::forecast_lag_regression(train, cfg, horizon);
            break;
        }
    }
    if (out.size() != horizon) throw ModelFailure(describe(spec) + " produced a forecast of the wrong length");
    for (double v : out)
        if (!std::isfinite(v)) throw ModelFailure(describe(spec) + " diverged (non-finite forecast)");
    return out;
}

nlohmann::json to_json_value(const ParamValue& v) {
    return std::visit([](const auto& x) { return nlohmann::json(x); }, v);
}

ParamValue param_from_json(const nlohmann::json& j) {
    if (j.is_boolean()) return j.get<bool>();
    if (j.is_number_integer()) return j.get<long>();
    if (j.is_number_float()) return j.get<double>();
    throw std::invalid_argument("hyperparameter values must be booleans or numbers");
}

nlohmann::json hyperparameters_to_json(const Hyperparameters& h) {
    auto j = nlohmann::json::object();
    for (const auto& [name, value] : h) j[name] = to_json_value(value);
    return j;
}

Hyperparameters hyperparameters_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw std::invalid_argument("hyperparameters must be a JSON object");
    Hyperparameters h;
    for (const auto& [name, value] : j.items()) h[name] = param_from_json(value);
    return h;
}

nlohmann::json space_to_json(const HyperparameterSpace& s) {
    auto j = nlohmann::json::object();
    for (const auto& [name, values] : s.params) {
        auto arr = nlohmann::json::array();
        for (const auto& v : values) arr.push_back(to_json_value(v));
        j[name] = arr;
    }
    return j;
}

std::string describe(const ModelSpec& spec) {
    std::string out(to_string(spec.id));
    out += "(";
    bool first = true;
    for (const auto& [name, value] : spec.params) {
        if (!first) out += ", ";
        first = false;
        out += name + "=" + to_json_value(value).dump();
    }
    return out + ")";
}

void to_json(nlohmann::json& j, const ModelSpec& s) {
    j = {{"model", to_string(s.id)}, {"hyperparameters", hyperparameters_to_json(s.params)}};
}

void from_json(const nlohmann::json& j, ModelSpec& s) {
    s.id = model_from_string(j.at("model").get<std::string>());
    s.params = hyperparameters_from_json(j.at("hyperparameters"));
}

nlohmann::json model_catalog(std::optional<std::size_t> seasonal_period) {
    auto arr = nlohmann::json::array();
    for (ModelId id : registered_models()) {
        const auto space = hyperparameter_space(id, seasonal_period);
        std::size_t min_len = 0;
        for (std::size_t i = 0; i < space.size(); ++i)
            min_len = std::max(min_len, minimum_train_length(ModelSpec{id, space.config_at(i)}));
        arr.push_back({{"model_id", to_string(id)},
                       {"name", display_name(id)},
                       {"hyperparameter_space", space_to_json(space)},
                       {"space_size", space.size()},
                       {"minimum_train_length", min_len}});
    }
    return arr;
}

}  // namespace tsci
