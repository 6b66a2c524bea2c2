#pragma once

#include <json.hpp>

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

namespace tsci {

enum class ModelId {
    random_walk,
    moving_average,
    exp_smoothing,
    arima,
    theta,
    croston,
    linear_regression,
    polynomial_regression,
    ridge_regression,
    lasso_regression,
};

/// Every registered model, in registry order.
const std::vector<ModelId>& registered_models();
std::string_view to_string(ModelId id) noexcept;
/// Accepts registry ids ("exp_smoothing") and library display names
/// ("ExponentialSmoothing"), case-insensitively.
ModelId model_from_string(std::string_view name);
std::string_view display_name(ModelId id) noexcept;

using ParamValue = std::variant<bool, long, double>;
using Hyperparameters = std::map<std::string, ParamValue>;

/// Ordered per-parameter candidate lists; enumeration order is lexicographic
/// with the last parameter varying fastest.
struct HyperparameterSpace {
    std::vector<std::pair<std::string, std::vector<ParamValue>>> params;

    std::size_t size() const noexcept;
    /// The `index`-th configuration in enumeration order.
    Hyperparameters config_at(std::size_t index) const;
};

struct ModelSpec {
    ModelId id = ModelId::random_walk;
    Hyperparameters params;

    friend bool operator==(const ModelSpec&, const ModelSpec&) = default;
};

/// Raised when a model cannot produce a usable forecast (series too short,
/// singular fit, non-finite output). The planner treats it as a failed config.
class ModelFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Default discrete space. `seasonal_period` enables the seasonal branch of
/// exp_smoothing when the profile found one.
HyperparameterSpace hyperparameter_space(ModelId id, std::optional<std::size_t> seasonal_period = std::nullopt);

/// Throws std::invalid_argument for unknown names, wrong types or out-of-range values.
void validate_spec(const ModelSpec& spec);

std::size_t minimum_train_length(const ModelSpec& spec);

/// Deterministic fit on `train` and a `horizon`-step forecast.
std::vector<double> fit_forecast(const ModelSpec& spec, std::span<const double> train, std::size_t horizon);

std::string describe(const ModelSpec& spec);

double param_double(const Hyperparameters& h, const std::string& name);
long param_int(const Hyperparameters& h, const std::string& name);
bool param_bool(const Hyperparameters& h, const std::string& name);

nlohmann::json to_json_value(const ParamValue& v);
/// Integers become long, reals double, booleans bool; anything else throws.
ParamValue param_from_json(const nlohmann::json& j);
nlohmann::json hyperparameters_to_json(const Hyperparameters& h);
Hyperparameters hyperparameters_from_json(const nlohmann::json& j);
nlohmann::json space_to_json(const HyperparameterSpace& s);

void to_json(nlohmann::json& j, const ModelSpec& s);
void from_json(const nlohmann::json& j, ModelSpec& s);

/// Machine-readable catalog: id, display name, default space and minimum length.
nlohmann::json model_catalog(std::optional<std::size_t> seasonal_period = std::nullopt);

}  // namespace tsci
