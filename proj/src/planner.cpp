#include "tsci/planner.hpp"

#include "tsci/advisor.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>
#include <random>
#include <set>
#include <stdexcept>
#include <thread>

namespace tsci {

void CandidatePool::validate() const {
    if (candidates.empty()) throw std::invalid_argument("candidate pool is empty");
    std::set<ModelId> seen;
    for (const auto& c : candidates) {
        if (!seen.insert(c.model).second)
            throw std::invalid_argument(fmt::format("model {} appears twice in the pool", to_string(c.model)));
        if (c.rationale.empty())
            throw std::invalid_argument(fmt::format("model {} has no rationale", to_string(c.model)));
        if (c.space.size() == 0)
            throw std::invalid_argument(fmt::format("model {} has an empty hyperparameter space", to_string(c.model)));
    }
}

CandidatePool select_candidates(const TemporalProfile& profile, std::size_t n_p) {
    const std::optional<std::size_t> period =
        profile.seasonality.detected ? std::optional<std::size_t>(profile.seasonality.period) : std::nullopt;
    CandidatePool pool;
    for (auto& rec : model_rules(profile, n_p))
        pool.candidates.push_back({rec.model, std::move(rec.rationale), hyperparameter_space(rec.model, period)});
    pool.validate();
    return pool;
}

std::vector<std::size_t> sample_config_indices(const HyperparameterSpace& space, std::size_t n, std::uint64_t seed) {
    if (n == 0) throw std::invalid_argument("at least one configuration must be requested");
    const std::size_t total = space.size();
    if (total == 0) throw std::invalid_argument("hyperparameter space is empty");
    std::vector<std::size_t> all(total);
    std::iota(all.begin(), all.end(), std::size_t{0});
    if (total <= n) return all;
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
    std::mt19937_64 rng(seq);
    std::vector<std::size_t> picked;
    picked.reserve(n);
    // Selection sampling keeps the chosen indices in enumeration order.
    std::sample(all.begin(), all.end(), std::back_inserter(picked), n, rng);
    return picked;
}

std::vector<Hyperparameters> sample_configs(const HyperparameterSpace& space, std::size_t n, std::uint64_t seed) {
    std::vector<Hyperparameters> out;
    for (std::size_t i : sample_config_indices(space, n, seed)) out.push_back(space.config_at(i));
    return out;
}

std::string_view to_string(BacktestStatus s) noexcept { return s == BacktestStatus::ok ? "ok" : "failed"; }

namespace {

// Per-model seed so that adding or removing a candidate does not reshuffle the others.
std::uint64_t model_seed(std::uint64_t seed, ModelId id) {
    return seed ^ (0x9E3779B97F4A7C15ULL * (static_cast<std::uint64_t>(id) + 1));
}

struct Task {
    std::size_t candidate = 0;
    std::size_t slot = 0;  // position within the candidate's trial list
};

ConfigTrial evaluate(const ModelSpec& spec, std::size_t config_index, std::span<const double> train,
                     std::span<const double> val, const std::optional<AffineScaler>& scaler,
                     std::vector<double>& forecast) {
    ConfigTrial trial;
    trial.config_index = config_index;
    trial.params = spec.params;
    try {
        validate_spec(spec);
        forecast = fit_forecast(spec, train, val.size());
        if (scaler) forecast = scaler->inverse(forecast);
        const auto m = score(val, forecast);
        if (!std::isfinite(m.mae) || !std::isfinite(m.mape)) throw ModelFailure("non-finite validation metrics");
        trial.ok = true;
        trial.val_mae = m.mae;
        trial.val_mape = m.mape;
    } catch (const std::exception& e) {
        trial.ok = false;
        trial.error = e.what();
        forecast.clear();
    }
    return trial;
}

}  // namespace

std::vector<BacktestRecord> backtest(const CandidatePool& pool, std::span<const double> train,
                                     std::span<const double> val, const BacktestOptions& options) {
    pool.validate();
    if (train.empty()) throw std::invalid_argument("training segment is empty");
    if (val.empty()) throw std::invalid_argument("validation segment is empty");

    std::vector<double> scaled_train;
    if (options.scaler) scaled_train = options.scaler->transform(train);
    const std::span<const double> fit_on = options.scaler ? std::span<const double>(scaled_train) : train;

    std::vector<std::vector<std::size_t>> indices;
    std::vector<std::vector<ConfigTrial>> trials;
    std::vector<std::vector<std::vector<double>>> forecasts;
    std::vector<Task> tasks;
    for (std::size_t c = 0; c < pool.size(); ++c) {
        const auto& cand = pool.candidates[c];
        indices.push_back(sample_config_indices(cand.space, options.configs_per_model, model_seed(options.seed, cand.model)));
        trials.emplace_back(indices.back().size());
        forecasts.emplace_back(indices.back().size());
        for (std::size_t s = 0; s < indices.back().size(); ++s) tasks.push_back({c, s});
    }

    // Each task writes only its own slot, so the merge below is order-free.
    std::atomic<std::size_t> next{0};
    const auto worker = [&] {
        for (std::size_t t = next++; t < tasks.size(); t = next++) {
            const auto [c, s] = tasks[t];
            const auto& cand = pool.candidates[c];
            const ModelSpec spec{cand.model, cand.space.config_at(indices[c][s])};
            trials[c][s] = evaluate(spec, indices[c][s], fit_on, val, options.scaler, forecasts[c][s]);
        }
    };
    const std::size_t workers = std::max<std::size_t>(1, std::min(options.workers, tasks.size()));
    if (workers == 1) {
        worker();
    } else {
        std::vector<std::thread> threads;
        for (std::size_t w = 0; w < workers; ++w) threads.emplace_back(worker);
        for (auto& th : threads) th.join();
    }

    std::vector<BacktestRecord> records;
    for (std::size_t c = 0; c < pool.size(); ++c) {
        const auto& cand = pool.candidates[c];
        BacktestRecord rec;
        rec.rationale = cand.rationale;
        rec.trials = trials[c];
        std::optional<std::size_t> best;
        for (std::size_t s = 0; s < rec.trials.size(); ++s) {
            const auto& tr = rec.trials[s];
            if (!tr.ok) continue;
            if (!best) {
                best = s;
                continue;
            }
            const auto& b = rec.trials[*best];
            if (tr.val_mape < b.val_mape || (tr.val_mape == b.val_mape && tr.val_mae < b.val_mae)) best = s;
        }
        if (best) {
            const auto& b = rec.trials[*best];
            rec.status = BacktestStatus::ok;
            rec.spec = {cand.model, b.params};
            rec.config_index = b.config_index;
            rec.val_mape = b.val_mape;
            rec.val_mae = b.val_mae;
            rec.val_forecast = forecasts[c][*best];
        } else {
            rec.status = BacktestStatus::failed;
            rec.spec = {cand.model, rec.trials.empty() ? Hyperparameters{} : rec.trials.front().params};
        }
        records.push_back(std::move(rec));
    }
    return records;
}

std::vector<BacktestRecord> backtest(const CandidatePool& pool, const Series& train, const Series& val,
                                     const BacktestOptions& options) {
    const auto tr = train.dense();
    const auto va = val.dense();
    return backtest(pool, std::span<const double>(tr), std::span<const double>(va), options);
}

RankedModels rank_top_k(const std::vector<BacktestRecord>& records, std::size_t k) {
    std::vector<BacktestRecord> ok;
    for (const auto& r : records)
        if (r.status == BacktestStatus::ok) ok.push_back(r);
    if (ok.empty()) throw std::invalid_argument("no model produced a usable validation forecast");
    std::stable_sort(ok.begin(), ok.end(), [](const BacktestRecord& a, const BacktestRecord& b) {
        if (a.val_mape != b.val_mape) return a.val_mape < b.val_mape;
        if (a.val_mae != b.val_mae) return a.val_mae < b.val_mae;
        return to_string(a.spec.id) < to_string(b.spec.id);
    });
    if (ok.size() > k) ok.resize(k);
    return {std::move(ok)};
}

nlohmann::json selection_record(const CandidatePool& pool) {
    nlohmann::json models = nlohmann::json::array();
    for (const auto& c : pool.candidates)
        models.push_back({{"model", to_string(c.model)}, {"hyperparameters", space_to_json(c.space)}, {"reason", c.rationale}});
    return {{"selected_models", models}};
}

CandidatePool pool_from_selection(const nlohmann::json& j) {
    CandidatePool pool;
    for (const auto& item : j.at("selected_models")) {
        Candidate c;
        c.model = model_from_string(item.at("model").get<std::string>());
        c.rationale = item.at("reason").get<std::string>();
        for (const auto& [name, values] : item.at("hyperparameters").items()) {
            std::vector<ParamValue> vs;
            if (values.is_array()) {
                for (const auto& v : values) vs.push_back(param_from_json(v));
            } else {
                vs.push_back(param_from_json(values));
            }
            c.space.params.emplace_back(name, std::move(vs));
        }
        // Every configuration must be a valid spec for the model.
        for (std::size_t i = 0; i < c.space.size(); ++i) validate_spec({c.model, c.space.config_at(i)});
        pool.candidates.push_back(std::move(c));
    }
    pool.validate();
    return pool;
}

nlohmann::json to_json(const BacktestRecord& r, bool include_trials) {
    nlohmann::json j = {{"model", to_string(r.spec.id)},
                        {"hyperparameters", hyperparameters_to_json(r.spec.params)},
                        {"status", to_string(r.status)},
                        {"config_index", r.config_index},
                        {"rationale", r.rationale}};
    if (r.status == BacktestStatus::ok) {
        j["val_mape"] = r.val_mape;
        j["val_mae"] = r.val_mae;
        j["val_forecast"] = r.val_forecast;
    }
    if (include_trials) {
        nlohmann::json trials = nlohmann::json::array();
        for (const auto& t : r.trials) {
            nlohmann::json tj = {{"config_index", t.config_index},
                                 {"hyperparameters", hyperparameters_to_json(t.params)},
                                 {"ok", t.ok}};
            if (t.ok) {
                tj["val_mape"] = t.val_mape;
                tj["val_mae"] = t.val_mae;
            } else {
                tj["error"] = t.error;
            }
            trials.push_back(std::move(tj));
        }
        j["trials"] = std::move(trials);
    }
    return j;
}

BacktestRecord backtest_record_from_json(const nlohmann::json& j) {
    BacktestRecord r;
    r.spec.id = model_from_string(j.at("model").get<std::string>());
    r.spec.params = hyperparameters_from_json(j.at("hyperparameters"));
    r.status = j.at("status").get<std::string>() == "ok" ? BacktestStatus::ok : BacktestStatus::failed;
    r.config_index = j.value("config_index", std::size_t{0});
    r.rationale = j.value("rationale", "");
    if (r.status == BacktestStatus::ok) {
        r.val_mape = j.at("val_mape").get<double>();
        r.val_mae = j.at("val_mae").get<double>();
        r.val_forecast = j.value("val_forecast", std::vector<double>{});
    }
    if (j.contains("trials")) {
        for (const auto& tj : j.at("trials")) {
            ConfigTrial t;
            t.config_index = tj.at("config_index").get<std::size_t>();
            t.params = hyperparameters_from_json(tj.at("hyperparameters"));
            t.ok = tj.at("ok").get<bool>();
            if (t.ok) {
                t.val_mape = tj.at("val_mape").get<double>();
                t.val_mae = tj.at("val_mae").get<double>();
            } else {
                t.error = tj.value("error", "");
            }
            r.trials.push_back(std::move(t));
        }
    }
    return r;
}

}  // namespace tsci
