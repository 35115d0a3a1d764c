#include "habitmc/config.hpp"

#include "habitmc/errors.hpp"

#include <json.hpp>

#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

namespace habitmc {

using nlohmann::json;

LifetimeConfig RunConfig::lifetime_config() const {
    LifetimeConfig c = lifetime.run;
    c.nested = nested;
    return c;
}

void RunConfig::validate() const {
    model.validate();
    calibration.validate();
    nested.validate();
    lifetime_config().validate();
    if (!(policy.habit > 0.0)) {
        throw ConfigError("policy.habit must be > 0");
    }
    if (policy.zeta_points < 2) {
        throw ConfigError("policy.zeta_points must be >= 2");
    }
    if (!(policy.wealth_min > 0.0) || !(policy.wealth_min < policy.wealth_max)) {
        throw ConfigError("policy needs 0 < wealth_min < wealth_max");
    }
    for (double t : policy.times) {
        if (!nested.grid.contains(t)) {
            throw ConfigError("policy.times: " + std::to_string(t) + " is not a grid point");
        }
    }
    for (double p : lifetime.pensions) {
        if (!(p >= 0.0)) {
            throw ConfigError("lifetime.pensions must be >= 0");
        }
    }
}

RunConfig default_run_config() {
    RunConfig c;
    if (const char* env = std::getenv(seed_env_var); env != nullptr && *env != '\0') {
        try {
            std::size_t used = 0;
            c.calibration.seed = std::stoull(env, &used);
            if (used != std::string(env).size()) {
                throw std::invalid_argument(env);
            }
        } catch (const std::exception&) {
            throw ConfigError(std::string(seed_env_var) + " is not an unsigned integer");
        }
    }
    return c;
}

namespace {

// Reads the members of one JSON object, remembering which keys were used so
// that leftovers can be reported as unknown.
class ObjectReader {
public:
    ObjectReader(const json& obj, std::string prefix) : obj_(obj), prefix_(std::move(prefix)) {
        if (!obj_.is_object()) {
            throw ConfigError("key '" + name_or_root() + "': expected an object");
        }
    }

    void number(const char* key, double& out) {
        if (const json* v = find(key)) {
            if (!v->is_number()) {
                throw ConfigError("key '" + path(key) + "': expected a number");
            }
            out = v->get<double>();
        }
    }

    template <typename Int>
    void integer(const char* key, Int& out) {
        if (const json* v = find(key)) {
            if (!v->is_number_integer() || (v->is_number_integer() && !v->is_number_unsigned() && v->get<long long>() < 0)) {
                throw ConfigError("key '" + path(key) + "': expected a non-negative integer");
            }
            out = v->get<Int>();
        }
    }

    void boolean(const char* key, bool& out) {
        if (const json* v = find(key)) {
            if (!v->is_boolean()) {
                throw ConfigError("key '" + path(key) + "': expected true or false");
            }
            out = v->get<bool>();
        }
    }

    void text(const char* key, std::string& out) {
        if (const json* v = find(key)) {
            if (!v->is_string()) {
                throw ConfigError("key '" + path(key) + "': expected a string");
            }
            out = v->get<std::string>();
        }
    }

    void numbers(const char* key, std::vector<double>& out) {
        if (const json* v = find(key)) {
            if (!v->is_array()) {
                throw ConfigError("key '" + path(key) + "': expected an array of numbers");
            }
            std::vector<double> values;
            for (const auto& item : *v) {
                if (!item.is_number()) {
                    throw ConfigError("key '" + path(key) + "': expected an array of numbers");
                }
                values.push_back(item.get<double>());
            }
            out = std::move(values);
        }
    }

    template <typename Fn>
    void object(const char* key, Fn&& fn) {
        if (const json* v = find(key)) {
            ObjectReader child(*v, path(key));
            fn(child);
            child.finish();
        }
    }

    void finish() const {
        for (const auto& item : obj_.items()) {
            if (used_.count(item.key()) == 0) {
                throw ConfigError("unknown key '" + path(item.key().c_str()) + "'");
            }
        }
    }

private:
    const json* find(const char* key) {
        used_.insert(key);
        const auto it = obj_.find(key);
        return it == obj_.end() ? nullptr : &*it;
    }
    std::string path(const char* key) const { return prefix_.empty() ? key : prefix_ + "." + key; }
    std::string name_or_root() const { return prefix_.empty() ? "<root>" : prefix_; }

    const json& obj_;
    std::string prefix_;
    std::set<std::string> used_;
};

} // namespace

RunConfig parse_run_config(const std::string& json_text, RunConfig base) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    RunConfig c = std::move(base);
    double t_max = c.calibration.grid.t_max();
    double dt = c.calibration.grid.dt();
    bool antithetic = c.calibration.sampling == Sampling::antithetic;
    std::string mode = to_string(c.lifetime.run.mode);

    ObjectReader root(doc, "");
    root.object("market", [&](ObjectReader& r) {
        r.number("mu", c.model.market.mu);
        r.number("sigma", c.model.market.sigma);
        r.number("r", c.model.market.r);
        r.number("rho", c.model.market.rho);
        r.number("gamma", c.model.market.gamma);
    });
    root.object("mortality", [&](ObjectReader& r) {
        r.number("x", c.model.mortality.x);
        r.number("m", c.model.mortality.m);
        r.number("b", c.model.mortality.b);
    });
    root.object("habit", [&](ObjectReader& r) {
        r.number("eta", c.model.habit.eta);
        r.number("c_bar", c.model.habit.c_bar);
    });
    root.number("pension", c.model.pension);
    root.number("wealth", c.model.wealth);
    root.object("simulation", [&](ObjectReader& r) {
        r.number("t_max", t_max);
        r.number("dt", dt);
        r.integer("n_paths", c.calibration.n_paths);
        r.integer("seed", c.calibration.seed);
        r.integer("threads", c.calibration.threads);
        r.boolean("antithetic", antithetic);
    });
    root.object("calibration", [&](ObjectReader& r) {
        r.number("tolerance", c.calibration.tolerance);
        r.number("alpha_rel_tol", c.calibration.alpha_rel_tol);
        r.integer("max_iterations", c.calibration.max_iterations);
        r.number("alpha_lo", c.calibration.alpha_lo);
        r.number("alpha_hi", c.calibration.alpha_hi);
        r.boolean("control_variate", c.calibration.control_variate);
    });
    root.object("nested", [&](ObjectReader& r) {
        r.integer("n_inner", c.nested.n_inner);
        r.number("bump", c.nested.bump);
        r.integer("seed", c.nested.seed);
        r.boolean("control_variate", c.nested.control_variate);
    });
    root.object("policy", [&](ObjectReader& r) {
        r.numbers("times", c.policy.times);
        r.number("habit", c.policy.habit);
        r.integer("zeta_points", c.policy.zeta_points);
        r.number("wealth_min", c.policy.wealth_min);
        r.number("wealth_max", c.policy.wealth_max);
    });
    root.object("lifetime", [&](ObjectReader& r) {
        r.numbers("pensions", c.lifetime.pensions);
        r.integer("scenario_seed", c.lifetime.run.scenario_seed);
        r.number("horizon", c.lifetime.run.horizon);
        r.number("refresh", c.lifetime.run.refresh);
        r.text("mode", mode);
        r.boolean("allocation", c.lifetime.run.allocation);
        r.integer("substeps", c.lifetime.run.substeps);
    });
    root.finish();

    const TimeGrid grid(t_max, dt);
    c.calibration.grid = grid;
    c.nested.grid = grid;
    c.calibration.sampling = antithetic ? Sampling::antithetic : Sampling::independent;
    c.nested.sampling = c.calibration.sampling;
    c.nested.threads = c.calibration.threads;
    c.lifetime.run.mode = wealth_mode_from_string(mode);
    c.validate();
    return c;
}

RunConfig load_run_config(const std::string& path, RunConfig base) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot read config file '" + path + "'");
    }
    std::ostringstream text;
    text << in.rdbuf();
    return parse_run_config(text.str(), std::move(base));
}

std::string to_json(const RunConfig& c) {
    json doc;
    doc["market"] = {{"mu", c.model.market.mu},
                     {"sigma", c.model.market.sigma},
                     {"r", c.model.market.r},
                     {"rho", c.model.market.rho},
                     {"gamma", c.model.market.gamma}};
    doc["mortality"] = {{"x", c.model.mortality.x}, {"m", c.model.mortality.m}, {"b", c.model.mortality.b}};
    doc["habit"] = {{"eta", c.model.habit.eta}, {"c_bar", c.model.habit.c_bar}};
    doc["pension"] = c.model.pension;
    doc["wealth"] = c.model.wealth;
    doc["simulation"] = {{"t_max", c.calibration.grid.t_max()},
                         {"dt", c.calibration.grid.dt()},
                         {"n_paths", c.calibration.n_paths},
                         {"seed", c.calibration.seed},
                         {"threads", c.calibration.threads},
                         {"antithetic", c.calibration.sampling == Sampling::antithetic}};
    doc["calibration"] = {{"tolerance", c.calibration.tolerance},
                          {"alpha_rel_tol", c.calibration.alpha_rel_tol},
                          {"max_iterations", c.calibration.max_iterations},
                          {"alpha_lo", c.calibration.alpha_lo},
                          {"alpha_hi", c.calibration.alpha_hi},
                          {"control_variate", c.calibration.control_variate}};
    doc["nested"] = {{"n_inner", c.nested.n_inner},
                     {"bump", c.nested.bump},
                     {"seed", c.nested.seed},
                     {"control_variate", c.nested.control_variate}};
    doc["policy"] = {{"times", c.policy.times},
                     {"habit", c.policy.habit},
                     {"zeta_points", c.policy.zeta_points},
                     {"wealth_min", c.policy.wealth_min},
                     {"wealth_max", c.policy.wealth_max}};
    doc["lifetime"] = {{"pensions", c.lifetime.pensions},
                       {"scenario_seed", c.lifetime.run.scenario_seed},
                       {"horizon", c.lifetime.run.horizon},
                       {"refresh", c.lifetime.run.refresh},
                       {"mode", to_string(c.lifetime.run.mode)},
                       {"allocation", c.lifetime.run.allocation},
                       {"substeps", c.lifetime.run.substeps}};
    return doc.dump(2) + "\n";
}

} // namespace habitmc
