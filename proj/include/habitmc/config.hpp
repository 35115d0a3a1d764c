#pragma once

#include "habitmc/greedy.hpp"
#include "habitmc/lifetime.hpp"
#include "habitmc/wealth.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace habitmc {

struct PolicySettings {
    std::vector<double> times{0.0, 10.0, 20.0, 30.0, 40.0};
    double habit = 1.0;
    std::size_t zeta_points = 41;
    double wealth_min = 0.1;
    double wealth_max = 20.0;
};

struct LifetimeSettings {
    std::vector<double> pensions{0.0, 0.5, 1.0, 1.5, 2.0};
    LifetimeConfig run;
};

/// Effective configuration of a CLI run. Every field has a default, so an
/// empty JSON object is a valid config reproducing the standard setup.
struct RunConfig {
    ModelParams model;
    CalibrationConfig calibration;
    NestedConfig nested;
    PolicySettings policy;
    LifetimeSettings lifetime;

    /// Lifetime settings with the shared nested settings filled in.
    [[nodiscard]] LifetimeConfig lifetime_config() const;
    void validate() const;
};

/// Environment variable that overrides the default simulation seed.
inline constexpr const char* seed_env_var = "HABITMC_SEED";

/// Defaults, with the simulation seed taken from HABITMC_SEED when set.
[[nodiscard]] RunConfig default_run_config();

/// Applies a JSON document on top of `base`. Unknown keys and wrong types
/// throw ConfigError naming the dotted key; the result is validated.
[[nodiscard]] RunConfig parse_run_config(const std::string& json_text, RunConfig base = default_run_config());
[[nodiscard]] RunConfig load_run_config(const std::string& path, RunConfig base = default_run_config());

/// Full effective config as pretty-printed JSON; parse_run_config of the
/// output reproduces the same config.
[[nodiscard]] std::string to_json(const RunConfig& config);

} // namespace habitmc
