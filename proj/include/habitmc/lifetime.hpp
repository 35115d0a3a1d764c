#pragma once

#include "habitmc/greedy.hpp"
#include "habitmc/wealth.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace habitmc {

enum class WealthMode {
    euler_wealth,      ///< Euler-Maruyama on the wealth SDE with nested-MC theta
    martingale_wealth, ///< X_t read off F or G directly
};

[[nodiscard]] std::string to_string(WealthMode mode);
/// Throws ConfigError for unknown names.
[[nodiscard]] WealthMode wealth_mode_from_string(const std::string& name);

struct LifetimeConfig {
    WealthMode mode = WealthMode::euler_wealth;
    std::uint64_t scenario_seed = 1965;
    double horizon = 40.0;  ///< years recorded
    double refresh = 0.25;  ///< years between nested theta/wealth evaluations
    bool allocation = true; ///< martingale mode only: false skips theta (column is 0)
    int substeps = 5;       ///< Euler wealth steps per grid step
    NestedConfig nested;    ///< its grid is the recording grid

    void validate() const;
};

/// One retiree's realised path under the greedy strategy.
struct LifetimeRecord {
    double pension = 0.0;
    std::vector<double> times;
    std::vector<double> zeta;
    std::vector<double> consumption;
    std::vector<double> habit;
    std::vector<double> wealth;
    std::vector<double> theta;
    std::optional<double> exhausted_at; ///< first time wealth hit 0 (Euler mode)
};

/// Grid the scenario is simulated on: the nested grid with each step split
/// into `substeps`.
[[nodiscard]] TimeGrid scenario_grid(const LifetimeConfig& config);

/// Simulates one scenario driven by the Brownian path `brownian` (values on
/// scenario_grid(config), W_0 = 0). `solution` must be the calibration for
/// `params`; a mismatch throws StateError. Consumption and habit follow the
/// greedy rule on the scenario grid; the record keeps every substeps-th point.
///
/// Euler mode advances, on the scenario grid,
///   X_{k+1} = X_k + ([theta_k (mu - r) + r] X_k - C_k + pi) dt + theta_k sigma X_k dW_k
/// and absorbs at zero: from then on C = pi, theta = 0 and habit follows C.
/// theta is evaluated every `refresh` years and held until the next
/// evaluation, so the allocation never looks ahead of the Brownian path.
/// Martingale mode reads wealth off F or G at the refresh points and
/// interpolates linearly in between.
[[nodiscard]] LifetimeRecord simulate_lifetime(const ModelParams& params, const GreedySolution& solution,
                                               const LifetimeConfig& config, std::span<const double> brownian);

/// Same, with the scenario drawn from `config.scenario_seed`.
[[nodiscard]] LifetimeRecord simulate_lifetime(const ModelParams& params, const GreedySolution& solution,
                                               const LifetimeConfig& config);

/// Brownian scenario path used for `seed` on `grid`.
[[nodiscard]] std::vector<double> scenario_path(const MarketParams& mp, const TimeGrid& grid, std::uint64_t seed);

/// Splits every step of `coarse` (step dt) into `substeps` by Brownian
/// bridges drawn from their own stream of `seed`; the coarse values are kept.
[[nodiscard]] std::vector<double> refine_path(std::span<const double> coarse, int substeps, double dt,
                                              std::uint64_t seed);

/// The scenario of `config` on scenario_grid(config): the nested-grid path of
/// config.scenario_seed, refined. Its grid-point values do not depend on
/// the number of substeps.
[[nodiscard]] std::vector<double> scenario_brownian(const MarketParams& mp, const LifetimeConfig& config);

/// Calibrates and simulates each pension level on the same scenario.
[[nodiscard]] std::vector<LifetimeRecord> pension_sweep(const ModelParams& base, std::span<const double> pensions,
                                                        const CalibrationConfig& calibration,
                                                        const LifetimeConfig& config);

/// First recorded time with wealth <= level.
[[nodiscard]] std::optional<double> depletion_time(const LifetimeRecord& record, double level);

} // namespace habitmc
