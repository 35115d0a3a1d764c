#pragma once

#include "habitmc/market.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace habitmc {

/// Habit H follows dH = eta (C - H) dt from H_0 = c_bar.
struct HabitParams {
    double eta = 0.1;   ///< smoothing factor (1/yr)
    double c_bar = 1.0; ///< initial habit

    void validate() const;
};

/// Habit along one state-price path for the no-pension greedy consumption,
/// using the Bernoulli solution of the coupled habit/consumption equations.
/// Starts from `habit_at_from` at grid index `from` and returns H at grid
/// points from, from+1, ..., n_steps. The inner time integral uses the
/// trapezoid rule on the grid.
[[nodiscard]] std::vector<double> habit_closed_form(const HabitParams& hp, const MarketParams& mp,
                                                    const GompertzParams& mort, double alpha, const TimeGrid& grid,
                                                    std::span<const double> zeta, std::size_t from,
                                                    double habit_at_from);

/// One explicit Euler step of the habit equation. Throws ConfigError when
/// eta * dt >= 1 (the step could overshoot past zero) and DomainError for
/// H <= 0, C < 0 or dt <= 0.
[[nodiscard]] double habit_euler_step(const HabitParams& hp, double habit, double consumption, double dt);

} // namespace habitmc
