#include "habitmc/habit.hpp"

#include "factors.hpp"
#include "habitmc/errors.hpp"

#include <cmath>
#include <string>

namespace habitmc {

void HabitParams::validate() const {
    if (!(eta >= 0.0) || !std::isfinite(eta)) {
        throw ConfigError("habit.eta must be >= 0 (got " + std::to_string(eta) + ")");
    }
    if (!(c_bar > 0.0) || !std::isfinite(c_bar)) {
        throw ConfigError("habit.c_bar must be > 0 (got " + std::to_string(c_bar) + ")");
    }
}

std::vector<double> habit_closed_form(const HabitParams& hp, const MarketParams& mp, const GompertzParams& mort,
                                      double alpha, const TimeGrid& grid, std::span<const double> zeta,
                                      std::size_t from, double habit_at_from) {
    if (!(alpha > 0.0)) {
        throw DomainError("alpha must be > 0");
    }
    if (!(habit_at_from > 0.0)) {
        throw DomainError("habit must be > 0");
    }
    if (zeta.size() != grid.n_points() || from > grid.n_steps()) {
        throw ConfigError("zeta path does not match the grid");
    }
    const double inv_gamma = 1.0 / mp.gamma;
    const std::size_t n = grid.n_points() - from;
    std::vector<double> q(n);
    for (std::size_t j = 0; j < n; ++j) {
        const std::size_t k = from + j;
        const double z = zeta[k];
        if (!(z > 0.0)) {
            throw DomainError("state price density must be > 0");
        }
        const double t = grid.time(k);
        q[j] = std::exp(-inv_gamma * (std::log(alpha * z) + mp.rho * t - log_survival(mort, t)));
    }
    std::vector<double> out(n);
    detail::bernoulli_habit(q, hp.eta, mp.gamma, grid.dt(), habit_at_from, out);
    return out;
}

double habit_euler_step(const HabitParams& hp, double habit, double consumption, double dt) {
    if (!(dt > 0.0)) {
        throw DomainError("dt must be > 0");
    }
    if (hp.eta * dt >= 1.0) {
        throw ConfigError("eta * dt must be < 1 for a positive Euler habit step");
    }
    if (!(habit > 0.0) || !(consumption >= 0.0)) {
        throw DomainError("Euler habit step needs H > 0 and C >= 0");
    }
    return habit + hp.eta * (consumption - habit) * dt;
}

} // namespace habitmc
