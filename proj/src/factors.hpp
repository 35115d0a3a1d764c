#pragma once

#include "habitmc/habit.hpp"
#include "habitmc/market.hpp"

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace habitmc::detail {

// Deterministic per-grid-point factors shared by the path solvers.
struct TimeFactors {
    // (e^{rho t} / p_t)^{-1/gamma} = e^{-rho t / gamma} p_t^{1/gamma}
    std::vector<double> discount;
    // e^{-r t}
    std::vector<double> riskless;
};

inline TimeFactors make_time_factors(const MarketParams& mp, const GompertzParams& mort, const TimeGrid& grid) {
    TimeFactors f;
    f.discount.resize(grid.n_points());
    f.riskless.resize(grid.n_points());
    for (std::size_t k = 0; k < grid.n_points(); ++k) {
        const double t = grid.time(k);
        f.discount[k] = std::exp((log_survival(mort, t) - mp.rho * t) / mp.gamma);
        f.riskless[k] = std::exp(-mp.r * t);
    }
    return f;
}

// E[zeta_t^a] = exp(-a r t + a (a - 1) kappa^2 t / 2) on the grid.
inline std::vector<double> zeta_moments(const MarketParams& mp, double a, const TimeGrid& grid) {
    const double kappa = mp.kappa();
    const double rate = -a * mp.r + 0.5 * a * (a - 1.0) * kappa * kappa;
    std::vector<double> m(grid.n_points());
    for (std::size_t k = 0; k < m.size(); ++k) {
        m[k] = std::exp(rate * grid.time(k));
    }
    return m;
}

// Bernoulli habit on grid points from..n given the scaled integrand
// q[k] = (alpha zeta_k e^{rho t_k} / p_k)^{-1/gamma} for k >= from (q is
// indexed relative to `from`). Writes H into `out` (same indexing).
//   K_{j+1} = e^{-eta dt/gamma} K_j + dt/2 (q_j e^{-eta dt/gamma} + q_{j+1})
//   H_j     = (eta/gamma K_j + H_from^{1/gamma} e^{-eta j dt/gamma})^gamma
// which is the trapezoid rule applied to the closed-form solution, written
// without the e^{eta s} growth factors.
inline void bernoulli_habit(std::span<const double> q, double eta, double gamma, double dt, double habit_from,
                            std::span<double> out) {
    const double shrink = std::exp(-eta * dt / gamma);
    const double a = eta / gamma;
    double k_acc = 0.0;
    double start = std::pow(habit_from, 1.0 / gamma);
    out[0] = habit_from;
    for (std::size_t j = 1; j < q.size(); ++j) {
        k_acc = shrink * k_acc + 0.5 * dt * (q[j - 1] * shrink + q[j]);
        start *= shrink;
        out[j] = std::pow(a * k_acc + start, gamma);
    }
}

} // namespace habitmc::detail
