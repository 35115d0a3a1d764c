#pragma once

#include "habitmc/market.hpp"

namespace habitmc {

// Closed-form results for eta = 0, where habit is frozen at c_bar and the
// greedy solution reduces to Merton's problem with mortality-weighted
// discounting. Used as oracles for the Monte Carlo pipeline.

/// Constant risky fraction kappa / (sigma gamma).
[[nodiscard]] double merton_theta(const MarketParams& mp);

/// E[ zeta_t^a ] = exp(-a r t + a (a - 1) kappa^2 t / 2).
[[nodiscard]] double zeta_moment(const MarketParams& mp, double a, double t);

/// Integral factor A(t) = int_0^{t_max - t} e^{-rho (t+u)/gamma} p_{t+u}^{1/gamma} m(u) du / (e^{-rho t/gamma} p_t^{1/gamma})
/// with m(u) = E[zeta_u^{1-1/gamma}]; A(0) is the budget per unit of
/// c_bar^{1-1/gamma} alpha^{-1/gamma}. Adaptive Gauss-Kronrod, rel. tol 1e-10.
[[nodiscard]] double merton_annuity(const MarketParams& mp, const GompertzParams& mort, double t, double t_max);

/// c_bar^{1-1/gamma} alpha^{-1/gamma} A(0).
[[nodiscard]] double merton_budget(double alpha, const MarketParams& mp, const GompertzParams& mort, double c_bar,
                                   double t_max);

/// Multiplier that makes merton_budget equal v: (A(0)/v)^gamma c_bar^{gamma-1}.
[[nodiscard]] double merton_alpha(double v, const MarketParams& mp, const GompertzParams& mort, double c_bar,
                                  double t_max);

/// Consumption-to-wealth ratio at time t, 1 / A(t). It does not depend on the
/// path or on alpha. Throws DomainError for t < 0 or t >= t_max.
[[nodiscard]] double merton_propensity(const MarketParams& mp, const GompertzParams& mort, double t, double t_max);

struct MertonOracle {
    MarketParams market;
    GompertzParams mortality;
    double t_max = 60.0;

    [[nodiscard]] double theta_star() const { return merton_theta(market); }
    [[nodiscard]] double propensity(double t) const { return merton_propensity(market, mortality, t, t_max); }
};

} // namespace habitmc
