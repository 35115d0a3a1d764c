#include "habitmc/baselines.hpp"

#include "habitmc/errors.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>

namespace habitmc {

double merton_theta(const MarketParams& mp) {
    return mp.kappa() / (mp.sigma * mp.gamma);
}

double zeta_moment(const MarketParams& mp, double a, double t) {
    const double kappa = mp.kappa();
    return std::exp(-a * mp.r * t + 0.5 * a * (a - 1.0) * kappa * kappa * t);
}

double merton_annuity(const MarketParams& mp, const GompertzParams& mort, double t, double t_max) {
    if (!(t >= 0.0) || !(t < t_max)) {
        throw DomainError("annuity time must lie in [0, t_max)");
    }
    const double a = 1.0 - 1.0 / mp.gamma;
    const double log_start = log_survival(mort, t);
    auto integrand = [&](double u) {
        const double log_p_ratio = log_survival(mort, t + u) - log_start;
        return std::exp(-mp.rho * u / mp.gamma + log_p_ratio / mp.gamma) * zeta_moment(mp, a, u);
    };
    return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(integrand, 0.0, t_max - t, 15, 1e-10);
}

double merton_budget(double alpha, const MarketParams& mp, const GompertzParams& mort, double c_bar,
                     double t_max) {
    if (!(alpha > 0.0)) {
        throw DomainError("alpha must be > 0");
    }
    return std::pow(c_bar, 1.0 - 1.0 / mp.gamma) * std::pow(alpha, -1.0 / mp.gamma) *
           merton_annuity(mp, mort, 0.0, t_max);
}

double merton_alpha(double v, const MarketParams& mp, const GompertzParams& mort, double c_bar, double t_max) {
    if (!(v > 0.0)) {
        throw DomainError("wealth must be > 0");
    }
    return std::pow(merton_annuity(mp, mort, 0.0, t_max) / v, mp.gamma) * std::pow(c_bar, mp.gamma - 1.0);
}

double merton_propensity(const MarketParams& mp, const GompertzParams& mort, double t, double t_max) {
    return 1.0 / merton_annuity(mp, mort, t, t_max);
}

} // namespace habitmc
