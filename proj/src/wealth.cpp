#include "habitmc/wealth.hpp"

#include "factors.hpp"
#include "habitmc/errors.hpp"
#include "habitmc/parallel.hpp"
#include "power.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace habitmc {

void NestedConfig::validate() const {
    if (n_inner == 0) {
        throw ConfigError("nested.n_inner must be >= 1");
    }
    if (!(bump > 0.0) || !(bump < 0.5)) {
        throw ConfigError("nested.bump must lie in (0, 0.5)");
    }
}

namespace {

// Trapezoid weight of inner point u out of n points.
double inner_weight(std::size_t u, std::size_t n, double dt) {
    if (n <= 1) {
        return 0.0;
    }
    return (u == 0 || u + 1 == n) ? 0.5 * dt : dt;
}

} // namespace

NestedEstimator::NestedEstimator(const ModelParams& params, double alpha, const NestedConfig& config)
    : params_(params), alpha_(alpha), config_(config) {
    params_.validate();
    config_.validate();
    if (!(alpha > 0.0)) {
        throw DomainError("alpha must be > 0");
    }
    const auto inner = generate_paths(params_.market, config_.grid, config_.n_inner, config_.seed,
                                      config_.sampling, config_.threads);
    n_paths_ = inner.n_paths();
    unit_size_ = inner.unit_size();
    const std::size_t n = config_.grid.n_points();
    const double inv_gamma = 1.0 / params_.market.gamma;
    zeta_.resize(n * n_paths_);
    zeta_inv_.resize(n * n_paths_);
    parallel_for(n_paths_, config_.threads, [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            for (std::size_t k = 0; k < n; ++k) {
                const double lz = inner.log_zeta(i, k);
                zeta_[i * n + k] = std::exp(lz);
                zeta_inv_[i * n + k] = std::exp(-inv_gamma * lz);
            }
        }
    });
    auto factors = detail::make_time_factors(params_.market, params_.mortality, config_.grid);
    discount_ = std::move(factors.discount);
    moment_ = detail::zeta_moments(params_.market, 1.0 - 1.0 / params_.market.gamma, config_.grid);
}

UnitEstimator NestedEstimator::estimator_at(std::size_t k0) const {
    const std::size_t n_units = n_paths_ / unit_size_;
    if (!config_.control_variate || n_units < 3) {
        return UnitEstimator(n_units);
    }
    const std::size_t n = config_.grid.n_points();
    const std::size_t n_u = n - k0;
    const double dt = config_.grid.dt();
    std::vector<double> control(n_paths_);
    for (std::size_t i = 0; i < n_paths_; ++i) {
        const double* zt = zeta_.data() + i * n;
        const double* zi = zeta_inv_.data() + i * n;
        double y = 0.0;
        for (std::size_t u = 0; u < n_u; ++u) {
            y += inner_weight(u, n_u, dt) * zt[u] * zi[u] * discount_[k0 + u];
        }
        control[i] = y;
    }
    double mean = 0.0;
    for (std::size_t u = 0; u < n_u; ++u) {
        mean += inner_weight(u, n_u, dt) * moment_[u] * discount_[k0 + u];
    }
    return {fold_units(control, unit_size_), mean};
}

std::vector<std::vector<double>> NestedEstimator::unit_values_F(std::size_t k0, std::span<const double> z) const {
    for (double zj : z) {
        if (!(zj > 0.0)) {
            throw DomainError("F needs z > 0");
        }
    }
    const std::size_t n = config_.grid.n_points();
    const std::size_t n_u = n - k0;
    const std::size_t m = z.size();
    const double gamma = params_.market.gamma;
    const double dt = config_.grid.dt();
    const double beta = std::pow(alpha_, -1.0 / gamma);
    const double a = params_.habit.eta / gamma * beta;
    const double shrink = std::exp(-params_.habit.eta * dt / gamma);
    const detail::Power bracket_power(gamma - 1.0);
    std::vector<double> z_root(m);
    for (std::size_t j = 0; j < m; ++j) {
        z_root[j] = std::pow(z[j], 1.0 / gamma);
    }

    std::vector<double> per_path(m * n_paths_);
    parallel_for(n_paths_, config_.threads, [&](std::size_t begin, std::size_t end) {
        std::vector<double> acc(m);
        for (std::size_t i = begin; i < end; ++i) {
            const double* zt = zeta_.data() + i * n;
            const double* zi = zeta_inv_.data() + i * n;
            std::fill(acc.begin(), acc.end(), 0.0);
            double k_acc = 0.0;
            double u_prev = 0.0;
            double decay = 1.0;
            for (std::size_t u = 0; u < n_u; ++u) {
                const double uq = zi[u] * discount_[k0 + u];
                if (u > 0) {
                    k_acc = shrink * k_acc + 0.5 * dt * (u_prev * shrink + uq);
                    decay *= shrink;
                }
                u_prev = uq;
                const double weight = inner_weight(u, n_u, dt) * zt[u] * uq;
                const double habit_part = a * k_acc;
                for (std::size_t j = 0; j < m; ++j) {
                    acc[j] += weight * bracket_power(habit_part + z_root[j] * decay);
                }
            }
            for (std::size_t j = 0; j < m; ++j) {
                per_path[j * n_paths_ + i] = beta * acc[j];
            }
        }
    });

    std::vector<std::vector<double>> out(m);
    for (std::size_t j = 0; j < m; ++j) {
        out[j] = fold_units(std::span<const double>(per_path.data() + j * n_paths_, n_paths_), unit_size_);
    }
    return out;
}

std::vector<std::vector<double>> NestedEstimator::unit_values_G(std::size_t k0, std::span<const double> y,
                                                                double h) const {
    if (!(h > 0.0)) {
        throw DomainError("G needs h > 0");
    }
    for (double yj : y) {
        if (!(yj > 0.0)) {
            throw DomainError("G needs y > 0");
        }
    }
    const double dt = config_.grid.dt();
    if (params_.habit.eta * dt >= 1.0) {
        throw ConfigError("eta * dt must be < 1 for the Euler habit recursion");
    }
    const std::size_t n = config_.grid.n_points();
    const std::size_t n_u = n - k0;
    const std::size_t m = y.size();
    const double gamma = params_.market.gamma;
    const double beta = std::pow(alpha_, -1.0 / gamma);
    const double pension = params_.pension;
    const double eta_dt = params_.habit.eta * dt;
    const detail::TrackedPower habit_power(1.0 - 1.0 / gamma);
    std::vector<double> scale(m);
    for (std::size_t j = 0; j < m; ++j) {
        scale[j] = beta * std::pow(y[j], -1.0 / gamma);
    }

    // The habit recursion is a serial chain of power latencies; the m bumped
    // chains of several paths advance in lockstep so those latencies overlap.
    constexpr std::size_t lanes = 2;
    std::vector<double> per_path(m * n_paths_);
    parallel_for(n_paths_, config_.threads, [&](std::size_t begin, std::size_t end) {
        std::vector<double> habit(lanes * m);
        std::vector<double> root(lanes * m); // habit^{1-1/gamma}
        std::vector<double> acc(lanes * m);
        for (std::size_t i0 = begin; i0 < end; i0 += lanes) {
            const std::size_t width = std::min(lanes, end - i0);
            const double* zt[lanes];
            const double* zi[lanes];
            for (std::size_t l = 0; l < width; ++l) {
                zt[l] = zeta_.data() + (i0 + l) * n;
                zi[l] = zeta_inv_.data() + (i0 + l) * n;
            }
            std::fill(habit.begin(), habit.end(), h);
            std::fill(root.begin(), root.end(), habit_power.start(h));
            std::fill(acc.begin(), acc.end(), 0.0);
            for (std::size_t u = 0; u < n_u; ++u) {
                const double w = inner_weight(u, n_u, dt);
                for (std::size_t l = 0; l < width; ++l) {
                    const double wz = w * zt[l][u];
                    const double zd = zi[l][u] * discount_[k0 + u];
                    for (std::size_t j = 0; j < m; ++j) {
                        double& hj = habit[l * m + j];
                        double& yj = root[l * m + j];
                        const double c = std::max(pension, yj * scale[j] * zd);
                        acc[l * m + j] += wz * (c - pension);
                        const double h_new = hj + eta_dt * (c - hj);
                        yj = habit_power.next(yj, hj, h_new);
                        hj = h_new;
                    }
                }
            }
            for (std::size_t l = 0; l < width; ++l) {
                for (std::size_t j = 0; j < m; ++j) {
                    per_path[j * n_paths_ + i0 + l] = acc[l * m + j];
                }
            }
        }
    });

    std::vector<std::vector<double>> out(m);
    for (std::size_t j = 0; j < m; ++j) {
        out[j] = fold_units(std::span<const double>(per_path.data() + j * n_paths_, n_paths_), unit_size_);
    }
    return out;
}

Estimate NestedEstimator::wealth_F(double t, double z) const {
    const std::size_t k0 = config_.grid.index_of(t);
    const double zs[] = {z};
    const auto values = unit_values_F(k0, zs);
    return estimator_at(k0).estimate(values[0]);
}

std::vector<Estimate> NestedEstimator::wealth_F_many(double t, std::span<const double> z) const {
    const std::size_t k0 = config_.grid.index_of(t);
    const auto values = unit_values_F(k0, z);
    const auto est = estimator_at(k0);
    std::vector<Estimate> out;
    out.reserve(values.size());
    for (const auto& v : values) {
        out.push_back(est.estimate(v));
    }
    return out;
}

Estimate NestedEstimator::wealth_G(double t, double y, double h) const {
    const std::size_t k0 = config_.grid.index_of(t);
    const double ys[] = {y};
    const auto values = unit_values_G(k0, ys, h);
    return estimator_at(k0).estimate(values[0]);
}

Allocation NestedEstimator::ratio_allocation(std::size_t k0, const std::vector<std::vector<double>>& values,
                                             double sign, double offset) const {
    const auto est = estimator_at(k0);
    const auto& base = values[0];
    const auto& up = values[1];
    const auto& down = values[2];
    const std::size_t n_units = base.size();
    std::vector<double> slope(n_units);
    for (std::size_t i = 0; i < n_units; ++i) {
        slope[i] = (up[i] - down[i]) / (2.0 * config_.bump);
    }
    Allocation out;
    out.wealth = est.estimate(base);
    const double wealth = out.wealth.value;
    out.reliable = wealth > 0.0 && wealth > 10.0 * out.wealth.std_error;
    if (!(wealth > 0.0)) {
        out.theta = std::numeric_limits<double>::quiet_NaN();
        out.std_error = std::numeric_limits<double>::quiet_NaN();
        return out;
    }
    const double ratio = est.mean(slope) / wealth;
    // Linearised influence of each unit on the ratio.
    std::vector<double> influence(n_units);
    for (std::size_t i = 0; i < n_units; ++i) {
        influence[i] = (slope[i] - ratio * base[i]) / wealth;
    }
    const double scale = params_.market.kappa() / params_.market.sigma;
    out.theta = scale * (offset + sign * ratio);
    out.std_error = std::abs(scale) * est.std_error(influence);
    return out;
}

Allocation NestedEstimator::theta_no_pension(double t, double z) const {
    const std::size_t k0 = config_.grid.index_of(t);
    const double zs[] = {z, z * (1.0 + config_.bump), z * (1.0 - config_.bump)};
    return ratio_allocation(k0, unit_values_F(k0, zs), -1.0, 1.0);
}

Allocation NestedEstimator::theta_pension(double t, double y, double h) const {
    const std::size_t k0 = config_.grid.index_of(t);
    const double ys[] = {y, y * (1.0 + config_.bump), y * (1.0 - config_.bump)};
    return ratio_allocation(k0, unit_values_G(k0, ys, h), -1.0, 0.0);
}

Estimate NestedEstimator::wealth(double t, double zeta, double habit) const {
    if (!(zeta > 0.0)) {
        throw DomainError("state price density must be > 0");
    }
    if (params_.pension > 0.0) {
        return wealth_G(t, zeta, habit);
    }
    const Estimate f = wealth_F(t, zeta * habit);
    return {f.value / zeta, f.std_error / zeta};
}

Allocation NestedEstimator::theta(double t, double zeta, double habit) const {
    if (!(zeta > 0.0)) {
        throw DomainError("state price density must be > 0");
    }
    if (params_.pension > 0.0) {
        return theta_pension(t, zeta, habit);
    }
    Allocation a = theta_no_pension(t, zeta * habit);
    a.wealth = {a.wealth.value / zeta, a.wealth.std_error / zeta};
    return a;
}

Estimate wealth_F(double t, double z, double alpha, const ModelParams& params, const NestedConfig& config) {
    return NestedEstimator(params, alpha, config).wealth_F(t, z);
}

Estimate wealth_G(double t, double y, double h, double alpha, const ModelParams& params,
                  const NestedConfig& config) {
    return NestedEstimator(params, alpha, config).wealth_G(t, y, h);
}

double allocation_theta_no_pension(double t, double z, double alpha, const ModelParams& params,
                                   const NestedConfig& config) {
    const Allocation a = NestedEstimator(params, alpha, config).theta_no_pension(t, z);
    if (!a.reliable) {
        throw UnreliableEstimate("F is within 10 standard errors of zero; allocation is not meaningful");
    }
    return a.theta;
}

double allocation_theta_pension(double t, double y, double h, double alpha, const ModelParams& params,
                                const NestedConfig& config) {
    const Allocation a = NestedEstimator(params, alpha, config).theta_pension(t, y, h);
    if (!a.reliable) {
        throw UnreliableEstimate("G is within 10 standard errors of zero; allocation is not meaningful");
    }
    return a.theta;
}

std::vector<PolicyPoint> policy_curve(const NestedEstimator& estimator, double t, double habit,
                                      std::span<const double> zeta_grid) {
    if (!(habit > 0.0)) {
        throw DomainError("habit must be > 0");
    }
    for (std::size_t i = 0; i < zeta_grid.size(); ++i) {
        if (!(zeta_grid[i] > 0.0) || (i > 0 && !(zeta_grid[i] > zeta_grid[i - 1]))) {
            throw DomainError("zeta grid must be positive and increasing");
        }
    }
    const ModelParams& params = estimator.params();
    std::vector<PolicyPoint> out;
    out.reserve(zeta_grid.size());
    for (double zeta : zeta_grid) {
        const Allocation a = estimator.theta(t, zeta, habit);
        PolicyPoint p;
        p.t = t;
        p.habit = habit;
        p.zeta = zeta;
        p.wealth = a.wealth.value;
        p.wealth_se = a.wealth.std_error;
        p.consumption = consumption_with_pension(habit, zeta, t, estimator.alpha(), params.pension, params.market,
                                                 params.mortality);
        p.theta = a.theta;
        p.theta_se = a.std_error;
        p.theta_reliable = a.reliable;
        out.push_back(p);
    }
    std::stable_sort(out.begin(), out.end(),
                     [](const PolicyPoint& lhs, const PolicyPoint& rhs) { return lhs.wealth < rhs.wealth; });
    return out;
}

std::vector<PolicyPoint> policy_curve(double t, double habit, double alpha, const ModelParams& params,
                                      std::span<const double> zeta_grid, const NestedConfig& config) {
    return policy_curve(NestedEstimator(params, alpha, config), t, habit, zeta_grid);
}

double zeta_for_wealth(const NestedEstimator& estimator, double t, double habit, double target) {
    if (!(target > 0.0)) {
        throw DomainError("target wealth must be > 0");
    }
    // f(log zeta) = log wealth - log target, decreasing in zeta.
    auto f = [&](double log_zeta) {
        const double w = estimator.wealth(t, std::exp(log_zeta), habit).value;
        return w > 0.0 ? std::log(w / target) : -std::numeric_limits<double>::infinity();
    };
    double lo = 0.0;
    double f_lo = f(lo);
    double hi = 0.0;
    double f_hi = f_lo;
    const double step = 2.0;
    for (int i = 0; i < 40 && f_lo < 0.0; ++i) {
        hi = lo;
        f_hi = f_lo;
        lo -= step;
        f_lo = f(lo);
    }
    for (int i = 0; i < 40 && f_hi > 0.0; ++i) {
        lo = hi;
        f_lo = f_hi;
        hi += step;
        f_hi = f(hi);
    }
    if (!(f_lo >= 0.0) || !(f_hi <= 0.0)) {
        throw CalibrationError("could not bracket the requested wealth level");
    }
    // Illinois regula falsi, falling back to bisection when f is infinite.
    int side = 0;
    for (int it = 0; it < 100; ++it) {
        double x = 0.5 * (lo + hi);
        if (std::isfinite(f_hi) && std::isfinite(f_lo) && f_lo != f_hi) {
            x = (lo * f_hi - hi * f_lo) / (f_hi - f_lo);
        }
        const double fx = f(x);
        if (std::abs(fx) < 1e-3 || hi - lo < 1e-10) {
            return std::exp(x);
        }
        if (fx > 0.0) {
            lo = x;
            f_lo = fx;
            if (side == +1) {
                f_hi *= 0.5;
            }
            side = +1;
        } else {
            hi = x;
            f_hi = fx;
            if (side == -1) {
                f_lo *= 0.5;
            }
            side = -1;
        }
    }
    return std::exp(0.5 * (lo + hi));
}

std::vector<double> wealth_range_zeta_grid(const NestedEstimator& estimator, double t, double habit,
                                           std::size_t n_points, double wealth_min, double wealth_max) {
    if (n_points < 2 || !(wealth_min > 0.0) || !(wealth_min < wealth_max)) {
        throw ConfigError("zeta grid needs n_points >= 2 and 0 < wealth_min < wealth_max");
    }
    const double lo = std::log(zeta_for_wealth(estimator, t, habit, wealth_max));
    const double hi = std::log(zeta_for_wealth(estimator, t, habit, wealth_min));
    std::vector<double> grid(n_points);
    for (std::size_t i = 0; i < n_points; ++i) {
        grid[i] = std::exp(lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n_points - 1));
    }
    return grid;
}

} // namespace habitmc
