#include "habitmc/greedy.hpp"

#include "factors.hpp"
#include "habitmc/errors.hpp"
#include "habitmc/parallel.hpp"
#include "power.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

namespace habitmc {

void ModelParams::validate() const {
    market.validate();
    mortality.validate();
    habit.validate();
    if (!(pension >= 0.0) || !std::isfinite(pension)) {
        throw ConfigError("pension must be >= 0");
    }
    if (!(wealth > 0.0) || !std::isfinite(wealth)) {
        throw ConfigError("wealth must be > 0");
    }
}

void CalibrationConfig::validate() const {
    if (!(tolerance > 0.0)) {
        throw ConfigError("calibration.tolerance must be > 0");
    }
    if (!(alpha_lo > 0.0) || !(alpha_lo < alpha_hi)) {
        throw ConfigError("calibration bracket needs 0 < alpha_lo < alpha_hi");
    }
    if (max_iterations < 1) {
        throw ConfigError("calibration.max_iterations must be >= 1");
    }
    if (!(alpha_rel_tol > 0.0)) {
        throw ConfigError("calibration.alpha_rel_tol must be > 0");
    }
    if (n_paths == 0) {
        throw ConfigError("n_paths must be >= 1");
    }
}

namespace {

void check_positive(double habit, double zeta, double alpha) {
    if (!(habit > 0.0)) {
        throw DomainError("habit must be > 0");
    }
    if (!(zeta > 0.0)) {
        throw DomainError("state price density must be > 0");
    }
    if (!(alpha > 0.0)) {
        throw DomainError("alpha must be > 0");
    }
}

bool use_euler(HabitScheme scheme, const ModelParams& params) {
    switch (scheme) {
    case HabitScheme::euler: return true;
    case HabitScheme::bernoulli:
        if (params.pension != 0.0) {
            throw ConfigError("the closed-form habit only applies without pension");
        }
        return false;
    case HabitScheme::automatic: break;
    }
    return params.pension > 0.0;
}

void check_euler_step(const ModelParams& params, const TimeGrid& grid) {
    if (params.habit.eta * grid.dt() >= 1.0) {
        throw ConfigError("eta * dt must be < 1 for the Euler habit recursion");
    }
}

// Fills C and H for one path. `u[k]` is (e^{rho t} zeta_k / p_k)^{-1/gamma}.
void solve_from_u(double alpha, const ModelParams& params, const TimeGrid& grid, bool euler,
                  std::span<const double> u, std::span<double> consumption, std::span<double> habit) {
    const double gamma = params.market.gamma;
    const double beta = std::pow(alpha, -1.0 / gamma);
    const detail::Power habit_power(1.0 - 1.0 / gamma);
    const std::size_t n = grid.n_points();
    if (!euler) {
        std::vector<double> q(n);
        for (std::size_t k = 0; k < n; ++k) {
            q[k] = beta * u[k];
        }
        detail::bernoulli_habit(q, params.habit.eta, gamma, grid.dt(), params.habit.c_bar, habit);
        for (std::size_t k = 0; k < n; ++k) {
            consumption[k] = habit_power(habit[k]) * q[k];
        }
        return;
    }
    const double eta_dt = params.habit.eta * grid.dt();
    double h = params.habit.c_bar;
    for (std::size_t k = 0; k < n; ++k) {
        const double c = std::max(params.pension, habit_power(h) * beta * u[k]);
        habit[k] = h;
        consumption[k] = c;
        h += eta_dt * (c - h);
    }
}

} // namespace

double consumption_no_pension(double habit, double zeta, double t, double alpha, const MarketParams& mp,
                              const GompertzParams& mort) {
    check_positive(habit, zeta, alpha);
    const double inv_gamma = 1.0 / mp.gamma;
    return std::exp((1.0 - inv_gamma) * std::log(habit) -
                    inv_gamma * (std::log(alpha * zeta) + mp.rho * t - log_survival(mort, t)));
}

double consumption_with_pension(double habit, double zeta, double t, double alpha, double pension,
                                const MarketParams& mp, const GompertzParams& mort) {
    if (!(pension >= 0.0)) {
        throw DomainError("pension must be >= 0");
    }
    return std::max(pension, consumption_no_pension(habit, zeta, t, alpha, mp, mort));
}

PathSolution solve_path(double alpha, const ModelParams& params, const TimeGrid& grid, std::span<const double> zeta,
                        HabitScheme scheme) {
    params.validate();
    if (!(alpha > 0.0)) {
        throw DomainError("alpha must be > 0");
    }
    if (zeta.size() != grid.n_points()) {
        throw ConfigError("zeta path does not match the grid");
    }
    const bool euler = use_euler(scheme, params);
    if (euler) {
        check_euler_step(params, grid);
    }
    const auto factors = detail::make_time_factors(params.market, params.mortality, grid);
    std::vector<double> u(grid.n_points());
    for (std::size_t k = 0; k < u.size(); ++k) {
        if (!(zeta[k] > 0.0)) {
            throw DomainError("state price density must be > 0");
        }
        u[k] = factors.discount[k] * std::pow(zeta[k], -1.0 / params.market.gamma);
    }
    PathSolution out{grid, 1, std::vector<double>(grid.n_points()), std::vector<double>(grid.n_points())};
    solve_from_u(alpha, params, grid, euler, u, out.consumption, out.habit);
    return out;
}

PathSolution solve_paths(double alpha, const ModelParams& params, const PathBundle& paths, HabitScheme scheme,
                         unsigned threads) {
    params.validate();
    if (!(alpha > 0.0)) {
        throw DomainError("alpha must be > 0");
    }
    const TimeGrid& grid = paths.grid();
    const bool euler = use_euler(scheme, params);
    if (euler) {
        check_euler_step(params, grid);
    }
    const auto factors = detail::make_time_factors(params.market, params.mortality, grid);
    const std::size_t n = grid.n_points();
    PathSolution out{grid, paths.n_paths(), std::vector<double>(n * paths.n_paths()),
                     std::vector<double>(n * paths.n_paths())};
    const double inv_gamma = 1.0 / params.market.gamma;
    parallel_for(paths.n_paths(), threads, [&](std::size_t begin, std::size_t end) {
        std::vector<double> u(n);
        for (std::size_t i = begin; i < end; ++i) {
            for (std::size_t k = 0; k < n; ++k) {
                u[k] = factors.discount[k] * std::exp(-inv_gamma * paths.log_zeta(i, k));
            }
            solve_from_u(alpha, params, grid, euler, u, std::span<double>(out.consumption.data() + i * n, n),
                         std::span<double>(out.habit.data() + i * n, n));
        }
    });
    return out;
}

BudgetEvaluator::BudgetEvaluator(const ModelParams& params, const PathBundle& paths, bool control_variate,
                                 HabitScheme scheme, unsigned threads)
    : params_(params), grid_(paths.grid()), n_paths_(paths.n_paths()), unit_size_(paths.unit_size()),
      euler_(use_euler(scheme, params)), threads_(threads) {
    params_.validate();
    if (euler_) {
        check_euler_step(params_, grid_);
    }
    const std::size_t n = grid_.n_points();
    const double gamma = params_.market.gamma;
    const double inv_gamma = 1.0 / gamma;
    const auto factors = detail::make_time_factors(params_.market, params_.mortality, grid_);
    first_.resize(n * n_paths_);
    second_.resize(n * n_paths_);
    std::vector<double> control(n_paths_);

    const double shrink = std::exp(-params_.habit.eta * grid_.dt() / gamma);
    start_.resize(n);
    start_[0] = std::pow(params_.habit.c_bar, inv_gamma);
    for (std::size_t k = 1; k < n; ++k) {
        start_[k] = start_[k - 1] * shrink;
    }

    parallel_for(n_paths_, threads_, [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            double* first = first_.data() + i * n;
            double* second = second_.data() + i * n;
            double y = 0.0;
            double k_acc = 0.0;
            double u_prev = 0.0;
            for (std::size_t k = 0; k < n; ++k) {
                const double lz = paths.log_zeta(i, k);
                const double zeta = std::exp(lz);
                const double u = factors.discount[k] * std::exp(-inv_gamma * lz);
                const double wz = grid_.trapezoid_weight(k) * zeta;
                y += wz * u;
                if (euler_) {
                    first[k] = u;
                    second[k] = wz;
                } else {
                    if (k > 0) {
                        k_acc = shrink * k_acc + 0.5 * grid_.dt() * (u_prev * shrink + u);
                    }
                    first[k] = wz * u;
                    second[k] = k_acc;
                    u_prev = u;
                }
            }
            control[i] = y;
        }
    });

    const std::size_t n_units = n_paths_ / unit_size_;
    if (control_variate && n_units >= 3) {
        // Control: int w zeta^{1-1/gamma} e^{-rho t/gamma} p_t^{1/gamma}, exact for eta = 0.
        const auto moment = detail::zeta_moments(params_.market, 1.0 - inv_gamma, grid_);
        double control_mean = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            control_mean += grid_.trapezoid_weight(k) * moment[k] * factors.discount[k];
        }
        estimator_.emplace(fold_units(control, unit_size_), control_mean);
    } else {
        estimator_.emplace(n_units);
    }
}

double BudgetEvaluator::path_value(std::size_t i, double beta) const {
    const std::size_t n = grid_.n_points();
    const double gamma = params_.market.gamma;
    const double* first = first_.data() + i * n;
    const double* second = second_.data() + i * n;
    if (!euler_) {
        const detail::Power bracket_power(gamma - 1.0);
        const double a = params_.habit.eta / gamma * beta;
        double s = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            s += first[k] * bracket_power(a * second[k] + start_[k]);
        }
        return beta * s;
    }
    return euler_block(i, 1, beta, nullptr);
}

// Euler budget for paths [i, i + count). The habit recursion is a serial
// chain of cbrt/pow latencies, so several paths advance in lockstep.
double BudgetEvaluator::euler_block(std::size_t i, std::size_t count, double beta, double* out) const {
    constexpr std::size_t lanes = 4;
    const std::size_t n = grid_.n_points();
    const detail::TrackedPower habit_power(1.0 - 1.0 / params_.market.gamma);
    const double pension = params_.pension;
    const double eta_dt = params_.habit.eta * grid_.dt();
    double last = 0.0;
    for (std::size_t p0 = 0; p0 < count; p0 += lanes) {
        const std::size_t width = std::min(lanes, count - p0);
        const double* first[lanes];
        const double* second[lanes];
        double h[lanes];
        double y[lanes]; // h^{1-1/gamma}
        double s[lanes];
        for (std::size_t l = 0; l < width; ++l) {
            first[l] = first_.data() + (i + p0 + l) * n;
            second[l] = second_.data() + (i + p0 + l) * n;
            h[l] = params_.habit.c_bar;
            y[l] = habit_power.start(h[l]);
            s[l] = 0.0;
        }
        for (std::size_t k = 0; k < n; ++k) {
            for (std::size_t l = 0; l < width; ++l) {
                const double c = std::max(pension, y[l] * beta * first[l][k]);
                s[l] += second[l][k] * (c - pension);
                const double h_new = h[l] + eta_dt * (c - h[l]);
                y[l] = habit_power.next(y[l], h[l], h_new);
                h[l] = h_new;
            }
        }
        for (std::size_t l = 0; l < width; ++l) {
            if (out != nullptr) {
                out[p0 + l] = s[l];
            }
            last = s[l];
        }
    }
    return last;
}

std::vector<double> BudgetEvaluator::per_path(double alpha) const {
    if (!(alpha > 0.0)) {
        throw DomainError("alpha must be > 0");
    }
    const double beta = std::pow(alpha, -1.0 / params_.market.gamma);
    std::vector<double> values(n_paths_);
    parallel_for(n_paths_, threads_, [&](std::size_t begin, std::size_t end) {
        if (euler_) {
            euler_block(begin, end - begin, beta, values.data() + begin);
            return;
        }
        for (std::size_t i = begin; i < end; ++i) {
            values[i] = path_value(i, beta);
        }
    });
    return values;
}

Estimate BudgetEvaluator::operator()(double alpha) const {
    const auto values = per_path(alpha);
    return estimator_->estimate(fold_units(values, unit_size_));
}

Estimate budget_value(double alpha, const ModelParams& params, const PathBundle& paths, bool control_variate,
                      unsigned threads) {
    return BudgetEvaluator(params, paths, control_variate, HabitScheme::automatic, threads)(alpha);
}

GreedySolution calibrate_alpha(const ModelParams& params, const CalibrationConfig& config) {
    config.validate();
    params.validate();
    const auto paths = generate_paths(params.market, config.grid, config.n_paths, config.seed, config.sampling,
                                      config.threads);
    return calibrate_alpha(params, config, paths);
}

GreedySolution calibrate_alpha(const ModelParams& params, const CalibrationConfig& config, const PathBundle& paths) {
    config.validate();
    params.validate();
    const BudgetEvaluator budget(params, paths, config.control_variate, HabitScheme::automatic, config.threads);
    const double v = params.wealth;

    // Every (alpha, budget) pair seen so far; must stay strictly decreasing.
    std::map<double, Estimate> seen;
    auto evaluate = [&](double alpha) {
        const Estimate e = budget(alpha);
        auto [it, inserted] = seen.emplace(alpha, e);
        if (!inserted) {
            return e;
        }
        const bool bad_left = it != seen.begin() && !(std::prev(it)->second.value > e.value);
        const bool bad_right = std::next(it) != seen.end() && !(std::next(it)->second.value < e.value);
        if (bad_left || bad_right) {
            std::ostringstream msg;
            msg << "budget is not strictly decreasing in alpha near alpha = " << alpha;
            throw NonMonotoneBudget(msg.str());
        }
        return e;
    };

    double lo = config.alpha_lo;
    double hi = config.alpha_hi;
    Estimate b_lo = evaluate(lo);
    for (int i = 0; i < 6 && b_lo.value < v; ++i) {
        lo /= 10.0;
        b_lo = evaluate(lo);
    }
    Estimate b_hi = evaluate(hi);
    for (int i = 0; i < 6 && b_hi.value > v; ++i) {
        hi *= 10.0;
        b_hi = evaluate(hi);
    }
    if (b_lo.value < v || b_hi.value > v) {
        std::ostringstream msg;
        msg << "alpha bracket [" << lo << ", " << hi << "] does not straddle the budget " << v
            << " (budget range " << b_hi.value << " .. " << b_lo.value << ")";
        throw CalibrationError(msg.str());
    }

    GreedySolution sol;
    sol.pension = params.pension;
    sol.wealth = v;
    sol.c_bar = params.habit.c_bar;
    sol.eta = params.habit.eta;

    double best_alpha = std::abs(b_lo.value - v) < std::abs(b_hi.value - v) ? lo : hi;
    Estimate best = std::abs(b_lo.value - v) < std::abs(b_hi.value - v) ? b_lo : b_hi;
    bool converged = false;
    for (int it = 0; it < config.max_iterations; ++it) {
        const double mid = std::sqrt(lo * hi);
        const Estimate b = evaluate(mid);
        ++sol.iterations;
        if (std::abs(b.value - v) <= std::abs(best.value - v)) {
            best = b;
            best_alpha = mid;
        }
        if (b.value > v) {
            lo = mid;
        } else {
            hi = mid;
        }
        const double residual = std::abs(b.value - v) / v;
        if (residual <= config.tolerance && (hi / lo - 1.0 <= config.alpha_rel_tol || b.value == v)) {
            converged = true;
            best = b;
            best_alpha = mid;
            break;
        }
    }
    sol.alpha = best_alpha;
    sol.budget = best;
    sol.budget_residual = std::abs(best.value - v) / v;
    if (!converged && sol.budget_residual > config.tolerance) {
        std::ostringstream msg;
        msg << "calibration did not reach tolerance " << config.tolerance << " after " << config.max_iterations
            << " iterations (residual " << sol.budget_residual << ")";
        throw CalibrationError(msg.str());
    }
    if (config.store_paths) {
        sol.paths = solve_paths(sol.alpha, params, paths, HabitScheme::automatic, config.threads);
    }
    return sol;
}

} // namespace habitmc
