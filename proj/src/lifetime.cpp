#include "habitmc/lifetime.hpp"

#include "habitmc/errors.hpp"

#include <cmath>
#include <map>
#include <random>

namespace habitmc {

std::string to_string(WealthMode mode) {
    return mode == WealthMode::euler_wealth ? "euler_wealth" : "martingale_wealth";
}

WealthMode wealth_mode_from_string(const std::string& name) {
    if (name == "euler_wealth") {
        return WealthMode::euler_wealth;
    }
    if (name == "martingale_wealth") {
        return WealthMode::martingale_wealth;
    }
    throw ConfigError("unknown wealth mode '" + name + "' (expected euler_wealth or martingale_wealth)");
}

void LifetimeConfig::validate() const {
    nested.validate();
    if (!(horizon > 0.0) || horizon > nested.grid.t_max()) {
        throw ConfigError("lifetime.horizon must lie in (0, t_max]");
    }
    if (!(refresh > 0.0)) {
        throw ConfigError("lifetime.refresh must be > 0");
    }
    if (substeps < 1) {
        throw ConfigError("lifetime.substeps must be >= 1");
    }
    if (!nested.grid.contains(horizon) || !nested.grid.contains(refresh)) {
        throw ConfigError("lifetime.horizon and lifetime.refresh must be multiples of dt");
    }
}

TimeGrid scenario_grid(const LifetimeConfig& config) {
    const TimeGrid& g = config.nested.grid;
    return {g.t_max(), g.dt() / config.substeps};
}

std::vector<double> scenario_path(const MarketParams& mp, const TimeGrid& grid, std::uint64_t seed) {
    const auto bundle = generate_paths(mp, grid, 1, seed);
    const auto w = bundle.w(0);
    return {w.begin(), w.end()};
}

std::vector<double> refine_path(std::span<const double> coarse, int substeps, double dt, std::uint64_t seed) {
    if (substeps < 1 || coarse.empty() || !(dt > 0.0)) {
        throw ConfigError("refine_path needs substeps >= 1, dt > 0 and a nonempty path");
    }
    const auto sub = static_cast<std::size_t>(substeps);
    if (sub == 1) {
        return {coarse.begin(), coarse.end()};
    }
    std::mt19937_64 rng(stream_seed(seed, 1));
    std::normal_distribution<double> normal;
    const double sd = std::sqrt(dt / static_cast<double>(sub));
    std::vector<double> fine((coarse.size() - 1) * sub + 1);
    std::vector<double> walk(sub + 1);
    for (std::size_t k = 0; k + 1 < coarse.size(); ++k) {
        for (std::size_t i = 1; i <= sub; ++i) {
            walk[i] = walk[i - 1] + sd * normal(rng);
        }
        // Pin the free walk to the coarse increment.
        const double gap = coarse[k + 1] - coarse[k] - walk[sub];
        for (std::size_t i = 0; i < sub; ++i) {
            const double frac = static_cast<double>(i) / static_cast<double>(sub);
            fine[k * sub + i] = coarse[k] + walk[i] + frac * gap;
        }
    }
    fine.back() = coarse.back();
    return fine;
}

std::vector<double> scenario_brownian(const MarketParams& mp, const LifetimeConfig& config) {
    const auto coarse = scenario_path(mp, config.nested.grid, config.scenario_seed);
    return refine_path(coarse, config.substeps, config.nested.grid.dt(), config.scenario_seed);
}

namespace {

void check_solution(const ModelParams& params, const GreedySolution& solution) {
    if (!(solution.alpha > 0.0)) {
        throw StateError("lifetime simulation needs a calibrated multiplier");
    }
    if (solution.wealth != params.wealth || solution.pension != params.pension ||
        solution.c_bar != params.habit.c_bar || solution.eta != params.habit.eta) {
        throw StateError("calibration does not belong to these parameters");
    }
}

} // namespace

LifetimeRecord simulate_lifetime(const ModelParams& params, const GreedySolution& solution,
                                 const LifetimeConfig& config, std::span<const double> brownian) {
    params.validate();
    config.validate();
    check_solution(params, solution);
    const TimeGrid& grid = config.nested.grid;
    const TimeGrid fine = scenario_grid(config);
    const auto sub = static_cast<std::size_t>(config.substeps);
    if (brownian.size() != fine.n_points()) {
        throw ConfigError("scenario path does not match the scenario grid");
    }
    const MarketParams& mp = params.market;
    const double kappa = mp.kappa();
    const double drift = mp.r + 0.5 * kappa * kappa;

    std::vector<double> zeta(fine.n_points());
    for (std::size_t j = 0; j < zeta.size(); ++j) {
        zeta[j] = std::exp(-drift * fine.time(j) - kappa * brownian[j]);
    }
    const PathSolution greedy = solve_path(solution.alpha, params, fine, zeta);

    const std::size_t last = grid.index_of(config.horizon);
    const std::size_t stride = grid.index_of(config.refresh);
    const NestedEstimator nested(params, solution.alpha, config.nested);
    const bool with_theta = config.mode == WealthMode::euler_wealth || config.allocation;

    // Nested evaluations at refresh points (grid indices), on demand.
    std::map<std::size_t, Allocation> cache;
    auto at_refresh = [&](std::size_t k) -> const Allocation& {
        auto it = cache.find(k);
        if (it == cache.end()) {
            const double t = grid.time(k);
            Allocation a;
            if (with_theta) {
                a = nested.theta(t, zeta[k * sub], greedy.habit[k * sub]);
                if (!std::isfinite(a.theta)) {
                    a.theta = 0.0;
                }
            } else {
                a.wealth = nested.wealth(t, zeta[k * sub], greedy.habit[k * sub]);
            }
            it = cache.emplace(k, a).first;
        }
        return it->second;
    };
    // theta in force at scenario step j: the last refresh at or before it.
    auto held_theta = [&](std::size_t j) { return at_refresh((j / (stride * sub)) * stride).theta; };

    LifetimeRecord rec;
    rec.pension = params.pension;
    const std::size_t n = last + 1;
    rec.times.resize(n);
    rec.zeta.resize(n);
    rec.consumption.resize(n);
    rec.habit.resize(n);
    rec.wealth.resize(n);
    rec.theta.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
        rec.times[k] = grid.time(k);
        rec.zeta[k] = zeta[k * sub];
    }

    if (config.mode == WealthMode::martingale_wealth) {
        for (std::size_t k = 0; k < n; ++k) {
            const std::size_t left = (k / stride) * stride;
            double x = at_refresh(left).wealth.value;
            if (left != k) {
                const std::size_t right = std::min(left + stride, grid.n_steps());
                const double frac = static_cast<double>(k - left) / static_cast<double>(right - left);
                x += (at_refresh(right).wealth.value - x) * frac;
            }
            rec.consumption[k] = greedy.consumption[k * sub];
            rec.habit[k] = greedy.habit[k * sub];
            rec.wealth[k] = std::max(0.0, x);
            rec.theta[k] = with_theta ? held_theta(k * sub) : 0.0;
        }
        return rec;
    }

    const double dt = fine.dt();
    const double eta_dt = params.habit.eta * dt;
    const std::size_t steps = last * sub;
    double x = params.wealth;
    bool exhausted = false;
    double habit = greedy.habit[0];
    for (std::size_t j = 0; j <= steps; ++j) {
        double c = params.pension;
        double theta = 0.0;
        if (!exhausted) {
            c = greedy.consumption[j];
            habit = greedy.habit[j];
            theta = held_theta(j);
        }
        if (j % sub == 0) {
            const std::size_t k = j / sub;
            rec.consumption[k] = c;
            rec.habit[k] = habit;
            rec.wealth[k] = x;
            rec.theta[k] = theta;
        }
        if (j == steps) {
            break;
        }
        if (!exhausted) {
            const double dw = brownian[j + 1] - brownian[j];
            x += ((theta * (mp.mu - mp.r) + mp.r) * x - c + params.pension) * dt + theta * mp.sigma * x * dw;
            if (x <= 0.0) {
                x = 0.0;
                exhausted = true;
                rec.exhausted_at = fine.time(j + 1);
            }
        }
        if (exhausted) {
            habit += eta_dt * (c - habit);
        }
    }
    return rec;
}

LifetimeRecord simulate_lifetime(const ModelParams& params, const GreedySolution& solution,
                                 const LifetimeConfig& config) {
    return simulate_lifetime(params, solution, config, scenario_brownian(params.market, config));
}

std::vector<LifetimeRecord> pension_sweep(const ModelParams& base, std::span<const double> pensions,
                                          const CalibrationConfig& calibration, const LifetimeConfig& config) {
    const auto w = scenario_brownian(base.market, config);
    std::vector<LifetimeRecord> out;
    out.reserve(pensions.size());
    for (double pension : pensions) {
        ModelParams p = base;
        p.pension = pension;
        const GreedySolution sol = calibrate_alpha(p, calibration);
        out.push_back(simulate_lifetime(p, sol, config, w));
    }
    return out;
}

std::optional<double> depletion_time(const LifetimeRecord& record, double level) {
    for (std::size_t k = 0; k < record.wealth.size(); ++k) {
        if (record.wealth[k] <= level) {
            return record.times[k];
        }
    }
    return std::nullopt;
}

} // namespace habitmc
