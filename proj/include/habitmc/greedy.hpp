#pragma once

#include "habitmc/estimate.hpp"
#include "habitmc/habit.hpp"
#include "habitmc/market.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace habitmc {

/// Everything that defines one retiree's problem.
struct ModelParams {
    MarketParams market;
    GompertzParams mortality;
    HabitParams habit;
    double pension = 0.0; ///< exogenous income rate pi
    double wealth = 10.0; ///< initial wealth v

    void validate() const;
};

/// How the habit recursion is solved along a path.
enum class HabitScheme {
    automatic, ///< Bernoulli closed form when pension == 0, Euler otherwise
    bernoulli, ///< closed form (only valid with pension == 0)
    euler,     ///< explicit step: C_k from H_k, then one Euler step for H
};

struct CalibrationConfig {
    double tolerance = 5e-3;      ///< max |budget - v| / v
    double alpha_rel_tol = 1e-5;  ///< bisection keeps going until alpha is pinned this tightly
    int max_iterations = 80;
    double alpha_lo = 1e-6;
    double alpha_hi = 1e6;
    TimeGrid grid{60.0, 0.05};
    std::size_t n_paths = 20000;
    std::uint64_t seed = 20240611;
    Sampling sampling = Sampling::antithetic;
    bool control_variate = true;
    unsigned threads = 0;
    bool store_paths = false; ///< keep per-path (C, H) in the solution

    void validate() const;
};

/// Consumption and habit on every path of a bundle, row-major by path.
struct PathSolution {
    TimeGrid grid;
    std::size_t n_paths = 0;
    std::vector<double> consumption;
    std::vector<double> habit;

    [[nodiscard]] std::span<const double> consumption_path(std::size_t i) const {
        return {consumption.data() + i * grid.n_points(), grid.n_points()};
    }
    [[nodiscard]] std::span<const double> habit_path(std::size_t i) const {
        return {habit.data() + i * grid.n_points(), grid.n_points()};
    }
};

struct GreedySolution {
    double alpha = 0.0;
    double budget_residual = 0.0; ///< |budget(alpha) - v| / v on the calibration bundle
    Estimate budget;
    int iterations = 0;           ///< budget evaluations spent in bisection
    double pension = 0.0;
    double wealth = 0.0;
    double c_bar = 0.0;
    double eta = 0.0;
    std::optional<PathSolution> paths;
};

/// Greedy consumption without pension:
///   C = H^{1-1/gamma} (alpha e^{rho t} zeta / p_t)^{-1/gamma}.
[[nodiscard]] double consumption_no_pension(double habit, double zeta, double t, double alpha,
                                            const MarketParams& mp, const GompertzParams& mort);

/// Same, floored at the pension rate.
[[nodiscard]] double consumption_with_pension(double habit, double zeta, double t, double alpha, double pension,
                                              const MarketParams& mp, const GompertzParams& mort);

/// Greedy (C, H) along a single zeta path on `grid`.
[[nodiscard]] PathSolution solve_path(double alpha, const ModelParams& params, const TimeGrid& grid,
                                      std::span<const double> zeta, HabitScheme scheme = HabitScheme::automatic);

[[nodiscard]] PathSolution solve_paths(double alpha, const ModelParams& params, const PathBundle& paths,
                                       HabitScheme scheme = HabitScheme::automatic, unsigned threads = 0);

/// Precomputes the alpha-independent part of the budget on a fixed bundle so
/// that each trial multiplier costs one pass of cheap arithmetic. The
/// estimate is E[ int_0^{t_max} zeta_s (C_s - pi) ds ] by trapezoid in time.
class BudgetEvaluator {
public:
    BudgetEvaluator(const ModelParams& params, const PathBundle& paths, bool control_variate = true,
                    HabitScheme scheme = HabitScheme::automatic, unsigned threads = 0);

    [[nodiscard]] Estimate operator()(double alpha) const;

    /// Per-path discounted consumption-from-wealth at this alpha.
    [[nodiscard]] std::vector<double> per_path(double alpha) const;

private:
    double path_value(std::size_t i, double beta) const;
    double euler_block(std::size_t i, std::size_t count, double beta, double* out) const;

    ModelParams params_;
    TimeGrid grid_;
    std::size_t n_paths_;
    std::size_t unit_size_;
    bool euler_;
    unsigned threads_;
    std::vector<double> first_;  // bernoulli: w zeta u;  euler: u
    std::vector<double> second_; // bernoulli: K at alpha=1;  euler: w zeta
    std::vector<double> start_;  // bernoulli: c_bar^{1/gamma} e^{-eta t/gamma}
    std::optional<UnitEstimator> estimator_;
};

[[nodiscard]] Estimate budget_value(double alpha, const ModelParams& params, const PathBundle& paths,
                                    bool control_variate = true, unsigned threads = 0);

/// Finds alpha with budget(alpha) = v by bisection in log(alpha) on one
/// fixed bundle. Throws CalibrationError if no bracket is found and
/// NonMonotoneBudget if the evaluated budgets are not strictly decreasing in
/// alpha.
[[nodiscard]] GreedySolution calibrate_alpha(const ModelParams& params, const CalibrationConfig& config);
[[nodiscard]] GreedySolution calibrate_alpha(const ModelParams& params, const CalibrationConfig& config,
                                             const PathBundle& paths);

} // namespace habitmc
