#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "habitmc/baselines.hpp"
#include "habitmc/errors.hpp"
#include "habitmc/greedy.hpp"
#include "oracles.hpp"

#include <cmath>
#include <random>

using namespace habitmc;

namespace {

CalibrationConfig small_config(std::size_t n_paths = 4000) {
    CalibrationConfig c;
    c.n_paths = n_paths;
    return c;
}

// c_bar^{1-1/gamma} alpha^{-1/gamma} * annuity, integrand written out here.
double oracle_budget(double alpha, const MarketParams& mp, const GompertzParams& g, double c_bar) {
    const double a = oracle::merton_factor(mp.mu, mp.sigma, mp.r, mp.rho, mp.gamma, g.x, g.m, g.b, 0.0, 60.0);
    return std::pow(c_bar, 1.0 - 1.0 / mp.gamma) * std::pow(alpha, -1.0 / mp.gamma) * a;
}

} // namespace

TEST_CASE("consumption formulas") {
    const MarketParams mp;
    const GompertzParams g;
    CHECK(consumption_no_pension(1, 1, 0, 1, mp, g) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(consumption_no_pension(1, 2, 0, 1, mp, g) == doctest::Approx(std::pow(2.0, -1.0 / 3)).epsilon(1e-14));
    CHECK(consumption_no_pension(1, 2, 0, 1, mp, g) == doctest::Approx(0.7937).epsilon(1e-4));
    CHECK(consumption_no_pension(1, 1, 0, 8, mp, g) == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(consumption_with_pension(1, 1, 0, 8, 1.5, mp, g) == 1.5);
    CHECK(consumption_with_pension(1, 1, 0, 1, 0.5, mp, g) == doctest::Approx(1.0).epsilon(1e-15));

    // written-out formula at an interior point
    const double h = 1.7, z = 0.6, t = 12.0, alpha = 2.5;
    const double p = oracle::gompertz_survival(65, 89.335, 9.5, t);
    const double hand = std::pow(h, 2.0 / 3) * std::pow(alpha * std::exp(0.02 * t) * z / p, -1.0 / 3);
    CHECK(consumption_no_pension(h, z, t, alpha, mp, g) == doctest::Approx(hand).epsilon(1e-13));

    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(0.01, 5.0);
    int identical = 0;
    for (int i = 0; i < 10000; ++i) {
        const double hh = u(rng), zz = u(rng), tt = 10 * u(rng), aa = u(rng);
        identical += consumption_with_pension(hh, zz, tt, aa, 0.0, mp, g) == consumption_no_pension(hh, zz, tt, aa, mp, g);
    }
    CHECK(identical == 10000);

    CHECK_THROWS_AS((void)consumption_no_pension(0, 1, 0, 1, mp, g), DomainError);
    CHECK_THROWS_AS((void)consumption_no_pension(1, 0, 0, 1, mp, g), DomainError);
    CHECK_THROWS_AS((void)consumption_no_pension(1, 1, 0, 0, mp, g), DomainError);
    CHECK_THROWS_AS((void)consumption_with_pension(1, 1, 0, 1, -1, mp, g), DomainError);
}

TEST_CASE("solve_paths special cases") {
    const MarketParams mp;
    const TimeGrid grid(60.0, 0.05);
    const auto b = generate_paths(mp, grid, 40, 17);

    ModelParams frozen;
    frozen.habit = {0.0, 2.0};
    const double alpha = 1.7;
    const auto sol = solve_paths(alpha, frozen, b);
    for (std::size_t i = 0; i < b.n_paths(); i += 7) {
        for (std::size_t k = 0; k < grid.n_points(); k += 97) {
            const double t = grid.time(k);
            const double p = oracle::gompertz_survival(65, 89.335, 9.5, t);
            const double hand = std::pow(2.0, 2.0 / 3) * std::pow(alpha * std::exp(0.02 * t) / p * b.zeta(i, k), -1.0 / 3);
            CHECK(sol.consumption_path(i)[k] == doctest::Approx(hand).epsilon(1e-12));
            CHECK(sol.habit_path(i)[k] == 2.0);
        }
    }

    // A pension above every formula value pins C to it; H relaxes towards it.
    ModelParams rich;
    rich.pension = 1e6;
    const auto pinned = solve_paths(1.0, rich, b);
    const double eta = rich.habit.eta;
    for (std::size_t i = 0; i < b.n_paths(); i += 9) {
        for (std::size_t k = 0; k < grid.n_points(); k += 50) {
            CHECK(pinned.consumption_path(i)[k] == 1e6);
            const double discrete = 1e6 + (1.0 - 1e6) * std::pow(1.0 - eta * grid.dt(), static_cast<double>(k));
            CHECK(pinned.habit_path(i)[k] == doctest::Approx(discrete).epsilon(1e-12));
            const double exact = 1e6 + (1.0 - 1e6) * std::exp(-eta * grid.time(k));
            CHECK(pinned.habit_path(i)[k] == doctest::Approx(exact).epsilon(5 * grid.dt() * eta));
        }
    }

    ModelParams with_floor;
    with_floor.pension = 1.0;
    CHECK_THROWS_AS((void)solve_path(1.0, with_floor, grid, b.zeta_path(0), HabitScheme::bernoulli), ConfigError);
    CHECK_THROWS_AS((void)solve_path(0.0, with_floor, grid, b.zeta_path(0)), DomainError);
}

TEST_CASE("budget value") {
    const MarketParams mp;
    const GompertzParams g;
    const TimeGrid grid(60.0, 0.05);
    const auto b = generate_paths(mp, grid, 20000, 31, Sampling::antithetic);

    ModelParams params;
    CHECK(budget_value(1e12, params, b).value < 1e-3);
    CHECK(budget_value(1e12, params, b).value > 0.0);

    ModelParams richer = params;
    richer.wealth = 20.0;
    CHECK(budget_value(2.0, params, b).value == budget_value(2.0, richer, b).value);

    // eta = 0 against the analytic lognormal-moment budget
    ModelParams frozen;
    frozen.habit.eta = 0.0;
    for (double alpha : {0.1, 1.0, 10.0}) {
        const double exact = oracle_budget(alpha, mp, g, 1.0);
        const Estimate plain = budget_value(alpha, frozen, b, false);
        CAPTURE(alpha);
        CHECK(std::abs(plain.value - exact) <= 3.0 * plain.std_error);
        // The control is exactly proportional to the eta = 0 integrand.
        const Estimate controlled = budget_value(alpha, frozen, b, true);
        CHECK(controlled.value == doctest::Approx(exact).epsilon(1e-4));
    }

    // The evaluator agrees with explicit path solutions (pension branch).
    ModelParams pension = params;
    pension.pension = 0.8;
    const auto small = generate_paths(mp, grid, 50, 3);
    const auto paths = solve_paths(0.5, pension, small);
    std::vector<double> direct(small.n_paths());
    for (std::size_t i = 0; i < small.n_paths(); ++i) {
        double s = 0.0;
        for (std::size_t k = 0; k < grid.n_points(); ++k) {
            s += grid.trapezoid_weight(k) * small.zeta(i, k) * (paths.consumption_path(i)[k] - 0.8);
        }
        direct[i] = s;
    }
    const auto per_path = BudgetEvaluator(pension, small, false)(0.5);
    CHECK(per_path.value == doctest::Approx(oracle::mean(direct)).epsilon(1e-10));
}

TEST_CASE("calibration at eta = 0 inverts the closed form") {
    const MarketParams mp;
    const GompertzParams g;
    ModelParams params;
    params.habit.eta = 0.0;
    for (double v : {5.0, 10.0, 30.0}) {
        params.wealth = v;
        const auto sol = calibrate_alpha(params, small_config());
        const double exact = merton_alpha(v, mp, g, 1.0, 60.0);
        CHECK(sol.alpha == doctest::Approx(exact).epsilon(0.01));
        // and the independent quadrature oracle
        const double a0 = oracle::merton_factor(mp.mu, mp.sigma, mp.r, mp.rho, mp.gamma, g.x, g.m, g.b, 0, 60);
        CHECK(exact == doctest::Approx(std::pow(a0 / v, mp.gamma)).epsilon(1e-8));
    }

    // without the control variate the MC error is honest: 3 standard errors
    // of the budget translate to gamma times that in alpha
    params.wealth = 10.0;
    auto cfg = small_config(20000);
    cfg.control_variate = false;
    const auto plain = calibrate_alpha(params, cfg);
    const double exact = merton_alpha(10.0, mp, g, 1.0, 60.0);
    const double rel_se = plain.budget.std_error / plain.budget.value;
    CHECK(std::abs(plain.alpha / exact - 1.0) <= 3.0 * mp.gamma * rel_se);
}

TEST_CASE("calibration contract") {
    ModelParams params;
    auto cfg = small_config();
    cfg.store_paths = true;
    const auto sol = calibrate_alpha(params, cfg);
    CHECK(sol.budget_residual <= cfg.tolerance);
    CHECK(sol.iterations > 0);
    CHECK(sol.iterations <= cfg.max_iterations);
    REQUIRE(sol.paths.has_value());
    CHECK(sol.paths->n_paths == cfg.n_paths);

    ModelParams richer = params;
    richer.wealth = 12.0;
    CHECK(calibrate_alpha(richer, small_config()).alpha < sol.alpha);

    // pension floor holds exactly on every stored point
    ModelParams pension = params;
    pension.pension = 1.5;
    auto pcfg = small_config(2000);
    pcfg.store_paths = true;
    const auto psol = calibrate_alpha(pension, pcfg);
    CHECK(psol.budget_residual <= pcfg.tolerance);
    double min_gap = 1e300;
    for (double c : psol.paths->consumption) {
        min_gap = std::min(min_gap, c - 1.5);
    }
    CHECK(min_gap >= 0.0);

    // same answer on 1 and 4 threads
    auto one = small_config();
    one.threads = 1;
    auto four = small_config();
    four.threads = 4;
    CHECK(calibrate_alpha(params, one).alpha == calibrate_alpha(params, four).alpha);
}

TEST_CASE("calibration failures") {
    ModelParams params;
    params.wealth = 1e40;
    CHECK_THROWS_AS((void)calibrate_alpha(params, small_config(200)), CalibrationError);

    auto cfg = small_config(200);
    cfg.alpha_lo = 2.0;
    cfg.alpha_hi = 1.0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = small_config(200);
    cfg.tolerance = 0.0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = small_config(201);
    CHECK_THROWS_AS((void)calibrate_alpha(ModelParams{}, cfg), ConfigError);
}

TEST_CASE("scale invariance at pension zero") {
    const MarketParams mp;
    const TimeGrid grid(60.0, 0.05);
    const auto b = generate_paths(mp, grid, 30, 12);
    ModelParams base;
    const double alpha = 2.9;
    const auto ref = solve_paths(alpha, base, b);
    for (double lambda : {0.5, 2.0, 10.0}) {
        ModelParams scaled = base;
        scaled.habit.c_bar *= lambda;
        scaled.wealth *= lambda;
        const auto s = solve_paths(alpha / lambda, scaled, b);
        double worst = 0.0;
        for (std::size_t j = 0; j < ref.consumption.size(); ++j) {
            worst = std::max(worst, std::abs(s.consumption[j] / (lambda * ref.consumption[j]) - 1.0));
            worst = std::max(worst, std::abs(s.habit[j] / (lambda * ref.habit[j]) - 1.0));
        }
        CHECK(worst < 1e-12);
    }
}
