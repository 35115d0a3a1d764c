// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any FAIL.
#include "habitmc/baselines.hpp"
#include "habitmc/lifetime.hpp"
#include "habitmc/wealth.hpp"
#include "oracles.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace habitmc;

namespace {

ModelParams model(double eta, double pension, double wealth = 10.0, double c_bar = 1.0) {
    ModelParams p;
    p.habit.eta = eta;
    p.habit.c_bar = c_bar;
    p.pension = pension;
    p.wealth = wealth;
    return p;
}

const CalibrationConfig calib{};
const NestedConfig nested_cfg{};

struct Verdict {
    bool ok = true;
    std::ostringstream detail;
    void require(bool cond, const std::string& what) {
        if (!cond) {
            ok = false;
            detail << " [" << what << "]";
        }
    }
};

// AC1
Verdict merton_limit() {
    Verdict v;
    const ModelParams p = model(1e-6, 0.0);
    const auto sol = calibrate_alpha(p, calib);
    const NestedEstimator est(p, sol.alpha, nested_cfg);
    const double star = merton_theta(p.market);
    std::mt19937_64 rng(1001);
    std::uniform_int_distribution<int> step(0, 800); // t in [0, 40]
    std::uniform_real_distribution<double> log_z(std::log(0.2), std::log(5.0));
    double worst = 0.0;
    for (int i = 0; i < 10; ++i) {
        const double t = 0.05 * step(rng);
        const double z = std::exp(log_z(rng));
        const Allocation a = est.theta_no_pension(t, z);
        worst = std::max(worst, std::abs(a.theta - star));
        v.require(a.reliable, "unreliable theta");
    }
    v.require(worst <= 0.02, "deviation");
    v.detail << " max|theta-0.78125|=" << worst;
    return v;
}

// AC2
Verdict closed_form_alpha() {
    Verdict v;
    double worst = 0.0;
    for (double w : {5.0, 10.0, 30.0}) {
        const ModelParams p = model(0.0, 0.0, w);
        const double mc = calibrate_alpha(p, calib).alpha;
        const double exact = merton_alpha(w, p.market, p.mortality, 1.0, 60.0);
        worst = std::max(worst, std::abs(mc / exact - 1.0));
    }
    v.require(worst <= 0.01, "alpha off");
    v.detail << " max rel err=" << worst;
    return v;
}

// AC3
Verdict budget_identity() {
    Verdict v;
    double worst_residual = 0.0, worst_z = 0.0;
    for (double eta : {0.01, 0.1, 1.0}) {
        for (double pension : {0.0, 0.5, 1.5}) {
            const ModelParams p = model(eta, pension);
            const auto sol = calibrate_alpha(p, calib);
            worst_residual = std::max(worst_residual, sol.budget_residual);
            const NestedEstimator est(p, sol.alpha, nested_cfg);
            const Estimate x0 = est.wealth(0.0, 1.0, p.habit.c_bar);
            // The nested estimate and the calibration budget are independent samples.
            const double se = std::hypot(x0.std_error, sol.budget.std_error);
            const double z = std::abs(x0.value - p.wealth) / se;
            worst_z = std::max(worst_z, z);
            if (z > 3.0) {
                v.detail << " (eta=" << eta << ",pi=" << pension << ": X0=" << x0.value << ")";
            }
        }
    }
    v.require(worst_residual <= 5e-3, "budget residual");
    v.require(worst_z <= 3.0, "X0 vs v");
    v.detail << " max residual=" << worst_residual << " max |X0-v|/se=" << worst_z;
    return v;
}

// AC4
Verdict scale_invariance() {
    Verdict v;
    const ModelParams p = model(0.1, 0.0);
    CalibrationConfig cfg = calib;
    cfg.store_paths = true;
    const auto base = calibrate_alpha(p, cfg);
    const NestedEstimator base_est(p, base.alpha, nested_cfg);
    double alpha_err = 0.0, path_err = 0.0, wealth_err = 0.0, theta_err = 0.0;
    for (double lambda : {0.5, 2.0, 10.0}) {
        const ModelParams q = model(0.1, 0.0, lambda * p.wealth, lambda * p.habit.c_bar);
        const auto sol = calibrate_alpha(q, cfg);
        alpha_err = std::max(alpha_err, std::abs(sol.alpha * lambda / base.alpha - 1.0));
        for (std::size_t j = 0; j < sol.paths->consumption.size(); j += 37) {
            path_err = std::max(path_err, std::abs(sol.paths->consumption[j] / (lambda * base.paths->consumption[j]) - 1));
            path_err = std::max(path_err, std::abs(sol.paths->habit[j] / (lambda * base.paths->habit[j]) - 1));
        }
        const NestedEstimator est(q, sol.alpha, nested_cfg);
        for (double t : {0.0, 10.0, 20.0}) {
            const double zeta = std::exp(-p.market.r * t);
            const Allocation a = base_est.theta(t, zeta, 1.0);
            const Allocation b = est.theta(t, zeta, lambda);
            wealth_err = std::max(wealth_err, std::abs(b.wealth.value / (lambda * a.wealth.value) - 1.0));
            theta_err = std::max(theta_err, std::abs(a.theta - b.theta));
        }
    }
    v.require(alpha_err <= 0.01, "alpha");
    v.require(path_err <= 0.01, "paths");
    v.require(wealth_err <= 0.01, "wealth");
    v.require(theta_err <= 0.01, "theta");
    v.detail << " alpha=" << alpha_err << " paths=" << path_err << " wealth=" << wealth_err
             << " theta=" << theta_err;
    return v;
}

// AC5
Verdict euler_habit() {
    Verdict v;
    const ModelParams p = model(0.1, 0.0);
    const TimeGrid fine(60.0, 0.05);
    const TimeGrid coarse(60.0, 0.1);
    const auto bundle = generate_paths(p.market, fine, 200, 55);
    const double alpha = calibrate_alpha(p, calib).alpha;
    double err_fine = 0.0, err_coarse = 0.0;
    for (std::size_t i = 0; i < bundle.n_paths(); ++i) {
        const auto zf = bundle.zeta_path(i);
        std::vector<double> zc;
        for (std::size_t k = 0; k < zf.size(); k += 2) {
            zc.push_back(zf[k]);
        }
        auto max_err = [&](const TimeGrid& g, std::span<const double> z) {
            const auto e = solve_path(alpha, p, g, z, HabitScheme::euler);
            const auto b = solve_path(alpha, p, g, z, HabitScheme::bernoulli);
            double m = 0.0;
            for (std::size_t k = 0; k < z.size(); ++k) {
                m = std::max(m, std::abs(e.habit[k] / b.habit[k] - 1.0));
                m = std::max(m, std::abs(e.consumption[k] / b.consumption[k] - 1.0));
            }
            return m;
        };
        err_fine = std::max(err_fine, max_err(fine, zf));
        err_coarse = std::max(err_coarse, max_err(coarse, zc));
    }
    const double ratio = err_coarse / err_fine;
    v.require(err_fine <= 5 * 0.05, "dt=0.05");
    v.require(err_coarse <= 5 * 0.1, "dt=0.1");
    v.require(ratio > 1.6 && ratio < 2.4, "order");
    v.detail << " err(0.1)=" << err_coarse << " err(0.05)=" << err_fine << " ratio=" << ratio;
    return v;
}

// AC6
Verdict wealth_cross_validation() {
    Verdict v;
    const ModelParams p = model(0.1, 0.0);
    const auto sol = calibrate_alpha(p, calib);
    double worst = 0.0;
    for (std::uint64_t seed = 500; seed < 505; ++seed) {
        LifetimeConfig cfg;
        cfg.scenario_seed = seed;
        cfg.horizon = 10.0;
        cfg.nested = nested_cfg;
        const auto w = scenario_brownian(p.market, cfg);
        const auto euler = simulate_lifetime(p, sol, cfg, w);
        cfg.mode = WealthMode::martingale_wealth;
        cfg.allocation = false;
        cfg.refresh = 5.0;
        const auto mart = simulate_lifetime(p, sol, cfg, w);
        for (std::size_t k : {std::size_t{100}, std::size_t{200}}) {
            const double rel = std::abs(euler.wealth[k] / mart.wealth[k] - 1.0);
            worst = std::max(worst, rel);
        }
    }
    v.require(worst <= 0.02, "euler vs martingale");
    v.detail << " max rel diff=" << worst;
    return v;
}

std::vector<PolicyPoint> slice(const NestedEstimator& est, double t, double wealth_min = 0.1) {
    const auto zs = wealth_range_zeta_grid(est, t, 1.0, 41, wealth_min, 20.0);
    return policy_curve(est, t, 1.0, zs);
}

const std::vector<double> slice_times{0.0, 10.0, 20.0, 30.0, 40.0};

// AC7
Verdict figures() {
    Verdict v;
    {
        const ModelParams p = model(0.01, 0.0);
        const NestedEstimator est(p, calibrate_alpha(p, calib).alpha, nested_cfg);
        double lowest = 1.0;
        for (double t : slice_times) {
            std::vector<double> x, c;
            for (const auto& pt : slice(est, t)) {
                x.push_back(pt.wealth);
                c.push_back(pt.consumption);
            }
            lowest = std::min(lowest, oracle::fit_line(x, c).r_squared);
        }
        v.require(lowest > 0.999, "a: linearity");
        v.detail << " a: min R2=" << lowest;
    }
    {
        std::vector<double> c, th;
        for (double eta : {0.01, 0.1, 1.0}) {
            const ModelParams p = model(eta, 0.0);
            const NestedEstimator est(p, calibrate_alpha(p, calib).alpha, nested_cfg);
            const double zeta = zeta_for_wealth(est, 0.0, 1.0, 10.0);
            c.push_back(consumption_no_pension(1.0, zeta, 0.0, est.alpha(), p.market, p.mortality));
            th.push_back(est.theta(0.0, zeta, 1.0).theta);
        }
        v.require(c[0] > c[1] && c[1] > c[2], "b: consumption order");
        v.require(th[0] < th[1] && th[1] < th[2], "b: theta order");
        v.detail << " b: C=" << c[0] << "," << c[1] << "," << c[2] << " theta=" << th[0] << "," << th[1] << ","
                 << th[2];
    }
    {
        // The pension figures use eta = 1; the floor sits at the low-wealth end.
        const ModelParams p = model(1.0, 1.5);
        const NestedEstimator est(p, calibrate_alpha(p, calib).alpha, nested_cfg);
        std::size_t shortest = 1000;
        bool floor_ok = true;
        for (double t : slice_times) {
            const auto curve = slice(est, t, 0.01);
            double lowest = 1e300;
            std::size_t run = 0, best = 0;
            for (const auto& pt : curve) {
                lowest = std::min(lowest, pt.consumption);
                run = pt.consumption == 1.5 ? run + 1 : 0;
                best = std::max(best, run);
            }
            floor_ok = floor_ok && lowest == 1.5;
            shortest = std::min(shortest, best);
        }
        v.require(floor_ok, "c: min consumption");
        v.require(shortest >= 2, "c: flat segment");
        v.detail << " c: shortest flat run=" << shortest << " points";
    }
    {
        // Restricted mean (capped at the 40-year horizon) over a scenario panel.
        const std::vector<double> pensions{0.0, 0.5, 1.0, 1.5, 2.0};
        std::vector<double> mean_depletion;
        for (double pension : pensions) {
            const ModelParams p = model(0.1, pension);
            const auto sol = calibrate_alpha(p, calib);
            double total = 0.0;
            int panel = 0;
            for (std::uint64_t seed = 1000; seed < 1008; ++seed, ++panel) {
                LifetimeConfig cfg;
                cfg.scenario_seed = seed;
                cfg.mode = WealthMode::martingale_wealth;
                cfg.allocation = false;
                cfg.refresh = 1.0;
                cfg.nested = nested_cfg;
                cfg.nested.n_inner = 2000;
                const auto rec = simulate_lifetime(p, sol, cfg);
                total += depletion_time(rec, 0.01 * p.wealth).value_or(cfg.horizon);
            }
            mean_depletion.push_back(total / panel);
        }
        bool decreasing = true;
        v.detail << " d: mean depletion=";
        for (std::size_t j = 0; j < mean_depletion.size(); ++j) {
            v.detail << (j ? "," : "") << mean_depletion[j];
            decreasing = decreasing && (j == 0 || mean_depletion[j] < mean_depletion[j - 1]);
        }
        v.require(decreasing, "d: depletion order");
    }
    {
        const ModelParams p = model(0.1, 0.0, 30.0, 5.0);
        const auto sol = calibrate_alpha(p, calib);
        LifetimeConfig cfg;
        const TimeGrid fine = scenario_grid(cfg);
        const auto w = scenario_brownian(p.market, cfg);
        std::vector<double> zeta(w.size());
        const double kappa = p.market.kappa();
        for (std::size_t j = 0; j < w.size(); ++j) {
            zeta[j] = std::exp(-(p.market.r + 0.5 * kappa * kappa) * fine.time(j) - kappa * w[j]);
        }
        const auto path = solve_path(sol.alpha, p, fine, zeta);
        bool falling = true;
        for (std::size_t j = 1; j <= fine.index_of(2.0); ++j) {
            falling = falling && path.habit[j] < path.habit[j - 1];
        }
        v.require(falling, "e: habit not falling");
        v.detail << " e: C0=" << path.consumption[0] << " H(2)=" << path.habit[fine.index_of(2.0)];
    }
    return v;
}

// AC8
Verdict sensitivity() {
    Verdict v;
    double bump_diff = 0.0, worst_z = 0.0;
    for (double pension : {0.0, 0.5}) {
        const ModelParams p = model(0.1, pension);
        const double alpha = calibrate_alpha(p, calib).alpha;
        NestedConfig half = nested_cfg;
        half.bump /= 2;
        NestedConfig twice = nested_cfg;
        twice.n_inner *= 2;
        const NestedEstimator a(p, alpha, nested_cfg);
        const NestedEstimator b(p, alpha, half);
        const NestedEstimator c(p, alpha, twice);
        for (double t : {0.0, 10.0, 20.0}) {
            const double zeta = zeta_for_wealth(a, t, 1.0, 10.0);
            const Allocation ta = a.theta(t, zeta, 1.0);
            const Allocation tb = b.theta(t, zeta, 1.0);
            const Allocation tc = c.theta(t, zeta, 1.0);
            bump_diff = std::max(bump_diff, std::abs(ta.theta - tb.theta));
            worst_z = std::max(worst_z, std::abs(ta.theta - tc.theta) / std::hypot(ta.std_error, tc.std_error));
        }
    }
    v.require(bump_diff < 1e-3, "bump");
    v.require(worst_z < 2.0, "n_inner");
    v.detail << " max|d theta| bump/2=" << bump_diff << " max n_inner shift=" << worst_z << " pooled se";
    return v;
}

} // namespace

int main() {
    const std::vector<std::pair<const char*, std::function<Verdict()>>> criteria{
        {"AC1 merton-limit theta", merton_limit},
        {"AC2 closed-form calibration", closed_form_alpha},
        {"AC3 budget identity", budget_identity},
        {"AC4 scale invariance", scale_invariance},
        {"AC5 euler vs closed-form habit", euler_habit},
        {"AC6 wealth cross-validation", wealth_cross_validation},
        {"AC7 figure properties", figures},
        {"AC8 sensitivity robustness", sensitivity},
    };
    int failed = 0;
    for (const auto& [name, run] : criteria) {
        const auto start = std::chrono::steady_clock::now();
        Verdict v;
        try {
            v = run();
        } catch (const std::exception& e) {
            v.ok = false;
            v.detail << " threw: " << e.what();
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        std::printf("%s %s:%s (%.1fs)\n", v.ok ? "PASS" : "FAIL", name, v.detail.str().c_str(), secs);
        std::fflush(stdout);
        failed += v.ok ? 0 : 1;
    }
    return failed == 0 ? 0 : 1;
}
