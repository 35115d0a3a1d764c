#include "habitmc/cli.hpp"

#include "habitmc/baselines.hpp"
#include "habitmc/config.hpp"
#include "habitmc/csv.hpp"
#include "habitmc/errors.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <fstream>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace habitmc {

namespace {

struct SharedOptions {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> paths;
    std::string out_path;
    bool dump_config = false;
};

RunConfig effective_config(const SharedOptions& opts) {
    RunConfig c = default_run_config();
    if (!opts.config_path.empty()) {
        c = load_run_config(opts.config_path, c);
    }
    if (opts.seed) {
        c.calibration.seed = *opts.seed;
    }
    if (opts.paths) {
        c.calibration.n_paths = *opts.paths;
    }
    c.validate();
    return c;
}

// Writes to --out when given, otherwise to the command's stdout.
void emit(const SharedOptions& opts, std::ostream& out, const std::function<void(std::ostream&)>& body) {
    if (opts.out_path.empty()) {
        body(out);
        return;
    }
    std::ofstream file(opts.out_path, std::ios::binary);
    if (!file) {
        throw ConfigError("cannot write '" + opts.out_path + "'");
    }
    body(file);
    if (!file) {
        throw ConfigError("write to '" + opts.out_path + "' failed");
    }
}

int cmd_calibrate(const RunConfig& c, const SharedOptions& opts, std::ostream& out) {
    const GreedySolution sol = calibrate_alpha(c.model, c.calibration);
    nlohmann::json report = {
        {"alpha", sol.alpha},
        {"budget", sol.budget.value},
        {"budget_std_error", sol.budget.std_error},
        {"budget_residual", sol.budget_residual},
        {"iterations", sol.iterations},
        {"wealth", c.model.wealth},
        {"pension", c.model.pension},
        {"eta", c.model.habit.eta},
        {"c_bar", c.model.habit.c_bar},
        {"n_paths", c.calibration.n_paths},
        {"seed", c.calibration.seed},
    };
    if (c.model.habit.eta == 0.0 && c.model.pension == 0.0) {
        report["merton_alpha"] = merton_alpha(c.model.wealth, c.model.market, c.model.mortality,
                                              c.model.habit.c_bar, c.calibration.grid.t_max());
    }
    emit(opts, out, [&](std::ostream& os) { os << report.dump(2) << '\n'; });
    return 0;
}

int cmd_policy_surface(const RunConfig& c, const SharedOptions& opts, std::ostream& out, std::ostream& err) {
    const GreedySolution sol = calibrate_alpha(c.model, c.calibration);
    const NestedEstimator nested(c.model, sol.alpha, c.nested);
    std::vector<PolicyPoint> rows;
    for (double t : c.policy.times) {
        const auto grid = wealth_range_zeta_grid(nested, t, c.policy.habit, c.policy.zeta_points,
                                                 c.policy.wealth_min, c.policy.wealth_max);
        const auto curve = policy_curve(nested, t, c.policy.habit, grid);
        rows.insert(rows.end(), curve.begin(), curve.end());
    }
    std::size_t unreliable = 0;
    for (const auto& p : rows) {
        unreliable += p.theta_reliable ? 0 : 1;
    }
    if (unreliable > 0) {
        err << "warning: " << unreliable << " of " << rows.size()
            << " rows have theta_reliable=0 (wealth within 10 standard errors of zero)\n";
    }
    emit(opts, out, [&](std::ostream& os) { write_policy_csv(os, rows); });
    return 0;
}

int cmd_lifetime(const RunConfig& c, const SharedOptions& opts, std::ostream& out) {
    const auto records = pension_sweep(c.model, c.lifetime.pensions, c.calibration, c.lifetime_config());
    emit(opts, out, [&](std::ostream& os) { write_lifetime_csv(os, records); });
    return 0;
}

// Eta -> 0 limit suite against the Merton closed forms.
int cmd_merton_check(const RunConfig& c, const SharedOptions& opts, std::ostream& out) {
    const MarketParams& mp = c.model.market;
    const double t_max = c.calibration.grid.t_max();
    const MertonOracle oracle{mp, c.model.mortality, t_max};
    const double theta_star = oracle.theta_star();
    const double c_bar = c.model.habit.c_bar;
    const std::vector<double> times{0.0, 10.0, 20.0};
    bool all_ok = true;
    std::ostringstream report;
    report.precision(6);
    auto verdict = [&](bool ok, const std::string& line) {
        all_ok = all_ok && ok;
        report << (ok ? "PASS " : "FAIL ") << line << '\n';
    };
    report << "theta_star " << theta_star << '\n';

    ModelParams limit = c.model;
    limit.pension = 0.0;
    limit.habit.eta = 1e-6;
    const GreedySolution near = calibrate_alpha(limit, c.calibration);
    const NestedEstimator near_nested(limit, near.alpha, c.nested);
    for (double t : times) {
        const double zeta = std::exp(-mp.r * t);
        const Allocation a = near_nested.theta(t, zeta, c_bar);
        verdict(std::abs(a.theta - theta_star) <= 0.02,
                "theta_limit t=" + format_number(t) + " theta=" + format_number(a.theta) + " (tol 0.02)");
    }

    ModelParams frozen = c.model;
    frozen.pension = 0.0;
    frozen.habit.eta = 0.0;
    const GreedySolution sol = calibrate_alpha(frozen, c.calibration);
    const double alpha_exact = merton_alpha(frozen.wealth, mp, frozen.mortality, c_bar, t_max);
    const double alpha_err = std::abs(sol.alpha / alpha_exact - 1.0);
    verdict(alpha_err <= 0.01, "alpha_closed_form alpha=" + format_number(sol.alpha) +
                                   " exact=" + format_number(alpha_exact) + " (tol 1%)");

    const NestedEstimator frozen_nested(frozen, sol.alpha, c.nested);
    for (double t : times) {
        const double zeta = std::exp(-mp.r * t);
        const double consumption = consumption_no_pension(c_bar, zeta, t, sol.alpha, mp, frozen.mortality);
        const double wealth = frozen_nested.wealth(t, zeta, c_bar).value;
        const double ratio = consumption / wealth;
        const double exact = oracle.propensity(t);
        verdict(std::abs(ratio / exact - 1.0) <= 0.01, "propensity t=" + format_number(t) +
                                                           " c/x=" + format_number(ratio) +
                                                           " exact=" + format_number(exact) + " (tol 1%)");
    }
    emit(opts, out, [&](std::ostream& os) { os << report.str(); });
    return all_ok ? 0 : 2;
}

} // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Greedy habit-formation consumption and allocation by Monte Carlo", "habitmc"};
    app.require_subcommand(1);
    SharedOptions opts;
    app.add_option("--config", opts.config_path, "JSON config file (omitted keys keep their defaults)");
    app.add_option("--seed", opts.seed, "simulation seed (overrides the config and " + std::string(seed_env_var) + ")");
    app.add_option("--paths", opts.paths, "outer paths used for calibration")->check(CLI::PositiveNumber);
    app.add_option("--out", opts.out_path, "write output here instead of stdout");
    app.add_flag("--dump-config", opts.dump_config, "print the effective config as JSON and exit");

    auto* calibrate = app.add_subcommand("calibrate", "solve for the budget multiplier alpha");
    auto* surface = app.add_subcommand("policy-surface", "consumption and allocation against wealth as CSV");
    auto* lifetime = app.add_subcommand("lifetime", "one scenario per pension level as CSV");
    auto* merton = app.add_subcommand("merton-check", "compare the eta -> 0 limit with closed forms");
    for (auto* sub : {calibrate, surface, lifetime, merton}) {
        sub->fallthrough();
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "habitmc: " << e.what() << '\n';
        return 1;
    }

    try {
        const RunConfig config = effective_config(opts);
        if (opts.dump_config) {
            out << to_json(config);
            return 0;
        }
        if (calibrate->parsed()) {
            return cmd_calibrate(config, opts, out);
        }
        if (surface->parsed()) {
            return cmd_policy_surface(config, opts, out, err);
        }
        if (lifetime->parsed()) {
            return cmd_lifetime(config, opts, out);
        }
        return cmd_merton_check(config, opts, out);
    } catch (const ConfigError& e) {
        err << "habitmc: config error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        err << "habitmc: " << e.what() << '\n';
        return 2;
    }
}

} // namespace habitmc
