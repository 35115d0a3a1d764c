#pragma once

#include "habitmc/estimate.hpp"
#include "habitmc/greedy.hpp"
#include "habitmc/market.hpp"

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace habitmc {

/// Settings for inner (nested) simulations started from a state at time t.
struct NestedConfig {
    std::size_t n_inner = 5000;
    double bump = 1e-3; ///< relative central-difference step
    std::uint64_t seed = 7771;
    Sampling sampling = Sampling::antithetic;
    bool control_variate = true;
    unsigned threads = 0;
    TimeGrid grid{60.0, 0.05};

    void validate() const;
};

/// One point of a policy surface at fixed (t, H).
struct PolicyPoint {
    double t = 0.0;
    double habit = 0.0;
    double zeta = 0.0;
    double wealth = 0.0;
    double wealth_se = 0.0;
    double consumption = 0.0;
    double theta = 0.0;
    double theta_se = 0.0;
    bool theta_reliable = false;
};

/// Allocation estimate with the wealth it was computed from.
struct Allocation {
    double theta = 0.0;
    double std_error = 0.0;
    Estimate wealth; ///< F (no pension) or G (pension)
    bool reliable = false;
};

/// Holds one inner bundle (restarting the shifted density at 1) and evaluates
/// the wealth functions and allocations against it. Every evaluation reuses
/// the same inner paths, so bumped evaluations share random numbers.
///
///   F(t, z)    = zeta_t X_t for the no-pension greedy solution, z = zeta_t H_t
///   G(t, y, h) = X_t with pension, given zeta_t = y and H_t = h
///
/// Inner integrals are truncated at the grid horizon and use the trapezoid
/// rule. t must be a grid point.
class NestedEstimator {
public:
    NestedEstimator(const ModelParams& params, double alpha, const NestedConfig& config);

    [[nodiscard]] Estimate wealth_F(double t, double z) const;
    [[nodiscard]] Estimate wealth_G(double t, double y, double h) const;

    /// theta = kappa/sigma (1 - z F_z / F).
    [[nodiscard]] Allocation theta_no_pension(double t, double z) const;
    /// theta = -kappa y G_y / (sigma G).
    [[nodiscard]] Allocation theta_pension(double t, double y, double h) const;

    /// Wealth X_t at state (zeta, H): F(t, zeta H)/zeta without pension, G otherwise.
    [[nodiscard]] Estimate wealth(double t, double zeta, double habit) const;
    [[nodiscard]] Allocation theta(double t, double zeta, double habit) const;

    /// F for several z at once on the same inner paths (one estimate per z).
    [[nodiscard]] std::vector<Estimate> wealth_F_many(double t, std::span<const double> z) const;

    [[nodiscard]] const ModelParams& params() const noexcept { return params_; }
    [[nodiscard]] double alpha() const noexcept { return alpha_; }
    [[nodiscard]] const NestedConfig& config() const noexcept { return config_; }

private:
    // Per-unit integrals for each requested point; result[j][unit].
    std::vector<std::vector<double>> unit_values_F(std::size_t k0, std::span<const double> z) const;
    std::vector<std::vector<double>> unit_values_G(std::size_t k0, std::span<const double> y, double h) const;
    UnitEstimator estimator_at(std::size_t k0) const;
    Allocation ratio_allocation(std::size_t k0, const std::vector<std::vector<double>>& values, double sign,
                                double offset) const;

    ModelParams params_;
    double alpha_;
    NestedConfig config_;
    std::size_t n_paths_;
    std::size_t unit_size_;
    std::vector<double> zeta_;     // inner zeta-tilde, row-major by path
    std::vector<double> zeta_inv_; // zeta-tilde^{-1/gamma}
    std::vector<double> discount_; // e^{-rho t/gamma} p_t^{1/gamma}
    std::vector<double> moment_;   // E[zeta_t^{1-1/gamma}]
};

[[nodiscard]] Estimate wealth_F(double t, double z, double alpha, const ModelParams& params,
                                const NestedConfig& config);
[[nodiscard]] Estimate wealth_G(double t, double y, double h, double alpha, const ModelParams& params,
                                const NestedConfig& config);

/// Throw UnreliableEstimate when F (or G) is within 10 standard errors of zero.
[[nodiscard]] double allocation_theta_no_pension(double t, double z, double alpha, const ModelParams& params,
                                                 const NestedConfig& config);
[[nodiscard]] double allocation_theta_pension(double t, double y, double h, double alpha,
                                              const ModelParams& params, const NestedConfig& config);

/// Wealth, consumption and allocation at each zeta of `zeta_grid` (positive,
/// increasing) with habit fixed; returned in increasing order of wealth.
[[nodiscard]] std::vector<PolicyPoint> policy_curve(const NestedEstimator& estimator, double t, double habit,
                                                    std::span<const double> zeta_grid);
[[nodiscard]] std::vector<PolicyPoint> policy_curve(double t, double habit, double alpha, const ModelParams& params,
                                                    std::span<const double> zeta_grid, const NestedConfig& config);

/// Log-spaced zeta grid whose wealth runs from wealth_max down to wealth_min
/// at (t, habit). Endpoints are located by root finding on log wealth.
[[nodiscard]] std::vector<double> wealth_range_zeta_grid(const NestedEstimator& estimator, double t, double habit,
                                                         std::size_t n_points, double wealth_min,
                                                         double wealth_max);

/// Zeta at which wealth(t, zeta, habit) equals `target` (relative tol 1e-3).
[[nodiscard]] double zeta_for_wealth(const NestedEstimator& estimator, double t, double habit, double target);

} // namespace habitmc
