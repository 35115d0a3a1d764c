#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace habitmc {

/// Black-Scholes market plus the retiree's preferences.
struct MarketParams {
    double mu = 0.08;    ///< stock drift (1/yr)
    double sigma = 0.16; ///< volatility (1/sqrt(yr))
    double r = 0.02;     ///< risk-free rate (1/yr)
    double rho = 0.02;   ///< subjective discount rate (1/yr)
    double gamma = 3.0;  ///< relative risk aversion

    /// Market price of risk, always derived from (mu, r, sigma).
    [[nodiscard]] double kappa() const noexcept { return (mu - r) / sigma; }

    /// Throws ConfigError unless sigma > 0, gamma > 0 and gamma != 1.
    void validate() const;
};

/// Gompertz law of mortality for a retiree currently aged `x`.
struct GompertzParams {
    double x = 65.0;     ///< current age (yr)
    double m = 89.335;   ///< modal age at death (yr)
    double b = 9.5;      ///< dispersion (yr)

    void validate() const;
};

/// Probability that a person aged x survives another s years.
/// Throws DomainError for s < 0.
[[nodiscard]] double survival_probability(const GompertzParams& mort, double s);

/// log of survival_probability; finite far beyond the point where the
/// probability itself underflows.
[[nodiscard]] double log_survival(const GompertzParams& mort, double s);

/// Force of mortality at age y.
[[nodiscard]] double hazard_rate(const GompertzParams& mort, double y);

/// Uniform grid on [0, t_max]; point k sits at exactly k * dt.
class TimeGrid {
public:
    TimeGrid() = default;
    /// Throws ConfigError unless dt > 0 and t_max is an integer multiple of dt.
    TimeGrid(double t_max, double dt);

    [[nodiscard]] double t_max() const noexcept { return t_max_; }
    [[nodiscard]] double dt() const noexcept { return dt_; }
    [[nodiscard]] std::size_t n_steps() const noexcept { return n_steps_; }
    [[nodiscard]] std::size_t n_points() const noexcept { return n_steps_ + 1; }
    [[nodiscard]] double time(std::size_t k) const noexcept { return static_cast<double>(k) * dt_; }

    /// Grid index of time t; throws DomainError if t is not (within 1e-9 dt) a grid point.
    [[nodiscard]] std::size_t index_of(double t) const;
    [[nodiscard]] bool contains(double t) const noexcept;

    /// Trapezoid weight of point k when integrating over [time(from), t_max].
    [[nodiscard]] double trapezoid_weight(std::size_t k, std::size_t from = 0) const noexcept {
        return (k == from || k == n_steps_) ? 0.5 * dt_ : dt_;
    }

    friend bool operator==(const TimeGrid&, const TimeGrid&) = default;

private:
    double t_max_ = 60.0;
    double dt_ = 0.05;
    std::size_t n_steps_ = 1200;
};

/// How Brownian increments are drawn across paths.
enum class Sampling {
    independent, ///< every path has its own stream
    antithetic,  ///< paths 2i and 2i+1 share a stream with negated increments
};

/// Simulated Brownian paths and the induced state price density
///   zeta_t = exp(-r t - kappa W_t - kappa^2 t / 2)
/// on a fixed grid. Only W is stored; zeta is evaluated from W exactly.
class PathBundle {
public:
    PathBundle(TimeGrid grid, std::size_t n_paths, std::uint64_t seed, Sampling sampling,
               double r, double kappa, std::vector<double> w);

    [[nodiscard]] const TimeGrid& grid() const noexcept { return grid_; }
    [[nodiscard]] std::size_t n_paths() const noexcept { return n_paths_; }
    [[nodiscard]] std::uint64_t seed() const noexcept { return seed_; }
    [[nodiscard]] Sampling sampling() const noexcept { return sampling_; }

    /// Number of independent sampling units (pairs for antithetic bundles).
    [[nodiscard]] std::size_t n_units() const noexcept {
        return sampling_ == Sampling::antithetic ? n_paths_ / 2 : n_paths_;
    }
    [[nodiscard]] std::size_t unit_size() const noexcept {
        return sampling_ == Sampling::antithetic ? 2 : 1;
    }

    /// Brownian values W_{k dt}, k = 0..n_steps, of one path.
    [[nodiscard]] std::span<const double> w(std::size_t path) const noexcept {
        return {w_.data() + path * grid_.n_points(), grid_.n_points()};
    }
    [[nodiscard]] double log_zeta(std::size_t path, std::size_t k) const noexcept {
        return -drift_ * grid_.time(k) - kappa_ * w_[path * grid_.n_points() + k];
    }
    [[nodiscard]] double zeta(std::size_t path, std::size_t k) const;

    /// Whole zeta path (allocates).
    [[nodiscard]] std::vector<double> zeta_path(std::size_t path) const;

    [[nodiscard]] double r() const noexcept { return r_; }
    [[nodiscard]] double kappa() const noexcept { return kappa_; }

private:
    TimeGrid grid_;
    std::size_t n_paths_;
    std::uint64_t seed_;
    Sampling sampling_;
    double r_;
    double kappa_;
    double drift_; // r + kappa^2 / 2
    std::vector<double> w_;
};

/// Generates `n_paths` paths. Output depends only on the arguments (not on
/// `threads`): each path (or antithetic pair) draws from its own stream keyed
/// by (seed, index). Throws ConfigError for n_paths == 0 or an odd count
/// under antithetic sampling.
[[nodiscard]] PathBundle generate_paths(const MarketParams& mp, const TimeGrid& grid, std::size_t n_paths,
                                        std::uint64_t seed, Sampling sampling = Sampling::independent,
                                        unsigned threads = 0);

/// Seed of the stream used by path (or pair) `index`.
[[nodiscard]] std::uint64_t stream_seed(std::uint64_t master, std::uint64_t index) noexcept;

} // namespace habitmc
