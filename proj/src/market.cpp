#include "habitmc/market.hpp"

#include "habitmc/errors.hpp"
#include "habitmc/parallel.hpp"

#include <cmath>
#include <random>
#include <string>

namespace habitmc {

void MarketParams::validate() const {
    if (!(sigma > 0.0)) {
        throw ConfigError("market.sigma must be > 0 (got " + std::to_string(sigma) + ")");
    }
    if (!(gamma > 0.0) || gamma == 1.0) {
        throw ConfigError("market.gamma must be > 0 and != 1 (got " + std::to_string(gamma) + ")");
    }
    if (!std::isfinite(mu) || !std::isfinite(r) || !std::isfinite(rho)) {
        throw ConfigError("market parameters must be finite");
    }
}

void GompertzParams::validate() const {
    if (!(b > 0.0)) {
        throw ConfigError("mortality.b must be > 0 (got " + std::to_string(b) + ")");
    }
    if (!std::isfinite(x) || !std::isfinite(m)) {
        throw ConfigError("mortality parameters must be finite");
    }
}

double log_survival(const GompertzParams& mort, double s) {
    if (!(s >= 0.0)) {
        throw DomainError("survival horizon must be >= 0");
    }
    return -std::exp((mort.x - mort.m) / mort.b) * std::expm1(s / mort.b);
}

double survival_probability(const GompertzParams& mort, double s) {
    return std::exp(log_survival(mort, s));
}

double hazard_rate(const GompertzParams& mort, double y) {
    return std::exp((y - mort.m) / mort.b) / mort.b;
}

TimeGrid::TimeGrid(double t_max, double dt) : t_max_(t_max), dt_(dt) {
    if (!(dt > 0.0) || !(t_max > 0.0)) {
        throw ConfigError("time grid needs dt > 0 and t_max > 0");
    }
    const double ratio = t_max / dt;
    const double rounded = std::round(ratio);
    if (std::abs(ratio - rounded) > 1e-9 * std::max(1.0, ratio)) {
        throw ConfigError("t_max must be an integer multiple of dt");
    }
    n_steps_ = static_cast<std::size_t>(rounded);
}

bool TimeGrid::contains(double t) const noexcept {
    const double ratio = t / dt_;
    const double rounded = std::round(ratio);
    return t >= 0.0 && std::abs(ratio - rounded) <= 1e-9 * std::max(1.0, ratio) &&
           rounded <= static_cast<double>(n_steps_);
}

std::size_t TimeGrid::index_of(double t) const {
    if (!contains(t)) {
        throw DomainError("time " + std::to_string(t) + " is not a point of the grid");
    }
    return static_cast<std::size_t>(std::round(t / dt_));
}

PathBundle::PathBundle(TimeGrid grid, std::size_t n_paths, std::uint64_t seed, Sampling sampling, double r,
                       double kappa, std::vector<double> w)
    : grid_(grid), n_paths_(n_paths), seed_(seed), sampling_(sampling), r_(r), kappa_(kappa),
      drift_(r + 0.5 * kappa * kappa), w_(std::move(w)) {
    if (w_.size() != n_paths_ * grid_.n_points()) {
        throw ConfigError("path storage does not match grid and path count");
    }
}

double PathBundle::zeta(std::size_t path, std::size_t k) const {
    return std::exp(log_zeta(path, k));
}

std::vector<double> PathBundle::zeta_path(std::size_t path) const {
    std::vector<double> out(grid_.n_points());
    for (std::size_t k = 0; k < out.size(); ++k) {
        out[k] = zeta(path, k);
    }
    return out;
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30U)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27U)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31U);
}

} // namespace

std::uint64_t stream_seed(std::uint64_t master, std::uint64_t index) noexcept {
    return splitmix64(master ^ splitmix64(index));
}

PathBundle generate_paths(const MarketParams& mp, const TimeGrid& grid, std::size_t n_paths, std::uint64_t seed,
                          Sampling sampling, unsigned threads) {
    mp.validate();
    if (n_paths == 0) {
        throw ConfigError("n_paths must be >= 1");
    }
    if (sampling == Sampling::antithetic && n_paths % 2 != 0) {
        throw ConfigError("antithetic sampling needs an even number of paths");
    }
    if (!(grid.dt() > 0.0) || grid.n_steps() == 0) {
        throw ConfigError("inconsistent time grid");
    }

    const std::size_t n_points = grid.n_points();
    const std::size_t unit = sampling == Sampling::antithetic ? 2 : 1;
    const std::size_t n_units = n_paths / unit;
    const double sqrt_dt = std::sqrt(grid.dt());
    std::vector<double> w(n_paths * n_points);

    parallel_for(n_units, threads, [&](std::size_t begin, std::size_t end) {
        for (std::size_t u = begin; u < end; ++u) {
            std::mt19937_64 engine(stream_seed(seed, u));
            std::normal_distribution<double> normal;
            double* first = w.data() + u * unit * n_points;
            first[0] = 0.0;
            for (std::size_t k = 1; k < n_points; ++k) {
                first[k] = first[k - 1] + sqrt_dt * normal(engine);
            }
            if (unit == 2) {
                double* mirror = first + n_points;
                for (std::size_t k = 0; k < n_points; ++k) {
                    mirror[k] = -first[k];
                }
            }
        }
    });

    return {grid, n_paths, seed, sampling, mp.r, mp.kappa(), std::move(w)};
}

} // namespace habitmc
