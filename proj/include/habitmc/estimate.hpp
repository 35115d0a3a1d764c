#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace habitmc {

/// Monte Carlo estimate with its standard error.
struct Estimate {
    double value = 0.0;
    double std_error = 0.0;
};

/// Averages per-path values over sampling units (antithetic pairs or single
/// paths), giving i.i.d. unit samples.
[[nodiscard]] std::vector<double> fold_units(std::span<const double> per_path, std::size_t unit_size);

/// Sample-mean estimator over i.i.d. units, optionally corrected by a control
/// variate with known mean. With a control the estimate is a fixed
/// reweighting sum_i c_i x_i / n whose weights depend on the control only, so
/// the same estimator applied to several statistics on one sample keeps
/// common-random-number differences consistent.
class UnitEstimator {
public:
    explicit UnitEstimator(std::size_t n_units);
    UnitEstimator(std::vector<double> control, double control_mean);

    [[nodiscard]] std::size_t size() const noexcept { return n_; }
    [[nodiscard]] bool has_control() const noexcept { return !weights_.empty(); }

    [[nodiscard]] double mean(std::span<const double> x) const;
    [[nodiscard]] double std_error(std::span<const double> x) const;
    [[nodiscard]] Estimate estimate(std::span<const double> x) const {
        return {mean(x), std_error(x)};
    }

private:
    std::size_t n_;
    std::vector<double> centered_; // control minus its sample mean
    double syy_ = 0.0;              // (1/n) sum centered^2
    std::vector<double> weights_;
};

} // namespace habitmc
