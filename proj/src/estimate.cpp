#include "habitmc/estimate.hpp"

#include "habitmc/errors.hpp"

#include <cmath>
#include <numeric>

namespace habitmc {

std::vector<double> fold_units(std::span<const double> per_path, std::size_t unit_size) {
    if (unit_size == 0 || per_path.size() % unit_size != 0) {
        throw ConfigError("path count is not a multiple of the sampling unit");
    }
    std::vector<double> units(per_path.size() / unit_size);
    for (std::size_t u = 0; u < units.size(); ++u) {
        double s = 0.0;
        for (std::size_t j = 0; j < unit_size; ++j) {
            s += per_path[u * unit_size + j];
        }
        units[u] = s / static_cast<double>(unit_size);
    }
    return units;
}

UnitEstimator::UnitEstimator(std::size_t n_units) : n_(n_units) {
    if (n_ == 0) {
        throw ConfigError("estimator needs at least one sample");
    }
}

UnitEstimator::UnitEstimator(std::vector<double> control, double control_mean) : n_(control.size()) {
    if (n_ == 0) {
        throw ConfigError("estimator needs at least one sample");
    }
    const double n = static_cast<double>(n_);
    const double ybar = std::accumulate(control.begin(), control.end(), 0.0) / n;
    centered_ = std::move(control);
    syy_ = 0.0;
    for (double& y : centered_) {
        y -= ybar;
        syy_ += y * y;
    }
    syy_ /= n;
    if (n_ < 3 || !(syy_ > 0.0)) {
        centered_.clear();
        return;
    }
    const double offset = ybar - control_mean;
    weights_.resize(n_);
    for (std::size_t i = 0; i < n_; ++i) {
        weights_[i] = 1.0 - centered_[i] * offset / syy_;
    }
}

double UnitEstimator::mean(std::span<const double> x) const {
    if (x.size() != n_) {
        throw ConfigError("sample size does not match estimator");
    }
    double s = 0.0;
    if (weights_.empty()) {
        for (double v : x) {
            s += v;
        }
    } else {
        for (std::size_t i = 0; i < n_; ++i) {
            s += weights_[i] * x[i];
        }
    }
    return s / static_cast<double>(n_);
}

double UnitEstimator::std_error(std::span<const double> x) const {
    if (x.size() != n_) {
        throw ConfigError("sample size does not match estimator");
    }
    if (n_ < 2) {
        return 0.0;
    }
    const double n = static_cast<double>(n_);
    const double xbar = std::accumulate(x.begin(), x.end(), 0.0) / n;
    if (weights_.empty()) {
        double ss = 0.0;
        for (double v : x) {
            ss += (v - xbar) * (v - xbar);
        }
        return std::sqrt(ss / (n - 1.0) / n);
    }
    double sxy = 0.0;
    for (std::size_t i = 0; i < n_; ++i) {
        sxy += x[i] * centered_[i];
    }
    const double beta = sxy / n / syy_;
    double ss = 0.0;
    for (std::size_t i = 0; i < n_; ++i) {
        const double e = (x[i] - xbar) - beta * centered_[i];
        ss += e * e;
    }
    return std::sqrt(ss / (n - 2.0) / n);
}

} // namespace habitmc
