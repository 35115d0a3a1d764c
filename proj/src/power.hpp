#pragma once

#include <cmath>

namespace habitmc::detail {

// x^e with small integer exponents done by multiplication; gamma = 3 makes
// the habit bracket exponent gamma - 1 = 2, which sits in the hot loops.
// Thirds go through cbrt, which beats pow (habit exponent 1 - 1/gamma).
class Power {
public:
    explicit Power(double e) : e_(e) {
        const double r = std::round(e);
        if (r == e && std::abs(r) <= 4.0) {
            int_exp_ = static_cast<int>(r);
            integral_ = true;
        } else if (std::abs(e - 2.0 / 3.0) < 1e-15) {
            thirds_ = 2;
        } else if (std::abs(e - 1.0 / 3.0) < 1e-15) {
            thirds_ = 1;
        } else if (std::abs(e + 1.0 / 3.0) < 1e-15) {
            thirds_ = -1;
        }
    }

    double operator()(double x) const {
        if (!integral_) {
            switch (thirds_) {
            case 2: return std::cbrt(x * x);
            case 1: return std::cbrt(x);
            case -1: return 1.0 / std::cbrt(x);
            default: return std::pow(x, e_);
            }
        }
        switch (int_exp_) {
        case 0: return 1.0;
        case 1: return x;
        case 2: return x * x;
        case 3: return x * x * x;
        case 4: { const double y = x * x; return y * y; }
        case -1: return 1.0 / x;
        case -2: return 1.0 / (x * x);
        case -3: return 1.0 / (x * x * x);
        case -4: { const double y = x * x; return 1.0 / (y * y); }
        default: return std::pow(x, e_);
        }
    }

private:
    double e_;
    int int_exp_ = 0;
    bool integral_ = false;
    int thirds_ = 0;
};

// Tracks y = h^e along a slowly moving h: (h'/h)^e = (1 + x)^e by its
// binomial series when |x| is small (truncation below 1e-17), pow otherwise.
// Habit steps move h by eta dt (C/h - 1), so the series branch is the norm.
class TrackedPower {
public:
    explicit TrackedPower(double e) : e_(e) {
        double c = 1.0;
        for (int k = 0; k < terms; ++k) {
            coeff_[k] = c;
            c *= (e - k) / (k + 1.0);
        }
    }

    double start(double h) const { return std::pow(h, e_); }

    double next(double y, double h_old, double h_new) const {
        const double x = (h_new - h_old) / h_old;
        if (std::abs(x) >= limit) {
            return std::pow(h_new, e_);
        }
        double s = coeff_[terms - 1];
        for (int k = terms - 2; k >= 0; --k) {
            s = s * x + coeff_[k];
        }
        return y * s;
    }

private:
    static constexpr int terms = 11;
    static constexpr double limit = 0.02;
    double e_;
    double coeff_[terms]{};
};

} // namespace habitmc::detail
