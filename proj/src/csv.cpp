#include "habitmc/csv.hpp"

#include <array>
#include <charconv>
#include <cmath>

namespace habitmc {

std::string format_number(double x) {
    if (std::isnan(x)) {
        return "nan";
    }
    if (std::isinf(x)) {
        return x > 0 ? "inf" : "-inf";
    }
    std::array<char, 32> buf{};
    const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), x);
    return {buf.data(), res.ptr};
}

void write_policy_csv(std::ostream& out, std::span<const PolicyPoint> rows) {
    out << policy_csv_header << '\n';
    for (const auto& p : rows) {
        out << format_number(p.t) << ',' << format_number(p.habit) << ',' << format_number(p.zeta) << ','
            << format_number(p.wealth) << ',' << format_number(p.consumption) << ',' << format_number(p.theta)
            << ',' << format_number(p.wealth_se) << ',' << (p.theta_reliable ? 1 : 0) << '\n';
    }
}

void write_lifetime_csv(std::ostream& out, std::span<const LifetimeRecord> records) {
    out << lifetime_csv_header << '\n';
    for (const auto& r : records) {
        for (std::size_t k = 0; k < r.times.size(); ++k) {
            out << format_number(r.times[k]) << ',' << format_number(r.pension) << ','
                << format_number(r.consumption[k]) << ',' << format_number(r.habit[k]) << ','
                << format_number(r.wealth[k]) << ',' << format_number(r.theta[k]) << '\n';
        }
    }
}

} // namespace habitmc
