#pragma once

#include "habitmc/lifetime.hpp"
#include "habitmc/wealth.hpp"

#include <ostream>
#include <span>
#include <string>

namespace habitmc {

inline constexpr const char* policy_csv_header = "t,H,zeta,wealth,consumption,theta,wealth_se,theta_reliable";
inline constexpr const char* lifetime_csv_header = "t,pension,consumption,habit,wealth,theta";

/// Shortest text that parses back to exactly `x`; "nan"/"inf"/"-inf" otherwise.
[[nodiscard]] std::string format_number(double x);

void write_policy_csv(std::ostream& out, std::span<const PolicyPoint> rows);
void write_lifetime_csv(std::ostream& out, std::span<const LifetimeRecord> records);

} // namespace habitmc
