#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace tc {

// Proleptic Gregorian calendar, serial day = days since 1970-01-01.
std::int64_t days_from_civil(int y, unsigned m, unsigned d);
void civil_from_days(std::int64_t z, int& y, unsigned& m, unsigned& d);

std::string format_iso_date(std::int64_t serial_day);

// Accepts a YYYY-MM-DD prefix (anything after the date is ignored).
std::optional<std::int64_t> parse_iso_date(std::string_view s);

// Year of an ISO-like timestamp, if it starts with a 4-digit year.
std::optional<int> year_of(std::string_view timestamp);

// Periods per year from median timestamp spacing; falls back to 252
// when the timestamps are not parseable as dates.
double infer_periods_per_year(const std::vector<std::string>& timestamps);

}  // namespace tc
