#include "tc/dates.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace tc {

// Howard Hinnant's civil-date algorithms.
std::int64_t days_from_civil(int y, unsigned m, unsigned d) {
    y -= m <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

void civil_from_days(std::int64_t z, int& y, unsigned& m, unsigned& d) {
    z += 719468;
    const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const std::int64_t yy = static_cast<std::int64_t>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    d = doy - (153 * mp + 2) / 5 + 1;
    m = mp + (mp < 10 ? 3 : -9);
    y = static_cast<int>(yy + (m <= 2));
}

std::string format_iso_date(std::int64_t serial_day) {
    int y;
    unsigned m, d;
    civil_from_days(serial_day, y, m, d);
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", y, m, d);
    return buf;
}

std::optional<std::int64_t> parse_iso_date(std::string_view s) {
    if (s.size() < 10) return std::nullopt;
    auto digit = [&](size_t i) { return s[i] >= '0' && s[i] <= '9'; };
    for (size_t i : {0u, 1u, 2u, 3u, 5u, 6u, 8u, 9u})
        if (!digit(i)) return std::nullopt;
    if (s[4] != '-' || s[7] != '-') return std::nullopt;
    int y = (s[0] - '0') * 1000 + (s[1] - '0') * 100 + (s[2] - '0') * 10 + (s[3] - '0');
    unsigned m = (s[5] - '0') * 10u + (s[6] - '0');
    unsigned d = (s[8] - '0') * 10u + (s[9] - '0');
    if (m < 1 || m > 12 || d < 1 || d > 31) return std::nullopt;
    return days_from_civil(y, m, d);
}

std::optional<int> year_of(std::string_view timestamp) {
    if (timestamp.size() < 4) return std::nullopt;
    int y = 0;
    for (int i = 0; i < 4; ++i) {
        char c = timestamp[i];
        if (c < '0' || c > '9') return std::nullopt;
        y = y * 10 + (c - '0');
    }
    return y;
}

double infer_periods_per_year(const std::vector<std::string>& timestamps) {
    constexpr double kDefault = 252.0;
    if (timestamps.size() < 3) return kDefault;
    std::vector<double> gaps;
    gaps.reserve(timestamps.size() - 1);
    for (size_t i = 1; i < timestamps.size(); ++i) {
        auto a = parse_iso_date(timestamps[i - 1]);
        auto b = parse_iso_date(timestamps[i]);
        if (!a || !b) return kDefault;
        gaps.push_back(static_cast<double>(*b - *a));
    }
    std::nth_element(gaps.begin(), gaps.begin() + gaps.size() / 2, gaps.end());
    double median = gaps[gaps.size() / 2];
    if (median <= 2.0) return 252.0;  // daily trading data
    if (median <= 10.0) return 52.0;
    if (median <= 45.0) return 12.0;
    return std::max(1.0, std::round(365.25 / median));
}

}  // namespace tc
