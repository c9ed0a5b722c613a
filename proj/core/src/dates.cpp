#include "retsyn/dates.hpp"

namespace retsyn {

namespace {

bool is_leap(int y) { return (y % 4 == 0 && y % 100 != 0) || y % 400 == 0; }

int days_in_month(int y, int m) {
    static const int kDays[12] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    if (m == 2 && is_leap(y)) return 29;
    return kDays[m - 1];
}

}  // namespace

std::optional<CivilDate> parse_iso_date(std::string_view text) {
    if (text.size() < 10) return std::nullopt;
    if (text.size() > 10 && text[10] != 'T' && text[10] != ' ') return std::nullopt;
    auto digit = [&](std::size_t i) -> int {
        char c = text[i];
        return (c >= '0' && c <= '9') ? c - '0' : -1;
    };
    if (text[4] != '-' || text[7] != '-') return std::nullopt;
    int y = 0, m = 0, d = 0;
    for (std::size_t i : {0u, 1u, 2u, 3u}) {
        int v = digit(i);
        if (v < 0) return std::nullopt;
        y = y * 10 + v;
    }
    for (std::size_t i : {5u, 6u}) {
        int v = digit(i);
        if (v < 0) return std::nullopt;
        m = m * 10 + v;
    }
    for (std::size_t i : {8u, 9u}) {
        int v = digit(i);
        if (v < 0) return std::nullopt;
        d = d * 10 + v;
    }
    if (m < 1 || m > 12) return std::nullopt;
    if (d < 1 || d > days_in_month(y, m)) return std::nullopt;
    return CivilDate{y, m, d};
}

std::int64_t days_from_civil(const CivilDate& date) {
    // Howard Hinnant's civil-days algorithm.
    std::int64_t y = date.year;
    unsigned m = static_cast<unsigned>(date.month);
    unsigned d = static_cast<unsigned>(date.day);
    y -= m <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

std::optional<std::int64_t> day_displacement(std::string_view date, std::string_view reference) {
    auto a = parse_iso_date(date);
    auto b = parse_iso_date(reference);
    if (!a || !b) return std::nullopt;
    return days_from_civil(*a) - days_from_civil(*b);
}

}  // namespace retsyn
