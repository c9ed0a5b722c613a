#pragma once

#include <cstdint>
#include <optional>
#include <string_view>

namespace retsyn {

struct CivilDate {
    int year = 0;
    int month = 0;
    int day = 0;
};

// Accepts "YYYY-MM-DD" with an optional trailing time part ("T..." or " ...").
// Month/day ranges are validated (leap years included).
std::optional<CivilDate> parse_iso_date(std::string_view text);

// Days since 1970-01-01 (proleptic Gregorian).
std::int64_t days_from_civil(const CivilDate& d);

// Whole-day displacement date - reference; nullopt if either fails to parse.
std::optional<std::int64_t> day_displacement(std::string_view date, std::string_view reference);

}  // namespace retsyn
