#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "launchline/rng.hpp"

namespace launchline {

inline constexpr int kWorkdaysPerYear = 261;
inline constexpr int kMinLaunchSpacingDays = 15;

// One year of the launch schedule. Dates are workday numbers in [1, 261],
// strictly increasing, at least 15 workdays apart.
struct LaunchYear {
  int count = 0;
  std::vector<int> dates;

  bool operator==(const LaunchYear&) const = default;
};

// The launch schedule for the whole horizon, fixed before optimization
// starts. The first four years of a full-horizon calendar are the system
// startup (1, 2, 4, 11 launches); later years carry between 6 and 12.
struct Calendar {
  int horizon_years = 0;
  std::vector<LaunchYear> years;

  int total_launches() const;
  bool operator==(const Calendar&) const = default;
};

// Number of launches demanded in a non-startup year. Support {6..12} with
// probabilities {1/16, 1/16, 1/12, 3/24, 1/3, 1/6, 1/6}; mean 9.7708.
int sample_year_count(RngStream& rng);
int year_count_from_uniform(double u);

// Fixed within-year launch dates for a given launch count. Counts 3 and 5
// never occur (startup years are fixed, sampled years start at 6) and are
// rejected.
const std::vector<int>& dates_for_count(int n);

// Startup years 1-4 fixed, later years sampled. Always passes
// validate_calendar. Explicit calendars for short test horizons load from
// JSON instead.
Calendar build_calendar(int horizon_years, RngStream& rng);

// Startup years 1-4 fixed, then a constant number of launches per year.
Calendar regular_calendar(int horizon_years, int launches_per_year);

struct CalendarValidation {
  bool ok = true;
  std::vector<std::string> violations;
};

// Checks date ranges, intra- and cross-year spacing, count/date coherence
// and the startup-year counts. Violations are reported, not thrown.
CalendarValidation validate_calendar(const Calendar& c);

// JSON form: {"horizon_years": N, "years": [{"count": n, "dates": [...]}]}
std::string calendar_to_json(const Calendar& c);
Calendar calendar_from_json(const std::string& text);
Calendar load_calendar(const std::filesystem::path& file);
void save_calendar(const Calendar& c, const std::filesystem::path& file);

}  // namespace launchline
