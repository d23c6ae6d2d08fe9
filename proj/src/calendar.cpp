#include "launchline/calendar.hpp"

#include <array>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace launchline {
namespace {

// Law of the number of launches per year, in CDF evaluation order.
constexpr std::array<int, 7> kYearCounts = {6, 7, 8, 9, 10, 11, 12};
constexpr std::array<double, 7> kYearCountProbs = {
    1.0 / 16, 1.0 / 16, 1.0 / 12, 3.0 / 24, 1.0 / 3, 1.0 / 6, 1.0 / 6};

constexpr std::array<int, 4> kStartupCounts = {1, 2, 4, 11};

// Within-year launch dates per launch count. Launches get denser toward the
// end of the year; every column keeps gaps of at least 15 workdays.
const std::vector<int>& dates_table(int n) {
  static const std::vector<std::vector<int>> table = {
      /* 1 */ {130},
      /* 2 */ {87, 174},
      /* 4 */ {52, 104, 156, 208},
      /* 6 */ {37, 74, 111, 148, 185, 222},
      /* 7 */ {32, 64, 96, 128, 160, 192, 224},
      /* 8 */ {29, 58, 87, 116, 145, 174, 203, 232},
      /* 9 */ {27, 54, 81, 111, 136, 161, 186, 211, 236},
      /* 10 */ {26, 52, 78, 107, 129, 151, 173, 195, 217, 239},
      /* 11 */ {23, 46, 69, 92, 121, 141, 161, 181, 201, 221, 241},
      /* 12 */ {21, 42, 63, 84, 117, 135, 153, 171, 189, 207, 225, 243},
  };
  switch (n) {
    case 1: return table[0];
    case 2: return table[1];
    case 4: return table[2];
    case 6: return table[3];
    case 7: return table[4];
    case 8: return table[5];
    case 9: return table[6];
    case 10: return table[7];
    case 11: return table[8];
    case 12: return table[9];
    default:
      throw std::invalid_argument("dates_for_count: unsupported launch count " +
                                  std::to_string(n));
  }
}

}  // namespace

int Calendar::total_launches() const {
  int total = 0;
  for (const LaunchYear& y : years) total += y.count;
  return total;
}

int year_count_from_uniform(double u) {
  double cum = 0.0;
  for (std::size_t i = 0; i < kYearCounts.size(); ++i) {
    cum += kYearCountProbs[i];
    if (u < cum) return kYearCounts[i];
  }
  return kYearCounts.back();
}

int sample_year_count(RngStream& rng) {
  return year_count_from_uniform(rng.uniform01());
}

const std::vector<int>& dates_for_count(int n) { return dates_table(n); }

Calendar build_calendar(int horizon_years, RngStream& rng) {
  if (horizon_years < 1)
    throw std::invalid_argument("build_calendar: horizon must be >= 1");
  Calendar c;
  c.horizon_years = horizon_years;
  c.years.reserve(horizon_years);
  for (int y = 0; y < horizon_years; ++y) {
    int n = y < 4 ? kStartupCounts[y] : sample_year_count(rng);
    c.years.push_back({n, dates_for_count(n)});
  }
  return c;
}

Calendar regular_calendar(int horizon_years, int launches_per_year) {
  if (horizon_years < 1)
    throw std::invalid_argument("regular_calendar: horizon must be >= 1");
  Calendar c;
  c.horizon_years = horizon_years;
  for (int y = 0; y < horizon_years; ++y) {
    int n = y < 4 ? kStartupCounts[y] : launches_per_year;
    c.years.push_back({n, dates_for_count(n)});
  }
  return c;
}

CalendarValidation validate_calendar(const Calendar& c) {
  CalendarValidation report;
  auto fail = [&](const std::string& msg) {
    report.ok = false;
    report.violations.push_back(msg);
  };

  if (c.horizon_years != static_cast<int>(c.years.size()))
    fail("horizon_years does not match the number of year entries");

  for (std::size_t y = 0; y < c.years.size(); ++y) {
    const LaunchYear& ly = c.years[y];
    const std::string tag = "year " + std::to_string(y + 1);
    if (ly.count != static_cast<int>(ly.dates.size()))
      fail(tag + ": count does not match the number of dates");
    for (int d : ly.dates) {
      if (d < 1 || d > kWorkdaysPerYear)
        fail(tag + ": date " + std::to_string(d) + " outside [1, 261]");
    }
    for (std::size_t i = 1; i < ly.dates.size(); ++i) {
      int gap = ly.dates[i] - ly.dates[i - 1];
      if (gap < kMinLaunchSpacingDays)
        fail(tag + ": launches " + std::to_string(i) + " and " +
             std::to_string(i + 1) + " only " + std::to_string(gap) +
             " days apart");
    }
    if (y < 4 && y < c.years.size() && c.years.size() >= 4) {
      if (ly.count != kStartupCounts[y])
        fail(tag + ": startup year must schedule " +
             std::to_string(kStartupCounts[y]) + " launches, has " +
             std::to_string(ly.count));
    }
    if (y >= 4 && (ly.count < 6 || ly.count > 12))
      fail(tag + ": launch count " + std::to_string(ly.count) +
           " outside [6, 12]");
    if (y > 0 && !ly.dates.empty() && !c.years[y - 1].dates.empty()) {
      int gap = (kWorkdaysPerYear - c.years[y - 1].dates.back()) + ly.dates.front();
      if (gap < kMinLaunchSpacingDays)
        fail(tag + ": only " + std::to_string(gap) +
             " days after the previous year's last launch");
    }
  }
  return report;
}

std::string calendar_to_json(const Calendar& c) {
  nlohmann::json j;
  j["horizon_years"] = c.horizon_years;
  j["years"] = nlohmann::json::array();
  for (const LaunchYear& y : c.years) {
    j["years"].push_back({{"count", y.count}, {"dates", y.dates}});
  }
  return j.dump(2) + "\n";
}

Calendar calendar_from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  Calendar c;
  c.horizon_years = j.at("horizon_years").get<int>();
  for (const auto& jy : j.at("years")) {
    LaunchYear y;
    y.count = jy.at("count").get<int>();
    y.dates = jy.at("dates").get<std::vector<int>>();
    c.years.push_back(std::move(y));
  }
  return c;
}

Calendar load_calendar(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw std::runtime_error("cannot read calendar file: " + file.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return calendar_from_json(buf.str());
}

void save_calendar(const Calendar& c, const std::filesystem::path& file) {
  std::ofstream out(file);
  if (!out) throw std::runtime_error("cannot write calendar file: " + file.string());
  out << calendar_to_json(c);
}

}  // namespace launchline
