#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "launchline/calendar.hpp"
#include "launchline/rng.hpp"

namespace launchline {

// Time base: one tick is half a workday. A year is 522 ticks. All durations
// in the tables are whole or half days and map exactly onto ticks.
using Tick = std::int64_t;
inline constexpr int kTicksPerDay = 2;
inline constexpr Tick kTicksPerYear = kTicksPerDay * kWorkdaysPerYear;

// Yearly production-rate decision. IMC rate runs 24..48 by 4, LLPM and ULPM
// rates 6..12 by 1.
struct RatesDecision {
  int imc_rate = 24;
  int llpm_rate = 6;
  int ulpm_rate = 6;

  bool operator==(const RatesDecision&) const = default;
};

bool rates_on_grid(const RatesDecision& d);

struct StoragePrices {
  // Cost units per unit per workday. Table percentages with the reference
  // value fixed at 100 cost units.
  double imc = 2.6;
  double llpm = 55.94;
  double ulpm = 35.59;
  double srm = 8.08;
  double cc = 100.0;
};

struct LatenessPrices {
  double anticipated = 45.19;
  double unexpected = 80.13;
};

struct SimConfig {
  int srm_capacity = 8;  // static architecture decision: 4 or 8
  int sub_capacity = 4;  // IMC / LLPM / ULPM warehouses
  int workdays_per_year = kWorkdaysPerYear;
  StoragePrices storage;
  LatenessPrices lateness;
  int lp_repair_days = 5;
  int anticipation_window_days = 10;
  int srm_block_threshold_days = 10;
  double missed_launch_penalty = 10'000'000.0;

  Tick year_ticks() const { return kTicksPerDay * workdays_per_year; }
};

void validate_config(const SimConfig& cfg);
std::string config_to_json(const SimConfig& cfg);
SimConfig config_from_json(const std::string& text);  // missing fields keep defaults
SimConfig load_config(const std::filesystem::path& file);
void save_config(const SimConfig& cfg, const std::filesystem::path& file);

// floor(261 / rate) workdays.
int mean_production_time(int rate);

// Mean tau with symmetric noise {-2,-1,0,+1,+2} at {3/32,5/32,1/2,5/32,3/32}.
int sample_production_time(int tau_days, RngStream& rng);
int production_time_from_uniform(int tau_days, double u);

enum class Workshop { booster, ait, launch_pad };

// Uniform over {5, 5.5} days (booster), {25, 25.5, 26} (AIT), {10, 10.5}
// (launch pad), in ticks.
Tick sample_operating_ticks(Workshop w, RngStream& rng);
Tick operating_ticks_from_uniform(Workshop w, double u);

enum class LatenessKind { none, anticipated, unexpected };

struct LatenessResult {
  LatenessKind kind = LatenessKind::none;
  double late_days = 0.0;
};

// A launch that starts integration within 10 days of its date can only be
// late in an anticipated way; one that started on time but still slipped is
// an unexpected lateness (much more expensive per day).
LatenessResult classify_lateness(Tick lp_start, Tick scheduled, Tick actual,
                                 const SimConfig& cfg);

struct CostBreakdown {
  double storage = 0.0;
  double anticipated_lateness = 0.0;
  double unexpected_lateness = 0.0;
  double penalty = 0.0;

  double total() const {
    return storage + anticipated_lateness + unexpected_lateness + penalty;
  }
  CostBreakdown& operator+=(const CostBreakdown& o) {
    storage += o.storage;
    anticipated_lateness += o.anticipated_lateness;
    unexpected_lateness += o.unexpected_lateness;
    penalty += o.penalty;
    return *this;
  }
};

// The six variables the controller actually sees at a year boundary.
struct ObservedState {
  int imc_stock = 0;
  int llpm_stock = 0;
  int ulpm_stock = 0;
  int srm_stock = 0;
  int cc_waiting = 0;    // finished CCs held in AIT docks, 0..2
  int launches_due = 0;  // this year's schedule plus backlog from before
};

enum class EventKind : std::uint8_t {
  imc_produced,
  llpm_produced,
  ulpm_produced,
  srm_produced,       // a booster dock finished
  cc_produced,        // an AIT dock finished
  launch_performed,   // LP event
  lp_repair_finished, // LP event
  srm_unblocked,
  year_ended,
};

const char* event_name(EventKind k);

struct ProductionLine {
  int tau_days = 0;   // current mean production time
  Tick finish = -1;   // completion tick of the unit in progress, -1 if none
  bool holding = false;  // finished unit waiting for warehouse space
};

struct WorkshopDock {
  Tick finish = -1;      // -1 when idle
  bool holding = false;  // finished output waiting to move on
};

struct LaunchPadState {
  enum class Phase { idle, integrating, repairing };
  Phase phase = Phase::idle;
  Tick start = -1;       // integration start
  Tick finish = -1;      // integration end (launch happens at max(finish, sched))
  Tick launch_at = -1;
  Tick scheduled = -1;
  Tick repair_done = -1;
};

struct SimState {
  Tick clock = 0;
  int year = 0;  // 0-based index of the year in progress
  ProductionLine imc_line, llpm_line, ulpm_line;
  int imc_stock = 0, llpm_stock = 0, ulpm_stock = 0, srm_stock = 0;
  std::array<WorkshopDock, 2> booster_docks;
  std::array<WorkshopDock, 2> ait_docks;
  LaunchPadState lp;
  std::size_t next_launch = 0;  // index into the precomputed schedule
  long launches_performed = 0;
  long srm_deposited = 0;
  long srm_withdrawn = 0;
  CostBreakdown year_costs;
};

// Event-driven model of the assembly line over one fixed calendar. One
// instance runs one trajectory; instances are independent and may run on
// separate threads with separate streams.
class Simulator {
 public:
  Simulator(const Calendar& calendar, const SimConfig& cfg);

  // Applies a yearly decision. Units already in progress keep their sampled
  // completion times; the new mean applies from the next started unit.
  void set_rates(const RatesDecision& d, RngStream& rng);

  // Advances the clock to the next pending event, accrues storage for the
  // elapsed ticks, applies the event and every resource transfer it enables.
  EventKind advance_to_next_event(RngStream& rng);

  // set_rates + events until the year-end boundary. Returns the year's cost.
  CostBreakdown simulate_year(const RatesDecision& d, RngStream& rng);

  ObservedState observe() const;
  const SimState& state() const { return state_; }
  const std::vector<Tick>& schedule() const { return schedule_; }
  bool srm_blocked() const;
  int total_scheduled() const { return static_cast<int>(schedule_.size()); }

  // Test/trace hooks; unset in hot paths.
  std::function<void(const SimState&, EventKind)> on_event;
  std::function<void(Tick clock, Tick next_scheduled)> on_srm_withdrawal;
  std::function<void(Tick lp_start, Tick scheduled, Tick actual)> on_launch;

 private:
  struct Candidate {
    Tick tick;
    int priority;
    EventKind kind;
  };

  void accrue_storage(Tick until);
  void cascade(RngStream& rng);
  bool next_event_candidate(Candidate& out) const;
  void start_line_unit(ProductionLine& line, RngStream& rng);
  void deposit(ProductionLine& line, int& stock, int capacity, RngStream& rng);

  SimConfig cfg_;
  std::vector<Tick> schedule_;        // absolute scheduled launch ticks
  std::vector<int> due_by_year_end_;  // prefix launch counts per year
  SimState state_;
};

struct HorizonResult {
  double total_cost = 0.0;
  std::vector<CostBreakdown> per_year;
};

}  // namespace launchline
