#include "launchline/simulator.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace launchline {

bool rates_on_grid(const RatesDecision& d) {
  bool imc_ok = d.imc_rate >= 24 && d.imc_rate <= 48 && d.imc_rate % 4 == 0;
  bool llpm_ok = d.llpm_rate >= 6 && d.llpm_rate <= 12;
  bool ulpm_ok = d.ulpm_rate >= 6 && d.ulpm_rate <= 12;
  return imc_ok && llpm_ok && ulpm_ok;
}

void validate_config(const SimConfig& cfg) {
  if (cfg.srm_capacity != 4 && cfg.srm_capacity != 8)
    throw std::invalid_argument("srm_capacity must be 4 or 8");
  if (cfg.sub_capacity < 1)
    throw std::invalid_argument("sub_capacity must be >= 1");
  if (cfg.workdays_per_year < 1)
    throw std::invalid_argument("workdays_per_year must be >= 1");
  const double prices[] = {cfg.storage.imc,  cfg.storage.llpm,
                           cfg.storage.ulpm, cfg.storage.srm,
                           cfg.storage.cc,   cfg.lateness.anticipated,
                           cfg.lateness.unexpected};
  for (double p : prices)
    if (p <= 0) throw std::invalid_argument("all prices must be > 0");
  if (cfg.lp_repair_days < 0 || cfg.anticipation_window_days < 0 ||
      cfg.srm_block_threshold_days < 0)
    throw std::invalid_argument("durations must be >= 0");
  if (cfg.missed_launch_penalty < 0)
    throw std::invalid_argument("missed_launch_penalty must be >= 0");
}

std::string config_to_json(const SimConfig& cfg) {
  nlohmann::json j;
  j["srm_capacity"] = cfg.srm_capacity;
  j["sub_capacity"] = cfg.sub_capacity;
  j["workdays_per_year"] = cfg.workdays_per_year;
  j["storage_prices"] = {{"imc", cfg.storage.imc},
                         {"llpm", cfg.storage.llpm},
                         {"ulpm", cfg.storage.ulpm},
                         {"srm", cfg.storage.srm},
                         {"cc", cfg.storage.cc}};
  j["lateness_prices"] = {{"anticipated", cfg.lateness.anticipated},
                          {"unexpected", cfg.lateness.unexpected}};
  j["lp_repair_days"] = cfg.lp_repair_days;
  j["anticipation_window_days"] = cfg.anticipation_window_days;
  j["srm_block_threshold_days"] = cfg.srm_block_threshold_days;
  j["missed_launch_penalty"] = cfg.missed_launch_penalty;
  return j.dump(2) + "\n";
}

SimConfig config_from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  SimConfig cfg;
  cfg.srm_capacity = j.value("srm_capacity", cfg.srm_capacity);
  cfg.sub_capacity = j.value("sub_capacity", cfg.sub_capacity);
  cfg.workdays_per_year = j.value("workdays_per_year", cfg.workdays_per_year);
  if (j.contains("storage_prices")) {
    const auto& s = j["storage_prices"];
    cfg.storage.imc = s.value("imc", cfg.storage.imc);
    cfg.storage.llpm = s.value("llpm", cfg.storage.llpm);
    cfg.storage.ulpm = s.value("ulpm", cfg.storage.ulpm);
    cfg.storage.srm = s.value("srm", cfg.storage.srm);
    cfg.storage.cc = s.value("cc", cfg.storage.cc);
  }
  if (j.contains("lateness_prices")) {
    const auto& l = j["lateness_prices"];
    cfg.lateness.anticipated = l.value("anticipated", cfg.lateness.anticipated);
    cfg.lateness.unexpected = l.value("unexpected", cfg.lateness.unexpected);
  }
  cfg.lp_repair_days = j.value("lp_repair_days", cfg.lp_repair_days);
  cfg.anticipation_window_days =
      j.value("anticipation_window_days", cfg.anticipation_window_days);
  cfg.srm_block_threshold_days =
      j.value("srm_block_threshold_days", cfg.srm_block_threshold_days);
  cfg.missed_launch_penalty =
      j.value("missed_launch_penalty", cfg.missed_launch_penalty);
  validate_config(cfg);
  return cfg;
}

SimConfig load_config(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw std::runtime_error("cannot read config file: " + file.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return config_from_json(buf.str());
}

void save_config(const SimConfig& cfg, const std::filesystem::path& file) {
  std::ofstream out(file);
  if (!out) throw std::runtime_error("cannot write config file: " + file.string());
  out << config_to_json(cfg);
}

int mean_production_time(int rate) {
  if (rate < 1) throw std::domain_error("mean_production_time: rate must be >= 1");
  return kWorkdaysPerYear / rate;
}

int production_time_from_uniform(int tau_days, double u) {
  if (tau_days < 3)
    throw std::domain_error("sample_production_time: tau must be >= 3");
  // Delta law {-2,-1,0,+1,+2} at {3/32, 5/32, 1/2, 5/32, 3/32}.
  if (u < 3.0 / 32) return tau_days - 2;
  if (u < 8.0 / 32) return tau_days - 1;
  if (u < 24.0 / 32) return tau_days;
  if (u < 29.0 / 32) return tau_days + 1;
  return tau_days + 2;
}

int sample_production_time(int tau_days, RngStream& rng) {
  return production_time_from_uniform(tau_days, rng.uniform01());
}

Tick operating_ticks_from_uniform(Workshop w, double u) {
  auto pick = [u](std::initializer_list<Tick> ticks) {
    auto n = static_cast<int>(ticks.size());
    int idx = std::min(static_cast<int>(u * n), n - 1);
    return *(ticks.begin() + idx);
  };
  switch (w) {
    case Workshop::booster: return pick({10, 11});
    case Workshop::ait: return pick({50, 51, 52});
    case Workshop::launch_pad: return pick({20, 21});
  }
  throw std::invalid_argument("unknown workshop");
}

Tick sample_operating_ticks(Workshop w, RngStream& rng) {
  return operating_ticks_from_uniform(w, rng.uniform01());
}

LatenessResult classify_lateness(Tick lp_start, Tick scheduled, Tick actual,
                                 const SimConfig& cfg) {
  if (actual < lp_start)
    throw std::invalid_argument("classify_lateness: launch before LP start");
  if (actual <= scheduled) return {LatenessKind::none, 0.0};
  double late_days =
      static_cast<double>(actual - scheduled) / kTicksPerDay;
  Tick window = static_cast<Tick>(cfg.anticipation_window_days) * kTicksPerDay;
  if (lp_start > scheduled - window)
    return {LatenessKind::anticipated, late_days};
  return {LatenessKind::unexpected, late_days};
}

const char* event_name(EventKind k) {
  switch (k) {
    case EventKind::imc_produced: return "imc_produced";
    case EventKind::llpm_produced: return "llpm_produced";
    case EventKind::ulpm_produced: return "ulpm_produced";
    case EventKind::srm_produced: return "srm_produced";
    case EventKind::cc_produced: return "cc_produced";
    case EventKind::launch_performed: return "launch_performed";
    case EventKind::lp_repair_finished: return "lp_repair_finished";
    case EventKind::srm_unblocked: return "srm_unblocked";
    case EventKind::year_ended: return "year_ended";
  }
  return "unknown";
}

Simulator::Simulator(const Calendar& calendar, const SimConfig& cfg)
    : cfg_(cfg) {
  validate_config(cfg_);
  const Tick year_ticks = cfg_.year_ticks();
  int due = 0;
  for (std::size_t y = 0; y < calendar.years.size(); ++y) {
    for (int date : calendar.years[y].dates) {
      // Launch instant: start of workday `date` (day 1 = tick 0 of the year).
      schedule_.push_back(static_cast<Tick>(y) * year_ticks +
                          static_cast<Tick>(date - 1) * kTicksPerDay);
    }
    due += calendar.years[y].count;
    due_by_year_end_.push_back(due);
  }
  if (!std::is_sorted(schedule_.begin(), schedule_.end()))
    throw std::invalid_argument("calendar launch instants are not ordered");
}

bool Simulator::srm_blocked() const {
  if (state_.next_launch >= schedule_.size()) return true;
  Tick gap = schedule_[state_.next_launch] - state_.clock;
  return gap >= static_cast<Tick>(cfg_.srm_block_threshold_days) * kTicksPerDay;
}

void Simulator::start_line_unit(ProductionLine& line, RngStream& rng) {
  int days = sample_production_time(line.tau_days, rng);
  line.finish = state_.clock + static_cast<Tick>(days) * kTicksPerDay;
  line.holding = false;
}

void Simulator::accrue_storage(Tick until) {
  Tick dt = until - state_.clock;
  if (dt <= 0) return;
  int held_ccs = 0;
  for (const WorkshopDock& d : state_.ait_docks)
    if (d.holding) ++held_ccs;
  double per_day = state_.imc_stock * cfg_.storage.imc +
                   state_.llpm_stock * cfg_.storage.llpm +
                   state_.ulpm_stock * cfg_.storage.ulpm +
                   state_.srm_stock * cfg_.storage.srm +
                   held_ccs * cfg_.storage.cc;
  state_.year_costs.storage += per_day * static_cast<double>(dt) / kTicksPerDay;
}

void Simulator::cascade(RngStream& rng) {
  bool changed = true;
  while (changed) {
    changed = false;

    // Production lines deposit held units and restart as soon as their
    // warehouse has room; idle lines (process start) begin their first unit.
    auto line_step = [&](ProductionLine& line, int& stock) {
      if (line.holding && stock < cfg_.sub_capacity) {
        ++stock;
        start_line_unit(line, rng);
        changed = true;
      } else if (!line.holding && line.finish < 0 && line.tau_days > 0) {
        start_line_unit(line, rng);
        changed = true;
      }
    };
    line_step(state_.imc_line, state_.imc_stock);
    line_step(state_.llpm_line, state_.llpm_stock);
    line_step(state_.ulpm_line, state_.ulpm_stock);

    // Booster docks stop working entirely while the SRM store is full.
    for (WorkshopDock& dock : state_.booster_docks) {
      if (dock.holding && state_.srm_stock < cfg_.srm_capacity) {
        dock.holding = false;
        ++state_.srm_stock;
        ++state_.srm_deposited;
        changed = true;
      } else if (!dock.holding && dock.finish < 0 && state_.imc_stock >= 1 &&
                 state_.srm_stock < cfg_.srm_capacity) {
        --state_.imc_stock;
        dock.finish = state_.clock + sample_operating_ticks(Workshop::booster, rng);
        changed = true;
      }
    }

    // AIT docks take one LLPM and one ULPM together.
    for (WorkshopDock& dock : state_.ait_docks) {
      if (!dock.holding && dock.finish < 0 && state_.llpm_stock >= 1 &&
          state_.ulpm_stock >= 1) {
        --state_.llpm_stock;
        --state_.ulpm_stock;
        dock.finish = state_.clock + sample_operating_ticks(Workshop::ait, rng);
        changed = true;
      }
    }

    // Launch pad loads 1 CC + 4 SRMs once the calendar unblocks the store.
    if (state_.lp.phase == LaunchPadState::Phase::idle &&
        state_.next_launch < schedule_.size() && state_.srm_stock >= 4 &&
        !srm_blocked()) {
      for (WorkshopDock& dock : state_.ait_docks) {
        if (!dock.holding) continue;
        dock.holding = false;
        state_.srm_stock -= 4;
        state_.srm_withdrawn += 4;
        if (on_srm_withdrawal)
          on_srm_withdrawal(state_.clock, schedule_[state_.next_launch]);
        LaunchPadState& lp = state_.lp;
        lp.phase = LaunchPadState::Phase::integrating;
        lp.start = state_.clock;
        lp.finish =
            state_.clock + sample_operating_ticks(Workshop::launch_pad, rng);
        lp.scheduled = schedule_[state_.next_launch];
        lp.launch_at = std::max(lp.finish, lp.scheduled);
        changed = true;
        break;
      }
    }
  }
}

void Simulator::set_rates(const RatesDecision& d, RngStream& rng) {
  if (state_.clock % cfg_.year_ticks() != 0)
    throw std::logic_error("set_rates: clock is not at a year boundary");
  if (!rates_on_grid(d))
    throw std::invalid_argument("set_rates: decision off the rate grid");
  state_.imc_line.tau_days = mean_production_time(d.imc_rate);
  state_.llpm_line.tau_days = mean_production_time(d.llpm_rate);
  state_.ulpm_line.tau_days = mean_production_time(d.ulpm_rate);
  cascade(rng);
}

bool Simulator::next_event_candidate(Candidate& out) const {
  bool found = false;
  auto consider = [&](Tick tick, int priority, EventKind kind) {
    if (tick < 0) return;
    if (!found || tick < out.tick ||
        (tick == out.tick && priority < out.priority)) {
      out = {tick, priority, kind};
      found = true;
    }
  };

  if (!state_.imc_line.holding)
    consider(state_.imc_line.finish, 0, EventKind::imc_produced);
  if (!state_.llpm_line.holding)
    consider(state_.llpm_line.finish, 1, EventKind::llpm_produced);
  if (!state_.ulpm_line.holding)
    consider(state_.ulpm_line.finish, 2, EventKind::ulpm_produced);
  for (int b = 0; b < 2; ++b)
    if (!state_.booster_docks[b].holding)
      consider(state_.booster_docks[b].finish, 3 + b, EventKind::srm_produced);
  for (int a = 0; a < 2; ++a)
    if (!state_.ait_docks[a].holding)
      consider(state_.ait_docks[a].finish, 5 + a, EventKind::cc_produced);
  if (state_.lp.phase == LaunchPadState::Phase::integrating)
    consider(state_.lp.launch_at, 7, EventKind::launch_performed);
  else if (state_.lp.phase == LaunchPadState::Phase::repairing)
    consider(state_.lp.repair_done, 7, EventKind::lp_repair_finished);
  if (state_.next_launch < schedule_.size() && srm_blocked()) {
    Tick threshold =
        static_cast<Tick>(cfg_.srm_block_threshold_days) * kTicksPerDay;
    consider(schedule_[state_.next_launch] - threshold + 1, 8,
             EventKind::srm_unblocked);
  }
  consider((static_cast<Tick>(state_.year) + 1) * cfg_.year_ticks(), 9,
           EventKind::year_ended);
  return found;
}

EventKind Simulator::advance_to_next_event(RngStream& rng) {
  Candidate next{};
  if (!next_event_candidate(next))
    throw std::logic_error("simulator deadlock: no pending event");

  accrue_storage(next.tick);
  state_.clock = next.tick;

  switch (next.kind) {
    case EventKind::imc_produced:
    case EventKind::llpm_produced:
    case EventKind::ulpm_produced: {
      ProductionLine& line = next.kind == EventKind::imc_produced
                                 ? state_.imc_line
                                 : next.kind == EventKind::llpm_produced
                                       ? state_.llpm_line
                                       : state_.ulpm_line;
      int& stock = next.kind == EventKind::imc_produced
                       ? state_.imc_stock
                       : next.kind == EventKind::llpm_produced
                             ? state_.llpm_stock
                             : state_.ulpm_stock;
      if (stock < cfg_.sub_capacity) {
        ++stock;
        start_line_unit(line, rng);
      } else {
        line.holding = true;
        line.finish = -1;
      }
      break;
    }
    case EventKind::srm_produced: {
      WorkshopDock& dock = state_.booster_docks[next.priority - 3];
      dock.finish = -1;
      if (state_.srm_stock < cfg_.srm_capacity) {
        ++state_.srm_stock;
        ++state_.srm_deposited;
      } else {
        dock.holding = true;
      }
      break;
    }
    case EventKind::cc_produced: {
      WorkshopDock& dock = state_.ait_docks[next.priority - 5];
      dock.finish = -1;
      dock.holding = true;
      break;
    }
    case EventKind::launch_performed: {
      LaunchPadState& lp = state_.lp;
      LatenessResult lateness =
          classify_lateness(lp.start, lp.scheduled, state_.clock, cfg_);
      if (lateness.kind == LatenessKind::anticipated)
        state_.year_costs.anticipated_lateness +=
            lateness.late_days * cfg_.lateness.anticipated;
      else if (lateness.kind == LatenessKind::unexpected)
        state_.year_costs.unexpected_lateness +=
            lateness.late_days * cfg_.lateness.unexpected;
      if (on_launch) on_launch(lp.start, lp.scheduled, state_.clock);
      ++state_.launches_performed;
      ++state_.next_launch;
      lp.phase = LaunchPadState::Phase::repairing;
      lp.repair_done = state_.clock +
                       static_cast<Tick>(cfg_.lp_repair_days) * kTicksPerDay;
      lp.start = lp.finish = lp.launch_at = lp.scheduled = -1;
      break;
    }
    case EventKind::lp_repair_finished:
      state_.lp.phase = LaunchPadState::Phase::idle;
      state_.lp.repair_done = -1;
      break;
    case EventKind::srm_unblocked:
    case EventKind::year_ended:
      // No direct state change; the clock move itself enables transfers or
      // hands the year boundary back to the caller.
      break;
  }

  cascade(rng);
  if (on_event) on_event(state_, next.kind);
  return next.kind;
}

CostBreakdown Simulator::simulate_year(const RatesDecision& d, RngStream& rng) {
  if (state_.year >= static_cast<int>(due_by_year_end_.size()))
    throw std::logic_error("simulate_year: past the calendar horizon");
  set_rates(d, rng);
  while (advance_to_next_event(rng) != EventKind::year_ended) {
  }
  CostBreakdown out = state_.year_costs;
  state_.year_costs = CostBreakdown{};
  state_.year += 1;
  return out;
}

ObservedState Simulator::observe() const {
  ObservedState obs;
  obs.imc_stock = state_.imc_stock;
  obs.llpm_stock = state_.llpm_stock;
  obs.ulpm_stock = state_.ulpm_stock;
  obs.srm_stock = state_.srm_stock;
  for (const WorkshopDock& d : state_.ait_docks)
    if (d.holding) ++obs.cc_waiting;
  int horizon = static_cast<int>(due_by_year_end_.size());
  int due_scheduled = state_.year < horizon
                          ? due_by_year_end_[state_.year]
                          : (horizon > 0 ? due_by_year_end_.back() : 0);
  obs.launches_due =
      due_scheduled - static_cast<int>(state_.launches_performed);
  return obs;
}

}  // namespace launchline
