#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "launchline/logprob.hpp"
#include "launchline/rng.hpp"
#include "launchline/simulator.hpp"

namespace launchline {

// The yearly action set. The canonical launcher grid is 7 IMC rates by 7
// LLPM rates by 7 ULPM rates, 343 actions, encoded lexicographically with
// IMC as the major axis and 1-based action numbers. Benchmark setups may
// restrict the grid; everything downstream is sized by action_count().
struct ActionGrid {
  std::vector<int> imc_rates;
  std::vector<int> llpm_rates;
  std::vector<int> ulpm_rates;

  static ActionGrid full();
  // Rates restricted to n launchers per year, n in [lo, hi] (IMC = 4n).
  static ActionGrid restricted(int lo_launchers, int hi_launchers);

  int action_count() const {
    return static_cast<int>(imc_rates.size() * llpm_rates.size() *
                            ulpm_rates.size());
  }
  RatesDecision decode(int action) const;  // action in [1, action_count()]
  int encode(const RatesDecision& d) const;
  bool contains(const RatesDecision& d) const;

  // Largest grid value <= target per component, or the grid minimum.
  RatesDecision clamp(int imc_target, int llpm_target, int ulpm_target) const;
};

// Controller-visible state coding. Subassembly stocks collapse to
// empty / not-enough-for-one-launcher / full-ish codes, SRMs to how many
// launcher loads are available, and the launch demand caps at a "12 or
// more" class. The index set enumerates every coded combination.
struct StateSpace {
  int srm_codes = 3;  // 3 when capacity is 8, 2 when capacity is 4

  static StateSpace for_config(const SimConfig& cfg);

  static constexpr int kSubCodes = 3;
  static constexpr int kCcValues = 3;
  static constexpr int kDueClasses = 13;  // 0..11 plus "12+"

  int state_count() const {
    return kSubCodes * kSubCodes * kSubCodes * srm_codes * kCcValues *
           kDueClasses;
  }

  static int sub_stock_code(int stock);              // {0->1, 1..3->2, 4->3}
  int srm_stock_code(int stock) const;               // per capacity table
  static int due_class(int launches_due);            // 0..12, 12 = "12+"

  // Dense 1-based index of an observation.
  int aggregate(const ObservedState& obs, const SimConfig& cfg) const;
};

// Deterministic policy: one action number per (state, year).
class PolicyMatrix {
 public:
  PolicyMatrix() = default;
  PolicyMatrix(int state_count, int horizon, int initial_action = 1);

  int states() const { return states_; }
  int horizon() const { return horizon_; }
  int at(int state_ix, int year) const {  // 0-based state_ix/year, 1-based action
    return entries_[static_cast<std::size_t>(year) * states_ + state_ix];
  }
  int& at(int state_ix, int year) {
    return entries_[static_cast<std::size_t>(year) * states_ + state_ix];
  }
  bool operator==(const PolicyMatrix&) const = default;

 private:
  int states_ = 0;
  int horizon_ = 0;
  std::vector<int> entries_;  // (year, state) layout
};

// Sampling probabilities P(i,j,t) over (state, action, year). Stored in
// (t, i, j) row-major order, which is also the checkpoint layout.
class ProbTensor {
 public:
  ProbTensor() = default;
  ProbTensor(int state_count, int action_count, int horizon, double fill);

  static ProbTensor uniform(int state_count, int action_count, int horizon);

  int states() const { return S_; }
  int actions() const { return A_; }
  int horizon() const { return T_; }

  double at(int state_ix, int action_ix, int year) const {  // all 0-based
    return data_[offset(state_ix, year) + action_ix];
  }
  std::span<double> row(int state_ix, int year) {
    return {data_.data() + offset(state_ix, year), static_cast<std::size_t>(A_)};
  }
  std::span<const double> row(int state_ix, int year) const {
    return {data_.data() + offset(state_ix, year), static_cast<std::size_t>(A_)};
  }

  bool rows_normalized(double tol = 1e-9) const;
  double min_entry() const;

  bool operator==(const ProbTensor&) const = default;

  // Binary checkpoint: magic "LIPT", u32 version, u32 dims S A T, then
  // S*A*T little-endian doubles in (t, i, j) row-major order.
  void save(const std::filesystem::path& file) const;
  static ProbTensor load(const std::filesystem::path& file);

 private:
  std::size_t offset(int state_ix, int year) const {
    return (static_cast<std::size_t>(year) * S_ + state_ix) * A_;
  }
  int S_ = 0, A_ = 0, T_ = 0;
  std::vector<double> data_;
};

// One categorical draw per (i,t) cell, rows taken in (t, i) storage order.
PolicyMatrix draw_policy(const ProbTensor& P, RngStream& rng);
int draw_from_row(std::span<const double> row, double u);  // 1-based action

// log f(pi, P): log-probability of drawing exactly pi from P. -inf when any
// selected entry is zero.
LogWeight log_f(const PolicyMatrix& pi, const ProbTensor& P);

// log of (1 - lambda) f(pi, P) + lambda f(pi, P0), the density of the
// two-matrix draw scheme the optimizers use.
LogWeight log_f_mix(const PolicyMatrix& pi, const ProbTensor& P,
                    const ProbTensor& P0, double lambda);

// Produce on average exactly what the year's calendar demands (4n IMCs,
// n LLPMs, n ULPMs, clamped to the grid), regardless of stocks.
PolicyMatrix naive_policy(const Calendar& calendar, const StateSpace& space,
                          const ActionGrid& grid);
RatesDecision naive_rates_for_count(int launches, const ActionGrid& grid);

// Row-wise argmax readout; ties break to the smallest action number.
PolicyMatrix extract_deterministic_policy(const ProbTensor& P);

// P0 that puts `mass` on the naive action of each (i,t) and spreads the
// rest uniformly. mass = 0 gives the uniform tensor.
ProbTensor warm_start_tensor(const Calendar& calendar, const StateSpace& space,
                             const ActionGrid& grid, double mass);

// Policy file JSON:
// {"srm_capacity", "horizon", "state_count", "encoding_version",
//  "matrix": [state_count rows of horizon action numbers]}
std::string policy_to_json(const PolicyMatrix& pi, int srm_capacity);
PolicyMatrix policy_from_json(const std::string& text, int* srm_capacity = nullptr);
PolicyMatrix load_policy(const std::filesystem::path& file,
                         int* srm_capacity = nullptr);
void save_policy(const PolicyMatrix& pi, int srm_capacity,
                 const std::filesystem::path& file);

// Runs one full trajectory, looking the decision up per year from the
// policy; adds the missed-launch penalty at horizon end.
HorizonResult simulate_horizon(const PolicyMatrix& policy,
                               const Calendar& calendar, const SimConfig& cfg,
                               const ActionGrid& grid, RngStream& rng,
                               Simulator* instrumented = nullptr);

}  // namespace launchline
