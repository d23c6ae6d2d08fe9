#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "launchline/mdp.hpp"
#include "launchline/thread_pool.hpp"

namespace launchline {

struct MrasParams {
  int N0 = 100;           // initial number of policies per iteration
  int M0 = 1000;          // initial trajectories per policy
  double rho0 = 0.25;     // initial elite quantile
  double epsilon = 1.0;   // required threshold improvement
  double alpha = 1.02;    // policy-count growth on a failed iteration
  double beta = 1.0205;   // trajectory-count growth per iteration
  double lambda = 0.4;    // probability of drawing from P0
  double nu = 0.5;        // smoothing gain
  double mu = 1e-8;       // probability floor after each update
  int iterations = 100;   // K
  bool check_invariants = true;
};
void validate_params(const MrasParams& p);

struct AsaParams {
  int N0 = 100;
  int M0 = 5000;
  double T0 = 2.0;       // initial temperature
  int iterations = 100;  // K
  bool check_invariants = true;
};
void validate_params(const AsaParams& p);

// Gain and exploration schedules are fixed: alpha_k decays with exponent
// 0.501 from 100^-0.501 and beta_k with exponent 0.5.
inline constexpr double kAsaGainExponent = 0.501;
inline constexpr double kAsaExploreExponent = 0.5;

struct IterationRecord {
  int k = 0;
  char branch = '-';        // MRAS: i(mprove) / p(artial) / f(ail); ASA: -
  double threshold = 0.0;   // MRAS gamma_bar, ASA temperature T_k
  double iter_best = 0.0;   // best mean cost among this iteration's policies
  double best_cost = 0.0;   // best mean cost seen so far
  double mean_cost = 0.0;   // average over this iteration's policies
  int policies = 0;         // N_k
  long long trajectories = 0;  // M_k
  double wall_ms = 0.0;
};

std::string history_csv(std::span<const IterationRecord> history);

// Mean-cost oracle the optimizers sample. The simulation evaluator runs the
// launcher model; tests plug in enumerable toy problems instead.
class PolicyEvaluator {
 public:
  virtual ~PolicyEvaluator() = default;
  // Mean cost over `trajectories` runs; streams derive from (master, tag, m).
  virtual double evaluate(const PolicyMatrix& pi, long long trajectories,
                          std::uint64_t master, std::uint64_t tag) = 0;
};

class SimulationEvaluator : public PolicyEvaluator {
 public:
  SimulationEvaluator(Calendar calendar, SimConfig cfg, ActionGrid grid,
                      ThreadPool* pool = nullptr);
  double evaluate(const PolicyMatrix& pi, long long trajectories,
                  std::uint64_t master, std::uint64_t tag) override;

 private:
  Calendar calendar_;
  SimConfig cfg_;
  ActionGrid grid_;
  ThreadPool* pool_;
};

// Mean of M independent trajectory costs; deterministic in (master, tag)
// and independent of the pool's worker count.
double monte_carlo_eval(const PolicyMatrix& pi, long long samples,
                        const Calendar& calendar, const SimConfig& cfg,
                        const ActionGrid& grid, std::uint64_t master,
                        std::uint64_t tag = 0, ThreadPool* pool = nullptr);

struct EvalSummary {
  double mean = 0.0;
  double stddev = 0.0;
  double stderr_mean = 0.0;
  double ci95_low = 0.0;
  double ci95_high = 0.0;
  long long samples = 0;
};
EvalSummary monte_carlo_eval_summary(const PolicyMatrix& pi, long long samples,
                                     const Calendar& calendar,
                                     const SimConfig& cfg,
                                     const ActionGrid& grid,
                                     std::uint64_t master,
                                     std::uint64_t tag = 0,
                                     ThreadPool* pool = nullptr);

// 1 for x <= chi, 0 for x >= chi + epsilon, linear in between.
double threshold_I(double x, double chi, double epsilon);

// Value at 1-based position ceil((1-rho)N) of the costs sorted descending,
// clamped into [1, N].
double elite_quantile(std::span<const double> costs, double rho, int N);

struct OptimHooks {
  int checkpoint_every = 0;  // 0 disables
  std::function<void(int k, const ProbTensor&)> checkpoint;
  std::function<void(const IterationRecord&)> on_iteration;
  bool record_wall_time = true;  // false writes 0 for reproducible reports
};

struct OptimResult {
  ProbTensor tensor;
  std::vector<IterationRecord> history;
  PolicyMatrix best_policy;
  double best_cost = 0.0;
};

// Model Reference Adaptive Search: elite-threshold importance-weighted
// updates of the probability tensor.
OptimResult mras_run(const MrasParams& params, const ProbTensor& P0,
                     PolicyEvaluator& evaluator, std::uint64_t master_seed,
                     ThreadPool* pool = nullptr, const OptimHooks& hooks = {});

// Approximate Stochastic Annealing: Boltzmann-weighted updates over every
// sampled policy with decaying gain, exploration and temperature schedules.
OptimResult asa_run(const AsaParams& params, const ProbTensor& P0,
                    PolicyEvaluator& evaluator, std::uint64_t master_seed,
                    ThreadPool* pool = nullptr, const OptimHooks& hooks = {});

enum class Algo { mras, asa };

struct CompareCell {
  std::string policy;  // "optimized" or "naive"
  int srm_capacity = 0;
  double mean_cost = 0.0;
  double stderr_mean = 0.0;
  long long samples = 0;
};

struct CompareReport {
  Algo algo = Algo::asa;
  std::vector<CompareCell> cells;
};

std::string compare_report_csv(const CompareReport& rep);
std::string compare_report_text(const CompareReport& rep);

// Optimizes the yearly rates for SRM capacities 4 and 8 over one calendar,
// then scores the optimized and naive policies with a common large
// evaluation. The optimizer starts from a warm tensor that favors the naive
// action (warm_mass = 0 starts uniform).
CompareReport compare_capacities(Algo algo, const MrasParams& mras_params,
                                 const AsaParams& asa_params,
                                 const Calendar& calendar,
                                 const SimConfig& base_config,
                                 long long eval_samples,
                                 std::uint64_t master_seed,
                                 ThreadPool* pool = nullptr,
                                 double warm_mass = 0.5);

}  // namespace launchline
