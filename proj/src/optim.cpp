#include "launchline/optim.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace launchline {
namespace {

std::uint64_t policy_tag(int k, int n) {
  return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(k)) << 32) |
         static_cast<std::uint32_t>(n);
}

double now_ms() {
  using clock = std::chrono::steady_clock;
  return std::chrono::duration<double, std::milli>(
             clock::now().time_since_epoch())
      .count();
}

void append_num(std::string& out, double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  out += buf;
}

// Descending order of costs; ties keep the lower original index first.
std::vector<int> descending_order(std::span<const double> costs) {
  std::vector<int> order(costs.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return costs[a] > costs[b];
  });
  return order;
}

// In-place convex update: row <- (1-gain) * row + gain * Phat, where Phat
// is the weight-normalized action frequency of the sampled policies.
void apply_weighted_update(ProbTensor& P,
                           const std::vector<PolicyMatrix>& policies,
                           const std::vector<double>& weights, double gain) {
  for (int t = 0; t < P.horizon(); ++t) {
    for (int i = 0; i < P.states(); ++i) {
      auto row = P.row(i, t);
      for (double& p : row) p *= 1.0 - gain;
      for (std::size_t n = 0; n < policies.size(); ++n) {
        if (weights[n] == 0.0) continue;
        row[policies[n].at(i, t) - 1] += gain * weights[n];
      }
    }
  }
}

// Clamp every entry to at least mu, then rescale the row back to sum 1.
void floor_and_renormalize(ProbTensor& P, double mu) {
  for (int t = 0; t < P.horizon(); ++t) {
    for (int i = 0; i < P.states(); ++i) {
      auto row = P.row(i, t);
      double sum = 0.0;
      for (double& p : row) {
        if (p < mu) p = mu;
        sum += p;
      }
      for (double& p : row) p /= sum;
    }
  }
}

void check_tensor_invariants(const ProbTensor& P, double floor_mu) {
  if (!P.rows_normalized(1e-9))
    throw std::logic_error("optimizer invariant violated: tensor rows drifted "
                           "from sum 1");
  if (floor_mu > 0.0) {
    double least = floor_mu / (1.0 + P.actions() * floor_mu) - 1e-15;
    if (P.min_entry() < least)
      throw std::logic_error(
          "optimizer invariant violated: entry below the probability floor");
  }
}

void checkpoint_if_due(const OptimHooks& hooks, int k, const ProbTensor& P) {
  if (hooks.checkpoint && hooks.checkpoint_every > 0 &&
      (k + 1) % hooks.checkpoint_every == 0)
    hooks.checkpoint(k, P);
}

struct IterationScratch {
  std::vector<PolicyMatrix> policies;
  std::vector<double> costs;
};

// Draws N whole policies, each from P0 with probability p_from_p0 and from
// P otherwise, on independent per-policy streams.
void draw_policies(IterationScratch& scratch, int N, const ProbTensor& P0,
                   const ProbTensor& P, double p_from_p0, std::uint64_t master,
                   int k, ThreadPool* pool) {
  scratch.policies.assign(N, PolicyMatrix());
  auto draw_one = [&](std::int64_t n) {
    RngStream rng(master, {stream_tag::policy_draw, static_cast<std::uint64_t>(k),
                           static_cast<std::uint64_t>(n)});
    bool from_p0 = rng.uniform01() < p_from_p0;
    scratch.policies[n] = draw_policy(from_p0 ? P0 : P, rng);
  };
  if (pool)
    pool->parallel_for(N, draw_one);
  else
    for (int n = 0; n < N; ++n) draw_one(n);
}

}  // namespace

void validate_params(const MrasParams& p) {
  if (p.N0 < 2) throw std::invalid_argument("MRAS: N0 must be >= 2");
  if (p.M0 < 1) throw std::invalid_argument("MRAS: M0 must be >= 1");
  if (!(p.rho0 > 0.0 && p.rho0 <= 1.0))
    throw std::invalid_argument("MRAS: rho0 must be in (0, 1]");
  if (!(p.epsilon > 0.0)) throw std::invalid_argument("MRAS: epsilon must be > 0");
  if (!(p.alpha > 1.0)) throw std::invalid_argument("MRAS: alpha must be > 1");
  if (!(p.beta > 1.0)) throw std::invalid_argument("MRAS: beta must be > 1");
  if (!(p.lambda > 0.0 && p.lambda < 1.0))
    throw std::invalid_argument("MRAS: lambda must be in (0, 1)");
  if (!(p.nu > 0.0 && p.nu <= 1.0))
    throw std::invalid_argument("MRAS: nu must be in (0, 1]");
  if (p.mu < 0.0) throw std::invalid_argument("MRAS: mu must be >= 0");
  if (p.iterations < 0) throw std::invalid_argument("MRAS: K must be >= 0");
}

void validate_params(const AsaParams& p) {
  if (p.N0 < 1) throw std::invalid_argument("ASA: N0 must be > 0");
  if (p.M0 < 1) throw std::invalid_argument("ASA: M0 must be > 0");
  if (!(p.T0 > 0.0)) throw std::invalid_argument("ASA: T0 must be > 0");
  if (p.iterations < 0) throw std::invalid_argument("ASA: K must be >= 0");
}

std::string history_csv(std::span<const IterationRecord> history) {
  std::string out =
      "k,branch,threshold,iter_best,best_cost,mean_cost,policies,trajectories,"
      "wall_ms\n";
  for (const IterationRecord& r : history) {
    out += std::to_string(r.k);
    out += ',';
    out += r.branch;
    out += ',';
    append_num(out, r.threshold);
    out += ',';
    append_num(out, r.iter_best);
    out += ',';
    append_num(out, r.best_cost);
    out += ',';
    append_num(out, r.mean_cost);
    out += ',';
    out += std::to_string(r.policies);
    out += ',';
    out += std::to_string(r.trajectories);
    out += ',';
    append_num(out, r.wall_ms);
    out += '\n';
  }
  return out;
}

SimulationEvaluator::SimulationEvaluator(Calendar calendar, SimConfig cfg,
                                         ActionGrid grid, ThreadPool* pool)
    : calendar_(std::move(calendar)),
      cfg_(std::move(cfg)),
      grid_(std::move(grid)),
      pool_(pool) {}

double SimulationEvaluator::evaluate(const PolicyMatrix& pi,
                                     long long trajectories,
                                     std::uint64_t master, std::uint64_t tag) {
  return monte_carlo_eval(pi, trajectories, calendar_, cfg_, grid_, master, tag,
                          pool_);
}

double monte_carlo_eval(const PolicyMatrix& pi, long long samples,
                        const Calendar& calendar, const SimConfig& cfg,
                        const ActionGrid& grid, std::uint64_t master,
                        std::uint64_t tag, ThreadPool* pool) {
  if (samples < 1)
    throw std::invalid_argument("monte_carlo_eval: samples must be >= 1");
  std::vector<double> totals(static_cast<std::size_t>(samples));
  auto run_one = [&](std::int64_t m) {
    RngStream rng(master,
                  {stream_tag::trajectory, tag, static_cast<std::uint64_t>(m)});
    totals[m] = simulate_horizon(pi, calendar, cfg, grid, rng).total_cost;
  };
  if (pool)
    pool->parallel_for(samples, run_one);
  else
    for (std::int64_t m = 0; m < samples; ++m) run_one(m);
  // Sequential index-ordered reduction keeps the result independent of the
  // worker count.
  double sum = 0.0;
  for (double v : totals) sum += v;
  return sum / static_cast<double>(samples);
}

EvalSummary monte_carlo_eval_summary(const PolicyMatrix& pi, long long samples,
                                     const Calendar& calendar,
                                     const SimConfig& cfg,
                                     const ActionGrid& grid,
                                     std::uint64_t master, std::uint64_t tag,
                                     ThreadPool* pool) {
  if (samples < 1)
    throw std::invalid_argument("monte_carlo_eval: samples must be >= 1");
  std::vector<double> totals(static_cast<std::size_t>(samples));
  auto run_one = [&](std::int64_t m) {
    RngStream rng(master,
                  {stream_tag::trajectory, tag, static_cast<std::uint64_t>(m)});
    totals[m] = simulate_horizon(pi, calendar, cfg, grid, rng).total_cost;
  };
  if (pool)
    pool->parallel_for(samples, run_one);
  else
    for (std::int64_t m = 0; m < samples; ++m) run_one(m);

  EvalSummary s;
  s.samples = samples;
  double sum = 0.0;
  for (double v : totals) sum += v;
  s.mean = sum / static_cast<double>(samples);
  double ss = 0.0;
  for (double v : totals) ss += (v - s.mean) * (v - s.mean);
  s.stddev = samples > 1 ? std::sqrt(ss / static_cast<double>(samples - 1)) : 0.0;
  s.stderr_mean = s.stddev / std::sqrt(static_cast<double>(samples));
  s.ci95_low = s.mean - 1.96 * s.stderr_mean;
  s.ci95_high = s.mean + 1.96 * s.stderr_mean;
  return s;
}

double threshold_I(double x, double chi, double epsilon) {
  if (!(epsilon > 0.0)) throw std::invalid_argument("threshold_I: epsilon <= 0");
  if (x >= chi + epsilon) return 0.0;
  if (x <= chi) return 1.0;
  return (chi + epsilon - x) / epsilon;
}

double elite_quantile(std::span<const double> costs, double rho, int N) {
  if (costs.empty() || N != static_cast<int>(costs.size()))
    throw std::invalid_argument("elite_quantile: bad cost list length");
  if (!(rho > 0.0 && rho <= 1.0))
    throw std::invalid_argument("elite_quantile: rho outside (0, 1]");
  std::vector<double> sorted(costs.begin(), costs.end());
  std::sort(sorted.begin(), sorted.end(), std::greater<double>());
  int pos = static_cast<int>(std::ceil((1.0 - rho) * N));
  pos = std::clamp(pos, 1, N);
  return sorted[pos - 1];
}

OptimResult mras_run(const MrasParams& params, const ProbTensor& P0,
                     PolicyEvaluator& evaluator, std::uint64_t master_seed,
                     ThreadPool* pool, const OptimHooks& hooks) {
  validate_params(params);
  if (!P0.rows_normalized(1e-9))
    throw std::invalid_argument("mras_run: P0 rows are not normalized");

  OptimResult result;
  result.tensor = P0;
  result.best_cost = std::numeric_limits<double>::infinity();
  ProbTensor& P = result.tensor;

  int N = params.N0;
  long long M = params.M0;
  double rho = params.rho0;
  double gamma_prev = 0.0;  // gamma_bar of the previous iteration
  PolicyMatrix elite;       // policy attaining the current threshold
  IterationScratch scratch;

  for (int k = 0; k < params.iterations; ++k) {
    double t0 = now_ms();
    draw_policies(scratch, N, P0, P, params.lambda, master_seed, k, pool);
    scratch.costs.resize(N);
    for (int n = 0; n < N; ++n)
      scratch.costs[n] =
          evaluator.evaluate(scratch.policies[n], M, master_seed, policy_tag(k, n));
    const std::vector<double>& vbar = scratch.costs;

    std::vector<int> order = descending_order(vbar);
    int quantile_pos =
        std::clamp(static_cast<int>(std::ceil((1.0 - rho) * N)), 1, N);
    double gamma_k = vbar[order[quantile_pos - 1]];

    char branch;
    double gamma_bar;
    int N_next = N;
    if (k == 0 || gamma_k <= gamma_prev - params.epsilon) {
      branch = 'i';
      gamma_bar = gamma_k;
      elite = scratch.policies[order[quantile_pos - 1]];
    } else {
      // Smallest index past the quantile whose cost still clears the old
      // threshold by epsilon.
      int iota = 0;
      for (int pos = quantile_pos + 1; pos <= N; ++pos) {
        if (vbar[order[pos - 1]] <= gamma_prev - params.epsilon) {
          iota = pos;
          break;
        }
      }
      if (iota > 0) {
        branch = 'p';
        gamma_bar = vbar[order[iota - 1]];
        rho = 1.0 - static_cast<double>(iota) / N;
        elite = scratch.policies[order[iota - 1]];
      } else {
        branch = 'f';
        gamma_bar = evaluator.evaluate(elite, M, master_seed, policy_tag(k, N));
        N_next = static_cast<int>(std::ceil(params.alpha * N));
      }
    }

    std::vector<LogWeight> weights(N);
    for (int n = 0; n < N; ++n) {
      double ind = threshold_I(vbar[n], gamma_bar, params.epsilon);
      if (ind == 0.0) {
        weights[n] = LogWeight::zero();
        continue;
      }
      LogWeight numer = LogWeight::from_log(-static_cast<double>(k) * vbar[n] +
                                            std::log(ind));
      LogWeight dens = log_f_mix(scratch.policies[n], P, P0, params.lambda);
      weights[n] = numer / dens;
    }
    auto normalized = try_normalize_weights(weights);
    if (normalized) {
      for (double w : *normalized)
        if (std::isnan(w))
          throw std::logic_error("MRAS produced a NaN policy weight");
      apply_weighted_update(P, scratch.policies, *normalized, params.nu);
      floor_and_renormalize(P, params.mu);
    }
    // When every weight vanishes the tensor is kept as is; the iteration,
    // sample and policy counters still advance so the loop terminates.
    if (params.check_invariants)
      check_tensor_invariants(P, normalized ? params.mu : 0.0);

    IterationRecord rec;
    rec.k = k;
    rec.branch = branch;
    rec.threshold = gamma_bar;
    rec.iter_best = *std::min_element(vbar.begin(), vbar.end());
    rec.mean_cost =
        std::accumulate(vbar.begin(), vbar.end(), 0.0) / static_cast<double>(N);
    rec.policies = N;
    rec.trajectories = M;
    if (rec.iter_best < result.best_cost) {
      result.best_cost = rec.iter_best;
      result.best_policy =
          scratch.policies[std::min_element(vbar.begin(), vbar.end()) -
                           vbar.begin()];
    }
    rec.best_cost = result.best_cost;
    rec.wall_ms = hooks.record_wall_time ? now_ms() - t0 : 0.0;
    if (hooks.on_iteration) hooks.on_iteration(rec);
    result.history.push_back(rec);
    checkpoint_if_due(hooks, k, P);

    gamma_prev = gamma_bar;
    N = N_next;
    M = static_cast<long long>(std::ceil(params.beta * static_cast<double>(M)));
  }
  return result;
}

OptimResult asa_run(const AsaParams& params, const ProbTensor& P0,
                    PolicyEvaluator& evaluator, std::uint64_t master_seed,
                    ThreadPool* pool, const OptimHooks& hooks) {
  validate_params(params);
  if (!P0.rows_normalized(1e-9))
    throw std::invalid_argument("asa_run: P0 rows are not normalized");

  OptimResult result;
  result.tensor = P0;
  result.best_cost = std::numeric_limits<double>::infinity();
  ProbTensor& P = result.tensor;

  int N = params.N0;
  long long M = params.M0;
  double gain = std::pow(100.0, -kAsaGainExponent);  // alpha_0
  double explore = 1.0;                              // beta_0
  IterationScratch scratch;

  for (int k = 0; k < params.iterations; ++k) {
    double t0 = now_ms();
    double temperature = params.T0 / std::log(static_cast<double>(k) + std::exp(1.0));

    draw_policies(scratch, N, P0, P, explore, master_seed, k, pool);
    scratch.costs.resize(N);
    for (int n = 0; n < N; ++n)
      scratch.costs[n] =
          evaluator.evaluate(scratch.policies[n], M, master_seed, policy_tag(k, n));
    const std::vector<double>& vbar = scratch.costs;

    std::vector<LogWeight> weights(N);
    for (int n = 0; n < N; ++n) {
      LogWeight numer = LogWeight::from_log(-vbar[n] / temperature);
      LogWeight dens = log_f_mix(scratch.policies[n], P, P0, explore);
      weights[n] = numer / dens;
    }
    auto normalized = try_normalize_weights(weights);
    if (normalized) {
      for (double w : *normalized)
        if (std::isnan(w)) throw std::logic_error("ASA produced a NaN policy weight");
      apply_weighted_update(P, scratch.policies, *normalized, gain);
    }
    if (params.check_invariants) check_tensor_invariants(P, 0.0);

    IterationRecord rec;
    rec.k = k;
    rec.threshold = temperature;
    rec.iter_best = *std::min_element(vbar.begin(), vbar.end());
    rec.mean_cost =
        std::accumulate(vbar.begin(), vbar.end(), 0.0) / static_cast<double>(N);
    rec.policies = N;
    rec.trajectories = M;
    if (rec.iter_best < result.best_cost) {
      result.best_cost = rec.iter_best;
      result.best_policy =
          scratch.policies[std::min_element(vbar.begin(), vbar.end()) -
                           vbar.begin()];
    }
    rec.best_cost = result.best_cost;
    rec.wall_ms = hooks.record_wall_time ? now_ms() - t0 : 0.0;
    if (hooks.on_iteration) hooks.on_iteration(rec);
    result.history.push_back(rec);
    checkpoint_if_due(hooks, k, P);

    // Schedules for the next iteration; the sample-count formula is defined
    // as M0 at k = 0 where log(k) does not exist.
    if (k >= 1) {
      double lk = std::log(static_cast<double>(k));
      M = std::max<long long>(params.M0,
                              static_cast<long long>(1.10 * lk * lk * lk));
    } else {
      M = params.M0;
    }
    N = std::max(params.N0, static_cast<int>(
                                std::pow(static_cast<double>(k), 0.501)));
    gain = std::pow(static_cast<double>(k) + 100.0, -kAsaGainExponent);
    explore = std::pow(static_cast<double>(k) + 1.0, -kAsaExploreExponent);
  }
  return result;
}

std::string compare_report_csv(const CompareReport& rep) {
  std::string out = "policy,srm_capacity,mean_cost,stderr,samples\n";
  for (const CompareCell& c : rep.cells) {
    out += c.policy;
    out += ',';
    out += std::to_string(c.srm_capacity);
    out += ',';
    append_num(out, c.mean_cost);
    out += ',';
    append_num(out, c.stderr_mean);
    out += ',';
    out += std::to_string(c.samples);
    out += '\n';
  }
  return out;
}

std::string compare_report_text(const CompareReport& rep) {
  auto cell = [&](const std::string& policy, int cap) -> const CompareCell* {
    for (const CompareCell& c : rep.cells)
      if (c.policy == policy && c.srm_capacity == cap) return &c;
    return nullptr;
  };
  std::ostringstream out;
  out << "SRM storage capacity        4            8\n";
  for (const std::string& policy : {std::string("optimized"), std::string("naive")}) {
    out << (policy == "optimized" ? (rep.algo == Algo::asa ? "ASA      " : "MRAS     ")
                                  : "Naive    ");
    for (int cap : {4, 8}) {
      const CompareCell* c = cell(policy, cap);
      char buf[32];
      std::snprintf(buf, sizeof buf, " %12.0f", c ? c->mean_cost : 0.0);
      out << buf;
    }
    out << '\n';
  }
  return out.str();
}

CompareReport compare_capacities(Algo algo, const MrasParams& mras_params,
                                 const AsaParams& asa_params,
                                 const Calendar& calendar,
                                 const SimConfig& base_config,
                                 long long eval_samples,
                                 std::uint64_t master_seed, ThreadPool* pool,
                                 double warm_mass) {
  CompareReport rep;
  rep.algo = algo;
  const ActionGrid grid = ActionGrid::full();
  for (int capacity : {4, 8}) {
    SimConfig cfg = base_config;
    cfg.srm_capacity = capacity;
    validate_config(cfg);
    StateSpace space = StateSpace::for_config(cfg);
    ProbTensor start =
        warm_start_tensor(calendar, space, grid, warm_mass);
    SimulationEvaluator evaluator(calendar, cfg, grid, pool);
    std::uint64_t run_seed =
        derive_seed(master_seed, {static_cast<std::uint64_t>(capacity)});
    OptimResult run =
        algo == Algo::asa
            ? asa_run(asa_params, start, evaluator, run_seed, pool)
            : mras_run(mras_params, start, evaluator, run_seed, pool);

    PolicyMatrix optimized = extract_deterministic_policy(run.tensor);
    PolicyMatrix naive = naive_policy(calendar, space, grid);
    std::uint64_t eval_seed = derive_seed(
        master_seed, {0xE7A1ull, static_cast<std::uint64_t>(capacity)});
    EvalSummary opt = monte_carlo_eval_summary(optimized, eval_samples, calendar,
                                               cfg, grid, eval_seed, 0, pool);
    EvalSummary nai = monte_carlo_eval_summary(naive, eval_samples, calendar,
                                               cfg, grid, eval_seed, 0, pool);
    rep.cells.push_back(
        {"optimized", capacity, opt.mean, opt.stderr_mean, opt.samples});
    rep.cells.push_back(
        {"naive", capacity, nai.mean, nai.stderr_mean, nai.samples});
  }
  return rep;
}

}  // namespace launchline
