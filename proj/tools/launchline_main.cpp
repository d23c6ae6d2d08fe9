// Command-line front end: calendar generation/validation, single-trajectory
// simulation with tracing, Monte Carlo policy evaluation, MRAS/ASA
// optimization runs and the capacity comparison report.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <thread>

#include "CLI11.hpp"
#include "json.hpp"
#include "launchline/calendar.hpp"
#include "launchline/mdp.hpp"
#include "launchline/optim.hpp"
#include "launchline/simulator.hpp"
#include "launchline/thread_pool.hpp"

namespace fs = std::filesystem;
using namespace launchline;

namespace {

std::string fmt_num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

int default_workers() {
  if (const char* env = std::getenv("LAUNCHLINE_WORKERS")) {
    int w = std::atoi(env);
    if (w >= 1) return w;
  }
  unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

SimConfig load_config_or_default(const std::string& path) {
  if (path.empty()) return SimConfig{};
  return load_config(path);
}

PolicyMatrix load_policy_or_naive(const std::string& policy_arg,
                                  const Calendar& calendar,
                                  const SimConfig& cfg,
                                  const ActionGrid& grid) {
  StateSpace space = StateSpace::for_config(cfg);
  if (policy_arg == "naive") return naive_policy(calendar, space, grid);
  return load_policy(policy_arg);
}

void write_text_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write file: " + path.string());
  out << text;
}

nlohmann::json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read params file: " + path);
  nlohmann::json j;
  in >> j;
  return j;
}

MrasParams mras_params_from_file(const std::string& path, int iterations) {
  MrasParams p;
  if (!path.empty()) {
    nlohmann::json j = load_json_file(path);
    p.N0 = j.value("N0", p.N0);
    p.M0 = j.value("M0", p.M0);
    p.rho0 = j.value("rho0", p.rho0);
    p.epsilon = j.value("epsilon", p.epsilon);
    p.alpha = j.value("alpha", p.alpha);
    p.beta = j.value("beta", p.beta);
    p.lambda = j.value("lambda", p.lambda);
    p.nu = j.value("nu", p.nu);
    p.mu = j.value("mu", p.mu);
    p.iterations = j.value("iterations", p.iterations);
  }
  if (iterations >= 0) p.iterations = iterations;
  validate_params(p);
  return p;
}

AsaParams asa_params_from_file(const std::string& path, int iterations) {
  AsaParams p;
  if (!path.empty()) {
    nlohmann::json j = load_json_file(path);
    p.N0 = j.value("N0", p.N0);
    p.M0 = j.value("M0", p.M0);
    p.T0 = j.value("T0", p.T0);
    p.iterations = j.value("iterations", p.iterations);
  }
  if (iterations >= 0) p.iterations = iterations;
  validate_params(p);
  return p;
}

struct TraceSink {
  std::ofstream out;
  CostBreakdown finished_years;

  explicit TraceSink(const std::string& path) : out(path) {
    if (!out) throw std::runtime_error("cannot write trace file: " + path);
    out << "tick,event,imc,llpm,ulpm,srm,cc_docked,storage,anticipated,"
           "unexpected\n";
  }

  void operator()(const SimState& st, EventKind kind) {
    int cc = 0;
    for (const WorkshopDock& d : st.ait_docks)
      if (d.holding) ++cc;
    out << st.clock << ',' << event_name(kind) << ',' << st.imc_stock << ','
        << st.llpm_stock << ',' << st.ulpm_stock << ',' << st.srm_stock << ','
        << cc << ',' << fmt_num(finished_years.storage + st.year_costs.storage)
        << ','
        << fmt_num(finished_years.anticipated_lateness +
                   st.year_costs.anticipated_lateness)
        << ','
        << fmt_num(finished_years.unexpected_lateness +
                   st.year_costs.unexpected_lateness)
        << '\n';
    if (kind == EventKind::year_ended) finished_years += st.year_costs;
  }
};

std::string per_year_csv(const std::vector<CostBreakdown>& per_year) {
  std::string out = "year,storage,anticipated_lateness,unexpected_lateness,penalty,total\n";
  for (std::size_t y = 0; y < per_year.size(); ++y) {
    const CostBreakdown& c = per_year[y];
    out += std::to_string(y + 1) + ',' + fmt_num(c.storage) + ',' +
           fmt_num(c.anticipated_lateness) + ',' +
           fmt_num(c.unexpected_lateness) + ',' + fmt_num(c.penalty) + ',' +
           fmt_num(c.total()) + '\n';
  }
  return out;
}

int run_calendar_gen(int horizon, std::uint64_t seed, const std::string& out_path) {
  RngStream rng(seed, {stream_tag::calendar});
  Calendar c = build_calendar(horizon, rng);
  save_calendar(c, out_path);
  std::cout << "wrote " << out_path << " (" << c.total_launches()
            << " launches over " << horizon << " years)\n";
  return 0;
}

int run_calendar_check(const std::string& path) {
  Calendar c = load_calendar(path);
  CalendarValidation report = validate_calendar(c);
  if (report.ok) {
    std::cout << path << ": OK (" << c.total_launches() << " launches over "
              << c.horizon_years << " years)\n";
    return 0;
  }
  std::cout << path << ": INVALID\n";
  for (const std::string& v : report.violations) std::cout << "  - " << v << '\n';
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"launchline: launcher assembly-line simulator and policy optimizer"};
  app.require_subcommand(1);

  // calendar-gen
  auto* gen = app.add_subcommand("calendar-gen", "generate a random admissible calendar");
  int gen_horizon = 30;
  std::uint64_t gen_seed = 0;
  std::string gen_out;
  gen->add_option("--horizon", gen_horizon, "years to generate")->check(CLI::PositiveNumber);
  gen->add_option("--seed", gen_seed, "master seed");
  gen->add_option("--out", gen_out, "output JSON file")->required();

  // calendar-check
  auto* check = app.add_subcommand("calendar-check", "validate a calendar file");
  std::string check_file;
  check->add_option("file", check_file, "calendar JSON file")->required();

  // simulate
  auto* sim = app.add_subcommand("simulate", "run one trajectory with a trace");
  std::string sim_policy = "naive", sim_calendar, sim_config, sim_trace, sim_costs;
  std::uint64_t sim_seed = 0;
  sim->add_option("--policy", sim_policy, "policy JSON file or 'naive'");
  sim->add_option("--calendar", sim_calendar, "calendar JSON file")->required();
  sim->add_option("--config", sim_config, "simulation config JSON file");
  sim->add_option("--seed", sim_seed, "master seed");
  sim->add_option("--trace", sim_trace, "per-event CSV output");
  sim->add_option("--costs", sim_costs, "per-year cost CSV output");

  // evaluate
  auto* eval = app.add_subcommand("evaluate", "Monte Carlo policy evaluation");
  std::string ev_policy = "naive", ev_calendar, ev_config, ev_out;
  long long ev_samples = 100000;
  std::uint64_t ev_seed = 0;
  int ev_workers = default_workers();
  eval->add_option("--policy", ev_policy, "policy JSON file or 'naive'");
  eval->add_option("--calendar", ev_calendar, "calendar JSON file")->required();
  eval->add_option("--config", ev_config, "simulation config JSON file");
  eval->add_option("--samples", ev_samples, "number of trajectories")->check(CLI::PositiveNumber);
  eval->add_option("--seed", ev_seed, "master seed");
  eval->add_option("--workers", ev_workers, "worker threads");
  eval->add_option("--out", ev_out, "summary CSV output");

  // optimize
  auto* opt = app.add_subcommand("optimize", "run MRAS or ASA");
  std::string opt_algo = "asa", opt_params, opt_calendar, opt_config, opt_out;
  int opt_capacity = 0, opt_iterations = -1, opt_workers = default_workers();
  int opt_checkpoint_every = 0;
  double opt_warm = 0.0;
  std::uint64_t opt_seed = 0;
  bool opt_no_timestamps = false;
  opt->add_option("--algo", opt_algo, "mras or asa")
      ->check(CLI::IsMember({"mras", "asa"}));
  opt->add_option("--params", opt_params, "optimizer parameter JSON file");
  opt->add_option("--calendar", opt_calendar, "calendar JSON file")->required();
  opt->add_option("--config", opt_config, "simulation config JSON file");
  opt->add_option("--capacity", opt_capacity, "override SRM capacity (4 or 8)")
      ->check(CLI::IsMember({0, 4, 8}));
  opt->add_option("--iterations", opt_iterations, "iteration count K");
  opt->add_option("--seed", opt_seed, "master seed");
  opt->add_option("--workers", opt_workers, "worker threads");
  opt->add_option("--out", opt_out, "output directory")->required();
  opt->add_option("--checkpoint-every", opt_checkpoint_every,
                  "write a tensor checkpoint every k iterations");
  opt->add_option("--warm-start", opt_warm,
                  "probability mass on the naive action in P0 (default 0: uniform)");
  opt->add_flag("--no-timestamps", opt_no_timestamps,
                "write zero wall times for byte-reproducible outputs");

  // compare
  auto* cmp = app.add_subcommand("compare", "optimize and score both SRM capacities");
  std::string cmp_algo = "asa", cmp_params, cmp_calendar, cmp_config, cmp_out;
  int cmp_iterations = -1, cmp_workers = default_workers();
  long long cmp_samples = 10000;
  double cmp_warm = 0.5;
  std::uint64_t cmp_seed = 0;
  cmp->add_option("--algo", cmp_algo, "mras or asa")
      ->check(CLI::IsMember({"mras", "asa"}));
  cmp->add_option("--params", cmp_params, "optimizer parameter JSON file");
  cmp->add_option("--calendar", cmp_calendar, "calendar JSON file")->required();
  cmp->add_option("--config", cmp_config, "simulation config JSON file");
  cmp->add_option("--iterations", cmp_iterations, "iteration count K");
  cmp->add_option("--samples", cmp_samples, "final evaluation trajectories");
  cmp->add_option("--seed", cmp_seed, "master seed");
  cmp->add_option("--workers", cmp_workers, "worker threads");
  cmp->add_option("--warm-mass", cmp_warm, "naive-action mass in P0");
  cmp->add_option("--out", cmp_out, "output directory")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) return run_calendar_gen(gen_horizon, gen_seed, gen_out);
    if (check->parsed()) return run_calendar_check(check_file);

    if (sim->parsed()) {
      Calendar calendar = load_calendar(sim_calendar);
      SimConfig cfg = load_config_or_default(sim_config);
      ActionGrid grid = ActionGrid::full();
      PolicyMatrix policy = load_policy_or_naive(sim_policy, calendar, cfg, grid);

      Simulator instrumented(calendar, cfg);
      std::optional<TraceSink> trace;
      if (!sim_trace.empty()) {
        trace.emplace(sim_trace);
        instrumented.on_event = [&](const SimState& st, EventKind k) {
          (*trace)(st, k);
        };
      }
      RngStream rng(sim_seed, {stream_tag::trajectory, 0, 0});
      HorizonResult result =
          simulate_horizon(policy, calendar, cfg, grid, rng, &instrumented);
      if (!sim_costs.empty()) write_text_file(sim_costs, per_year_csv(result.per_year));
      std::cout << "total cost: " << fmt_num(result.total_cost) << '\n';
      const SimState& st = instrumented.state();
      std::cout << "launches performed: " << st.launches_performed << " of "
                << instrumented.total_scheduled() << '\n';
      return 0;
    }

    if (eval->parsed()) {
      Calendar calendar = load_calendar(ev_calendar);
      SimConfig cfg = load_config_or_default(ev_config);
      ActionGrid grid = ActionGrid::full();
      PolicyMatrix policy = load_policy_or_naive(ev_policy, calendar, cfg, grid);
      ThreadPool pool(ev_workers);
      EvalSummary s = monte_carlo_eval_summary(policy, ev_samples, calendar, cfg,
                                               grid, ev_seed, 0, &pool);
      std::cout << "mean cost: " << fmt_num(s.mean) << '\n'
                << "95% CI:    [" << fmt_num(s.ci95_low) << ", "
                << fmt_num(s.ci95_high) << "]\n"
                << "stddev:    " << fmt_num(s.stddev) << "  (" << s.samples
                << " trajectories)\n";
      if (!ev_out.empty()) {
        write_text_file(ev_out,
                        "mean,stddev,stderr,ci95_low,ci95_high,samples\n" +
                            fmt_num(s.mean) + ',' + fmt_num(s.stddev) + ',' +
                            fmt_num(s.stderr_mean) + ',' + fmt_num(s.ci95_low) +
                            ',' + fmt_num(s.ci95_high) + ',' +
                            std::to_string(s.samples) + '\n');
      }
      return 0;
    }

    if (opt->parsed()) {
      Calendar calendar = load_calendar(opt_calendar);
      SimConfig cfg = load_config_or_default(opt_config);
      if (opt_capacity != 0) cfg.srm_capacity = opt_capacity;
      validate_config(cfg);
      ActionGrid grid = ActionGrid::full();
      StateSpace space = StateSpace::for_config(cfg);
      fs::create_directories(opt_out);

      ProbTensor P0 = warm_start_tensor(calendar, space, grid, opt_warm);
      ThreadPool pool(opt_workers);
      SimulationEvaluator evaluator(calendar, cfg, grid, &pool);

      OptimHooks hooks;
      hooks.record_wall_time = !opt_no_timestamps;
      hooks.checkpoint_every = opt_checkpoint_every;
      if (opt_checkpoint_every > 0) {
        hooks.checkpoint = [&](int k, const ProbTensor& P) {
          char name[32];
          std::snprintf(name, sizeof name, "tensor_k%05d.lipt", k + 1);
          P.save(fs::path(opt_out) / name);
        };
      }
      hooks.on_iteration = [&](const IterationRecord& r) {
        std::cout << "k=" << r.k << " best=" << fmt_num(r.best_cost)
                  << " mean=" << fmt_num(r.mean_cost) << " N=" << r.policies
                  << " M=" << r.trajectories << '\n';
      };

      OptimResult result;
      if (opt_algo == "mras") {
        MrasParams p = mras_params_from_file(opt_params, opt_iterations);
        result = mras_run(p, P0, evaluator, opt_seed, &pool, hooks);
      } else {
        AsaParams p = asa_params_from_file(opt_params, opt_iterations);
        result = asa_run(p, P0, evaluator, opt_seed, &pool, hooks);
      }

      result.tensor.save(fs::path(opt_out) / "tensor.lipt");
      save_policy(extract_deterministic_policy(result.tensor), cfg.srm_capacity,
                  fs::path(opt_out) / "policy.json");
      write_text_file(fs::path(opt_out) / "history.csv", history_csv(result.history));
      if (!result.history.empty())
        std::cout << "best sampled cost: " << fmt_num(result.best_cost) << '\n';
      std::cout << "wrote " << opt_out << "/tensor.lipt, policy.json, history.csv\n";
      return 0;
    }

    if (cmp->parsed()) {
      Calendar calendar = load_calendar(cmp_calendar);
      SimConfig cfg = load_config_or_default(cmp_config);
      ThreadPool pool(cmp_workers);
      MrasParams mp = mras_params_from_file(cmp_params, cmp_iterations);
      AsaParams ap = asa_params_from_file(cmp_params, cmp_iterations);
      Algo algo = cmp_algo == "mras" ? Algo::mras : Algo::asa;
      CompareReport rep =
          compare_capacities(algo, mp, ap, calendar, cfg, cmp_samples, cmp_seed,
                             &pool, cmp_warm);
      fs::create_directories(cmp_out);
      write_text_file(fs::path(cmp_out) / "compare.csv", compare_report_csv(rep));
      std::cout << compare_report_text(rep);
      std::cout << "wrote " << cmp_out << "/compare.csv\n";
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
