#include "launchline/mdp.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace launchline {

ActionGrid ActionGrid::full() {
  ActionGrid g;
  for (int r = 24; r <= 48; r += 4) g.imc_rates.push_back(r);
  for (int r = 6; r <= 12; ++r) g.llpm_rates.push_back(r);
  for (int r = 6; r <= 12; ++r) g.ulpm_rates.push_back(r);
  return g;
}

ActionGrid ActionGrid::restricted(int lo_launchers, int hi_launchers) {
  if (lo_launchers < 6 || hi_launchers > 12 || lo_launchers > hi_launchers)
    throw std::invalid_argument("restricted grid bounds must lie in [6, 12]");
  ActionGrid g;
  for (int n = lo_launchers; n <= hi_launchers; ++n) {
    g.imc_rates.push_back(4 * n);
    g.llpm_rates.push_back(n);
    g.ulpm_rates.push_back(n);
  }
  return g;
}

RatesDecision ActionGrid::decode(int action) const {
  if (action < 1 || action > action_count())
    throw std::out_of_range("action number outside [1, " +
                            std::to_string(action_count()) + "]");
  int a = action - 1;
  int n_ulpm = static_cast<int>(ulpm_rates.size());
  int n_llpm = static_cast<int>(llpm_rates.size());
  int imc_ix = a / (n_llpm * n_ulpm);
  int llpm_ix = (a / n_ulpm) % n_llpm;
  int ulpm_ix = a % n_ulpm;
  return {imc_rates[imc_ix], llpm_rates[llpm_ix], ulpm_rates[ulpm_ix]};
}

int ActionGrid::encode(const RatesDecision& d) const {
  auto index_of = [](const std::vector<int>& v, int x) {
    auto it = std::find(v.begin(), v.end(), x);
    if (it == v.end())
      throw std::invalid_argument("rate " + std::to_string(x) +
                                  " is not on the action grid");
    return static_cast<int>(it - v.begin());
  };
  int imc_ix = index_of(imc_rates, d.imc_rate);
  int llpm_ix = index_of(llpm_rates, d.llpm_rate);
  int ulpm_ix = index_of(ulpm_rates, d.ulpm_rate);
  return (imc_ix * static_cast<int>(llpm_rates.size()) + llpm_ix) *
             static_cast<int>(ulpm_rates.size()) +
         ulpm_ix + 1;
}

bool ActionGrid::contains(const RatesDecision& d) const {
  auto has = [](const std::vector<int>& v, int x) {
    return std::find(v.begin(), v.end(), x) != v.end();
  };
  return has(imc_rates, d.imc_rate) && has(llpm_rates, d.llpm_rate) &&
         has(ulpm_rates, d.ulpm_rate);
}

RatesDecision ActionGrid::clamp(int imc_target, int llpm_target,
                                int ulpm_target) const {
  auto snap = [](const std::vector<int>& v, int target) {
    int best = v.front();
    for (int x : v)
      if (x <= target) best = x;
    return best;
  };
  return {snap(imc_rates, imc_target), snap(llpm_rates, llpm_target),
          snap(ulpm_rates, ulpm_target)};
}

StateSpace StateSpace::for_config(const SimConfig& cfg) {
  StateSpace s;
  s.srm_codes = cfg.srm_capacity == 8 ? 3 : 2;
  return s;
}

int StateSpace::sub_stock_code(int stock) {
  if (stock < 0 || stock > 4)
    throw std::out_of_range("subassembly stock outside [0, 4]");
  if (stock == 0) return 1;
  if (stock <= 3) return 2;
  return 3;
}

int StateSpace::srm_stock_code(int stock) const {
  int capacity = srm_codes == 3 ? 8 : 4;
  if (stock < 0 || stock > capacity)
    throw std::out_of_range("SRM stock outside [0, capacity]");
  if (stock <= 3) return 1;
  if (stock <= 7) return 2;
  return 3;
}

int StateSpace::due_class(int launches_due) {
  if (launches_due < 0) throw std::out_of_range("launches_due negative");
  return std::min(launches_due, 12);
}

int StateSpace::aggregate(const ObservedState& obs, const SimConfig& cfg) const {
  if (obs.cc_waiting < 0 || obs.cc_waiting >= kCcValues)
    throw std::out_of_range("cc_waiting outside [0, 2]");
  if (obs.srm_stock > cfg.srm_capacity)
    throw std::out_of_range("SRM stock above capacity");
  int idx = sub_stock_code(obs.imc_stock) - 1;
  idx = idx * kSubCodes + (sub_stock_code(obs.llpm_stock) - 1);
  idx = idx * kSubCodes + (sub_stock_code(obs.ulpm_stock) - 1);
  idx = idx * srm_codes + (srm_stock_code(obs.srm_stock) - 1);
  idx = idx * kCcValues + obs.cc_waiting;
  idx = idx * kDueClasses + due_class(obs.launches_due);
  return idx + 1;
}

PolicyMatrix::PolicyMatrix(int state_count, int horizon, int initial_action)
    : states_(state_count),
      horizon_(horizon),
      entries_(static_cast<std::size_t>(state_count) * horizon, initial_action) {}

ProbTensor::ProbTensor(int state_count, int action_count, int horizon,
                       double fill)
    : S_(state_count),
      A_(action_count),
      T_(horizon),
      data_(static_cast<std::size_t>(state_count) * action_count * horizon,
            fill) {}

ProbTensor ProbTensor::uniform(int state_count, int action_count, int horizon) {
  return ProbTensor(state_count, action_count, horizon, 1.0 / action_count);
}

bool ProbTensor::rows_normalized(double tol) const {
  for (int t = 0; t < T_; ++t) {
    for (int i = 0; i < S_; ++i) {
      auto r = row(i, t);
      double sum = std::accumulate(r.begin(), r.end(), 0.0);
      if (std::abs(sum - 1.0) > tol) return false;
      for (double p : r)
        if (p < 0.0 || std::isnan(p)) return false;
    }
  }
  return true;
}

double ProbTensor::min_entry() const {
  double m = std::numeric_limits<double>::infinity();
  for (double p : data_) m = std::min(m, p);
  return m;
}

namespace {

constexpr char kTensorMagic[4] = {'L', 'I', 'P', 'T'};
constexpr std::uint32_t kTensorVersion = 1;

void put_u32(std::ostream& out, std::uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v),
                        static_cast<unsigned char>(v >> 8),
                        static_cast<unsigned char>(v >> 16),
                        static_cast<unsigned char>(v >> 24)};
  out.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t get_u32(std::istream& in) {
  unsigned char b[4];
  in.read(reinterpret_cast<char*>(b), 4);
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) |
         (static_cast<std::uint32_t>(b[3]) << 24);
}

}  // namespace

void ProbTensor::save(const std::filesystem::path& file) const {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write tensor file: " + file.string());
  out.write(kTensorMagic, 4);
  put_u32(out, kTensorVersion);
  put_u32(out, static_cast<std::uint32_t>(S_));
  put_u32(out, static_cast<std::uint32_t>(A_));
  put_u32(out, static_cast<std::uint32_t>(T_));
  if constexpr (std::endian::native == std::endian::little) {
    out.write(reinterpret_cast<const char*>(data_.data()),
              static_cast<std::streamsize>(data_.size() * sizeof(double)));
  } else {
    for (double d : data_) {
      auto bits = std::bit_cast<std::uint64_t>(d);
      unsigned char b[8];
      for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(bits >> (8 * i));
      out.write(reinterpret_cast<const char*>(b), 8);
    }
  }
  if (!out) throw std::runtime_error("short write to tensor file: " + file.string());
}

ProbTensor ProbTensor::load(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read tensor file: " + file.string());
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kTensorMagic, 4) != 0)
    throw std::runtime_error("not a probability tensor file: " + file.string());
  std::uint32_t version = get_u32(in);
  if (version != kTensorVersion)
    throw std::runtime_error("unsupported tensor file version " +
                             std::to_string(version));
  std::uint32_t S = get_u32(in), A = get_u32(in), T = get_u32(in);
  if (!in) throw std::runtime_error("truncated tensor header: " + file.string());
  ProbTensor P(static_cast<int>(S), static_cast<int>(A), static_cast<int>(T), 0.0);
  if constexpr (std::endian::native == std::endian::little) {
    in.read(reinterpret_cast<char*>(P.data_.data()),
            static_cast<std::streamsize>(P.data_.size() * sizeof(double)));
  } else {
    for (double& d : P.data_) {
      unsigned char b[8];
      in.read(reinterpret_cast<char*>(b), 8);
      std::uint64_t bits = 0;
      for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(b[i]) << (8 * i);
      d = std::bit_cast<double>(bits);
    }
  }
  if (!in) throw std::runtime_error("truncated tensor payload: " + file.string());
  return P;
}

int draw_from_row(std::span<const double> row, double u) {
  double cum = 0.0;
  int last_positive = 0;
  for (std::size_t j = 0; j < row.size(); ++j) {
    if (row[j] > 0.0) last_positive = static_cast<int>(j) + 1;
    cum += row[j];
    if (u < cum) return static_cast<int>(j) + 1;
  }
  // u can only run past the end by rounding slack; a short sum means the
  // row was never normalized.
  if (cum < 1.0 - 1e-6 || last_positive == 0)
    throw std::invalid_argument("draw_from_row: row is not normalized");
  return last_positive;
}

PolicyMatrix draw_policy(const ProbTensor& P, RngStream& rng) {
  PolicyMatrix pi(P.states(), P.horizon());
  for (int t = 0; t < P.horizon(); ++t)
    for (int i = 0; i < P.states(); ++i)
      pi.at(i, t) = draw_from_row(P.row(i, t), rng.uniform01());
  return pi;
}

LogWeight log_f(const PolicyMatrix& pi, const ProbTensor& P) {
  if (pi.states() != P.states() || pi.horizon() != P.horizon())
    throw std::invalid_argument("log_f: policy and tensor dimensions differ");
  double sum = 0.0;
  for (int t = 0; t < P.horizon(); ++t) {
    for (int i = 0; i < P.states(); ++i) {
      double p = P.at(i, pi.at(i, t) - 1, t);
      if (p <= 0.0) return LogWeight::zero();
      sum += std::log(p);
    }
  }
  return LogWeight::from_log(sum);
}

LogWeight log_f_mix(const PolicyMatrix& pi, const ProbTensor& P,
                    const ProbTensor& P0, double lambda) {
  if (lambda < 0.0 || lambda > 1.0)
    throw std::invalid_argument("log_f_mix: lambda outside [0, 1]");
  if (lambda == 0.0) return log_f(pi, P);
  if (lambda == 1.0) return log_f(pi, P0);
  LogWeight terms[2] = {
      LogWeight::from_linear(1.0 - lambda) * log_f(pi, P),
      LogWeight::from_linear(lambda) * log_f(pi, P0),
  };
  return lw_sum(terms);
}

RatesDecision naive_rates_for_count(int launches, const ActionGrid& grid) {
  return grid.clamp(4 * launches, launches, launches);
}

PolicyMatrix naive_policy(const Calendar& calendar, const StateSpace& space,
                          const ActionGrid& grid) {
  PolicyMatrix pi(space.state_count(), calendar.horizon_years);
  for (int t = 0; t < calendar.horizon_years; ++t) {
    int action = grid.encode(naive_rates_for_count(calendar.years[t].count, grid));
    for (int i = 0; i < space.state_count(); ++i) pi.at(i, t) = action;
  }
  return pi;
}

PolicyMatrix extract_deterministic_policy(const ProbTensor& P) {
  PolicyMatrix pi(P.states(), P.horizon());
  for (int t = 0; t < P.horizon(); ++t) {
    for (int i = 0; i < P.states(); ++i) {
      auto row = P.row(i, t);
      int best = 0;
      for (std::size_t j = 1; j < row.size(); ++j)
        if (row[j] > row[best]) best = static_cast<int>(j);
      pi.at(i, t) = best + 1;
    }
  }
  return pi;
}

ProbTensor warm_start_tensor(const Calendar& calendar, const StateSpace& space,
                             const ActionGrid& grid, double mass) {
  if (mass < 0.0 || mass >= 1.0)
    throw std::invalid_argument("warm start mass outside [0, 1)");
  int A = grid.action_count();
  ProbTensor P(space.state_count(), A, calendar.horizon_years,
               (1.0 - mass) / A);
  if (mass > 0.0) {
    for (int t = 0; t < calendar.horizon_years; ++t) {
      int action =
          grid.encode(naive_rates_for_count(calendar.years[t].count, grid));
      for (int i = 0; i < space.state_count(); ++i)
        P.row(i, t)[action - 1] += mass;
    }
  }
  return P;
}

std::string policy_to_json(const PolicyMatrix& pi, int srm_capacity) {
  nlohmann::json j;
  j["srm_capacity"] = srm_capacity;
  j["horizon"] = pi.horizon();
  j["state_count"] = pi.states();
  j["encoding_version"] = 1;
  auto matrix = nlohmann::json::array();
  for (int i = 0; i < pi.states(); ++i) {
    auto row = nlohmann::json::array();
    for (int t = 0; t < pi.horizon(); ++t) row.push_back(pi.at(i, t));
    matrix.push_back(std::move(row));
  }
  j["matrix"] = std::move(matrix);
  return j.dump() + "\n";
}

PolicyMatrix policy_from_json(const std::string& text, int* srm_capacity) {
  nlohmann::json j = nlohmann::json::parse(text);
  int S = j.at("state_count").get<int>();
  int T = j.at("horizon").get<int>();
  if (j.at("encoding_version").get<int>() != 1)
    throw std::runtime_error("unsupported policy encoding version");
  if (srm_capacity) *srm_capacity = j.at("srm_capacity").get<int>();
  const auto& matrix = j.at("matrix");
  if (static_cast<int>(matrix.size()) != S)
    throw std::runtime_error("policy matrix row count differs from state_count");
  PolicyMatrix pi(S, T);
  for (int i = 0; i < S; ++i) {
    const auto& row = matrix[i];
    if (static_cast<int>(row.size()) != T)
      throw std::runtime_error("policy matrix row length differs from horizon");
    for (int t = 0; t < T; ++t) pi.at(i, t) = row[t].get<int>();
  }
  return pi;
}

PolicyMatrix load_policy(const std::filesystem::path& file, int* srm_capacity) {
  std::ifstream in(file);
  if (!in) throw std::runtime_error("cannot read policy file: " + file.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return policy_from_json(buf.str(), srm_capacity);
}

void save_policy(const PolicyMatrix& pi, int srm_capacity,
                 const std::filesystem::path& file) {
  std::ofstream out(file);
  if (!out) throw std::runtime_error("cannot write policy file: " + file.string());
  out << policy_to_json(pi, srm_capacity);
}

HorizonResult simulate_horizon(const PolicyMatrix& policy,
                               const Calendar& calendar, const SimConfig& cfg,
                               const ActionGrid& grid, RngStream& rng,
                               Simulator* instrumented) {
  StateSpace space = StateSpace::for_config(cfg);
  if (policy.states() != space.state_count() ||
      policy.horizon() != calendar.horizon_years)
    throw std::invalid_argument(
        "simulate_horizon: policy is " + std::to_string(policy.states()) + "x" +
        std::to_string(policy.horizon()) + ", problem needs " +
        std::to_string(space.state_count()) + "x" +
        std::to_string(calendar.horizon_years));
  Simulator local(calendar, cfg);
  Simulator& sim = instrumented ? *instrumented : local;

  HorizonResult result;
  result.per_year.reserve(calendar.horizon_years);
  for (int y = 0; y < calendar.horizon_years; ++y) {
    int state_ix = space.aggregate(sim.observe(), cfg);
    RatesDecision d = grid.decode(policy.at(state_ix - 1, y));
    result.per_year.push_back(sim.simulate_year(d, rng));
  }
  long missed = sim.total_scheduled() - sim.state().launches_performed;
  result.per_year.back().penalty =
      cfg.missed_launch_penalty * static_cast<double>(missed);
  for (const CostBreakdown& c : result.per_year) result.total_cost += c.total();
  return result;
}

}  // namespace launchline
