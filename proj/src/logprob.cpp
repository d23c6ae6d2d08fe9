#include "launchline/logprob.hpp"

#include <algorithm>
#include <stdexcept>

namespace launchline {

LogWeight lw_sum(std::span<const LogWeight> values) {
  double max_log = -std::numeric_limits<double>::infinity();
  for (const LogWeight& v : values) max_log = std::max(max_log, v.log());
  if (std::isinf(max_log) && max_log < 0) return LogWeight::zero();

  double acc = 0.0;
  for (const LogWeight& v : values) {
    if (!v.is_zero()) acc += std::exp(v.log() - max_log);
  }
  return LogWeight::from_log(max_log + std::log(acc));
}

std::optional<std::vector<double>> try_normalize_weights(
    std::span<const LogWeight> values) {
  LogWeight total = lw_sum(values);
  if (total.is_zero()) return std::nullopt;

  std::vector<double> out(values.size());
  double linear_sum = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    out[i] = values[i].is_zero() ? 0.0 : std::exp(values[i].log() - total.log());
    linear_sum += out[i];
  }
  // The shift against lw_sum leaves rounding of the order ulp(|max log|) in
  // each exponent; a final linear pass pins the sum to 1 exactly.
  for (double& p : out) p /= linear_sum;
  return out;
}

std::vector<double> normalize_weights(std::span<const LogWeight> values) {
  auto out = try_normalize_weights(values);
  if (!out) throw std::domain_error("normalize_weights: all weights are zero");
  return std::move(*out);
}

}  // namespace launchline
