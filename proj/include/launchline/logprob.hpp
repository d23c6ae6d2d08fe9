#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <vector>

namespace launchline {

// Log-domain nonnegative real. Products of tens of thousands of
// probabilities, and Boltzmann factors like exp(-k * cost) with costs in the
// 1e7 range, are representable here where plain doubles underflow to zero.
// Exact zero is encoded as -infinity and every operation handles it.
class LogWeight {
 public:
  constexpr LogWeight() : log_(-std::numeric_limits<double>::infinity()) {}

  static constexpr LogWeight zero() { return LogWeight(); }
  static constexpr LogWeight one() { return from_log(0.0); }

  static constexpr LogWeight from_log(double log_value) {
    LogWeight w;
    w.log_ = log_value;
    return w;
  }

  // x must be >= 0; x == 0 maps to zero().
  static LogWeight from_linear(double x) { return from_log(std::log(x)); }

  double log() const { return log_; }
  double linear() const { return std::exp(log_); }
  bool is_zero() const { return std::isinf(log_) && log_ < 0; }

  friend LogWeight operator*(LogWeight a, LogWeight b) {
    // -inf + inf would be NaN; zero absorbs instead.
    if (a.is_zero() || b.is_zero()) return zero();
    return from_log(a.log_ + b.log_);
  }
  LogWeight& operator*=(LogWeight b) { return *this = *this * b; }

  friend LogWeight operator/(LogWeight a, LogWeight b) {
    if (a.is_zero()) return zero();
    return from_log(a.log_ - b.log_);
  }

  friend bool operator==(LogWeight a, LogWeight b) { return a.log_ == b.log_; }
  friend bool operator<(LogWeight a, LogWeight b) { return a.log_ < b.log_; }

 private:
  double log_;
};

inline LogWeight lw_mul(LogWeight a, LogWeight b) { return a * b; }

// log(sum exp(v_k)), max-shifted so the largest term maps to exponent zero.
LogWeight lw_sum(std::span<const LogWeight> values);

// exp(v_k - lw_sum(values)); outputs sum to 1. Returns nullopt when every
// input is zero (the caller decides what an all-zero weight vector means).
std::optional<std::vector<double>> try_normalize_weights(
    std::span<const LogWeight> values);

// As above but an all-zero input is an error.
std::vector<double> normalize_weights(std::span<const LogWeight> values);

}  // namespace launchline
