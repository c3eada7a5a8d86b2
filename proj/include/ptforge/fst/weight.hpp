#pragma once

#include <cmath>
#include <limits>
#include <string>

#include "ptforge/error.hpp"

namespace ptforge::fst {

enum class Semiring { kLog, kTropical };

// A weight in negative-log-probability space. 0 is probability one,
// +infinity is probability zero. NaN is rejected at construction.
class Weight {
 public:
  constexpr Weight() = default;
  explicit Weight(double value) : value_(value) {
    if (std::isnan(value)) throw ContractError("Weight: NaN value");
  }

  static constexpr Weight One() { return Weight(Raw{}, 0.0); }
  static constexpr Weight Zero() {
    return Weight(Raw{}, std::numeric_limits<double>::infinity());
  }
  static Weight FromProb(double p) { return Weight(-std::log(p)); }

  constexpr double value() const { return value_; }
  bool IsZero() const { return value_ == std::numeric_limits<double>::infinity(); }
  bool IsOne() const { return value_ == 0.0; }
  double Prob() const { return std::exp(-value_); }

  friend bool operator==(Weight a, Weight b) { return a.value_ == b.value_; }
  friend bool operator!=(Weight a, Weight b) { return a.value_ != b.value_; }

 private:
  struct Raw {};
  constexpr Weight(Raw, double v) : value_(v) {}
  double value_ = 0.0;
};

// Semiring product; identical for log and tropical.
inline Weight Times(Weight a, Weight b) {
  if (a.IsZero() || b.IsZero()) return Weight::Zero();
  return Weight(a.value() + b.value());
}

inline Weight TropicalPlus(Weight a, Weight b) {
  return a.value() <= b.value() ? a : b;
}

// -log(exp(-a) + exp(-b)), stable form.
inline Weight LogPlus(Weight a, Weight b) {
  if (a.IsZero()) return b;
  if (b.IsZero()) return a;
  const double lo = std::min(a.value(), b.value());
  const double hi = std::max(a.value(), b.value());
  return Weight(lo - std::log1p(std::exp(lo - hi)));
}

inline Weight Plus(Weight a, Weight b, Semiring sr) {
  return sr == Semiring::kLog ? LogPlus(a, b) : TropicalPlus(a, b);
}

// Prints with 9 significant digits; +inf as "Infinity".
std::string FormatWeight(Weight w);
Weight ParseWeight(const std::string& text);

Semiring ParseSemiring(const std::string& name);
const char* SemiringName(Semiring sr);

}  // namespace ptforge::fst
