#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <span>
#include <vector>

#include "gibbskit/error.hpp"

namespace gibbskit {

/// Value with a nonnegative bound on its absolute error.
struct EvalResult {
  double value = 0.0;
  double error = 0.0;

  EvalResult& operator+=(const EvalResult& o) {
    value += o.value;
    error += o.error;
    return *this;
  }
  EvalResult& operator-=(const EvalResult& o) {
    value -= o.value;
    error += o.error;
    return *this;
  }
  friend EvalResult operator+(EvalResult a, const EvalResult& b) { return a += b; }
  friend EvalResult operator-(EvalResult a, const EvalResult& b) { return a -= b; }
  friend EvalResult operator*(double s, EvalResult a) {
    a.value *= s;
    a.error *= std::abs(s);
    return a;
  }
};

inline constexpr double kDefaultTol = 1e-10;

/// Compensated (Neumaier) accumulator. Pattern sums in this library use it so
/// that the result does not depend on the magnitude ordering of the terms.
class NeumaierSum {
 public:
  void add(double x) {
    double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x))
      comp_ += (sum_ - t) + x;
    else
      comp_ += (x - t) + sum_;
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

/// log(sum_i exp(x_i)), shifted by the max so nothing overflows.
inline double log_sum_exp(std::span<const double> xs) {
  if (xs.empty()) return -std::numeric_limits<double>::infinity();
  double m = *std::max_element(xs.begin(), xs.end());
  if (!std::isfinite(m)) return m;
  NeumaierSum s;
  for (double x : xs) s.add(std::exp(x - m));
  return m + std::log(s.value());
}

/// Hurwitz zeta  sum_{k>=0} (q+k)^{-s}  for s > 1, q > 0, by Euler-Maclaurin.
/// The error field bounds the first omitted correction term.
inline EvalResult hurwitz_zeta(double s, double q) {
  require(s > 1.0, ErrorCode::InvalidArgument, "hurwitz_zeta needs s > 1");
  require(q > 0.0, ErrorCode::InvalidArgument, "hurwitz_zeta needs q > 0");
  // B_{2j} / (2j)!
  static constexpr std::array<double, 9> kB = {
      1.0 / 6.0 / 2.0,
      -1.0 / 30.0 / 24.0,
      1.0 / 42.0 / 720.0,
      -1.0 / 30.0 / 40320.0,
      5.0 / 66.0 / 3628800.0,
      -691.0 / 2730.0 / 479001600.0,
      7.0 / 6.0 / 87178291200.0,
      -3617.0 / 510.0 / 20922789888000.0,
      43867.0 / 798.0 / 6402373705728000.0,
  };
  const double cutoff = 12.0 + s;
  NeumaierSum head;
  double x = q;
  while (x < cutoff) {
    head.add(std::pow(x, -s));
    x += 1.0;
  }
  const double xs = std::pow(x, -s);
  double total = head.value() + x * xs / (s - 1.0) + 0.5 * xs;
  // Corrections: B_{2j}/(2j)! * s(s+1)...(s+2j-2) * x^{-s-2j+1}
  double rising = s;
  double power = xs / x;
  double last = 0.0;
  for (std::size_t j = 0; j + 1 < kB.size(); ++j) {
    last = kB[j] * rising * power;
    total += last;
    rising *= (s + 2.0 * j + 1.0) * (s + 2.0 * j + 2.0);
    power /= x * x;
  }
  double next = std::abs(kB.back() * rising * power);
  double err = next + 4.0 * std::numeric_limits<double>::epsilon() * std::abs(total);
  return {total, err};
}

inline EvalResult riemann_zeta(double s) { return hurwitz_zeta(s, 1.0); }

/// Tail  sum_{k>=n} k^{-s}  (n >= 1).
inline EvalResult power_tail_sum(double s, double n) { return hurwitz_zeta(s, n); }

/// Ordinary least-squares slope of y against x.
inline double least_squares_slope(std::span<const double> x, std::span<const double> y) {
  require(x.size() == y.size() && x.size() >= 2, ErrorCode::InvalidArgument,
          "slope fit needs at least two points");
  double n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  return sxy / sxx;
}

/// Least-squares fit of y = c0 + c1/x; returns c0.
inline double fit_inverse_intercept(std::span<const double> x, std::span<const double> y) {
  std::vector<double> inv(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) inv[i] = 1.0 / x[i];
  double c1 = least_squares_slope(inv, y);
  double mi = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mi += inv[i];
    my += y[i];
  }
  return (my - c1 * mi) / static_cast<double>(x.size());
}

}  // namespace gibbskit
