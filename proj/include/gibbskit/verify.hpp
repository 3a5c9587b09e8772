#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "gibbskit/potential.hpp"
#include "gibbskit/specification.hpp"
#include "gibbskit/transfer.hpp"

namespace gibbskit {

// ---------------------------------------------------------------------------
// Bowen-Gibbs ratios

/// How a finite pattern sigma on [0, n-1] is extended to a configuration
/// before evaluating S_n phi.
enum class Extension {
  AFill,     ///< background letter on both sides
  Periodic,  ///< sigma repeated in both directions
};

struct BowenRow {
  Site n = 0;
  double min_ratio = 0.0;
  double max_ratio = 0.0;
  double C = 1.0;
};

struct BowenReport {
  std::vector<BowenRow> rows;
  double slope = 0.0;
  Site fit_from = 0;
};

/// mu([sigma]) / exp(S_n phi(sigma^ext) - n P) over all length-n cylinders.
/// The slope of log C_n is fitted over n >= fit_from, by default the last
/// ceil(n_max/2) values of n.
inline BowenReport bowen_report(const MarkovMeasure& mu, const Potential& phi, double P, Site n_max,
                                Extension ext = Extension::AFill, std::optional<Site> fit_from = std::nullopt,
                                double tol = kDefaultTol, const Budget& budget = {}) {
  require(mu.alphabet.size() == phi.alphabet().size(), ErrorCode::AlphabetMismatch,
          "measure and potential alphabets differ");
  const Site n_min = std::max<Site>(mu.order, 1);
  require(n_max >= n_min, ErrorCode::InvalidArgument, "n_max below the Markov order");
  pattern_count(mu.alphabet.size(), n_max, budget);
  const std::size_t k = mu.alphabet.size();
  const Letter bg = phi.alphabet().background();
  BowenReport out;
  for (Site n = n_min; n <= n_max; ++n) {
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    Frame f(Config::constant(bg), Window(0, n - 1));
    for_each_word(
        k, static_cast<std::size_t>(n),
        [&](std::span<const Letter> w) {
          double s;
          if (ext == Extension::AFill) {
            f.set(Window(0, n - 1), w);
            s = birkhoff_sum(phi, f, n, tol).value;
          } else {
            Config c(Background(std::vector<Letter>(w.begin(), w.end())));
            s = birkhoff_sum(phi, c, n, tol).value;
          }
          const double lr = std::log(cylinder_prob(mu, w)) - (s - static_cast<double>(n) * P);
          lo = std::min(lo, lr);
          hi = std::max(hi, lr);
        },
        budget);
    BowenRow row{n, std::exp(lo), std::exp(hi), std::exp(std::max(hi, -lo))};
    row.C = std::max(row.C, 1.0);
    out.rows.push_back(row);
  }
  out.fit_from = fit_from.value_or(n_max - (n_max + 1) / 2 + 1);
  std::vector<double> x, y;
  for (const auto& r : out.rows)
    if (r.n >= out.fit_from) {
      x.push_back(static_cast<double>(r.n));
      y.push_back(std::log(r.C));
    }
  out.slope = x.size() >= 2 ? least_squares_slope(x, y) : 0.0;
  return out;
}

// ---------------------------------------------------------------------------
// Weak cohomology

struct CohomologyReport {
  std::vector<double> deltas;
  double expected = 0.0;        ///< -phi(a-constant configuration)
  double spread = 0.0;          ///< max - min of the deltas
  double max_deviation = 0.0;   ///< max |delta - expected|
  double truncation_bound = 0;  ///< rigorous cylinder-truncation bound (0 when exact)
  std::string method;
  bool passed = false;
};

namespace detail {

/// Values of psi on every a-filled word of length L, lexicographic.
inline std::vector<double> word_values(const Potential& psi, Site L, double tol, const Budget& budget) {
  std::vector<double> out;
  out.reserve(pattern_count(psi.alphabet().size(), L, budget));
  Frame f(Config::constant(psi.alphabet().background()), Window(0, L - 1));
  for_each_word(
      psi.alphabet().size(), static_cast<std::size_t>(L),
      [&](std::span<const Letter> w) {
        f.set(Window(0, L - 1), w);
        out.push_back(psi.eval_at(f, 0, tol).value);
      },
      budget);
  return out;
}

inline double word_expectation(const MarkovMeasure& tau, const std::vector<double>& values, Site L) {
  NeumaierSum s;
  std::size_t idx = 0;
  for_each_word(tau.alphabet.size(), static_cast<std::size_t>(L),
                [&](std::span<const Letter> w) { s.add(cylinder_prob(tau, w) * values[idx++]); },
                Budget{~std::uint64_t{0}});
  return s.value();
}

}  // namespace detail

/// Delta(tau) = int phi_gamma dtau - int phi dtau with gamma built from the
/// cocycle of phi. Finite range uses exact word sums; long range expands in
/// cylinders of length L and L2 < L and, for Dyson-type decay, extrapolates
/// with the tail profile sum_{k>=L} k^-alpha.
inline CohomologyReport weak_cohomology_check(const Potential& phi, const std::vector<MarkovMeasure>& taus,
                                              double tol, const Budget& budget = {}, Site L = 20, Site L2 = 16) {
  require(!taus.empty(), ErrorCode::InvalidArgument, "need at least one test measure");
  const Specification g = Specification::from_cocycle(phi);
  const Potential psi = phi_from_spec(g);
  CohomologyReport out;
  out.expected = -eval(phi, Config::constant(phi.alphabet().background())).value;
  if (phi.range()) {
    out.method = "exact";
    const Potential psi_t = tabulate(psi, budget);
    for (const auto& tau : taus) out.deltas.push_back(expectation(tau, psi_t, budget) - expectation(tau, phi, budget));
  } else {
    require(L2 >= 1 && L2 < L, ErrorCode::InvalidArgument, "need 1 <= L2 < L");
    const double eval_tol = 1e-12;
    const auto pl = detail::word_values(psi, L, eval_tol, budget);
    const auto fl = detail::word_values(phi, L, eval_tol, budget);
    const auto pl2 = detail::word_values(psi, L2, eval_tol, budget);
    const auto fl2 = detail::word_values(phi, L2, eval_tol, budget);
    std::optional<double> alpha;
    if (auto* d = phi.dyson()) alpha = d->alpha;
    out.truncation_bound = variation_estimate(psi, L) + variation_estimate(phi, L);
    out.method = alpha ? "cylinder+extrapolation" : "cylinder";
    for (const auto& tau : taus) {
      const double dl = detail::word_expectation(tau, pl, L) - detail::word_expectation(tau, fl, L);
      const double dl2 = detail::word_expectation(tau, pl2, L2) - detail::word_expectation(tau, fl2, L2);
      if (alpha) {
        const double t = power_tail_sum(*alpha, static_cast<double>(L)).value;
        const double t2 = power_tail_sum(*alpha, static_cast<double>(L2)).value;
        out.deltas.push_back((dl * t2 - dl2 * t) / (t2 - t));
      } else {
        out.deltas.push_back(dl);
      }
    }
  }
  const auto [lo, hi] = std::minmax_element(out.deltas.begin(), out.deltas.end());
  out.spread = *hi - *lo;
  for (double d : out.deltas) out.max_deviation = std::max(out.max_deviation, std::abs(d - out.expected));
  out.passed = out.spread <= tol && out.max_deviation <= tol;
  return out;
}

// ---------------------------------------------------------------------------
// Relative entropy

struct EntropyRow {
  Site n = 0;
  double H = 0.0;
  double H_per_n = 0.0;
  double diff = 0.0;  ///< H_n - H_{n-1}; NaN on the first row
};

struct EntropyCurve {
  std::vector<EntropyRow> rows;
  /// P - h(tau) - int phi dtau.
  double predicted = 0.0;
};

/// H_n(tau|mu) summed over cylinders of length n.
inline EntropyCurve relative_entropy_curve(const MarkovMeasure& tau, const MarkovMeasure& mu, const Potential& phi,
                                           double P, Site n_max, const Budget& budget = {}) {
  require(tau.alphabet.size() == mu.alphabet.size(), ErrorCode::AlphabetMismatch, "measure alphabets differ");
  const Site n_min = std::max(tau.order, mu.order);
  require(n_max >= n_min, ErrorCode::InvalidArgument, "n_max below the Markov orders");
  pattern_count(tau.alphabet.size(), n_max, budget);
  EntropyCurve out;
  out.predicted = P - entropy(tau) - expectation(tau, phi, budget);
  double prev = std::numeric_limits<double>::quiet_NaN();
  for (Site n = n_min; n <= n_max; ++n) {
    NeumaierSum s;
    for_each_word(
        tau.alphabet.size(), static_cast<std::size_t>(n),
        [&](std::span<const Letter> w) {
          const double t = cylinder_prob(tau, w);
          const double m = cylinder_prob(mu, w);
          if (t == 0.0) return;
          require(m > 0.0, ErrorCode::NonAbsolutelyContinuous, "tau charges a mu-null cylinder");
          s.add(t * std::log(t / m));
        },
        budget);
    EntropyRow row{n, s.value(), s.value() / static_cast<double>(n), s.value() - prev};
    out.rows.push_back(row);
    prev = row.H;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Round trip

struct RoundtripReport {
  double residual = 0.0;
  double error_bound = 0.0;
  std::size_t comparisons = 0;
};

/// max |gamma'^_L(p|w) - gamma_L(p|w)| where gamma' is rebuilt from the cocycle
/// of phi_gamma. L ranges over sub-windows of lambda_max; w over every overlay
/// on [-radius, radius] outside L, on each constant background.
inline RoundtripReport roundtrip_residual(const Specification& g, Window lambda_max, Site overlay_radius,
                                          double tol = kDefaultTol, const Budget& budget = {}) {
  Potential psi = phi_from_spec(g);
  if (psi.range()) psi = tabulate(psi, budget);
  const Specification back = Specification::from_cocycle(psi);
  const std::size_t k = g.alphabet().size();
  const Window ring = centered_window(overlay_radius);
  RoundtripReport out;
  for (Site lo = lambda_max.lo; lo <= lambda_max.hi; ++lo)
    for (Site hi = lo; hi <= lambda_max.hi; ++hi) {
      const Window lam(lo, hi);
      std::vector<Site> free;
      for (Site i = ring.lo; i <= ring.hi; ++i)
        if (!lam.contains(i)) free.push_back(i);
      for (Letter bg = 0; bg < k; ++bg)
        for_each_word(
            k, free.size(),
            [&](std::span<const Letter> w) {
              Config c = Config::constant(bg);
              for (std::size_t t = 0; t < free.size(); ++t) c = c.with(free[t], w[t]);
              KernelTable a = kernel_table(g, lam, c, tol, budget);
              KernelTable b = kernel_table(back, lam, c, tol, budget);
              for (std::size_t i = 0; i < a.log_prob.size(); ++i) {
                out.residual = std::max(out.residual, std::abs(std::exp(a.log_prob[i]) - std::exp(b.log_prob[i])));
                out.error_bound = std::max(out.error_bound, a.error[i] + b.error[i]);
                ++out.comparisons;
              }
            },
            budget);
    }
  return out;
}

}  // namespace gibbskit
