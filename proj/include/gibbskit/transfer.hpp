#pragma once

#include <cmath>
#include <vector>

#include "gibbskit/potential.hpp"
#include "gibbskit/specification.hpp"

namespace gibbskit {

/// Compact transfer matrix for a range-r potential: states are words of
/// length m = max(r-1, 1); matrix[u][x] = exp(phi(first r letters of u x)) and
/// u moves to the last m letters of u x.
struct TransferData {
  Site r = 1;
  Site m = 1;
  std::size_t k = 2;
  std::vector<std::vector<double>> matrix;  // states x letters
  double perron_value = 0.0;
  std::vector<double> left_vec;
  std::vector<double> right_vec;
  std::size_t iterations = 0;

  std::size_t states() const { return matrix.size(); }
  std::size_t next_state(std::size_t u, Letter x) const { return (u * k + x) % matrix.size(); }
};

namespace detail {

inline void perron_iterate(const TransferData& t, bool left, std::vector<double>& v, double& lambda,
                           std::size_t& iters) {
  const std::size_t n = t.states();
  v.assign(n, 1.0);
  constexpr double kTol = 1e-14;
  constexpr std::size_t kCap = 100000;
  std::vector<double> w(n);
  for (std::size_t it = 1; it <= kCap; ++it) {
    std::fill(w.begin(), w.end(), 0.0);
    for (std::size_t u = 0; u < n; ++u)
      for (Letter x = 0; x < t.k; ++x) {
        const std::size_t nx = t.next_state(u, x);
        if (left)
          w[nx] += v[u] * t.matrix[u][x];
        else
          w[u] += t.matrix[u][x] * v[nx];
      }
    const double norm = *std::max_element(w.begin(), w.end());
    double change = 0.0;
    for (std::size_t u = 0; u < n; ++u) {
      w[u] /= norm;
      change = std::max(change, std::abs(w[u] - v[u]));
    }
    v.swap(w);
    lambda = norm;
    if (change <= kTol) {
      iters = std::max(iters, it);
      return;
    }
  }
  fail(ErrorCode::NoConvergence, "power iteration did not converge within 1e5 iterations");
}

}  // namespace detail

inline TransferData build_transfer(const Potential& phi, const Budget& budget = {}) {
  auto r = phi.range();
  require(r.has_value(), ErrorCode::InvalidArgument, "transfer matrices need a finite-range potential");
  const auto table = range_table(phi, budget);
  TransferData t;
  t.r = *r;
  t.m = std::max<Site>(*r - 1, 1);
  t.k = phi.alphabet().size();
  const std::size_t n = pattern_count(t.k, t.m, budget);
  t.matrix.assign(n, std::vector<double>(t.k));
  for (std::size_t u = 0; u < n; ++u)
    for (Letter x = 0; x < t.k; ++x) {
      // Index of the first r letters of u x.
      const std::size_t idx = t.r == 1 ? u : u * t.k + x;
      t.matrix[u][x] = std::exp(table[idx]);
    }
  double lr = 0.0, ll = 0.0;
  detail::perron_iterate(t, false, t.right_vec, lr, t.iterations);
  detail::perron_iterate(t, true, t.left_vec, ll, t.iterations);
  t.perron_value = lr;
  double dot = 0.0;
  for (std::size_t u = 0; u < n; ++u) dot += t.left_vec[u] * t.right_vec[u];
  for (double& v : t.left_vec) v /= dot;
  return t;
}

/// ||M r - lambda r||_inf.
inline double perron_residual(const TransferData& t) {
  double worst = 0.0;
  for (std::size_t u = 0; u < t.states(); ++u) {
    double s = 0.0;
    for (Letter x = 0; x < t.k; ++x) s += t.matrix[u][x] * t.right_vec[t.next_state(u, x)];
    worst = std::max(worst, std::abs(s - t.perron_value * t.right_vec[u]));
  }
  return worst;
}

inline double pressure(const Potential& phi, const Budget& budget = {}) {
  return std::log(build_transfer(phi, budget).perron_value);
}

// ---------------------------------------------------------------------------
// Markov measures

/// Stationary Markov measure of order m on E^Z: states are words of length m,
/// P[u][x] is the probability that letter x follows the word u.
struct MarkovMeasure {
  Alphabet alphabet;
  Site order = 1;
  std::vector<double> pi;
  std::vector<std::vector<double>> P;

  std::size_t states() const { return P.size(); }
  std::size_t next_state(std::size_t u, Letter x) const { return (u * alphabet.size() + x) % P.size(); }

  void validate(double tol = 1e-9) const {
    const std::size_t k = alphabet.size();
    require(order >= 1, ErrorCode::InvalidArgument, "Markov order must be >= 1");
    const std::size_t n = pattern_count(k, order);
    require(pi.size() == n && P.size() == n, ErrorCode::InvalidArgument, "Markov measure needs |E|^order states");
    double total = 0.0;
    for (std::size_t u = 0; u < n; ++u) {
      require(P[u].size() == k, ErrorCode::InvalidArgument, "transition rows need one entry per symbol");
      double row = 0.0;
      for (double p : P[u]) {
        require(p > 0.0, ErrorCode::InvalidArgument, "transition entries must be positive");
        row += p;
      }
      require(std::abs(row - 1.0) <= tol, ErrorCode::InvalidArgument, "transition rows must sum to 1");
      require(pi[u] > 0.0, ErrorCode::InvalidArgument, "stationary entries must be positive");
      total += pi[u];
    }
    require(std::abs(total - 1.0) <= tol, ErrorCode::InvalidArgument, "stationary vector must sum to 1");
    std::vector<double> next(n, 0.0);
    for (std::size_t u = 0; u < n; ++u)
      for (Letter x = 0; x < k; ++x) next[next_state(u, x)] += pi[u] * P[u][x];
    for (std::size_t u = 0; u < n; ++u)
      require(std::abs(next[u] - pi[u]) <= tol, ErrorCode::InvalidArgument, "pi is not stationary under P");
  }

  /// Order-m chain with the stationary vector computed from P.
  static MarkovMeasure from_transitions(Alphabet a, Site order, std::vector<std::vector<double>> P) {
    MarkovMeasure mu{std::move(a), order, {}, std::move(P)};
    const std::size_t n = mu.P.size();
    require(n == pattern_count(mu.alphabet.size(), order), ErrorCode::InvalidArgument,
            "Markov measure needs |E|^order states");
    std::vector<double> v(n, 1.0 / static_cast<double>(n)), w(n);
    for (std::size_t it = 0;; ++it) {
      require(it < 1000000, ErrorCode::NoConvergence, "stationary vector did not converge");
      std::fill(w.begin(), w.end(), 0.0);
      for (std::size_t u = 0; u < n; ++u)
        for (Letter x = 0; x < mu.alphabet.size(); ++x) w[mu.next_state(u, x)] += v[u] * mu.P[u][x];
      double change = 0.0;
      for (std::size_t u = 0; u < n; ++u) change = std::max(change, std::abs(w[u] - v[u]));
      v.swap(w);
      if (change <= 1e-16) break;
    }
    double s = 0.0;
    for (double x : v) s += x;
    for (double& x : v) x /= s;
    mu.pi = std::move(v);
    mu.validate();
    return mu;
  }

  static MarkovMeasure bernoulli(Alphabet a, const std::vector<double>& p) {
    require(p.size() == a.size(), ErrorCode::InvalidArgument, "one probability per symbol");
    MarkovMeasure mu{std::move(a), 1, p, std::vector<std::vector<double>>(p.size(), p)};
    mu.validate();
    return mu;
  }

  static MarkovMeasure uniform(Alphabet a) {
    const std::size_t k = a.size();
    return bernoulli(std::move(a), std::vector<double>(k, 1.0 / static_cast<double>(k)));
  }
};

/// P[u][x] = M[u][x] r(next) / (lambda r(u)), pi proportional to l * r.
inline MarkovMeasure equilibrium_markov(const Potential& phi, const Budget& budget = {}) {
  TransferData t = build_transfer(phi, budget);
  MarkovMeasure mu{phi.alphabet(), t.m, {}, t.matrix};
  double s = 0.0;
  for (std::size_t u = 0; u < t.states(); ++u) {
    for (Letter x = 0; x < t.k; ++x)
      mu.P[u][x] = t.matrix[u][x] * t.right_vec[t.next_state(u, x)] / (t.perron_value * t.right_vec[u]);
    mu.pi.push_back(t.left_vec[u] * t.right_vec[u]);
    s += mu.pi.back();
  }
  for (double& p : mu.pi) p /= s;
  return mu;
}

inline double entropy(const MarkovMeasure& mu) {
  NeumaierSum s;
  for (std::size_t u = 0; u < mu.states(); ++u)
    for (double p : mu.P[u]) s.add(-mu.pi[u] * p * std::log(p));
  return s.value();
}

inline double cylinder_prob(const MarkovMeasure& mu, std::span<const Letter> w) {
  require(static_cast<Site>(w.size()) >= mu.order, ErrorCode::PatternTooShort,
          "cylinder shorter than the Markov order");
  const std::size_t m = static_cast<std::size_t>(mu.order);
  std::size_t u = word_index(w.subspan(0, m), mu.alphabet.size());
  double p = mu.pi[u];
  for (std::size_t i = m; i < w.size(); ++i) {
    p *= mu.P[u][w[i]];
    u = mu.next_state(u, w[i]);
  }
  return p;
}

inline double cylinder_prob(const MarkovMeasure& mu, const Pattern& p) { return cylinder_prob(mu, p.letters); }

/// Probabilities of all length-n cylinders, lexicographic order.
inline std::vector<double> cylinder_table(const MarkovMeasure& mu, Site n, const Budget& budget = {}) {
  std::vector<double> out;
  out.reserve(pattern_count(mu.alphabet.size(), n, budget));
  for_each_word(
      mu.alphabet.size(), static_cast<std::size_t>(n),
      [&](std::span<const Letter> w) { out.push_back(cylinder_prob(mu, w)); }, budget);
  return out;
}

/// Exact integral of a finite-range potential against a Markov measure.
inline double expectation(const MarkovMeasure& mu, const Potential& phi, const Budget& budget = {}) {
  require(mu.alphabet == phi.alphabet(), ErrorCode::AlphabetMismatch, "measure and potential alphabets differ");
  auto r = phi.range();
  require(r.has_value(), ErrorCode::InvalidArgument, "exact expectation needs a finite-range potential");
  const auto table = range_table(phi, budget);
  const Site len = std::max(*r, mu.order);
  const std::size_t k = mu.alphabet.size();
  NeumaierSum s;
  for_each_word(
      k, static_cast<std::size_t>(len),
      [&](std::span<const Letter> w) {
        s.add(cylinder_prob(mu, w) * table[word_index(w.subspan(0, static_cast<std::size_t>(*r)), k)]);
      },
      budget);
  return s.value();
}

// ---------------------------------------------------------------------------
// DLR residual

struct DlrReport {
  /// sup over events on the padded window of |int gamma_L(f|w) dmu - int f dmu|.
  double residual = 0.0;
  /// Same supremum restricted to single cylinders.
  double max_cylinder_gap = 0.0;
  /// residual at pad + 2, and its distance from `residual`.
  double residual_wider = 0.0;
  double pad_sensitivity = 0.0;
};

namespace detail {

inline std::pair<double, double> dlr_at(const MarkovMeasure& mu, const Specification& g, Window lambda, Site pad,
                                        double tol, const Budget& budget) {
  const std::size_t k = mu.alphabet.size();
  const Window W = lambda.padded(pad);
  pattern_count(k, W.size(), budget);
  const Letter bg = g.alphabet().background();
  const std::size_t outer_len = static_cast<std::size_t>(2 * pad);
  std::vector<Letter> full(static_cast<std::size_t>(W.size()));
  const std::size_t lam_len = static_cast<std::size_t>(lambda.size());
  NeumaierSum tv;
  double worst = 0.0;
  for_each_word(
      k, outer_len,
      [&](std::span<const Letter> outer) {
        Config boundary = Config::constant(bg);
        for (Site i = 0; i < pad; ++i) {
          boundary = boundary.with(W.lo + i, outer[static_cast<std::size_t>(i)]);
          boundary = boundary.with(lambda.hi + 1 + i, outer[static_cast<std::size_t>(pad + i)]);
        }
        std::copy(outer.begin(), outer.begin() + pad, full.begin());
        std::copy(outer.begin() + pad, outer.end(), full.begin() + static_cast<std::ptrdiff_t>(pad + lam_len));
        KernelTable t = kernel_table(g, lambda, boundary, tol, budget);
        std::vector<double> mass;
        double marginal = 0.0;
        for_each_word(k, lam_len, [&](std::span<const Letter> x) {
          std::copy(x.begin(), x.end(), full.begin() + pad);
          mass.push_back(cylinder_prob(mu, full));
          marginal += mass.back();
        });
        for (std::size_t idx = 0; idx < mass.size(); ++idx) {
          const double gap = std::abs(std::exp(t.log_prob[idx]) * marginal - mass[idx]);
          tv.add(0.5 * gap);
          worst = std::max(worst, gap);
        }
      },
      budget);
  return {tv.value(), worst};
}

}  // namespace detail

/// The integral over the exterior of the padded window uses the background
/// letter beyond the pad; for specifications whose dependence radius is at
/// most the pad this is exact for Markov measures.
inline DlrReport dlr_residual(const MarkovMeasure& mu, const Specification& g, Window lambda, Site pad,
                              double tol = kDefaultTol, const Budget& budget = {}) {
  require(pad >= 0, ErrorCode::InvalidArgument, "pad must be >= 0");
  require(mu.alphabet.size() == g.alphabet().size(), ErrorCode::AlphabetMismatch,
          "measure and specification alphabets differ");
  DlrReport out;
  std::tie(out.residual, out.max_cylinder_gap) = detail::dlr_at(mu, g, lambda, pad, tol, budget);
  out.residual_wider = detail::dlr_at(mu, g, lambda, pad + 2, tol, budget).first;
  out.pad_sensitivity = std::abs(out.residual_wider - out.residual);
  return out;
}

// ---------------------------------------------------------------------------
// Exact finite-volume marginals

/// Marginal law of the letters on `sub` under gamma_V(.|boundary), for a
/// specification of finite dependence radius. Uses the single-site chain
/// factorization of gamma_V and a forward/backward pass over V.
inline std::vector<double> finite_volume_marginals(const Specification& g, Window volume, const Config& boundary,
                                                   Window sub, double tol = kDefaultTol, const Budget& budget = {}) {
  require(volume.contains(sub), ErrorCode::InvalidArgument, "sub-window must lie in the volume");
  auto R0 = g.dependence_radius();
  require(R0.has_value(), ErrorCode::InvalidArgument, "exact marginals need a finite dependence radius");
  const Site R = std::max<Site>(*R0, 1);
  const std::size_t k = g.alphabet().size();
  const std::size_t ns = pattern_count(k, R, budget);
  pattern_count(k, sub.size(), budget);
  const Letter ref = g.alphabet().background();
  const double ninf = -std::numeric_limits<double>::infinity();

  Frame f(boundary, volume.padded(R));
  for (Site i = volume.lo; i <= volume.hi; ++i) f.set(i, ref);

  // T[site][state][x]: log ratio at `site` given the R previous letters `state`.
  const std::size_t len = static_cast<std::size_t>(volume.size());
  std::vector<std::vector<std::vector<double>>> T(len, std::vector<std::vector<double>>(ns, std::vector<double>(k)));
  for (std::size_t s = 0; s < len; ++s) {
    const Site site = volume.lo + static_cast<Site>(s);
    for (std::size_t u = 0; u < ns; ++u) {
      auto w = word_from_index(u, k, static_cast<std::size_t>(R));
      bool feasible = true;
      for (Site d = 0; d < R; ++d) {
        const Site at = site - R + d;
        if (at < volume.lo)
          feasible = feasible && boundary.at(at) == w[static_cast<std::size_t>(d)];
        else
          f.set(at, w[static_cast<std::size_t>(d)]);
      }
      for (Letter x = 0; x < k; ++x)
        T[s][u][x] = feasible ? g.log_ratio_site(f, site, x, ref, tol / static_cast<double>(len)).value : ninf;
    }
  }
  auto step = [&](std::size_t u, Letter x) { return (u * k + x) % ns; };

  // Forward log masses up to (not including) each site.
  std::vector<std::vector<double>> A(len + 1, std::vector<double>(ns, ninf));
  {
    std::vector<Letter> w0;
    for (Site d = 0; d < R; ++d) w0.push_back(boundary.at(volume.lo - R + d));
    A[0][word_index(w0, k)] = 0.0;
  }
  for (std::size_t s = 0; s < len; ++s)
    for (std::size_t u = 0; u < ns; ++u) {
      if (A[s][u] == ninf) continue;
      for (Letter x = 0; x < k; ++x) {
        double& dst = A[s + 1][step(u, x)];
        const double v = A[s][u] + T[s][u][x];
        dst = dst == ninf ? v : std::max(dst, v) + std::log1p(std::exp(-std::abs(dst - v)));
      }
    }
  // Backward log masses from each site to the end.
  std::vector<std::vector<double>> B(len + 1, std::vector<double>(ns, 0.0));
  for (std::size_t s = len; s-- > 0;)
    for (std::size_t u = 0; u < ns; ++u) {
      std::vector<double> terms(k);
      for (Letter x = 0; x < k; ++x) terms[x] = T[s][u][x] + B[s + 1][step(u, x)];
      B[s][u] = log_sum_exp(terms);
    }

  const std::size_t s0 = static_cast<std::size_t>(sub.lo - volume.lo);
  const std::size_t L = static_cast<std::size_t>(sub.size());
  std::vector<double> logp;
  for_each_word(k, L, [&](std::span<const Letter> y) {
    std::vector<double> terms;
    for (std::size_t u = 0; u < ns; ++u) {
      if (A[s0][u] == ninf) continue;
      double acc = A[s0][u];
      std::size_t v = u;
      for (std::size_t t = 0; t < L; ++t) {
        acc += T[s0 + t][v][y[t]];
        v = step(v, y[t]);
      }
      terms.push_back(acc + B[s0 + L][v]);
    }
    logp.push_back(log_sum_exp(terms));
  });
  const double z = log_sum_exp(logp);
  std::vector<double> out;
  for (double v : logp) out.push_back(std::exp(v - z));
  return out;
}

}  // namespace gibbskit
