#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "gibbskit/interaction.hpp"
#include "gibbskit/numeric.hpp"
#include "gibbskit/shift.hpp"

namespace gibbskit {

// Every potential here is one-sided: phi(w) depends on w_0, w_1, ... only.

/// phi(w) = table[w_0 ... w_{r-1}].
struct FiniteRangeKind {
  Site range = 1;
  std::vector<double> table;
};

/// phi(w) = h w_0 + beta w_0 sum_{n>=1} w_n / n^alpha.
struct DysonKind {
  double h = 0.0;
  double beta = 0.0;
  double alpha = 2.0;
};

/// phi = -sum of Phi_V over anchored sets V containing 0.
struct InteractionKind {
  Interaction interaction;
};

/// Arbitrary one-sided function given by an evaluator on frames, e.g. the
/// potential extracted from a specification.
struct HalfLineKind {
  std::function<EvalResult(const Frame&, Site, double)> eval;
  std::optional<Site> range;
  std::function<double(Site)> variation_bound;
  std::string origin;
};

class Potential {
 public:
  using Kind = std::variant<FiniteRangeKind, DysonKind, InteractionKind, HalfLineKind>;

  Potential(Alphabet alphabet, Kind kind) : alphabet_(std::move(alphabet)), kind_(std::move(kind)) {
    if (auto* f = std::get_if<FiniteRangeKind>(&kind_)) {
      require(f->range >= 1, ErrorCode::InvalidArgument, "finite-range potential needs range >= 1");
      require(f->table.size() == pattern_count(alphabet_.size(), f->range), ErrorCode::InvalidArgument,
              "finite-range table must have |E|^r entries");
    } else if (auto* d = std::get_if<DysonKind>(&kind_)) {
      require(alphabet_.is_spin(), ErrorCode::AlphabetMismatch, "Dyson potential needs the spin alphabet");
      require(d->alpha > 1.0, ErrorCode::InvalidArgument, "Dyson potential needs alpha > 1");
    } else if (auto* in = std::get_if<InteractionKind>(&kind_)) {
      require(in->interaction.alphabet() == alphabet_, ErrorCode::AlphabetMismatch,
              "interaction alphabet differs from potential alphabet");
      in->interaction.require_uac();
    } else {
      require(static_cast<bool>(std::get<HalfLineKind>(kind_).eval), ErrorCode::InvalidArgument,
              "half-line potential without evaluator");
    }
  }

  const Alphabet& alphabet() const { return alphabet_; }
  const Kind& kind() const { return kind_; }

  std::string kind_name() const {
    switch (kind_.index()) {
      case 0: return "finite_range";
      case 1: return "dyson";
      case 2: return "interaction";
      default: return "half_line";
    }
  }

  /// Smallest r with phi depending on w_0..w_{r-1} only; nullopt for long range.
  std::optional<Site> range() const {
    if (auto* f = std::get_if<FiniteRangeKind>(&kind_)) return f->range;
    if (std::holds_alternative<DysonKind>(kind_)) {
      if (std::get<DysonKind>(kind_).beta == 0.0) return 1;
      return std::nullopt;
    }
    if (auto* in = std::get_if<InteractionKind>(&kind_)) {
      auto d = in->interaction.max_diameter();
      if (!d) return std::nullopt;
      return *d + 1;
    }
    return std::get<HalfLineKind>(kind_).range;
  }

  const FiniteRangeKind* finite_range() const { return std::get_if<FiniteRangeKind>(&kind_); }
  const DysonKind* dyson() const { return std::get_if<DysonKind>(&kind_); }

  /// phi(S^i c).
  template <class C>
  EvalResult eval_at(const C& c, Site i, double tol = kDefaultTol) const {
    if (auto* f = std::get_if<FiniteRangeKind>(&kind_)) {
      std::size_t idx = 0;
      for (Site s = 0; s < f->range; ++s) idx = idx * alphabet_.size() + c.at(i + s);
      return {f->table[idx], 0.0};
    }
    if (auto* d = std::get_if<DysonKind>(&kind_)) {
      const double vi = alphabet_.spin(c.at(i));
      EvalResult out{d->h * vi, 0.0};
      if (d->beta != 0.0) {
        EvalResult t = weighted_power_tail(c, i, +1, 1, d->alpha, [&](Letter x) { return alphabet_.spin(x); });
        out.value += d->beta * vi * t.value;
        out.error += std::abs(d->beta) * t.error;
      }
      check_tol(out, tol);
      return out;
    }
    if (auto* in = std::get_if<InteractionKind>(&kind_)) {
      const Interaction& phi = in->interaction;
      NeumaierSum s;
      for (const auto& g : phi.generators()) s.add(-phi.term(g, c, i));
      EvalResult out{0.0, 0.0};
      if (const auto& t = phi.tail(); t && t->beta != 0.0) {
        EvalResult p =
            weighted_power_tail(c, i, +1, t->from, t->alpha, [&](Letter x) { return alphabet_.spin(x); });
        const double vi = alphabet_.spin(c.at(i));
        s.add(t->beta * vi * p.value);
        out.error = std::abs(t->beta) * p.error;
      }
      out.value = s.value();
      check_tol(out, tol);
      return out;
    }
    const auto& hl = std::get<HalfLineKind>(kind_);
    EvalResult out;
    if constexpr (std::is_same_v<C, Frame>) {
      out = hl.eval(c, i, tol);
    } else {
      out = hl.eval(Frame::of(c, Window(i, i)), i, tol);
    }
    check_tol(out, tol);
    return out;
  }

  /// phi(S^i c^b) - phi(S^i c^a), where c^x is c with x written at site j.
  template <class C>
  EvalResult flip_delta(const C& c, Site j, Letter a, Letter b, Site i, double tol = kDefaultTol) const {
    if (a == b || i > j) return {0.0, 0.0};
    if (auto* f = std::get_if<FiniteRangeKind>(&kind_)) {
      if (j - i >= f->range) return {0.0, 0.0};
    }
    if (auto* d = std::get_if<DysonKind>(&kind_)) {
      const double dv = alphabet_.spin(b) - alphabet_.spin(a);
      if (i < j) return {d->beta * alphabet_.spin(c.at(i)) * dv * std::pow(static_cast<double>(j - i), -d->alpha), 0.0};
      EvalResult t{0.0, 0.0};
      if (d->beta != 0.0)
        t = weighted_power_tail(c, j, +1, 1, d->alpha, [&](Letter x) { return alphabet_.spin(x); });
      return {dv * (d->h + d->beta * t.value), std::abs(dv * d->beta) * t.error};
    }
    EvalResult hi = eval_at(Overridden<C>(c, j, b), i, tol / 2);
    EvalResult lo = eval_at(Overridden<C>(c, j, a), i, tol / 2);
    return hi - lo;
  }

  /// sum_{i < j - n} flip_delta(c, j, a, b, i) in closed form, when the kind has one.
  template <class C>
  std::optional<EvalResult> flip_left_tail(const C& c, Site j, Letter a, Letter b, Site n) const {
    if (a == b) return EvalResult{};
    if (auto r = range()) {
      if (n + 1 >= *r) return EvalResult{};
      return std::nullopt;
    }
    auto spin = [&](Letter x) { return alphabet_.spin(x); };
    if (auto* d = std::get_if<DysonKind>(&kind_)) {
      const double dv = spin(b) - spin(a);
      EvalResult t = weighted_power_tail(c, j, -1, n + 1, d->alpha, spin);
      return EvalResult{d->beta * dv * t.value, std::abs(d->beta * dv) * t.error};
    }
    if (auto* in = std::get_if<InteractionKind>(&kind_)) {
      const Interaction& phi = in->interaction;
      Site d = 0;
      for (const auto& g : phi.generators()) d = std::max(d, g.diameter());
      if (n < d) return std::nullopt;
      const auto& t = *phi.tail();
      const double dv = spin(b) - spin(a);
      EvalResult p = weighted_power_tail(c, j, -1, std::max(n + 1, t.from), t.alpha, spin);
      return EvalResult{t.beta * dv * p.value, std::abs(t.beta * dv) * p.error};
    }
    return std::nullopt;
  }

  /// Declared upper bound on var_n, when the kind carries one analytically.
  std::optional<double> variation_bound(Site n) const {
    if (auto* d = std::get_if<DysonKind>(&kind_)) {
      if (n == 0) return 2.0 * (std::abs(d->h) + std::abs(d->beta) * riemann_zeta(d->alpha).value);
      return 2.0 * std::abs(d->beta) * power_tail_sum(d->alpha, static_cast<double>(n)).value;
    }
    if (auto* hl = std::get_if<HalfLineKind>(&kind_)) {
      if (hl->variation_bound) return hl->variation_bound(n);
      if (hl->range && n >= *hl->range) return 0.0;
    }
    return std::nullopt;
  }

 private:
  static void check_tol(const EvalResult& r, double tol) {
    require(tol > 0, ErrorCode::InvalidArgument, "tol must be positive");
    require(r.error <= tol, ErrorCode::TolUnreachable, "evaluation error exceeds tol");
  }

  Alphabet alphabet_;
  Kind kind_;
};

// ---------------------------------------------------------------------------
// Factories

inline Potential finite_range_potential(Alphabet a, Site r, std::vector<double> table) {
  return Potential(std::move(a), FiniteRangeKind{r, std::move(table)});
}

inline Potential constant_potential(Alphabet a, double v) {
  std::vector<double> t(a.size(), v);
  return finite_range_potential(std::move(a), 1, std::move(t));
}

inline Potential dyson_potential(double h, double beta, double alpha, Alphabet spins = Alphabet::spins()) {
  return Potential(std::move(spins), DysonKind{h, beta, alpha});
}

/// phi(w) = beta w_0 w_1 + h w_0.
inline Potential ising_potential(double beta, double h, Alphabet spins = Alphabet::spins()) {
  require(spins.is_spin(), ErrorCode::AlphabetMismatch, "Ising needs a spin alphabet");
  std::vector<double> t;
  for (Letter a = 0; a < 2; ++a)
    for (Letter b = 0; b < 2; ++b) t.push_back(beta * spins.spin(a) * spins.spin(b) + h * spins.spin(a));
  return finite_range_potential(std::move(spins), 2, std::move(t));
}

/// phi(w) = log p[w_0].
inline Potential log_probability_potential(Alphabet a, const std::vector<double>& p) {
  require(p.size() == a.size(), ErrorCode::InvalidArgument, "one probability per symbol");
  std::vector<double> t;
  for (double x : p) {
    require(x > 0, ErrorCode::InvalidArgument, "probabilities must be positive");
    t.push_back(std::log(x));
  }
  return finite_range_potential(std::move(a), 1, std::move(t));
}

inline Potential potential_from_interaction(const Interaction& phi) {
  phi.require_uac();
  return Potential(phi.alphabet(), InteractionKind{phi});
}

/// Table over E^r for a potential of known finite range.
inline std::vector<double> range_table(const Potential& phi, const Budget& budget = {}) {
  auto r = phi.range();
  require(r.has_value(), ErrorCode::InvalidArgument, "potential has no finite range");
  if (auto* f = phi.finite_range()) return f->table;
  const Alphabet& a = phi.alphabet();
  std::vector<double> t;
  t.reserve(pattern_count(a.size(), *r, budget));
  Frame f(Config::constant(a.background()), Window(0, *r - 1));
  for_each_word(
      a.size(), static_cast<std::size_t>(*r),
      [&](std::span<const Letter> w) {
        f.set(Window(0, *r - 1), w);
        t.push_back(phi.eval_at(f, 0).value);
      },
      budget);
  return t;
}

/// Same function as a FiniteRange table.
inline Potential tabulate(const Potential& phi, const Budget& budget = {}) {
  return finite_range_potential(phi.alphabet(), *phi.range(), range_table(phi, budget));
}

// ---------------------------------------------------------------------------
// Evaluation

inline EvalResult eval(const Potential& phi, const Config& c, double tol = kDefaultTol) {
  return phi.eval_at(c, 0, tol);
}

/// S_n phi(c) = sum_{k<n} phi(S^k c).
template <class C>
EvalResult birkhoff_sum(const Potential& phi, const C& c, Site n, double tol = kDefaultTol) {
  require(n >= 1, ErrorCode::InvalidArgument, "Birkhoff sum needs n >= 1");
  NeumaierSum s;
  double err = 0.0;
  for (Site k = 0; k < n; ++k) {
    EvalResult e = phi.eval_at(c, k, tol / static_cast<double>(n));
    s.add(e.value);
    err += e.error;
  }
  require(err <= tol, ErrorCode::TolUnreachable, "Birkhoff sum error exceeds tol");
  return {s.value(), err};
}

// ---------------------------------------------------------------------------
// Regularity diagnostics

namespace detail {

/// max over prefixes of length n of (max - min) over the remaining r - n letters.
inline double table_variation(const std::vector<double>& t, std::size_t k, Site r, Site n) {
  if (n >= r) return 0.0;
  const std::size_t block = pattern_count(k, r - n, Budget{~std::uint64_t{0}});
  double best = 0.0;
  for (std::size_t start = 0; start < t.size(); start += block) {
    auto [lo, hi] = std::minmax_element(t.begin() + static_cast<std::ptrdiff_t>(start),
                                        t.begin() + static_cast<std::ptrdiff_t>(start + block));
    best = std::max(best, *hi - *lo);
  }
  return best;
}

/// max over words of (max - min) when only the letter at position i varies.
inline double table_oscillation(const std::vector<double>& t, std::size_t k, Site r, Site i) {
  if (i < 0 || i >= r) return 0.0;
  std::size_t stride = 1;
  for (Site s = i + 1; s < r; ++s) stride *= k;
  double best = 0.0;
  for (std::size_t idx = 0; idx < t.size(); ++idx) {
    if ((idx / stride) % k != 0) continue;
    double lo = t[idx], hi = t[idx];
    for (std::size_t x = 1; x < k; ++x) {
      lo = std::min(lo, t[idx + x * stride]);
      hi = std::max(hi, t[idx + x * stride]);
    }
    best = std::max(best, hi - lo);
  }
  return best;
}

/// Finite generators of an interaction as a table of the potential they induce.
inline std::optional<std::pair<Site, std::vector<double>>> finite_part_table(const Interaction& phi,
                                                                              const Budget& budget) {
  Site d = 0;
  for (const auto& g : phi.generators()) d = std::max(d, g.diameter());
  Interaction finite(phi.alphabet(), phi.generators());
  Potential p(phi.alphabet(), InteractionKind{finite});
  return std::make_pair(d + 1, range_table(p, budget));
}

}  // namespace detail

/// var_n(phi) = sup{phi(w) - phi(w') : w, w' agree on [0, n-1]}. Exact for
/// finite range; an analytic upper bound for long-range kinds.
inline double variation_estimate(const Potential& phi, Site n, const Budget& budget = {}) {
  require(n >= 0, ErrorCode::InvalidArgument, "variation index must be >= 0");
  const std::size_t k = phi.alphabet().size();
  if (auto r = phi.range()) return detail::table_variation(range_table(phi, budget), k, *r, n);
  if (auto b = phi.variation_bound(n)) return *b;
  if (auto* in = std::get_if<InteractionKind>(&phi.kind())) {
    auto [r, t] = *detail::finite_part_table(in->interaction, budget);
    const auto& tail = *in->interaction.tail();
    double tb = 2.0 * std::abs(tail.beta) *
                power_tail_sum(tail.alpha, static_cast<double>(std::max<Site>(n, tail.from))).value;
    return detail::table_variation(t, k, r, n) + tb;
  }
  fail(ErrorCode::InvalidArgument, "potential declares no variation bound");
}

/// delta_i(phi) = sup{phi(w) - phi(w') : w, w' agree off site i}.
inline double oscillation_estimate(const Potential& phi, Site i, const Budget& budget = {}) {
  const std::size_t k = phi.alphabet().size();
  if (auto r = phi.range()) return detail::table_oscillation(range_table(phi, budget), k, *r, i);
  if (i < 0) return 0.0;
  if (auto* d = phi.dyson()) {
    if (i == 0) return 2.0 * (std::abs(d->h) + std::abs(d->beta) * riemann_zeta(d->alpha).value);
    return 2.0 * std::abs(d->beta) * std::pow(static_cast<double>(i), -d->alpha);
  }
  if (auto* in = std::get_if<InteractionKind>(&phi.kind())) {
    auto [r, t] = *detail::finite_part_table(in->interaction, budget);
    const auto& tail = *in->interaction.tail();
    double tb = 0.0;
    if (i == 0)
      tb = 2.0 * std::abs(tail.beta) * power_tail_sum(tail.alpha, static_cast<double>(tail.from)).value;
    else if (i >= tail.from)
      tb = 2.0 * std::abs(tail.beta) * std::pow(static_cast<double>(i), -tail.alpha);
    return detail::table_oscillation(t, k, r, i) + tb;
  }
  fail(ErrorCode::InvalidArgument, "potential declares no oscillation bound");
}

struct WaltersBowenTable {
  /// entries[p][n] estimates var_{[-p, n+p]} S_{n+1} phi.
  std::vector<std::vector<double>> entries;
  std::vector<double> sup_over_n;
  bool nonincreasing_in_p = true;
  /// True when entries are exact (finite range); otherwise they are upper bounds.
  bool exact = false;
  /// Lower bounds from enumerating the sites just beyond the frozen window
  /// on an all-background frame; empty unless probes were requested.
  std::vector<std::vector<double>> empirical;
};

/// Variation of S_{n+1}phi over configurations frozen on [-p, n+p], for p <= p_max
/// and n <= n_max. `probe_sites` > 0 adds empirical lower bounds from
/// |E|^probe_sites boundary patterns.
inline WaltersBowenTable walters_bowen_diagnostic(const Potential& phi, Site p_max, Site n_max,
                                                  const Budget& budget = {}, Site probe_sites = 0) {
  require(p_max >= 0 && n_max >= 0, ErrorCode::InvalidArgument, "p_max and n_max must be >= 0");
  const std::size_t k = phi.alphabet().size();
  WaltersBowenTable out;
  out.entries.assign(static_cast<std::size_t>(p_max + 1), std::vector<double>(static_cast<std::size_t>(n_max + 1)));
  if (auto r = phi.range()) {
    out.exact = true;
    const auto table = range_table(phi, budget);
    for (Site n = 0; n <= n_max; ++n) {
      const Site len = n + *r;  // S_{n+1}phi reads w_0 .. w_{n+r-1}
      std::vector<double> sums;
      sums.reserve(pattern_count(k, len, budget));
      for_each_word(
          k, static_cast<std::size_t>(len),
          [&](std::span<const Letter> w) {
            double s = 0.0;
            for (Site j = 0; j <= n; ++j)
              s += table[word_index(w.subspan(static_cast<std::size_t>(j), static_cast<std::size_t>(*r)), k)];
            sums.push_back(s);
          },
          budget);
      for (Site p = 0; p <= p_max; ++p) {
        const Site frozen = std::min(n + p + 1, len);
        out.entries[p][n] = detail::table_variation(sums, k, len, frozen);
      }
    }
  } else {
    for (Site p = 0; p <= p_max; ++p)
      for (Site n = 0; n <= n_max; ++n) {
        double s = 0.0;
        for (Site j = 0; j <= n; ++j) s += variation_estimate(phi, n + p - j + 1, budget);
        out.entries[p][n] = s;
      }
  }
  if (probe_sites > 0) {
    out.empirical = out.entries;
    const Letter bg = phi.alphabet().background();
    for (Site p = 0; p <= p_max; ++p)
      for (Site n = 0; n <= n_max; ++n) {
        const Window free(n + p + 1, n + p + probe_sites);
        Frame f(Config::constant(bg), Window(0, free.hi));
        double lo = std::numeric_limits<double>::infinity(), hi = -lo;
        for_each_word(
            k, static_cast<std::size_t>(probe_sites),
            [&](std::span<const Letter> w) {
              f.set(free, w);
              double s = birkhoff_sum(phi, f, n + 1).value;
              lo = std::min(lo, s);
              hi = std::max(hi, s);
            },
            budget);
        out.empirical[p][n] = hi - lo;
      }
  }
  for (Site p = 0; p <= p_max; ++p) {
    out.sup_over_n.push_back(*std::max_element(out.entries[p].begin(), out.entries[p].end()));
    if (p > 0 && out.sup_over_n[p] > out.sup_over_n[p - 1] + 1e-15) out.nonincreasing_in_p = false;
  }
  return out;
}

}  // namespace gibbskit
