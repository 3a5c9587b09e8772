#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include "gibbskit/numeric.hpp"
#include "gibbskit/shift.hpp"

namespace gibbskit {

// ---------------------------------------------------------------------------
// Views and power-law tails shared by interactions and potentials.
//
// Anything with at(Site), core(), left_background() and right_background()
// works as a configuration: Config, Frame, or the override view below.

/// `base` with one site replaced.
template <class C>
class Overridden {
 public:
  Overridden(const C& base, Site site, Letter letter) : base_(base), site_(site), letter_(letter) {}
  Letter at(Site i) const { return i == site_ ? letter_ : base_.at(i); }
  Window core() const { return base_.core().hull(Window(site_, site_)); }
  const Background& left_background() const { return base_.left_background(); }
  const Background& right_background() const { return base_.right_background(); }

 private:
  const C& base_;
  Site site_;
  Letter letter_;
};

/// Config holding the same letters as any configuration view.
template <class C>
Config materialize(const C& c) {
  if constexpr (std::is_same_v<C, Config>) {
    return c;
  } else {
    Window core = c.core();
    Config out(c.left_background(), core.hi + 1, c.right_background());
    for (Site i = core.lo; i <= core.hi; ++i) out = out.with(i, c.at(i));
    return out;
  }
}

/// sum_{n >= n0} value(c(i + dir*n)) * n^{-alpha}.
/// Sites inside the core are summed explicitly; the periodic background
/// beyond it is summed in closed form with Hurwitz zeta per residue class.
template <class C, class ValueFn>
EvalResult weighted_power_tail(const C& c, Site i, int dir, Site n0, double alpha, ValueFn&& value) {
  const Window core = c.core();
  Site n_end = dir > 0 ? core.hi - i + 1 : i - core.lo + 1;
  n_end = std::max(n_end, n0);
  NeumaierSum head;
  for (Site n = n0; n < n_end; ++n) head.add(value(c.at(i + dir * n)) * std::pow(static_cast<double>(n), -alpha));
  const Background& bg = dir > 0 ? c.right_background() : c.left_background();
  const Site p = bg.period();
  EvalResult tail;
  const double scale = std::pow(static_cast<double>(p), -alpha);
  for (Site r = 0; r < p; ++r) {
    double v = value(bg.at(i + dir * (n_end + r)));
    if (v == 0.0) continue;
    EvalResult z = hurwitz_zeta(alpha, static_cast<double>(n_end + r) / static_cast<double>(p));
    tail.value += v * scale * z.value;
    tail.error += std::abs(v) * scale * z.error;
  }
  return {head.value() + tail.value,
          tail.error + 4.0 * std::numeric_limits<double>::epsilon() * std::abs(head.value())};
}

// ---------------------------------------------------------------------------
// Interaction

/// Local term Phi_V for one translation class. `sites` are sorted, contain 0,
/// and index `table` lexicographically (first site most significant).
struct Generator {
  std::vector<Site> sites;
  std::vector<double> table;

  double sup_norm() const {
    double m = 0;
    for (double v : table) m = std::max(m, std::abs(v));
    return m;
  }
  Site diameter() const { return sites.back() - sites.front(); }
};

/// Long-range pair family Phi_{{0,n}}(w) = -beta * w_0 * w_n / n^alpha for n >= from,
/// on spin-valued alphabets.
struct PairTail {
  double beta = 0.0;
  double alpha = 2.0;
  Site from = 1;
};

struct UacNorms {
  double uac = 0.0;
  double diam_weighted = 0.0;
};

/// Translation-invariant interaction given by generators. Generators are stored
/// anchored so their smallest site is 0; Phi_{V+t}(w) = Phi_V(S^t w).
class Interaction {
 public:
  explicit Interaction(Alphabet alphabet, std::vector<Generator> generators = {},
                       std::optional<PairTail> tail = std::nullopt)
      : alphabet_(std::move(alphabet)), tail_(tail) {
    const std::size_t k = alphabet_.size();
    for (auto& g : generators) {
      require(!g.sites.empty(), ErrorCode::InvalidArgument, "generator with empty site set");
      require(std::is_sorted(g.sites.begin(), g.sites.end()) &&
                  std::adjacent_find(g.sites.begin(), g.sites.end()) == g.sites.end(),
              ErrorCode::InvalidArgument, "generator sites must be strictly increasing");
      require(std::find(g.sites.begin(), g.sites.end(), Site{0}) != g.sites.end(), ErrorCode::InvalidArgument,
              "generator site set must contain 0");
      require(g.table.size() == pattern_count(k, static_cast<Site>(g.sites.size())), ErrorCode::InvalidArgument,
              "generator table must have |E|^|V| entries");
      Site lo = g.sites.front();
      for (auto& s : g.sites) s -= lo;
      generators_.push_back(std::move(g));
    }
    if (tail_) {
      require(alphabet_.is_spin(), ErrorCode::AlphabetMismatch, "pair tail needs the spin alphabet {-1,+1}");
      require(tail_->from >= 1, ErrorCode::InvalidArgument, "pair tail must start at distance >= 1");
    }
  }

  const Alphabet& alphabet() const { return alphabet_; }
  const std::vector<Generator>& generators() const { return generators_; }
  const std::optional<PairTail>& tail() const { return tail_; }

  bool is_uac() const { return !tail_ || tail_->alpha > 1.0 || tail_->beta == 0.0; }

  void require_uac() const {
    require(is_uac(), ErrorCode::NotUAC, "pair tail with alpha <= 1 is not absolutely summable");
  }

  /// Largest generator diameter; nullopt when a pair tail makes the range infinite.
  std::optional<Site> max_diameter() const {
    if (tail_ && tail_->beta != 0.0) return std::nullopt;
    Site d = 0;
    for (const auto& g : generators_) d = std::max(d, g.diameter());
    return d;
  }

  /// Phi_{G+t}(c).
  template <class C>
  double term(const Generator& g, const C& c, Site t) const {
    std::size_t idx = 0;
    for (Site s : g.sites) idx = idx * alphabet_.size() + c.at(s + t);
    return g.table[idx];
  }

 private:
  Alphabet alphabet_;
  std::vector<Generator> generators_;
  std::optional<PairTail> tail_;
};

/// Nearest-neighbour Ising: Phi_{0} = -h w_0, Phi_{0,1} = -beta w_0 w_1.
inline Interaction nn_ising_interaction(double beta, double h, Alphabet spins = Alphabet::spins()) {
  require(spins.is_spin(), ErrorCode::AlphabetMismatch, "Ising needs a spin alphabet");
  Generator field{{0}, {}};
  for (Letter a = 0; a < 2; ++a) field.table.push_back(-h * spins.spin(a));
  Generator bond{{0, 1}, {}};
  for (Letter a = 0; a < 2; ++a)
    for (Letter b = 0; b < 2; ++b) bond.table.push_back(-beta * spins.spin(a) * spins.spin(b));
  return Interaction(spins, {field, bond});
}

/// Field plus the full long-range pair family; its potential is the Dyson potential.
inline Interaction dyson_interaction(double h, double beta, double alpha, Alphabet spins = Alphabet::spins()) {
  Generator field{{0}, {}};
  for (Letter a = 0; a < 2; ++a) field.table.push_back(-h * spins.spin(a));
  return Interaction(spins, {field}, PairTail{beta, alpha, 1});
}

/// uac: sum over sets containing 0 of sup norms (each generator counted once per
/// translate through 0). diam_weighted: sum over Z_+-anchored sets of diam * sup norm.
inline UacNorms uac_norms(const Interaction& phi) {
  UacNorms out;
  for (const auto& g : phi.generators()) {
    out.uac += static_cast<double>(g.sites.size()) * g.sup_norm();
    out.diam_weighted += static_cast<double>(g.diameter()) * g.sup_norm();
  }
  if (const auto& t = phi.tail(); t && t->beta != 0.0) {
    const double b = std::abs(t->beta);
    out.uac += t->alpha > 1.0 ? 2.0 * b * hurwitz_zeta(t->alpha, static_cast<double>(t->from)).value
                              : std::numeric_limits<double>::infinity();
    out.diam_weighted += t->alpha > 2.0 ? b * hurwitz_zeta(t->alpha - 1.0, static_cast<double>(t->from)).value
                                        : std::numeric_limits<double>::infinity();
  }
  return out;
}

/// H_Lambda(c) = sum of Phi_V(c) over translated sets V meeting Lambda.
/// Pair-tail contributions are summed in closed form beyond the core.
template <class C>
EvalResult hamiltonian(const Interaction& phi, Window lambda, const C& c, double tol = kDefaultTol) {
  require(tol > 0, ErrorCode::InvalidArgument, "tol must be positive");
  phi.require_uac();
  NeumaierSum sum;
  for (const auto& g : phi.generators()) {
    const Site d = g.diameter();
    for (Site t = lambda.lo - d; t <= lambda.hi; ++t) {
      bool meets = false;
      for (Site s : g.sites) meets = meets || lambda.contains(s + t);
      if (meets) sum.add(phi.term(g, c, t));
    }
  }
  EvalResult out{0.0, 0.0};
  if (const auto& t = phi.tail(); t && t->beta != 0.0) {
    const Alphabet& a = phi.alphabet();
    auto val = [&](Letter x) { return a.spin(x); };
    for (Site x = lambda.lo; x <= lambda.hi; ++x) {
      const double vx = a.spin(c.at(x));
      // Pairs {x, x+n}.
      EvalResult right = weighted_power_tail(c, x, +1, t->from, t->alpha, val);
      // Pairs {x-n, x} with x-n outside Lambda.
      EvalResult left = weighted_power_tail(c, x, -1, t->from, t->alpha, val);
      double inside = 0.0;
      for (Site n = t->from; x - n >= lambda.lo; ++n)
        inside += a.spin(c.at(x - n)) * std::pow(static_cast<double>(n), -t->alpha);
      sum.add(-t->beta * vx * (right.value + left.value - inside));
      out.error += std::abs(t->beta) * (right.error + left.error);
    }
  }
  out.value = sum.value();
  require(out.error <= tol, ErrorCode::TolUnreachable, "Hamiltonian tail error exceeds tol");
  return out;
}

}  // namespace gibbskit
