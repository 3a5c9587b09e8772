#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "gibbskit/cocycle.hpp"
#include "gibbskit/interaction.hpp"
#include "gibbskit/potential.hpp"

namespace gibbskit {

struct InteractionSource {
  Interaction interaction;
};

/// gamma built from the cocycle of an extensible potential.
struct CocycleSource {
  Potential potential;
  Site radius_cap = 1'000'000;
};

/// Explicit single-site kernel: log gamma_{j}(x | w) read from a table over the
/// words w_{j-R} .. w_{j+R} (center letter = x), normalized per neighbourhood.
struct SingleSiteSource {
  Site radius = 0;
  std::vector<double> log_probs;
};

struct KernelValue {
  double prob = 0.0;
  double log_prob = 0.0;
  double error = 0.0;
};

/// All kernel values on one volume for one boundary, patterns in lexicographic order.
struct KernelTable {
  Window window;
  std::vector<double> log_prob;
  std::vector<double> error;
};

class Specification {
 public:
  using Source = std::variant<InteractionSource, CocycleSource, SingleSiteSource>;

  Specification(Alphabet alphabet, Source source) : alphabet_(std::move(alphabet)), source_(std::move(source)) {
    if (auto* s = std::get_if<SingleSiteSource>(&source_)) normalize(*s);
    if (auto* in = std::get_if<InteractionSource>(&source_)) in->interaction.require_uac();
  }

  static Specification from_interaction(const Interaction& phi) {
    return Specification(phi.alphabet(), InteractionSource{phi});
  }
  static Specification from_cocycle(const Potential& phi, Site radius_cap = 1'000'000) {
    return Specification(phi.alphabet(), CocycleSource{phi, radius_cap});
  }
  /// `log_weights` need not be normalized.
  static Specification single_site(Alphabet a, Site radius, std::vector<double> log_weights) {
    return Specification(std::move(a), SingleSiteSource{radius, std::move(log_weights)});
  }
  static Specification independent(Alphabet a, const std::vector<double>& probs) {
    require(probs.size() == a.size(), ErrorCode::InvalidArgument, "one probability per symbol");
    std::vector<double> lw;
    for (double p : probs) {
      require(p > 0, ErrorCode::InvalidArgument, "probabilities must be positive");
      lw.push_back(std::log(p));
    }
    return single_site(std::move(a), 0, std::move(lw));
  }

  const Alphabet& alphabet() const { return alphabet_; }
  const Source& source() const { return source_; }

  std::string source_name() const {
    switch (source_.index()) {
      case 0: return "interaction";
      case 1: return "cocycle";
      default: return "single_site";
    }
  }

  /// R such that gamma_{j}(.|w) depends on w_{j-R} .. w_{j+R} only.
  std::optional<Site> dependence_radius() const {
    if (auto* in = std::get_if<InteractionSource>(&source_)) return in->interaction.max_diameter();
    if (auto* c = std::get_if<CocycleSource>(&source_)) {
      auto r = c->potential.range();
      if (!r) return std::nullopt;
      return *r - 1;
    }
    return std::get<SingleSiteSource>(source_).radius;
  }

  /// log gamma_{j}(x | c) - log gamma_{j}(y | c).
  template <class C>
  EvalResult log_ratio_site(const C& c, Site j, Letter x, Letter y, double tol = kDefaultTol) const {
    if (x == y) return {};
    if (auto* in = std::get_if<InteractionSource>(&source_)) {
      const Window site(j, j);
      EvalResult hy = hamiltonian(in->interaction, site, Overridden<C>(c, j, y), tol / 2);
      EvalResult hx = hamiltonian(in->interaction, site, Overridden<C>(c, j, x), tol / 2);
      return hy - hx;
    }
    if (auto* cs = std::get_if<CocycleSource>(&source_)) {
      CocycleValue v = rho_flip(cs->potential, c, j, y, x, tol, cs->radius_cap);
      return {v.value, v.error};
    }
    const auto& s = std::get<SingleSiteSource>(source_);
    const std::size_t k = alphabet_.size();
    std::size_t base = 0, stride = 1;
    for (Site d = -s.radius; d <= s.radius; ++d) {
      base = base * k + (d == 0 ? 0 : c.at(j + d));
      if (d > 0) stride *= k;
    }
    return {s.log_probs[base + x * stride] - s.log_probs[base + y * stride], 0.0};
  }

  /// Normalized log gamma_{j}(. | c), one entry per symbol.
  template <class C>
  std::vector<double> single_site_log_probs(const C& c, Site j, double tol = kDefaultTol) const {
    const Letter ref = alphabet_.background();
    std::vector<double> lw(alphabet_.size());
    for (Letter x = 0; x < alphabet_.size(); ++x) lw[x] = log_ratio_site(c, j, x, ref, tol).value;
    const double z = log_sum_exp(lw);
    for (double& v : lw) v -= z;
    return lw;
  }

 private:
  void normalize(SingleSiteSource& s) const {
    const std::size_t k = alphabet_.size();
    require(s.radius >= 0, ErrorCode::InvalidArgument, "single-site radius must be >= 0");
    const std::size_t n = pattern_count(k, 2 * s.radius + 1);
    require(s.log_probs.size() == n, ErrorCode::InvalidArgument,
            "single-site table must have |E|^(2R+1) entries");
    std::size_t stride = 1;
    for (Site d = 1; d <= s.radius; ++d) stride *= k;
    for (std::size_t idx = 0; idx < n; ++idx) {
      if ((idx / stride) % k != 0) continue;
      std::vector<double> col(k);
      for (std::size_t x = 0; x < k; ++x) {
        col[x] = s.log_probs[idx + x * stride];
        require(std::isfinite(col[x]), ErrorCode::NullKernel, "single-site kernel has a zero entry");
      }
      const double z = log_sum_exp(col);
      for (std::size_t x = 0; x < k; ++x) s.log_probs[idx + x * stride] -= z;
    }
  }

  Alphabet alphabet_;
  Source source_;
};

// ---------------------------------------------------------------------------
// Finite-volume kernels

namespace detail {

/// Visits every pattern p on lambda with its log weight
/// log gamma_lambda(p|w) - log gamma_lambda(a^lambda|w), built as a chain of
/// single-site ratios filled left to right over an a-filled volume.
template <class Fn>
void for_each_log_weight(const Specification& g, Window lambda, const Config& w, double tol, const Budget& budget,
                         Fn&& fn) {
  const std::size_t k = g.alphabet().size();
  pattern_count(k, lambda.size(), budget);
  const Letter ref = g.alphabet().background();
  Frame f(w, lambda);
  for (Site i = lambda.lo; i <= lambda.hi; ++i) f.set(i, ref);
  std::vector<Letter> word(static_cast<std::size_t>(lambda.size()), ref);
  const double per = tol / static_cast<double>(lambda.size());
  auto visit = [&](auto&& self, Site i, double acc, double err) -> void {
    if (i > lambda.hi) {
      fn(std::span<const Letter>(word), EvalResult{acc, err});
      return;
    }
    for (Letter x = 0; x < k; ++x) {
      EvalResult t = g.log_ratio_site(f, i, x, ref, per);
      f.set(i, x);
      word[static_cast<std::size_t>(i - lambda.lo)] = x;
      self(self, i + 1, acc + t.value, err + t.error);
    }
    f.set(i, ref);
    word[static_cast<std::size_t>(i - lambda.lo)] = ref;
  };
  visit(visit, lambda.lo, 0.0, 0.0);
}

inline KernelTable normalize_table(Window lambda, std::vector<double> lw, std::vector<double> err) {
  const double z = log_sum_exp(lw);
  const double zerr = err.empty() ? 0.0 : *std::max_element(err.begin(), err.end());
  for (std::size_t i = 0; i < lw.size(); ++i) {
    lw[i] -= z;
    err[i] += zerr;
  }
  return {lambda, std::move(lw), std::move(err)};
}

}  // namespace detail

inline KernelTable kernel_table(const Specification& g, Window lambda, const Config& w, double tol = kDefaultTol,
                                const Budget& budget = {}) {
  std::vector<double> lw, err;
  detail::for_each_log_weight(g, lambda, w, tol, budget, [&](std::span<const Letter>, EvalResult r) {
    lw.push_back(r.value);
    err.push_back(r.error);
  });
  return detail::normalize_table(lambda, std::move(lw), std::move(err));
}

inline KernelValue kernel(const Specification& g, const Pattern& p, const Config& w, double tol = kDefaultTol,
                          const Budget& budget = {}) {
  KernelTable t = kernel_table(g, p.window, w, tol, budget);
  const std::size_t idx = word_index(p.letters, g.alphabet().size());
  return {std::exp(t.log_prob[idx]), t.log_prob[idx], t.error[idx]};
}

/// log gamma_lambda(p|w) - log gamma_lambda(a^lambda|w) for a single pattern.
inline EvalResult log_weight(const Specification& g, const Pattern& p, const Config& w, double tol = kDefaultTol) {
  const Letter ref = g.alphabet().background();
  Frame f(w, p.window);
  for (Site i = p.window.lo; i <= p.window.hi; ++i) f.set(i, ref);
  EvalResult acc;
  const double per = tol / static_cast<double>(p.window.size());
  for (Site i = p.window.lo; i <= p.window.hi; ++i) {
    acc += g.log_ratio_site(f, i, p.at(i), ref, per);
    f.set(i, p.at(i));
  }
  return acc;
}

/// exp(-H_lambda(p w)) / Z_lambda(w), enumerating Z directly from the Hamiltonian.
inline KernelValue kernel_from_interaction(const Interaction& phi, const Pattern& p, const Config& w,
                                           double tol = kDefaultTol, const Budget& budget = {}) {
  const Window lambda = p.window;
  const std::size_t k = phi.alphabet().size();
  Frame f(w, lambda);
  std::vector<double> lw, err;
  lw.reserve(pattern_count(k, lambda.size(), budget));
  for_each_word(
      k, static_cast<std::size_t>(lambda.size()),
      [&](std::span<const Letter> x) {
        f.set(lambda, x);
        EvalResult h = hamiltonian(phi, lambda, f, tol);
        lw.push_back(-h.value);
        err.push_back(h.error);
      },
      budget);
  KernelTable t = detail::normalize_table(lambda, std::move(lw), std::move(err));
  const std::size_t idx = word_index(p.letters, k);
  return {std::exp(t.log_prob[idx]), t.log_prob[idx], t.error[idx]};
}

/// e^{rho(p w, ref)} / sum_xi e^{rho(xi w, ref)} with ref the a-pattern on the volume.
inline KernelValue kernel_from_cocycle(const Potential& phi, const Pattern& p, const Config& w,
                                       double tol = kDefaultTol, const Budget& budget = {}) {
  const Window lambda = p.window;
  const Alphabet& a = phi.alphabet();
  const std::size_t n = pattern_count(a.size(), lambda.size(), budget);
  Config ref = w;
  for (Site i = lambda.lo; i <= lambda.hi; ++i) ref = ref.with(i, a.background());
  RhoOptions opt;
  opt.tol = tol;
  std::vector<double> lw, err;
  lw.reserve(n);
  for (const Pattern& xi : enumerate_patterns(a, lambda, budget)) {
    CocycleValue v = rho(phi, w.with(xi), ref, opt);
    lw.push_back(v.value);
    err.push_back(v.error);
  }
  KernelTable t = detail::normalize_table(lambda, std::move(lw), std::move(err));
  const std::size_t idx = word_index(p.letters, a.size());
  return {std::exp(t.log_prob[idx]), t.log_prob[idx], t.error[idx]};
}

// ---------------------------------------------------------------------------
// Potential extracted from a specification

namespace detail {

/// S^i f with every site left of 0 replaced by `anchor`.
class AnchoredView {
 public:
  AnchoredView(const Frame& f, Site i, Letter anchor)
      : f_(f), i_(i), left_(Background::constant(anchor)), right_(f.right_background().shifted(i)) {}
  Letter at(Site k) const { return k < 0 ? left_.at(k) : f_.at(i_ + k); }
  Window core() const { return {0, std::max<Site>(0, f_.core().hi - i_)}; }
  const Background& left_background() const { return left_; }
  const Background& right_background() const { return right_; }

 private:
  const Frame& f_;
  Site i_;
  Background left_;
  Background right_;
};

}  // namespace detail

/// phi_gamma(w) = log gamma_0(w_0 | anchor left, w_1..) - log gamma_0(anchor | same).
/// The anchor defaults to the alphabet's background letter.
inline Potential phi_from_spec(const Specification& g, std::optional<Letter> anchor = std::nullopt) {
  const Letter a = anchor.value_or(g.alphabet().background());
  require(a < g.alphabet().size(), ErrorCode::InvalidArgument, "anchor is not a symbol");
  HalfLineKind k;
  k.origin = "specification/" + g.source_name();
  k.eval = [g, a](const Frame& f, Site i, double tol) {
    detail::AnchoredView v(f, i, a);
    EvalResult r = g.log_ratio_site(v, 0, v.at(0), a, tol);
    require(std::isfinite(r.value), ErrorCode::NullKernel, "kernel value underflows at the probed configuration");
    return r;
  };
  if (auto R = g.dependence_radius()) k.range = *R + 1;
  if (auto* cs = std::get_if<CocycleSource>(&g.source())) {
    if (auto* d = cs->potential.dyson()) {
      const double b = std::abs(d->beta), h = std::abs(d->h), al = d->alpha;
      k.variation_bound = [b, h, al](Site n) {
        if (n == 0) return 4.0 * (h + 2.0 * b * riemann_zeta(al).value);
        return 4.0 * b * power_tail_sum(al, static_cast<double>(n)).value;
      };
    }
  }
  return Potential(g.alphabet(), std::move(k));
}

// ---------------------------------------------------------------------------
// Consistency checks

/// |gamma_D(xi|w)/gamma_D(zeta|w) - gamma_L(xi w_{L\D}|w)/gamma_L(zeta w_{L\D}|w)|.
inline double bar_moving_residual(const Specification& g, Window delta, Window lambda, const Pattern& xi,
                                  const Pattern& zeta, const Config& w, double tol = kDefaultTol,
                                  const Budget& budget = {}) {
  require(lambda.contains(delta), ErrorCode::InvalidArgument, "bar moving needs Delta inside Lambda");
  require(xi.window == delta && zeta.window == delta, ErrorCode::InvalidArgument, "patterns must live on Delta");
  const std::size_t k = g.alphabet().size();
  KernelTable td = kernel_table(g, delta, w, tol, budget);
  KernelTable tl = kernel_table(g, lambda, w, tol, budget);
  const Pattern outer = w.restrict(lambda);
  auto lam_index = [&](const Pattern& p) {
    std::vector<Letter> l = outer.letters;
    for (Site i = delta.lo; i <= delta.hi; ++i) l[static_cast<std::size_t>(i - lambda.lo)] = p.at(i);
    return word_index(l, k);
  };
  const double lhs = std::exp(td.log_prob[word_index(xi.letters, k)] - td.log_prob[word_index(zeta.letters, k)]);
  const double rhs = std::exp(tl.log_prob[lam_index(xi)] - tl.log_prob[lam_index(zeta)]);
  return std::abs(lhs - rhs);
}

/// |gamma_L(p|w) - (gamma_L gamma_V)(p|w)|, the composition summed exactly.
inline double consistency_residual(const Specification& g, Window v, Window lambda, const Pattern& p,
                                   const Config& w, double tol = kDefaultTol, const Budget& budget = {}) {
  require(lambda.contains(v), ErrorCode::InvalidArgument, "consistency needs V inside Lambda");
  require(p.window == lambda, ErrorCode::InvalidArgument, "pattern must live on Lambda");
  const std::size_t k = g.alphabet().size();
  KernelTable tl = kernel_table(g, lambda, w, tol, budget);
  const double direct = std::exp(tl.log_prob[word_index(p.letters, k)]);
  // gamma_V(p_V | p_{L\V} w) times the gamma_L-mass of patterns agreeing with p off V.
  KernelTable tv = kernel_table(g, v, w.with(p), tol, budget);
  const double inner = std::exp(tv.log_prob[word_index(p.restrict(v).letters, k)]);
  NeumaierSum mass;
  std::vector<Letter> l = p.letters;
  for_each_word(
      k, static_cast<std::size_t>(v.size()),
      [&](std::span<const Letter> x) {
        for (Site i = v.lo; i <= v.hi; ++i)
          l[static_cast<std::size_t>(i - lambda.lo)] = x[static_cast<std::size_t>(i - v.lo)];
        mass.add(std::exp(tl.log_prob[word_index(l, k)]));
      },
      budget);
  return std::abs(direct - inner * mass.value());
}

struct SpecPressure {
  std::vector<double> terms;  // n = 1 .. n_max
  double limit = 0.0;
};

/// -(1/|L_n|) log gamma_{L_n}(a|w) for n = 1..n_max, with the limit
/// extrapolated by fitting c0 + c1/n to the last three terms.
inline SpecPressure spec_pressure(const Specification& g, Site n_max, const Config& w, double tol = kDefaultTol,
                                  const Budget& budget = {}) {
  require(n_max >= 1, ErrorCode::InvalidArgument, "n_max must be >= 1");
  pattern_count(g.alphabet().size(), 2 * n_max + 1, budget);
  SpecPressure out;
  for (Site n = 1; n <= n_max; ++n) {
    std::vector<double> lw;
    detail::for_each_log_weight(g, centered_window(n), w, tol, budget,
                                [&](std::span<const Letter>, EvalResult r) { lw.push_back(r.value); });
    // The a-pattern has log weight 0, so -log gamma(a|w) = log Z.
    out.terms.push_back(log_sum_exp(lw) / static_cast<double>(2 * n + 1));
  }
  const std::size_t m = std::min<std::size_t>(3, out.terms.size());
  if (m < 2) {
    out.limit = out.terms.back();
  } else {
    std::vector<double> x, y;
    for (std::size_t i = out.terms.size() - m; i < out.terms.size(); ++i) {
      x.push_back(static_cast<double>(i + 1));
      y.push_back(out.terms[i]);
    }
    out.limit = fit_inverse_intercept(x, y);
  }
  return out;
}

/// (1/n) log of gamma(s|w)/gamma(a|w) * gamma(a|e)/gamma(s|e) on [0, n].
inline double kernel_ratio_probe(const Specification& g, const Pattern& sigma, const Config& w, const Config& e,
                                 double tol = kDefaultTol) {
  const double d = log_weight(g, sigma, w, tol).value - log_weight(g, sigma, e, tol).value;
  return d / static_cast<double>(sigma.window.size() - 1);
}

struct GapReport {
  double gap = 0.0;
  double bound = 0.0;
  bool holds() const { return gap <= bound + 1e-12 * (1.0 + bound); }
};

/// |sum_{i in L_n} phi(S^i s) + H_{L_n}(s_{L_n} e_{L_n^c})| against
/// sum_{i in L_n} sum_{V ni i, V not inside L_n} ||Phi_V||, phi built from Phi.
inline GapReport hamiltonian_birkhoff_gap(const Interaction& phi, Site n, const Config& sigma, const Config& eta,
                                          double tol = kDefaultTol) {
  require(n >= 0, ErrorCode::InvalidArgument, "n must be >= 0");
  const Window lam = centered_window(n);
  const Potential pot = potential_from_interaction(phi);
  NeumaierSum lhs;
  for (Site i = -n; i <= n; ++i) lhs.add(pot.eval_at(sigma, i, tol).value);
  lhs.add(hamiltonian(phi, lam, eta.with(sigma.restrict(lam)), tol).value);
  GapReport out;
  out.gap = std::abs(lhs.value());
  NeumaierSum bound;
  for (Site i = -n; i <= n; ++i) {
    for (const auto& g : phi.generators()) {
      const double norm = g.sup_norm();
      for (Site s : g.sites) {
        const Site t = i - s;  // translate placing generator site s at i
        bool inside = true;
        for (Site u : g.sites) inside = inside && lam.contains(u + t);
        if (!inside) bound.add(norm);
      }
    }
    if (const auto& t = phi.tail(); t && t->beta != 0.0) {
      const double b = std::abs(t->beta);
      bound.add(b * power_tail_sum(t->alpha, static_cast<double>(std::max(t->from, n - i + 1))).value);
      bound.add(b * power_tail_sum(t->alpha, static_cast<double>(std::max(t->from, i + n + 1))).value);
    }
  }
  out.bound = bound.value();
  return out;
}

}  // namespace gibbskit
