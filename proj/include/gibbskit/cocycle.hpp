#pragma once

#include <cmath>
#include <initializer_list>
#include <limits>
#include <vector>

#include "gibbskit/potential.hpp"

namespace gibbskit {

struct CocycleValue {
  double value = 0.0;
  double error = 0.0;
  Site n_used = 0;
};

enum class FlipOrder { LeftToRight, RightToLeft };

struct RhoOptions {
  double tol = kDefaultTol;
  Site radius_cap = 1'000'000;
  FlipOrder order = FlipOrder::LeftToRight;
};

/// sum_{i=-n}^{n} [phi(S^i w^b) - phi(S^i w^a)], w^x having x at site 0.
inline EvalResult rho_n_single_site(const Potential& phi, const Config& w, Letter a, Letter b, Site n,
                                    double tol = kDefaultTol) {
  require(n >= 0, ErrorCode::InvalidArgument, "radius must be >= 0");
  NeumaierSum s;
  double err = 0.0;
  for (Site i = -n; i <= n; ++i) {
    EvalResult d = phi.flip_delta(w, 0, a, b, i, tol / static_cast<double>(2 * n + 1));
    s.add(d.value);
    err += d.error;
  }
  return {s.value(), err};
}

/// Limit of the single-site sums at site j: sum over all i of
/// phi(S^i c^b) - phi(S^i c^a). Finite range is summed exactly; otherwise the
/// radius doubles until successive estimates agree within tol. When the kind
/// has a closed-form left tail, the estimate at radius n already includes it.
template <class C>
CocycleValue rho_flip(const Potential& phi, const C& c, Site j, Letter a, Letter b, double tol = kDefaultTol,
                      Site radius_cap = 1'000'000) {
  if (a == b) return {};
  if (auto r = phi.range()) {
    NeumaierSum s;
    double err = 0.0;
    for (Site i = j - *r + 1; i <= j; ++i) {
      EvalResult d = phi.flip_delta(c, j, a, b, i, tol);
      s.add(d.value);
      err += d.error;
    }
    return {s.value(), err, *r - 1};
  }
  NeumaierSum partial;
  double eval_err = 0.0;
  auto add_range = [&](Site from, Site to) {
    for (Site i = from; i <= to; ++i) {
      EvalResult d = phi.flip_delta(c, j, a, b, i, tol);
      partial.add(d.value);
      eval_err += d.error;
    }
  };
  auto estimate = [&](Site n) {
    EvalResult e{partial.value(), eval_err};
    if (auto t = phi.flip_left_tail(c, j, a, b, n)) e += *t;
    return e;
  };
  Site n = 1;
  add_range(j - n, j);
  EvalResult prev = estimate(n);
  while (true) {
    const Site n2 = 2 * n;
    require(n2 <= radius_cap, ErrorCode::NonConvergent,
            "single-site cocycle sum did not settle within the radius cap");
    add_range(j - n2, j - n - 1);
    EvalResult next = estimate(n2);
    const double gap = std::abs(next.value - prev.value);
    if (gap <= tol) return {next.value, next.error + gap, n2};
    prev = next;
    n = n2;
  }
}

/// rho(xi, eta) = lim sum_i [phi(S^i xi) - phi(S^i eta)], evaluated as a chain
/// of single-site changes taking xi to eta.
inline CocycleValue rho(const Potential& phi, const Config& xi, const Config& eta, const RhoOptions& opt = {}) {
  require(opt.tol > 0, ErrorCode::InvalidArgument, "tol must be positive");
  std::vector<Site> diff = difference_sites(xi, eta);
  if (diff.empty()) return {};
  if (opt.order == FlipOrder::RightToLeft) std::reverse(diff.begin(), diff.end());
  const Window cover(std::min(diff.front(), diff.back()), std::max(diff.front(), diff.back()));
  Frame f(xi, cover);
  const double per = opt.tol / static_cast<double>(diff.size());
  CocycleValue out;
  NeumaierSum s;
  for (Site j : diff) {
    const Letter from = f.at(j);
    const Letter to = eta.at(j);
    // The frame holds the current configuration; its value at j is the xi side.
    CocycleValue step = rho_flip(phi, f, j, to, from, per, opt.radius_cap);
    s.add(step.value);
    out.error += step.error;
    out.n_used = std::max(out.n_used, step.n_used);
    f.set(j, to);
  }
  out.value = s.value();
  return out;
}

struct CocycleResiduals {
  double chain = 0.0;
  double shift = 0.0;
  /// Summed error bounds of the rho values entering each residual.
  double chain_bound = 0.0;
  double shift_bound = 0.0;
};

/// |rho(xi,zeta) - rho(xi,eta) - rho(eta,zeta)| and |rho(xi,eta) - rho(S xi, S eta)|.
inline CocycleResiduals cocycle_residuals(const Potential& phi, const Config& xi, const Config& eta,
                                          const Config& zeta, const RhoOptions& opt = {}) {
  CocycleValue xz = rho(phi, xi, zeta, opt);
  CocycleValue xe = rho(phi, xi, eta, opt);
  CocycleValue ez = rho(phi, eta, zeta, opt);
  CocycleValue sxe = rho(phi, shift(xi, 1), shift(eta, 1), opt);
  // Truncation bounds are zero for exact kinds, so the bounds also carry a
  // floating-point rounding allowance proportional to the magnitudes involved.
  auto rounding = [](std::initializer_list<double> v) {
    double m = 1.0;
    for (double x : v) m += std::abs(x);
    return 64.0 * std::numeric_limits<double>::epsilon() * m;
  };
  CocycleResiduals out;
  out.chain = std::abs(xz.value - xe.value - ez.value);
  out.chain_bound = xz.error + xe.error + ez.error + rounding({xz.value, xe.value, ez.value});
  out.shift = std::abs(xe.value - sxe.value);
  out.shift_bound = xe.error + sxe.error + rounding({xe.value, sxe.value});
  return out;
}

}  // namespace gibbskit
