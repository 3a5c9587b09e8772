#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <vector>

#include "gibbskit/specification.hpp"

namespace gibbskit {

/// splitmix64 finalizer; seeds chain c of a run with splitmix64(seed + c).
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

struct ChainState {
  Window volume;
  std::vector<Letter> letters;
  Config boundary;
  std::uint64_t rng_seed = 0;
  std::uint64_t sweeps_done = 0;
};

struct HeatBathOptions {
  std::uint64_t sweeps = 1000;   ///< sweeps after burn-in
  std::uint64_t burn_in = 1000;
  std::uint64_t thin = 0;        ///< 0 means the volume length
  std::uint64_t seed = 0;
  std::uint64_t chain = 0;       ///< stream index within a multi-chain run
  double tol = kDefaultTol;
};

struct HeatBathRun {
  std::vector<Pattern> samples;
  ChainState state;
};

namespace detail {

/// Cumulative single-site distributions for every neighbourhood word
/// w_{-R..R} (center letter ignored), for specifications of finite radius.
class SiteTable {
 public:
  SiteTable(const Specification& g, Site R, double tol) : k_(g.alphabet().size()), R_(R) {
    const std::size_t span = static_cast<std::size_t>(2 * R + 1);
    const std::size_t n = pattern_count(k_, static_cast<Site>(span));
    cdf_.resize(n / k_ * k_);
    Frame f(Config::constant(g.alphabet().background()), Window(-R, R));
    std::size_t row = 0;
    Odometer od(k_, span - 1);
    do {
      auto w = od.letters();
      for (Site d = -R, t = 0; d <= R; ++d) {
        if (d == 0) continue;
        f.set(d, w[static_cast<std::size_t>(t++)]);
      }
      auto lp = g.single_site_log_probs(f, 0, tol);
      double acc = 0.0;
      for (std::size_t x = 0; x < k_; ++x) {
        acc += std::exp(lp[x]);
        cdf_[row * k_ + x] = acc;
      }
      cdf_[row * k_ + k_ - 1] = 1.0;
      ++row;
    } while (od.next());
  }

  template <class At>
  Letter draw(At&& at, Site i, double u) const {
    std::size_t row = 0;
    for (Site d = -R_; d <= R_; ++d)
      if (d != 0) row = row * k_ + at(i + d);
    const double* c = &cdf_[row * k_];
    std::size_t x = 0;
    while (x + 1 < k_ && u >= c[x]) ++x;
    return static_cast<Letter>(x);
  }

 private:
  std::size_t k_;
  Site R_;
  std::vector<double> cdf_;
};

}  // namespace detail

/// Systematic left-to-right heat-bath scan of `volume` under gamma's
/// single-site kernels with the exterior frozen to `boundary`. Records the
/// volume every `thin` sweeps after burn-in.
inline HeatBathRun heat_bath_run(const Specification& g, Window volume, const Config& boundary,
                                 const HeatBathOptions& opt = {}) {
  const std::uint64_t thin = opt.thin ? opt.thin : static_cast<std::uint64_t>(volume.size());
  std::mt19937_64 rng(splitmix64(opt.seed + opt.chain));
  auto uniform = [&rng] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };

  Frame f(boundary, volume);
  auto at = [&f](Site i) { return f.at(i); };
  std::optional<detail::SiteTable> table;
  if (auto R = g.dependence_radius()) table.emplace(g, *R, opt.tol);

  auto sweep = [&] {
    for (Site i = volume.lo; i <= volume.hi; ++i) {
      const double u = uniform();
      Letter x;
      if (table) {
        x = table->draw(at, i, u);
      } else {
        auto lp = g.single_site_log_probs(f, i, opt.tol);
        double acc = 0.0;
        x = static_cast<Letter>(lp.size() - 1);
        for (std::size_t y = 0; y + 1 < lp.size(); ++y) {
          acc += std::exp(lp[y]);
          if (u < acc) {
            x = static_cast<Letter>(y);
            break;
          }
        }
      }
      f.set(i, x);
    }
  };

  HeatBathRun run;
  run.state.volume = volume;
  run.state.boundary = boundary;
  run.state.rng_seed = opt.seed;
  for (std::uint64_t s = 0; s < opt.burn_in; ++s) sweep();
  run.samples.reserve(static_cast<std::size_t>(opt.sweeps / thin));
  for (std::uint64_t s = 1; s <= opt.sweeps; ++s) {
    sweep();
    if (s % thin == 0) {
      std::vector<Letter> l;
      l.reserve(static_cast<std::size_t>(volume.size()));
      for (Site i = volume.lo; i <= volume.hi; ++i) l.push_back(f.at(i));
      run.samples.emplace_back(volume, std::move(l));
    }
  }
  run.state.sweeps_done = opt.burn_in + opt.sweeps;
  for (Site i = volume.lo; i <= volume.hi; ++i) run.state.letters.push_back(f.at(i));
  return run;
}

struct CylinderFrequencies {
  std::map<std::vector<Letter>, double> freq;
  std::map<std::vector<Letter>, std::uint64_t> counts;
  std::uint64_t total = 0;
};

/// Frequencies of the restrictions of samples to `sub`, which must stay
/// `margin` sites away from the edge of the sampled volume.
inline CylinderFrequencies empirical_cylinders(const std::vector<Pattern>& samples, Window sub, Site margin = 0) {
  require(!samples.empty(), ErrorCode::InvalidArgument, "no samples");
  const Window vol = samples.front().window;
  require(margin >= 0 && vol.size() > 2 * margin && Window(vol.lo + margin, vol.hi - margin).contains(sub),
          ErrorCode::MarginViolation, "sub-window is closer to the volume edge than the margin");
  CylinderFrequencies out;
  for (const auto& p : samples) {
    require(p.window == vol, ErrorCode::InvalidArgument, "samples live on different volumes");
    ++out.counts[p.restrict(sub).letters];
  }
  out.total = samples.size();
  for (const auto& [w, c] : out.counts) out.freq[w] = static_cast<double>(c) / static_cast<double>(out.total);
  return out;
}

}  // namespace gibbskit
