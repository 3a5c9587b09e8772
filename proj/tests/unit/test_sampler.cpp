#include <catch_amalgamated.hpp>

#include "gibbskit/sampler.hpp"
#include "gibbskit/transfer.hpp"

using namespace gibbskit;
using Catch::Approx;

namespace {

const Alphabet kSpins = Alphabet::spins();

void check_within_3_sigma(double freq, double p, std::size_t n) {
  const double sigma = std::sqrt(p * (1 - p) / static_cast<double>(n));
  CHECK(std::abs(freq - p) <= 3 * sigma);
}

}  // namespace

TEST_CASE("product specifications", "[sampler]") {
  const Alphabet two = Alphabet::letters(2);
  HeatBathOptions opt;
  opt.burn_in = 10;
  opt.sweeps = 100000;
  opt.thin = 1;
  opt.seed = 5;
  const auto flat = heat_bath_run(Specification::from_interaction(Interaction(two)), Window(0, 0), Config::constant(0), opt);
  REQUIRE(flat.samples.size() == 100000);
  std::size_t ones = 0;
  for (const auto& s : flat.samples) ones += s.letters[0];
  check_within_3_sigma(static_cast<double>(ones) / 1e5, 0.5, 100000);

  const auto ind = heat_bath_run(Specification::independent(two, {1.0 / 3, 2.0 / 3}), Window(0, 2), Config::constant(0), opt);
  const auto fr = empirical_cylinders(ind.samples, Window(1, 1));
  check_within_3_sigma(fr.freq.at({1}), 2.0 / 3, fr.total);
}

TEST_CASE("site tables draw the single-site law", "[sampler]") {
  const Specification g = Specification::from_cocycle(finite_range_potential(Alphabet::letters(3), 3, [] {
    std::vector<double> t(27);
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = std::sin(1.7 * double(i));
    return t;
  }()));
  const Site R = *g.dependence_radius();
  detail::SiteTable table(g, R, kDefaultTol);
  for (const Pattern& nb : enumerate_patterns(g.alphabet(), Window(-R, R))) {
    Frame f(Config::constant(0), Window(-R, R));
    f.set(Window(-R, R), nb.letters);
    const auto lp = g.single_site_log_probs(f, 0);
    double lo = 0;
    for (Letter x = 0; x < 3; ++x) {
      const double p = std::exp(lp[x]);
      CHECK(table.draw([&](Site i) { return f.at(i); }, 0, lo + 0.5 * p) == x);
      lo += p;
    }
  }
}

TEST_CASE("a full sweep preserves the finite-volume kernel", "[sampler]") {
  // One systematic sweep of heat-bath updates on [0,3], written as a 16x16
  // matrix from the single-site laws, leaves gamma_V invariant.
  const Specification g = Specification::from_interaction(nn_ising_interaction(0.6, 0.25));
  const Window vol(0, 3);
  const Config b = Config::constant(1).with(-1, 0);
  const KernelTable target = kernel_table(g, vol, b);
  const std::size_t n = target.log_prob.size();
  std::vector<double> dist(n);
  for (std::size_t s = 0; s < n; ++s) dist[s] = std::exp(target.log_prob[s]);
  for (Site site = vol.lo; site <= vol.hi; ++site) {
    std::vector<double> next(n, 0.0);
    for (std::size_t s = 0; s < n; ++s) {
      const auto w = word_from_index(s, 2, 4);
      const Config c = b.with(Pattern(vol, w));
      const auto lp = g.single_site_log_probs(c, site);
      for (Letter x = 0; x < 2; ++x) {
        auto w2 = w;
        w2[static_cast<std::size_t>(site)] = x;
        next[word_index(w2, 2)] += dist[s] * std::exp(lp[x]);
      }
    }
    dist.swap(next);
  }
  for (std::size_t s = 0; s < n; ++s) CHECK(dist[s] == Approx(std::exp(target.log_prob[s])).margin(1e-14));
}

TEST_CASE("Ising center marginals", "[sampler]") {
  const Specification g = Specification::from_interaction(nn_ising_interaction(0.5, 0.0));
  const Window vol(0, 15), sub(7, 7);
  HeatBathOptions opt;
  opt.sweeps = 16 * 20000;
  opt.seed = 9;
  const auto run = heat_bath_run(g, vol, Config::constant(1), opt);
  CHECK(run.samples.size() == 20000);
  CHECK(run.state.sweeps_done == 1000 + 16 * 20000);
  const auto exact = finite_volume_marginals(g, vol, Config::constant(1), sub);
  const auto fr = empirical_cylinders(run.samples, sub, 1);
  check_within_3_sigma(fr.freq.at({1}), exact[1], fr.total);
  // The + boundary biases the center toward +.
  CHECK(exact[1] > 0.5);
}

TEST_CASE("runs are reproducible per seed and chain", "[sampler]") {
  const Specification g = Specification::from_interaction(nn_ising_interaction(0.5, 0.0));
  HeatBathOptions opt;
  opt.sweeps = 50;
  opt.burn_in = 5;
  opt.thin = 1;
  opt.seed = 3;
  const auto a = heat_bath_run(g, Window(0, 9), Config::constant(1), opt);
  const auto b = heat_bath_run(g, Window(0, 9), Config::constant(1), opt);
  CHECK(a.samples == b.samples);
  opt.chain = 1;
  const auto c = heat_bath_run(g, Window(0, 9), Config::constant(1), opt);
  CHECK_FALSE(a.samples == c.samples);
}

TEST_CASE("long-range specifications sample without a table", "[sampler]") {
  const Specification g = Specification::from_cocycle(dyson_potential(0.0, 0.3, 3.0));
  HeatBathOptions opt;
  opt.sweeps = 20000;
  opt.burn_in = 100;
  opt.thin = 1;
  const auto run = heat_bath_run(g, Window(0, 0), Config::constant(1), opt);
  const auto exact = kernel_table(g, Window(0, 0), Config::constant(1));
  check_within_3_sigma(empirical_cylinders(run.samples, Window(0, 0)).freq.at({1}), std::exp(exact.log_prob[1]), 20000);
}

TEST_CASE("empirical cylinders", "[sampler]") {
  const std::vector<Pattern> one = {Pattern(Window(0, 4), {0, 1, 1, 0, 1})};
  const auto f = empirical_cylinders(one, Window(1, 3));
  REQUIRE(f.freq.size() == 1);
  CHECK(f.freq.at({1, 1, 0}) == 1.0);

  std::vector<Pattern> many;
  for (int t = 0; t < 7; ++t) many.emplace_back(Window(0, 2), std::vector<Letter>{Letter(t % 2), Letter(t % 3 == 0), 0});
  double s = 0;
  for (const auto& [w, p] : empirical_cylinders(many, Window(0, 1)).freq) s += p;
  CHECK(s == 1.0);

  try {
    empirical_cylinders(one, Window(0, 2), 1);
    FAIL("expected MarginViolation");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::MarginViolation);
  }
}
