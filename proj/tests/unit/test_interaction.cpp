#include <catch_amalgamated.hpp>

#include <random>
#include <set>

#include "gibbskit/specification.hpp"

using namespace gibbskit;
using Catch::Approx;

namespace {

const Alphabet kSpins = Alphabet::spins();

/// H by explicit scan over every translate with at least one site in a wide
/// range, keeping those meeting lambda.
double brute_hamiltonian(const Interaction& phi, Window lambda, const Config& c) {
  double h = 0;
  for (const auto& g : phi.generators())
    for (Site t = lambda.lo - 50; t <= lambda.hi + 50; ++t) {
      bool meets = false;
      for (Site s : g.sites) meets = meets || lambda.contains(s + t);
      if (meets) h += phi.term(g, c, t);
    }
  return h;
}

Config random_spins(std::mt19937_64& rng, Letter bg, Site radius = 8) {
  std::bernoulli_distribution coin(0.5);
  Config c = Config::constant(bg);
  for (Site i = -radius; i <= radius; ++i) c = c.with(i, coin(rng) ? 1 : 0);
  return c;
}

}  // namespace

TEST_CASE("Hamiltonian of the Ising interaction", "[interaction]") {
  CHECK(hamiltonian(Interaction(kSpins), Window(-3, 3), Config::constant(1)).value == 0.0);
  const Interaction ising = nn_ising_interaction(0.5, 0.1);
  CHECK(hamiltonian(ising, Window(0, 1), Config::constant(1)).value == Approx(-1.7).epsilon(1e-15));

  std::mt19937_64 rng(31);
  const Generator odd{{-1, 0, 2}, {0.3, -0.2, 0.5, 0.1, -0.7, 0.25, 0.6, -0.4}};
  const Interaction mixed(kSpins, {nn_ising_interaction(0.5, 0.1).generators()[0], odd});
  for (int t = 0; t < 100; ++t) {
    const Config c = random_spins(rng, 1);
    for (const Interaction* phi : {&ising, &mixed}) {
      CHECK(hamiltonian(*phi, Window(-2, 3), c).value == Approx(brute_hamiltonian(*phi, Window(-2, 3), c)).margin(1e-13));
      // Enlarging [0,0] to [0,1] adds exactly the sets meeting {1} but not {0}.
      double extra = 0;
      for (const auto& g : phi->generators())
        for (Site t = -10; t <= 10; ++t) {
          std::set<Site> v;
          for (Site s : g.sites) v.insert(s + t);
          if (v.count(1) && !v.count(0)) extra += phi->term(g, c, t);
        }
      const double d = hamiltonian(*phi, Window(0, 1), c).value - hamiltonian(*phi, Window(0, 0), c).value;
      CHECK(d == Approx(extra).margin(1e-13));
    }
  }
}

TEST_CASE("Hamiltonian with a pair tail", "[interaction]") {
  const Interaction dyson = dyson_interaction(0.2, 0.6, 2.5);
  std::mt19937_64 rng(32);
  for (int t = 0; t < 20; ++t) {
    const Config c = random_spins(rng, t % 2 ? 1 : 0);
    const Window lam(-2, 2);
    // Pairs {x, x+n} and {x-n, x} (x-n outside) up to distance M, then the
    // constant background beyond by Euler-Maclaurin.
    const Site M = 20000;
    const double Md = static_cast<double>(M);
    const double tail = std::pow(Md, -1.5) / 1.5 - 0.5 * std::pow(Md, -2.5) + 2.5 / 12 * std::pow(Md, -3.5);
    const double bg = kSpins.spin(c.right_background().at(0));
    double h = 0;
    for (Site x = lam.lo; x <= lam.hi; ++x) {
      const double vx = kSpins.spin(c.at(x));
      h += -0.2 * vx;
      for (Site n = 1; n <= M; ++n) {
        const double w = std::pow(static_cast<double>(n), -2.5);
        h += -0.6 * vx * kSpins.spin(c.at(x + n)) * w;
        if (!lam.contains(x - n)) h += -0.6 * vx * kSpins.spin(c.at(x - n)) * w;
      }
      h += -0.6 * vx * bg * 2 * tail;
    }
    CHECK(hamiltonian(dyson, lam, c).value == Approx(h).margin(1e-10));
  }
}

TEST_CASE("uac norms", "[interaction]") {
  const auto e = uac_norms(Interaction(kSpins));
  CHECK(e.uac == 0.0);
  CHECK(e.diam_weighted == 0.0);
  const auto n = uac_norms(nn_ising_interaction(0.5, 0.1));
  CHECK(n.uac == Approx(1.1).epsilon(1e-15));
  CHECK(n.diam_weighted == Approx(0.5).epsilon(1e-15));

  std::vector<Generator> pairs;
  double expected = 0;
  for (Site m = 1; m <= 10; ++m) {
    const double w = std::pow(static_cast<double>(m), -3.0);
    pairs.push_back({{0, m}, {-w, w, w, -w}});
    expected += static_cast<double>(m) * w;
  }
  CHECK(uac_norms(Interaction(kSpins, pairs)).diam_weighted == Approx(expected).epsilon(1e-14));

  const auto tail = uac_norms(dyson_interaction(0.0, 1.0, 3.0));
  CHECK(tail.uac == Approx(2 * riemann_zeta(3.0).value).epsilon(1e-12));
  CHECK(tail.diam_weighted == Approx(riemann_zeta(2.0).value).epsilon(1e-12));
}

TEST_CASE("interaction validation", "[interaction]") {
  auto code_of = [](auto&& make) {
    try {
      make();
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::ModelError;
  };
  CHECK(code_of([] { Interaction(kSpins, {{{1, 2}, {0, 0, 0, 0}}}); }) == ErrorCode::InvalidArgument);
  CHECK(code_of([] { Interaction(kSpins, {{{0, 0}, {0, 0, 0, 0}}}); }) == ErrorCode::InvalidArgument);
  CHECK(code_of([] { Interaction(kSpins, {{{0, 1}, {0, 0}}}); }) == ErrorCode::InvalidArgument);
  CHECK(code_of([] { Interaction(Alphabet::letters(2), {}, PairTail{1, 2, 1}); }) == ErrorCode::AlphabetMismatch);
  CHECK(code_of([] { Specification::from_interaction(Interaction(kSpins, {}, PairTail{1, 1.0, 1})); }) ==
        ErrorCode::NotUAC);
  // Generators given relative to a negative site are re-anchored.
  const Interaction shifted(kSpins, {{{-1, 0}, {1, 2, 3, 4}}});
  CHECK(shifted.generators()[0].sites == std::vector<Site>{0, 1});
}

TEST_CASE("Birkhoff sum against Hamiltonian", "[interaction]") {
  const auto empty = hamiltonian_birkhoff_gap(Interaction(kSpins), 3, Config::constant(0), Config::constant(1));
  CHECK(empty.gap == 0.0);
  CHECK(empty.bound == 0.0);

  const Interaction ising = nn_ising_interaction(0.5, 0.0);
  for (Site n : {3, 5, 8}) CHECK(hamiltonian_birkhoff_gap(ising, n, Config::constant(1), Config::constant(1)).bound == Approx(1.0));

  // Exterior equal to sigma: only the left boundary bond is unmatched.
  std::mt19937_64 rng(33);
  for (int t = 0; t < 50; ++t) {
    const Config s = random_spins(rng, 1, 12);
    const auto r = hamiltonian_birkhoff_gap(ising, 5, s, s);
    CHECK(r.holds());
    CHECK(r.gap == Approx(std::abs(0.5 * kSpins.spin(s.at(-6)) * kSpins.spin(s.at(-5)))));
  }
}

TEST_CASE("free exterior can double the boundary-bond count", "[interaction]") {
  // sigma all +, eta all -: the Birkhoff sum sees the right bond as +beta and
  // the Hamiltonian sees both boundary bonds as +beta, so the gap is 3 beta.
  const Interaction ising = nn_ising_interaction(0.5, 0.0);
  const auto r = hamiltonian_birkhoff_gap(ising, 5, Config::constant(1), Config::constant(0));
  CHECK(r.gap == Approx(1.5).epsilon(1e-14));
  CHECK(r.bound == Approx(1.0).epsilon(1e-14));
  CHECK_FALSE(r.holds());

  // Each unmatched set enters at most twice, so twice the bound always holds.
  std::mt19937_64 rng(34);
  for (int t = 0; t < 200; ++t) {
    const Config s = random_spins(rng, t % 2 ? 1 : 0, 10);
    const Config e = random_spins(rng, t % 3 ? 1 : 0, 10);
    const auto g = hamiltonian_birkhoff_gap(ising, 4, s, e);
    CHECK(g.gap <= 2 * g.bound + 1e-12);
  }
}
