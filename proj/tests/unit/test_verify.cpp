#include <catch_amalgamated.hpp>

#include <random>

#include "gibbskit/verify.hpp"

using namespace gibbskit;
using Catch::Approx;

namespace {

const Alphabet kSpins = Alphabet::spins();

double ising_mu(std::span<const Letter> w, double beta) {
  const double lambda = 2 * std::cosh(beta);
  double p = 0.5;
  for (std::size_t i = 0; i + 1 < w.size(); ++i) p *= std::exp(beta * kSpins.spin(w[i]) * kSpins.spin(w[i + 1])) / lambda;
  return p;
}

}  // namespace

TEST_CASE("Bowen ratios in exact cases", "[verify]") {
  for (std::size_t k : {2u, 3u}) {
    const Potential flat = constant_potential(Alphabet::letters(k), 0.0);
    const auto r = bowen_report(MarkovMeasure::uniform(Alphabet::letters(k)), flat, std::log(double(k)), k == 2 ? 10 : 7);
    for (const auto& row : r.rows) {
      CHECK(row.min_ratio == Approx(1.0).margin(1e-12));
      CHECK(row.max_ratio == Approx(1.0).margin(1e-12));
      CHECK(row.C == Approx(1.0).margin(1e-12));
    }
  }
  const Alphabet two = Alphabet::letters(2);
  const auto b = bowen_report(MarkovMeasure::bernoulli(two, {1.0 / 3, 2.0 / 3}),
                              log_probability_potential(two, {1.0 / 3, 2.0 / 3}), 0.0, 12);
  for (const auto& row : b.rows) {
    CHECK(row.min_ratio == Approx(1.0).margin(1e-10));
    CHECK(row.max_ratio == Approx(1.0).margin(1e-10));
  }
}

TEST_CASE("Bowen ratios for the Ising chain", "[verify]") {
  const double beta = 0.5, lambda = 2 * std::cosh(beta);
  const Potential phi = ising_potential(beta, 0.0);
  const MarkovMeasure mu = equilibrium_markov(phi);
  const auto r = bowen_report(mu, phi, std::log(lambda), 12, Extension::AFill, Site{6});
  // With a + fill the ratio is lambda/2 * exp(-beta sigma_{n-1}).
  for (const auto& row : r.rows) {
    CHECK(row.min_ratio == Approx(0.5 * lambda * std::exp(-beta)).epsilon(1e-12));
    CHECK(row.max_ratio == Approx(0.5 * lambda * std::exp(beta)).epsilon(1e-12));
  }
  CHECK(std::abs(r.slope) <= 1e-3);
  // Periodic extension closes the last bond onto sigma_0.
  const auto p = bowen_report(mu, phi, std::log(lambda), 10, Extension::Periodic);
  for (const auto& row : p.rows) {
    CHECK(row.min_ratio == Approx(0.5 * lambda * std::exp(-beta)).epsilon(1e-12));
    // For n = 1 the closing bond is sigma_0 sigma_0.
    CHECK(row.max_ratio == Approx(0.5 * lambda * std::exp(row.n == 1 ? -beta : beta)).epsilon(1e-12));
  }
  // A pressure off by delta makes log C_n grow with slope delta.
  for (double delta : {0.1, -0.05}) {
    const auto off = bowen_report(mu, phi, std::log(lambda) + delta, 12);
    CHECK(off.slope == Approx(std::abs(delta)).margin(1e-9));
  }
}

TEST_CASE("weak cohomology, finite range", "[verify]") {
  const Potential flat = constant_potential(kSpins, 0.0);
  const std::vector<MarkovMeasure> taus = {
      MarkovMeasure::uniform(kSpins), MarkovMeasure::bernoulli(kSpins, {1.0 / 3, 2.0 / 3}),
      MarkovMeasure::from_transitions(kSpins, 1, {{0.3, 0.7}, {0.6, 0.4}})};
  const auto z = weak_cohomology_check(flat, taus, 1e-12);
  for (double d : z.deltas) CHECK(d == Approx(0.0).margin(1e-15));

  const double beta = 0.5, h = 0.1;
  const auto r = weak_cohomology_check(ising_potential(beta, h), taus, 1e-8);
  CHECK(r.passed);
  CHECK(r.method == "exact");
  for (std::size_t t = 0; t < taus.size(); ++t) {
    // phi_gamma(w) = (w_0 - 1)(beta (1 + w_1) + h) with the + anchor on the left.
    double by_hand = 0;
    for (Letter a = 0; a < 2; ++a)
      for (Letter b = 0; b < 2; ++b) {
        const std::vector<Letter> w{a, b};
        const double s0 = kSpins.spin(a), s1 = kSpins.spin(b);
        by_hand += cylinder_prob(taus[t], w) * ((s0 - 1) * (beta * (1 + s1) + h) - (beta * s0 * s1 + h * s0));
      }
    CHECK(r.deltas[t] == Approx(by_hand).margin(1e-14));
    CHECK(r.deltas[t] == Approx(-0.6).margin(1e-8));
  }
}

TEST_CASE("weak cohomology, long range", "[verify]") {
  const std::vector<MarkovMeasure> taus = {MarkovMeasure::uniform(kSpins),
                                           MarkovMeasure::bernoulli(kSpins, {1.0 / 3, 2.0 / 3})};
  const auto r = weak_cohomology_check(dyson_potential(0.0, 0.3, 3.0), taus, 1e-3, Budget{}, 12, 10);
  CHECK(r.method == "cylinder+extrapolation");
  for (double d : r.deltas) CHECK(d == Approx(-0.3 * riemann_zeta(3.0).value).margin(1e-3));
  CHECK(r.truncation_bound > 0.0);
}

TEST_CASE("relative entropy curves", "[verify]") {
  const Alphabet two = Alphabet::letters(2);
  const MarkovMeasure u = MarkovMeasure::uniform(two);
  const MarkovMeasure b = MarkovMeasure::bernoulli(two, {1.0 / 3, 2.0 / 3});
  const Potential pb = log_probability_potential(two, {1.0 / 3, 2.0 / 3});
  const auto same = relative_entropy_curve(b, b, pb, 0.0, 8);
  for (const auto& row : same.rows) CHECK(row.H == Approx(0.0).margin(1e-15));
  const auto iid = relative_entropy_curve(u, b, pb, 0.0, 10);
  for (const auto& row : iid.rows) CHECK(row.H_per_n == Approx(0.5 * std::log(9.0 / 8)).margin(1e-14));
  CHECK(iid.predicted == Approx(0.5 * std::log(9.0 / 8)).margin(1e-14));

  const Potential phi = ising_potential(0.5, 0.0);
  const MarkovMeasure mu = equilibrium_markov(phi);
  const MarkovMeasure us = MarkovMeasure::uniform(kSpins);
  const auto c = relative_entropy_curve(us, mu, phi, pressure(phi), 14);
  CHECK(c.predicted == Approx(std::log(2 * std::cosh(0.5)) - std::log(2.0)).margin(1e-12));
  for (const auto& row : c.rows) {
    if (row.n > 6) continue;
    double h = 0;
    for_each_word(2, static_cast<std::size_t>(row.n), [&](std::span<const Letter> w) {
      const double t = std::pow(0.5, double(row.n));
      h += t * std::log(t / ising_mu(w, 0.5));
    });
    CHECK(row.H == Approx(h).margin(1e-13));
  }
  CHECK(c.rows.back().diff == Approx(c.predicted).margin(1e-3));

  const MarkovMeasure degenerate{kSpins, 1, {0.5, 0.5}, {{0.5, 0.5}, {0.5, 0.5}}};
  MarkovMeasure null_mu = degenerate;
  null_mu.P = {{1.0, 0.0}, {0.5, 0.5}};
  null_mu.pi = {1.0, 0.0};
  try {
    relative_entropy_curve(us, null_mu, phi, 0.0, 3);
    FAIL("expected NonAbsolutelyContinuous");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NonAbsolutelyContinuous);
  }
}

TEST_CASE("round trips", "[verify]") {
  const Specification ind = Specification::independent(Alphabet::letters(3), {0.2, 0.5, 0.3});
  CHECK(roundtrip_residual(ind, Window(0, 2), 3).residual <= 1e-12);
  const Specification zero = Specification::from_interaction(Interaction(kSpins));
  CHECK(roundtrip_residual(zero, Window(0, 2), 3).residual == 0.0);
  const auto ising = roundtrip_residual(Specification::from_interaction(nn_ising_interaction(0.5, 0.0)), Window(0, 3), 6);
  CHECK(ising.residual <= 1e-9);
  CHECK(ising.comparisons > 0);

  std::vector<double> t(27);
  std::mt19937_64 g(71);
  std::normal_distribution<double> nd(0.0, 0.6);
  for (auto& x : t) x = nd(g);
  const Specification three = Specification::from_cocycle(finite_range_potential(Alphabet::letters(3), 3, t));
  CHECK(roundtrip_residual(three, Window(0, 1), 3).residual <= 1e-9);
  // Single-site table of the Ising chain: log weight beta x (w_-1 + w_1) + h x.
  std::vector<double> lw;
  for_each_word(2, 3, [&](std::span<const Letter> w) {
    const double x = kSpins.spin(w[1]);
    lw.push_back(0.7 * x * (kSpins.spin(w[0]) + kSpins.spin(w[2])) - 0.2 * x);
  });
  const Specification ss = Specification::single_site(kSpins, 1, lw);
  CHECK(roundtrip_residual(ss, Window(0, 2), 4).residual <= 1e-9);
}
