#pragma once

#include <cstdint>
#include <iostream>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "gibbskit/cocycle.hpp"
#include "gibbskit/model.hpp"
#include "gibbskit/potential.hpp"
#include "gibbskit/sampler.hpp"
#include "gibbskit/specification.hpp"
#include "gibbskit/transfer.hpp"
#include "gibbskit/verify.hpp"

namespace gibbskit::cli {

enum ExitCode : int { kOk = 0, kVerifierFailed = 1, kInputError = 2 };

inline const std::vector<std::string>& commands() {
  static const std::vector<std::string> c = {"pressure", "kernel", "cocycle",  "bowen",  "cohomology", "entropy",
                                             "roundtrip", "diagnose", "sample", "dlr", "measure"};
  return c;
}

struct RunConfig {
  std::string model_path;
  std::string command;
  std::string potential;
  std::string spec;
  std::string measure;
  std::vector<std::string> taus;
  std::optional<Site> n_max;
  std::optional<double> tol;
  std::uint64_t seed = 1;
  std::uint64_t budget = std::uint64_t{1} << 24;
  Site pad = 4;
  std::string out;
  double p_offset = 0.0;
  std::string window;
  Site radius = 6;
  Site trials = 100;
  std::optional<std::uint64_t> sweeps;
  std::uint64_t burn_in = 1000;
  std::uint64_t thin = 0;
  std::string samples_out;
};

/// Summary JSON plus an optional CSV (or JSON) report body.
struct Report {
  Json summary;
  std::string body;
  bool ok = true;
};

inline Window parse_window(const std::string& text, Window fallback) {
  if (text.empty()) return fallback;
  const auto colon = text.find(':');
  require(colon != std::string::npos, ErrorCode::InvalidArgument, "window must look like lo:hi");
  try {
    return Window(std::stoll(text.substr(0, colon)), std::stoll(text.substr(colon + 1)));
  } catch (const std::logic_error&) {
    fail(ErrorCode::InvalidArgument, "window must look like lo:hi");
  }
}

namespace detail {

inline void validate(const RunConfig& c) {
  bool known = false;
  for (const auto& k : commands()) known = known || k == c.command;
  require(known, ErrorCode::InvalidArgument, "unknown command '" + c.command + "'");
  require(!c.n_max || *c.n_max >= 1, ErrorCode::InvalidArgument, "--n-max must be >= 1");
  require(!c.tol || *c.tol > 0, ErrorCode::InvalidArgument, "--tol must be positive");
  require(c.budget > 0, ErrorCode::InvalidArgument, "--budget must be positive");
  require(c.pad >= 0, ErrorCode::InvalidArgument, "--pad must be >= 0");
  require(c.radius >= 0, ErrorCode::InvalidArgument, "--radius must be >= 0");
  require(c.trials >= 1, ErrorCode::InvalidArgument, "--trials must be >= 1");
  require(!c.sweeps || *c.sweeps >= 1, ErrorCode::InvalidArgument, "--sweeps must be >= 1");
}

/// The named measure, or the equilibrium state of phi when none is named and
/// phi has finite range.
inline MarkovMeasure measure_or_equilibrium(const Model& m, const RunConfig& c, const Potential& phi,
                                            const Budget& b) {
  if (!c.measure.empty() || !phi.range()) return m.measure(c.measure);
  return equilibrium_markov(phi, b);
}

inline Specification spec_or_cocycle(const Model& m, const RunConfig& c) {
  if (!c.spec.empty() || !m.has_potentials()) return m.specification(c.spec);
  return Specification::from_cocycle(m.potential(c.potential));
}

inline Report pressure_cmd(const Model& m, const RunConfig& c, const Budget& b) {
  const Potential& phi = m.potential(c.potential);
  const Specification g = spec_or_cocycle(m, c);
  const Site n_max = c.n_max.value_or(8);
  const double tol = c.tol.value_or(0.01);
  SpecPressure sp = spec_pressure(g, n_max, Config::constant(g.alphabet().background()), kDefaultTol, b);
  Report r;
  CsvWriter csv({"n", "term"});
  for (std::size_t i = 0; i < sp.terms.size(); ++i) csv.row(static_cast<Site>(i + 1), sp.terms[i]);
  r.body = csv.str();
  r.summary["spec_pressure_limit"] = sp.limit;
  if (phi.range()) {
    const double P = pressure(phi, b);
    const double phi_a = eval(phi, Config::constant(phi.alphabet().background())).value;
    r.summary["pressure"] = P;
    r.summary["phi_at_background"] = phi_a;
    r.summary["target"] = P - phi_a;
    r.summary["deviation"] = std::abs(sp.limit - (P - phi_a));
    r.ok = std::abs(sp.limit - (P - phi_a)) <= tol;
  }
  return r;
}

inline Report kernel_cmd(const Model& m, const RunConfig& c, const Budget& b) {
  const Specification g = spec_or_cocycle(m, c);
  const Window w = parse_window(c.window, Window(0, 0));
  KernelTable t = kernel_table(g, w, Config::constant(g.alphabet().background()), kDefaultTol, b);
  Report r;
  r.body = kernel_csv(g.alphabet(), t);
  NeumaierSum s;
  for (double lp : t.log_prob) s.add(std::exp(lp));
  r.summary["patterns"] = t.log_prob.size();
  r.summary["total_probability"] = s.value();
  return r;
}

inline Report cocycle_cmd(const Model& m, const RunConfig& c, const Budget&) {
  const Potential& phi = m.potential(c.potential);
  const Alphabet& a = phi.alphabet();
  RhoOptions opt;
  opt.tol = c.tol.value_or(kDefaultTol);
  std::mt19937_64 rng(splitmix64(c.seed));
  std::uniform_int_distribution<int> letter(0, static_cast<int>(a.size()) - 1);
  auto random_config = [&] {
    Config x = Config::constant(a.background());
    for (Site i = -4; i <= 4; ++i) x = x.with(i, static_cast<Letter>(letter(rng)));
    return x;
  };
  CsvWriter csv({"trial", "chain", "chain_bound", "shift", "shift_bound"});
  Report r;
  double worst_chain = 0, worst_shift = 0;
  for (Site t = 0; t < c.trials; ++t) {
    const Config xi = random_config(), eta = random_config(), zeta = random_config();
    CocycleResiduals res = cocycle_residuals(phi, xi, eta, zeta, opt);
    csv.row(t, res.chain, res.chain_bound, res.shift, res.shift_bound);
    worst_chain = std::max(worst_chain, res.chain);
    worst_shift = std::max(worst_shift, res.shift);
    r.ok = r.ok && res.chain <= res.chain_bound && res.shift <= res.shift_bound;
  }
  r.body = csv.str();
  r.summary["trials"] = c.trials;
  r.summary["max_chain_residual"] = worst_chain;
  r.summary["max_shift_residual"] = worst_shift;
  return r;
}

inline Report bowen_cmd(const Model& m, const RunConfig& c, const Budget& b) {
  const Potential& phi = m.potential(c.potential);
  require(phi.range().has_value(), ErrorCode::InvalidArgument, "bowen needs a finite-range potential for P");
  const MarkovMeasure mu = measure_or_equilibrium(m, c, phi, b);
  const double P = pressure(phi, b) + c.p_offset;
  const Site n_max = c.n_max.value_or(10);
  const double tol = c.tol.value_or(1e-3);
  BowenReport br = bowen_report(mu, phi, P, n_max, Extension::AFill, std::nullopt, kDefaultTol, b);
  CsvWriter csv({"n", "min_ratio", "max_ratio", "C_n"});
  for (const auto& row : br.rows) csv.row(row.n, row.min_ratio, row.max_ratio, row.C);
  Report r;
  r.body = csv.str();
  r.summary["P"] = P;
  r.summary["slope"] = br.slope;
  r.summary["fit_from"] = br.fit_from;
  r.ok = std::abs(br.slope) <= tol;
  return r;
}

inline Report cohomology_cmd(const Model& m, const RunConfig& c, const Budget& b) {
  const Potential& phi = m.potential(c.potential);
  std::vector<std::string> names = c.taus.empty() ? m.measure_names() : c.taus;
  std::vector<MarkovMeasure> taus;
  for (const auto& n : names) taus.push_back(m.measure(n));
  if (taus.empty()) {
    names = {"uniform"};
    taus.push_back(MarkovMeasure::uniform(phi.alphabet()));
  }
  const double tol = c.tol.value_or(phi.range() ? 1e-8 : 1e-4);
  CohomologyReport cr = weak_cohomology_check(phi, taus, tol, b);
  CsvWriter csv({"tau", "delta", "expected"});
  for (std::size_t i = 0; i < taus.size(); ++i) csv.row(names[i], cr.deltas[i], cr.expected);
  Report r;
  r.body = csv.str();
  r.summary["expected"] = cr.expected;
  r.summary["spread"] = cr.spread;
  r.summary["max_deviation"] = cr.max_deviation;
  r.summary["method"] = cr.method;
  r.summary["truncation_bound"] = cr.truncation_bound;
  r.ok = cr.passed;
  return r;
}

inline Report entropy_cmd(const Model& m, const RunConfig& c, const Budget& b) {
  const Potential& phi = m.potential(c.potential);
  require(phi.range().has_value(), ErrorCode::InvalidArgument, "entropy needs a finite-range potential for P");
  const MarkovMeasure mu = measure_or_equilibrium(m, c, phi, b);
  const MarkovMeasure tau = c.taus.empty() ? m.measure() : m.measure(c.taus.front());
  const Site n_max = c.n_max.value_or(12);
  const double tol = c.tol.value_or(1e-6);
  EntropyCurve ec = relative_entropy_curve(tau, mu, phi, pressure(phi, b), n_max, b);
  CsvWriter csv({"n", "H", "H_per_n", "diff"});
  for (const auto& row : ec.rows) csv.row(row.n, row.H, row.H_per_n, row.diff);
  const auto& last = ec.rows.back();
  const double rate = ec.rows.size() >= 2 ? last.diff : last.H_per_n;
  Report r;
  r.body = csv.str();
  r.summary["predicted"] = ec.predicted;
  r.summary["last_difference"] = rate;
  r.summary["deviation"] = std::abs(rate - ec.predicted);
  r.ok = std::abs(rate - ec.predicted) <= tol;
  return r;
}

inline Report roundtrip_cmd(const Model& m, const RunConfig& c, const Budget& b) {
  const Specification g = spec_or_cocycle(m, c);
  const Window w = parse_window(c.window, Window(0, 3));
  const double tol = c.tol.value_or(1e-9);
  RoundtripReport rr = roundtrip_residual(g, w, c.radius, kDefaultTol, b);
  CsvWriter csv({"residual", "error_bound", "comparisons"});
  csv.row(rr.residual, rr.error_bound, rr.comparisons);
  Report r;
  r.body = csv.str();
  r.summary["residual"] = rr.residual;
  r.summary["error_bound"] = rr.error_bound;
  r.summary["comparisons"] = rr.comparisons;
  r.ok = rr.residual <= tol;
  return r;
}

inline Report diagnose_cmd(const Model& m, const RunConfig& c, const Budget& b) {
  const Potential& phi = m.potential(c.potential);
  const Site n_max = c.n_max.value_or(6);
  CsvWriter csv({"quantity", "index", "p", "value"});
  for (Site n = 0; n <= n_max; ++n) csv.row("variation", n, "", variation_estimate(phi, n, b));
  for (Site i = 0; i <= n_max; ++i) csv.row("oscillation", i, "", oscillation_estimate(phi, i, b));
  const Site p_max = 3;
  WaltersBowenTable wb = walters_bowen_diagnostic(phi, p_max, n_max, b);
  for (Site p = 0; p <= p_max; ++p)
    for (Site n = 0; n <= n_max; ++n) csv.row("walters", n, p, wb.entries[p][n]);
  Report r;
  r.summary["walters_exact"] = wb.exact;
  r.summary["walters_sup_over_n"] = wb.sup_over_n;
  r.summary["walters_nonincreasing_in_p"] = wb.nonincreasing_in_p;
  if (auto in = m.interaction(c.potential)) {
    UacNorms u = uac_norms(*in);
    r.summary["uac"] = u.uac;
    r.summary["diam_weighted"] = u.diam_weighted;
    csv.row("uac", 0, "", u.uac);
    csv.row("diam_weighted", 0, "", u.diam_weighted);
  }
  r.body = csv.str();
  return r;
}

inline Report sample_cmd(const Model& m, const RunConfig& c, const Budget& b) {
  const Specification g = spec_or_cocycle(m, c);
  const Alphabet& a = g.alphabet();
  const Window vol = parse_window(c.window, Window(0, 63));
  require(vol.size() >= 3, ErrorCode::InvalidArgument, "sampling volume must have at least 3 sites");
  const Config boundary = Config::constant(a.background());
  HeatBathOptions opt;
  opt.burn_in = c.burn_in;
  opt.thin = c.thin ? c.thin : static_cast<std::uint64_t>(vol.size());
  opt.sweeps = c.sweeps.value_or(opt.thin * 10000);
  opt.seed = c.seed;
  HeatBathRun run = heat_bath_run(g, vol, boundary, opt);
  require(!run.samples.empty(), ErrorCode::InvalidArgument, "no samples recorded; raise --sweeps or lower --thin");
  const Site mid = vol.lo + (vol.size() - 1) / 2;
  const Window sub(mid - 1, mid + 1);
  CylinderFrequencies fr = empirical_cylinders(run.samples, sub, 1);
  const auto exact = finite_volume_marginals(g, vol, boundary, sub, kDefaultTol, b);
  CsvWriter csv({"pattern", "count", "frequency", "exact", "sigma", "z"});
  std::size_t idx = 0, within = 0;
  const double N = static_cast<double>(fr.total);
  for_each_word(a.size(), 3, [&](std::span<const Letter> w) {
    const std::vector<Letter> key(w.begin(), w.end());
    const auto it = fr.freq.find(key);
    const double f = it == fr.freq.end() ? 0.0 : it->second;
    const std::uint64_t n = it == fr.freq.end() ? 0 : fr.counts.at(key);
    const double p = exact[idx++];
    const double sigma = std::sqrt(p * (1 - p) / N);
    const double z = sigma > 0 ? (f - p) / sigma : 0.0;
    if (std::abs(z) <= 3.0) ++within;
    csv.row(word_text(a, w), n, f, p, sigma, z);
  });
  if (!c.samples_out.empty()) {
    CsvWriter rows({"sample", "symbols"});
    for (std::size_t s = 0; s < run.samples.size(); ++s) rows.row(s, word_text(a, run.samples[s].letters));
    write_file_atomic(c.samples_out, rows.str());
  }
  Report r;
  r.body = csv.str();
  r.summary["samples"] = fr.total;
  r.summary["patterns"] = exact.size();
  r.summary["within_3_sigma"] = within;
  r.ok = within + 1 >= exact.size();
  return r;
}

inline Report dlr_cmd(const Model& m, const RunConfig& c, const Budget& b) {
  const Specification g = spec_or_cocycle(m, c);
  const MarkovMeasure mu = m.has_potentials() && c.measure.empty()
                               ? measure_or_equilibrium(m, c, m.potential(c.potential), b)
                               : m.measure(c.measure);
  const Window w = parse_window(c.window, Window(0, 0));
  const double tol = c.tol.value_or(1e-8);
  DlrReport d = dlr_residual(mu, g, w, c.pad, kDefaultTol, b);
  CsvWriter csv({"residual", "max_cylinder_gap", "residual_wider_pad", "pad_sensitivity"});
  csv.row(d.residual, d.max_cylinder_gap, d.residual_wider, d.pad_sensitivity);
  Report r;
  r.body = csv.str();
  r.summary["residual"] = d.residual;
  r.summary["max_cylinder_gap"] = d.max_cylinder_gap;
  r.summary["pad_sensitivity"] = d.pad_sensitivity;
  r.ok = d.residual <= tol;
  return r;
}

inline Report measure_cmd(const Model& m, const RunConfig& c, const Budget& b) {
  MarkovMeasure mu = m.has_potentials() && c.measure.empty()
                         ? measure_or_equilibrium(m, c, m.potential(c.potential), b)
                         : m.measure(c.measure);
  Report r;
  r.body = markov_to_json(mu).dump(2) + "\n";
  r.summary["order"] = mu.order;
  r.summary["entropy"] = entropy(mu);
  return r;
}

}  // namespace detail

inline Json error_json(const std::string& code, const std::string& message) {
  Json j;
  j["error"] = code;
  j["message"] = message;
  return j;
}

/// Runs one command. Prints a one-line JSON summary to `out` and writes the
/// report body to `config.out` when given. Returns 0 on success, 1 when a
/// verifier exceeds its tolerance, 2 on input errors.
inline int run(const RunConfig& config, std::ostream& out) {
  try {
    detail::validate(config);
    const Model m = Model::load_file(config.model_path);
    const Budget b{config.budget};
    Report r;
    const std::string& cmd = config.command;
    if (cmd == "pressure") r = detail::pressure_cmd(m, config, b);
    else if (cmd == "kernel") r = detail::kernel_cmd(m, config, b);
    else if (cmd == "cocycle") r = detail::cocycle_cmd(m, config, b);
    else if (cmd == "bowen") r = detail::bowen_cmd(m, config, b);
    else if (cmd == "cohomology") r = detail::cohomology_cmd(m, config, b);
    else if (cmd == "entropy") r = detail::entropy_cmd(m, config, b);
    else if (cmd == "roundtrip") r = detail::roundtrip_cmd(m, config, b);
    else if (cmd == "diagnose") r = detail::diagnose_cmd(m, config, b);
    else if (cmd == "sample") r = detail::sample_cmd(m, config, b);
    else if (cmd == "dlr") r = detail::dlr_cmd(m, config, b);
    else r = detail::measure_cmd(m, config, b);
    if (!config.out.empty()) write_file_atomic(config.out, r.body);
    Json s;
    s["command"] = cmd;
    s["ok"] = r.ok;
    for (auto it = r.summary.begin(); it != r.summary.end(); ++it) s[it.key()] = it.value();
    out << s.dump() << '\n';
    return r.ok ? kOk : kVerifierFailed;
  } catch (const Error& e) {
    const bool verifier = e.code() == ErrorCode::NonConvergent || e.code() == ErrorCode::NoConvergence ||
                          e.code() == ErrorCode::TolUnreachable;
    out << error_json(std::string(to_string(e.code())), e.what()).dump() << '\n';
    return verifier ? kVerifierFailed : kInputError;
  } catch (const std::exception& e) {
    out << error_json("InvalidArgument", e.what()).dump() << '\n';
    return kInputError;
  }
}

}  // namespace gibbskit::cli
