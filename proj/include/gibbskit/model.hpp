#pragma once

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "gibbskit/potential.hpp"
#include "gibbskit/specification.hpp"
#include "gibbskit/transfer.hpp"

namespace gibbskit {

using Json = nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;

// ---------------------------------------------------------------------------
// Output helpers

/// Shortest decimal text that parses back to the same double.
inline std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, end);
}

inline double parse_double(std::string_view s) {
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  double v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  require(ec == std::errc() && ptr == s.data() + s.size(), ErrorCode::ModelError,
          "not a number: '" + std::string(s) + "'");
  return v;
}

/// Writes through a temporary file in the same directory, then renames it
/// over the target so readers never see a partial report.
inline void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    require(static_cast<bool>(os), ErrorCode::InvalidArgument, "cannot open " + tmp.string() + " for writing");
    os << content;
    os.flush();
    require(static_cast<bool>(os), ErrorCode::InvalidArgument, "write to " + tmp.string() + " failed");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  require(!ec, ErrorCode::InvalidArgument, "rename to " + path.string() + " failed: " + ec.message());
}

class CsvWriter {
 public:
  explicit CsvWriter(const std::vector<std::string>& header) { row_strings(header); }

  template <class... Ts>
  void row(const Ts&... cells) {
    std::vector<std::string> v{cell(cells)...};
    row_strings(v);
  }

  void row_strings(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) os_ << ',';
      os_ << cells[i];
    }
    os_ << '\n';
  }

  std::string str() const { return os_.str(); }

 private:
  static std::string cell(double x) { return format_double(x); }
  static std::string cell(const std::string& s) { return s; }
  static std::string cell(const char* s) { return s; }
  template <class I>
    requires std::is_integral_v<I>
  static std::string cell(I i) { return std::to_string(i); }

  std::ostringstream os_;
};

/// Symbols of a word joined by spaces.
inline std::string word_text(const Alphabet& a, std::span<const Letter> w) {
  std::string s;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (i) s += ' ';
    s += a.name(w[i]);
  }
  return s;
}

inline std::vector<Letter> parse_word(const Alphabet& a, std::string_view text) {
  std::vector<Letter> out;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find(' ', pos);
    if (end == std::string_view::npos) end = text.size();
    if (end > pos) out.push_back(a.index_of(text.substr(pos, end - pos)));
    pos = end + 1;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Kernel tables as CSV: pattern,log_prob,error

inline std::string kernel_csv(const Alphabet& a, const KernelTable& t) {
  CsvWriter csv({"pattern", "log_prob", "error"});
  std::size_t idx = 0;
  for_each_word(a.size(), static_cast<std::size_t>(t.window.size()), [&](std::span<const Letter> w) {
    csv.row(word_text(a, w), t.log_prob[idx], t.error[idx]);
    ++idx;
  });
  return csv.str();
}

inline KernelTable read_kernel_csv(const Alphabet& a, Window w, const std::string& text) {
  std::istringstream is(text);
  std::string line;
  std::getline(is, line);
  require(line == "pattern,log_prob,error", ErrorCode::ModelError, "unexpected kernel CSV header");
  KernelTable t{w, {}, {}};
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    auto c1 = line.find(',');
    auto c2 = line.find(',', c1 + 1);
    require(c1 != std::string::npos && c2 != std::string::npos, ErrorCode::ModelError, "bad kernel CSV row");
    auto word = parse_word(a, std::string_view(line).substr(0, c1));
    require(static_cast<Site>(word.size()) == w.size(), ErrorCode::ModelError, "pattern length mismatch");
    require(word_index(word, a.size()) == t.log_prob.size(), ErrorCode::ModelError, "kernel rows out of order");
    t.log_prob.push_back(parse_double(std::string_view(line).substr(c1 + 1, c2 - c1 - 1)));
    t.error.push_back(parse_double(std::string_view(line).substr(c2 + 1)));
  }
  return t;
}

// ---------------------------------------------------------------------------
// Markov measures as JSON

inline Json markov_to_json(const MarkovMeasure& mu) {
  Json j;
  j["kind"] = "markov";
  j["symbols"] = mu.alphabet.symbols();
  j["background"] = mu.alphabet.name(mu.alphabet.background());
  j["order"] = mu.order;
  j["pi"] = mu.pi;
  j["P"] = mu.P;
  return j;
}

// ---------------------------------------------------------------------------
// Model files

/// Alphabet plus named potentials, specifications and measures.
class Model {
 public:
  static Model parse(const std::string& text) {
    Json j;
    try {
      j = Json::parse(text);
    } catch (const Json::parse_error& e) {
      fail(ErrorCode::ModelError, std::string("malformed JSON: ") + e.what());
    }
    Model m;
    m.load(j);
    return m;
  }

  static Model load_file(const std::filesystem::path& path) {
    std::ifstream is(path);
    require(static_cast<bool>(is), ErrorCode::ModelError, "cannot read model file " + path.string());
    std::stringstream ss;
    ss << is.rdbuf();
    return parse(ss.str());
  }

  const Alphabet& alphabet() const { return alphabet_; }

  const Potential& potential(const std::string& name = "") const { return pick(potentials_, name, "potential"); }
  const Specification& specification(const std::string& name = "") const {
    return pick(specs_, name, "specification");
  }
  MarkovMeasure measure(const std::string& name = "") const { return pick(measures_, name, "measure"); }

  bool has_potentials() const { return !potentials_.empty(); }
  bool has_specifications() const { return !specs_.empty(); }
  bool has_measures() const { return !measures_.empty(); }
  std::vector<std::string> measure_names() const { return names(measures_); }

  /// Interaction behind a named potential of kind "interaction", if any.
  std::optional<Interaction> interaction(const std::string& name = "") const {
    const Potential& p = potential(name);
    if (auto* in = std::get_if<InteractionKind>(&p.kind())) return in->interaction;
    return std::nullopt;
  }

 private:
  template <class T>
  struct Named {
    std::vector<std::pair<std::string, T>> items;
    bool empty() const { return items.empty(); }
  };

  template <class T>
  static const T& pick(const Named<T>& n, const std::string& name, const char* what) {
    require(!n.items.empty(), ErrorCode::ModelError, std::string("model defines no ") + what);
    if (name.empty()) return n.items.front().second;
    for (const auto& [k, v] : n.items)
      if (k == name) return v;
    fail(ErrorCode::ModelError, std::string("no ") + what + " named '" + name + "'");
  }

  template <class T>
  static std::vector<std::string> names(const Named<T>& n) {
    std::vector<std::string> out;
    for (const auto& [k, v] : n.items) out.push_back(k);
    return out;
  }

  template <class T>
  static T get(const Json& j, const char* key, const std::string& where) {
    require(j.is_object() && j.contains(key), ErrorCode::ModelError, where + ": missing field '" + key + "'");
    try {
      return j.at(key).get<T>();
    } catch (const Json::exception& e) {
      fail(ErrorCode::ModelError, where + ": field '" + key + "' has the wrong type");
    }
  }

  static void reject_unknown(const Json& j, std::initializer_list<const char*> known, const std::string& where) {
    require(j.is_object(), ErrorCode::ModelError, where + " must be an object");
    for (auto it = j.begin(); it != j.end(); ++it) {
      bool ok = false;
      for (const char* k : known) ok = ok || it.key() == k;
      require(ok, ErrorCode::ModelError, where + ": unknown field '" + it.key() + "'");
    }
  }

  void load(const Json& j) {
    reject_unknown(j, {"schema_version", "description", "alphabet", "potentials", "specifications", "measures"},
                   "model");
    require(get<int>(j, "schema_version", "model") == kSchemaVersion, ErrorCode::ModelError,
            "unsupported schema_version");
    const Json& a = j.at("alphabet");
    reject_unknown(a, {"symbols", "background"}, "alphabet");
    auto symbols = get<std::vector<std::string>>(a, "symbols", "alphabet");
    Alphabet probe(symbols, 0);
    alphabet_ = Alphabet(symbols, probe.index_of(get<std::string>(a, "background", "alphabet")));
    wrap([&] {
      if (j.contains("potentials"))
        for (auto it = j["potentials"].begin(); it != j["potentials"].end(); ++it)
          potentials_.items.emplace_back(it.key(), load_potential(it.value(), "potential '" + it.key() + "'"));
      if (j.contains("specifications"))
        for (auto it = j["specifications"].begin(); it != j["specifications"].end(); ++it)
          specs_.items.emplace_back(it.key(), load_spec(it.value(), "specification '" + it.key() + "'"));
      if (j.contains("measures"))
        for (auto it = j["measures"].begin(); it != j["measures"].end(); ++it)
          measures_.items.emplace_back(it.key(), load_measure(it.value(), "measure '" + it.key() + "'"));
    });
  }

  /// Library validation errors inside a model file are reported as model errors.
  template <class Fn>
  static void wrap(Fn&& fn) {
    try {
      fn();
    } catch (const Error& e) {
      if (e.code() == ErrorCode::ModelError) throw;
      throw Error(ErrorCode::ModelError, e.what());
    }
  }

  Interaction load_interaction(const Json& j, const std::string& where) const {
    std::vector<Generator> gens;
    if (j.contains("generators"))
      for (const Json& g : j.at("generators")) {
        reject_unknown(g, {"sites", "table"}, where + " generator");
        gens.push_back({get<std::vector<Site>>(g, "sites", where), get<std::vector<double>>(g, "table", where)});
      }
    std::optional<PairTail> tail;
    if (j.contains("pair_tail")) {
      const Json& t = j.at("pair_tail");
      reject_unknown(t, {"beta", "alpha", "from"}, where + " pair_tail");
      tail = PairTail{get<double>(t, "beta", where), get<double>(t, "alpha", where),
                      t.contains("from") ? get<Site>(t, "from", where) : Site{1}};
    }
    return Interaction(alphabet_, std::move(gens), tail);
  }

  Potential load_potential(const Json& j, const std::string& where) const {
    const auto kind = get<std::string>(j, "kind", where);
    if (kind == "finite_range") {
      reject_unknown(j, {"kind", "range", "table", "weights"}, where);
      const Site r = get<Site>(j, "range", where);
      require(j.contains("table") != j.contains("weights"), ErrorCode::ModelError,
              where + ": give exactly one of 'table' and 'weights'");
      std::vector<double> t;
      if (j.contains("table")) {
        t = get<std::vector<double>>(j, "table", where);
      } else {
        for (double w : get<std::vector<double>>(j, "weights", where)) {
          require(w > 0, ErrorCode::ModelError, where + ": weights must be positive");
          t.push_back(std::log(w));
        }
      }
      return finite_range_potential(alphabet_, r, std::move(t));
    }
    if (kind == "dyson") {
      reject_unknown(j, {"kind", "h", "beta", "alpha"}, where);
      return dyson_potential(get<double>(j, "h", where), get<double>(j, "beta", where),
                             get<double>(j, "alpha", where), alphabet_);
    }
    if (kind == "interaction") {
      reject_unknown(j, {"kind", "generators", "pair_tail"}, where);
      return potential_from_interaction(load_interaction(j, where));
    }
    fail(ErrorCode::ModelError, where + ": unknown kind '" + kind + "'");
  }

  Specification load_spec(const Json& j, const std::string& where) const {
    const auto kind = get<std::string>(j, "kind", where);
    if (kind == "interaction" || kind == "cocycle") {
      reject_unknown(j, {"kind", "potential"}, where);
      const Potential& p = potential(get<std::string>(j, "potential", where));
      if (kind == "cocycle") return Specification::from_cocycle(p);
      auto* in = std::get_if<InteractionKind>(&p.kind());
      require(in != nullptr, ErrorCode::ModelError, where + ": referenced potential is not an interaction");
      return Specification::from_interaction(in->interaction);
    }
    if (kind == "single_site") {
      reject_unknown(j, {"kind", "radius", "log_weights"}, where);
      return Specification::single_site(alphabet_, get<Site>(j, "radius", where),
                                        get<std::vector<double>>(j, "log_weights", where));
    }
    if (kind == "independent") {
      reject_unknown(j, {"kind", "probabilities"}, where);
      return Specification::independent(alphabet_, get<std::vector<double>>(j, "probabilities", where));
    }
    fail(ErrorCode::ModelError, where + ": unknown kind '" + kind + "'");
  }

  MarkovMeasure load_measure(const Json& j, const std::string& where) const {
    const auto kind = get<std::string>(j, "kind", where);
    if (kind == "uniform") {
      reject_unknown(j, {"kind"}, where);
      return MarkovMeasure::uniform(alphabet_);
    }
    if (kind == "bernoulli") {
      reject_unknown(j, {"kind", "p"}, where);
      return MarkovMeasure::bernoulli(alphabet_, get<std::vector<double>>(j, "p", where));
    }
    if (kind == "equilibrium") {
      reject_unknown(j, {"kind", "potential"}, where);
      return equilibrium_markov(potential(get<std::string>(j, "potential", where)));
    }
    if (kind == "markov") {
      reject_unknown(j, {"kind", "symbols", "background", "order", "pi", "P"}, where);
      if (j.contains("symbols"))
        require(get<std::vector<std::string>>(j, "symbols", where) == alphabet_.symbols(), ErrorCode::ModelError,
                where + ": symbols differ from the model alphabet");
      const Site order = j.contains("order") ? get<Site>(j, "order", where) : Site{1};
      auto P = get<std::vector<std::vector<double>>>(j, "P", where);
      if (!j.contains("pi")) return MarkovMeasure::from_transitions(alphabet_, order, std::move(P));
      MarkovMeasure mu{alphabet_, order, get<std::vector<double>>(j, "pi", where), std::move(P)};
      mu.validate();
      return mu;
    }
    fail(ErrorCode::ModelError, where + ": unknown kind '" + kind + "'");
  }

  Alphabet alphabet_;
  Named<Potential> potentials_;
  Named<Specification> specs_;
  Named<MarkovMeasure> measures_;
};

/// Reads a measure serialized by markov_to_json.
inline MarkovMeasure markov_from_json(const Json& j) {
  const auto symbols = j.at("symbols").get<std::vector<std::string>>();
  Alphabet a(symbols, 0);
  if (j.contains("background")) a = a.with_background(a.index_of(j.at("background").get<std::string>()));
  MarkovMeasure mu{a, j.at("order").get<Site>(), j.at("pi").get<std::vector<double>>(),
                   j.at("P").get<std::vector<std::vector<double>>>()};
  mu.validate();
  return mu;
}

}  // namespace gibbskit
