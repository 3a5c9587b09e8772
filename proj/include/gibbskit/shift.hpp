#pragma once

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gibbskit/error.hpp"

namespace gibbskit {

using Site = std::int64_t;
using Letter = std::uint8_t;

inline constexpr Site kNegInf = std::numeric_limits<Site>::min();
inline constexpr Site kPosInf = std::numeric_limits<Site>::max();

inline Site floor_mod(Site i, Site p) {
  Site r = i % p;
  return r < 0 ? r + p : r;
}

inline Site checked_add(Site a, Site b) {
  Site out;
  if (__builtin_add_overflow(a, b, &out)) fail(ErrorCode::InvalidArgument, "site arithmetic overflow");
  return out;
}

// ---------------------------------------------------------------------------
// Alphabet

/// Finite ordered alphabet with a distinguished background letter.
/// Symbols that parse as numbers (e.g. "-1", "+1") carry a numeric value used
/// by spin potentials.
class Alphabet {
 public:
  Alphabet() : Alphabet({"0", "1"}, 0) {}

  Alphabet(std::vector<std::string> symbols, Letter background)
      : symbols_(std::move(symbols)), background_(background) {
    require(symbols_.size() >= 2, ErrorCode::InvalidArgument, "alphabet needs at least two symbols");
    require(symbols_.size() <= 255, ErrorCode::InvalidArgument, "alphabet too large");
    require(background_ < symbols_.size(), ErrorCode::InvalidArgument, "background is not a member");
    for (std::size_t i = 0; i < symbols_.size(); ++i)
      for (std::size_t j = i + 1; j < symbols_.size(); ++j)
        require(symbols_[i] != symbols_[j], ErrorCode::InvalidArgument,
                "duplicate symbol '" + symbols_[i] + "'");
    values_.reserve(symbols_.size());
    for (const auto& s : symbols_) values_.push_back(parse_value(s));
  }

  /// {-1, +1} with background +1.
  static Alphabet spins() { return Alphabet({"-1", "+1"}, 1); }

  /// {"0", ..., "k-1"}.
  static Alphabet letters(std::size_t k, Letter background = 0) {
    std::vector<std::string> s;
    for (std::size_t i = 0; i < k; ++i) s.push_back(std::to_string(i));
    return Alphabet(std::move(s), background);
  }

  std::size_t size() const { return symbols_.size(); }
  Letter background() const { return background_; }
  const std::string& name(Letter x) const { return symbols_.at(x); }
  const std::vector<std::string>& symbols() const { return symbols_; }

  Letter index_of(std::string_view s) const {
    for (std::size_t i = 0; i < symbols_.size(); ++i)
      if (symbols_[i] == s) return static_cast<Letter>(i);
    fail(ErrorCode::InvalidArgument, "unknown symbol '" + std::string(s) + "'");
  }

  std::optional<double> value(Letter x) const { return values_.at(x); }

  double spin(Letter x) const {
    auto v = values_.at(x);
    require(v.has_value(), ErrorCode::AlphabetMismatch, "symbol '" + symbols_[x] + "' has no numeric value");
    return *v;
  }

  bool is_spin() const {
    return size() == 2 && values_[0] && values_[1] &&
           ((*values_[0] == -1.0 && *values_[1] == 1.0) || (*values_[0] == 1.0 && *values_[1] == -1.0));
  }

  Alphabet with_background(Letter b) const { return Alphabet(symbols_, b); }

  friend bool operator==(const Alphabet& a, const Alphabet& b) {
    return a.symbols_ == b.symbols_ && a.background_ == b.background_;
  }

 private:
  static std::optional<double> parse_value(std::string_view s) {
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    double v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) return std::nullopt;
    return v;
  }

  std::vector<std::string> symbols_;
  Letter background_;
  std::vector<std::optional<double>> values_;
};

// ---------------------------------------------------------------------------
// Window / Pattern

struct Window {
  Site lo = 0;
  Site hi = 0;

  Window() = default;
  Window(Site lo_, Site hi_) : lo(lo_), hi(hi_) {
    require(lo <= hi, ErrorCode::InvalidArgument, "window needs lo <= hi");
  }

  Site size() const { return hi - lo + 1; }
  bool contains(Site i) const { return lo <= i && i <= hi; }
  bool contains(const Window& w) const { return lo <= w.lo && w.hi <= hi; }
  Window shifted(Site k) const { return {lo + k, hi + k}; }
  Window hull(const Window& w) const { return {std::min(lo, w.lo), std::max(hi, w.hi)}; }
  Window padded(Site p) const { return {lo - p, hi + p}; }

  friend bool operator==(const Window&, const Window&) = default;
};

/// Lambda_n = [-n, n].
inline Window centered_window(Site n) { return {-n, n}; }

struct Pattern {
  Window window;
  std::vector<Letter> letters;

  Pattern() = default;
  Pattern(Window w, std::vector<Letter> l) : window(w), letters(std::move(l)) {
    require(static_cast<Site>(letters.size()) == window.size(), ErrorCode::InvalidArgument,
            "pattern length does not match its window");
  }

  Letter at(Site i) const { return letters.at(static_cast<std::size_t>(i - window.lo)); }

  Pattern restrict(Window w) const {
    require(window.contains(w), ErrorCode::InvalidArgument, "restriction window outside the pattern");
    auto first = letters.begin() + (w.lo - window.lo);
    return Pattern(w, std::vector<Letter>(first, first + w.size()));
  }

  friend bool operator==(const Pattern&, const Pattern&) = default;
  friend bool operator<(const Pattern& a, const Pattern& b) {
    if (a.window.lo != b.window.lo) return a.window.lo < b.window.lo;
    if (a.window.hi != b.window.hi) return a.window.hi < b.window.hi;
    return a.letters < b.letters;
  }
};

/// |E|^len, or throws BudgetExceeded when it exceeds the cap.
inline std::uint64_t pattern_count(std::size_t k, Site len, const Budget& budget = {}) {
  require(len >= 0, ErrorCode::InvalidArgument, "negative pattern length");
  std::uint64_t count = 1;
  for (Site i = 0; i < len; ++i) {
    if (count > budget.max_patterns / k)
      fail(ErrorCode::BudgetExceeded, std::to_string(k) + "^" + std::to_string(len) +
                                          " patterns exceed the budget of " +
                                          std::to_string(budget.max_patterns));
    count *= k;
  }
  require(count <= budget.max_patterns, ErrorCode::BudgetExceeded, "pattern count exceeds budget");
  return count;
}

/// Lexicographic odometer over E^len: the first letter is most significant.
class Odometer {
 public:
  Odometer(std::size_t k, std::size_t len) : k_(static_cast<Letter>(k)), letters_(len, 0) {}

  std::span<const Letter> letters() const { return letters_; }

  /// Advances to the next word; returns false after the last one.
  bool next() {
    for (std::size_t i = letters_.size(); i-- > 0;) {
      if (++letters_[i] < k_) return true;
      letters_[i] = 0;
    }
    return false;
  }

 private:
  Letter k_;
  std::vector<Letter> letters_;
};

template <class Fn>
void for_each_word(std::size_t k, std::size_t len, Fn&& fn, const Budget& budget = {}) {
  pattern_count(k, static_cast<Site>(len), budget);
  Odometer od(k, len);
  do {
    fn(od.letters());
  } while (od.next());
}

/// Index of a word in lexicographic order.
inline std::size_t word_index(std::span<const Letter> w, std::size_t k) {
  std::size_t idx = 0;
  for (Letter x : w) idx = idx * k + x;
  return idx;
}

inline std::vector<Letter> word_from_index(std::size_t idx, std::size_t k, std::size_t len) {
  std::vector<Letter> w(len);
  for (std::size_t i = len; i-- > 0;) {
    w[i] = static_cast<Letter>(idx % k);
    idx /= k;
  }
  return w;
}

inline std::vector<Pattern> enumerate_patterns(const Alphabet& a, Window w, const Budget& budget = {}) {
  std::vector<Pattern> out;
  out.reserve(pattern_count(a.size(), w.size(), budget));
  for_each_word(
      a.size(), static_cast<std::size_t>(w.size()),
      [&](std::span<const Letter> l) { out.emplace_back(w, std::vector<Letter>(l.begin(), l.end())); },
      budget);
  return out;
}

// ---------------------------------------------------------------------------
// Background

/// Periodic letter sequence anchored at site 0: at(i) = word[i mod p].
/// Stored with its primitive period so equality is equality of sequences.
class Background {
 public:
  Background() : word_{0} {}
  explicit Background(std::vector<Letter> word) : word_(std::move(word)) {
    require(!word_.empty(), ErrorCode::InvalidArgument, "empty background word");
    reduce();
  }
  static Background constant(Letter a) { return Background(std::vector<Letter>{a}); }

  Letter at(Site i) const {
    if (word_.size() == 1) return word_[0];
    return word_[static_cast<std::size_t>(floor_mod(i, period()))];
  }
  Site period() const { return static_cast<Site>(word_.size()); }
  bool is_constant() const { return word_.size() == 1; }
  const std::vector<Letter>& word() const { return word_; }

  /// Background b' with b'(i) = b(i + k).
  Background shifted(Site k) const {
    if (is_constant()) return *this;
    std::vector<Letter> w(word_.size());
    for (Site j = 0; j < period(); ++j) w[static_cast<std::size_t>(j)] = at(j + floor_mod(k, period()));
    return Background(std::move(w));
  }

  friend bool operator==(const Background&, const Background&) = default;

 private:
  void reduce() {
    const std::size_t p = word_.size();
    for (std::size_t d = 1; d < p; ++d) {
      if (p % d) continue;
      bool ok = true;
      for (std::size_t i = d; i < p && ok; ++i) ok = word_[i] == word_[i - d];
      if (ok) {
        word_.resize(d);
        return;
      }
    }
  }

  std::vector<Letter> word_;
};

// ---------------------------------------------------------------------------
// Config

/// A two-sided configuration: sites < split follow the left background, sites
/// >= split the right one, and a finite overlay overrides individual sites.
/// Overlay entries never repeat the background value at their site.
class Config {
 public:
  Config() = default;
  explicit Config(Background bg) : left_(bg), right_(std::move(bg)) {}
  Config(Background left, Site split, Background right)
      : left_(std::move(left)), right_(std::move(right)), split_(split) {
    if (left_ == right_) split_ = 0;
  }

  static Config constant(Letter a) { return Config(Background::constant(a)); }

  /// Background a with the pattern written on top.
  static Config from_pattern(const Pattern& p, Letter a) { return constant(a).with(p); }

  Letter at(Site i) const {
    auto it = overlay_.find(i);
    if (it != overlay_.end()) return it->second;
    return background_at(i);
  }

  Letter background_at(Site i) const { return i < split_ ? left_.at(i) : right_.at(i); }

  Config with(Site i, Letter x) const {
    Config c = *this;
    c.set(i, x);
    return c;
  }

  Config with(const Pattern& p) const {
    Config c = *this;
    for (Site i = p.window.lo; i <= p.window.hi; ++i) c.set(i, p.at(i));
    return c;
  }

  Config without(Site i) const {
    Config c = *this;
    c.overlay_.erase(i);
    return c;
  }

  Pattern restrict(Window w) const {
    std::vector<Letter> l(static_cast<std::size_t>(w.size()));
    for (Site i = w.lo; i <= w.hi; ++i) l[static_cast<std::size_t>(i - w.lo)] = at(i);
    return Pattern(w, std::move(l));
  }

  /// Smallest window outside of which the configuration is pure background:
  /// left background below it, right background above it.
  Window core() const {
    Site lo = 0, hi = 0;
    if (two_sided()) {
      lo = std::min(lo, split_ - 1);
      hi = std::max(hi, split_);
    }
    if (!overlay_.empty()) {
      lo = std::min(lo, overlay_.begin()->first);
      hi = std::max(hi, overlay_.rbegin()->first);
    }
    return {lo, hi};
  }

  bool two_sided() const { return !(left_ == right_); }
  const Background& left_background() const { return left_; }
  const Background& right_background() const { return right_; }
  Site split() const { return split_; }
  const std::map<Site, Letter>& overlay() const { return overlay_; }

  friend bool operator==(const Config& a, const Config& b) {
    if (!(a.left_ == b.left_) || !(a.right_ == b.right_)) return false;
    Window w = a.core().hull(b.core());
    for (Site i = w.lo; i <= w.hi; ++i)
      if (a.at(i) != b.at(i)) return false;
    return true;
  }

 private:
  void set(Site i, Letter x) {
    if (background_at(i) == x)
      overlay_.erase(i);
    else
      overlay_[i] = x;
  }

  Background left_;
  Background right_;
  Site split_ = 0;
  std::map<Site, Letter> overlay_;
};

/// (shift(c, k))(i) = c(i + k), the k-th power of the left shift.
inline Config shift(const Config& c, Site k) {
  if (k == 0) return c;
  Config out(c.left_background().shifted(k), checked_add(c.split(), -k), c.right_background().shifted(k));
  for (const auto& [s, x] : c.overlay()) out = out.with(checked_add(s, -k), x);
  return out;
}

/// Sets sites in [lo, hi] to `a`; lo may be kNegInf and hi kPosInf. An empty
/// interval (lo > hi) leaves c unchanged.
inline Config theta_replace(const Config& c, Site lo, Site hi, Letter a) {
  if (lo > hi) return c;
  const Window core = c.core();
  if (lo == kNegInf && hi == kPosInf) return Config::constant(a);
  if (lo == kNegInf) {
    Config out(Background::constant(a), hi + 1, c.right_background());
    for (Site i = hi + 1; i <= core.hi; ++i) out = out.with(i, c.at(i));
    return out;
  }
  if (hi == kPosInf) {
    Config out(c.left_background(), lo, Background::constant(a));
    for (Site i = core.lo; i < lo; ++i) out = out.with(i, c.at(i));
    return out;
  }
  Config out = c;
  for (Site i = lo; i <= hi; ++i) out = out.with(i, a);
  return out;
}

/// Sites at which two configurations differ, in increasing order. Throws
/// BackgroundMismatch if they differ at infinitely many sites.
inline std::vector<Site> difference_sites(const Config& xi, const Config& eta) {
  require(xi.left_background() == eta.left_background() && xi.right_background() == eta.right_background(),
          ErrorCode::BackgroundMismatch, "configurations differ at infinitely many sites");
  std::vector<Site> out;
  Window w = xi.core().hull(eta.core());
  for (Site i = w.lo; i <= w.hi; ++i)
    if (xi.at(i) != eta.at(i)) out.push_back(i);
  return out;
}

// ---------------------------------------------------------------------------
// Frame

/// Mutable dense view of a configuration over a window that contains its core.
/// Hot loops (pattern enumeration, flip chains) write letters in place here
/// instead of rebuilding overlay maps.
class Frame {
 public:
  Frame(const Config& c, Window cover)
      : left_(c.left_background()), right_(c.right_background()), window_(cover.hull(c.core())) {
    cells_.resize(static_cast<std::size_t>(window_.size()));
    for (Site i = window_.lo; i <= window_.hi; ++i) cells_[idx(i)] = c.at(i);
  }

  /// Dense copy of any configuration view (something with at, core and the
  /// two backgrounds) over `cover` joined with its core.
  template <class C>
  static Frame of(const C& c, Window cover) {
    Frame f;
    f.left_ = c.left_background();
    f.right_ = c.right_background();
    f.window_ = cover.hull(c.core());
    f.cells_.resize(static_cast<std::size_t>(f.window_.size()));
    for (Site i = f.window_.lo; i <= f.window_.hi; ++i) f.cells_[f.idx(i)] = c.at(i);
    return f;
  }

  Letter at(Site i) const {
    if (i < window_.lo) return left_.at(i);
    if (i > window_.hi) return right_.at(i);
    return cells_[idx(i)];
  }

  void set(Site i, Letter x) {
    require(window_.contains(i), ErrorCode::InvalidArgument, "frame write outside its window");
    cells_[idx(i)] = x;
  }

  void set(const Pattern& p) {
    for (Site i = p.window.lo; i <= p.window.hi; ++i) set(i, p.at(i));
  }

  void set(Window w, std::span<const Letter> letters) {
    for (Site i = w.lo; i <= w.hi; ++i) set(i, letters[static_cast<std::size_t>(i - w.lo)]);
  }

  Window core() const { return window_; }
  const Background& left_background() const { return left_; }
  const Background& right_background() const { return right_; }

  Config to_config() const {
    Site split = window_.hi + 1;
    Config c(left_, split, right_);
    for (Site i = window_.lo; i <= window_.hi; ++i) c = c.with(i, cells_[idx(i)]);
    return c;
  }

 private:
  Frame() = default;
  std::size_t idx(Site i) const { return static_cast<std::size_t>(i - window_.lo); }

  Background left_;
  Background right_;
  Window window_;
  std::vector<Letter> cells_;
};

}  // namespace gibbskit
