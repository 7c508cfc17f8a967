#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace confdim {

/// Relative tolerance used by all threshold comparisons (adjacency rules,
/// ratio bounds). Strict inequalities treat near-ties as not satisfied.
inline constexpr double kRelTol = 1e-12;

/// a < b, robust to relative rounding noise of size kRelTol.
inline bool lt(double a, double b, double rel = kRelTol) {
  return (b - a) > rel * std::max(std::abs(a), std::abs(b));
}

/// a <= b up to relative rounding noise.
inline bool leq(double a, double b, double rel = kRelTol) { return !lt(b, a, rel); }

struct config_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct size_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct construction_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct io_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// theory: every bound the construction relies on is enforced, violations abort.
/// practical: the same checks run but violations are recorded as diagnostics.
enum class Mode { theory, practical };

inline std::string to_string(Mode m) { return m == Mode::theory ? "theory" : "practical"; }

inline Mode mode_from_string(const std::string& s) {
  if (s == "theory") return Mode::theory;
  if (s == "practical") return Mode::practical;
  throw config_error("unknown mode '" + s + "' (expected theory|practical)");
}

struct Diagnostic {
  std::string check;
  bool ok = true;
  std::string detail;
};

/// Collects check outcomes. In theory mode a failed check throws immediately;
/// in practical mode it is recorded and the run continues.
class Diagnostics {
 public:
  explicit Diagnostics(Mode mode = Mode::practical) : mode_(mode) {}

  void require(bool ok, const std::string& check, const std::string& detail) {
    entries_.push_back({check, ok, detail});
    if (!ok) {
      ++failures_;
      if (mode_ == Mode::theory) throw construction_error(check + ": " + detail);
    }
  }

  void note(const std::string& check, const std::string& detail) {
    entries_.push_back({check, true, detail});
  }

  Mode mode() const { return mode_; }
  const std::vector<Diagnostic>& entries() const { return entries_; }
  int failures() const { return failures_; }

 private:
  Mode mode_;
  std::vector<Diagnostic> entries_;
  int failures_ = 0;
};

/// Deterministic RNG for all sampling (certificates, path audits, triples).
/// xoshiro-free: mt19937_64 is stable across platforms for raw draws.
class Rng {
 public:
  explicit Rng(uint64_t seed) : state_(seed ? seed : 0x9e3779b97f4a7c15ULL) {}

  uint64_t next() {
    // splitmix64; identical sequences on every platform, unlike <random>
    // distributions.
    uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  /// Uniform integer in [0, n).
  uint64_t below(uint64_t n) { return n ? next() % n : 0; }

  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

 private:
  uint64_t state_;
};

/// FNV-1a, used for content-addressed artifact filenames.
inline uint64_t fnv1a(const std::string& s) {
  uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

inline std::string hex16(uint64_t v) {
  static const char* digits = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<size_t>(i)] = digits[v & 0xf];
    v >>= 4;
  }
  return out;
}

}  // namespace confdim
