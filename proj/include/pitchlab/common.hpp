#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace pitchlab {

// Error taxonomy. The CLI maps these to process exit codes:
// MissingInputError -> 2, ValidationError (and subclasses) -> 3,
// UndefinedValueError -> 4, anything else -> 1.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct MissingInputError : Error {
  using Error::Error;
};

struct ValidationError : Error {
  using Error::Error;
};

// Malformed input records; a validation failure with file/line context.
struct ParseError : ValidationError {
  using ValidationError::ValidationError;
};

// Lookup of an id that is not in the loaded data.
struct NotFoundError : ValidationError {
  using ValidationError::ValidationError;
};

// Degenerate training input (single-class data, empty folds, ...).
struct TrainingError : ValidationError {
  using ValidationError::ValidationError;
};

// A quantity whose definition has no value on the given input
// (no qualifying pass pair, zero-width zone range, ...).
struct UndefinedValueError : Error {
  using Error::Error;
};

struct Pos {
  double x = 0.0;
  double y = 0.0;
};

// Pitch model: coordinates arrive as percentages of a 110 x 65 m pitch,
// attacking direction toward x = 100, goal center at (100, 50).
struct Pitch {
  double length_m = 110.0;
  double width_m = 65.0;
  double sx() const { return length_m / 100.0; }
  double sy() const { return width_m / 100.0; }
};

inline double meters_between(const Pos& a, const Pos& b, const Pitch& p = {}) {
  const double dx = (a.x - b.x) * p.sx();
  const double dy = (a.y - b.y) * p.sy();
  return std::sqrt(dx * dx + dy * dy);
}

inline double meters_to_goal(const Pos& a, const Pitch& p = {}) {
  return meters_between(a, Pos{100.0, 50.0}, p);
}

// splitmix64: tiny deterministic generator, identical on every platform,
// so values frozen into tests stay valid.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1).
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Inclusive bounds.
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
    return lo + static_cast<std::int64_t>(next() % static_cast<std::uint64_t>(hi - lo + 1));
  }

  double normal() {
    if (cached_) {
      cached_ = false;
      return cache_;
    }
    double u1 = 0.0;
    do {
      u1 = uniform();
    } while (u1 <= 1e-300);
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 6.283185307179586476925286766559 * u2;
    cache_ = r * std::sin(a);
    cached_ = true;
    return r * std::cos(a);
  }

  double normal(double mean, double sd) { return mean + sd * normal(); }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      const std::size_t j = static_cast<std::size_t>(next() % i);
      std::swap(v[i - 1], v[j]);
    }
  }

  // Derive an independent stream; mixing keeps streams for adjacent keys apart.
  Rng fork(std::uint64_t key) const {
    Rng r(state_ ^ (0x9e3779b97f4a7c15ull * (key + 0x632be59bd9b4e019ull)));
    r.next();
    return r;
  }

 private:
  std::uint64_t state_;
  bool cached_ = false;
  double cache_ = 0.0;
};

inline double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

// Population standard deviation.
inline double pop_std(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  const double m = mean_of(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size()));
}

// Sample standard deviation (n - 1 denominator).
inline double sample_std(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

}  // namespace pitchlab
