#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <numeric>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace hypertest {

// Error taxonomy. Every operation throws one of these; callers that need a
// softer outcome (hypothesis unmet, vacuous bound) get it in the report type.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct InvalidSample : Error {
  using Error::Error;
};
struct InvalidColor : Error {
  using Error::Error;
};
struct InvalidArgument : Error {
  using Error::Error;
};
struct GuardExceeded : Error {
  using Error::Error;
};
struct RangeError : Error {
  using Error::Error;
};
struct ParseError : Error {
  ParseError(const std::string& what, std::size_t line)
      : Error("line " + std::to_string(line) + ": " + what), line(line) {}
  std::size_t line;
};

/// Enumeration budgets. Every exhaustive routine checks its item count
/// against one of these before starting.
struct Guards {
  std::uint64_t enumeration = std::uint64_t{1} << 24;
  std::uint64_t edit_radius = 3;
  std::uint64_t search_nodes = std::uint64_t{1} << 26;
};

inline const Guards& default_guards() {
  static const Guards g{};
  return g;
}

// ---------------------------------------------------------------------------
// Seeds. A trial or restart never shares a generator with another one: its
// generator is seeded with derive_seed(base, index).

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
  return splitmix64(base ^ splitmix64(stream + 0x632BE59BD9B4E019ULL));
}

using Rng = std::mt19937_64;

inline double uniform01(Rng& rng) {
  // 53 random mantissa bits; independent of the standard library's
  // distribution implementation so streams are portable.
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline std::size_t uniform_index(Rng& rng, std::size_t n) {
  return static_cast<std::size_t>(uniform01(rng) * static_cast<double>(n)) % n;
}

/// Draws an index from unnormalised non-negative weights.
inline std::size_t draw_categorical(Rng& rng, std::span<const double> weights) {
  double total = 0;
  for (double w : weights) total += w;
  double u = uniform01(rng) * total;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (u < weights[i]) return i;
    u -= weights[i];
  }
  for (std::size_t i = weights.size(); i-- > 0;)
    if (weights[i] > 0) return i;
  return 0;
}

/// Uniform q-subset of {0..n-1}, returned sorted (Floyd's algorithm).
inline std::vector<std::size_t> random_subset(Rng& rng, std::size_t n, std::size_t q) {
  std::vector<std::size_t> out;
  out.reserve(q);
  std::vector<char> taken(n, 0);
  for (std::size_t j = n - q; j < n; ++j) {
    std::size_t t = uniform_index(rng, j + 1);
    if (taken[t]) t = j;
    taken[t] = 1;
    out.push_back(t);
  }
  std::sort(out.begin(), out.end());
  return out;
}

// ---------------------------------------------------------------------------
// Combinatorics.

/// Saturating integer arithmetic for guard computations.
inline std::uint64_t sat_mul(std::uint64_t a, std::uint64_t b) {
  if (a == 0 || b == 0) return 0;
  if (a > std::numeric_limits<std::uint64_t>::max() / b)
    return std::numeric_limits<std::uint64_t>::max();
  return a * b;
}

inline std::uint64_t sat_add(std::uint64_t a, std::uint64_t b) {
  return a > std::numeric_limits<std::uint64_t>::max() - b ? std::numeric_limits<std::uint64_t>::max()
                                                           : a + b;
}

inline std::uint64_t sat_pow(std::uint64_t base, std::uint64_t exp) {
  std::uint64_t out = 1;
  for (std::uint64_t i = 0; i < exp; ++i) out = sat_mul(out, base);
  return out;
}

inline std::uint64_t binomial(std::uint64_t n, std::uint64_t k) {
  if (k > n) return 0;
  k = std::min(k, n - k);
  std::uint64_t out = 1;
  for (std::uint64_t i = 1; i <= k; ++i) {
    // out * (n - k + i) / i stays integral at every step
    const std::uint64_t num = n - k + i;
    const std::uint64_t g = std::gcd(out, i);
    out = sat_mul(out / g, num / (i / g));
  }
  return out;
}

inline std::uint64_t falling_factorial(std::uint64_t n, std::uint64_t k) {
  std::uint64_t out = 1;
  for (std::uint64_t i = 0; i < k; ++i) out = sat_mul(out, n - i);
  return out;
}

inline std::uint64_t factorial(std::uint64_t k) { return falling_factorial(k, k); }

inline void check_guard(std::uint64_t items, std::uint64_t guard, const std::string& what) {
  if (items > guard)
    throw GuardExceeded(what + ": " + std::to_string(items) + " items exceed guard " +
                        std::to_string(guard));
}

/// Rank of a strictly increasing r-subset in colexicographic order.
inline std::size_t colex_rank(std::span<const std::size_t> sorted_subset) {
  std::size_t rank = 0;
  for (std::size_t i = 0; i < sorted_subset.size(); ++i)
    rank += static_cast<std::size_t>(binomial(sorted_subset[i], i + 1));
  return rank;
}

inline std::vector<std::size_t> colex_unrank(std::size_t rank, std::size_t r) {
  std::vector<std::size_t> out(r);
  for (std::size_t i = r; i-- > 0;) {
    std::size_t v = i;
    while (binomial(v + 1, i + 1) <= rank) ++v;
    out[i] = v;
    rank -= static_cast<std::size_t>(binomial(v, i + 1));
  }
  return out;
}

/// Calls fn(subset) for every strictly increasing r-subset of {0..n-1} in
/// colex order, so the k-th call receives the subset with colex rank k.
template <class Fn>
void for_each_subset(std::size_t n, std::size_t r, Fn&& fn) {
  if (r > n) return;
  std::vector<std::size_t> s(r);
  std::iota(s.begin(), s.end(), std::size_t{0});
  while (true) {
    fn(std::span<const std::size_t>(s));
    // colex successor: bump the lowest position that can move
    std::size_t i = 0;
    while (i < r && ((i + 1 < r) ? s[i] + 1 == s[i + 1] : s[i] + 1 == n)) ++i;
    if (i == r) return;
    ++s[i];
    for (std::size_t j = 0; j < i; ++j) s[j] = j;
  }
}

/// Calls fn(tuple) for every tuple in {0..base-1}^len in lexicographic order.
template <class Fn>
void for_each_tuple(std::size_t base, std::size_t len, Fn&& fn) {
  std::vector<std::size_t> t(len, 0);
  if (base == 0 && len > 0) return;
  while (true) {
    fn(std::span<const std::size_t>(t));
    std::size_t i = len;
    while (i > 0) {
      --i;
      if (++t[i] < base) break;
      t[i] = 0;
      if (i == 0) return;
    }
    if (len == 0) return;
  }
}

/// Flat index of a cell (i_1..i_r) in a t^r array stored lexicographically.
inline std::size_t cell_index(std::span<const std::size_t> cell, std::size_t t) {
  std::size_t idx = 0;
  for (std::size_t c : cell) idx = idx * t + c;
  return idx;
}

inline std::vector<std::size_t> cell_of_index(std::size_t idx, std::size_t t, std::size_t r) {
  std::vector<std::size_t> cell(r);
  for (std::size_t i = r; i-- > 0;) {
    cell[i] = idx % t;
    idx /= t;
  }
  return cell;
}

inline std::size_t ipow(std::size_t base, std::size_t exp) {
  std::size_t out = 1;
  for (std::size_t i = 0; i < exp; ++i) out *= base;
  return out;
}

}  // namespace hypertest
