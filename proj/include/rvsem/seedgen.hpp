#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <string_view>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "rvsem/errors.hpp"

namespace rvsem {

enum class Weighting : std::uint8_t { tf_idf = 0, uniform = 1 };

inline std::string_view to_string(Weighting w) {
  return w == Weighting::tf_idf ? "tf-idf" : "uniform";
}

inline Weighting parse_weighting(std::string_view s) {
  if (s == "tf-idf" || s == "tfidf") return Weighting::tf_idf;
  if (s == "uniform") return Weighting::uniform;
  throw DomainError("unknown weighting scheme: " + std::string(s));
}

/// Dimension d, half non-zero count m, reproducibility seed and weighting.
struct SpaceConfig {
  std::uint32_t dim = 2500;
  std::uint32_t m = 50;
  std::uint64_t global_seed = 0;
  Weighting weighting = Weighting::tf_idf;

  // Seeds must stay sparse: 2m <= d/2.
  void validate() const {
    if (dim < 2) throw DomainError("dimension must be >= 2");
    if (m < 1) throw DomainError("m must be >= 1");
    if (4ull * m > dim) {
      throw DomainError("2m must not exceed d/2 (d=" + std::to_string(dim) +
                        ", m=" + std::to_string(m) + ")");
    }
  }

  /// p = 2m/d, the fraction of non-zero seed coordinates.
  double density() const { return 2.0 * m / dim; }

  friend bool operator==(const SpaceConfig&, const SpaceConfig&) = default;
};

/// SplitMix64: a counter-based generator, bit-identical on every platform.
class SplitMix64 {
 public:
  using result_type = std::uint64_t;

  explicit SplitMix64(std::uint64_t state) noexcept : state_(state) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  result_type operator()() noexcept {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  static std::uint64_t mix(std::uint64_t x) noexcept { return SplitMix64(x)(); }

 private:
  std::uint64_t state_;
};

/// Uniform integer in [0, bound) by Lemire's multiply-and-reject; unlike
/// std::uniform_int_distribution the sequence is fixed across standard libraries.
template <class Rng>
std::uint32_t bounded(Rng& rng, std::uint32_t bound) {
  std::uint64_t x = rng();
  auto mul = static_cast<unsigned __int128>(x) * bound;
  auto low = static_cast<std::uint64_t>(mul);
  if (low < bound) {
    const std::uint64_t threshold = (0 - static_cast<std::uint64_t>(bound)) % bound;
    while (low < threshold) {
      x = rng();
      mul = static_cast<unsigned __int128>(x) * bound;
      low = static_cast<std::uint64_t>(mul);
    }
  }
  return static_cast<std::uint32_t>(mul >> 64);
}

inline std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t h = 0xCBF29CE484222325ull) {
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001B3ull;
  }
  return h;
}

/// Sparse ternary unit vector: m coordinates at +1/sqrt(2m), m at -1/sqrt(2m).
struct SeedVector {
  std::uint32_t dim = 0;
  std::vector<std::uint32_t> positive;  // sorted
  std::vector<std::uint32_t> negative;  // sorted

  std::uint32_t m() const noexcept { return static_cast<std::uint32_t>(positive.size()); }
  double magnitude() const { return 1.0 / std::sqrt(2.0 * m()); }

  std::vector<double> dense() const {
    std::vector<double> v(dim, 0.0);
    const double a = magnitude();
    for (auto i : positive) v[i] = a;
    for (auto i : negative) v[i] = -a;
    return v;
  }

  std::uint64_t signature() const noexcept {
    std::uint64_t h = SplitMix64::mix(dim);
    for (auto i : positive) h = SplitMix64::mix(h ^ i);
    h = SplitMix64::mix(h ^ 0xFFFFFFFFull);
    for (auto i : negative) h = SplitMix64::mix(h ^ i);
    return h;
  }

  friend bool operator==(const SeedVector&, const SeedVector&) = default;
};

namespace detail {

// Draws `count` distinct indices below dim by rejection, in draw order.
// `taken` is a scratch bitmap of dim bits, all clear on entry and on exit.
template <class Rng>
void draw_indices(Rng& rng, std::uint32_t dim, std::uint32_t count, std::vector<std::uint64_t>& taken,
                  std::vector<std::uint32_t>& out) {
  out.clear();
  while (out.size() < count) {
    const auto i = bounded(rng, dim);
    auto& word = taken[i >> 6];
    const auto bit = std::uint64_t{1} << (i & 63);
    if (word & bit) continue;
    word |= bit;
    out.push_back(i);
  }
  for (auto i : out) taken[i >> 6] = 0;
}

}  // namespace detail

/// Seed vector from an arbitrary generator; the first m indices drawn are
/// positive, the next m negative.
template <class Rng>
SeedVector draw_seed(Rng& rng, std::uint32_t dim, std::uint32_t m) {
  SeedVector s;
  s.dim = dim;
  std::vector<std::uint64_t> taken((dim + 63) / 64, 0);
  std::vector<std::uint32_t> drawn;
  detail::draw_indices(rng, dim, 2 * m, taken, drawn);
  s.positive.assign(drawn.begin(), drawn.begin() + m);
  s.negative.assign(drawn.begin() + m, drawn.end());
  std::sort(s.positive.begin(), s.positive.end());
  std::sort(s.negative.begin(), s.negative.end());
  return s;
}

/// 64-bit stream key for a term under a global seed and collision salt.
inline std::uint64_t seed_key(std::string_view term, std::uint64_t global_seed, std::uint32_t salt = 0) {
  std::uint64_t h = SplitMix64::mix(global_seed ^ 0x5EEDC0DE5EEDC0DEull);
  h = fnv1a64(term, h);
  return SplitMix64::mix(h + 0x9E3779B97F4A7C15ull * (std::uint64_t{salt} + 1));
}

/// Deterministic seed vector of a term: a pure function of
/// (term bytes, global seed, d, m, salt).
inline SeedVector make_seed(std::string_view term, const SpaceConfig& config, std::uint32_t salt = 0) {
  if (term.empty()) throw DomainError("seed requested for an empty term");
  config.validate();
  SplitMix64 rng(seed_key(term, config.global_seed, salt));
  return draw_seed(rng, config.dim, config.m);
}

/// Scalar product in units of 1/(2m): an integer in [-2m, 2m].
inline int seed_dot_units(const SeedVector& a, const SeedVector& b) {
  if (a.dim != b.dim || a.m() != b.m()) throw DomainError("seed vectors from different configurations");
  auto count_common = [](const std::vector<std::uint32_t>& x, const std::vector<std::uint32_t>& y) {
    int n = 0;
    auto i = x.begin();
    auto j = y.begin();
    while (i != x.end() && j != y.end()) {
      if (*i < *j) {
        ++i;
      } else if (*j < *i) {
        ++j;
      } else {
        ++n;
        ++i;
        ++j;
      }
    }
    return n;
  };
  return count_common(a.positive, b.positive) + count_common(a.negative, b.negative) -
         count_common(a.positive, b.negative) - count_common(a.negative, b.positive);
}

inline double seed_dot(const SeedVector& a, const SeedVector& b) {
  const int units = seed_dot_units(a, b);
  return static_cast<double>(units) / (2.0 * a.m());
}

using BigInt = boost::multiprecision::cpp_int;

inline BigInt binomial(std::uint32_t n, std::uint32_t k) {
  if (k > n) return 0;
  k = std::min(k, n - k);
  BigInt r = 1;
  for (std::uint32_t i = 1; i <= k; ++i) {
    r *= n - k + i;
    r /= i;
  }
  return r;
}

/// Number of distinct seed vectors: C(d, 2m) * C(2m, m).
inline BigInt n_seed(std::uint32_t dim, std::uint32_t m) {
  if (2ull * m > dim) throw DomainError("n_seed requires 2m <= d");
  return binomial(dim, 2 * m) * binomial(2 * m, m);
}

/// Probability of v shared non-zero coordinates between two seeds, binomial
/// law with p = 2m/d.
inline double p_overlap(std::uint32_t v, std::uint32_t dim, std::uint32_t m) {
  if (v > 2 * m) throw DomainError("overlap v must lie in [0, 2m]");
  if (dim == 0 || 2ull * m > dim) throw DomainError("p_overlap requires 2m <= d");
  const double p = 2.0 * m / dim;
  const double c = binomial(2 * m, v).convert_to<double>();
  return c * std::pow(p, v) * std::pow(1.0 - p, 2 * m - v);
}

inline double p_overlap(std::uint32_t v, const SpaceConfig& config) {
  config.validate();
  return p_overlap(v, config.dim, config.m);
}

/// Probability that an overlap of v yields the scalar s/(2m); zero when v+s is odd.
inline double p_scalar(int v, int s) {
  if (v < 0) throw DomainError("overlap v must be non-negative");
  if (s < -v || s > v) throw DomainError("scalar s must lie in [-v, v]");
  if ((v + s) % 2 != 0) return 0.0;
  const auto q = static_cast<std::uint32_t>((v + s) / 2);
  return std::ldexp(binomial(static_cast<std::uint32_t>(v), q).convert_to<double>(), -v);
}

}  // namespace rvsem
