#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <thread>
#include <vector>

#include "rvsem/errors.hpp"
#include "rvsem/query.hpp"
#include "rvsem/seedgen.hpp"
#include "rvsem/space.hpp"

namespace rvsem {

/// Standard deviation of the Gaussian drawn as a reference over real-data
/// tails at d = 2500. Reported only, never a pass/fail criterion.
inline constexpr double kReferenceNoiseStd = 0.063;
/// Bin width for continuous-valued histograms (composite mode, tails).
inline constexpr double kContinuousBinWidth = 0.002;
/// Seeds summed per synthetic term vector in composite mode.
inline constexpr int kCompositeSeeds = 5;

/// Distribution of the scalar product of two random seeds over s/(2m),
/// s in [-2m, 2m].
struct ScalarPmf {
  std::uint32_t dim = 0;
  std::uint32_t m = 0;
  std::vector<double> p;  // index s + 2m

  int max_units() const noexcept { return static_cast<int>(2 * m); }
  double probability(int s) const {
    if (s < -max_units() || s > max_units()) return 0.0;
    return p[static_cast<std::size_t>(s + max_units())];
  }
  double value(int s) const { return s / (2.0 * m); }

  double total() const {
    double t = 0.0;
    for (double x : p) t += x;
    return t;
  }
  double variance() const {
    double v = 0.0;
    for (int s = -max_units(); s <= max_units(); ++s) v += probability(s) * value(s) * value(s);
    return v;
  }
  double stddev() const { return std::sqrt(variance()); }
};

/// P(s) = sum over v >= |s| of p_overlap(v) * p_scalar(v, s).
inline ScalarPmf theoretical_pmf(std::uint32_t dim, std::uint32_t m) {
  SpaceConfig{dim, m, 0, Weighting::uniform}.validate();
  ScalarPmf pmf{dim, m, std::vector<double>(4 * std::size_t{m} + 1, 0.0)};
  const int top = static_cast<int>(2 * m);
  std::vector<double> overlap(static_cast<std::size_t>(top) + 1);
  for (int v = 0; v <= top; ++v) overlap[static_cast<std::size_t>(v)] = p_overlap(static_cast<std::uint32_t>(v), dim, m);
  for (int s = -top; s <= top; ++s) {
    double acc = 0.0;
    for (int v = std::abs(s); v <= top; ++v) acc += overlap[static_cast<std::size_t>(v)] * p_scalar(v, s);
    pmf.p[static_cast<std::size_t>(s + top)] = acc;
  }
  return pmf;
}

inline ScalarPmf theoretical_pmf(const SpaceConfig& config) { return theoretical_pmf(config.dim, config.m); }

/// Fixed-width histogram with running moments.
struct Histogram {
  double origin = 0.0;  // left edge of bin 0
  double width = 1.0;
  std::vector<std::uint64_t> counts;
  std::uint64_t total = 0;
  double sum = 0.0;
  double sum_sq = 0.0;

  double center(std::size_t i) const { return origin + (static_cast<double>(i) + 0.5) * width; }
  double mean() const { return total ? sum / static_cast<double>(total) : 0.0; }
  double stddev() const {
    if (total == 0) return 0.0;
    const double mu = mean();
    return std::sqrt(std::max(0.0, sum_sq / static_cast<double>(total) - mu * mu));
  }

  // Values past either end land in the edge bins.
  void add(double x) {
    const double pos = std::floor((x - origin) / width);
    const auto last = static_cast<double>(counts.size() - 1);
    add_to_bin(static_cast<std::size_t>(std::clamp(pos, 0.0, last)), x);
  }
  void add_to_bin(std::size_t bin, double x) {
    ++counts[bin];
    ++total;
    sum += x;
    sum_sq += x * x;
  }
  void merge(const Histogram& o) {
    if (o.counts.size() != counts.size() || o.origin != origin || o.width != width) {
      throw DomainError("histogram binning mismatch");
    }
    for (std::size_t i = 0; i < counts.size(); ++i) counts[i] += o.counts[i];
    total += o.total;
    sum += o.sum;
    sum_sq += o.sum_sq;
  }
};

/// One bin per multiple of 1/(2m) in [-1, 1].
inline Histogram discrete_histogram(std::uint32_t m) {
  Histogram h;
  h.width = 1.0 / (2.0 * m);
  h.origin = (-2.0 * m - 0.5) * h.width;
  h.counts.assign(4 * std::size_t{m} + 1, 0);
  return h;
}

/// Bins of kContinuousBinWidth over [-1, 1].
inline Histogram continuous_histogram() {
  Histogram h;
  h.width = kContinuousBinWidth;
  h.origin = -1.0;
  h.counts.assign(static_cast<std::size_t>(std::lround(2.0 / kContinuousBinWidth)), 0);
  return h;
}

enum class SampleMode { seed, composite };

namespace noise_detail {

inline constexpr std::uint64_t kChunk = 1u << 16;

inline SplitMix64 chunk_rng(std::uint64_t rng_seed, std::uint64_t chunk) {
  return SplitMix64(SplitMix64::mix(rng_seed ^ SplitMix64::mix(chunk + 1)));
}

// Scratch for one worker; everything is returned to zero after each sample.
struct Scratch {
  explicit Scratch(std::uint32_t dim)
      : taken((dim + 63) / 64, 0), sign(dim, 0), acc_a(dim, 0), acc_b(dim, 0), mark(dim, 0) {}
  std::vector<std::uint64_t> taken;
  std::vector<std::uint32_t> drawn, drawn_b;
  std::vector<std::int8_t> sign;
  std::vector<std::int32_t> acc_a, acc_b;
  std::vector<std::uint8_t> mark;
  std::vector<std::uint32_t> touched;
};

// <s_a|s_b> * 2m for two fresh random seeds.
inline int seed_pair_units(SplitMix64& rng, std::uint32_t dim, std::uint32_t m, Scratch& w) {
  detail::draw_indices(rng, dim, 2 * m, w.taken, w.drawn);
  for (std::uint32_t k = 0; k < 2 * m; ++k) w.sign[w.drawn[k]] = k < m ? 1 : -1;
  detail::draw_indices(rng, dim, 2 * m, w.taken, w.drawn_b);
  int s = 0;
  for (std::uint32_t k = 0; k < 2 * m; ++k) s += (k < m ? 1 : -1) * w.sign[w.drawn_b[k]];
  for (auto i : w.drawn) w.sign[i] = 0;
  return s;
}

// Adds kCompositeSeeds random seeds (in units of 1/sqrt(2m)) into acc.
inline void composite(SplitMix64& rng, std::uint32_t dim, std::uint32_t m, Scratch& w, std::vector<std::int32_t>& acc) {
  for (int r = 0; r < kCompositeSeeds; ++r) {
    detail::draw_indices(rng, dim, 2 * m, w.taken, w.drawn);
    for (std::uint32_t k = 0; k < 2 * m; ++k) {
      const auto i = w.drawn[k];
      acc[i] += k < m ? 1 : -1;
      if (!w.mark[i]) {
        w.mark[i] = 1;
        w.touched.push_back(i);
      }
    }
  }
}

inline double composite_pair(SplitMix64& rng, std::uint32_t dim, std::uint32_t m, Scratch& w) {
  for (;;) {
    w.touched.clear();
    composite(rng, dim, m, w, w.acc_a);
    composite(rng, dim, m, w, w.acc_b);
    std::int64_t aa = 0, bb = 0, ab = 0;
    for (auto i : w.touched) {
      const std::int64_t x = w.acc_a[i], y = w.acc_b[i];
      aa += x * x;
      bb += y * y;
      ab += x * y;
      w.acc_a[i] = 0;
      w.acc_b[i] = 0;
      w.mark[i] = 0;
    }
    if (aa > 0 && bb > 0) return static_cast<double>(ab) / std::sqrt(static_cast<double>(aa) * static_cast<double>(bb));
  }
}

}  // namespace noise_detail

/// Empirical scalar products of random seed pairs (seed mode, exact
/// multiples of 1/(2m)) or of unit sums of five random seeds (composite
/// mode). Work is split into fixed chunks with their own derived streams,
/// so the result does not depend on the thread count.
inline Histogram sample_seed_noise(const SpaceConfig& config, std::uint64_t n_samples, std::uint64_t rng_seed,
                                   SampleMode mode = SampleMode::seed, unsigned threads = 0) {
  config.validate();
  const auto dim = config.dim;
  const auto m = config.m;
  const auto make = [&] { return mode == SampleMode::seed ? discrete_histogram(m) : continuous_histogram(); };
  const std::uint64_t n_chunks = (n_samples + noise_detail::kChunk - 1) / noise_detail::kChunk;
  std::vector<Histogram> parts(n_chunks, make());

  auto work = [&](std::uint64_t first, std::uint64_t stride) {
    noise_detail::Scratch scratch(dim);
    for (std::uint64_t c = first; c < n_chunks; c += stride) {
      auto rng = noise_detail::chunk_rng(rng_seed, c);
      const auto begin = c * noise_detail::kChunk;
      const auto end = std::min(n_samples, begin + noise_detail::kChunk);
      auto& h = parts[c];
      for (auto i = begin; i < end; ++i) {
        if (mode == SampleMode::seed) {
          const int s = noise_detail::seed_pair_units(rng, dim, m, scratch);
          h.add_to_bin(static_cast<std::size_t>(s + static_cast<int>(2 * m)), s / (2.0 * m));
        } else {
          h.add(noise_detail::composite_pair(rng, dim, m, scratch));
        }
      }
    }
  };

  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::uint64_t>(threads, std::max<std::uint64_t>(1, n_chunks)));
  if (threads <= 1) {
    work(0, 1);
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(work, t, threads);
  }

  auto out = make();
  for (const auto& p : parts) out.merge(p);
  return out;
}

/// Histogram of the similarities of `term`'s neighbors at ranks
/// [start_rank, start_rank + count), rank 0 being the term itself.
inline Histogram tail_noise(const SemanticSpace& space, TermId term, std::size_t start_rank, std::size_t count) {
  const auto ranked = rank_all(space, term);
  if (start_rank > ranked.size() || count > ranked.size() - start_rank) {
    throw DomainError("tail range [" + std::to_string(start_rank) + ", " + std::to_string(start_rank + count) +
                      ") exceeds the " + std::to_string(ranked.size()) + " ranked terms");
  }
  auto h = continuous_histogram();
  for (std::size_t r = start_rank; r < start_rank + count; ++r) h.add(ranked[r].similarity);
  return h;
}

struct BinDeviation {
  double center = 0.0;
  double theoretical = 0.0;
  double empirical = 0.0;
  double deviation = 0.0;  // |empirical - theoretical|
  double band = 0.0;       // allowed deviation
};

struct DeviationReport {
  std::vector<BinDeviation> bins;
  double max_abs_deviation = 0.0;
  double max_band_ratio = 0.0;  // max deviation/band; <= 1 passes
  bool pass = false;
};

/// Smallest expected count for which the normal approximation of a bin's
/// standard error is used; rarer bins use this count as a floor.
inline constexpr double kMinExpectedCount = 5.0;
inline constexpr double kBandSigmas = 4.0;

/// Maps the pmf onto the histogram's bins and checks every bin against a
/// 4-standard-error binomial band. Support points outside the histogram
/// range are a binning mismatch.
inline DeviationReport compare(const ScalarPmf& theory, const Histogram& empirical) {
  if (empirical.total == 0) throw DomainError("cannot compare against an empty histogram");
  std::vector<double> expected(empirical.counts.size(), 0.0);
  for (int s = -theory.max_units(); s <= theory.max_units(); ++s) {
    const double pos = std::floor((theory.value(s) - empirical.origin) / empirical.width);
    if (pos < 0 || pos >= static_cast<double>(expected.size())) {
      throw DomainError("binning mismatch: support value " + std::to_string(theory.value(s)) + " outside histogram");
    }
    expected[static_cast<std::size_t>(pos)] += theory.probability(s);
  }
  const auto n = static_cast<double>(empirical.total);
  DeviationReport r;
  r.pass = true;
  for (std::size_t b = 0; b < expected.size(); ++b) {
    BinDeviation d;
    d.center = empirical.center(b);
    d.theoretical = expected[b];
    d.empirical = static_cast<double>(empirical.counts[b]) / n;
    d.deviation = std::abs(d.empirical - d.theoretical);
    const double p = std::min(1.0, std::max(d.theoretical, kMinExpectedCount / n));
    d.band = kBandSigmas * std::sqrt(p * (1.0 - p) / n);
    r.max_abs_deviation = std::max(r.max_abs_deviation, d.deviation);
    if (d.band > 0.0) r.max_band_ratio = std::max(r.max_band_ratio, d.deviation / d.band);
    if (d.deviation > d.band) r.pass = false;
    r.bins.push_back(d);
  }
  return r;
}

/// Pointwise comparison of two pmfs over the same support. Any difference fails.
inline DeviationReport compare(const ScalarPmf& a, const ScalarPmf& b) {
  if (a.m != b.m) throw DomainError("binning mismatch: different m");
  DeviationReport r;
  r.pass = true;
  for (int s = -a.max_units(); s <= a.max_units(); ++s) {
    BinDeviation d{a.value(s), a.probability(s), b.probability(s), std::abs(a.probability(s) - b.probability(s)), 0.0};
    r.max_abs_deviation = std::max(r.max_abs_deviation, d.deviation);
    if (d.deviation > 0.0) r.pass = false;
    r.bins.push_back(d);
  }
  return r;
}

struct NoiseReport {
  std::uint32_t dim = 0;
  std::uint32_t m = 0;
  SampleMode mode = SampleMode::seed;
  std::uint64_t rng_seed = 0;
  ScalarPmf theoretical;
  Histogram empirical;
  std::uint64_t sample_count = 0;
  double empirical_std = 0.0;
  double theoretical_std = 0.0;
  std::optional<DeviationReport> deviation;  // seed mode with samples only
  double max_abs_deviation = 0.0;
};

inline NoiseReport noise_report(std::uint32_t dim, std::uint32_t m, SampleMode mode, std::uint64_t n_samples,
                                std::uint64_t rng_seed, unsigned threads = 0) {
  NoiseReport r;
  r.dim = dim;
  r.m = m;
  r.mode = mode;
  r.rng_seed = rng_seed;
  r.theoretical = theoretical_pmf(dim, m);
  r.empirical = sample_seed_noise(SpaceConfig{dim, m, 0, Weighting::uniform}, n_samples, rng_seed, mode, threads);
  r.sample_count = r.empirical.total;
  r.empirical_std = r.empirical.stddev();
  r.theoretical_std = r.theoretical.stddev();
  if (mode == SampleMode::seed && r.sample_count > 0) {
    r.deviation = compare(r.theoretical, r.empirical);
    r.max_abs_deviation = r.deviation->max_abs_deviation;
  }
  return r;
}

/// Probability mass of N(0, sigma^2) on [lo, hi).
inline double normal_mass(double lo, double hi, double sigma) {
  const double k = 1.0 / (sigma * std::sqrt(2.0));
  return 0.5 * (std::erf(hi * k) - std::erf(lo * k));
}

}  // namespace rvsem
