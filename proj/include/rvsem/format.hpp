#pragma once

#include <ostream>
#include <string>
#include <string_view>

#include <fmt/format.h>
#include <json.hpp>

#include "rvsem/errors.hpp"
#include "rvsem/lexicon.hpp"
#include "rvsem/noise.hpp"
#include "rvsem/query.hpp"
#include "rvsem/seedgen.hpp"
#include "rvsem/space.hpp"

namespace rvsem {

enum class OutputFormat { table, json, csv };

inline OutputFormat parse_format(std::string_view s) {
  if (s == "table") return OutputFormat::table;
  if (s == "json") return OutputFormat::json;
  if (s == "csv") return OutputFormat::csv;
  throw DomainError("unknown output format: " + std::string(s));
}

using Json = nlohmann::json;

inline std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\n") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

inline Json to_json(const Neighbor& n) { return {{"term", n.term}, {"similarity", n.similarity}}; }

inline Json to_json(const NeighborList& list) {
  Json entries = Json::array();
  for (const auto& e : list.entries) entries.push_back(to_json(e));
  return {{"query_term", list.query_term},
          {"subtracted_terms", list.subtracted_terms},
          {"k", list.k},
          {"renormalized", list.renormalized},
          {"entries", std::move(entries)}};
}

inline Json to_json(const ClusterSet& set) {
  Json clusters = Json::array();
  for (const auto& c : set.clusters) {
    Json members = Json::array();
    for (const auto& m : c.members) members.push_back(to_json(m));
    clusters.push_back({{"label", c.label},
                        {"cliques", c.cliques},
                        {"centroid_similarity", c.centroid_similarity},
                        {"members", std::move(members)}});
  }
  return {{"query_term", set.query_term}, {"subtracted_terms", set.subtracted_terms}, {"clusters", std::move(clusters)}};
}

inline Json to_json(const ScalarPmf& pmf) {
  Json support = Json::array();
  for (int s = -pmf.max_units(); s <= pmf.max_units(); ++s) {
    support.push_back({{"units", s}, {"value", pmf.value(s)}, {"p", pmf.probability(s)}});
  }
  Json overlap = Json::array();
  for (std::uint32_t v = 0; v <= 2 * pmf.m; ++v) overlap.push_back(p_overlap(v, pmf.dim, pmf.m));
  return {{"d", pmf.dim},
          {"m", pmf.m},
          {"n_seed", n_seed(pmf.dim, pmf.m).str()},
          {"p_overlap", std::move(overlap)},
          {"pmf", std::move(support)},
          {"total", pmf.total()},
          {"std", pmf.stddev()}};
}

inline Json to_json(const LexiconStats& s) {
  return {{"n_terms", s.n_terms},
          {"n_cliques", s.n_cliques},
          {"diameter_min", s.min_diameter},
          {"diameter_mean", s.mean_diameter},
          {"diameter_max", s.max_diameter}};
}

inline Json to_json(const Histogram& h) {
  return {{"origin", h.origin},     {"width", h.width}, {"counts", h.counts},
          {"sample_count", h.total}, {"mean", h.mean()}, {"std", h.stddev()}};
}

inline Json to_json(const NoiseReport& r) {
  Json j{{"d", r.dim},
         {"m", r.m},
         {"mode", r.mode == SampleMode::seed ? "seed" : "composite"},
         {"rng_seed", r.rng_seed},
         {"n_seed", n_seed(r.dim, r.m).str()},
         {"sample_count", r.sample_count},
         {"empirical_mean", r.empirical.mean()},
         {"empirical_std", r.empirical_std},
         {"theoretical_std", r.theoretical_std},
         {"reference_gaussian_std", kReferenceNoiseStd},
         {"max_abs_deviation", r.max_abs_deviation}};
  if (r.deviation) {
    j["band_pass"] = r.deviation->pass;
    j["max_band_ratio"] = r.deviation->max_band_ratio;
  }
  return j;
}

inline void write_neighbors(std::ostream& os, const NeighborList& list, OutputFormat fmt) {
  switch (fmt) {
    case OutputFormat::json:
      os << to_json(list).dump() << '\n';
      break;
    case OutputFormat::csv:
      os << "rank,term,similarity\n";
      for (std::size_t i = 0; i < list.entries.size(); ++i) {
        os << fmt::format("{},{},{:.17g}\n", i + 1, csv_field(list.entries[i].term), list.entries[i].similarity);
      }
      break;
    case OutputFormat::table:
      for (std::size_t i = 0; i < list.entries.size(); ++i) {
        os << fmt::format("{:>4} {:.3f} {}\n", i + 1, list.entries[i].similarity, list.entries[i].term);
      }
      break;
  }
}

inline void write_clusters(std::ostream& os, const ClusterSet& set, OutputFormat fmt) {
  switch (fmt) {
    case OutputFormat::json:
      os << to_json(set).dump() << '\n';
      break;
    case OutputFormat::csv:
      os << "cluster,centroid_similarity,rank,term,similarity\n";
      for (std::size_t c = 0; c < set.clusters.size(); ++c) {
        const auto& cl = set.clusters[c];
        for (std::size_t i = 0; i < cl.members.size(); ++i) {
          os << fmt::format("{},{:.17g},{},{},{:.17g}\n", c + 1, cl.centroid_similarity, i + 1,
                            csv_field(cl.members[i].term), cl.members[i].similarity);
        }
      }
      break;
    case OutputFormat::table:
      for (std::size_t c = 0; c < set.clusters.size(); ++c) {
        const auto& cl = set.clusters[c];
        if (c) os << '\n';
        os << fmt::format("[{:.3f}] {}\n", cl.centroid_similarity, fmt::join(cl.label, ", "));
        for (const auto& m : cl.members) os << fmt::format("  {:.2f} {}\n", m.similarity, m.term);
      }
      break;
  }
}

/// CSV rows: bin_center, theoretical_p, empirical_p, gaussian_ref. Seed
/// mode has one row per multiple of 1/(2m); composite mode one per 0.002
/// bin, with the theoretical column given by the normal law of the pmf's
/// standard deviation.
inline void write_noise_csv(std::ostream& os, const NoiseReport& r) {
  os << "bin_center,theoretical_p,empirical_p,gaussian_ref\n";
  const auto& h = r.empirical;
  const double n = h.total ? static_cast<double>(h.total) : 1.0;
  for (std::size_t b = 0; b < h.counts.size(); ++b) {
    const double lo = h.origin + static_cast<double>(b) * h.width;
    const double hi = lo + h.width;
    double theory = 0.0;
    if (r.mode == SampleMode::seed) {
      theory = r.theoretical.probability(static_cast<int>(b) - r.theoretical.max_units());
    } else {
      theory = normal_mass(lo, hi, r.theoretical_std);
    }
    os << fmt::format("{:.6f},{:.9e},{:.9e},{:.9e}\n", h.center(b), theory, static_cast<double>(h.counts[b]) / n,
                      normal_mass(lo, hi, kReferenceNoiseStd));
  }
}

inline void write_histogram_csv(std::ostream& os, const Histogram& h) {
  os << "bin_center,count,empirical_p\n";
  const double n = h.total ? static_cast<double>(h.total) : 1.0;
  for (std::size_t b = 0; b < h.counts.size(); ++b) {
    if (h.counts[b] == 0) continue;
    os << fmt::format("{:.6f},{},{:.9e}\n", h.center(b), h.counts[b], static_cast<double>(h.counts[b]) / n);
  }
}

}  // namespace rvsem
