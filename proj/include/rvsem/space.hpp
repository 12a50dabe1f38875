#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "rvsem/errors.hpp"
#include "rvsem/lexicon.hpp"
#include "rvsem/seedgen.hpp"

namespace rvsem {

/// ln(n_cliques / df): zero for a term present in every clique.
inline double inverse_document_frequency(std::size_t df, std::size_t n_cliques) {
  if (df == 0 || df > n_cliques) throw DomainError("document frequency out of range");
  return std::log(static_cast<double>(n_cliques) / static_cast<double>(df));
}

/// (1 + ln tf) * idf; tf >= 1.
inline double tf_idf(std::size_t tf, double idf) {
  if (tf == 0) throw DomainError("term frequency must be >= 1");
  return (1.0 + std::log(static_cast<double>(tf))) * idf;
}

/// Weight of term t inside clique k, with idf taken fresh from the lexicon.
/// Terms are unique within a clique, so tf is always 1.
inline double weight(const Lexicon& lex, TermId t, CliqueId k, Weighting scheme) {
  if (!lex.contains(k, t)) {
    throw DomainError("term '" + lex.term(t) + "' is not in clique " + std::to_string(k));
  }
  if (scheme == Weighting::uniform) return 1.0;
  return tf_idf(1, inverse_document_frequency(lex.membership(t).size(), lex.n_cliques()));
}

struct BuildReport {
  std::vector<TermId> degenerate;
  std::size_t salt_repairs = 0;
};

struct UpdateReport {
  CliqueId clique = 0;
  std::vector<TermId> new_terms;
  std::vector<TermId> touched;  // sorted; exactly the rebuilt vectors
};

class SemanticSpace;
inline SemanticSpace load_space(std::istream& in);

/// Lexicon, seeds and unit term vectors (float32, row order = term order).
///
/// Each term vector is the unweighted sum of the vectors of the cliques that
/// contain it, each clique vector being the weighted sum of its members'
/// seeds. The idf table is frozen between full re-weightings so that
/// incremental updates stay local.
class SemanticSpace {
 public:
  SemanticSpace() = default;

  /// Builds every term vector. Seed collisions are repaired by salting.
  static SemanticSpace build(Lexicon lexicon, const SpaceConfig& config, BuildReport* report = nullptr) {
    config.validate();
    SemanticSpace s;
    s.config_ = config;
    s.lexicon_ = std::move(lexicon);
    const auto n = s.lexicon_.n_terms();
    s.salts_.assign(n, 0);
    s.seeds_.reserve(n);
    std::size_t repairs = 0;
    for (TermId t = 0; t < n; ++t) repairs += s.add_seed(t);
    s.idf_.resize(n);
    for (TermId t = 0; t < n; ++t) s.idf_[t] = s.fresh_idf(t);
    s.recompute_vectors();
    if (report) {
      report->salt_repairs = repairs;
      report->degenerate = s.degenerate_terms();
    }
    return s;
  }

  const SpaceConfig& config() const noexcept { return config_; }
  const Lexicon& lexicon() const noexcept { return lexicon_; }
  std::size_t n_terms() const noexcept { return lexicon_.n_terms(); }
  std::uint32_t dim() const noexcept { return config_.dim; }

  std::span<const float> vector(TermId t) const {
    check(t);
    return {coords_.data() + std::size_t{t} * config_.dim, config_.dim};
  }
  std::span<const float> coordinates() const noexcept { return coords_; }

  bool is_degenerate(TermId t) const {
    check(t);
    return degenerate_[t] != 0;
  }
  std::vector<TermId> degenerate_terms() const {
    std::vector<TermId> out;
    for (TermId t = 0; t < degenerate_.size(); ++t) {
      if (degenerate_[t]) out.push_back(t);
    }
    return out;
  }

  const SeedVector& seed(TermId t) const {
    check(t);
    return seeds_[t];
  }
  std::uint32_t salt(TermId t) const {
    check(t);
    return salts_[t];
  }
  /// Frozen idf used for this term's weight in every clique.
  double idf(TermId t) const {
    check(t);
    return idf_[t];
  }

  /// rho_t^k under the space's weighting and frozen idf table.
  double weight(TermId t, CliqueId k) const {
    if (!lexicon_.contains(k, t)) {
      throw DomainError("term '" + lexicon_.term(t) + "' is not in clique " + std::to_string(k));
    }
    return member_weight(t);
  }

  /// C_k = sum of rho_i^k s_i, dense and unnormalized.
  std::vector<double> clique_vector(CliqueId k) const {
    std::vector<double> acc(config_.dim, 0.0);
    for (TermId i : lexicon_.clique(k)) accumulate_seed(acc, i, member_weight(i));
    return acc;
  }

  /// Unit-norm sum of the clique vectors containing t; empty when the sum
  /// vanishes (degenerate term).
  std::vector<double> term_vector(TermId t) const {
    std::vector<double> acc(config_.dim, 0.0);
    for (CliqueId k : lexicon_.membership(t)) {
      for (TermId i : lexicon_.clique(k)) accumulate_seed(acc, i, member_weight(i));
    }
    double sq = 0.0;
    for (double x : acc) sq += x * x;
    if (!(sq > kDegenerateNormSq)) return {};
    const double inv = 1.0 / std::sqrt(sq);
    for (double& x : acc) x *= inv;
    return acc;
  }

  /// Rebuilds every vector with the current (frozen) idf table.
  void recompute_vectors() {
    const auto n = n_terms();
    coords_.assign(n * config_.dim, 0.0f);
    degenerate_.assign(n, 0);
    for (TermId t = 0; t < n; ++t) store_vector(t);
  }

  /// Refreshes every idf from the lexicon, then rebuilds all vectors.
  void reweight() {
    for (TermId t = 0; t < n_terms(); ++t) idf_[t] = fresh_idf(t);
    recompute_vectors();
  }

  /// Inserts a clique and rebuilds exactly the vectors of the union of the
  /// members' neighborhoods. Only the members' idf values are refreshed;
  /// every other weight stays frozen, which keeps all changes inside that
  /// union. Caller must hold exclusive access.
  UpdateReport add_clique(std::span<const std::string> terms) {
    UpdateReport report;
    const auto before = n_terms();
    report.clique = lexicon_.add_clique(terms);
    const auto n = n_terms();
    salts_.resize(n, 0);
    idf_.resize(n, 0.0);
    degenerate_.resize(n, 0);
    coords_.resize(n * config_.dim, 0.0f);
    for (TermId t = static_cast<TermId>(before); t < n; ++t) {
      add_seed(t);
      report.new_terms.push_back(t);
    }
    const auto members = lexicon_.clique(report.clique);
    for (TermId t : members) idf_[t] = fresh_idf(t);
    for (TermId t : members) {
      const auto d = lexicon_.neighborhood(t);
      report.touched.insert(report.touched.end(), d.begin(), d.end());
    }
    std::sort(report.touched.begin(), report.touched.end());
    report.touched.erase(std::unique(report.touched.begin(), report.touched.end()), report.touched.end());
    for (TermId t : report.touched) store_vector(t);
    return report;
  }

 private:
  friend SemanticSpace load_space(std::istream& in);

  static constexpr double kDegenerateNormSq = 1e-24;

  void check(TermId t) const {
    if (t >= n_terms()) throw NotFoundError("#" + std::to_string(t));
  }

  // tf is 1 for every member, so the weight depends on the term only.
  double member_weight(TermId t) const {
    return config_.weighting == Weighting::uniform ? 1.0 : tf_idf(1, idf_[t]);
  }

  double fresh_idf(TermId t) const {
    return inverse_document_frequency(lexicon_.membership(t).size(), lexicon_.n_cliques());
  }

  void accumulate_seed(std::vector<double>& acc, TermId i, double w) const {
    if (w == 0.0) return;
    const double c = w * seeds_[i].magnitude();
    for (auto p : seeds_[i].positive) acc[p] += c;
    for (auto q : seeds_[i].negative) acc[q] -= c;
  }

  void store_vector(TermId t) {
    const auto v = term_vector(t);
    float* row = coords_.data() + std::size_t{t} * config_.dim;
    degenerate_[t] = v.empty() ? 1 : 0;
    for (std::uint32_t j = 0; j < config_.dim; ++j) row[j] = v.empty() ? 0.0f : static_cast<float>(v[j]);
  }

  // Generates the seed of term t (already present in the lexicon) with the
  // smallest salt that avoids every seed issued so far. Returns the salt.
  std::uint32_t add_seed(TermId t) {
    const auto& term = lexicon_.term(t);
    std::uint32_t salt = salts_[t];
    for (;;) {
      auto s = make_seed(term, config_, salt);
      const auto sig = s.signature();
      const auto [lo, hi] = by_signature_.equal_range(sig);
      const bool clash = std::any_of(lo, hi, [&](const auto& kv) { return seeds_[kv.second] == s; });
      if (!clash) {
        by_signature_.emplace(sig, t);
        if (seeds_.size() <= t) seeds_.resize(std::size_t{t} + 1);
        seeds_[t] = std::move(s);
        salts_[t] = salt;
        return salt;
      }
      ++salt;
    }
  }

  SpaceConfig config_;
  Lexicon lexicon_;
  std::vector<SeedVector> seeds_;
  std::unordered_multimap<std::uint64_t, TermId> by_signature_;
  std::vector<std::uint32_t> salts_;
  std::vector<double> idf_;
  std::vector<std::uint8_t> degenerate_;
  std::vector<float> coords_;
};

inline SemanticSpace build_space(Lexicon lexicon, const SpaceConfig& config, BuildReport* report = nullptr) {
  return SemanticSpace::build(std::move(lexicon), config, report);
}

inline std::vector<double> build_clique_vector(const SemanticSpace& space, CliqueId k) {
  return space.clique_vector(k);
}

/// Throws DegenerateTermError when the sum vanishes.
inline std::vector<double> build_term_vector(const SemanticSpace& space, TermId t) {
  auto v = space.term_vector(t);
  if (v.empty()) throw DegenerateTermError(space.lexicon().term(t));
  return v;
}

inline UpdateReport add_clique(SemanticSpace& space, std::span<const std::string> terms) {
  return space.add_clique(terms);
}

}  // namespace rvsem
