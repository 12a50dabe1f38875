#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rvsem/errors.hpp"
#include "rvsem/space.hpp"

namespace rvsem {

struct Neighbor {
  TermId id = 0;
  std::string term;
  double similarity = 0.0;
};

struct NeighborList {
  std::string query_term;
  std::vector<std::string> subtracted_terms;
  std::vector<Neighbor> entries;  // non-increasing similarity, ties by term id
  std::size_t k = 0;
  bool renormalized = false;
};

struct Cluster {
  std::vector<CliqueId> cliques;    // seeding cliques (more than one after a merge)
  std::vector<std::string> label;   // union of the seeding cliques' terms
  double centroid_similarity = 0.0; // centroid vs query vector
  std::vector<Neighbor> members;    // ranked by similarity to the centroid
};

struct ClusterSet {
  std::string query_term;
  std::vector<std::string> subtracted_terms;
  std::vector<Cluster> clusters;
};

struct NeighborOptions {
  bool renormalize = false;
};

struct ClusterOptions {
  double merge_threshold = 0.9;
  std::size_t members = 20;
};

/// Residual norm below which a subtracted term counts as linearly dependent.
inline constexpr double kDependenceTolerance = 1e-6;

namespace query_detail {

// Accumulates in coordinate order so that dot(a, b) == dot(b, a) bit for bit.
inline double dot(std::span<const float> a, std::span<const float> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += double{a[i]} * double{b[i]};
  return s;
}

inline double dot(std::span<const double> a, std::span<const float> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * double{b[i]};
  return s;
}

inline double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm(std::span<const double> a) { return std::sqrt(dot(a, a)); }

inline std::vector<double> widen(std::span<const float> v) { return {v.begin(), v.end()}; }

inline void require_usable(const SemanticSpace& space, TermId t) {
  if (space.is_degenerate(t)) throw DegenerateTermError(space.lexicon().term(t));
}

// Orthonormal basis of the subtracted terms' span, built by classical
// Gram-Schmidt with one re-orthogonalization pass.
class SubtractionBasis {
 public:
  SubtractionBasis(const SemanticSpace& space, TermId base, std::span<const TermId> minus) {
    for (TermId t : minus) {
      require_usable(space, t);
      if (t == base) throw DomainError("cannot subtract the query term itself: " + space.lexicon().term(t));
    }
    for (TermId t : minus) {
      auto u = widen(space.vector(t));
      for (int pass = 0; pass < 2; ++pass) remove_from(u);
      const double n = norm(u);
      if (n < kDependenceTolerance) throw DependentSubtrahendError(space.lexicon().term(t));
      for (double& x : u) x /= n;
      basis_.push_back(std::move(u));
    }
  }

  void remove_from(std::vector<double>& v) const {
    for (const auto& q : basis_) {
      const double c = dot(std::span<const double>(v), std::span<const double>(q));
      for (std::size_t i = 0; i < v.size(); ++i) v[i] -= c * q[i];
    }
  }

  void project_out(std::vector<double>& v) const {
    remove_from(v);
    remove_from(v);
  }

 private:
  std::vector<std::vector<double>> basis_;
};

inline std::vector<TermId> resolve(const SemanticSpace& space, std::span<const std::string> terms) {
  std::vector<TermId> ids;
  ids.reserve(terms.size());
  for (const auto& t : terms) ids.push_back(space.lexicon().id_of(t));
  return ids;
}

struct Scored {
  TermId id;
  double score;
};

inline bool better(const Scored& a, const Scored& b) {
  return a.score > b.score || (a.score == b.score && a.id < b.id);
}

// Scores every non-degenerate term against v and keeps the best k in order.
inline std::vector<Scored> top_k(const SemanticSpace& space, std::span<const double> v, std::size_t k) {
  std::vector<Scored> all;
  all.reserve(space.n_terms());
  for (TermId t = 0; t < space.n_terms(); ++t) {
    if (space.is_degenerate(t)) continue;
    all.push_back({t, dot(v, space.vector(t))});
  }
  k = std::min(k, all.size());
  std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(k), all.end(), better);
  all.resize(k);
  return all;
}

inline std::vector<Neighbor> to_neighbors(const SemanticSpace& space, const std::vector<Scored>& scored) {
  std::vector<Neighbor> out;
  out.reserve(scored.size());
  for (const auto& s : scored) out.push_back({s.id, space.lexicon().term(s.id), s.score});
  return out;
}

inline std::vector<std::string> names(const SemanticSpace& space, std::span<const TermId> ids) {
  std::vector<std::string> out;
  for (TermId t : ids) out.push_back(space.lexicon().term(t));
  return out;
}

}  // namespace query_detail

/// sigma = <T_a | T_b>.
inline double similarity(const SemanticSpace& space, TermId a, TermId b) {
  query_detail::require_usable(space, a);
  query_detail::require_usable(space, b);
  return query_detail::dot(space.vector(a), space.vector(b));
}

inline double similarity(const SemanticSpace& space, std::string_view a, std::string_view b) {
  return similarity(space, space.lexicon().id_of(a), space.lexicon().id_of(b));
}

/// sqrt(2 (1 - sigma)), with float noise at +-1 clamped.
inline double distance(double sigma) {
  constexpr double slack = 1e-6;
  if (!(sigma >= -1.0 - slack && sigma <= 1.0 + slack)) {
    throw DomainError("similarity outside [-1, 1]: " + std::to_string(sigma));
  }
  sigma = std::clamp(sigma, -1.0, 1.0);
  return std::sqrt(2.0 * (1.0 - sigma));
}

/// Base vector minus its projection on the span of the subtracted terms.
/// The subtracted vectors are orthonormalized first, in the given order.
/// The result is not renormalized.
inline std::vector<double> orthogonalize(const SemanticSpace& space, TermId base, std::span<const TermId> minus) {
  query_detail::require_usable(space, base);
  const query_detail::SubtractionBasis basis(space, base, minus);
  auto v = query_detail::widen(space.vector(base));
  if (!minus.empty()) basis.project_out(v);
  return v;
}

inline std::vector<double> orthogonalize(const SemanticSpace& space, std::string_view base,
                                         std::span<const std::string> minus) {
  const auto ids = query_detail::resolve(space, minus);
  return orthogonalize(space, space.lexicon().id_of(base), ids);
}

/// Top-k terms by inner product with the (possibly orthogonalized) query.
/// Subtracted terms stay in the candidate pool.
inline NeighborList neighbors(const SemanticSpace& space, TermId term, std::size_t k, std::span<const TermId> minus,
                              const NeighborOptions& opts = {}) {
  if (k == 0) throw DomainError("k must be >= 1");
  auto q = orthogonalize(space, term, minus);
  if (opts.renormalize) {
    const double n = query_detail::norm(q);
    if (n < kDependenceTolerance) throw DomainError("query vector vanishes after subtraction");
    for (double& x : q) x /= n;
  }
  NeighborList out;
  out.query_term = space.lexicon().term(term);
  out.subtracted_terms = query_detail::names(space, minus);
  out.k = k;
  out.renormalized = opts.renormalize;
  out.entries = query_detail::to_neighbors(space, query_detail::top_k(space, q, k));
  return out;
}

inline NeighborList neighbors(const SemanticSpace& space, std::string_view term, std::size_t k,
                              std::span<const std::string> minus = {}, const NeighborOptions& opts = {}) {
  const auto id = space.lexicon().id_of(term);
  const auto ids = query_detail::resolve(space, minus);
  return neighbors(space, id, k, ids, opts);
}

/// One cluster per clique of the query term. Cliques whose centroids have
/// cosine above the merge threshold are fused. Centroids are subtracted
/// like the query; clusters are ordered by centroid-to-query similarity.
inline ClusterSet clusters(const SemanticSpace& space, TermId term, std::span<const TermId> minus,
                           const ClusterOptions& opts = {}) {
  using namespace query_detail;
  if (opts.members == 0) throw DomainError("cluster size must be >= 1");
  require_usable(space, term);
  const SubtractionBasis basis(space, term, minus);
  auto q = widen(space.vector(term));
  basis.project_out(q);

  const auto& lex = space.lexicon();
  struct Group {
    std::vector<CliqueId> cliques;
    std::vector<TermId> terms;
    std::vector<double> centroid;
  };
  auto centroid_of = [&](const std::vector<TermId>& terms) {
    std::vector<double> c(space.dim(), 0.0);
    for (TermId t : terms) {
      if (space.is_degenerate(t)) continue;
      const auto v = space.vector(t);
      for (std::size_t i = 0; i < c.size(); ++i) c[i] += v[i];
    }
    const double n = norm(c);
    if (n < kDependenceTolerance) return std::vector<double>{};
    for (double& x : c) x /= n;
    return c;
  };

  std::vector<Group> groups;
  for (CliqueId k : lex.membership(term)) {
    const auto members = lex.clique(k);
    std::vector<TermId> terms(members.begin(), members.end());
    auto c = centroid_of(terms);
    if (c.empty()) continue;
    auto target = std::find_if(groups.begin(), groups.end(), [&](const Group& g) {
      return dot(std::span<const double>(g.centroid), std::span<const double>(c)) > opts.merge_threshold;
    });
    if (target == groups.end()) {
      groups.push_back({{k}, std::move(terms), std::move(c)});
      continue;
    }
    target->cliques.push_back(k);
    for (TermId t : members) {
      if (std::find(target->terms.begin(), target->terms.end(), t) == target->terms.end()) target->terms.push_back(t);
    }
    target->centroid = centroid_of(target->terms);
  }

  ClusterSet out;
  out.query_term = lex.term(term);
  out.subtracted_terms = names(space, minus);
  for (auto& g : groups) {
    auto c = std::move(g.centroid);
    basis.project_out(c);
    Cluster cl;
    cl.cliques = std::move(g.cliques);
    cl.label = names(space, g.terms);
    cl.centroid_similarity = dot(std::span<const double>(c), std::span<const double>(q));
    cl.members = to_neighbors(space, top_k(space, c, opts.members));
    out.clusters.push_back(std::move(cl));
  }
  std::stable_sort(out.clusters.begin(), out.clusters.end(), [](const Cluster& a, const Cluster& b) {
    return a.centroid_similarity > b.centroid_similarity;
  });
  return out;
}

inline ClusterSet clusters(const SemanticSpace& space, std::string_view term, std::span<const std::string> minus = {},
                           const ClusterOptions& opts = {}) {
  const auto id = space.lexicon().id_of(term);
  const auto ids = query_detail::resolve(space, minus);
  return clusters(space, id, ids, opts);
}

/// Every non-degenerate term ranked against `term` (self first).
inline std::vector<Neighbor> rank_all(const SemanticSpace& space, TermId term) {
  const auto q = query_detail::widen(space.vector(term));
  query_detail::require_usable(space, term);
  return query_detail::to_neighbors(space, query_detail::top_k(space, q, space.n_terms()));
}

}  // namespace rvsem
