#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <istream>
#include <iterator>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "rvsem/errors.hpp"

namespace rvsem {

using TermId = std::uint32_t;
using CliqueId = std::uint32_t;

struct ParseWarning {
  std::size_t line;
  std::string message;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  constexpr std::string_view ws = " \t\r\n\v\f";
  const auto first = s.find_first_not_of(ws);
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(ws);
  return s.substr(first, last - first + 1);
}

// Strict UTF-8: rejects overlong encodings, surrogates and code points past U+10FFFF.
inline bool valid_utf8(std::string_view s) {
  std::size_t i = 0;
  const auto n = s.size();
  auto byte = [&](std::size_t k) { return static_cast<unsigned char>(s[k]); };
  auto cont = [&](std::size_t k) { return k < n && (byte(k) & 0xC0) == 0x80; };
  while (i < n) {
    const unsigned char c = byte(i);
    if (c < 0x80) {
      ++i;
    } else if (c >= 0xC2 && c <= 0xDF) {
      if (!cont(i + 1)) return false;
      i += 2;
    } else if (c >= 0xE0 && c <= 0xEF) {
      if (!cont(i + 1) || !cont(i + 2)) return false;
      const unsigned char c1 = byte(i + 1);
      if (c == 0xE0 && c1 < 0xA0) return false;  // overlong
      if (c == 0xED && c1 >= 0xA0) return false;  // surrogate
      i += 3;
    } else if (c >= 0xF0 && c <= 0xF4) {
      if (!cont(i + 1) || !cont(i + 2) || !cont(i + 3)) return false;
      const unsigned char c1 = byte(i + 1);
      if (c == 0xF0 && c1 < 0x90) return false;
      if (c == 0xF4 && c1 >= 0x90) return false;
      i += 4;
    } else {
      return false;
    }
  }
  return true;
}

// Splits one clique line into trimmed, non-empty, first-occurrence-unique terms.
inline std::vector<std::string> split_clique(std::string_view line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= line.size()) {
    auto end = line.find(';', start);
    if (end == std::string_view::npos) end = line.size();
    const auto tok = trim(line.substr(start, end - start));
    if (!tok.empty() && std::find(out.begin(), out.end(), tok) == out.end()) {
      out.emplace_back(tok);
    }
    start = end + 1;
  }
  return out;
}

}  // namespace detail

/// Term-clique bipartite graph of a synonym dictionary.
///
/// Terms are numbered in order of first appearance; cliques keep the order
/// of their source lines. Each clique holds at least two distinct terms and
/// every term belongs to at least one clique. Duplicate clique lines are
/// kept as distinct cliques.
class Lexicon {
 public:
  Lexicon() = default;

  /// Rebuilds a lexicon from explicit tables (used by the binary store).
  /// Throws DomainError when the tables break a structural invariant.
  static Lexicon from_tables(std::vector<std::string> terms,
                             std::vector<std::vector<TermId>> cliques) {
    Lexicon lex;
    lex.terms_ = std::move(terms);
    lex.membership_.resize(lex.terms_.size());
    for (TermId t = 0; t < lex.terms_.size(); ++t) {
      if (lex.terms_[t].empty()) throw DomainError("empty term string");
      if (!lex.index_.emplace(lex.terms_[t], t).second) {
        throw DomainError("duplicate term: " + lex.terms_[t]);
      }
    }
    for (auto& clique : cliques) {
      if (clique.size() < 2) throw DomainError("clique with fewer than 2 terms");
      auto sorted = clique;
      std::sort(sorted.begin(), sorted.end());
      if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
        throw DomainError("term repeated within a clique");
      }
      if (sorted.back() >= lex.terms_.size()) throw DomainError("clique references unknown term id");
      const auto k = static_cast<CliqueId>(lex.cliques_.size());
      for (TermId t : clique) lex.membership_[t].push_back(k);
      lex.cliques_.push_back(std::move(clique));
    }
    for (TermId t = 0; t < lex.terms_.size(); ++t) {
      if (lex.membership_[t].empty()) throw DomainError("term in no clique: " + lex.terms_[t]);
    }
    return lex;
  }

  std::size_t n_terms() const noexcept { return terms_.size(); }
  std::size_t n_cliques() const noexcept { return cliques_.size(); }
  bool empty() const noexcept { return terms_.empty(); }

  const std::vector<std::string>& terms() const noexcept { return terms_; }
  const std::string& term(TermId t) const {
    check_term(t);
    return terms_[t];
  }

  std::optional<TermId> find(std::string_view term) const {
    const auto it = index_.find(std::string(term));
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  TermId id_of(std::string_view term) const {
    if (auto id = find(term)) return *id;
    throw NotFoundError(std::string(term));
  }

  std::span<const TermId> clique(CliqueId k) const {
    if (k >= cliques_.size()) throw DomainError("unknown clique id " + std::to_string(k));
    return cliques_[k];
  }

  std::span<const CliqueId> membership(TermId t) const {
    check_term(t);
    return membership_[t];
  }

  bool contains(CliqueId k, TermId t) const {
    const auto c = clique(k);
    return std::find(c.begin(), c.end(), t) != c.end();
  }

  const std::vector<ParseWarning>& warnings() const noexcept { return warnings_; }

  /// Appends a clique, interning unseen terms. Terms are trimmed and
  /// deduplicated; fewer than two distinct terms is a DomainError.
  CliqueId add_clique(std::span<const std::string> raw) {
    std::vector<std::string> clean;
    for (const auto& r : raw) {
      const auto t = detail::trim(r);
      if (t.empty()) continue;
      if (!detail::valid_utf8(t)) throw DomainError("term is not valid UTF-8");
      if (t.find(';') != std::string_view::npos) throw DomainError("term contains ';'");
      if (std::find(clean.begin(), clean.end(), t) == clean.end()) clean.emplace_back(t);
    }
    if (clean.size() < 2) {
      throw DomainError("clique needs at least 2 distinct terms, got " + std::to_string(clean.size()));
    }
    return append_clique(clean);
  }

  /// D_i: every distinct term of every clique containing t, t included.
  std::vector<TermId> neighborhood(TermId t) const {
    std::vector<TermId> out;
    for (CliqueId k : membership(t)) out.insert(out.end(), cliques_[k].begin(), cliques_[k].end());
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  }

  /// d_i = |D_i|.
  std::size_t diameter(TermId t) const { return neighborhood(t).size(); }

  /// |D_i ∩ D_k|.
  std::size_t overlap_similarity(TermId a, TermId b) const {
    const auto da = neighborhood(a);
    const auto db = neighborhood(b);
    std::size_t n = 0;
    auto i = da.begin();
    auto j = db.begin();
    while (i != da.end() && j != db.end()) {
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
  }

  /// Minimum number of clique hops between two distinct terms; nullopt when
  /// they sit in disconnected components.
  std::optional<std::size_t> degree_of_separation(TermId from, TermId to) const {
    check_term(from);
    check_term(to);
    if (from == to) throw DomainError("degree of separation needs two distinct terms");
    std::vector<std::size_t> dist(terms_.size(), kUnseen);
    std::vector<bool> clique_seen(cliques_.size(), false);
    std::vector<TermId> frontier{from};
    dist[from] = 0;
    for (std::size_t hop = 1; !frontier.empty(); ++hop) {
      std::vector<TermId> next;
      for (TermId t : frontier) {
        for (CliqueId k : membership_[t]) {
          if (clique_seen[k]) continue;
          clique_seen[k] = true;
          for (TermId u : cliques_[k]) {
            if (dist[u] != kUnseen) continue;
            if (u == to) return hop;
            dist[u] = hop;
            next.push_back(u);
          }
        }
      }
      frontier = std::move(next);
    }
    return std::nullopt;
  }

  /// Writes the lexicon back in clique-file syntax, one clique per line.
  void write(std::ostream& os) const {
    for (const auto& c : cliques_) {
      for (std::size_t i = 0; i < c.size(); ++i) {
        if (i) os << ';';
        os << terms_[c[i]];
      }
      os << '\n';
    }
  }

  friend bool operator==(const Lexicon& a, const Lexicon& b) {
    return a.terms_ == b.terms_ && a.cliques_ == b.cliques_;
  }

 private:
  static constexpr std::size_t kUnseen = static_cast<std::size_t>(-1);

  friend Lexicon parse_cliques(std::istream& in);

  void check_term(TermId t) const {
    if (t >= terms_.size()) throw NotFoundError("#" + std::to_string(t));
  }

  CliqueId append_clique(const std::vector<std::string>& clean) {
    const auto k = static_cast<CliqueId>(cliques_.size());
    std::vector<TermId> ids;
    ids.reserve(clean.size());
    for (const auto& s : clean) {
      auto [it, inserted] = index_.emplace(s, static_cast<TermId>(terms_.size()));
      if (inserted) {
        terms_.push_back(s);
        membership_.emplace_back();
      }
      ids.push_back(it->second);
      membership_[it->second].push_back(k);
    }
    cliques_.push_back(std::move(ids));
    return k;
  }

  std::vector<std::string> terms_;
  std::unordered_map<std::string, TermId> index_;
  std::vector<std::vector<TermId>> cliques_;
  std::vector<std::vector<CliqueId>> membership_;
  std::vector<ParseWarning> warnings_;
};

/// Reads the clique format: one clique per line, terms separated by ';',
/// '#' starts a comment line, blank lines are skipped. Invalid UTF-8 is a
/// ParseError; a line with fewer than two distinct terms is skipped with a
/// warning.
inline Lexicon parse_cliques(std::istream& in) {
  Lexicon lex;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view view = line;
    if (lineno == 1 && view.starts_with("\xEF\xBB\xBF")) view.remove_prefix(3);
    if (!detail::valid_utf8(view)) throw ParseError(lineno, "malformed UTF-8");
    const auto body = detail::trim(view);
    if (body.empty() || body.front() == '#') continue;
    const auto terms = detail::split_clique(body);
    if (terms.size() < 2) {
      lex.warnings_.push_back({lineno, "clique with fewer than 2 distinct terms skipped"});
      continue;
    }
    lex.append_clique(terms);
  }
  return lex;
}

inline Lexicon parse_cliques(std::string_view text) {
  std::istringstream in{std::string(text)};
  return parse_cliques(in);
}

struct LexiconStats {
  std::size_t n_terms = 0;
  std::size_t n_cliques = 0;
  std::size_t min_diameter = 0;
  std::size_t max_diameter = 0;
  double mean_diameter = 0.0;
};

inline LexiconStats lexicon_stats(const Lexicon& lex) {
  LexiconStats s{lex.n_terms(), lex.n_cliques(), 0, 0, 0.0};
  if (lex.empty()) return s;
  s.min_diameter = static_cast<std::size_t>(-1);
  double total = 0.0;
  for (TermId t = 0; t < lex.n_terms(); ++t) {
    const auto d = lex.diameter(t);
    s.min_diameter = std::min(s.min_diameter, d);
    s.max_diameter = std::max(s.max_diameter, d);
    total += static_cast<double>(d);
  }
  s.mean_diameter = total / static_cast<double>(lex.n_terms());
  return s;
}

}  // namespace rvsem
