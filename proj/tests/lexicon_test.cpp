#include <gtest/gtest.h>

#include <sstream>

#include "rvsem/lexicon.hpp"
#include "support/oracles.hpp"
#include "support/synthetic.hpp"

using namespace rvsem;

namespace {

std::vector<TermId> ids(const Lexicon& lex, std::initializer_list<const char*> names) {
  std::vector<TermId> out;
  for (auto n : names) out.push_back(lex.id_of(n));
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

TEST(Parse, TwoCliques) {
  const auto lex = parse_cliques("a;b;c\nb;c;d");
  EXPECT_EQ(lex.n_terms(), 4u);
  EXPECT_EQ(lex.n_cliques(), 2u);
  const auto m = lex.membership(lex.id_of("b"));
  EXPECT_EQ(std::vector<CliqueId>(m.begin(), m.end()), (std::vector<CliqueId>{0, 1}));
}

TEST(Parse, DuplicateTermCollapses) {
  const auto lex = parse_cliques("a;a;b");
  ASSERT_EQ(lex.n_cliques(), 1u);
  EXPECT_EQ(lex.clique(0).size(), 2u);
}

TEST(Parse, CommentsAndBlankLines) {
  const auto lex = parse_cliques("# comment\n\na;b");
  EXPECT_EQ(lex.n_cliques(), 1u);
  EXPECT_TRUE(lex.warnings().empty());
}

TEST(Parse, ShortCliqueWarnsAndSkips) {
  const auto lex = parse_cliques("a;b\nc\nd;d\n;;\ne;f");
  EXPECT_EQ(lex.n_cliques(), 2u);
  ASSERT_EQ(lex.warnings().size(), 3u);
  EXPECT_EQ(lex.warnings()[0].line, 2u);
  EXPECT_EQ(lex.warnings()[1].line, 3u);
  EXPECT_EQ(lex.warnings()[2].line, 4u);
}

TEST(Parse, TrimsButKeepsCase) {
  const auto lex = parse_cliques("  aède ; Aède;train_de_maison \r\n");
  EXPECT_EQ(lex.n_terms(), 3u);
  EXPECT_TRUE(lex.find("aède"));
  EXPECT_TRUE(lex.find("Aède"));
  EXPECT_TRUE(lex.find("train_de_maison"));
}

TEST(Parse, MalformedUtf8ReportsLine) {
  try {
    parse_cliques("a;b\nc;\xC3\x28\n");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
  }
  EXPECT_THROW(parse_cliques("a;\xED\xA0\x80"), ParseError);  // surrogate
  EXPECT_THROW(parse_cliques("a;\xC0\xAF"), ParseError);      // overlong
}

TEST(Parse, ByteOrderMarkIgnored) {
  const auto lex = parse_cliques("\xEF\xBB\xBF" "a;b");
  EXPECT_TRUE(lex.find("a"));
}

TEST(Parse, DuplicateLinesStayDistinct) {
  const auto lex = parse_cliques("a;b\na;b\n");
  EXPECT_EQ(lex.n_cliques(), 2u);
  EXPECT_EQ(lex.membership(lex.id_of("a")).size(), 2u);
}

TEST(Neighborhood, Definition) {
  const auto lex = parse_cliques("a;b;c\nb;d");
  EXPECT_EQ(lex.neighborhood(lex.id_of("b")), ids(lex, {"a", "b", "c", "d"}));
  EXPECT_EQ(lex.diameter(lex.id_of("b")), 4u);
  EXPECT_EQ(lex.diameter(lex.id_of("d")), 2u);
}

TEST(Neighborhood, UnknownTerm) {
  const auto lex = parse_cliques("a;b");
  EXPECT_THROW(lex.id_of("zzz"), NotFoundError);
  EXPECT_THROW(lex.neighborhood(99), NotFoundError);
  try {
    lex.id_of("zzz");
  } catch (const NotFoundError& e) {
    EXPECT_STREQ(e.what(), "term not found: zzz");
  }
}

TEST(Overlap, Definition) {
  const auto lex = parse_cliques("a;b;c\nb;d\ne;f");
  const auto a = lex.id_of("a"), d = lex.id_of("d"), e = lex.id_of("e");
  EXPECT_EQ(lex.overlap_similarity(a, d), 1u);
  EXPECT_EQ(lex.overlap_similarity(a, a), lex.diameter(a));
  EXPECT_EQ(lex.overlap_similarity(a, e), 0u);
}

TEST(Separation, Definition) {
  const auto lex = parse_cliques("a;b\nb;c\nc;d\nx;y");
  const auto a = lex.id_of("a");
  EXPECT_EQ(lex.degree_of_separation(a, lex.id_of("b")), 1u);
  EXPECT_EQ(lex.degree_of_separation(a, lex.id_of("c")), 2u);
  EXPECT_EQ(lex.degree_of_separation(a, lex.id_of("d")), 3u);
  EXPECT_FALSE(lex.degree_of_separation(a, lex.id_of("x")).has_value());
  EXPECT_THROW(lex.degree_of_separation(a, a), DomainError);
}

TEST(AddClique, Rules) {
  auto lex = parse_cliques("a;b");
  const std::vector<std::string> one{"a", " a "};
  EXPECT_THROW(lex.add_clique(one), DomainError);
  const std::vector<std::string> ok{"a", "c"};
  EXPECT_EQ(lex.add_clique(ok), 1u);
  EXPECT_EQ(lex.n_terms(), 3u);
  const std::vector<std::string> semi{"a", "b;c"};
  EXPECT_THROW(lex.add_clique(semi), DomainError);
}

class RandomLexicon : public ::testing::TestWithParam<std::uint64_t> {};

TEST_P(RandomLexicon, StructuralInvariants) {
  const auto lex = fixtures::random_lexicon(80, 60, GetParam());
  for (TermId t = 0; t < lex.n_terms(); ++t) {
    ASSERT_FALSE(lex.membership(t).empty());
    for (CliqueId k : lex.membership(t)) EXPECT_TRUE(lex.contains(k, t));
  }
  std::size_t incidences = 0;
  for (CliqueId k = 0; k < lex.n_cliques(); ++k) {
    const auto c = lex.clique(k);
    EXPECT_GE(c.size(), 2u);
    std::set<TermId> uniq(c.begin(), c.end());
    EXPECT_EQ(uniq.size(), c.size());
    incidences += c.size();
  }
  std::size_t transposed = 0;
  for (TermId t = 0; t < lex.n_terms(); ++t) transposed += lex.membership(t).size();
  EXPECT_EQ(incidences, transposed);
}

TEST_P(RandomLexicon, OverlapAgreesWithOracleAndIsSymmetric) {
  const auto lex = fixtures::random_lexicon(60, 40, GetParam());
  for (TermId a = 0; a < lex.n_terms(); ++a) {
    for (TermId b = a; b < lex.n_terms(); ++b) {
      const auto o = lex.overlap_similarity(a, b);
      ASSERT_EQ(o, fixtures::brute_overlap(lex, a, b));
      ASSERT_EQ(o, lex.overlap_similarity(b, a));
      ASSERT_LE(o, std::min(lex.diameter(a), lex.diameter(b)));
    }
  }
}

TEST_P(RandomLexicon, SeparationOneIffInNeighborhood) {
  const auto lex = fixtures::random_lexicon(50, 20, GetParam());
  for (TermId a = 0; a < lex.n_terms(); ++a) {
    const auto d = lex.neighborhood(a);
    for (TermId b = 0; b < lex.n_terms(); ++b) {
      if (a == b) continue;
      const bool in_d = std::binary_search(d.begin(), d.end(), b);
      ASSERT_EQ(lex.degree_of_separation(a, b) == std::optional<std::size_t>(1), in_d);
    }
  }
}

TEST_P(RandomLexicon, WriteThenParseRoundTrips) {
  const auto lex = fixtures::random_lexicon(70, 50, GetParam());
  std::ostringstream os;
  lex.write(os);
  EXPECT_EQ(parse_cliques(os.str()), lex);
}

INSTANTIATE_TEST_SUITE_P(Seeds, RandomLexicon, ::testing::Values(1u, 2u, 3u, 42u));

TEST(Stats, Diameters) {
  const auto s = lexicon_stats(parse_cliques("a;b;c\nb;d"));
  EXPECT_EQ(s.n_terms, 4u);
  EXPECT_EQ(s.min_diameter, 2u);
  EXPECT_EQ(s.max_diameter, 4u);
  EXPECT_DOUBLE_EQ(s.mean_diameter, (3 + 4 + 3 + 2) / 4.0);
}

TEST(FromTables, RejectsBrokenTables) {
  EXPECT_THROW(Lexicon::from_tables({"a", "b"}, {{0}}), DomainError);
  EXPECT_THROW(Lexicon::from_tables({"a", "b"}, {{0, 0}}), DomainError);
  EXPECT_THROW(Lexicon::from_tables({"a", "b"}, {{0, 5}}), DomainError);
  EXPECT_THROW(Lexicon::from_tables({"a", "a"}, {{0, 1}}), DomainError);
  EXPECT_THROW(Lexicon::from_tables({"a", "b", "c"}, {{0, 1}}), DomainError);
}
