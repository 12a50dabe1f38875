#include <gtest/gtest.h>

#include <cmath>
#include <cstring>

#include "rvsem/space.hpp"
#include "rvsem/store.hpp"
#include "support/synthetic.hpp"

using namespace rvsem;

namespace {

SpaceConfig config(Weighting w = Weighting::tf_idf, std::uint64_t seed = 0) { return {2500, 50, seed, w}; }

double dot(std::span<const float> a, std::span<const float> b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += double{a[i]} * b[i];
  return s;
}

std::string bytes(const SemanticSpace& s) {
  std::ostringstream os;
  save_space(s, os);
  return os.str();
}

}  // namespace

TEST(Weight, Schemes) {
  std::string text;
  for (int i = 0; i < 8; ++i) text += "f" + std::to_string(i) + ";g" + std::to_string(i) + "\n";
  text += "t;f0\nt;f1\n";  // 10 cliques, df(t) = 2
  const auto lex = parse_cliques(text);
  const auto t = lex.id_of("t");
  EXPECT_NEAR(weight(lex, t, 8, Weighting::tf_idf), std::log(5.0), 1e-12);
  EXPECT_NEAR(weight(lex, t, 8, Weighting::tf_idf), 1.609, 5e-4);
  EXPECT_EQ(weight(lex, t, 8, Weighting::uniform), 1.0);
  EXPECT_THROW(weight(lex, t, 0, Weighting::tf_idf), DomainError);
  EXPECT_NEAR(tf_idf(3, 2.0), (1 + std::log(3.0)) * 2.0, 1e-12);
}

TEST(Weight, TermInEveryCliqueHasZeroWeight) {
  const auto lex = parse_cliques("hub;a\nhub;b\nhub;c");
  EXPECT_EQ(weight(lex, lex.id_of("hub"), 0, Weighting::tf_idf), 0.0);
  const auto space = build_space(lex, config());
  EXPECT_EQ(space.weight(lex.id_of("hub"), 1), 0.0);
  EXPECT_GT(space.idf(lex.id_of("a")), 0.0);
}

TEST(CliqueVector, UniformPairIsSeedSum) {
  const auto space = build_space(parse_cliques("a;b\nc;d"), config(Weighting::uniform));
  const auto c = build_clique_vector(space, 0);
  const auto sa = space.seed(0).dense(), sb = space.seed(1).dense();
  double with_a = 0;
  for (std::size_t i = 0; i < c.size(); ++i) {
    ASSERT_DOUBLE_EQ(c[i], sa[i] + sb[i]);
    with_a += c[i] * sa[i];
  }
  EXPECT_NEAR(with_a, 1.0 + seed_dot(space.seed(0), space.seed(1)), 1e-12);
}

TEST(CliqueVector, ZeroWeightTermContributesNothing) {
  const auto space = build_space(parse_cliques("hub;a\nhub;b"), config());
  const auto c = build_clique_vector(space, 0);
  const auto sa = space.seed(space.lexicon().id_of("a")).dense();
  const double w = space.weight(space.lexicon().id_of("a"), 0);
  for (std::size_t i = 0; i < c.size(); ++i) ASSERT_DOUBLE_EQ(c[i], w * sa[i]);
}

TEST(TermVector, SingleCliqueIsNormalizedCliqueVector) {
  const auto space = build_space(parse_cliques("a;b;c\nc;d"), config());
  const auto a = space.lexicon().id_of("a");
  const auto c = build_clique_vector(space, 0);
  double n = 0;
  for (double x : c) n += x * x;
  n = std::sqrt(n);
  const auto t = build_term_vector(space, a);
  for (std::size_t i = 0; i < c.size(); ++i) ASSERT_NEAR(t[i], c[i] / n, 1e-12);
}

TEST(TermVector, UnitNormAndIdenticalCliqueSets) {
  const auto space = build_space(parse_cliques("a;b;c\na;b;d\ne;f\nc;e"), config());
  const auto& lex = space.lexicon();
  for (TermId t = 0; t < space.n_terms(); ++t) EXPECT_NEAR(dot(space.vector(t), space.vector(t)), 1.0, 1e-5);
  EXPECT_NEAR(dot(space.vector(lex.id_of("a")), space.vector(lex.id_of("b"))), 1.0, 1e-5);
}

TEST(TermVector, DegenerateTermIsFlagged) {
  // Every clique contains both terms, so every idf is zero.
  const auto space = build_space(parse_cliques("a;b\nb;a"), config());
  EXPECT_TRUE(space.is_degenerate(0));
  EXPECT_TRUE(space.is_degenerate(1));
  EXPECT_THROW(build_term_vector(space, 0), DegenerateTermError);
  for (float x : space.vector(0)) ASSERT_EQ(x, 0.0f);
  BuildReport report;
  build_space(parse_cliques("a;b\nb;a"), config(), &report);
  EXPECT_EQ(report.degenerate.size(), 2u);
}

TEST(Build, EmptyLexiconGivesEmptySpace) {
  const auto space = build_space(Lexicon{}, config());
  EXPECT_EQ(space.n_terms(), 0u);
  EXPECT_TRUE(space.coordinates().empty());
}

TEST(Build, DeterministicBytes) {
  const auto lex = fixtures::random_lexicon(120, 80, 5);
  EXPECT_EQ(bytes(build_space(lex, config())), bytes(build_space(lex, config())));
  EXPECT_NE(bytes(build_space(lex, config())), bytes(build_space(lex, config(Weighting::tf_idf, 1))));
}

TEST(Build, CollisionRepairBySalt) {
  // d=4, m=1 admits only 12 distinct seeds; 12 terms must all be distinct.
  std::string text;
  for (int i = 0; i < 6; ++i) text += "p" + std::to_string(i) + ";q" + std::to_string(i) + "\n";
  BuildReport report;
  const auto space = build_space(parse_cliques(text), SpaceConfig{4, 1, 3, Weighting::uniform}, &report);
  std::set<std::pair<std::vector<std::uint32_t>, std::vector<std::uint32_t>>> seen;
  for (TermId t = 0; t < space.n_terms(); ++t) {
    EXPECT_EQ(space.seed(t), make_seed(space.lexicon().term(t), space.config(), space.salt(t)));
    seen.insert({space.seed(t).positive, space.seed(t).negative});
  }
  EXPECT_EQ(seen.size(), 12u);
  EXPECT_GT(report.salt_repairs, 0u);
}

TEST(AddClique, DisjointPairCreatesTwoVectors) {
  auto space = build_space(fixtures::random_lexicon(60, 30, 2), config());
  const auto before = bytes(space);
  const auto n = space.n_terms();
  const std::vector<float> old(space.coordinates().begin(), space.coordinates().end());
  const std::vector<std::string> clique{"brand_new_1", "brand_new_2"};
  const auto report = space.add_clique(clique);
  EXPECT_EQ(report.touched.size(), 2u);
  EXPECT_EQ(report.new_terms, (std::vector<TermId>{TermId(n), TermId(n + 1)}));
  EXPECT_EQ(std::memcmp(old.data(), space.coordinates().data(), old.size() * sizeof(float)), 0);
}

TEST(AddClique, ExistingPlusNewTouchesNeighborhood) {
  auto space = build_space(parse_cliques("a;b;c\nc;d\ne;f"), config());
  const auto a = space.lexicon().id_of("a");
  auto expected = space.lexicon().neighborhood(a);
  const std::vector<std::string> clique{"a", "z"};
  const auto report = space.add_clique(clique);
  expected.push_back(space.lexicon().id_of("z"));
  EXPECT_EQ(report.touched, expected);
}

TEST(AddClique, RejectsShortClique) {
  auto space = build_space(parse_cliques("a;b"), config());
  const std::vector<std::string> clique{"a"};
  EXPECT_THROW(space.add_clique(clique), DomainError);
}

TEST(AddClique, LocalAndEqualToFrozenRebuild) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    auto space = build_space(fixtures::random_lexicon(80, 40, seed), config(Weighting::tf_idf, seed));
    SplitMix64 rng(seed * 77);
    std::vector<std::string> clique;
    for (int j = 0; j < 3; ++j) clique.push_back(fmt::format("w{:03}", bounded(rng, 80)));
    clique.push_back(fmt::format("fresh{}", seed));
    const std::vector<float> old(space.coordinates().begin(), space.coordinates().end());
    const auto old_n = space.n_terms();
    const auto report = space.add_clique(clique);

    std::vector<TermId> predicted;
    for (TermId t : space.lexicon().clique(report.clique)) {
      const auto d = space.lexicon().neighborhood(t);
      predicted.insert(predicted.end(), d.begin(), d.end());
    }
    std::sort(predicted.begin(), predicted.end());
    predicted.erase(std::unique(predicted.begin(), predicted.end()), predicted.end());
    ASSERT_EQ(report.touched, predicted);

    for (TermId t = 0; t < old_n; ++t) {
      if (std::binary_search(predicted.begin(), predicted.end(), t)) continue;
      ASSERT_EQ(std::memcmp(old.data() + t * space.dim(), space.vector(t).data(), space.dim() * sizeof(float)), 0);
    }
    auto rebuilt = space;
    rebuilt.recompute_vectors();
    for (std::size_t i = 0; i < space.coordinates().size(); ++i) {
      ASSERT_NEAR(space.coordinates()[i], rebuilt.coordinates()[i], 1e-5);
    }
  }
}

TEST(Reweight, MatchesFreshBuild) {
  auto space = build_space(fixtures::random_lexicon(50, 30, 4), config());
  const std::vector<std::string> clique{"w001", "w002", "novel"};
  space.add_clique(clique);
  space.reweight();
  const auto fresh = build_space(space.lexicon(), space.config());
  EXPECT_EQ(bytes(space), bytes(fresh));
}
