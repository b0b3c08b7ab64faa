#include <gtest/gtest.h>

#include <algorithm>
#include <set>
#include <sstream>

#include "hole/kgdata.hpp"
#include "hole/rng.hpp"

using namespace hole;

TEST(ParseTriples, SingleLine) {
  const auto t = parse_triples(std::string_view("barack_obama\tbornIn\thawaii\n"));
  ASSERT_EQ(t.size(), 1u);
  EXPECT_EQ(t[0], (StringTriple{"barack_obama", "bornIn", "hawaii"}));
}

TEST(ParseTriples, EmptyInputAndBlankLines) {
  EXPECT_TRUE(parse_triples(std::string_view("")).empty());
  EXPECT_EQ(parse_triples(std::string_view("\na\tb\tc\r\n\n")).size(), 1u);
}

TEST(ParseTriples, WrongFieldCountReportsLine) {
  try {
    (void)parse_triples(std::string_view("a\tb\n"));
    FAIL();
  } catch (const MalformedLineError& e) {
    EXPECT_EQ(e.code(), ErrorCode::MalformedLine);
    EXPECT_EQ(e.line_no(), 1u);
  }
  try {
    (void)parse_triples(std::string_view("a\tb\tc\n\nx\ty\tz\tw\n"));
    FAIL();
  } catch (const MalformedLineError& e) {
    EXPECT_EQ(e.line_no(), 3u);
  }
  EXPECT_THROW((void)parse_triples(std::string_view("a\t\tc\n")), MalformedLineError);
}

TEST(BuildStore, SingleTriple) {
  const auto s = build_store({{"a", "r", "b"}}, {}, {});
  EXPECT_EQ(s.entities.size(), 2u);
  EXPECT_EQ(s.relations.size(), 1u);
  EXPECT_EQ(s.filter.num_subject_keys(), 1u);
  EXPECT_EQ(s.filter.num_object_keys(), 1u);
  EXPECT_TRUE(s.filter.contains({0, 0, 1}));
  EXPECT_FALSE(s.filter.contains({1, 0, 0}));
}

TEST(BuildStore, FirstAppearanceIdsAcrossSplits) {
  const auto s = build_store({{"b", "r", "a"}}, {{"c", "q", "b"}}, {{"a", "r", "d"}});
  EXPECT_EQ(s.entities.names(), (std::vector<std::string>{"b", "a", "c", "d"}));
  EXPECT_EQ(s.relations.names(), (std::vector<std::string>{"r", "q"}));
  EXPECT_EQ(s.test[0], (Triple{1, 0, 3}));
}

TEST(BuildStore, DuplicateAcrossSplitsIsDiagnosedAndDropped) {
  const auto s = build_store({{"a", "r", "b"}}, {{"a", "r", "b"}, {"b", "r", "a"}}, {});
  EXPECT_EQ(s.valid.size(), 1u);
  ASSERT_EQ(s.diagnostics.size(), 1u);
  EXPECT_NE(s.diagnostics[0].find("DuplicateTripleAcrossSplits"), std::string::npos);
}

TEST(FilterIndex, AgreesWithLinearScan) {
  Rng rng = make_rng(3, Stream::Evaluation);
  std::vector<StringTriple> splits[3];
  for (int i = 0; i < 600; ++i) {
    auto e = [&] { return "e" + std::to_string(uniform_index(rng, 40)); };
    splits[i % 3].push_back({e(), "r" + std::to_string(uniform_index(rng, 4)), e()});
  }
  const auto s = build_store(splits[0], splits[1], splits[2]);
  std::set<Triple> all;
  for (const auto* sp : {&s.train, &s.valid, &s.test}) all.insert(sp->begin(), sp->end());
  for (int probe = 0; probe < 1000; ++probe) {
    const Triple t{static_cast<EntityId>(uniform_index(rng, s.entities.size())),
                   static_cast<RelationId>(uniform_index(rng, s.relations.size())),
                   static_cast<EntityId>(uniform_index(rng, s.entities.size()))};
    EXPECT_EQ(s.filter.contains(t), all.contains(t));
  }
  EXPECT_EQ(s.filter.num_triples(), all.size());
  for (const auto& t : s.train) {
    const auto objs = s.filter.objects(t.predicate, t.subject);
    EXPECT_TRUE(std::is_sorted(objs.begin(), objs.end()));
    EXPECT_TRUE(std::binary_search(objs.begin(), objs.end(), t.object));
  }
}

TEST(TripleStore, SplitsAreDisjoint) {
  const auto s = build_store({{"a", "r", "b"}, {"b", "r", "c"}}, {{"a", "r", "b"}, {"c", "r", "a"}},
                             {{"c", "r", "a"}, {"a", "r", "c"}});
  std::set<Triple> seen;
  for (const auto* sp : {&s.train, &s.valid, &s.test}) {
    for (const auto& t : *sp) EXPECT_TRUE(seen.insert(t).second);
  }
  EXPECT_EQ(s.total_triples(), 4u);
}

TEST(TripleStore, TsvRoundTrip) {
  const auto s = build_store({{"x", "p", "y"}, {"y", "q", "z"}}, {{"z", "p", "x"}}, {{"x", "q", "z"}});
  std::ostringstream tr, va, te;
  write_triples(tr, s, s.train);
  write_triples(va, s, s.valid);
  write_triples(te, s, s.test);
  const auto r = build_store(parse_triples(std::string_view(tr.str())), parse_triples(std::string_view(va.str())),
                             parse_triples(std::string_view(te.str())));
  EXPECT_EQ(r.train, s.train);
  EXPECT_EQ(r.valid, s.valid);
  EXPECT_EQ(r.test, s.test);
  EXPECT_EQ(r.entities.hash(), s.entities.hash());
}

TEST(Vocabulary, DeterministicAndHashSensitiveToOrder) {
  const auto a = Vocabulary::from_names({"x", "y"});
  const auto b = Vocabulary::from_names({"x", "y"});
  const auto c = Vocabulary::from_names({"y", "x"});
  EXPECT_EQ(a.hash(), b.hash());
  EXPECT_NE(a.hash(), c.hash());
  EXPECT_EQ(a.find("y"), 1u);
  EXPECT_FALSE(a.find("z").has_value());
  // Concatenation ambiguity is broken by the terminator.
  EXPECT_NE(Vocabulary::hash_names({"ab", "c"}), Vocabulary::hash_names({"a", "bc"}));
}

TEST(LoadStore, MissingFileIsIoError) {
  try {
    (void)load_store("/nonexistent/train.tsv", "", "");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::Io);
  }
}
