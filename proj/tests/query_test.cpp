#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "mcdep/query.hpp"
#include "support.hpp"

namespace mcdep {
namespace {

using TC = TokenConstraint;
using TM = TokenMatcher;

EdgePattern edge(std::string rel, TM gov, TM child) {
  RelationMatcher r;
  if (rel != "*") r.labels = {std::move(rel)};
  return EdgePattern{r, std::move(gov), std::move(child)};
}

Sentence officers_killed_smith() {
  return make_sentence("k1", {"Officers", "killed", "Smith"}, {"NOUN", "VERB", "PROPN"});
}

ParseTree officers_tree() {
  return ParseTree(3, {{"nsubj", 2, 1}, {"root", 0, 2}, {"dobj", 2, 3}});
}

QueryFile parse(const std::string& text) {
  std::istringstream in(text);
  return parse_query_file(in);
}

TEST(Query, VariableGovernorWithFixedChild) {
  StructureQuery q{{edge("nsubj", TM::variable("V"), TM::of(TC::form("She")))}};
  EXPECT_TRUE(eval_query(q, testing::she_saw_stars_tree(), testing::she_saw_stars()));
  StructureQuery miss{{edge("obj", TM::variable("V"), TM::of(TC::form("She")))}};
  EXPECT_FALSE(eval_query(miss, testing::she_saw_stars_tree(), testing::she_saw_stars()));
}

TEST(Query, ConjunctionSharesGovernorBinding) {
  StructureQuery q{{edge("nsubj", TM::variable("V"), TM::variable("c")),
                    edge("dobj", TM::variable("V"), TM::variable("o"))}};
  EXPECT_TRUE(eval_query(q, officers_tree(), officers_killed_smith()));

  // Same edges but with different governors: 1 <- 2 (nsubj), 3 <- 1 (dobj).
  ParseTree split(3, {{"nsubj", 2, 1}, {"root", 0, 2}, {"dobj", 1, 3}});
  EXPECT_FALSE(eval_query(q, split, officers_killed_smith()));

  // Without the shared variable, the split tree matches.
  StructureQuery loose{{edge("nsubj", TM::any(), TM::any()), edge("dobj", TM::any(), TM::any())}};
  EXPECT_TRUE(eval_query(loose, split, officers_killed_smith()));
}

TEST(Query, EmptyConjunctionIsTrue) {
  EXPECT_TRUE(eval_query(StructureQuery{}, officers_tree(), officers_killed_smith()));
}

TEST(Query, DistinctVariablesMayBindTheSameVertex) {
  StructureQuery q{{edge("*", TM::variable("a"), TM::of(TC::index(1))),
                    edge("*", TM::variable("b"), TM::of(TC::index(3)))}};
  EXPECT_TRUE(eval_query(q, officers_tree(), officers_killed_smith()));
}

TEST(Query, VariableConstraintAppliesAtEveryOccurrence) {
  auto kw = std::make_shared<const KeywordSet>(std::vector<std::string>{"KILLED"});
  StructureQuery q{{edge("nsubj", TM::variable("V", TC::keyword(kw)), TM::any()),
                    edge("dobj", TM::variable("V"), TM::any())}};
  EXPECT_TRUE(eval_query(q, officers_tree(), officers_killed_smith()));
  auto other = std::make_shared<const KeywordSet>(std::vector<std::string>{"shot"});
  q.patterns[0].governor.constraint = TC::keyword(other);
  EXPECT_FALSE(eval_query(q, officers_tree(), officers_killed_smith()));
}

TEST(Query, RootAndIndexAndSpanConstraints) {
  auto s = officers_killed_smith();
  auto t = officers_tree();
  EXPECT_TRUE(eval_query({{edge("root", TM::of(TC::root()), TM::of(TC::index(2)))}}, t, s));
  EXPECT_FALSE(eval_query({{edge("*", TM::of(TC::root()), TM::of(TC::index(1)))}}, t, s));
  EXPECT_TRUE(eval_query({{edge("dobj", TM::any(), TM::of(TC::span(3, 3)))}}, t, s));
  EXPECT_FALSE(eval_query({{edge("dobj", TM::any(), TM::of(TC::span(1, 2)))}}, t, s));
  // A span never matches ROOT.
  EXPECT_FALSE(eval_query({{edge("root", TM::of(TC::span(0, 3)), TM::any())}}, t, s));
}

TEST(Query, MentionSpan) {
  auto s = officers_killed_smith();
  auto t = officers_tree();
  StructureQuery q{{edge("dobj", TM::any(), TM::of(TC::mention()))}};
  EXPECT_TRUE(eval_query(q, t, s, Span{3, 3}));
  EXPECT_FALSE(eval_query(q, t, s, Span{1, 1}));
  EXPECT_THROW(eval_query(q, t, s), PreconditionError);
}

TEST(Query, KeywordsAreCaseInsensitiveOnForms) {
  auto s = officers_killed_smith();
  auto kw = std::make_shared<const KeywordSet>(std::vector<std::string>{"officers"});
  StructureQuery q{{edge("nsubj", TM::any(), TM::of(TC::keyword(kw)))}};
  EXPECT_TRUE(eval_query(q, officers_tree(), s));
}

TEST(Query, LemmaKeywords) {
  auto s = officers_killed_smith();
  s.tokens[1].lemma = "kill";
  auto kw = std::make_shared<const KeywordSet>(std::vector<std::string>{"kill"});
  EXPECT_TRUE(eval_query({{edge("root", TM::any(), TM::of(TC::lemma_keyword(kw)))}},
                         officers_tree(), s));
  EXPECT_FALSE(eval_query({{edge("root", TM::any(), TM::of(TC::keyword(kw)))}},
                          officers_tree(), s));
}

TEST(Query, IndexBeyondSentenceIsAnError) {
  StructureQuery q{{edge("*", TM::any(), TM::of(TC::index(4)))}};
  EXPECT_THROW(eval_query(q, officers_tree(), officers_killed_smith()), PreconditionError);
  StructureQuery sp{{edge("*", TM::any(), TM::of(TC::span(2, 9)))}};
  EXPECT_THROW(eval_query(sp, officers_tree(), officers_killed_smith()), PreconditionError);
}

TEST(Query, RuleIsDisjunction) {
  Rule r{"r", {{{edge("obj", TM::any(), TM::any())}}, {{edge("dobj", TM::any(), TM::any())}}}};
  EXPECT_TRUE(eval_rule(r, officers_tree(), officers_killed_smith()));
  EXPECT_TRUE(eval_rule(r, testing::she_saw_stars_tree(), testing::she_saw_stars()));
  Rule none{"none", {{{edge("amod", TM::any(), TM::any())}}}};
  EXPECT_FALSE(eval_rule(none, officers_tree(), officers_killed_smith()));
}

// Brute-force oracle: try every assignment of vertices to variables.
bool brute_force(const StructureQuery& q, const ParseTree& t, const Sentence& s) {
  std::vector<std::string> vars;
  for (const auto& p : q.patterns)
    for (const auto* m : {&p.governor, &p.child})
      if (!m->var.empty() && std::find(vars.begin(), vars.end(), m->var) == vars.end())
        vars.push_back(m->var);
  const int n = t.size();
  std::vector<int> val(vars.size(), 0);
  auto value_of = [&](const std::string& v) {
    return val[std::find(vars.begin(), vars.end(), v) - vars.begin()];
  };
  while (true) {
    bool all = true;
    for (const auto& p : q.patterns) {
      bool any_edge = false;
      for (int w = 1; w <= n && !any_edge; ++w) {
        if (!p.relation.matches(t.relation(w))) continue;
        const int g = t.governor(w);
        auto ok = [&](const TokenMatcher& m, int v) {
          if (!query_detail::satisfies(m.constraint, v, s, std::nullopt)) return false;
          return m.var.empty() || value_of(m.var) == v;
        };
        any_edge = ok(p.governor, g) && ok(p.child, w);
      }
      if (!any_edge) {
        all = false;
        break;
      }
    }
    if (all) return true;
    std::size_t i = 0;
    while (i < val.size() && ++val[i] > n) val[i++] = 0;
    if (i == val.size()) return false;
  }
}

TEST(QueryProperty, BacktrackingAgreesWithBruteForce) {
  CounterRng rng(31);
  const std::vector<std::string> rels = {"*", "amod", "det", "nsubj", "obj", "root"};
  const std::vector<std::string> vars = {"", "x", "y", "z"};
  int trues = 0;
  for (int trial = 0; trial < 2000; ++trial) {
    const int n = 1 + static_cast<int>(rng.below(6));
    auto s = testing::random_sentence(rng, n);
    auto t = testing::random_tree(rng, n);
    StructureQuery q;
    const int k = static_cast<int>(rng.below(4));
    auto token = [&] {
      TM m;
      m.var = vars[rng.below(vars.size())];
      switch (rng.below(4)) {
        case 0: m.constraint = TC::index(static_cast<int>(rng.below(n)) + 1); break;
        case 1: m.constraint = TC::root(); break;
        default: break;
      }
      return m;
    };
    for (int i = 0; i < k; ++i) q.patterns.push_back(edge(rels[rng.below(rels.size())], token(), token()));
    const bool got = eval_query(q, t, s);
    EXPECT_EQ(got, brute_force(q, t, s)) << t.canonical_key();
    trues += got;
  }
  EXPECT_GT(trues, 100);
}

TEST(QueryProperty, AddingPatternsNeverAddsMatches) {
  CounterRng rng(37);
  for (int trial = 0; trial < 500; ++trial) {
    const int n = 2 + static_cast<int>(rng.below(5));
    auto s = testing::random_sentence(rng, n);
    auto t = testing::random_tree(rng, n);
    StructureQuery q1{{edge("*", TM::variable("x"), TM::any())}};
    StructureQuery q2 = q1;
    q2.patterns.push_back(
        edge(testing::test_labels()[rng.below(5)], TM::variable("x"), TM::variable("y")));
    if (eval_query(q2, t, s)) {
      EXPECT_TRUE(eval_query(q1, t, s));
    }
  }
}

TEST(QueryFile, ParsesRulesKeywordsAndDisjunctions) {
  auto qf = parse(
      "# comment\n"
      "keywords kill = killed Shot\n"
      "keywords police = officers cop\n"
      "query r1\n"
      "  edge nsubj|nmod $V=kw:kill kw:police   # agent\n"
      "  edge dobj $V span:mention\n"
      "or\n"
      "  edge * ROOT 2\n"
      "end\n");
  ASSERT_EQ(qf.rules.size(), 1u);
  const auto& r = qf.rule("r1");
  ASSERT_EQ(r.alternatives.size(), 2u);
  const auto& p = r.alternatives[0].patterns[0];
  EXPECT_EQ(p.relation.labels, std::vector<std::string>({"nsubj", "nmod"}));
  EXPECT_EQ(p.governor.var, "V");
  EXPECT_EQ(p.governor.constraint.kind, TC::Kind::kKeywords);
  EXPECT_TRUE(qf.keywords.at("kill")->contains("shot"));
  EXPECT_TRUE(r.alternatives[1].patterns[0].relation.labels.empty());
  EXPECT_EQ(r.alternatives[1].patterns[0].governor.constraint.kind, TC::Kind::kRoot);
  EXPECT_EQ(r.alternatives[1].patterns[0].child.constraint.lo, 2);

  EXPECT_TRUE(eval_rule(r, officers_tree(), officers_killed_smith(), Span{3, 3}));
  EXPECT_THROW(qf.rule("nope"), PreconditionError);
}

TEST(QueryFile, Errors) {
  auto bad = [](const std::string& text) {
    try {
      parse(text);
    } catch (const ParseError& e) {
      return e.line();
    }
    return -1L;
  };
  EXPECT_EQ(bad("edge * * *\n"), 1);
  EXPECT_EQ(bad("query a\nedge * *\nend\n"), 2);
  EXPECT_EQ(bad("query a\nedge * kw:none *\nend\n"), 2);
  EXPECT_EQ(bad("query a\nedge * span:3-1 *\nend\n"), 2);
  EXPECT_EQ(bad("query a\nedge * 0 *\nend\n"), 2);
  EXPECT_EQ(bad("query a\n"), 1);
  EXPECT_EQ(bad("frobnicate\n"), 1);
  EXPECT_EQ(bad("query a\nquery b\n"), 2);
}

TEST(QueryFile, KeywordFileRelativeToQueryFile) {
  const auto dir = std::filesystem::temp_directory_path() / "mcdep_query_test";
  std::filesystem::create_directories(dir);
  {
    std::ofstream(dir / "kill.txt") << "# verbs\nkilled\n  Shot  \n\n";
    std::ofstream(dir / "r.query") << "keywords kill kill.txt\nquery k\nedge * * kw:kill\nend\n";
  }
  auto qf = load_query_file(dir / "r.query");
  EXPECT_EQ(qf.keywords.at("kill")->size(), 2u);
  EXPECT_TRUE(qf.keywords.at("kill")->contains("shot"));
  EXPECT_THROW(load_query_file(dir / "missing.query"), std::runtime_error);
  std::ofstream(dir / "m.query") << "keywords k nothere.txt\n";
  EXPECT_THROW(load_query_file(dir / "m.query"), std::runtime_error);
  std::filesystem::remove_all(dir);
}

}  // namespace
}  // namespace mcdep
