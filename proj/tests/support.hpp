#ifndef MCDEP_TESTS_SUPPORT_HPP_
#define MCDEP_TESTS_SUPPORT_HPP_

// Hand-rolled generators shared by the property tests.

#include <cmath>
#include <cstdint>
#include <sstream>
#include <string>
#include <vector>

#include "mcdep/mcdep.hpp"

namespace mcdep::testing {

inline const std::vector<std::string>& test_labels() {
  static const std::vector<std::string> l = {"amod", "det", "nsubj", "obj", "obl"};
  return l;
}

inline Sentence random_sentence(CounterRng& rng, int n, const std::string& id = "r") {
  static const std::vector<std::string> words = {"a", "b", "c", "d", "e", "f"};
  static const std::vector<std::string> tags = {"NOUN", "VERB", "DET", "ADJ"};
  std::vector<std::string> forms, upos;
  for (int i = 0; i < n; ++i) {
    forms.push_back(words[rng.below(words.size())]);
    upos.push_back(tags[rng.below(tags.size())]);
  }
  return make_sentence(id, forms, upos);
}

// Any valid tree (not necessarily projective): tokens placed in random order,
// each attached to an earlier placed vertex.
inline ParseTree random_tree(CounterRng& rng, int n,
                             const std::vector<std::string>& labels = test_labels()) {
  std::vector<int> order(n);
  for (int i = 0; i < n; ++i) order[i] = i + 1;
  for (int i = n; i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
  Assignment a(n);
  a[order[0] - 1] = Attachment{"root", kRootVertex};
  for (int i = 1; i < n; ++i)
    a[order[i] - 1] = Attachment{labels[rng.below(labels.size())], order[rng.below(i)]};
  return ParseTree(a);
}

// Uniformly random legal action at every step; always projective.
inline ParseTree random_rollout(const TransitionSystem& sys, const Sentence& s, CounterRng& rng,
                                std::vector<ActionId>* actions = nullptr) {
  ParserState st = initial_state(s);
  std::vector<ActionId> legal;
  while (!st.is_terminal()) {
    sys.legal(st, legal);
    const ActionId a = legal[rng.below(legal.size())];
    if (actions) actions->push_back(a);
    sys.advance(st, a);
  }
  return st.to_tree();
}

inline double normal(CounterRng& rng) {
  const double u1 = std::max(rng.uniform(), 1e-300);
  const double u2 = rng.uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2 * M_PI * u2);
}

// Random weights on every feature reachable from `rollouts` random
// derivations of `s`, scaled by `scale`.
inline ActionModel random_model(CounterRng& rng, const Sentence& s, double scale = 1.0,
                                int rollouts = 30,
                                const std::vector<std::string>& labels = test_labels()) {
  ActionModel m{TransitionSystem(labels)};
  std::vector<ActionId> legal;
  for (int r = 0; r < rollouts; ++r) {
    ParserState st = initial_state(s);
    while (!st.is_terminal()) {
      for_each_feature(s, st, [&](std::string_view k) {
        if (m.feature_id(k)) return;
        auto row = m.row(m.intern(k));
        for (auto& w : row) w = scale * normal(rng);
      });
      m.system().legal(st, legal);
      m.system().advance(st, legal[rng.below(legal.size())]);
    }
  }
  return m;
}

inline std::vector<AnnotatedSentence> parse_conllu_text(const std::string& text) {
  std::istringstream in(text);
  return read_conllu(in);
}

inline std::string to_conllu_text(const std::vector<AnnotatedSentence>& items) {
  std::ostringstream out;
  write_conllu(out, items);
  return out.str();
}

inline ParseTree tree_of(int n, std::vector<Edge> edges) { return ParseTree(n, std::move(edges)); }

// {nsubj(2,1), root(0,2), obj(2,3)}
inline ParseTree she_saw_stars_tree() {
  return ParseTree(3, {{"nsubj", 2, 1}, {"root", 0, 2}, {"obj", 2, 3}});
}

inline Sentence she_saw_stars() {
  return make_sentence("s1", {"She", "saw", "stars"}, {"PRON", "VERB", "NOUN"});
}

}  // namespace mcdep::testing

#endif  // MCDEP_TESTS_SUPPORT_HPP_
