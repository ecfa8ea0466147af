#ifndef MCDEP_SYNTHETIC_HPP_
#define MCDEP_SYNTHETIC_HPP_

// Deterministic generator of English-like sentences annotated with UD v2
// style dependency trees, for running the pipeline where no treebank is at
// hand. Prepositional phrases attach to the verb or to the preceding noun at
// random, with odds set by the words involved, so the gold trees carry
// genuine attachment ambiguity that no parser can resolve from the words
// alone. Longer sentences carry more of it.

#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "mcdep/applications.hpp"
#include "mcdep/conllu.hpp"
#include "mcdep/rng.hpp"
#include "mcdep/sentence.hpp"

namespace mcdep {

namespace synthetic_detail {

struct Verb {
  const char* lemma;
  const char* past;
  const char* participle;
  bool transitive;
};

inline const std::vector<Verb>& verbs() {
  static const std::vector<Verb> v = {
      {"see", "saw", "seen", true},          {"find", "found", "found", true},
      {"watch", "watched", "watched", true}, {"hit", "hit", "hit", true},
      {"follow", "followed", "followed", true}, {"carry", "carried", "carried", true},
      {"paint", "painted", "painted", true}, {"visit", "visited", "visited", true},
      {"open", "opened", "opened", true},    {"build", "built", "built", true},
      {"send", "sent", "sent", true},        {"give", "gave", "given", true},
      {"take", "took", "taken", true},       {"cut", "cut", "cut", true},
      {"help", "helped", "helped", true},    {"call", "called", "called", true},
      {"sleep", "slept", "slept", false},    {"arrive", "arrived", "arrived", false},
      {"wait", "waited", "waited", false},   {"walk", "walked", "walked", false},
      {"laugh", "laughed", "laughed", false}, {"work", "worked", "worked", false},
  };
  return v;
}

inline const std::vector<const char*>& nouns() {
  static const std::vector<const char*> v = {
      "man",     "woman",  "dog",    "cat",     "telescope", "hat",     "park",   "house",
      "car",     "letter", "friend", "teacher", "student",   "knife",   "bread",  "window",
      "door",    "garden", "city",   "river",   "book",      "picture", "box",    "table",
      "hammer",  "boat",   "doctor", "child",   "officer",   "key",     "ticket", "bridge",
      "market",  "train",  "bag",    "phone",   "camera",    "farmer",  "street", "office",
  };
  return v;
}

inline const std::vector<const char*>& adjectives() {
  static const std::vector<const char*> v = {"old", "red",   "small", "big",  "young",
                                             "new", "quiet", "green", "tall", "broken"};
  return v;
}

inline const std::vector<const char*>& determiners() {
  static const std::vector<const char*> v = {"the", "a", "this", "that", "every", "his", "her"};
  return v;
}

inline const std::vector<const char*>& propns() {
  static const std::vector<const char*> v = {"Smith", "Jones", "Maria", "Ahmed", "Chen", "Paris"};
  return v;
}

inline const std::vector<const char*>& pronouns() {
  static const std::vector<const char*> v = {"She", "He", "They", "We", "I"};
  return v;
}

inline const std::vector<const char*>& prepositions() {
  static const std::vector<const char*> v = {"with", "in", "on", "near", "to", "from", "for", "under"};
  return v;
}

inline const std::vector<const char*>& adverbs() {
  static const std::vector<const char*> v = {"quickly", "yesterday", "again", "slowly", "today"};
  return v;
}

// Stable per-word affinity in [-1.5, 1.5].
inline double affinity(std::string_view salt, std::string_view word) {
  const auto h = mix64(fnv1a64(salt) ^ fnv1a64(word));
  return (static_cast<double>(h >> 11) * 0x1.0p-53 - 0.5) * 3.0;
}

class Builder {
 public:
  explicit Builder(CounterRng& rng) : rng_(rng) {}

  int add(std::string form, std::string lemma, std::string upos) {
    forms_.push_back(std::move(form));
    lemmas_.push_back(std::move(lemma));
    upos_.push_back(std::move(upos));
    heads_.push_back(-1);
    rels_.emplace_back();
    return static_cast<int>(forms_.size());
  }
  void attach(int child, int gov, const char* rel) {
    heads_[child - 1] = gov;
    rels_[child - 1] = rel;
  }
  const std::string& lemma(int v) const { return lemmas_[v - 1]; }

  template <class T>
  const T& pick(const std::vector<T>& v) {
    return v[rng_.below(v.size())];
  }
  bool chance(double p) { return rng_.uniform() < p; }

  // Returns the head noun. `allow_pp` permits a noun-attached PP inside.
  int noun_phrase(bool subject, bool allow_pp, bool allow_relcl) {
    const double r = rng_.uniform();
    if (subject && r < 0.15) {
      const std::string f = pick(pronouns());
      return add(f, ascii_lower(f), "PRON");
    }
    if (r < 0.25) {
      const std::string f = pick(propns());
      return add(f, f, "PROPN");
    }
    std::vector<std::pair<int, const char*>> pre;
    pre.emplace_back(add(pick(determiners()), "", "DET"), "det");
    lemmas_.back() = forms_.back();
    const int n_adj = chance(0.35) ? (chance(0.2) ? 2 : 1) : 0;
    for (int i = 0; i < n_adj; ++i) {
      const std::string a = pick(adjectives());
      pre.emplace_back(add(a, a, "ADJ"), "amod");
    }
    if (chance(0.12)) {
      const std::string c = pick(nouns());
      pre.emplace_back(add(c, c, "NOUN"), "compound");
    }
    const std::string n = pick(nouns());
    const int head = add(n, n, "NOUN");
    for (auto [tok, rel] : pre) attach(tok, head, rel);
    if (allow_pp && chance(0.15)) {
      const int pp = prep_phrase(false);
      attach(pp, head, "nmod");
    }
    if (allow_relcl && chance(0.12)) relative_clause(head);
    return head;
  }

  // "P NP"; returns the NP head with the case marker attached to it.
  int prep_phrase(bool allow_pp, const char* prep = nullptr) {
    const std::string p = prep ? prep : pick(prepositions());
    const int case_tok = add(p, p, "ADP");
    const int np = noun_phrase(false, allow_pp, false);
    attach(case_tok, np, "case");
    last_prep_ = p;
    return np;
  }

  void relative_clause(int noun) {
    const int that = add("that", "that", "PRON");
    const Verb& v = pick_transitive();
    const int verb = add(v.past, v.lemma, "VERB");
    attach(that, verb, "nsubj");
    attach(verb, noun, "acl:relcl");
    const int obj = noun_phrase(false, false, false);
    attach(obj, verb, "obj");
  }

  const Verb& pick_transitive() {
    while (true) {
      const Verb& v = pick(verbs());
      if (v.transitive) return v;
    }
  }

  // One clause; returns the verb.
  int clause() {
    const bool passive = chance(0.2);
    const Verb& v = passive ? pick_transitive() : pick(verbs());
    const int subj = noun_phrase(true, true, true);
    int verb;
    int last_noun = -1;
    if (passive) {
      const bool plural = forms_[subj - 1] == "They" || forms_[subj - 1] == "We";
      const int aux = add(plural ? "were" : "was", "be", "AUX");
      verb = add(v.participle, v.lemma, "VERB");
      attach(subj, verb, "nsubj:pass");
      attach(aux, verb, "aux:pass");
      if (chance(0.5)) {
        last_noun = prep_phrase(false, "by");
        attach(last_noun, verb, "obl");
      }
    } else {
      int aux = -1;
      if (chance(0.15)) aux = add("had", "have", "AUX");
      verb = add(aux > 0 ? v.participle : v.past, v.lemma, "VERB");
      attach(subj, verb, "nsubj");
      if (aux > 0) attach(aux, verb, "aux");
      if (v.transitive && chance(0.85)) {
        last_noun = noun_phrase(false, false, true);
        attach(last_noun, verb, "obj");
      }
    }
    const double r = rng_.uniform();
    const int n_pp = r < 0.35 ? 0 : r < 0.7 ? 1 : r < 0.9 ? 2 : 3;
    for (int i = 0; i < n_pp; ++i) {
      const int pp = prep_phrase(false);
      // Verb or the nearest preceding noun; both keep the tree projective.
      bool to_verb = true;
      if (last_noun > 0) {
        const double score = affinity("prep", last_prep_) + affinity("obj", lemma(pp)) +
                             0.5 * affinity("verb", v.lemma) - 0.6 * affinity("host", lemma(last_noun));
        to_verb = chance(1.0 / (1.0 + std::exp(-score)));
      }
      if (to_verb) {
        attach(pp, verb, "obl");
      } else {
        attach(pp, last_noun, "nmod");
      }
      last_noun = pp;
    }
    if (chance(0.15)) {
      const std::string a = pick(adverbs());
      attach(add(a, a, "ADV"), verb, "advmod");
    }
    return verb;
  }

  AnnotatedSentence sentence(std::string sent_id) {
    const int root = clause();
    attach(root, kRootVertex, "root");
    if (chance(0.2)) {
      const int cc = add("and", "and", "CCONJ");
      const int second = clause();
      attach(cc, second, "cc");
      attach(second, root, "conj");
    }
    attach(add(".", ".", "PUNCT"), root, "punct");

    AnnotatedSentence out;
    out.sentence.sent_id = std::move(sent_id);
    Assignment a;
    for (std::size_t i = 0; i < forms_.size(); ++i) {
      Token t;
      t.index = static_cast<int>(i) + 1;
      t.form = forms_[i];
      t.lemma = lemmas_[i];
      t.upos = upos_[i];
      out.sentence.tokens.push_back(std::move(t));
      a.push_back(Attachment{rels_[i], heads_[i]});
    }
    out.tree = ParseTree(a);
    return out;
  }

 private:
  CounterRng& rng_;
  std::vector<std::string> forms_, lemmas_, upos_, rels_;
  std::vector<int> heads_;
  std::string last_prep_;
};

}  // namespace synthetic_detail

// `count` sentences with ids "<prefix>-<k>" (k from 1). Same seed, same
// treebank.
inline std::vector<AnnotatedSentence> synthetic_treebank(const std::string& prefix, int count,
                                                         std::uint64_t seed) {
  std::vector<AnnotatedSentence> out;
  out.reserve(count);
  for (int k = 1; k <= count; ++k) {
    const auto id = prefix + "-" + std::to_string(k);
    auto rng = CounterRng::for_sample(seed, id, 0);
    synthetic_detail::Builder b(rng);
    out.push_back(b.sentence(id));
  }
  return out;
}

// Core-argument role instances read off gold trees. Predicates are verbs;
// arguments are given as the full subtree span of the dependent.
//   active nsubj -> A0, obj -> A1, nsubj:pass -> A1, passive "by" obl -> A0,
//   obl with "to" / "for" -> A2, obl with "with" -> A3.
// Other obliques are adjuncts and produce no instance.
inline std::vector<RoleInstance> synthetic_roles(std::span<const AnnotatedSentence> treebank) {
  std::vector<RoleInstance> out;
  for (const auto& item : treebank) {
    if (!item.tree) continue;
    const ParseTree& t = *item.tree;
    const Sentence& s = item.sentence;
    const int n = t.size();
    std::vector<int> lo(n + 1), hi(n + 1);
    for (int w = 1; w <= n; ++w) lo[w] = hi[w] = w;
    for (int w = 1; w <= n; ++w)
      for (int v = t.governor(w); v >= 1; v = t.governor(v)) {
        lo[v] = std::min(lo[v], w);
        hi[v] = std::max(hi[v], w);
      }
    auto case_of = [&](int noun) -> std::string {
      for (int w = 1; w <= n; ++w)
        if (t.governor(w) == noun && t.relation(w) == "case") return s.token(w).lemma;
      return "";
    };
    for (int p = 1; p <= n; ++p) {
      if (s.token(p).upos != "VERB") continue;
      bool passive = false;
      for (int w = 1; w <= n; ++w) passive |= t.governor(w) == p && t.relation(w) == "aux:pass";
      for (int a = 1; a <= n; ++a) {
        if (t.governor(a) != p) continue;
        const auto& rel = t.relation(a);
        std::string label;
        if (rel == "nsubj") label = "A0";
        if (rel == "obj" || rel == "nsubj:pass") label = "A1";
        if (rel == "obl") {
          const auto c = case_of(a);
          if (c == "by" && passive) label = "A0";
          if (c == "to" || c == "for") label = "A2";
          if (c == "with") label = "A3";
        }
        if (label.empty()) continue;
        out.push_back(RoleInstance{s.sent_id, p, lo[a], hi[a], label, s.token(p).lemma});
      }
    }
  }
  return out;
}

}  // namespace mcdep

#endif  // MCDEP_SYNTHETIC_HPP_
