#ifndef MCDEP_SENTENCE_HPP_
#define MCDEP_SENTENCE_HPP_

#include <algorithm>
#include <compare>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mcdep/error.hpp"

namespace mcdep {

// Vertex 0 is the artificial ROOT; tokens are 1..N.
inline constexpr int kRootVertex = 0;

struct Token {
  int index = 0;
  std::string form;
  std::string lemma = "_";
  std::string upos = "_";
  std::string xpos = "_";

  bool operator==(const Token&) const = default;
};

struct Sentence {
  std::string sent_id;
  std::vector<Token> tokens;
  // Comment lines other than sent_id, in file order. A bare "# foo" comment
  // is stored with an empty value.
  std::vector<std::pair<std::string, std::string>> metadata;

  int size() const { return static_cast<int>(tokens.size()); }
  const Token& token(int index) const { return tokens.at(index - 1); }

  const std::string* find_metadata(const std::string& key) const {
    for (const auto& [k, v] : metadata)
      if (k == key) return &v;
    return nullptr;
  }
  void set_metadata(const std::string& key, const std::string& value) {
    for (auto& [k, v] : metadata)
      if (k == key) {
        v = value;
        return;
      }
    metadata.emplace_back(key, value);
  }

  bool operator==(const Sentence&) const = default;
};

// Build a sentence from bare forms (and optional tags), mostly for tests.
inline Sentence make_sentence(std::string sent_id,
                              const std::vector<std::string>& forms,
                              const std::vector<std::string>& upos = {}) {
  Sentence s;
  s.sent_id = std::move(sent_id);
  for (std::size_t i = 0; i < forms.size(); ++i) {
    Token t;
    t.index = static_cast<int>(i) + 1;
    t.form = forms[i];
    if (i < upos.size()) t.upos = upos[i];
    s.tokens.push_back(std::move(t));
  }
  return s;
}

inline void validate_sentence(const Sentence& s) {
  if (s.tokens.empty())
    throw ValidationError("sentence '" + s.sent_id + "' has no tokens");
  for (std::size_t i = 0; i < s.tokens.size(); ++i) {
    if (s.tokens[i].index != static_cast<int>(i) + 1)
      throw ValidationError("sentence '" + s.sent_id +
                            "': token indices are not 1..N");
    if (s.tokens[i].form.empty())
      throw ValidationError("sentence '" + s.sent_id + "': empty form");
  }
}

struct Edge {
  std::string relation;
  int governor = 0;
  int child = 0;

  bool operator==(const Edge&) const = default;
  // Ordered by child first so that sorted edge lists read left to right.
  std::strong_ordering operator<=>(const Edge& o) const {
    if (auto c = child <=> o.child; c != 0) return c;
    if (auto c = governor <=> o.governor; c != 0) return c;
    return relation <=> o.relation;
  }
};

// "child governor relation" - the unit of every canonical text key.
inline void append_edge_key(std::string& out, const Edge& e) {
  out += std::to_string(e.child);
  out += ' ';
  out += std::to_string(e.governor);
  out += ' ';
  out += e.relation;
}

// Per-token (relation, governor) choice; the MBR decoder output and the
// input to LAS. Not necessarily a tree.
struct Attachment {
  std::string relation;
  int governor = -1;
  bool operator==(const Attachment&) const = default;
};
using Assignment = std::vector<Attachment>;  // index child - 1

// Returns the empty string when `assignment` is a rooted tree over 0..N with
// a single ROOT child, otherwise a description of the first problem found.
inline std::string tree_violation(std::span<const Attachment> assignment) {
  const int n = static_cast<int>(assignment.size());
  if (n == 0) return "empty tree";
  int roots = 0;
  for (int w = 1; w <= n; ++w) {
    const int g = assignment[w - 1].governor;
    if (g < 0 || g > n) return "token " + std::to_string(w) + " has governor out of range";
    if (g == w) return "token " + std::to_string(w) + " governs itself";
    if (g == kRootVertex) ++roots;
  }
  if (roots != 1) return std::to_string(roots) + " tokens attached to ROOT";
  // 0 = unvisited, 1 = on current walk, 2 = reaches ROOT.
  std::vector<char> mark(n + 1, 0);
  mark[0] = 2;
  std::vector<int> walk;
  for (int w = 1; w <= n; ++w) {
    walk.clear();
    int v = w;
    while (mark[v] == 0) {
      mark[v] = 1;
      walk.push_back(v);
      v = assignment[v - 1].governor;
    }
    if (mark[v] == 1) return "cycle through token " + std::to_string(v);
    for (int u : walk) mark[u] = 2;
  }
  return {};
}

inline bool is_tree(std::span<const Attachment> assignment) {
  return tree_violation(assignment).empty();
}

// A labeled dependency tree: exactly one governor per token, single ROOT
// child, acyclic. Always valid once constructed.
class ParseTree {
 public:
  ParseTree() = default;

  // Throws ValidationError unless `edges` form a valid tree over 1..n.
  ParseTree(int n_tokens, std::vector<Edge> edges) : n_(n_tokens) {
    if (n_tokens < 1) throw ValidationError("tree must cover at least one token");
    if (static_cast<int>(edges.size()) != n_tokens)
      throw ValidationError("tree over " + std::to_string(n_tokens) +
                            " tokens has " + std::to_string(edges.size()) +
                            " edges");
    attach_.assign(n_tokens, Attachment{});
    for (auto& e : edges) {
      if (e.child < 1 || e.child > n_tokens)
        throw ValidationError("edge child " + std::to_string(e.child) +
                              " out of range");
      if (attach_[e.child - 1].governor != -1)
        throw ValidationError("token " + std::to_string(e.child) +
                              " has two governors");
      attach_[e.child - 1] = Attachment{std::move(e.relation), e.governor};
    }
    if (auto why = tree_violation(attach_); !why.empty()) throw ValidationError(why);
  }

  explicit ParseTree(Assignment assignment)
      : n_(static_cast<int>(assignment.size())), attach_(std::move(assignment)) {
    if (auto why = tree_violation(attach_); !why.empty()) throw ValidationError(why);
  }

  int size() const { return n_; }
  int governor(int child) const { return attach_.at(child - 1).governor; }
  const std::string& relation(int child) const { return attach_.at(child - 1).relation; }
  Edge edge(int child) const { return Edge{relation(child), governor(child), child}; }
  const Assignment& assignment() const { return attach_; }

  // Sorted by child.
  std::vector<Edge> edges() const {
    std::vector<Edge> out;
    out.reserve(n_);
    for (int w = 1; w <= n_; ++w) out.push_back(edge(w));
    return out;
  }

  bool contains(const Edge& e) const {
    return e.child >= 1 && e.child <= n_ && attach_[e.child - 1].governor == e.governor &&
           attach_[e.child - 1].relation == e.relation;
  }

  // Sorted (child, governor, relation) triples as text; a total order on
  // trees that does not depend on how they were derived.
  std::string canonical_key() const {
    std::string key;
    for (int w = 1; w <= n_; ++w) {
      if (w > 1) key += ';';
      append_edge_key(key, edge(w));
    }
    return key;
  }

  bool operator==(const ParseTree&) const = default;

 private:
  int n_ = 0;
  Assignment attach_;
};

// No two arcs cross when tokens are laid out left to right with ROOT at 0.
inline bool is_projective(const ParseTree& tree) {
  const int n = tree.size();
  std::vector<std::pair<int, int>> spans;
  spans.reserve(n);
  for (int w = 1; w <= n; ++w) {
    const int g = tree.governor(w);
    spans.emplace_back(std::min(g, w), std::max(g, w));
  }
  for (std::size_t i = 0; i < spans.size(); ++i) {
    for (std::size_t j = i + 1; j < spans.size(); ++j) {
      const auto [l1, r1] = spans[i];
      const auto [l2, r2] = spans[j];
      if ((l1 < l2 && l2 < r1 && r1 < r2) || (l2 < l1 && l1 < r2 && r2 < r1))
        return false;
    }
  }
  return true;
}

}  // namespace mcdep

#endif  // MCDEP_SENTENCE_HPP_
