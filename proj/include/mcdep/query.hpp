#ifndef MCDEP_QUERY_HPP_
#define MCDEP_QUERY_HPP_

// Boolean structure queries over a (sentence, tree) pair.
//
// A StructureQuery is a conjunction of edge patterns. Each pattern constrains
// the relation, the governor, and the child of one tree edge; token matchers
// may name a variable ($X) so that several patterns must agree on a vertex.
// A Rule is a disjunction of queries.
//
// Query files
// -----------
//   # comment                      (anywhere; blank lines ignored)
//   keywords NAME = w1 w2 ...      inline keyword set
//   keywords NAME FILE             one keyword per line, path relative to the
//                                  query file
//   query NAME                     starts a rule; its first alternative follows
//     edge REL GOV CHILD           one pattern of the current alternative
//   or                             starts the next alternative
//   end                            closes the rule
//
//   REL        := '*' | label ('|' label)*
//   TOKEN      := '$'VAR ['=' CONSTRAINT] | CONSTRAINT
//   CONSTRAINT := '*'               any vertex, including ROOT
//               | 'ROOT'            vertex 0
//               | INT               token index
//               | 'form:'TEXT       exact surface form
//               | 'kw:'NAME         form in keyword set (case-insensitive)
//               | 'lemma:'NAME      lemma in keyword set (case-insensitive)
//               | 'span:'INT'-'INT  token index within [a, b]
//               | 'span:mention'    token inside the mention span bound at
//                                   evaluation time
//
// A variable that appears with several constraints must satisfy all of them.

#include <algorithm>
#include <cctype>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <istream>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "mcdep/error.hpp"
#include "mcdep/sentence.hpp"

namespace mcdep {

inline std::string ascii_lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

// Lower-cased keyword set.
class KeywordSet {
 public:
  KeywordSet() = default;
  explicit KeywordSet(const std::vector<std::string>& words) {
    for (const auto& w : words) add(w);
  }
  void add(std::string_view w) { words_.insert(ascii_lower(w)); }
  bool contains(std::string_view w) const { return words_.count(ascii_lower(w)) > 0; }
  std::size_t size() const { return words_.size(); }

 private:
  std::set<std::string> words_;
};

struct TokenConstraint {
  enum class Kind { kAny, kRoot, kIndex, kForm, kKeywords, kLemmaKeywords, kSpan, kMentionSpan };
  Kind kind = Kind::kAny;
  int lo = 0, hi = 0;  // kIndex uses lo; kSpan uses [lo, hi]
  std::string text;    // kForm
  std::shared_ptr<const KeywordSet> keywords;

  static TokenConstraint make(Kind k, int lo = 0, int hi = 0) {
    TokenConstraint c;
    c.kind = k;
    c.lo = lo;
    c.hi = hi;
    return c;
  }
  static TokenConstraint any() { return {}; }
  static TokenConstraint root() { return make(Kind::kRoot); }
  static TokenConstraint index(int i) { return make(Kind::kIndex, i, i); }
  static TokenConstraint form(std::string f) {
    auto c = make(Kind::kForm);
    c.text = std::move(f);
    return c;
  }
  static TokenConstraint keyword(std::shared_ptr<const KeywordSet> k) {
    auto c = make(Kind::kKeywords);
    c.keywords = std::move(k);
    return c;
  }
  static TokenConstraint lemma_keyword(std::shared_ptr<const KeywordSet> k) {
    auto c = make(Kind::kLemmaKeywords);
    c.keywords = std::move(k);
    return c;
  }
  static TokenConstraint span(int lo, int hi) { return make(Kind::kSpan, lo, hi); }
  static TokenConstraint mention() { return make(Kind::kMentionSpan); }
};

struct TokenMatcher {
  std::string var;  // empty = unnamed
  TokenConstraint constraint;

  static TokenMatcher any() { return {}; }
  static TokenMatcher of(TokenConstraint c) { return {"", std::move(c)}; }
  static TokenMatcher variable(std::string v, TokenConstraint c = {}) {
    return {std::move(v), std::move(c)};
  }
};

struct RelationMatcher {
  std::vector<std::string> labels;  // empty = any relation

  bool matches(const std::string& r) const {
    return labels.empty() || std::find(labels.begin(), labels.end(), r) != labels.end();
  }
};

struct EdgePattern {
  RelationMatcher relation;
  TokenMatcher governor;
  TokenMatcher child;
};

struct StructureQuery {
  std::vector<EdgePattern> patterns;  // conjunction; empty = always true
};

struct Rule {
  std::string name;
  std::vector<StructureQuery> alternatives;  // disjunction
};

struct Span {
  int start = 0;  // inclusive, 1-based
  int end = 0;    // inclusive
  bool contains(int v) const { return v >= start && v <= end; }
};

namespace query_detail {

inline void check_constraint(const TokenConstraint& c, const Sentence& s) {
  using K = TokenConstraint::Kind;
  if ((c.kind == K::kIndex || c.kind == K::kSpan) && (c.hi > s.size() || c.lo < 0))
    throw PreconditionError("query references token " + std::to_string(c.hi) + " but '" +
                            s.sent_id + "' has " + std::to_string(s.size()) + " tokens");
}

inline bool satisfies(const TokenConstraint& c, int v, const Sentence& s,
                      const std::optional<Span>& mention) {
  using K = TokenConstraint::Kind;
  switch (c.kind) {
    case K::kAny:
      return true;
    case K::kRoot:
      return v == kRootVertex;
    case K::kIndex:
      return v == c.lo;
    case K::kForm:
      return v >= 1 && s.token(v).form == c.text;
    case K::kKeywords:
      return v >= 1 && c.keywords && c.keywords->contains(s.token(v).form);
    case K::kLemmaKeywords:
      return v >= 1 && c.keywords && c.keywords->contains(s.token(v).lemma);
    case K::kSpan:
      return v >= c.lo && v <= c.hi && v >= 1;
    case K::kMentionSpan:
      if (!mention) throw PreconditionError("query uses span:mention but no mention is bound");
      return mention->contains(v);
  }
  return false;
}

class Matcher {
 public:
  Matcher(const StructureQuery& q, const ParseTree& t, const Sentence& s,
          const std::optional<Span>& mention)
      : q_(q), t_(t), s_(s), mention_(mention) {}

  bool run() { return match(0); }

 private:
  bool bind_ok(const TokenMatcher& m, int v, std::vector<std::string>& newly_bound) {
    if (!satisfies(m.constraint, v, s_, mention_)) return false;
    if (m.var.empty()) return true;
    auto it = binding_.find(m.var);
    if (it != binding_.end()) return it->second == v;
    binding_.emplace(m.var, v);
    newly_bound.push_back(m.var);
    return true;
  }

  bool match(std::size_t k) {
    if (k == q_.patterns.size()) return true;
    const EdgePattern& p = q_.patterns[k];
    for (int w = 1; w <= t_.size(); ++w) {
      if (!p.relation.matches(t_.relation(w))) continue;
      std::vector<std::string> newly;
      if (bind_ok(p.governor, t_.governor(w), newly) && bind_ok(p.child, w, newly) &&
          match(k + 1))
        return true;
      for (const auto& v : newly) binding_.erase(v);
    }
    return false;
  }

  const StructureQuery& q_;
  const ParseTree& t_;
  const Sentence& s_;
  const std::optional<Span>& mention_;
  std::map<std::string, int> binding_;
};

}  // namespace query_detail

// True iff some binding of the query's variables satisfies every pattern.
// Throws PreconditionError when a pattern names a token beyond the sentence.
inline bool eval_query(const StructureQuery& query, const ParseTree& tree,
                       const Sentence& sentence, const std::optional<Span>& mention = {}) {
  for (const auto& p : query.patterns) {
    query_detail::check_constraint(p.governor.constraint, sentence);
    query_detail::check_constraint(p.child.constraint, sentence);
  }
  return query_detail::Matcher(query, tree, sentence, mention).run();
}

inline bool eval_rule(const Rule& rule, const ParseTree& tree, const Sentence& sentence,
                      const std::optional<Span>& mention = {}) {
  for (const auto& alt : rule.alternatives)
    if (eval_query(alt, tree, sentence, mention)) return true;
  return false;
}

// ---------------------------------------------------------------------------
// Query file parsing.

struct QueryFile {
  std::map<std::string, std::shared_ptr<const KeywordSet>> keywords;
  std::vector<Rule> rules;

  const Rule& rule(const std::string& name) const {
    for (const auto& r : rules)
      if (r.name == name) return r;
    throw PreconditionError("no rule named '" + name + "'");
  }
};

inline KeywordSet load_keywords(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open keyword file " + path.string());
  KeywordSet out;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos || line[first] == '#') continue;
    auto last = line.find_last_not_of(" \t");
    out.add(std::string_view(line).substr(first, last - first + 1));
  }
  return out;
}

namespace query_detail {

inline std::vector<std::string> words(const std::string& line) {
  std::istringstream ss(line);
  std::vector<std::string> out;
  for (std::string w; ss >> w;) out.push_back(w);
  return out;
}

inline std::optional<int> parse_int(std::string_view s) {
  int v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) return std::nullopt;
  return v;
}

inline TokenConstraint parse_constraint(std::string_view s, const QueryFile& qf, long line) {
  if (s == "*") return TokenConstraint::any();
  if (s == "ROOT") return TokenConstraint::root();
  if (auto i = parse_int(s)) {
    if (*i < 1) throw ParseError("token index must be >= 1", line);
    return TokenConstraint::index(*i);
  }
  auto starts = [&](std::string_view p) { return s.substr(0, p.size()) == p; };
  if (starts("form:")) return TokenConstraint::form(std::string(s.substr(5)));
  if (starts("kw:") || starts("lemma:")) {
    const bool lemma = starts("lemma:");
    const auto name = std::string(s.substr(lemma ? 6 : 3));
    auto it = qf.keywords.find(name);
    if (it == qf.keywords.end()) throw ParseError("unknown keyword set '" + name + "'", line);
    return lemma ? TokenConstraint::lemma_keyword(it->second)
                 : TokenConstraint::keyword(it->second);
  }
  if (s == "span:mention") return TokenConstraint::mention();
  if (starts("span:")) {
    auto body = s.substr(5);
    auto dash = body.find('-');
    auto lo = dash == std::string_view::npos ? std::nullopt : parse_int(body.substr(0, dash));
    auto hi = dash == std::string_view::npos ? std::nullopt : parse_int(body.substr(dash + 1));
    if (!lo || !hi || *lo < 1 || *hi < *lo) throw ParseError("bad span '" + std::string(s) + "'", line);
    return TokenConstraint::span(*lo, *hi);
  }
  throw ParseError("bad token matcher '" + std::string(s) + "'", line);
}

inline TokenMatcher parse_token(std::string_view s, const QueryFile& qf, long line) {
  if (!s.empty() && s[0] == '$') {
    auto eq = s.find('=');
    auto var = std::string(s.substr(1, eq == std::string_view::npos ? s.npos : eq - 1));
    if (var.empty()) throw ParseError("empty variable name", line);
    if (eq == std::string_view::npos) return TokenMatcher::variable(var);
    return TokenMatcher::variable(var, parse_constraint(s.substr(eq + 1), qf, line));
  }
  return TokenMatcher::of(parse_constraint(s, qf, line));
}

inline RelationMatcher parse_relation(const std::string& s) {
  RelationMatcher m;
  if (s == "*") return m;
  std::size_t start = 0;
  while (true) {
    auto bar = s.find('|', start);
    m.labels.push_back(s.substr(start, bar == std::string::npos ? bar : bar - start));
    if (bar == std::string::npos) break;
    start = bar + 1;
  }
  return m;
}

}  // namespace query_detail

// `base_dir` resolves relative keyword file paths.
inline QueryFile parse_query_file(std::istream& in,
                                  const std::filesystem::path& base_dir = ".") {
  using namespace query_detail;
  QueryFile qf;
  Rule* current = nullptr;
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    const auto w = words(line);
    if (w.empty()) continue;
    if (w[0] == "keywords") {
      if (current) throw ParseError("keywords inside a query", line_no);
      if (w.size() < 3) throw ParseError("keywords NAME (= words... | FILE)", line_no);
      KeywordSet set;
      if (w[2] == "=") {
        for (std::size_t i = 3; i < w.size(); ++i) set.add(w[i]);
      } else {
        if (w.size() != 3) throw ParseError("keywords NAME FILE takes one path", line_no);
        const std::filesystem::path p(w[2]);
        set = load_keywords(p.is_absolute() ? p : base_dir / p);
      }
      qf.keywords[w[1]] = std::make_shared<const KeywordSet>(std::move(set));
    } else if (w[0] == "query") {
      if (current) throw ParseError("nested query (missing 'end')", line_no);
      if (w.size() != 2) throw ParseError("query NAME", line_no);
      qf.rules.push_back(Rule{w[1], {StructureQuery{}}});
      current = &qf.rules.back();
    } else if (w[0] == "edge") {
      if (!current) throw ParseError("edge outside a query", line_no);
      if (w.size() != 4) throw ParseError("edge REL GOV CHILD", line_no);
      current->alternatives.back().patterns.push_back(EdgePattern{
          parse_relation(w[1]), parse_token(w[2], qf, line_no), parse_token(w[3], qf, line_no)});
    } else if (w[0] == "or") {
      if (!current) throw ParseError("'or' outside a query", line_no);
      current->alternatives.push_back(StructureQuery{});
    } else if (w[0] == "end") {
      if (!current) throw ParseError("'end' without 'query'", line_no);
      current = nullptr;
    } else {
      throw ParseError("unknown directive '" + w[0] + "'", line_no);
    }
  }
  if (current) throw ParseError("query '" + current->name + "' is missing 'end'", line_no);
  return qf;
}

inline QueryFile load_query_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open query file " + path.string());
  return parse_query_file(in, path.parent_path().empty() ? "." : path.parent_path());
}

}  // namespace mcdep

#endif  // MCDEP_QUERY_HPP_
