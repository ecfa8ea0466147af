#ifndef MCDEP_CONLLU_HPP_
#define MCDEP_CONLLU_HPP_

// CoNLL-U reading and writing for basic dependency trees. Multiword token
// ranges ("3-4") and empty nodes ("3.1") are dropped on read.

#include <charconv>
#include <cstddef>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "mcdep/error.hpp"
#include "mcdep/sentence.hpp"

namespace mcdep {

struct AnnotatedSentence {
  Sentence sentence;
  std::optional<ParseTree> tree;

  bool operator==(const AnnotatedSentence&) const = default;
};

// A sentence with per-token heads that need not form a tree.
struct AssignedSentence {
  Sentence sentence;
  std::optional<Assignment> assignment;
};

namespace conllu_detail {

inline bool valid_utf8(std::string_view s) {
  std::size_t i = 0;
  const std::size_t n = s.size();
  while (i < n) {
    const auto c = static_cast<unsigned char>(s[i]);
    std::size_t len;
    char32_t cp;
    if (c < 0x80) {
      ++i;
      continue;
    } else if ((c & 0xE0) == 0xC0) {
      len = 2;
      cp = c & 0x1F;
    } else if ((c & 0xF0) == 0xE0) {
      len = 3;
      cp = c & 0x0F;
    } else if ((c & 0xF8) == 0xF0) {
      len = 4;
      cp = c & 0x07;
    } else {
      return false;
    }
    if (i + len > n) return false;
    for (std::size_t k = 1; k < len; ++k) {
      const auto cc = static_cast<unsigned char>(s[i + k]);
      if ((cc & 0xC0) != 0x80) return false;
      cp = (cp << 6) | (cc & 0x3F);
    }
    // Overlong forms, surrogates, and values past U+10FFFF.
    if ((len == 2 && cp < 0x80) || (len == 3 && cp < 0x800) ||
        (len == 4 && cp < 0x10000) || cp > 0x10FFFF ||
        (cp >= 0xD800 && cp <= 0xDFFF))
      return false;
    i += len;
  }
  return true;
}

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

inline std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto tab = line.find('\t', start);
    if (tab == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
}

inline std::optional<int> to_int(std::string_view s) {
  int v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

}  // namespace conllu_detail

// Incremental reader; one call to next() per sentence block.
class ConlluReader {
 public:
  explicit ConlluReader(std::istream& in) : in_(in) {}

  // Returns nullopt at end of input. Throws ParseError for malformed lines
  // and ValidationError for annotations that are not a single-rooted tree.
  std::optional<AnnotatedSentence> next() {
    auto block = next_block();
    if (!block) return std::nullopt;
    AnnotatedSentence out{std::move(block->sentence), std::nullopt};
    if (block->edges) {
      try {
        out.tree.emplace(out.sentence.size(), std::move(*block->edges));
      } catch (const ValidationError& e) {
        throw ValidationError("sentence '" + out.sentence.sent_id + "': " + e.what());
      }
    }
    return out;
  }

  // Like next(), but heads are returned as a per-token assignment without
  // checking that they form a tree (decoder output may not).
  std::optional<AssignedSentence> next_assignment() {
    auto block = next_block();
    if (!block) return std::nullopt;
    AssignedSentence out{std::move(block->sentence), std::nullopt};
    if (block->edges) {
      const int n = out.sentence.size();
      Assignment a(n);
      for (auto& e : *block->edges) {
        if (e.governor < 0 || e.governor > n)
          throw ValidationError("sentence '" + out.sentence.sent_id + "': head " +
                                std::to_string(e.governor) + " out of range");
        a[e.child - 1] = Attachment{std::move(e.relation), e.governor};
      }
      out.assignment = std::move(a);
    }
    return out;
  }

  long line_number() const { return line_no_; }

 private:
  struct Block {
    Sentence sentence;
    std::optional<std::vector<Edge>> edges;  // present when every token has a head
  };

  std::optional<Block> next_block() {
    using namespace conllu_detail;
    Sentence sentence;
    bool have_sent_id = false;
    bool in_block = false;
    bool all_heads = true;
    std::vector<Edge> edges;
    std::string line;
    while (std::getline(in_, line)) {
      ++line_no_;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (!valid_utf8(line)) throw ParseError("invalid UTF-8", line_no_);
      if (line.empty()) {
        if (in_block) break;
        continue;
      }
      in_block = true;
      if (line[0] == '#') {
        auto body = trim(std::string_view(line).substr(1));
        std::string key, value;
        if (auto eq = body.find('='); eq != std::string_view::npos) {
          key = std::string(trim(body.substr(0, eq)));
          value = std::string(trim(body.substr(eq + 1)));
        } else {
          key = std::string(body);
        }
        if (key == "sent_id" && !have_sent_id) {
          sentence.sent_id = value;
          have_sent_id = true;
        } else {
          sentence.metadata.emplace_back(std::move(key), std::move(value));
        }
        continue;
      }
      const auto cols = split_tabs(line);
      if (cols.size() != 10)
        throw ParseError("expected 10 tab-separated columns, found " +
                             std::to_string(cols.size()),
                         line_no_);
      if (cols[0].find_first_of("-.") != std::string_view::npos) continue;
      const auto id = to_int(cols[0]);
      if (!id) throw ParseError("bad token id '" + std::string(cols[0]) + "'", line_no_);
      if (cols[1].empty()) throw ParseError("empty FORM", line_no_);
      Token tok;
      tok.index = *id;
      tok.form = std::string(cols[1]);
      tok.lemma = std::string(cols[2]);
      tok.upos = std::string(cols[3]);
      tok.xpos = std::string(cols[4]);
      if (cols[6] == "_" || cols[7] == "_") {
        all_heads = false;
      } else {
        const auto head = to_int(cols[6]);
        if (!head) throw ParseError("bad HEAD '" + std::string(cols[6]) + "'", line_no_);
        edges.push_back(Edge{std::string(cols[7]), *head, *id});
      }
      sentence.tokens.push_back(std::move(tok));
    }
    if (!in_block) return std::nullopt;
    ++sentence_no_;
    if (!have_sent_id) sentence.sent_id = "s" + std::to_string(sentence_no_);
    if (sentence.tokens.empty())
      throw ValidationError("sentence '" + sentence.sent_id + "' has no tokens");
    validate_sentence(sentence);
    Block out{std::move(sentence), std::nullopt};
    if (all_heads) out.edges = std::move(edges);
    return out;
  }

  std::istream& in_;
  long line_no_ = 0;
  long sentence_no_ = 0;
};

inline std::vector<AnnotatedSentence> read_conllu(std::istream& in) {
  std::vector<AnnotatedSentence> out;
  ConlluReader reader(in);
  while (auto item = reader.next()) out.push_back(std::move(*item));
  return out;
}

inline std::vector<AssignedSentence> read_conllu_assignments(std::istream& in) {
  std::vector<AssignedSentence> out;
  ConlluReader reader(in);
  while (auto item = reader.next_assignment()) out.push_back(std::move(*item));
  return out;
}

namespace conllu_detail {

// head(i) -> (governor, relation) for token i, or nullptr for "_".
template <class HeadFn>
void write_block(std::ostream& out, const Sentence& sentence, HeadFn&& head) {
  out << "# sent_id = " << sentence.sent_id << '\n';
  for (const auto& [key, value] : sentence.metadata) {
    out << "# " << key;
    if (!value.empty()) out << " = " << value;
    out << '\n';
  }
  auto col = [](const std::string& s) -> const std::string& {
    static const std::string underscore = "_";
    return s.empty() ? underscore : s;
  };
  for (const auto& t : sentence.tokens) {
    out << t.index << '\t' << t.form << '\t' << col(t.lemma) << '\t' << col(t.upos)
        << '\t' << col(t.xpos) << "\t_\t";
    if (const Attachment* a = head(t.index))
      out << a->governor << '\t' << a->relation;
    else
      out << "_\t_";
    out << "\t_\t_\n";
  }
  out << '\n';
}

}  // namespace conllu_detail

inline void write_conllu_block(std::ostream& out, const Sentence& sentence,
                               const ParseTree* tree) {
  if (tree && tree->size() != sentence.size())
    throw ValidationError("sentence '" + sentence.sent_id + "' has " +
                          std::to_string(sentence.size()) + " tokens but its tree covers " +
                          std::to_string(tree->size()));
  Attachment a;
  conllu_detail::write_block(out, sentence, [&](int i) -> const Attachment* {
    if (!tree) return nullptr;
    a = Attachment{tree->relation(i), tree->governor(i)};
    return &a;
  });
}

// Heads from a per-token assignment, which need not be a tree.
inline void write_conllu_block(std::ostream& out, const Sentence& sentence,
                               std::span<const Attachment> assignment) {
  if (static_cast<int>(assignment.size()) != sentence.size())
    throw ValidationError("sentence '" + sentence.sent_id + "' has " +
                          std::to_string(sentence.size()) + " tokens but " +
                          std::to_string(assignment.size()) + " attachments");
  conllu_detail::write_block(out, sentence,
                             [&](int i) -> const Attachment* { return &assignment[i - 1]; });
}

inline void write_conllu(std::ostream& out, std::span<const AnnotatedSentence> items) {
  for (const auto& item : items)
    write_conllu_block(out, item.sentence, item.tree ? &*item.tree : nullptr);
}

}  // namespace mcdep

#endif  // MCDEP_CONLLU_HPP_
