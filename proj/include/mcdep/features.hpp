#ifndef MCDEP_FEATURES_HPP_
#define MCDEP_FEATURES_HPP_

// Sparse binary features of a parser configuration.
//
// Positions: s1..s3 are the top three stack items (s1 = top), b1..b3 the
// first three buffer items. For any position, .w is the word form and .p the
// UPOS tag; lc/rc are the leftmost/rightmost attached child, .l its relation.
// Missing positions render as NULL; the ROOT vertex has word NULL and tag ROOT.
//
//   1-6    s1.w s1.p s2.w s2.p s3.w s3.p
//   7-12   b1.w b1.p b2.w b2.p b3.w b3.p
//   13-16  s1.lc.l s1.rc.l s2.lc.l s2.rc.l
//   17-20  s1.lc.p s1.rc.p s2.lc.p s2.rc.p
//   21-25  s1.p|s2.p  s1.p|b1.p  s1.w|s2.p  s1.p|s2.w  s1.w|s2.w
//   26-27  s1.p|s2.p|b1.p  s1.p|s2.p|s3.p
//   28-29  s2.p|s1.p|s1.lc.l  s2.p|s1.p|s2.rc.l
//   30     s1.p|s2.p|d12   (d12 = bucketed distance between s1 and s2)
//   +      bias
//
// Changing any template requires bumping kFeatureTemplateVersion: saved
// models refuse to load under a different version.

#include <string>
#include <string_view>
#include <vector>

#include "mcdep/sentence.hpp"
#include "mcdep/transition.hpp"

namespace mcdep {

inline constexpr std::string_view kFeatureTemplateVersion = "arcstd-30t-v1";
inline constexpr int kNumFeatureTemplates = 30;

struct FeatureVector {
  std::vector<std::string> keys;  // template order, then "bias"

  bool contains(std::string_view k) const {
    for (const auto& key : keys)
      if (key == k) return true;
    return false;
  }
  bool operator==(const FeatureVector&) const = default;
};

namespace features_detail {

inline const std::string kNull = "NULL";
inline const std::string kRootTag = "ROOT";

inline const std::string& word(const Sentence& s, int v) {
  return v <= 0 ? kNull : s.tokens[v - 1].form;
}
inline const std::string& tag(const Sentence& s, int v) {
  if (v < 0) return kNull;
  if (v == kRootVertex) return kRootTag;
  return s.tokens[v - 1].upos;
}
inline const std::string& label(const ParserState& st, int child) {
  return child <= 0 ? kNull : st.relation(child);
}
inline int leftmost(const ParserState& st, int v) { return v < 0 ? -1 : st.leftmost_child(v); }
inline int rightmost(const ParserState& st, int v) { return v < 0 ? -1 : st.rightmost_child(v); }

inline std::string_view distance_bucket(int a, int b) {
  if (a <= 0 || b <= 0) return "NULL";
  const int d = a > b ? a - b : b - a;
  if (d == 1) return "1";
  if (d == 2) return "2";
  if (d <= 4) return "3-4";
  if (d <= 7) return "5-7";
  return "8+";
}

}  // namespace features_detail

// Calls fn(std::string_view key) once per active feature, in template order.
// The view is only valid during the call.
template <class Fn>
void for_each_feature(const Sentence& sentence, const ParserState& st, Fn&& fn) {
  using namespace features_detail;
  const int s1 = st.stack_from_top(0);
  const int s2 = st.stack_from_top(1);
  const int s3 = st.stack_from_top(2);
  const int b1 = st.buffer_at(0);
  const int b2 = st.buffer_at(1);
  const int b3 = st.buffer_at(2);
  const int s1lc = leftmost(st, s1), s1rc = rightmost(st, s1);
  const int s2lc = leftmost(st, s2), s2rc = rightmost(st, s2);
  const Sentence& x = sentence;

  std::string buf;
  buf.reserve(64);
  auto emit = [&](std::string_view name, std::string_view v1) {
    buf.assign(name);
    buf += '=';
    buf += v1;
    fn(std::string_view(buf));
  };
  auto emit2 = [&](std::string_view name, std::string_view v1, std::string_view v2) {
    buf.assign(name);
    buf += '=';
    buf += v1;
    buf += '|';
    buf += v2;
    fn(std::string_view(buf));
  };
  auto emit3 = [&](std::string_view name, std::string_view v1, std::string_view v2,
                   std::string_view v3) {
    buf.assign(name);
    buf += '=';
    buf += v1;
    buf += '|';
    buf += v2;
    buf += '|';
    buf += v3;
    fn(std::string_view(buf));
  };

  emit("s1.w", word(x, s1));
  emit("s1.p", tag(x, s1));
  emit("s2.w", word(x, s2));
  emit("s2.p", tag(x, s2));
  emit("s3.w", word(x, s3));
  emit("s3.p", tag(x, s3));
  emit("b1.w", word(x, b1));
  emit("b1.p", tag(x, b1));
  emit("b2.w", word(x, b2));
  emit("b2.p", tag(x, b2));
  emit("b3.w", word(x, b3));
  emit("b3.p", tag(x, b3));
  emit("s1.lc.l", label(st, s1lc));
  emit("s1.rc.l", label(st, s1rc));
  emit("s2.lc.l", label(st, s2lc));
  emit("s2.rc.l", label(st, s2rc));
  emit("s1.lc.p", s1lc > 0 ? tag(x, s1lc) : kNull);
  emit("s1.rc.p", s1rc > 0 ? tag(x, s1rc) : kNull);
  emit("s2.lc.p", s2lc > 0 ? tag(x, s2lc) : kNull);
  emit("s2.rc.p", s2rc > 0 ? tag(x, s2rc) : kNull);
  emit2("s1.p|s2.p", tag(x, s1), tag(x, s2));
  emit2("s1.p|b1.p", tag(x, s1), tag(x, b1));
  emit2("s1.w|s2.p", word(x, s1), tag(x, s2));
  emit2("s1.p|s2.w", tag(x, s1), word(x, s2));
  emit2("s1.w|s2.w", word(x, s1), word(x, s2));
  emit3("s1.p|s2.p|b1.p", tag(x, s1), tag(x, s2), tag(x, b1));
  emit3("s1.p|s2.p|s3.p", tag(x, s1), tag(x, s2), tag(x, s3));
  emit3("s2.p|s1.p|s1.lc.l", tag(x, s2), tag(x, s1), label(st, s1lc));
  emit3("s2.p|s1.p|s2.rc.l", tag(x, s2), tag(x, s1), label(st, s2rc));
  emit3("s1.p|s2.p|d12", tag(x, s1), tag(x, s2), distance_bucket(s1, s2));
  fn(std::string_view("bias"));
}

inline FeatureVector extract_features(const Sentence& sentence, const ParserState& state) {
  FeatureVector fv;
  fv.keys.reserve(kNumFeatureTemplates + 1);
  for_each_feature(sentence, state, [&](std::string_view k) { fv.keys.emplace_back(k); });
  return fv;
}

}  // namespace mcdep

#endif  // MCDEP_FEATURES_HPP_
