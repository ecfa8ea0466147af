#ifndef MCDEP_APPLICATIONS_HPP_
#define MCDEP_APPLICATIONS_HPP_

// Consumers of sample sets: rule-based entity extraction aggregated with
// noisy-or, expected feature vectors, and a count-based semantic role model
// that marginalizes over sampled trees.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <functional>
#include <istream>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "mcdep/conllu.hpp"
#include "mcdep/error.hpp"
#include "mcdep/inference.hpp"
#include "mcdep/marginals.hpp"
#include "mcdep/query.hpp"
#include "mcdep/sentence.hpp"

namespace mcdep {

// ---------------------------------------------------------------------------
// Entity extraction.

struct EntityMention {
  std::string entity_id;
  std::string sent_id;
  int span_start = 1;  // inclusive, 1-based
  int span_end = 1;    // inclusive

  Span span() const { return {span_start, span_end}; }
};

inline void check_mention(const EntityMention& m, const Sentence& s) {
  if (m.span_start < 1 || m.span_end < m.span_start || m.span_end > s.size())
    throw ValidationError("mention of '" + m.entity_id + "' has span " +
                          std::to_string(m.span_start) + "-" + std::to_string(m.span_end) +
                          " outside sentence '" + s.sent_id + "'");
}

inline bool rule_match(const Rule& rule, const Sentence& sentence, const EntityMention& mention,
                       const ParseTree& tree) {
  check_mention(mention, sentence);
  return eval_rule(rule, tree, sentence, mention.span());
}

// Fraction of samples where the rule holds for at least one of `mentions`
// (all in this sentence).
inline double sentence_match_prob(const Rule& rule, const Sentence& sentence,
                                  std::span<const EntityMention> mentions,
                                  const SampleSet& samples) {
  if (samples.empty()) throw PreconditionError("match probability over an empty sample set");
  for (const auto& m : mentions) check_mention(m, sentence);
  long hits = 0;
  for (const auto& [key, e] : samples.entries()) {
    for (const auto& m : mentions) {
      if (eval_rule(rule, e.tree, sentence, m.span())) {
        hits += e.count;
        break;
      }
    }
  }
  return static_cast<double>(hits) / static_cast<double>(samples.num_samples());
}

inline double sentence_match_prob(const Rule& rule, const Sentence& sentence,
                                  const EntityMention& mention, const SampleSet& samples) {
  return sentence_match_prob(rule, sentence, std::span<const EntityMention>(&mention, 1), samples);
}

// 1 - prod(1 - p_i), accumulated in log space so small inputs stay exact.
inline double noisy_or(std::span<const double> probs) {
  double log_miss = 0.0;
  for (double p : probs) {
    if (!(p >= 0 && p <= 1)) throw PreconditionError("noisy-or input outside [0, 1]");
    log_miss += std::log1p(-p);
  }
  return 0.0 - std::expm1(log_miss);  // not -expm1: avoids printing -0
}

struct RankedEntity {
  std::string entity_id;
  double probability = 0;
  std::vector<std::pair<std::string, double>> sentences;  // (sent_id, match probability)
};

// Entity probability = noisy-or over the entity's sentences. Sorted by
// descending probability, ties by entity id.
inline std::vector<RankedEntity> rank_entities(
    std::span<const EntityMention> mentions, const Rule& rule,
    const std::map<std::string, const SampledSentence*>& by_sent_id) {
  // entity -> sent_id -> mentions, in id order
  std::map<std::string, std::map<std::string, std::vector<EntityMention>>> grouped;
  for (const auto& m : mentions) grouped[m.entity_id][m.sent_id].push_back(m);
  std::vector<RankedEntity> out;
  for (const auto& [entity, per_sentence] : grouped) {
    RankedEntity r{entity, 0, {}};
    std::vector<double> probs;
    for (const auto& [sid, ms] : per_sentence) {
      auto it = by_sent_id.find(sid);
      if (it == by_sent_id.end() || !it->second)
        throw ValidationError("no samples for sentence '" + sid + "' (entity '" + entity + "')");
      const double p = sentence_match_prob(rule, it->second->sentence, ms, it->second->samples);
      r.sentences.emplace_back(sid, p);
      probs.push_back(p);
    }
    r.probability = noisy_or(probs);
    out.push_back(std::move(r));
  }
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    return a.probability > b.probability;
  });
  return out;
}

using SparseVector = std::map<std::string, double>;
using TreeFeatureFn = std::function<SparseVector(const Sentence&, const ParseTree&)>;

// E[f(x, y)] under the sampled tree distribution.
inline SparseVector expected_features(const TreeFeatureFn& f, const Sentence& sentence,
                                      const SampleSet& samples) {
  if (samples.empty()) throw PreconditionError("expectation over an empty sample set");
  SparseVector out;
  const double s = static_cast<double>(samples.num_samples());
  for (const auto& [key, e] : samples.entries()) {
    const double w = static_cast<double>(e.count) / s;
    for (const auto& [name, v] : f(sentence, e.tree)) out[name] += w * v;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Semantic roles.

struct RoleInstance {
  std::string sent_id;
  int predicate = 0;
  int arg_start = 0;  // argument span, inclusive; a head token has start == end
  int arg_end = 0;
  std::string label;
  std::string predicate_key;  // model key; lemma (or lower-cased form) when empty
};

inline std::string predicate_key(const RoleInstance& r, const Sentence& s) {
  if (!r.predicate_key.empty()) return r.predicate_key;
  const auto& t = s.token(r.predicate);
  return t.lemma != "_" ? t.lemma : ascii_lower(t.form);
}

inline void check_role(const RoleInstance& r, const Sentence& s) {
  const int n = s.size();
  if (r.predicate < 1 || r.predicate > n || r.arg_start < 1 || r.arg_end < r.arg_start ||
      r.arg_end > n)
    throw ValidationError("role instance out of range in '" + s.sent_id + "'");
  if (r.arg_start == r.arg_end && r.arg_start == r.predicate)
    throw ValidationError("role argument equals its predicate in '" + s.sent_id + "'");
}

// Head of an argument span: the within-span ancestor reached by the largest
// number of span tokens when each climbs while its governor stays in the span.
// Ties go to the leftmost candidate.
inline int resolve_argument_head(const ParseTree& tree, int start, int end) {
  std::map<int, int> reach;
  for (int w = start; w <= end; ++w) {
    int v = w;
    while (tree.governor(v) >= start && tree.governor(v) <= end) v = tree.governor(v);
    ++reach[v];
  }
  int best = start, best_n = 0;
  for (const auto& [v, k] : reach)
    if (k > best_n) best = v, best_n = k;
  return best;
}

inline const std::string kNoEdgeFeature = "<none>";

// Relation of the direct edge between predicate and argument: "rel↑" when the
// predicate governs the argument, "rel↓" when the argument governs the
// predicate, otherwise the no-edge feature.
inline std::string path_feature(const ParseTree& tree, int predicate, int argument) {
  if (argument >= 1 && tree.governor(argument) == predicate)
    return tree.relation(argument) + "↑";
  if (predicate >= 1 && tree.governor(predicate) == argument)
    return tree.relation(predicate) + "↓";
  return kNoEdgeFeature;
}

using LabelDistribution = std::map<std::string, double>;

class SemanticModel {
 public:
  void add(const std::string& pred, const std::string& feature, const std::string& label,
           double weight) {
    table_[pred][feature][label] += weight;
    by_pred_[pred][label] += weight;
    prior_[label] += weight;
    labels_.insert(label);
  }

  const std::set<std::string>& labels() const { return labels_; }
  bool knows(const std::string& pred) const { return by_pred_.count(pred) > 0; }

  // p_sem(z | pred, feature). Backs off to the predicate's label
  // distribution for an unseen feature and to the corpus prior for an
  // unknown predicate.
  LabelDistribution conditional(const std::string& pred, const std::string& feature) const {
    if (auto p = table_.find(pred); p != table_.end()) {
      if (auto f = p->second.find(feature); f != p->second.end()) return normalized(f->second);
      return normalized(by_pred_.at(pred));
    }
    return normalized(prior_);
  }

  // The predicate's most common training label (corpus prior when unknown).
  std::string most_common(const std::string& pred) const {
    const auto it = by_pred_.find(pred);
    return argmax(it != by_pred_.end() ? it->second : prior_);
  }

  static std::string argmax(const LabelDistribution& d) {
    std::string best;
    double best_p = -1;
    for (const auto& [label, p] : d)
      if (p > best_p) best = label, best_p = p;
    return best;
  }

  // Raw (possibly fractional) counts, for tests.
  double count(const std::string& pred, const std::string& feature,
               const std::string& label) const {
    auto p = table_.find(pred);
    if (p == table_.end()) return 0;
    auto f = p->second.find(feature);
    if (f == p->second.end()) return 0;
    auto l = f->second.find(label);
    return l == f->second.end() ? 0 : l->second;
  }

 private:
  LabelDistribution normalized(const LabelDistribution& counts) const {
    double z = 0;
    for (const auto& [l, c] : counts) z += c;
    LabelDistribution out;
    for (const auto& [l, c] : counts)
      if (c > 0) out[l] = c / z;
    return out;
  }

  std::map<std::string, std::map<std::string, LabelDistribution>> table_;
  std::map<std::string, LabelDistribution> by_pred_;
  LabelDistribution prior_;
  std::set<std::string> labels_;
};

// Per-sentence parse input for role training and assignment.
struct ParsedSentence {
  const Sentence* sentence = nullptr;
  const SampleSet* samples = nullptr;  // greedy mode: a degenerate set
};

// Each instance adds total mass 1, split over unique trees by c(y)/S.
inline SemanticModel train_semantic(std::span<const RoleInstance> instances,
                                    const std::map<std::string, ParsedSentence>& parses) {
  if (instances.empty()) throw PreconditionError("no role instances");
  SemanticModel model;
  for (const auto& r : instances) {
    auto it = parses.find(r.sent_id);
    if (it == parses.end() || !it->second.sentence || !it->second.samples)
      throw ValidationError("no parses for sentence '" + r.sent_id + "'");
    const Sentence& s = *it->second.sentence;
    const SampleSet& samples = *it->second.samples;
    check_role(r, s);
    if (samples.empty()) throw PreconditionError("empty sample set for '" + r.sent_id + "'");
    const auto key = predicate_key(r, s);
    const double total = static_cast<double>(samples.num_samples());
    for (const auto& [k, e] : samples.entries()) {
      const int head = resolve_argument_head(e.tree, r.arg_start, r.arg_end);
      model.add(key, path_feature(e.tree, r.predicate, head), r.label,
                static_cast<double>(e.count) / total);
    }
  }
  return model;
}

struct RoleAssignment {
  std::string label;
  LabelDistribution posterior;
};

// p_MC(z) = sum over sampled trees of p_sem(z | feature(y)) * c(y) / S.
inline RoleAssignment assign_role(const SemanticModel& model, const std::string& pred_key,
                                  int predicate, int arg_start, int arg_end,
                                  const SampleSet& samples) {
  if (samples.empty()) throw PreconditionError("role assignment over an empty sample set");
  RoleAssignment out;
  const double total = static_cast<double>(samples.num_samples());
  for (const auto& [k, e] : samples.entries()) {
    const int head = resolve_argument_head(e.tree, arg_start, arg_end);
    const double w = static_cast<double>(e.count) / total;
    for (const auto& [label, p] : model.conditional(pred_key, path_feature(e.tree, predicate, head)))
      out.posterior[label] += w * p;
  }
  out.label = SemanticModel::argmax(out.posterior);
  return out;
}

inline RoleAssignment assign_role(const SemanticModel& model, const RoleInstance& r,
                                  const Sentence& sentence, const SampleSet& samples) {
  check_role(r, sentence);
  return assign_role(model, predicate_key(r, sentence), r.predicate, r.arg_start, r.arg_end,
                     samples);
}

// ---------------------------------------------------------------------------
// TSV inputs. Blank lines and lines starting with '#' are skipped.

namespace tsv_detail {

inline std::vector<std::string> fields(const std::string& line) {
  std::vector<std::string> out;
  for (auto f : conllu_detail::split_tabs(line)) out.emplace_back(f);
  return out;
}

inline int to_index(const std::string& s, long line) {
  auto v = conllu_detail::to_int(s);
  if (!v) throw ParseError("expected an integer, got '" + s + "'", line);
  return *v;
}

template <class Fn>
void for_each_row(std::istream& in, Fn&& fn) {
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    fn(fields(line), line_no);
  }
}

}  // namespace tsv_detail

// entity_id, sent_id, span_start, span_end
inline std::vector<EntityMention> read_mentions(std::istream& in) {
  std::vector<EntityMention> out;
  tsv_detail::for_each_row(in, [&](const std::vector<std::string>& f, long line) {
    if (f.size() != 4) throw ParseError("mention rows have 4 columns", line);
    EntityMention m{f[0], f[1], tsv_detail::to_index(f[2], line),
                    tsv_detail::to_index(f[3], line)};
    if (m.span_start < 1 || m.span_end < m.span_start) throw ParseError("bad mention span", line);
    out.push_back(std::move(m));
  });
  return out;
}

// sent_id, predicate_index, argument (head index or "a-b" span), label
// [, predicate_key]
inline std::vector<RoleInstance> read_role_instances(std::istream& in) {
  std::vector<RoleInstance> out;
  tsv_detail::for_each_row(in, [&](const std::vector<std::string>& f, long line) {
    if (f.size() != 4 && f.size() != 5) throw ParseError("role rows have 4 or 5 columns", line);
    RoleInstance r;
    r.sent_id = f[0];
    r.predicate = tsv_detail::to_index(f[1], line);
    if (auto dash = f[2].find('-'); dash != std::string::npos && dash > 0) {
      r.arg_start = tsv_detail::to_index(f[2].substr(0, dash), line);
      r.arg_end = tsv_detail::to_index(f[2].substr(dash + 1), line);
    } else {
      r.arg_start = r.arg_end = tsv_detail::to_index(f[2], line);
    }
    r.label = f[3];
    if (f.size() == 5) r.predicate_key = f[4];
    if (r.predicate < 1 || r.arg_start < 1 || r.arg_end < r.arg_start)
      throw ParseError("bad role indices", line);
    out.push_back(std::move(r));
  });
  return out;
}

}  // namespace mcdep

#endif  // MCDEP_APPLICATIONS_HPP_
