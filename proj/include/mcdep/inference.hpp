#ifndef MCDEP_INFERENCE_HPP_
#define MCDEP_INFERENCE_HPP_

// Decoders over the transition model: greedy, transition sampling (exact
// ancestral samples from p(y | x)), MC-MAP, per-token MBR, and exhaustive
// enumeration of p(y | x) for verification on short sentences.

#include <charconv>
#include <cmath>
#include <cstdint>
#include <map>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "mcdep/conllu.hpp"
#include "mcdep/error.hpp"
#include "mcdep/model.hpp"
#include "mcdep/parallel.hpp"
#include "mcdep/rng.hpp"
#include "mcdep/transition.hpp"

namespace mcdep {

// Scratch buffers for one decoding thread.
struct DecodeWorkspace {
  std::vector<int> fids;
  std::vector<ActionId> legal;
  std::vector<double> scores;
  std::vector<double> probs;
};

// Fills ws.legal and ws.probs for `state`.
inline void next_action_distribution(const ActionModel& model, const Sentence& sentence,
                                     const ParserState& state, DecodeWorkspace& ws) {
  model.system().legal(state, ws.legal);
  model.feature_ids(sentence, state, ws.fids);
  ws.scores.resize(ws.legal.size());
  ws.probs.resize(ws.legal.size());
  model.score(ws.fids, ws.legal, ws.scores);
  softmax(ws.scores, ws.probs);
}

// argmax_a p(a | S) at every step; ties go to the smallest action id.
inline ParseTree greedy_parse(const ActionModel& model, const Sentence& sentence) {
  DecodeWorkspace ws;
  ParserState state = initial_state(sentence);
  while (!state.is_terminal()) {
    next_action_distribution(model, sentence, state, ws);
    std::size_t best = 0;
    for (std::size_t i = 1; i < ws.legal.size(); ++i)
      if (ws.probs[i] > ws.probs[best]) best = i;
    model.system().advance(state, ws.legal[best]);
  }
  return state.to_tree();
}

struct SampledParse {
  ParseTree tree;
  std::vector<Action> actions;
  double log_prob = 0;  // sum of log p(a_n | S_{n-1})
  int sample_id = 0;
};

// One draw from p(y | x): each action by inverse CDF over the legal set in
// ascending action-id order.
inline SampledParse sample_parse(const ActionModel& model, const Sentence& sentence,
                                 CounterRng& rng, int sample_id = 0) {
  DecodeWorkspace ws;
  ParserState state = initial_state(sentence);
  SampledParse out;
  out.sample_id = sample_id;
  out.actions.reserve(2 * sentence.size());
  while (!state.is_terminal()) {
    next_action_distribution(model, sentence, state, ws);
    std::size_t pick = ws.legal.size() - 1;
    if (ws.legal.size() > 1) {
      const double u = rng.uniform();
      double cum = 0;
      for (std::size_t i = 0; i < ws.legal.size(); ++i) {
        cum += ws.probs[i];
        if (u < cum) {
          pick = i;
          break;
        }
      }
    }
    out.log_prob += std::log(ws.probs[pick]);
    out.actions.push_back(model.system().action(ws.legal[pick]));
    model.system().advance(state, ws.legal[pick]);
  }
  out.tree = state.to_tree();
  return out;
}

struct SampleEntry {
  ParseTree tree;
  long count = 0;
  std::vector<Action> actions;  // derivation of the first sample that produced this tree
  double log_prob = 0;          // log probability of that derivation
  int first_sample = 0;
};

// The Monte Carlo distribution: a multiset of sampled trees keyed by their
// canonical key. The sum of counts is the number of samples S.
class SampleSet {
 public:
  SampleSet() = default;
  SampleSet(std::string sent_id, int n_tokens) : sent_id_(std::move(sent_id)), n_(n_tokens) {}

  static SampleSet from_parses(std::string sent_id, int n_tokens,
                               std::span<const SampledParse> parses) {
    SampleSet s(std::move(sent_id), n_tokens);
    for (const auto& p : parses) s.add(p);
    return s;
  }

  // A point mass on `tree`, e.g. to treat a greedy parse as a sample set.
  static SampleSet degenerate(std::string sent_id, const ParseTree& tree, long count = 1) {
    SampleSet s(std::move(sent_id), tree.size());
    s.add(tree, count);
    return s;
  }

  void add(const SampledParse& p) {
    check_size(p.tree);
    auto [it, added] = entries_.try_emplace(p.tree.canonical_key());
    if (added) {
      it->second.tree = p.tree;
      it->second.actions = p.actions;
      it->second.log_prob = p.log_prob;
      it->second.first_sample = p.sample_id;
    }
    ++it->second.count;
    ++total_;
  }

  void add(const ParseTree& tree, long count = 1) {
    if (count < 1) throw PreconditionError("sample counts must be positive");
    check_size(tree);
    auto [it, added] = entries_.try_emplace(tree.canonical_key());
    if (added) it->second.tree = tree;
    it->second.count += count;
    total_ += count;
  }

  // Deterministic union; counts add.
  void merge(const SampleSet& other) {
    for (const auto& [key, e] : other.entries_) {
      auto [it, added] = entries_.try_emplace(key, e);
      if (!added) it->second.count += e.count;
    }
    total_ += other.total_;
  }

  const std::string& sent_id() const { return sent_id_; }
  int n_tokens() const { return n_; }
  long num_samples() const { return total_; }
  std::size_t num_unique() const { return entries_.size(); }
  bool empty() const { return total_ == 0; }
  const std::map<std::string, SampleEntry>& entries() const { return entries_; }

  double probability(const SampleEntry& e) const {
    return static_cast<double>(e.count) / static_cast<double>(total_);
  }

 private:
  void check_size(const ParseTree& t) {
    if (n_ == 0) n_ = t.size();
    if (t.size() != n_) throw PreconditionError("sample tree size does not match sentence");
  }

  std::string sent_id_;
  int n_ = 0;
  long total_ = 0;
  std::map<std::string, SampleEntry> entries_;
};

// S samples; sample k uses the substream keyed by (seed, sent_id, k), so the
// result does not depend on `workers`.
inline std::vector<SampledParse> sample_parses(const ActionModel& model,
                                               const Sentence& sentence, int num_samples,
                                               std::uint64_t seed, int workers = 1) {
  if (num_samples < 1) throw PreconditionError("number of samples must be at least 1");
  std::vector<SampledParse> out(num_samples);
  parallel_for(static_cast<std::size_t>(num_samples), workers, [&](std::size_t k) {
    auto rng = CounterRng::for_sample(seed, sentence.sent_id, k);
    out[k] = sample_parse(model, sentence, rng, static_cast<int>(k));
  });
  return out;
}

inline SampleSet draw_samples(const ActionModel& model, const Sentence& sentence,
                              int num_samples, std::uint64_t seed, int workers = 1) {
  auto parses = sample_parses(model, sentence, num_samples, seed, workers);
  return SampleSet::from_parses(sentence.sent_id, sentence.size(), parses);
}

// Most frequent sampled tree; ties go to the smallest canonical key.
inline ParseTree mc_map(const SampleSet& samples) {
  if (samples.empty()) throw PreconditionError("MC-MAP over an empty sample set");
  const SampleEntry* best = nullptr;
  for (const auto& [key, e] : samples.entries())
    if (!best || e.count > best->count) best = &e;
  return best->tree;
}

struct MbrResult {
  Assignment assignment;  // index child - 1
  bool is_tree = false;
};

// Per token, the (relation, governor) with the highest marginal; ties go to
// the smaller governor, then the lexicographically smaller relation.
inline MbrResult mbr_parse(const SampleSet& samples) {
  if (samples.empty()) throw PreconditionError("MBR over an empty sample set");
  const int n = samples.n_tokens();
  std::vector<std::map<std::pair<int, std::string>, long>> counts(n + 1);
  for (const auto& [key, e] : samples.entries())
    for (int w = 1; w <= n; ++w) counts[w][{e.tree.governor(w), e.tree.relation(w)}] += e.count;
  MbrResult out;
  out.assignment.resize(n);
  for (int w = 1; w <= n; ++w) {
    const std::pair<const std::pair<int, std::string>, long>* best = nullptr;
    for (const auto& kv : counts[w])
      if (!best || kv.second > best->second) best = &kv;
    out.assignment[w - 1] = Attachment{best->first.second, best->first.first};
  }
  out.is_tree = is_tree(out.assignment);
  return out;
}

class BudgetExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ExactEntry {
  ParseTree tree;
  double probability = 0;
};

// Exact p(y | x) keyed by canonical tree key, summing over every legal
// derivation of each tree.
using ExactDistribution = std::map<std::string, ExactEntry>;

// Depth-first enumeration of all derivations. Throws BudgetExceeded once more
// than `max_expansions` states have been expanded.
inline ExactDistribution enumerate_exact(const ActionModel& model, const Sentence& sentence,
                                         long max_expansions = 1'000'000) {
  ExactDistribution out;
  long expansions = 0;
  DecodeWorkspace ws;
  auto visit = [&](auto&& self, const ParserState& state, double prob) -> void {
    if (state.is_terminal()) {
      auto tree = state.to_tree();
      auto [it, added] = out.try_emplace(tree.canonical_key());
      if (added) it->second.tree = std::move(tree);
      it->second.probability += prob;
      return;
    }
    if (++expansions > max_expansions)
      throw BudgetExceeded("exact enumeration exceeded " + std::to_string(max_expansions) +
                           " expansions");
    next_action_distribution(model, sentence, state, ws);
    const auto legal = ws.legal;
    const auto probs = ws.probs;
    for (std::size_t i = 0; i < legal.size(); ++i) {
      if (probs[i] == 0.0) continue;
      self(self, model.system().apply(state, legal[i]), prob * probs[i]);
    }
  };
  visit(visit, initial_state(sentence), 1.0);
  return out;
}

// ---------------------------------------------------------------------------
// Multi-sample CoNLL-U: one block per sample, each carrying "# sample_id = k"
// and "# log_prob = <float>" after its sent_id line.

inline std::string format_double(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

inline void write_samples(std::ostream& out, const Sentence& sentence,
                          std::span<const SampledParse> parses) {
  Sentence block = sentence;
  for (const auto& p : parses) {
    block.metadata = sentence.metadata;
    block.set_metadata("sample_id", std::to_string(p.sample_id));
    block.set_metadata("log_prob", format_double(p.log_prob));
    write_conllu_block(out, block, &p.tree);
  }
}

struct SampledSentence {
  Sentence sentence;  // without sample_id / log_prob metadata
  SampleSet samples;
};

// Groups consecutive blocks sharing a sent_id into one sample set.
inline std::vector<SampledSentence> group_samples(std::vector<AnnotatedSentence> blocks) {
  std::vector<SampledSentence> out;
  for (auto& b : blocks) {
    if (!b.tree)
      throw ValidationError("sample block for '" + b.sentence.sent_id + "' has no tree");
    std::erase_if(b.sentence.metadata, [](const auto& kv) {
      return kv.first == "sample_id" || kv.first == "log_prob";
    });
    if (out.empty() || out.back().sentence.sent_id != b.sentence.sent_id) {
      out.push_back(SampledSentence{b.sentence, SampleSet(b.sentence.sent_id, b.sentence.size())});
    } else if (!(out.back().sentence.tokens == b.sentence.tokens)) {
      throw ValidationError("samples of '" + b.sentence.sent_id + "' disagree on tokens");
    }
    out.back().samples.add(*b.tree);
  }
  return out;
}

}  // namespace mcdep

#endif  // MCDEP_INFERENCE_HPP_
