#ifndef MCDEP_TRAIN_HPP_
#define MCDEP_TRAIN_HPP_

// Multiclass logistic regression over oracle (state, action) pairs: L2
// regularized negative log-likelihood minimized with AdaGrad steps over
// shuffled instances. Deterministic given the config.

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "mcdep/conllu.hpp"
#include "mcdep/model.hpp"
#include "mcdep/rng.hpp"
#include "mcdep/transition.hpp"

namespace mcdep {

struct TrainConfig {
  int epochs = 10;
  double l2 = 1e-6;  // per instance, applied to the weights an instance touches
  double learning_rate = 0.05;
  double adagrad_epsilon = 1e-8;
  std::uint64_t seed = 1;
  // Without an explicit dev set, every k-th sentence (k = round(1 / fraction))
  // is held out for the accuracy log once there are at least 10 sentences.
  double heldout_fraction = 0.1;
  int min_feature_count = 1;
  std::string root_label = "root";
};

struct EpochLog {
  int epoch = 0;
  double train_nll = 0;            // mean over training instances
  double heldout_accuracy = std::numeric_limits<double>::quiet_NaN();
  long heldout_instances = 0;
};

struct TrainResult {
  ActionModel model;
  std::vector<EpochLog> log;
  long sentences_used = 0;
  long skipped_nonprojective = 0;
  long skipped_underivable = 0;  // e.g. ROOT edge not labeled with the root label
  long instances = 0;
};

namespace train_detail {

// Legal set shapes under arc-standard, so instances need not store them.
enum LegalShape : std::uint8_t { kShiftOnly, kArcsOnly, kShiftAndArcs, kRootOnly };

inline LegalShape shape_of(const ParserState& s) {
  if (s.stack_size() < 2) return kShiftOnly;
  if (s.stack_from_top(1) == kRootVertex) return s.buffer_empty() ? kRootOnly : kShiftOnly;
  return s.buffer_empty() ? kArcsOnly : kShiftAndArcs;
}

inline void expand(const TransitionSystem& sys, LegalShape shape, std::vector<ActionId>& out) {
  out.clear();
  switch (shape) {
    case kShiftOnly:
      out.push_back(TransitionSystem::shift_id());
      break;
    case kRootOnly:
      out.push_back(sys.root_attach_id());
      break;
    case kShiftAndArcs:
    case kArcsOnly:
      if (shape == kShiftAndArcs) out.push_back(TransitionSystem::shift_id());
      for (ActionId a = 1; a < sys.num_actions(); ++a) out.push_back(a);
      break;
  }
}

struct Instance {
  std::uint32_t feat_begin;
  std::uint32_t feat_end;
  ActionId gold;
  LegalShape shape;
};

}  // namespace train_detail

// Log-likelihood of `gold` given active features, and (optionally) its
// gradient with respect to row[f][legal[i]]: 1[legal[i] == gold] - p_i.
inline double instance_log_likelihood(const ActionModel& model, std::span<const int> fids,
                                      std::span<const ActionId> legal, ActionId gold,
                                      std::vector<double>* gradient = nullptr) {
  std::vector<double> scores(legal.size()), probs(legal.size());
  model.score(fids, legal, scores);
  softmax(scores, probs);
  double ll = 0;
  for (std::size_t i = 0; i < legal.size(); ++i)
    if (legal[i] == gold) ll = std::log(probs[i]);
  if (gradient) {
    gradient->assign(legal.size(), 0.0);
    for (std::size_t i = 0; i < legal.size(); ++i)
      (*gradient)[i] = (legal[i] == gold ? 1.0 : 0.0) - probs[i];
  }
  return ll;
}

// Greedy oracle-action accuracy over projective trees of `data`.
inline std::pair<long, long> oracle_accuracy(const ActionModel& model,
                                             std::span<const AnnotatedSentence> data) {
  long correct = 0, total = 0;
  std::vector<int> fids;
  std::vector<ActionId> legal;
  std::vector<double> scores;
  for (const auto& item : data) {
    if (!item.tree) continue;
    try {
      for_each_oracle_step(model.system(), item.sentence, *item.tree,
                           [&](const ParserState& s, ActionId gold) {
                             model.system().legal(s, legal);
                             model.feature_ids(item.sentence, s, fids);
                             scores.resize(legal.size());
                             model.score(fids, legal, scores);
                             std::size_t best = 0;
                             for (std::size_t i = 1; i < legal.size(); ++i)
                               if (scores[i] > scores[best]) best = i;
                             correct += legal[best] == gold;
                             ++total;
                           });
    } catch (const PreconditionError&) {
      // Non-projective or otherwise underivable gold trees are not scored.
    }
  }
  return {correct, total};
}

inline TrainResult train(std::span<const AnnotatedSentence> treebank, const TrainConfig& config,
                         std::span<const AnnotatedSentence> dev = {}) {
  using namespace train_detail;
  std::set<std::string> label_set;
  for (const auto& item : treebank)
    if (item.tree)
      for (int w = 1; w <= item.tree->size(); ++w) label_set.insert(item.tree->relation(w));
  TrainResult result;
  result.model = ActionModel(
      TransitionSystem(std::vector<std::string>(label_set.begin(), label_set.end()),
                       config.root_label));
  ActionModel& model = result.model;
  const TransitionSystem& sys = model.system();

  std::vector<AnnotatedSentence> heldout(dev.begin(), dev.end());
  std::vector<const AnnotatedSentence*> train_items;
  long k = 0;
  const long stride = config.heldout_fraction > 0
                          ? std::max<long>(2, std::lround(1.0 / config.heldout_fraction))
                          : 0;
  const bool carve = dev.empty() && stride > 0 && treebank.size() >= 10;
  for (const auto& item : treebank) {
    if (!item.tree) continue;
    if (carve && (++k % stride) == 0)
      heldout.push_back(item);
    else
      train_items.push_back(&item);
  }

  // Interned features with occurrence counts; ids here are provisional.
  std::unordered_map<std::string, int> provisional;
  std::vector<std::string> prov_keys;
  std::vector<long> prov_counts;
  std::vector<int> feats;
  std::vector<Instance> instances;
  for (const auto* item : train_items) {
    const auto before_feats = feats.size();
    const auto before_inst = instances.size();
    try {
      if (!is_projective(*item->tree)) {
        ++result.skipped_nonprojective;
        continue;
      }
      for_each_oracle_step(sys, item->sentence, *item->tree,
                           [&](const ParserState& s, ActionId gold) {
                             Instance inst;
                             inst.feat_begin = static_cast<std::uint32_t>(feats.size());
                             for_each_feature(item->sentence, s, [&](std::string_view key) {
                               auto [it, added] = provisional.try_emplace(
                                   std::string(key), static_cast<int>(prov_keys.size()));
                               if (added) {
                                 prov_keys.emplace_back(key);
                                 prov_counts.push_back(0);
                               }
                               ++prov_counts[it->second];
                               feats.push_back(it->second);
                             });
                             inst.feat_end = static_cast<std::uint32_t>(feats.size());
                             inst.gold = gold;
                             inst.shape = shape_of(s);
                             instances.push_back(inst);
                           });
      ++result.sentences_used;
    } catch (const PreconditionError&) {
      feats.resize(before_feats);
      instances.resize(before_inst);
      ++result.skipped_underivable;
    }
  }
  if (instances.empty())
    throw PreconditionError("no projective, derivable training sentences");
  result.instances = static_cast<long>(instances.size());

  // Final feature ids in first-seen order; rare features dropped.
  std::vector<int> remap(prov_keys.size(), -1);
  for (std::size_t p = 0; p < prov_keys.size(); ++p)
    if (prov_counts[p] >= config.min_feature_count) remap[p] = model.intern(prov_keys[p]);
  {
    std::vector<int> kept;
    kept.reserve(feats.size());
    for (auto& inst : instances) {
      const auto begin = static_cast<std::uint32_t>(kept.size());
      for (auto i = inst.feat_begin; i < inst.feat_end; ++i)
        if (remap[feats[i]] >= 0) kept.push_back(remap[feats[i]]);
      inst.feat_begin = begin;
      inst.feat_end = static_cast<std::uint32_t>(kept.size());
    }
    feats = std::move(kept);
  }
  provisional.clear();

  std::vector<double> sq_grad(static_cast<std::size_t>(model.num_features()) * sys.num_actions(),
                              0.0);
  std::vector<std::size_t> order(instances.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::vector<ActionId> legal;
  std::vector<double> scores, probs;

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    CounterRng rng(mix64(config.seed ^ mix64(static_cast<std::uint64_t>(epoch))));
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
    double nll = 0;
    for (std::size_t idx : order) {
      const Instance& inst = instances[idx];
      expand(sys, inst.shape, legal);
      std::span<const int> fids(feats.data() + inst.feat_begin, inst.feat_end - inst.feat_begin);
      scores.resize(legal.size());
      probs.resize(legal.size());
      model.score(fids, legal, scores);
      softmax(scores, probs);
      for (std::size_t i = 0; i < legal.size(); ++i) {
        if (legal[i] != inst.gold) continue;
        nll -= std::log(std::max(probs[i], 1e-300));
      }
      if (legal.size() == 1) continue;  // zero gradient
      for (int f : fids) {
        auto row = model.row(f);
        double* acc = sq_grad.data() + static_cast<std::size_t>(f) * sys.num_actions();
        for (std::size_t i = 0; i < legal.size(); ++i) {
          const ActionId a = legal[i];
          const double g = probs[i] - (a == inst.gold ? 1.0 : 0.0) + config.l2 * row[a];
          if (g == 0.0) continue;
          acc[a] += g * g;
          row[a] -= config.learning_rate * g / (std::sqrt(acc[a]) + config.adagrad_epsilon);
        }
      }
    }
    EpochLog entry;
    entry.epoch = epoch;
    entry.train_nll = nll / static_cast<double>(instances.size());
    if (!heldout.empty()) {
      auto [correct, total] = oracle_accuracy(model, heldout);
      entry.heldout_instances = total;
      if (total > 0) entry.heldout_accuracy = static_cast<double>(correct) / total;
    }
    result.log.push_back(entry);
  }
  return result;
}

}  // namespace mcdep

#endif  // MCDEP_TRAIN_HPP_
