#ifndef MCDEP_ANALYSIS_HPP_
#define MCDEP_ANALYSIS_HPP_

// Evaluation: LAS, micro-averaged dependency-path precision/recall, adaptive
// calibration bins, and the entropy-vs-length report.
//
// Conventions: an empty prediction set has precision 1; an empty gold set
// has recall 1; F1 is 0 when precision and recall are both 0.

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mcdep/error.hpp"
#include "mcdep/inference.hpp"
#include "mcdep/marginals.hpp"
#include "mcdep/sentence.hpp"
#include "mcdep/stats.hpp"

namespace mcdep {

struct LasCounts {
  long correct = 0;
  long total = 0;
  double score() const { return total == 0 ? 1.0 : static_cast<double>(correct) / total; }
  LasCounts& operator+=(const LasCounts& o) {
    correct += o.correct;
    total += o.total;
    return *this;
  }
};

// All tokens count, punctuation included. `predicted` need not be a tree.
inline LasCounts las_counts(std::span<const Attachment> predicted, const ParseTree& gold) {
  if (static_cast<int>(predicted.size()) != gold.size())
    throw PreconditionError("LAS over sentences of different length");
  LasCounts c;
  for (int w = 1; w <= gold.size(); ++w) {
    const auto& a = predicted[w - 1];
    c.correct += (a.governor == gold.governor(w) && a.relation == gold.relation(w));
    ++c.total;
  }
  return c;
}

inline double las(std::span<const Attachment> predicted, const ParseTree& gold) {
  return las_counts(predicted, gold).score();
}

inline double las(const ParseTree& predicted, const ParseTree& gold) {
  return las(predicted.assignment(), gold);
}

// ---------------------------------------------------------------------------
// Precision / recall.

struct PRPoint {
  double threshold = 0;
  double precision = 1;
  double recall = 1;
  double f1 = 0;
  long predicted = 0;
  long gold = 0;
  long correct = 0;
};

inline PRPoint make_pr_point(double threshold, long predicted, long gold, long correct) {
  PRPoint p;
  p.threshold = threshold;
  p.predicted = predicted;
  p.gold = gold;
  p.correct = correct;
  p.precision = predicted == 0 ? 1.0 : static_cast<double>(correct) / predicted;
  p.recall = gold == 0 ? 1.0 : static_cast<double>(correct) / gold;
  p.f1 = (p.precision + p.recall) == 0 ? 0.0
                                       : 2 * p.precision * p.recall / (p.precision + p.recall);
  return p;
}

struct PRCurve {
  std::vector<PRPoint> points;  // one per requested threshold
  PRPoint best;                 // max F1 over every distinct predicted probability
};

// Scored predictions pooled over a corpus: (probability, correct).
// `total_gold` counts every gold item, including those never predicted.
inline PRCurve pr_curve(std::vector<std::pair<double, bool>> scored, long total_gold,
                        std::span<const double> thresholds) {
  std::sort(scored.begin(), scored.end(),
            [](const auto& a, const auto& b) { return a.first > b.first; });
  PRCurve out;
  for (double t : thresholds) {
    long predicted = 0, correct = 0;
    for (const auto& [p, ok] : scored) {
      if (p < t) break;
      ++predicted;
      correct += ok;
    }
    out.points.push_back(make_pr_point(t, predicted, total_gold, correct));
  }
  // Sweep thresholds down through the distinct probabilities.
  out.best = make_pr_point(1.0, 0, total_gold, 0);
  long predicted = 0, correct = 0;
  for (std::size_t i = 0; i < scored.size();) {
    const double t = scored[i].first;
    while (i < scored.size() && scored[i].first == t) {
      ++predicted;
      correct += scored[i].second;
      ++i;
    }
    if (t <= 0) break;
    auto p = make_pr_point(t, predicted, total_gold, correct);
    if (p.f1 > out.best.f1) out.best = p;
  }
  return out;
}

// Per-sentence path marginals against gold trees, micro-averaged.
inline PRCurve path_pr_curve(std::span<const std::map<DepPath, double>> marginals,
                             std::span<const ParseTree> gold, int d,
                             std::span<const double> thresholds) {
  if (marginals.size() != gold.size()) throw PreconditionError("unaligned corpora");
  std::vector<std::pair<double, bool>> scored;
  long total_gold = 0;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    const auto gold_paths = enumerate_paths(gold[i], d);
    total_gold += static_cast<long>(gold_paths.size());
    const std::set<DepPath> gold_set(gold_paths.begin(), gold_paths.end());
    for (const auto& [path, p] : marginals[i]) scored.emplace_back(p, gold_set.count(path) > 0);
  }
  return pr_curve(std::move(scored), total_gold, thresholds);
}

// Paths of one predicted tree per sentence against gold.
inline PRPoint greedy_path_pr(std::span<const ParseTree> predicted, std::span<const ParseTree> gold,
                              int d) {
  if (predicted.size() != gold.size()) throw PreconditionError("unaligned corpora");
  long n_pred = 0, n_gold = 0, n_correct = 0;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    const auto g = enumerate_paths(gold[i], d);
    const auto p = enumerate_paths(predicted[i], d);
    n_gold += static_cast<long>(g.size());
    n_pred += static_cast<long>(p.size());
    std::vector<DepPath> common;
    std::set_intersection(p.begin(), p.end(), g.begin(), g.end(), std::back_inserter(common));
    n_correct += static_cast<long>(common.size());
  }
  return make_pr_point(1.0, n_pred, n_gold, n_correct);
}

// ---------------------------------------------------------------------------
// Calibration.

// One item per distinct (sentence, path) with nonzero predicted probability.
// Gold paths never sampled have no item.
inline std::vector<std::pair<double, bool>> calibration_items(
    std::span<const std::map<DepPath, double>> marginals, std::span<const ParseTree> gold, int d) {
  if (marginals.size() != gold.size()) throw PreconditionError("unaligned corpora");
  std::vector<std::pair<double, bool>> out;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    const auto g = enumerate_paths(gold[i], d);
    const std::set<DepPath> gold_set(g.begin(), g.end());
    for (const auto& [path, p] : marginals[i])
      if (p > 0) out.emplace_back(p, gold_set.count(path) > 0);
  }
  return out;
}

struct CalibrationBin {
  long count = 0;
  double mean_predicted = 0;
  double empirical = 0;  // fraction of items in gold
  double lo = 0, hi = 0;
};

struct CalibrationTable {
  std::vector<CalibrationBin> bins;
  double mean_abs_gap = 0;  // |mean_predicted - empirical| weighted by bin count
  bool single_bin_warning = false;  // fewer items than B
};

// Adaptive bins of at least B items over the ascending predictions. Equal
// probabilities never straddle a boundary; a short final bin joins its
// predecessor.
inline CalibrationTable calibration_table(std::vector<std::pair<double, bool>> items, long B) {
  if (B < 1) throw PreconditionError("bin size must be at least 1");
  if (items.empty()) throw PreconditionError("calibration over no predictions");
  std::sort(items.begin(), items.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  CalibrationTable out;
  out.single_bin_warning = static_cast<long>(items.size()) < B;
  std::vector<std::pair<std::size_t, std::size_t>> ranges;
  const std::size_t n = items.size();
  for (std::size_t i = 0; i < n;) {
    std::size_t j = std::min(n, i + static_cast<std::size_t>(B));
    while (j < n && items[j].first == items[j - 1].first) ++j;
    ranges.emplace_back(i, j);
    i = j;
  }
  if (ranges.size() > 1 && static_cast<long>(ranges.back().second - ranges.back().first) < B) {
    ranges[ranges.size() - 2].second = ranges.back().second;
    ranges.pop_back();
  }
  for (auto [i, j] : ranges) {
    CalibrationBin b;
    b.count = static_cast<long>(j - i);
    double sum = 0;
    long pos = 0;
    for (std::size_t k = i; k < j; ++k) {
      sum += items[k].first;
      pos += items[k].second;
    }
    b.mean_predicted = sum / b.count;
    b.empirical = static_cast<double>(pos) / b.count;
    b.lo = items[i].first;
    b.hi = items[j - 1].first;
    out.mean_abs_gap += b.count * std::abs(b.mean_predicted - b.empirical);
    out.bins.push_back(b);
  }
  out.mean_abs_gap /= static_cast<double>(n);
  return out;
}

// ---------------------------------------------------------------------------
// Entropy against sentence length.

struct EntropyRow {
  std::string sent_id;
  int n_tokens = 0;
  std::size_t domain_size = 0;
  double entropy = 0;
};

struct EntropyReport {
  std::vector<EntropyRow> rows;
  std::optional<double> pearson;
  std::optional<double> spearman;
};

inline EntropyReport entropy_report(std::span<const SampleSet> samples) {
  EntropyReport out;
  std::vector<double> len, ent;
  for (const auto& s : samples) {
    EntropyRow r{s.sent_id(), s.n_tokens(), s.num_unique(), tree_entropy(s)};
    len.push_back(r.n_tokens);
    ent.push_back(r.entropy);
    out.rows.push_back(std::move(r));
  }
  out.pearson = pearson(len, ent);
  out.spearman = spearman(len, ent);
  return out;
}

}  // namespace mcdep

#endif  // MCDEP_ANALYSIS_HPP_
