#ifndef MCDEP_MARGINALS_HPP_
#define MCDEP_MARGINALS_HPP_

// Monte Carlo marginals of boolean structure queries: the fraction of
// sampled trees where the query holds. Everything is computed once per unique
// tree and weighted by its count. Sums stay integral until the final division
// by S, so two routes to the same marginal agree exactly.
//
// The ExactDistribution overloads give the same quantities under the exact
// p(y | x) from enumerate_exact; tests use them as the oracle.

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "mcdep/error.hpp"
#include "mcdep/inference.hpp"
#include "mcdep/query.hpp"
#include "mcdep/sentence.hpp"

namespace mcdep {

namespace marginals_detail {

inline void require_samples(const SampleSet& s) {
  if (s.empty()) throw PreconditionError("marginal over an empty sample set");
}

}  // namespace marginals_detail

inline double query_marginal(const StructureQuery& query, const SampleSet& samples,
                             const Sentence& sentence, const std::optional<Span>& mention = {}) {
  marginals_detail::require_samples(samples);
  long hits = 0;
  for (const auto& [key, e] : samples.entries())
    if (eval_query(query, e.tree, sentence, mention)) hits += e.count;
  return static_cast<double>(hits) / static_cast<double>(samples.num_samples());
}

inline double rule_marginal(const Rule& rule, const SampleSet& samples, const Sentence& sentence,
                            const std::optional<Span>& mention = {}) {
  marginals_detail::require_samples(samples);
  long hits = 0;
  for (const auto& [key, e] : samples.entries())
    if (eval_rule(rule, e.tree, sentence, mention)) hits += e.count;
  return static_cast<double>(hits) / static_cast<double>(samples.num_samples());
}

inline double query_marginal(const StructureQuery& query, const ExactDistribution& dist,
                             const Sentence& sentence, const std::optional<Span>& mention = {}) {
  double p = 0;
  for (const auto& [key, e] : dist)
    if (eval_query(query, e.tree, sentence, mention)) p += e.probability;
  return p;
}

// P(edge in y) for every edge seen in any sampled tree.
inline std::map<Edge, double> edge_marginals(const SampleSet& samples) {
  marginals_detail::require_samples(samples);
  std::map<Edge, long> counts;
  for (const auto& [key, e] : samples.entries())
    for (int w = 1; w <= e.tree.size(); ++w) counts[e.tree.edge(w)] += e.count;
  std::map<Edge, double> out;
  for (const auto& [edge, c] : counts)
    out.emplace(edge, static_cast<double>(c) / static_cast<double>(samples.num_samples()));
  return out;
}

inline std::map<Edge, double> edge_marginals(const ExactDistribution& dist) {
  std::map<Edge, double> out;
  for (const auto& [key, e] : dist)
    for (int w = 1; w <= e.tree.size(); ++w) out[e.tree.edge(w)] += e.probability;
  return out;
}

// ---------------------------------------------------------------------------
// Dependency paths.

// A simple path of the undirected tree, stored as its sorted edge set. The
// endpoints are ordered (first < second); ROOT is vertex 0.
struct DepPath {
  std::vector<Edge> edges;
  std::pair<int, int> endpoints{0, 0};

  std::size_t length() const { return edges.size(); }
  bool operator==(const DepPath& o) const { return edges == o.edges; }
  // The edge set determines the path; endpoints follow from it.
  bool operator<(const DepPath& o) const { return edges < o.edges; }

  std::string key() const {
    std::string out;
    for (const auto& e : edges) {
      if (!out.empty()) out += ';';
      append_edge_key(out, e);
    }
    return out;
  }
};

// Every simple path of exactly d edges, each reported once.
inline std::vector<DepPath> enumerate_paths(const ParseTree& tree, int d) {
  if (d < 1) throw PreconditionError("path length must be at least 1");
  const int n = tree.size();
  // adj[v] = child indices of the edges touching v (each edge named by its child)
  std::vector<std::vector<int>> adj(n + 1);
  for (int w = 1; w <= n; ++w) {
    adj[w].push_back(w);
    adj[tree.governor(w)].push_back(w);
  }
  std::vector<DepPath> out;
  std::vector<char> on_path(n + 1, 0);
  std::vector<int> edge_stack;
  auto dfs = [&](auto&& self, int start, int v) -> void {
    if (static_cast<int>(edge_stack.size()) == d) {
      if (v > start) {
        DepPath p;
        for (int c : edge_stack) p.edges.push_back(tree.edge(c));
        std::sort(p.edges.begin(), p.edges.end());
        p.endpoints = {start, v};
        out.push_back(std::move(p));
      }
      return;
    }
    for (int c : adj[v]) {
      const int u = (c == v) ? tree.governor(c) : c;
      if (on_path[u]) continue;
      on_path[u] = 1;
      edge_stack.push_back(c);
      self(self, start, u);
      edge_stack.pop_back();
      on_path[u] = 0;
    }
  };
  for (int s = 0; s <= n; ++s) {
    on_path[s] = 1;
    dfs(dfs, s, s);
    on_path[s] = 0;
  }
  std::sort(out.begin(), out.end());
  return out;
}

// P(path in y) for every length-d path of any sampled tree.
inline std::map<DepPath, double> path_marginals(const SampleSet& samples, int d) {
  marginals_detail::require_samples(samples);
  std::map<DepPath, long> counts;
  for (const auto& [key, e] : samples.entries())
    for (auto& p : enumerate_paths(e.tree, d)) counts[std::move(p)] += e.count;
  std::map<DepPath, double> out;
  for (auto& [p, c] : counts)
    out.emplace(p, static_cast<double>(c) / static_cast<double>(samples.num_samples()));
  return out;
}

inline std::map<DepPath, double> path_marginals(const ExactDistribution& dist, int d) {
  std::map<DepPath, double> out;
  for (const auto& [key, e] : dist)
    for (auto& p : enumerate_paths(e.tree, d)) out[std::move(p)] += e.probability;
  return out;
}

// Paths whose marginal is at least t.
inline std::vector<DepPath> predict_paths(const std::map<DepPath, double>& marginals, double t) {
  if (!(t > 0 && t <= 1)) throw PreconditionError("threshold must be in (0, 1]");
  std::vector<DepPath> out;
  for (const auto& [p, prob] : marginals)
    if (prob >= t) out.push_back(p);
  return out;
}

inline std::vector<DepPath> predict_paths(const SampleSet& samples, int d, double t) {
  return predict_paths(path_marginals(samples, d), t);
}

// ---------------------------------------------------------------------------
// Whole-tree uncertainty.

// Shannon entropy (nats) of the sampled tree distribution.
inline double tree_entropy(const SampleSet& samples) {
  marginals_detail::require_samples(samples);
  const double s = static_cast<double>(samples.num_samples());
  double h = 0;
  for (const auto& [key, e] : samples.entries()) {
    const double p = static_cast<double>(e.count) / s;
    h -= p * std::log(p);
  }
  return h + 0.0;  // no -0 for a point mass
}

struct SampleSummary {
  std::size_t domain_size = 0;
  std::vector<long> top_counts;  // descending
  double entropy = 0;
  double top_prob = 0;
};

inline SampleSummary sample_summary(const SampleSet& samples, std::size_t k = 3) {
  marginals_detail::require_samples(samples);
  SampleSummary out;
  out.domain_size = samples.num_unique();
  std::vector<long> counts;
  for (const auto& [key, e] : samples.entries()) counts.push_back(e.count);
  std::sort(counts.begin(), counts.end(), std::greater<>());
  out.top_prob = static_cast<double>(counts.front()) / static_cast<double>(samples.num_samples());
  counts.resize(std::min(k, counts.size()));
  out.top_counts = std::move(counts);
  out.entropy = tree_entropy(samples);
  return out;
}

}  // namespace mcdep

#endif  // MCDEP_MARGINALS_HPP_
