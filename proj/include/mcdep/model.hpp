#ifndef MCDEP_MODEL_HPP_
#define MCDEP_MODEL_HPP_

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <functional>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "mcdep/error.hpp"
#include "mcdep/features.hpp"
#include "mcdep/transition.hpp"

namespace mcdep {

inline constexpr int kModelFormatVersion = 1;

// Log-linear action model p(a | S) = exp(score(a)) / sum over legal a' of
// exp(score(a')), score(a) = sum of weight(f, a) over active features f.
// Weights live in one dense row per known feature; unknown features score 0.
class ActionModel {
 public:
  ActionModel() = default;
  explicit ActionModel(TransitionSystem system) : system_(std::move(system)) {}

  const TransitionSystem& system() const { return system_; }
  int num_actions() const { return system_.num_actions(); }
  int num_features() const { return static_cast<int>(keys_.size()); }
  const std::string& feature_key(int fid) const { return keys_[fid]; }
  const std::string& template_version() const { return template_version_; }
  void set_template_version(std::string v) { template_version_ = std::move(v); }

  std::optional<int> feature_id(std::string_view key) const {
    auto it = index_.find(key);
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  // Returns the id of `key`, adding a zero row if it is new.
  int intern(std::string_view key) {
    if (auto it = index_.find(key); it != index_.end()) return it->second;
    const int fid = num_features();
    keys_.emplace_back(key);
    index_.emplace(keys_.back(), fid);
    weights_.resize(weights_.size() + num_actions(), 0.0);
    return fid;
  }

  std::span<double> row(int fid) {
    return {weights_.data() + static_cast<std::size_t>(fid) * num_actions(),
            static_cast<std::size_t>(num_actions())};
  }
  std::span<const double> row(int fid) const {
    return {weights_.data() + static_cast<std::size_t>(fid) * num_actions(),
            static_cast<std::size_t>(num_actions())};
  }

  double weight(std::string_view key, ActionId a) const {
    auto fid = feature_id(key);
    return fid ? row(*fid)[a] : 0.0;
  }
  void set_weight(std::string_view key, ActionId a, double w) { row(intern(key))[a] = w; }

  // Known feature ids of a configuration; unseen features are skipped.
  void feature_ids(const Sentence& sentence, const ParserState& state,
                   std::vector<int>& out) const {
    out.clear();
    for_each_feature(sentence, state, [&](std::string_view k) {
      if (auto it = index_.find(k); it != index_.end()) out.push_back(it->second);
    });
  }

  void feature_ids(const FeatureVector& fv, std::vector<int>& out) const {
    out.clear();
    for (const auto& k : fv.keys)
      if (auto it = index_.find(std::string_view(k)); it != index_.end())
        out.push_back(it->second);
  }

  // scores[i] = score(legal[i]); summation in feature order.
  void score(std::span<const int> fids, std::span<const ActionId> legal,
             std::span<double> scores) const {
    std::fill(scores.begin(), scores.end(), 0.0);
    for (int f : fids) {
      const double* w = weights_.data() + static_cast<std::size_t>(f) * num_actions();
      for (std::size_t i = 0; i < legal.size(); ++i) scores[i] += w[legal[i]];
    }
  }

  // Removes features whose rows are entirely zero.
  void prune_zero_rows() {
    std::vector<std::string> keys;
    std::vector<double> weights;
    for (int f = 0; f < num_features(); ++f) {
      auto r = row(f);
      if (std::all_of(r.begin(), r.end(), [](double w) { return w == 0.0; })) continue;
      keys.push_back(keys_[f]);
      weights.insert(weights.end(), r.begin(), r.end());
    }
    keys_ = std::move(keys);
    weights_ = std::move(weights);
    rebuild_index();
  }

  bool operator==(const ActionModel& o) const {
    return system_.labels() == o.system_.labels() &&
           system_.root_label() == o.system_.root_label() && keys_ == o.keys_ &&
           weights_ == o.weights_ && template_version_ == o.template_version_;
  }

 private:
  struct KeyHash {
    using is_transparent = void;
    std::size_t operator()(std::string_view s) const { return std::hash<std::string_view>{}(s); }
  };

  void rebuild_index() {
    index_.clear();
    for (int f = 0; f < num_features(); ++f) index_.emplace(keys_[f], f);
  }

  TransitionSystem system_;
  std::string template_version_{kFeatureTemplateVersion};
  std::vector<std::string> keys_;
  std::unordered_map<std::string, int, KeyHash, std::equal_to<>> index_;
  std::vector<double> weights_;
};

// Numerically stable softmax: exponentiate score - max, normalize in order.
inline void softmax(std::span<const double> scores, std::span<double> probs) {
  if (scores.empty()) return;
  const double m = *std::max_element(scores.begin(), scores.end());
  double z = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    probs[i] = std::exp(scores[i] - m);
    z += probs[i];
  }
  for (std::size_t i = 0; i < scores.size(); ++i) probs[i] /= z;
}

// Probabilities aligned with `legal`.
inline std::vector<double> action_distribution(const ActionModel& model,
                                               const FeatureVector& features,
                                               std::span<const ActionId> legal) {
  if (legal.empty()) throw PreconditionError("action distribution over an empty set");
  std::vector<int> fids;
  model.feature_ids(features, fids);
  std::vector<double> scores(legal.size()), probs(legal.size());
  model.score(fids, legal, scores);
  softmax(scores, probs);
  return probs;
}

inline std::vector<std::pair<Action, double>> action_distribution(
    const ActionModel& model, const FeatureVector& features,
    const std::vector<Action>& legal) {
  std::vector<ActionId> ids;
  for (const auto& a : legal) ids.push_back(model.system().id(a));
  auto probs = action_distribution(model, features, std::span<const ActionId>(ids));
  std::vector<std::pair<Action, double>> out;
  for (std::size_t i = 0; i < legal.size(); ++i) out.emplace_back(legal[i], probs[i]);
  return out;
}

// ---------------------------------------------------------------------------
// Model file.
//
//   mcdep-action-model 1
//   template-version arcstd-30t-v1
//   root-label root
//   labels <L>
//   <label>                      (L lines, sorted)
//   actions <2L+1>
//   <id>\t<SHIFT|LEFT_ARC|RIGHT_ARC>\t<label or empty>
//   weights <W>
//   <feature key>\t<action id>\t<weight>    (sorted by key, then action id)
//   end
//
// Weights are written in shortest round-trip decimal form, so load(save(m))
// reproduces every weight bit for bit. Zero weights are omitted.

inline void save_model(const ActionModel& model, std::ostream& out) {
  const auto& sys = model.system();
  out << "mcdep-action-model " << kModelFormatVersion << '\n';
  out << "template-version " << model.template_version() << '\n';
  out << "root-label " << sys.root_label() << '\n';
  out << "labels " << sys.num_labels() << '\n';
  for (const auto& l : sys.labels()) out << l << '\n';
  out << "actions " << sys.num_actions() << '\n';
  for (ActionId a = 0; a < sys.num_actions(); ++a) {
    const auto act = sys.action(a);
    const char* kind = act.kind == ActionKind::kShift     ? "SHIFT"
                       : act.kind == ActionKind::kLeftArc ? "LEFT_ARC"
                                                          : "RIGHT_ARC";
    out << a << '\t' << kind << '\t' << act.relation << '\n';
  }
  std::vector<int> order(model.num_features());
  for (int f = 0; f < model.num_features(); ++f) order[f] = f;
  std::sort(order.begin(), order.end(),
            [&](int a, int b) { return model.feature_key(a) < model.feature_key(b); });
  std::size_t nonzero = 0;
  for (int f = 0; f < model.num_features(); ++f)
    for (double w : model.row(f)) nonzero += (w != 0.0);
  out << "weights " << nonzero << '\n';
  char buf[64];
  for (int f : order) {
    auto r = model.row(f);
    for (ActionId a = 0; a < model.num_actions(); ++a) {
      if (r[a] == 0.0) continue;
      auto [end, ec] = std::to_chars(buf, buf + sizeof buf, r[a]);
      out << model.feature_key(f) << '\t' << a << '\t' << std::string_view(buf, end - buf)
          << '\n';
    }
  }
  out << "end\n";
}

inline ActionModel load_model(std::istream& in) {
  std::string line;
  long line_no = 0;
  auto next_line = [&](const char* what) -> std::string& {
    if (!std::getline(in, line))
      throw ParseError(std::string("model file truncated: expected ") + what, line_no + 1);
    ++line_no;
    return line;
  };
  auto expect_field = [&](const std::string& l, std::string_view key) -> std::string {
    if (l.size() <= key.size() || l.compare(0, key.size(), key) != 0 || l[key.size()] != ' ')
      throw ParseError("expected '" + std::string(key) + " ...'", line_no);
    return l.substr(key.size() + 1);
  };
  auto to_count = [&](const std::string& s) {
    long v = -1;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size() || v < 0)
      throw ParseError("bad count '" + s + "'", line_no);
    return v;
  };

  const auto version = expect_field(next_line("header"), "mcdep-action-model");
  if (version != std::to_string(kModelFormatVersion))
    throw ValidationError("unsupported model format version " + version);
  const auto templates = expect_field(next_line("template version"), "template-version");
  if (templates != kFeatureTemplateVersion)
    throw ValidationError("model uses feature templates '" + templates +
                          "' but this build extracts '" +
                          std::string(kFeatureTemplateVersion) + "'");
  const auto root = expect_field(next_line("root label"), "root-label");
  const long n_labels = to_count(expect_field(next_line("label count"), "labels"));
  std::vector<std::string> labels;
  for (long i = 0; i < n_labels; ++i) labels.push_back(next_line("label"));
  ActionModel model(TransitionSystem(labels, root));
  if (model.system().labels() != labels)
    throw ValidationError("model label list is not sorted, unique, and rooted");

  const long n_actions = to_count(expect_field(next_line("action count"), "actions"));
  if (n_actions != model.num_actions())
    throw ValidationError("action count does not match label list");
  for (long a = 0; a < n_actions; ++a) {
    const auto& l = next_line("action");
    const auto act = model.system().action(static_cast<ActionId>(a));
    const char* kind = act.kind == ActionKind::kShift     ? "SHIFT"
                       : act.kind == ActionKind::kLeftArc ? "LEFT_ARC"
                                                          : "RIGHT_ARC";
    if (l != std::to_string(a) + '\t' + kind + '\t' + act.relation)
      throw ValidationError("action index line " + std::to_string(a) + " does not match");
  }

  const long n_weights = to_count(expect_field(next_line("weight count"), "weights"));
  for (long i = 0; i < n_weights; ++i) {
    const auto& l = next_line("weight");
    const auto t2 = l.rfind('\t');
    const auto t1 = t2 == std::string::npos || t2 == 0 ? std::string::npos : l.rfind('\t', t2 - 1);
    if (t1 == std::string::npos) throw ParseError("malformed weight line", line_no);
    int a = -1;
    double w = 0;
    auto r1 = std::from_chars(l.data() + t1 + 1, l.data() + t2, a);
    auto r2 = std::from_chars(l.data() + t2 + 1, l.data() + l.size(), w);
    if (r1.ec != std::errc() || r1.ptr != l.data() + t2 || r2.ec != std::errc() ||
        r2.ptr != l.data() + l.size() || a < 0 || a >= model.num_actions() ||
        !std::isfinite(w))
      throw ParseError("malformed weight line", line_no);
    model.set_weight(std::string_view(l).substr(0, t1), a, w);
  }
  if (next_line("end marker") != "end") throw ParseError("expected 'end'", line_no);
  return model;
}

}  // namespace mcdep

#endif  // MCDEP_MODEL_HPP_
