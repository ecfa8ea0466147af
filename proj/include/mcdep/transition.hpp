#ifndef MCDEP_TRANSITION_HPP_
#define MCDEP_TRANSITION_HPP_

// Arc-standard transition system. Every complete derivation over N tokens
// has exactly 2N actions: one SHIFT and one arc per token. ROOT may only be
// attached by the final action, with the designated root label.

#include <algorithm>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "mcdep/error.hpp"
#include "mcdep/sentence.hpp"

namespace mcdep {

enum class ActionKind : std::uint8_t { kShift, kLeftArc, kRightArc };

struct Action {
  ActionKind kind = ActionKind::kShift;
  std::string relation;  // empty for SHIFT

  static Action shift() { return {}; }
  static Action left(std::string r) { return {ActionKind::kLeftArc, std::move(r)}; }
  static Action right(std::string r) { return {ActionKind::kRightArc, std::move(r)}; }

  bool operator==(const Action&) const = default;
};

inline std::string to_string(const Action& a) {
  switch (a.kind) {
    case ActionKind::kShift:
      return "SHIFT";
    case ActionKind::kLeftArc:
      return "LEFT_ARC(" + a.relation + ")";
    case ActionKind::kRightArc:
      return "RIGHT_ARC(" + a.relation + ")";
  }
  return "?";
}

// Dense action id: 0 = SHIFT, 1..L = LEFT_ARC(label i), L+1..2L = RIGHT_ARC.
using ActionId = int;

// Parser configuration. The buffer is always a suffix [next, N] of the
// sentence, so it is stored as its front position.
class ParserState {
 public:
  explicit ParserState(int n_tokens)
      : n_(n_tokens),
        next_(1),
        head_(n_tokens + 1, -1),
        rel_(n_tokens + 1),
        leftmost_(n_tokens + 1, 0),
        rightmost_(n_tokens + 1, 0),
        n_children_(n_tokens + 1, 0) {
    if (n_tokens < 1) throw PreconditionError("parser state needs at least one token");
    stack_.reserve(n_tokens + 1);
    stack_.push_back(kRootVertex);
  }

  int n_tokens() const { return n_; }
  int step() const { return step_; }
  const std::vector<int>& stack() const { return stack_; }
  int stack_size() const { return static_cast<int>(stack_.size()); }
  // i-th element from the top (0 = top), or -1 when the stack is shorter.
  int stack_from_top(int i) const {
    return i < stack_size() ? stack_[stack_.size() - 1 - i] : -1;
  }
  int buffer_size() const { return n_ - next_ + 1; }
  bool buffer_empty() const { return next_ > n_; }
  // i-th buffer element (0 = front), or -1 past the end.
  int buffer_at(int i) const { return next_ + i <= n_ ? next_ + i : -1; }
  std::vector<int> buffer() const {
    std::vector<int> out;
    for (int w = next_; w <= n_; ++w) out.push_back(w);
    return out;
  }

  bool is_terminal() const { return buffer_empty() && stack_.size() == 1; }

  int governor(int child) const { return head_.at(child); }
  const std::string& relation(int child) const { return rel_.at(child); }
  // Leftmost / rightmost attached child of `v`, 0 when none.
  int leftmost_child(int v) const { return leftmost_.at(v); }
  int rightmost_child(int v) const { return rightmost_.at(v); }
  int num_children(int v) const { return n_children_.at(v); }

  std::vector<Edge> arcs() const {
    std::vector<Edge> out;
    for (int w = 1; w <= n_; ++w)
      if (head_[w] >= 0) out.push_back(Edge{rel_[w], head_[w], w});
    return out;
  }

  ParseTree to_tree() const {
    if (!is_terminal()) throw PreconditionError("state is not terminal");
    return ParseTree(n_, arcs());
  }

  // Unchecked updates; TransitionSystem validates legality first.
  void do_shift() {
    stack_.push_back(next_++);
    ++step_;
  }
  void do_left(const std::string& relation) {
    const int top = stack_.back();
    const int second = stack_[stack_.size() - 2];
    attach(top, second, relation);
    stack_.erase(stack_.end() - 2);
    ++step_;
  }
  void do_right(const std::string& relation) {
    const int top = stack_.back();
    const int second = stack_[stack_.size() - 2];
    attach(second, top, relation);
    stack_.pop_back();
    ++step_;
  }

  bool operator==(const ParserState&) const = default;

 private:
  void attach(int gov, int child, const std::string& relation) {
    head_[child] = gov;
    rel_[child] = relation;
    ++n_children_[gov];
    if (leftmost_[gov] == 0 || child < leftmost_[gov]) leftmost_[gov] = child;
    if (rightmost_[gov] == 0 || child > rightmost_[gov]) rightmost_[gov] = child;
  }

  int n_;
  int next_;
  int step_ = 0;
  std::vector<int> stack_;
  std::vector<int> head_;
  std::vector<std::string> rel_;
  std::vector<int> leftmost_;
  std::vector<int> rightmost_;
  std::vector<int> n_children_;
};

inline ParserState initial_state(const Sentence& sentence) {
  if (sentence.tokens.empty())
    throw PreconditionError("cannot parse an empty sentence");
  return ParserState(sentence.size());
}

// The closed label set and the action <-> id bijection built on it.
class TransitionSystem {
 public:
  TransitionSystem() : TransitionSystem(std::vector<std::string>{}) {}

  explicit TransitionSystem(std::vector<std::string> labels, std::string root_label = "root")
      : labels_(std::move(labels)), root_label_(std::move(root_label)) {
    labels_.push_back(root_label_);
    std::sort(labels_.begin(), labels_.end());
    labels_.erase(std::unique(labels_.begin(), labels_.end()), labels_.end());
    root_index_ = *label_index(root_label_);
  }

  const std::vector<std::string>& labels() const { return labels_; }
  const std::string& root_label() const { return root_label_; }
  int num_labels() const { return static_cast<int>(labels_.size()); }
  int num_actions() const { return 1 + 2 * num_labels(); }

  std::optional<int> label_index(const std::string& label) const {
    auto it = std::lower_bound(labels_.begin(), labels_.end(), label);
    if (it == labels_.end() || *it != label) return std::nullopt;
    return static_cast<int>(it - labels_.begin());
  }

  static constexpr ActionId shift_id() { return 0; }
  ActionId left_id(int label) const { return 1 + label; }
  ActionId right_id(int label) const { return 1 + num_labels() + label; }
  ActionId root_attach_id() const { return right_id(root_index_); }

  ActionKind kind(ActionId id) const {
    if (id == 0) return ActionKind::kShift;
    return id <= num_labels() ? ActionKind::kLeftArc : ActionKind::kRightArc;
  }
  const std::string& relation(ActionId id) const {
    static const std::string none;
    if (id == 0) return none;
    return labels_[(id - 1) % num_labels()];
  }

  Action action(ActionId id) const {
    if (id < 0 || id >= num_actions())
      throw PreconditionError("action id " + std::to_string(id) + " out of range");
    return Action{kind(id), relation(id)};
  }

  ActionId id(const Action& a) const {
    if (a.kind == ActionKind::kShift) return shift_id();
    auto li = label_index(a.relation);
    if (!li) throw PreconditionError("unknown relation '" + a.relation + "'");
    return a.kind == ActionKind::kLeftArc ? left_id(*li) : right_id(*li);
  }

  // Legal action ids in ascending order; empty only for terminal states.
  void legal(const ParserState& s, std::vector<ActionId>& out) const {
    out.clear();
    if (!s.buffer_empty()) out.push_back(shift_id());
    if (s.stack_size() < 2) return;
    const int second = s.stack_from_top(1);
    if (second != kRootVertex) {
      for (ActionId a = 1; a < num_actions(); ++a) out.push_back(a);
    } else if (s.buffer_empty() && s.stack_size() == 2) {
      out.push_back(root_attach_id());
    }
  }

  std::vector<ActionId> legal(const ParserState& s) const {
    std::vector<ActionId> out;
    legal(s, out);
    return out;
  }

  // Throws PreconditionError for terminal states, which have no actions.
  std::vector<Action> legal_actions(const ParserState& s) const {
    if (s.is_terminal()) throw PreconditionError("terminal state has no legal actions");
    std::vector<Action> out;
    for (ActionId a : legal(s)) out.push_back(action(a));
    return out;
  }

  bool is_legal(const ParserState& s, ActionId a) const {
    if (a < 0 || a >= num_actions()) return false;
    if (a == shift_id()) return !s.buffer_empty();
    if (s.stack_size() < 2) return false;
    if (s.stack_from_top(1) != kRootVertex) return true;
    return a == root_attach_id() && s.buffer_empty() && s.stack_size() == 2;
  }

  // In-place update; throws PreconditionError on an illegal action.
  void advance(ParserState& s, ActionId a) const {
    if (!is_legal(s, a))
      throw PreconditionError("illegal action " + to_string(action_or_shift(a)));
    switch (kind(a)) {
      case ActionKind::kShift:
        s.do_shift();
        break;
      case ActionKind::kLeftArc:
        s.do_left(relation(a));
        break;
      case ActionKind::kRightArc:
        s.do_right(relation(a));
        break;
    }
  }

  ParserState apply(const ParserState& s, ActionId a) const {
    ParserState next = s;
    advance(next, a);
    return next;
  }
  ParserState apply(const ParserState& s, const Action& a) const { return apply(s, id(a)); }

 private:
  Action action_or_shift(ActionId a) const {
    return (a >= 0 && a < num_actions()) ? action(a) : Action{};
  }

  std::vector<std::string> labels_;
  std::string root_label_;
  int root_index_ = 0;
};

inline bool is_terminal(const ParserState& s) { return s.is_terminal(); }

// Static arc-standard oracle. Calls fn(state, gold_action) for each of the 2N
// steps, state being the configuration before the action.
template <class Fn>
void for_each_oracle_step(const TransitionSystem& system, const Sentence& sentence,
                          const ParseTree& gold, Fn&& fn) {
  if (gold.size() != sentence.size())
    throw PreconditionError("gold tree size does not match sentence '" +
                            sentence.sent_id + "'");
  if (!is_projective(gold))
    throw PreconditionError("gold tree of '" + sentence.sent_id + "' is not projective");
  const int n = gold.size();
  std::vector<int> gold_children(n + 1, 0);
  for (int w = 1; w <= n; ++w) ++gold_children[gold.governor(w)];

  auto label_of = [&](int child) {
    auto li = system.label_index(gold.relation(child));
    if (!li)
      throw PreconditionError("relation '" + gold.relation(child) + "' in '" +
                              sentence.sent_id + "' is not in the label set");
    return *li;
  };

  ParserState state = initial_state(sentence);
  while (!state.is_terminal()) {
    ActionId a = -1;
    if (state.stack_size() >= 2) {
      const int top = state.stack_from_top(0);
      const int second = state.stack_from_top(1);
      if (second != kRootVertex && gold.governor(second) == top) {
        a = system.left_id(label_of(second));
      } else if (gold.governor(top) == second &&
                 state.num_children(top) == gold_children[top]) {
        a = system.right_id(label_of(top));
      }
    }
    if (a < 0) a = TransitionSystem::shift_id();
    if (!system.is_legal(state, a)) {
      if (a == system.right_id(label_of(state.stack_from_top(0))) &&
          state.stack_from_top(1) == kRootVertex &&
          gold.relation(state.stack_from_top(0)) != system.root_label())
        throw PreconditionError("ROOT edge of '" + sentence.sent_id + "' is labeled '" +
                                gold.relation(state.stack_from_top(0)) + "', not '" +
                                system.root_label() + "'");
      throw PreconditionError("gold tree of '" + sentence.sent_id +
                              "' is not derivable by arc-standard");
    }
    fn(static_cast<const ParserState&>(state), a);
    system.advance(state, a);
  }
}

struct OracleStep {
  ParserState state;
  Action action;
};

inline std::vector<OracleStep> oracle_actions(const TransitionSystem& system,
                                              const Sentence& sentence,
                                              const ParseTree& gold) {
  std::vector<OracleStep> out;
  for_each_oracle_step(system, sentence, gold, [&](const ParserState& s, ActionId a) {
    out.push_back(OracleStep{s, system.action(a)});
  });
  return out;
}

}  // namespace mcdep

#endif  // MCDEP_TRANSITION_HPP_
