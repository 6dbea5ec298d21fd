#pragma once

#include <vector>

#include "lsc/autodiff.hpp"

namespace lsc {

// Blank is reserved at index 0 throughout; vocabulary tokens are 1..V.
constexpr int kBlank = 0;

// Shortest number of frames that can emit the target: every label needs a
// frame, plus a separating blank between equal neighbours.
std::size_t ctc_min_frames(const std::vector<int>& target);

// -log p(target | logits) by the log-space forward recursion over the
// blank-interleaved target. Fused tape op on logits (T, V+1); the gradient
// w.r.t. the logits is softmax(logits) - path occupancy.
Var ctc_loss(Graph& g, Var logits, const std::vector<int>& target);

// Value-level loss for callers without a tape.
double ctc_loss_value(const Tensor& log_probs_or_logits, const std::vector<int>& target,
                      bool inputs_are_logits = true);

// Per-frame argmax, collapse repeats, drop blanks.
std::vector<int> greedy_decode(const Tensor& posteriors);

// Incremental prefix scoring for joint beam search. The state carries, for
// every time step, the log probability that the collapsed output so far
// equals the prefix and the path currently ends in a blank / non-blank.
struct CtcPrefixState {
  std::vector<double> log_end_blank;     // length T
  std::vector<double> log_end_nonblank;  // length T
  int last_token = kBlank;
};

class CtcPrefixScorer {
 public:
  // log_posteriors: (T, V+1) log probabilities.
  explicit CtcPrefixScorer(Tensor log_posteriors);

  CtcPrefixState initial_state() const;

  // Log probability that the collapsed output begins with prefix+token,
  // together with the state for the extended prefix. The prefix itself is
  // implied by `state`; `token` must be in 1..V.
  std::pair<double, CtcPrefixState> extend(const CtcPrefixState& state, int token) const;

  // Log probability that the collapsed output is exactly the prefix.
  double terminal(const CtcPrefixState& state) const;

  std::size_t num_frames() const { return t_; }
  std::size_t vocab_size() const { return v_; }

 private:
  Tensor lp_;  // (T, V+1)
  std::size_t t_ = 0;
  std::size_t v_ = 0;  // tokens excluding blank
};

double logaddexp(double a, double b);

}  // namespace lsc
