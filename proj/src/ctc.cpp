#include "lsc/ctc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "lsc/common.hpp"

namespace lsc {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Row-wise log-softmax of (T, N) logits.
Tensor log_softmax_matrix(const Tensor& logits) {
  std::size_t t = logits.dim(0), n = logits.dim(1);
  Tensor out({t, n});
  for (std::size_t i = 0; i < t; ++i) {
    const double* r = logits.data() + i * n;
    double m = r[0];
    for (std::size_t j = 1; j < n; ++j) m = std::max(m, r[j]);
    double z = 0.0;
    for (std::size_t j = 0; j < n; ++j) z += std::exp(r[j] - m);
    double logz = m + std::log(z);
    for (std::size_t j = 0; j < n; ++j) out.at(i, j) = r[j] - logz;
  }
  return out;
}

struct ForwardBackward {
  double log_p;      // log p(target | inputs)
  Tensor occupancy;  // (T, V+1): log-space state-occupancy per symbol, minus log_p
};

// Log-space forward-backward over the blank-interleaved target
// z = [blank, y1, blank, ..., yL, blank] (Graves-style CTC).
ForwardBackward forward_backward(const Tensor& lp, const std::vector<int>& target) {
  std::size_t t_len = lp.dim(0);
  std::size_t n_sym = lp.dim(1);
  std::size_t s_len = 2 * target.size() + 1;

  auto z_at = [&](std::size_t s) -> int {
    return (s % 2 == 0) ? kBlank : target[s / 2];
  };
  auto can_skip = [&](std::size_t s) -> bool {
    // diagonal transition s-2 -> s allowed for non-blanks that differ from
    // the previous label
    return s % 2 == 1 && s >= 2 && z_at(s) != z_at(s - 2);
  };

  Tensor alpha({t_len, s_len});
  Tensor beta({t_len, s_len});
  alpha.fill(kNegInf);
  beta.fill(kNegInf);

  alpha.at(0, 0) = lp.at(0, z_at(0));
  if (s_len > 1) alpha.at(0, 1) = lp.at(0, z_at(1));
  for (std::size_t t = 1; t < t_len; ++t) {
    for (std::size_t s = 0; s < s_len; ++s) {
      double acc = alpha.at(t - 1, s);
      if (s >= 1) acc = logaddexp(acc, alpha.at(t - 1, s - 1));
      if (can_skip(s)) acc = logaddexp(acc, alpha.at(t - 1, s - 2));
      alpha.at(t, s) = acc + lp.at(t, z_at(s));
    }
  }

  beta.at(t_len - 1, s_len - 1) = lp.at(t_len - 1, z_at(s_len - 1));
  if (s_len > 1) beta.at(t_len - 1, s_len - 2) = lp.at(t_len - 1, z_at(s_len - 2));
  for (std::size_t t = t_len - 1; t-- > 0;) {
    for (std::size_t s = 0; s < s_len; ++s) {
      double acc = beta.at(t + 1, s);
      if (s + 1 < s_len) acc = logaddexp(acc, beta.at(t + 1, s + 1));
      if (s + 2 < s_len && can_skip(s + 2)) acc = logaddexp(acc, beta.at(t + 1, s + 2));
      beta.at(t, s) = acc + lp.at(t, z_at(s));
    }
  }

  double log_p = alpha.at(t_len - 1, s_len - 1);
  if (s_len > 1) log_p = logaddexp(log_p, alpha.at(t_len - 1, s_len - 2));

  ForwardBackward fb{log_p, Tensor({t_len, n_sym})};
  fb.occupancy.fill(kNegInf);
  for (std::size_t t = 0; t < t_len; ++t) {
    for (std::size_t s = 0; s < s_len; ++s) {
      // alpha and beta both include the emission at t; divide one out.
      double c = alpha.at(t, s) + beta.at(t, s) - lp.at(t, z_at(s));
      int sym = z_at(s);
      fb.occupancy.at(t, sym) = logaddexp(fb.occupancy.at(t, sym), c);
    }
    for (std::size_t j = 0; j < n_sym; ++j) fb.occupancy.at(t, j) -= log_p;
  }
  return fb;
}

void validate_target(const Tensor& logits, const std::vector<int>& target) {
  if (logits.rank() != 2 || logits.dim(0) == 0 || logits.dim(1) < 2) {
    throw DimensionError("ctc_loss expects (T, V+1) inputs with T >= 1");
  }
  if (target.empty()) throw DataError("ctc_loss: empty target");
  int n_sym = static_cast<int>(logits.dim(1));
  for (int y : target) {
    if (y <= kBlank || y >= n_sym) {
      throw DataError("ctc_loss: target token " + std::to_string(y) +
                      " outside vocabulary 1.." + std::to_string(n_sym - 1));
    }
  }
  std::size_t need = ctc_min_frames(target);
  if (logits.dim(0) < need) {
    throw InfeasibleTargetError(
        "ctc_loss: " + std::to_string(logits.dim(0)) + " frames cannot emit a target of " +
        std::to_string(target.size()) + " labels (needs " + std::to_string(need) + ")");
  }
}

}  // namespace

double logaddexp(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  double m = std::max(a, b);
  return m + std::log(std::exp(a - m) + std::exp(b - m));
}

std::size_t ctc_min_frames(const std::vector<int>& target) {
  std::size_t need = target.size();
  for (std::size_t i = 1; i < target.size(); ++i)
    if (target[i] == target[i - 1]) ++need;
  return need;
}

Var ctc_loss(Graph& g, Var logits, const std::vector<int>& target) {
  validate_target(logits.value(), target);
  Tensor lp = log_softmax_matrix(logits.value());
  ForwardBackward fb = forward_backward(lp, target);
  if (!std::isfinite(fb.log_p)) {
    throw NumericError("ctc_loss: non-finite path sum");
  }
  std::size_t t_len = lp.dim(0), n_sym = lp.dim(1);
  auto occupancy = std::make_shared<Tensor>(std::move(fb.occupancy));
  auto lp_shared = std::make_shared<Tensor>(std::move(lp));
  return g.make(Tensor::scalar(-fb.log_p), {logits},
                [t_len, n_sym, occupancy, lp_shared](Node& nd, std::vector<Node*>& ps) {
                  Tensor& gx = Graph::ensure_grad(*ps[0]);
                  double go = nd.grad[0];
                  for (std::size_t t = 0; t < t_len; ++t)
                    for (std::size_t j = 0; j < n_sym; ++j) {
                      double soft = std::exp(lp_shared->at(t, j));
                      double occ = std::exp(occupancy->at(t, j));
                      gx.at(t, j) += go * (soft - occ);
                    }
                });
}

double ctc_loss_value(const Tensor& inputs, const std::vector<int>& target,
                      bool inputs_are_logits) {
  validate_target(inputs, target);
  Tensor lp = inputs_are_logits ? log_softmax_matrix(inputs) : inputs;
  return -forward_backward(lp, target).log_p;
}

std::vector<int> greedy_decode(const Tensor& posteriors) {
  if (posteriors.rank() != 2) throw DimensionError("greedy_decode expects (T, V+1)");
  std::vector<int> out;
  int prev = kBlank;
  for (std::size_t t = 0; t < posteriors.dim(0); ++t) {
    const double* r = posteriors.data() + t * posteriors.dim(1);
    int best = 0;
    for (std::size_t j = 1; j < posteriors.dim(1); ++j)
      if (r[j] > r[best]) best = static_cast<int>(j);
    if (best != kBlank && best != prev) out.push_back(best);
    prev = best;
  }
  return out;
}

CtcPrefixScorer::CtcPrefixScorer(Tensor log_posteriors) : lp_(std::move(log_posteriors)) {
  if (lp_.rank() != 2 || lp_.dim(1) < 2) {
    throw DimensionError("CtcPrefixScorer expects (T, V+1) log posteriors");
  }
  t_ = lp_.dim(0);
  v_ = lp_.dim(1) - 1;
}

CtcPrefixState CtcPrefixScorer::initial_state() const {
  CtcPrefixState st;
  st.log_end_blank.resize(t_);
  st.log_end_nonblank.assign(t_, kNegInf);
  // The empty prefix survives step t only through blanks.
  double acc = 0.0;
  for (std::size_t t = 0; t < t_; ++t) {
    acc += lp_.at(t, kBlank);
    st.log_end_blank[t] = acc;
  }
  st.last_token = kBlank;
  return st;
}

std::pair<double, CtcPrefixState> CtcPrefixScorer::extend(const CtcPrefixState& state,
                                                          int token) const {
  if (token <= kBlank || token > static_cast<int>(v_)) {
    throw DataError("ctc prefix extension with out-of-vocabulary token " +
                    std::to_string(token));
  }
  CtcPrefixState next;
  next.log_end_blank.assign(t_, kNegInf);
  next.log_end_nonblank.assign(t_, kNegInf);
  next.last_token = token;

  // phi(t): mass of the base prefix at t-1 that may start the new token run.
  // Repeats of the previous label must cross a blank.
  double score = kNegInf;
  for (std::size_t t = 0; t < t_; ++t) {
    double phi = (t == 0) ? (state.last_token == kBlank ? 0.0 : kNegInf)
                          : state.log_end_blank[t - 1];
    if (t > 0 && token != state.last_token) {
      phi = logaddexp(phi, state.log_end_nonblank[t - 1]);
    }
    double emit = lp_.at(t, token);
    double stay = (t == 0) ? kNegInf : next.log_end_nonblank[t - 1];
    next.log_end_nonblank[t] = emit + logaddexp(phi, stay);
    double from_prev = (t == 0) ? kNegInf
                                : logaddexp(next.log_end_blank[t - 1],
                                            next.log_end_nonblank[t - 1]);
    next.log_end_blank[t] = lp_.at(t, kBlank) + from_prev;
    score = logaddexp(score, phi + emit);
  }
  return {score, next};
}

double CtcPrefixScorer::terminal(const CtcPrefixState& state) const {
  if (t_ == 0) return kNegInf;
  return logaddexp(state.log_end_blank[t_ - 1], state.log_end_nonblank[t_ - 1]);
}

}  // namespace lsc
