#pragma once

// Heuristic benchmark policies over the 7-action trading space.
//
// The baseline trades aggressively (crossing the spread) whenever the
// signal's argmax class points up or down, within inventory bounds. On a
// neutral signal it works out of its position with a single passive order
// at the near touch until inventory is cleared. Buy-and-hold and a
// uniform-random policy complete the benchmark set.

#include <cmath>
#include <optional>
#include <stdexcept>
#include <vector>

#include "lobsim/core.hpp"
#include "lobsim/env.hpp"
#include "lobsim/replay.hpp"
#include "lobsim/rng.hpp"
#include "lobsim/signal.hpp"

namespace lobsim {

struct BaselineState {
  SignalClass last_class = SignalClass::Stable;
  std::optional<OrderId> reduction_order;
};

class BaselinePolicy {
 public:
  BaselinePolicy(Qty pos_min, Qty pos_max) : pos_min_(pos_min), pos_max_(pos_max) {}

  void reset() { state_ = BaselineState{}; pending_reduction_ = false; }

  AgentAction act(const Observation& obs, TradingEnv& env) {
    SignalState s;
    s.d = obs.d;
    SignalClass cls = predicted_class(s);
    state_.last_class = cls;
    pending_reduction_ = false;
    if (state_.reduction_order &&
        !env.live_orders().count(*state_.reduction_order))
      state_.reduction_order.reset();

    Qty x = obs.inventory;
    if (cls == SignalClass::Up) {
      cancel_reduction(env);
      return x < pos_max_ ? AgentAction::BuyAsk : AgentAction::Skip;
    }
    if (cls == SignalClass::Down) {
      cancel_reduction(env);
      return x > pos_min_ ? AgentAction::SellBid : AgentAction::Skip;
    }
    // Neutral: reduce passively at the near touch, one order at a time.
    if (x > 0) {
      if (state_.reduction_order) return AgentAction::Skip;
      pending_reduction_ = true;
      return AgentAction::SellAsk;
    }
    if (x < 0) {
      if (state_.reduction_order) return AgentAction::Skip;
      pending_reduction_ = true;
      return AgentAction::BuyBid;
    }
    cancel_reduction(env);
    return AgentAction::Skip;
  }

  // Call with the step outcome so the policy can track its resting order.
  void on_step(const StepInfo& info) {
    if (pending_reduction_ && info.injected_order && info.injected_rested)
      state_.reduction_order = info.injected_order;
    pending_reduction_ = false;
  }

  const BaselineState& state() const { return state_; }

 private:
  void cancel_reduction(TradingEnv& env) {
    if (!state_.reduction_order) return;
    env.cancel_order(*state_.reduction_order);  // NotFound is a benign race
    state_.reduction_order.reset();
  }

  Qty pos_min_;
  Qty pos_max_;
  BaselineState state_;
  bool pending_reduction_ = false;
};

class RandomPolicy {
 public:
  explicit RandomPolicy(std::uint64_t seed) : rng_(seed) {}

  AgentAction act() {
    return static_cast<AgentAction>(rng_.uniform_int(0, kActionCount - 1));
  }

 private:
  Rng rng_;
};

struct AccountCurvePoint {
  TimeNs time = 0;
  double log_return = 0.0;
};

struct BuyHoldResult {
  std::vector<AccountCurvePoint> curve;  // one point per decision step
  double log_return = 0.0;
  Qty shares = 0;
  Qty unfilled = 0;
};

// Buys pos_max shares with a market order at the first decision time,
// holds, and marks to mid on the decision grid.
inline BuyHoldResult buy_and_hold_curve(const EpisodeData& data,
                                        const EnvConfig& cfg) {
  cfg.validate();
  ReplaySession session(data.messages, data.session);
  TimeNs first_decision =
      cfg.episode_start + cfg.history_len * cfg.decision_interval;
  if (first_decision >= cfg.episode_end)
    throw std::invalid_argument("empty episode");
  session.advance_until(first_decision);
  if (!session.book().best_ask())
    throw std::runtime_error("one-sided opening book: no ask to buy from");

  auto res = session.submit_agent_market(Side::Buy, cfg.pos_max,
                                         SelfTradePolicy::Allow);
  BuyHoldResult out;
  std::int64_t cash = cfg.cash0;
  for (const auto& f : res.fills) {
    cash -= f.price * f.size;
    out.shares += f.size;
  }
  out.unfilled = res.remaining;
  if (out.shares == 0) throw std::runtime_error("buy-and-hold could not fill");

  double m0 = static_cast<double>(cfg.cash0);
  double last_mid = std::numeric_limits<double>::quiet_NaN();
  if (auto m2 = session.book().mid_twice())
    last_mid = static_cast<double>(*m2) / 2.0;
  for (TimeNs t = first_decision + cfg.decision_interval; t <= cfg.episode_end;
       t += cfg.decision_interval) {
    session.advance_until(t);
    if (auto m2 = session.book().mid_twice())
      last_mid = static_cast<double>(*m2) / 2.0;
    double value = static_cast<double>(cash) +
                   static_cast<double>(out.shares) * last_mid;
    out.curve.push_back({t, std::log(value) - std::log(m0)});
  }
  out.log_return = out.curve.empty() ? 0.0 : out.curve.back().log_return;
  return out;
}

}  // namespace lobsim
