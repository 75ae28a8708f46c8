#pragma once

// The trading MDP over a replayed day.
//
// Seven discrete actions (buy/sell at bid, mid, or ask; skip). Decisions
// happen on a fixed 0.1 s clock; between decisions the session replays
// historical flow and resting agent orders may fill. Actions that would
// immediately push inventory outside [pos_min, pos_max] are disallowed
// and trigger no order; when the fill of a resting order pushes it
// outside, one market order in the opposing direction restores the bound
// at the moment of the breach. Rewards combine the mark-to-market log
// return with a signal-alignment term:
//
//   r = w_dir * kappa * (d_up - d_down) * X  +  (1 - w_dir) * (ln M_t - ln M_{t-1})
//
// The oracle signal is precomputed from the pure historical mid path, so
// agent activity never leaks into it. Normalized features feed the
// policy network; accounting always runs on raw integer prices.

#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "lobsim/book.hpp"
#include "lobsim/core.hpp"
#include "lobsim/replay.hpp"
#include "lobsim/signal.hpp"

namespace lobsim {

enum class AgentAction : int {
  Skip = 0,
  BuyBid = 1,
  BuyMid = 2,
  BuyAsk = 3,
  SellBid = 4,
  SellMid = 5,
  SellAsk = 6,
};

inline constexpr int kActionCount = 7;
inline constexpr int kObsFeaturesPerSlot = 12;

constexpr bool action_is_order(AgentAction a) { return a != AgentAction::Skip; }

constexpr Side action_side(AgentAction a) {
  return static_cast<int>(a) <= 3 ? Side::Buy : Side::Sell;
}

constexpr PriceLevelRef action_level(AgentAction a) {
  switch (a) {
    case AgentAction::BuyBid:
    case AgentAction::SellBid:
      return PriceLevelRef::Bid;
    case AgentAction::BuyMid:
    case AgentAction::SellMid:
      return PriceLevelRef::Mid;
    default:
      return PriceLevelRef::Ask;
  }
}

struct EnvConfig {
  TimeNs episode_start = seconds_to_ns(34200);  // 09:30
  TimeNs episode_end = seconds_to_ns(37800);    // 10:30
  TimeNs decision_interval = kNsPerSec / 10;    // 0.1 s
  int history_len = 100;                        // l
  Qty pos_min = -10;
  Qty pos_max = 10;
  double kappa = 0.1;
  double w_dir = 0.5;     // initial directional weight; the trainer decays it
  double psi = 0.9999;    // per-learner-step decay factor
  std::int64_t cash0 = 100'000'000'000;  // $10M in 1e-4 dollars
  bool event_driven_history = false;

  void validate() const {
    if (!(pos_min < 0 && 0 < pos_max)) throw std::invalid_argument("need pos_min < 0 < pos_max");
    if (history_len < 1) throw std::invalid_argument("history_len must be >= 1");
    if (decision_interval <= 0) throw std::invalid_argument("decision interval must be > 0");
    if (episode_end <= episode_start) throw std::invalid_argument("empty episode span");
    if (!(w_dir >= 0.0 && w_dir < 1.0)) throw std::invalid_argument("w_dir not in [0,1)");
    if (!(psi > 0.0 && psi < 1.0)) throw std::invalid_argument("psi not in (0,1)");
    if (cash0 <= 0) throw std::invalid_argument("cash0 must be > 0");
    if (kappa <= 0.0) throw std::invalid_argument("kappa must be > 0");
  }

  std::size_t grid_points() const {
    return static_cast<std::size_t>((episode_end - episode_start) /
                                    decision_interval);
  }
};

struct PortfolioState {
  std::int64_t cash = 0;  // 1e-4 dollars
  Qty inventory = 0;
  double mid = 0.0;             // mid used for marking, price units
  double mark_to_market = 0.0;  // cash + inventory * mid
};

struct RewardTerms {
  double total = 0.0;
  double r_pnl = 0.0;
  double r_dir = 0.0;
};

// Eq-style reward decomposition; mark-to-market values must be positive.
inline RewardTerms compute_reward(const PortfolioState& prev,
                                  const PortfolioState& cur,
                                  const std::array<double, 3>& d, Qty inventory,
                                  double kappa, double w_dir) {
  if (!(prev.mark_to_market > 0.0) || !(cur.mark_to_market > 0.0))
    throw std::domain_error("mark-to-market must stay positive for log returns");
  RewardTerms out;
  out.r_pnl = std::log(cur.mark_to_market) - std::log(prev.mark_to_market);
  out.r_dir = kappa * (d[2] - d[0]) * static_cast<double>(inventory);
  out.total = w_dir * out.r_dir + (1.0 - w_dir) * out.r_pnl;
  return out;
}

inline double decay_dir_weight(double w_dir, double psi) { return psi * w_dir; }

struct Observation {
  std::vector<float> features;  // (l+1) x 12, oldest slot first

  // Raw view of the newest slot, for heuristic policies and accounting
  // checks; normalization never touches these.
  std::array<double, 3> d{1.0 / 3, 1.0 / 3, 1.0 / 3};
  Qty inventory = 0;
  std::int64_t cash = 0;
  std::optional<Price> best_bid;
  std::optional<Price> best_ask;
  Qty own_at_bid = 0;
  Qty own_at_ask = 0;
  TimeNs time = 0;
};

struct LiveOrder {
  Side side = Side::Buy;
  Price price = 0;
  Qty remaining = 0;
};

struct StepInfo {
  TimeNs time = 0;                 // decision time of the completed step
  AgentAction action = AgentAction::Skip;
  bool action_disallowed = false;  // inventory pre-check said no
  bool injection_refused = false;  // one-sided book, forced no-op
  std::optional<OrderId> injected_order;
  bool injected_rested = false;
  std::vector<Execution> fills;    // agent fills during the step
  int transient_breaches = 0;
  int forced_market_orders = 0;
  Qty forced_unfilled = 0;  // shares a forced order could not recover
  Qty traded_shares = 0;    // agent shares executed this step (all legs)
  RewardTerms reward;
  PortfolioState portfolio;  // after the step
};

struct StepResult {
  Observation obs;
  double reward = 0.0;
  bool done = false;
  StepInfo info;
};

struct EpisodeData {
  ReplaySession::Messages messages;
  std::shared_ptr<const SignalTrack> signal;
  SessionConfig session;
};

// Builds the per-episode signal track from the pure historical mid path.
inline EpisodeData make_episode(ReplaySession::Messages messages,
                                const EnvConfig& cfg, const SignalParams& sig,
                                SessionConfig session = {}) {
  cfg.validate();
  auto mids = historical_mid_path(*messages, cfg.episode_start, cfg.episode_end,
                                  cfg.decision_interval, session.tick);
  auto track = std::make_shared<SignalTrack>(
      build_signal_track(mids, cfg.decision_interval, sig, sig.seed));
  return {std::move(messages), std::move(track), session};
}

inline EpisodeData load_episode(const std::string& message_path,
                                const std::string& orderbook_path,
                                const EnvConfig& cfg, const SignalParams& sig,
                                SessionConfig session = {}) {
  auto session_obj = ReplaySession::load_day(message_path, orderbook_path, session);
  return make_episode(session_obj.shared_messages(), cfg, sig,
                      session_obj.config());
}

class TradingEnv {
 public:
  using StepLogger = std::function<void(const StepInfo&)>;

  TradingEnv(EpisodeData data, EnvConfig cfg)
      : cfg_(cfg), data_(std::move(data)), w_dir_(cfg.w_dir) {
    cfg_.validate();
    if (!data_.messages || !data_.signal)
      throw std::invalid_argument("episode data incomplete");
    if (data_.signal->size() != cfg_.grid_points() + 1)
      throw std::invalid_argument("signal track does not match episode grid");
    if (static_cast<std::size_t>(cfg_.history_len) + 1 > data_.signal->size())
      throw std::invalid_argument("episode too short for history prefill");
  }

  int observation_size() const {
    return (cfg_.history_len + 1) * kObsFeaturesPerSlot;
  }

  Observation reset() {
    session_.emplace(data_.messages, data_.session);
    live_.clear();
    history_.clear();
    cash_ = cfg_.cash0;
    inventory_ = 0;
    last_mid_ = std::numeric_limits<double>::quiet_NaN();
    open_mid_ = 0.0;
    open_mid_defined_ = false;
    w_dir_ = cfg_.w_dir;
    done_ = false;
    episode_traded_ = 0;
    episode_breaches_ = 0;
    episode_forced_ = 0;

    session_->advance_until(cfg_.episode_start);
    observe_mid();
    push_history_row(grid_time(0));
    for (int i = 1; i <= cfg_.history_len; ++i) {
      advance_replay(grid_time(i), nullptr);
      observe_mid();
      push_history_row(grid_time(i));
    }
    grid_index_ = cfg_.history_len;
    if (std::isnan(last_mid_))
      throw std::runtime_error("no two-sided book before first decision");
    portfolio_ = current_portfolio();
    return build_observation();
  }

  StepResult step(AgentAction action) {
    if (done_) throw std::logic_error("step() after episode end");
    StepResult out;
    StepInfo& info = out.info;
    info.time = grid_time(grid_index_);
    info.action = action;

    if (action_is_order(action)) {
      Side side = action_side(action);
      if (!inventory_allows(side)) {
        info.action_disallowed = true;
      } else {
        auto inj = session_->inject_agent_order(side, action_level(action), 1);
        if (!inj.accepted) {
          info.injection_refused = true;
        } else {
          info.injected_order = inj.id;
          info.injected_rested = inj.rested;
          for (const auto& f : inj.fills) apply_execution(f, info);
          if (inj.rested) live_[inj.id] = {side, inj.price, inj.remaining};
        }
      }
    }

    PortfolioState prev = portfolio_;
    advance_replay(grid_time(grid_index_ + 1), &info);
    ++grid_index_;
    observe_mid();
    portfolio_ = current_portfolio();

    const SignalState& sig = data_.signal->states[grid_index_];
    info.reward = compute_reward(prev, portfolio_, sig.d, inventory_, cfg_.kappa,
                                 w_dir_);
    info.portfolio = portfolio_;
    out.reward = info.reward.total;

    push_history_row(grid_time(grid_index_));
    done_ = grid_index_ >= cfg_.grid_points();
    out.done = done_;
    out.obs = build_observation();
    episode_traded_ += info.traded_shares;
    episode_breaches_ += info.transient_breaches;
    episode_forced_ += info.forced_market_orders;
    if (logger_) logger_(info);
    return out;
  }

  // Policy-layer order cancellation (not part of the 7-action space).
  CancelOutcome cancel_order(OrderId id) {
    auto outcome = session_->cancel_agent_order(id);
    if (outcome == CancelOutcome::Cancelled) live_.erase(id);
    return outcome;
  }

  bool done() const { return done_; }
  Qty inventory() const { return inventory_; }
  std::int64_t cash() const { return cash_; }
  const PortfolioState& portfolio() const { return portfolio_; }
  double dir_weight() const { return w_dir_; }
  void set_dir_weight(double w) { w_dir_ = w; }
  const EnvConfig& config() const { return cfg_; }
  const std::unordered_map<OrderId, LiveOrder>& live_orders() const { return live_; }
  ReplaySession& session() { return *session_; }
  const SignalTrack& signal() const { return *data_.signal; }
  std::size_t grid_index() const { return grid_index_; }
  Qty episode_turnover() const { return episode_traded_; }
  std::int64_t episode_breaches() const { return episode_breaches_; }
  std::int64_t episode_forced_orders() const { return episode_forced_; }
  void set_step_logger(StepLogger logger) { logger_ = std::move(logger); }

  // Signed tick offset normalization used for price features.
  double normalize_price(double price_units) const {
    return (price_units - open_mid_) /
           (static_cast<double>(data_.session.tick) * 100.0);
  }

 private:
  TimeNs grid_time(std::size_t i) const {
    return cfg_.episode_start + static_cast<TimeNs>(i) * cfg_.decision_interval;
  }

  bool inventory_allows(Side side) const {
    return side == Side::Buy ? inventory_ + 1 <= cfg_.pos_max
                             : inventory_ - 1 >= cfg_.pos_min;
  }

  void observe_mid() {
    if (auto m2 = session_->book().mid_twice()) {
      last_mid_ = static_cast<double>(*m2) / 2.0;
      if (!open_mid_defined_) {
        open_mid_ = last_mid_;
        open_mid_defined_ = true;
      }
    }
  }

  PortfolioState current_portfolio() const {
    PortfolioState p;
    p.cash = cash_;
    p.inventory = inventory_;
    p.mid = last_mid_;
    p.mark_to_market =
        static_cast<double>(cash_) + static_cast<double>(inventory_) * last_mid_;
    return p;
  }

  void apply_execution(const Execution& e, StepInfo& info) {
    if (e.maker_owner == Owner::Agent) {
      bool maker_buys = e.aggressor == Side::Sell;
      inventory_ += maker_buys ? e.size : -e.size;
      cash_ += maker_buys ? -e.price * e.size : e.price * e.size;
      info.traded_shares += e.size;
      auto it = live_.find(e.maker_id);
      if (it != live_.end()) {
        it->second.remaining -= e.size;
        if (it->second.remaining <= 0) live_.erase(it);
      }
    }
    if (e.taker_owner == Owner::Agent) {
      bool taker_buys = e.aggressor == Side::Buy;
      inventory_ += taker_buys ? e.size : -e.size;
      cash_ += taker_buys ? -e.price * e.size : e.price * e.size;
      info.traded_shares += e.size;
    }
    info.fills.push_back(e);
  }

  // One forced opposing market order per transient breach, at the moment
  // the breach happens. Self-trade prevention keeps the reduction from
  // netting against the agent's own resting orders.
  void enforce_bounds(StepInfo& info) {
    if (inventory_ > cfg_.pos_max) {
      ++info.transient_breaches;
      Qty overshoot = inventory_ - cfg_.pos_max;
      ++info.forced_market_orders;
      auto res = session_->submit_agent_market(Side::Sell, overshoot,
                                               SelfTradePolicy::CancelResting);
      for (const auto& o : res.stp_cancels) live_.erase(o.id);
      for (const auto& f : res.fills) apply_execution(f, info);
      if (inventory_ > cfg_.pos_max) info.forced_unfilled += inventory_ - cfg_.pos_max;
    } else if (inventory_ < cfg_.pos_min) {
      ++info.transient_breaches;
      Qty overshoot = cfg_.pos_min - inventory_;
      ++info.forced_market_orders;
      auto res = session_->submit_agent_market(Side::Buy, overshoot,
                                               SelfTradePolicy::CancelResting);
      for (const auto& o : res.stp_cancels) live_.erase(o.id);
      for (const auto& f : res.fills) apply_execution(f, info);
      if (inventory_ < cfg_.pos_min) info.forced_unfilled += cfg_.pos_min - inventory_;
    }
  }

  void advance_replay(TimeNs until, StepInfo* info) {
    auto handle_fill = [&](const Execution& e) {
      if (!info) return;  // prefill: no agent orders can exist
      apply_execution(e, *info);
      enforce_bounds(*info);
    };
    if (!cfg_.event_driven_history) {
      session_->advance_until(until, handle_fill);
      return;
    }
    // Event-driven history: record a row after every applied message.
    while (auto next = session_->next_message_time()) {
      if (*next > until) break;
      TimeNs t = *next;
      session_->advance_until(t, handle_fill);
      observe_mid();
      push_history_row(t);
    }
    session_->advance_until(until, handle_fill);
  }

  Qty own_volume(Side side, std::optional<Price> touch) const {
    if (!touch) return 0;
    Qty total = 0;
    for (const auto& [id, o] : live_)
      if (o.side == side && o.price == *touch) total += o.remaining;
    return total;
  }

  void push_history_row(TimeNs t) {
    auto snap = session_->book().snapshot(1);
    std::size_t sig_idx = 0;
    if (t > cfg_.episode_start)
      sig_idx = std::min<std::size_t>(
          static_cast<std::size_t>((t - cfg_.episode_start) / cfg_.decision_interval),
          data_.signal->size() - 1);
    const SignalState& sig = data_.signal->states[sig_idx];

    std::array<float, kObsFeaturesPerSlot> row{};
    double span = static_cast<double>(cfg_.episode_end - cfg_.episode_start);
    row[0] = static_cast<float>(static_cast<double>(cfg_.episode_end - t) / span);
    row[1] = static_cast<float>(static_cast<double>(cash_) /
                                static_cast<double>(cfg_.cash0));
    row[2] = static_cast<float>(static_cast<double>(inventory_) /
                                static_cast<double>(cfg_.pos_max));
    row[3] = static_cast<float>(sig.d[0]);
    row[4] = static_cast<float>(sig.d[1]);
    row[5] = static_cast<float>(sig.d[2]);

    auto norm_price = [&](std::optional<Price> p) -> float {
      if (!p || !open_mid_defined_) return 0.0f;
      return static_cast<float>(
          (static_cast<double>(*p) - open_mid_) /
          (static_cast<double>(data_.session.tick) * 100.0));
    };
    auto norm_vol = [](Qty v) {
      return static_cast<float>(std::log1p(static_cast<double>(v)));
    };
    row[6] = norm_price(snap.best_ask());
    row[7] = norm_vol(snap.asks.empty() ? 0 : snap.asks[0].size);
    row[8] = norm_vol(own_volume(Side::Sell, snap.best_ask()));
    row[9] = norm_price(snap.best_bid());
    row[10] = norm_vol(snap.bids.empty() ? 0 : snap.bids[0].size);
    row[11] = norm_vol(own_volume(Side::Buy, snap.best_bid()));

    history_.push_back(row);
    std::size_t cap = static_cast<std::size_t>(cfg_.history_len) + 1;
    if (history_.size() > cap)
      history_.erase(history_.begin(),
                     history_.begin() + (history_.size() - cap));
  }

  Observation build_observation() const {
    Observation obs;
    std::size_t cap = static_cast<std::size_t>(cfg_.history_len) + 1;
    obs.features.reserve(cap * kObsFeaturesPerSlot);
    // Left-pad with the oldest available row if the buffer is short.
    for (std::size_t i = history_.size(); i < cap; ++i)
      obs.features.insert(obs.features.end(), history_.front().begin(),
                          history_.front().end());
    for (const auto& row : history_)
      obs.features.insert(obs.features.end(), row.begin(), row.end());

    const auto& book = session_->book();
    obs.d = data_.signal->states[grid_index_].d;
    obs.inventory = inventory_;
    obs.cash = cash_;
    obs.best_bid = book.best_bid();
    obs.best_ask = book.best_ask();
    obs.own_at_ask = own_volume(Side::Sell, obs.best_ask);
    obs.own_at_bid = own_volume(Side::Buy, obs.best_bid);
    obs.time = grid_time(grid_index_);
    return obs;
  }

  EnvConfig cfg_;
  EpisodeData data_;
  std::optional<ReplaySession> session_;
  std::unordered_map<OrderId, LiveOrder> live_;
  std::vector<std::array<float, kObsFeaturesPerSlot>> history_;
  PortfolioState portfolio_;
  std::int64_t cash_ = 0;
  Qty inventory_ = 0;
  double last_mid_ = 0.0;
  double open_mid_ = 0.0;
  bool open_mid_defined_ = false;
  double w_dir_ = 0.5;
  std::size_t grid_index_ = 0;
  bool done_ = true;
  Qty episode_traded_ = 0;
  std::int64_t episode_breaches_ = 0;
  std::int64_t episode_forced_ = 0;
  StepLogger logger_;
};

}  // namespace lobsim
