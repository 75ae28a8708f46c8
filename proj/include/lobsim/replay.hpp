#pragma once

// Market replay: drives an OrderBook from LOBSTER message streams and
// interleaves agent orders with the historical flow.
//
// Recorded visible executions (type 4) are re-enacted as marketable IOC
// orders at the recorded price and size instead of direct order-id hits,
// so resting agent orders with price or queue priority fill first.
// Historical adds also pass through the matching engine and can therefore
// trade against agent orders resting inside the historical spread.
// References to liquidity the agent already consumed are clipped to the
// remaining size; each clip increments a reconciliation anomaly counter.
// With no agent orders the replay is an exact reconstruction.

#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "lobsim/book.hpp"
#include "lobsim/core.hpp"
#include "lobsim/lobster.hpp"

namespace lobsim {

struct ReplayStats {
  std::uint64_t messages_applied = 0;
  std::uint64_t anomalies = 0;  // clipped cancels/deletes, execution shortfalls
  std::uint64_t hidden_executions = 0;
  std::uint64_t crosses = 0;
  std::uint64_t halts = 0;
};

// Applies one historical message to the book. Returns the executions it
// produced (types 1 and 4 can produce fills, possibly against agent
// orders); updates reconciliation stats.
inline std::vector<Execution> apply_historical(OrderBook& book,
                                               const MarketMessage& m,
                                               ReplayStats& stats) {
  ++stats.messages_applied;
  switch (m.type) {
    case MsgType::Add: {
      auto res = book.submit_limit(
          {m.order_id, m.side(), m.price, m.size, 0, Owner::Historical}, m.time);
      return std::move(res.fills);
    }
    case MsgType::PartialCancel: {
      auto res = book.cancel(m.order_id, m.size);
      if (res.status == CancelStatus::NotFound || res.removed < m.size)
        ++stats.anomalies;
      return {};
    }
    case MsgType::Delete: {
      auto removed = book.remove(m.order_id);
      if (!removed || removed->size != m.size) ++stats.anomalies;
      return {};
    }
    case MsgType::ExecuteVisible: {
      // The message direction is the side of the executed (resting) order;
      // the re-enacted aggressor takes the other side.
      auto res = book.submit_ioc({kHistoricalTakerId, opposite(m.side()), m.price,
                                  m.size, 0, Owner::Historical},
                                 m.time);
      if (res.remaining > 0) ++stats.anomalies;
      return std::move(res.fills);
    }
    case MsgType::ExecuteHidden:
      ++stats.hidden_executions;
      return {};
    case MsgType::Cross:
      ++stats.crosses;
      return {};
    case MsgType::Halt:
      ++stats.halts;
      return {};
  }
  return {};
}

enum class PriceLevelRef : std::uint8_t { Bid, Mid, Ask };

struct InjectResult {
  bool accepted = false;  // false: no usable reference price (one-sided book)
  OrderId id = 0;
  Price price = 0;
  std::vector<Execution> fills;
  Qty remaining = 0;
  bool rested = false;
};

enum class CancelOutcome : std::uint8_t {
  Cancelled,
  NotFound,       // already filled or never live: benign race
  NotAgentOrder,  // refusing to touch historical liquidity
};

struct SessionConfig {
  int book_depth = 5;
  LobsterSentinels sentinels;
  Price tick = kDefaultTick;
};

class ReplaySession {
 public:
  using Messages = std::shared_ptr<const std::vector<MarketMessage>>;
  using AgentFillHandler = std::function<void(const Execution&)>;

  explicit ReplaySession(Messages messages, SessionConfig cfg = {})
      : cfg_(cfg), book_(cfg.tick), messages_(std::move(messages)) {
    if (!messages_) throw std::invalid_argument("null message stream");
    clock_ = messages_->empty() ? 0 : messages_->front().time;
  }

  static ReplaySession load_day(const std::string& message_path,
                                const std::string& orderbook_path,
                                SessionConfig cfg = {}) {
    auto msgs = std::make_shared<std::vector<MarketMessage>>(
        read_message_file(message_path));
    auto rows = read_orderbook_file(orderbook_path);
    if (rows.size() != msgs->size())
      throw std::runtime_error(orderbook_path + ": " + std::to_string(rows.size()) +
                               " book rows vs " + std::to_string(msgs->size()) +
                               " messages");
    ReplaySession session(std::move(msgs), cfg);
    if (!rows.empty()) {
      session.cfg_.book_depth = static_cast<int>(rows.front().size() / 4);
      session.orderbook_rows_ =
          std::make_shared<std::vector<std::vector<std::int64_t>>>(std::move(rows));
    }
    return session;
  }

  // Applies all historical messages with time <= t, in order. Executions
  // involving the agent are handed to the callback as they happen (the
  // callback may submit further agent orders) and collected in the result.
  std::vector<Execution> advance_until(TimeNs t,
                                       const AgentFillHandler& on_agent_fill = {}) {
    if (t < clock_) throw std::invalid_argument("advance_until into the past");
    std::vector<Execution> agent_fills;
    while (cursor_ < messages_->size() && (*messages_)[cursor_].time <= t) {
      const MarketMessage& m = (*messages_)[cursor_++];
      clock_ = m.time;
      auto fills = apply_historical(book_, m, stats_);
      for (const auto& f : fills) {
        if (f.maker_owner == Owner::Agent || f.taker_owner == Owner::Agent) {
          agent_fills.push_back(f);
          if (on_agent_fill) on_agent_fill(f);
        }
      }
    }
    clock_ = t;
    return agent_fills;
  }

  // Places a single agent limit order at the bid, the mid-quote, or the
  // ask. The mid is rounded toward the passive side on the tick grid:
  // floor for buys, ceil for sells.
  InjectResult inject_agent_order(Side side, PriceLevelRef level, Qty size = 1) {
    InjectResult out;
    std::optional<Price> px = resolve_level_price(side, level);
    if (!px) return out;  // refused: caller treats as forced no-op
    out.accepted = true;
    out.id = next_agent_id_++;
    out.price = *px;
    auto res = book_.submit_limit({out.id, side, *px, size, 0, Owner::Agent},
                                  clock_);
    out.fills = std::move(res.fills);
    out.remaining = res.remaining;
    out.rested = res.rested;
    return out;
  }

  // Market order on behalf of the agent. Forced position reductions use
  // CancelResting so the agent cannot fill against itself.
  SubmitResult submit_agent_market(Side side, Qty size,
                                   SelfTradePolicy stp = SelfTradePolicy::CancelResting) {
    return book_.submit_market(next_agent_id_++, Owner::Agent, side, size, clock_,
                               stp);
  }

  CancelOutcome cancel_agent_order(OrderId id) {
    if (!is_agent_id(id)) return CancelOutcome::NotAgentOrder;
    return book_.remove(id) ? CancelOutcome::Cancelled : CancelOutcome::NotFound;
  }

  const OrderBook& book() const { return book_; }
  OrderBook& book() { return book_; }
  TimeNs clock() const { return clock_; }
  const ReplayStats& stats() const { return stats_; }
  const SessionConfig& config() const { return cfg_; }
  std::size_t cursor() const { return cursor_; }
  bool exhausted() const { return cursor_ >= messages_->size(); }
  const std::vector<MarketMessage>& messages() const { return *messages_; }
  Messages shared_messages() const { return messages_; }

  std::optional<TimeNs> next_message_time() const {
    if (exhausted()) return std::nullopt;
    return (*messages_)[cursor_].time;
  }

  // Orderbook rows retained from load_day for fidelity checks; may be null.
  std::shared_ptr<const std::vector<std::vector<std::int64_t>>> orderbook_rows()
      const {
    return orderbook_rows_;
  }

 private:
  std::optional<Price> resolve_level_price(Side side, PriceLevelRef level) const {
    switch (level) {
      case PriceLevelRef::Bid:
        return book_.best_bid();
      case PriceLevelRef::Ask:
        return book_.best_ask();
      case PriceLevelRef::Mid: {
        auto m2 = book_.mid_twice();
        if (!m2) return std::nullopt;
        if (side == Side::Buy) return floor_to_tick(*m2 / 2, cfg_.tick);
        return ceil_to_tick((*m2 + 1) / 2, cfg_.tick);
      }
    }
    return std::nullopt;
  }

  SessionConfig cfg_;
  OrderBook book_;
  Messages messages_;
  std::shared_ptr<const std::vector<std::vector<std::int64_t>>> orderbook_rows_;
  std::size_t cursor_ = 0;
  TimeNs clock_ = 0;
  OrderId next_agent_id_ = kAgentIdBase + 1;
  ReplayStats stats_;
};

struct FidelityReport {
  std::size_t rows = 0;
  std::size_t mismatched_rows = 0;
  std::size_t first_mismatch_line = 0;  // 1-based, 0 when none
  std::uint64_t anomalies = 0;

  bool perfect() const { return mismatched_rows == 0 && anomalies == 0; }
};

// Replays a day with no agent orders and compares the book snapshot after
// each message with the corresponding orderbook-file row.
inline FidelityReport check_replay_fidelity(const std::string& message_path,
                                            const std::string& orderbook_path,
                                            SessionConfig cfg = {}) {
  auto msgs = read_message_file(message_path);
  auto rows = read_orderbook_file(orderbook_path);
  if (rows.size() != msgs.size())
    throw std::runtime_error("message/orderbook row count mismatch");
  FidelityReport report;
  OrderBook book(cfg.tick);
  ReplayStats stats;
  int depth = rows.empty() ? cfg.book_depth
                           : static_cast<int>(rows.front().size() / 4);
  for (std::size_t i = 0; i < msgs.size(); ++i) {
    apply_historical(book, msgs[i], stats);
    auto row = snapshot_row(book.snapshot(depth), depth, cfg.sentinels);
    ++report.rows;
    if (row != rows[i]) {
      ++report.mismatched_rows;
      if (report.first_mismatch_line == 0) report.first_mismatch_line = i + 1;
    }
  }
  report.anomalies = stats.anomalies;
  return report;
}

}  // namespace lobsim
