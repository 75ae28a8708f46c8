#pragma once

// Price-time-priority limit order book with a matching engine.
//
// Two price-sorted ladders of FIFO order queues plus an order-id index.
// Marketable orders walk the opposite ladder best price first, oldest
// order first within a level. Executions are reported at the resting
// (maker) order's limit price. After every public operation the book is
// un-crossed: best_bid < best_ask whenever both sides are non-empty.

#include <cstdint>
#include <list>
#include <map>
#include <optional>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "lobsim/core.hpp"

namespace lobsim {

struct Order {
  OrderId id = 0;
  Side side = Side::Buy;
  Price price = 0;
  Qty size = 0;
  std::uint64_t entry_seq = 0;  // assigned by the book, strictly increasing
  Owner owner = Owner::Historical;
};

struct Execution {
  OrderId maker_id = 0;
  OrderId taker_id = 0;
  Price price = 0;  // maker's limit price
  Qty size = 0;
  Side aggressor = Side::Buy;  // taker side
  TimeNs time = 0;
  Owner maker_owner = Owner::Historical;
  Owner taker_owner = Owner::Historical;
};

// Self-trade handling for incoming agent orders meeting resting agent
// orders. Allow executes them normally (inventory nets out);
// CancelResting removes the resting order without a fill and keeps
// matching, which is what forced position-reduction orders use.
enum class SelfTradePolicy : std::uint8_t { Allow, CancelResting };

struct SubmitResult {
  std::vector<Execution> fills;
  Qty remaining = 0;  // unfilled shares: resting if `rested`, dropped otherwise
  bool rested = false;
  std::vector<Order> stp_cancels;  // resting orders removed by self-trade prevention
};

enum class CancelStatus : std::uint8_t { Reduced, Deleted, NotFound };

struct CancelResult {
  CancelStatus status = CancelStatus::NotFound;
  Qty removed = 0;
};

struct LevelQuote {
  Price price = 0;
  Qty size = 0;
};

struct BookSnapshot {
  std::vector<LevelQuote> asks;  // best first, missing levels omitted
  std::vector<LevelQuote> bids;
  std::optional<Price> mid_twice;  // best_bid + best_ask; half-tick exact

  std::optional<Price> best_ask() const {
    if (asks.empty()) return std::nullopt;
    return asks.front().price;
  }
  std::optional<Price> best_bid() const {
    if (bids.empty()) return std::nullopt;
    return bids.front().price;
  }
};

class OrderBook {
 public:
  explicit OrderBook(Price tick = kDefaultTick) : tick_(tick) {}

  // Limit order: matches the marketable portion, rests the remainder.
  SubmitResult submit_limit(Order order, TimeNs now,
                            SelfTradePolicy stp = SelfTradePolicy::Allow) {
    validate_incoming(order);
    if (!on_tick(order.price, tick_))
      throw std::invalid_argument("limit price off tick grid");
    SubmitResult res = match(order.side, order.price, order.size, order.id,
                             order.owner, now, stp);
    if (res.remaining > 0) {
      order.size = res.remaining;
      rest(order);
      res.rested = true;
    }
    return res;
  }

  // Marketable limit that never rests (immediate-or-cancel). Used by the
  // replay layer to re-enact recorded executions.
  SubmitResult submit_ioc(Order order, TimeNs now,
                          SelfTradePolicy stp = SelfTradePolicy::Allow) {
    validate_incoming(order);
    return match(order.side, order.price, order.size, order.id, order.owner,
                 now, stp);
  }

  // Market order: walks the opposite side until filled or the book is
  // exhausted; the unfilled remainder is reported, never rested.
  SubmitResult submit_market(OrderId taker_id, Owner owner, Side side, Qty size,
                             TimeNs now,
                             SelfTradePolicy stp = SelfTradePolicy::Allow) {
    if (size < 1) throw std::invalid_argument("order size must be >= 1");
    return match(side, std::nullopt, size, taker_id, owner, now, stp);
  }

  // Partial cancel keeps queue position; qty >= remaining size deletes.
  CancelResult cancel(OrderId id, Qty qty) {
    auto it = index_.find(id);
    if (it == index_.end()) return {CancelStatus::NotFound, 0};
    if (qty < 0) throw std::invalid_argument("cancel qty must be >= 0");
    Order& ord = *it->second.it;
    if (qty >= ord.size) {
      Qty removed = ord.size;
      erase_order(it);
      return {CancelStatus::Deleted, removed};
    }
    ord.size -= qty;
    level_of(it->second).total -= qty;
    return {CancelStatus::Reduced, qty};
  }

  std::optional<Order> remove(OrderId id) {
    auto it = index_.find(id);
    if (it == index_.end()) return std::nullopt;
    Order ord = *it->second.it;
    erase_order(it);
    return ord;
  }

  const Order* find(OrderId id) const {
    auto it = index_.find(id);
    return it == index_.end() ? nullptr : &*it->second.it;
  }

  std::optional<Price> best_bid() const {
    if (bids_.empty()) return std::nullopt;
    return bids_.begin()->first;
  }
  std::optional<Price> best_ask() const {
    if (asks_.empty()) return std::nullopt;
    return asks_.begin()->first;
  }
  std::optional<Price> mid_twice() const {
    auto b = best_bid(), a = best_ask();
    if (!b || !a) return std::nullopt;
    return *b + *a;
  }

  BookSnapshot snapshot(int depth) const {
    BookSnapshot snap;
    snap.asks.reserve(depth);
    snap.bids.reserve(depth);
    int i = 0;
    for (auto it = asks_.begin(); it != asks_.end() && i < depth; ++it, ++i)
      snap.asks.push_back({it->first, it->second.total});
    i = 0;
    for (auto it = bids_.begin(); it != bids_.end() && i < depth; ++it, ++i)
      snap.bids.push_back({it->first, it->second.total});
    snap.mid_twice = mid_twice();
    return snap;
  }

  std::size_t order_count() const { return index_.size(); }
  std::size_t bid_levels() const { return bids_.size(); }
  std::size_t ask_levels() const { return asks_.size(); }
  Price tick() const { return tick_; }

  struct PeekFill {
    OrderId maker_id;
    Price price;
    Qty size;
    Side maker_side;
  };

  // Fills a marketable order of `size` would produce, in match order,
  // without mutating the book. Empty `limit` means a market order.
  std::vector<PeekFill> peek_fills(Side taker_side, std::optional<Price> limit,
                                   Qty size) const {
    std::vector<PeekFill> out;
    Qty remaining = size;
    auto walk = [&](const auto& ladder, auto marketable) {
      for (auto it = ladder.begin(); it != ladder.end() && remaining > 0; ++it) {
        if (!marketable(it->first)) break;
        for (const Order& o : it->second.queue) {
          if (remaining <= 0) break;
          Qty fill = std::min(remaining, o.size);
          out.push_back({o.id, o.price, fill, o.side});
          remaining -= fill;
        }
      }
    };
    if (taker_side == Side::Buy)
      walk(asks_, [&](Price p) { return !limit || p <= *limit; });
    else
      walk(bids_, [&](Price p) { return !limit || p >= *limit; });
    return out;
  }

  // Structural self-check used by tests: ladder ordering, level totals,
  // index consistency, and the no-cross invariant.
  bool check_invariants() const {
    auto b = best_bid(), a = best_ask();
    if (b && a && *b >= *a) return false;
    std::size_t counted = 0;
    for (const auto& [price, level] : bids_) {
      Qty total = 0;
      std::uint64_t last_seq = 0;
      for (const auto& o : level.queue) {
        if (o.size < 1 || o.side != Side::Buy || o.price != price) return false;
        if (o.entry_seq <= last_seq) return false;
        last_seq = o.entry_seq;
        total += o.size;
        auto it = index_.find(o.id);
        if (it == index_.end() || &*it->second.it != &o) return false;
        ++counted;
      }
      if (total != level.total || level.queue.empty()) return false;
    }
    for (const auto& [price, level] : asks_) {
      Qty total = 0;
      std::uint64_t last_seq = 0;
      for (const auto& o : level.queue) {
        if (o.size < 1 || o.side != Side::Sell || o.price != price) return false;
        if (o.entry_seq <= last_seq) return false;
        last_seq = o.entry_seq;
        total += o.size;
        auto it = index_.find(o.id);
        if (it == index_.end() || &*it->second.it != &o) return false;
        ++counted;
      }
      if (total != level.total || level.queue.empty()) return false;
    }
    return counted == index_.size();
  }

 private:
  struct Level {
    std::list<Order> queue;
    Qty total = 0;
  };
  using BidMap = std::map<Price, Level, std::greater<Price>>;
  using AskMap = std::map<Price, Level, std::less<Price>>;
  struct Locator {
    Side side;
    Price price;
    std::list<Order>::iterator it;
  };

  void validate_incoming(const Order& order) const {
    if (order.size < 1) throw std::invalid_argument("order size must be >= 1");
    if (order.price <= 0) throw std::invalid_argument("order price must be > 0");
    if (index_.count(order.id)) throw std::invalid_argument("duplicate order id");
  }

  Level& level_of(const Locator& loc) {
    return loc.side == Side::Buy ? bids_.find(loc.price)->second
                                 : asks_.find(loc.price)->second;
  }

  void erase_order(std::unordered_map<OrderId, Locator>::iterator it) {
    const Locator& loc = it->second;
    if (loc.side == Side::Buy) {
      auto lvl = bids_.find(loc.price);
      lvl->second.total -= loc.it->size;
      lvl->second.queue.erase(loc.it);
      if (lvl->second.queue.empty()) bids_.erase(lvl);
    } else {
      auto lvl = asks_.find(loc.price);
      lvl->second.total -= loc.it->size;
      lvl->second.queue.erase(loc.it);
      if (lvl->second.queue.empty()) asks_.erase(lvl);
    }
    index_.erase(it);
  }

  void rest(Order order) {
    order.entry_seq = next_seq_++;
    if (order.side == Side::Buy) {
      Level& lvl = bids_[order.price];
      lvl.queue.push_back(order);
      lvl.total += order.size;
      index_.emplace(order.id, Locator{Side::Buy, order.price,
                                       std::prev(lvl.queue.end())});
    } else {
      Level& lvl = asks_[order.price];
      lvl.queue.push_back(order);
      lvl.total += order.size;
      index_.emplace(order.id, Locator{Side::Sell, order.price,
                                       std::prev(lvl.queue.end())});
    }
  }

  // Core matching walk. `limit` empty means a market order.
  SubmitResult match(Side taker_side, std::optional<Price> limit, Qty size,
                     OrderId taker_id, Owner taker_owner, TimeNs now,
                     SelfTradePolicy stp) {
    SubmitResult res;
    res.remaining = size;
    if (taker_side == Side::Buy) {
      match_against(asks_, [&](Price p) { return !limit || p <= *limit; },
                    taker_side, taker_id, taker_owner, now, stp, res);
    } else {
      match_against(bids_, [&](Price p) { return !limit || p >= *limit; },
                    taker_side, taker_id, taker_owner, now, stp, res);
    }
    return res;
  }

  template <class Map, class Marketable>
  void match_against(Map& ladder, Marketable marketable, Side taker_side,
                     OrderId taker_id, Owner taker_owner, TimeNs now,
                     SelfTradePolicy stp, SubmitResult& res) {
    auto lvl = ladder.begin();
    while (res.remaining > 0 && lvl != ladder.end() && marketable(lvl->first)) {
      Level& level = lvl->second;
      auto qit = level.queue.begin();
      while (res.remaining > 0 && qit != level.queue.end()) {
        Order& maker = *qit;
        if (stp == SelfTradePolicy::CancelResting &&
            taker_owner == Owner::Agent && maker.owner == Owner::Agent) {
          res.stp_cancels.push_back(maker);
          level.total -= maker.size;
          index_.erase(maker.id);
          qit = level.queue.erase(qit);
          continue;
        }
        Qty fill = std::min(res.remaining, maker.size);
        res.fills.push_back({maker.id, taker_id, maker.price, fill, taker_side,
                             now, maker.owner, taker_owner});
        maker.size -= fill;
        level.total -= fill;
        res.remaining -= fill;
        if (maker.size == 0) {
          index_.erase(maker.id);
          qit = level.queue.erase(qit);
        } else {
          ++qit;
        }
      }
      if (level.queue.empty())
        lvl = ladder.erase(lvl);
      else
        ++lvl;
    }
  }

  Price tick_;
  std::uint64_t next_seq_ = 1;
  BidMap bids_;
  AskMap asks_;
  std::unordered_map<OrderId, Locator> index_;
};

}  // namespace lobsim
