#pragma once

// Synthetic LOBSTER day generator.
//
// Produces a message/orderbook file pair that is self-consistent by
// construction: every message is applied to a real book through the same
// replay path used for reconstruction, and the orderbook file is the
// snapshot after each message. Event times are Poisson arrivals; the
// fair value follows a bounded random walk so forward returns carry
// genuine directional content, and aggressive flow is biased toward the
// fair value so the book mid tracks it. This is a test fixture, not a
// calibrated market model.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "lobsim/book.hpp"
#include "lobsim/core.hpp"
#include "lobsim/lobster.hpp"
#include "lobsim/replay.hpp"
#include "lobsim/rng.hpp"

namespace lobsim {

struct FlowModel {
  std::uint64_t seed = 1;

  // Arrival rates, events per simulated second.
  double add_rate = 6.0;
  double cancel_rate = 1.5;
  double delete_rate = 2.5;
  double execute_rate = 3.0;

  Price initial_mid = 4572500;  // $457.25
  Price tick = kDefaultTick;

  // Opening book seeding.
  int initial_levels = 8;
  int initial_spread_ticks = 2;

  // Order size distribution: base * (1 + Geom(size_geom_p)).
  Qty base_size = 100;
  double size_geom_p = 0.5;

  // Price-offset distribution for passive adds (ticks behind the touch).
  int max_offset_ticks = 6;
  double offset_geom_p = 0.45;

  // Fair-value walk: reflected at initial_mid +/- walk_bound_ticks.
  double walk_vol_ticks = 10.0;  // per sqrt(second)
  Price walk_bound_ticks = 300;
  double aggressor_bias_ticks = 2.0;  // sigmoid width for execute direction

  // Session span (09:30 to 10:30).
  TimeNs session_start = seconds_to_ns(34200);
  TimeNs session_end = seconds_to_ns(37800);

  int book_depth = 5;             // orderbook file depth
  std::size_t max_live_orders = 600;
  LobsterSentinels sentinels;
};

struct DayStats {
  std::size_t rows = 0;
  std::size_t adds = 0;
  std::size_t partial_cancels = 0;
  std::size_t deletes = 0;
  std::size_t executions = 0;
  Qty executed_shares = 0;
  Price min_mid2 = 0;  // 2x-scaled mid extremes over the day
  Price max_mid2 = 0;
  Price final_mid2 = 0;
};

namespace detail {

class DayBuilder {
 public:
  DayBuilder(const FlowModel& model, std::ostream& msg_out, std::ostream& book_out)
      : m_(model), rng_(model.seed), book_(model.tick), msg_out_(msg_out),
        book_out_(book_out) {
    fair_ = static_cast<double>(m_.initial_mid);
    lo_ = m_.initial_mid - m_.walk_bound_ticks * m_.tick;
    hi_ = m_.initial_mid + m_.walk_bound_ticks * m_.tick;
  }

  DayStats run() {
    t_ = m_.session_start;
    seed_book();
    double total_rate =
        m_.add_rate + m_.cancel_rate + m_.delete_rate + m_.execute_rate;
    while (true) {
      double dt = rng_.exponential(total_rate);
      TimeNs next = t_ + static_cast<TimeNs>(dt * kNsPerSec);
      if (next > m_.session_end || next < t_) break;
      advance_fair(dt);
      t_ = next;
      double pick = rng_.uniform(0.0, total_rate);
      if (pick < m_.add_rate)
        do_add();
      else if (pick < m_.add_rate + m_.cancel_rate)
        do_partial_cancel();
      else if (pick < m_.add_rate + m_.cancel_rate + m_.delete_rate)
        do_delete();
      else
        do_execute();
      maintain_depth();
    }
    if (auto m2 = book_.mid_twice()) stats_.final_mid2 = *m2;
    return stats_;
  }

 private:
  void emit(const MarketMessage& msg) {
    ReplayStats before = replay_stats_;
    auto fills = apply_historical(book_, msg, replay_stats_);
    (void)fills;
    if (replay_stats_.anomalies != before.anomalies)
      throw std::logic_error("datagen produced an inconsistent message");
    msg_out_ << format_message_row(msg) << '\n';
    book_out_ << format_orderbook_row(
                     snapshot_row(book_.snapshot(m_.book_depth), m_.book_depth,
                                  m_.sentinels))
              << '\n';
    ++stats_.rows;
    if (auto m2 = book_.mid_twice()) {
      if (stats_.min_mid2 == 0 || *m2 < stats_.min_mid2) stats_.min_mid2 = *m2;
      if (*m2 > stats_.max_mid2) stats_.max_mid2 = *m2;
    }
    switch (msg.type) {
      case MsgType::Add: ++stats_.adds; live_.push_back(msg.order_id); break;
      case MsgType::PartialCancel: ++stats_.partial_cancels; break;
      case MsgType::Delete: ++stats_.deletes; forget(msg.order_id); break;
      case MsgType::ExecuteVisible:
        ++stats_.executions;
        stats_.executed_shares += msg.size;
        if (book_.find(msg.order_id) == nullptr) forget(msg.order_id);
        break;
      default: break;
    }
  }

  void forget(OrderId id) {
    live_.erase(std::remove(live_.begin(), live_.end(), id), live_.end());
  }

  Qty draw_size() {
    return m_.base_size * (1 + rng_.geometric(m_.size_geom_p));
  }

  void advance_fair(double dt) {
    fair_ += rng_.normal() * m_.walk_vol_ticks * std::sqrt(dt) * m_.tick;
    // Reflect into [lo, hi].
    if (fair_ < lo_) fair_ = 2.0 * lo_ - fair_;
    if (fair_ > hi_) fair_ = 2.0 * hi_ - fair_;
    fair_ = std::clamp(fair_, static_cast<double>(lo_), static_cast<double>(hi_));
  }

  Price fair_tick() const {
    return floor_to_tick(static_cast<Price>(std::llround(fair_)), m_.tick);
  }

  void seed_book() {
    Price half = std::max(1, m_.initial_spread_ticks / 2) * m_.tick;
    Price center = fair_tick();
    for (int i = 0; i < m_.initial_levels; ++i) {
      add_at(Side::Buy, center - half - i * m_.tick);
      add_at(Side::Sell, center + half + i * m_.tick);
    }
  }

  void add_at(Side side, Price price) {
    if (price <= 0) return;
    MarketMessage msg;
    msg.time = t_;
    msg.type = MsgType::Add;
    msg.order_id = next_id_++;
    msg.size = draw_size();
    msg.price = price;
    msg.direction = side == Side::Buy ? 1 : -1;
    emit(msg);
  }

  void do_add() {
    if (live_.size() >= m_.max_live_orders) {
      do_delete();
      return;
    }
    Side side = rng_.bernoulli(0.5) ? Side::Buy : Side::Sell;
    Price center = fair_tick();
    int offset = static_cast<int>(
        std::min<std::int64_t>(rng_.geometric(m_.offset_geom_p),
                               m_.max_offset_ticks));
    Price price;
    if (side == Side::Buy) {
      price = center - m_.tick - offset * m_.tick;
      if (auto ask = book_.best_ask()) price = std::min(price, *ask - m_.tick);
    } else {
      price = center + m_.tick + offset * m_.tick;
      if (auto bid = book_.best_bid()) price = std::max(price, *bid + m_.tick);
    }
    add_at(side, price);
  }

  void do_partial_cancel() {
    if (live_.empty()) return;
    OrderId id = live_[rng_.uniform_int(0, static_cast<std::int64_t>(live_.size()) - 1)];
    const Order* o = book_.find(id);
    if (!o) { forget(id); return; }
    if (o->size <= 1) { emit_delete(*o); return; }
    Qty qty = rng_.uniform_int(1, o->size - 1);
    MarketMessage msg;
    msg.time = t_;
    msg.type = MsgType::PartialCancel;
    msg.order_id = id;
    msg.size = qty;
    msg.price = o->price;
    msg.direction = o->side == Side::Buy ? 1 : -1;
    emit(msg);
  }

  void emit_delete(const Order& o) {
    MarketMessage msg;
    msg.time = t_;
    msg.type = MsgType::Delete;
    msg.order_id = o.id;
    msg.size = o.size;
    msg.price = o.price;
    msg.direction = o.side == Side::Buy ? 1 : -1;
    emit(msg);
  }

  void do_delete() {
    if (live_.empty()) return;
    OrderId id = live_[rng_.uniform_int(0, static_cast<std::int64_t>(live_.size()) - 1)];
    const Order* o = book_.find(id);
    if (!o) { forget(id); return; }
    // Keep the touch alive: never delete the last order of the best level
    // if the side is thin.
    if ((o->side == Side::Buy && book_.bid_levels() <= 2 &&
         book_.best_bid() == o->price) ||
        (o->side == Side::Sell && book_.ask_levels() <= 2 &&
         book_.best_ask() == o->price))
      return;
    emit_delete(*o);
  }

  void do_execute() {
    auto m2 = book_.mid_twice();
    if (!m2) return;
    double gap_ticks = (fair_ - static_cast<double>(*m2) / 2.0) / m_.tick;
    double p_buy = 1.0 / (1.0 + std::exp(-gap_ticks / m_.aggressor_bias_ticks));
    Side taker = rng_.bernoulli(p_buy) ? Side::Buy : Side::Sell;
    // Aggress against at most the two best levels, leaving the side alive.
    auto fills = book_.peek_fills(taker, std::nullopt,
                                  std::numeric_limits<Qty>::max());
    if (fills.empty()) return;
    Qty available = 0;
    for (const auto& f : fills) available += f.size;
    Qty want = draw_size();
    if (rng_.bernoulli(0.25)) want += draw_size();  // occasional sweep
    Qty size = std::min(want, available - 1);
    if (size < 1) return;
    auto planned = book_.peek_fills(taker, std::nullopt, size);
    for (const auto& f : planned) {
      MarketMessage msg;
      msg.time = t_;
      msg.type = MsgType::ExecuteVisible;
      msg.order_id = f.maker_id;
      msg.size = f.size;
      msg.price = f.price;
      msg.direction = f.maker_side == Side::Buy ? 1 : -1;
      emit(msg);
    }
  }

  void maintain_depth() {
    int guard = 0;
    while ((book_.bid_levels() < 2 || book_.ask_levels() < 2) && guard++ < 8) {
      Price center = fair_tick();
      if (book_.bid_levels() < 2) {
        Price price = center - m_.tick - static_cast<int>(book_.bid_levels()) * m_.tick;
        if (auto ask = book_.best_ask()) price = std::min(price, *ask - m_.tick);
        if (auto bid = book_.best_bid()) price = std::min(price, *bid - m_.tick);
        add_at(Side::Buy, price);
      }
      if (book_.ask_levels() < 2) {
        Price price = center + m_.tick + static_cast<int>(book_.ask_levels()) * m_.tick;
        if (auto bid = book_.best_bid()) price = std::max(price, *bid + m_.tick);
        if (auto ask = book_.best_ask()) price = std::max(price, *ask + m_.tick);
        add_at(Side::Sell, price);
      }
    }
  }

  FlowModel m_;
  Rng rng_;
  OrderBook book_;
  std::ostream& msg_out_;
  std::ostream& book_out_;
  ReplayStats replay_stats_;
  DayStats stats_;
  std::vector<OrderId> live_;
  OrderId next_id_ = 1;
  TimeNs t_ = 0;
  double fair_ = 0.0;
  Price lo_ = 0, hi_ = 0;
};

}  // namespace detail

inline DayStats generate_day(const FlowModel& model, const std::string& message_path,
                             const std::string& orderbook_path) {
  std::ofstream msg_out(message_path);
  if (!msg_out) throw std::runtime_error("cannot write " + message_path);
  std::ofstream book_out(orderbook_path);
  if (!book_out) throw std::runtime_error("cannot write " + orderbook_path);
  detail::DayBuilder builder(model, msg_out, book_out);
  DayStats stats = builder.run();
  if (!msg_out.good() || !book_out.good())
    throw std::runtime_error("short write while generating day files");
  return stats;
}

}  // namespace lobsim
