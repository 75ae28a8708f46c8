#pragma once

// Shared scalar types and conventions used across the library.
//
// Prices are integers in units of 1e-4 dollars (the LOBSTER convention);
// the mid-quote is carried as a 2x-scaled integer so half-tick values stay
// exact. Timestamps are nanoseconds after midnight.

#include <cstdint>

namespace lobsim {

using Price = std::int64_t;   // 1e-4 dollars
using Qty = std::int64_t;     // shares
using OrderId = std::uint64_t;
using TimeNs = std::int64_t;  // nanoseconds after midnight

inline constexpr Price kDefaultTick = 100;  // $0.01
inline constexpr TimeNs kNsPerSec = 1'000'000'000;

// Agent order ids live in a namespace disjoint from any plausible
// historical id, so id collisions are impossible by construction.
inline constexpr OrderId kAgentIdBase = std::uint64_t{1} << 62;

// Synthetic taker id assigned to replayed historical executions.
inline constexpr OrderId kHistoricalTakerId = 0;

constexpr bool is_agent_id(OrderId id) { return id >= kAgentIdBase; }

enum class Side : std::uint8_t { Buy, Sell };

constexpr Side opposite(Side s) { return s == Side::Buy ? Side::Sell : Side::Buy; }

enum class Owner : std::uint8_t { Historical, Agent };

constexpr Price floor_to_tick(Price p, Price tick) {
  Price r = p % tick;
  if (r < 0) r += tick;
  return p - r;
}

constexpr Price ceil_to_tick(Price p, Price tick) { return -floor_to_tick(-p, tick); }

constexpr bool on_tick(Price p, Price tick) { return p % tick == 0; }

constexpr TimeNs seconds_to_ns(std::int64_t s) { return s * kNsPerSec; }

}  // namespace lobsim
