#pragma once

// LOBSTER-format CSV I/O.
//
// A trading day is a file pair: a message file with one event per row
// (time, type, order_id, size, price, direction) and an orderbook file
// with the depth-k book state after each message (ask_p1, ask_s1, bid_p1,
// bid_s1, ..., level k). Prices are integers in 1e-4 dollars, times are
// seconds after midnight with a nanosecond fraction. Unoccupied levels
// carry sentinel prices (+9999999999 ask / -9999999999 bid) and size 0;
// the sentinels are configurable.

#include <charconv>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "lobsim/book.hpp"
#include "lobsim/core.hpp"

namespace lobsim {

enum class MsgType : std::uint8_t {
  Add = 1,
  PartialCancel = 2,
  Delete = 3,
  ExecuteVisible = 4,
  ExecuteHidden = 5,
  Cross = 6,
  Halt = 7,
};

struct MarketMessage {
  TimeNs time = 0;
  MsgType type = MsgType::Add;
  OrderId order_id = 0;
  Qty size = 0;
  Price price = 0;
  int direction = 0;  // -1 the referenced limit order sells, +1 it buys

  Side side() const { return direction == 1 ? Side::Buy : Side::Sell; }
};

struct LobsterSentinels {
  Price missing_ask = 9999999999;
  Price missing_bid = -9999999999;
};

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& path, std::size_t line, const std::string& what)
      : std::runtime_error(path + ":" + std::to_string(line) + ": " + what),
        line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

namespace detail {

inline std::int64_t parse_int(std::string_view field, const std::string& path,
                              std::size_t line) {
  std::int64_t value = 0;
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc() || ptr != field.data() + field.size())
    throw ParseError(path, line, "bad integer field '" + std::string(field) + "'");
  return value;
}

// "34200.000123456" -> nanoseconds after midnight. Fractions shorter than
// nine digits are right-padded with zeros.
inline TimeNs parse_time(std::string_view field, const std::string& path,
                         std::size_t line) {
  auto dot = field.find('.');
  std::string_view secs = field.substr(0, dot);
  TimeNs t = parse_int(secs, path, line) * kNsPerSec;
  if (dot == std::string_view::npos) return t;
  std::string_view frac = field.substr(dot + 1);
  if (frac.empty() || frac.size() > 9)
    throw ParseError(path, line, "bad time fraction '" + std::string(field) + "'");
  TimeNs ns = parse_int(frac, path, line);
  for (std::size_t i = frac.size(); i < 9; ++i) ns *= 10;
  return t + ns;
}

inline std::vector<std::string_view> split_csv(std::string_view row) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    std::size_t comma = row.find(',', start);
    std::string_view field = row.substr(
        start, comma == std::string_view::npos ? comma : comma - start);
    while (!field.empty() && field.front() == ' ') field.remove_prefix(1);
    while (!field.empty() &&
           (field.back() == ' ' || field.back() == '\r' || field.back() == '\n'))
      field.remove_suffix(1);
    out.push_back(field);
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

}  // namespace detail

inline std::string format_time_ns(TimeNs t) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%lld.%09lld",
                static_cast<long long>(t / kNsPerSec),
                static_cast<long long>(t % kNsPerSec));
  return buf;
}

inline MarketMessage parse_message_row(std::string_view row, const std::string& path,
                                       std::size_t line) {
  auto fields = detail::split_csv(row);
  if (fields.size() != 6)
    throw ParseError(path, line, "expected 6 fields, got " +
                                     std::to_string(fields.size()));
  MarketMessage m;
  m.time = detail::parse_time(fields[0], path, line);
  std::int64_t type = detail::parse_int(fields[1], path, line);
  if (type < 1 || type > 7) throw ParseError(path, line, "bad message type");
  m.type = static_cast<MsgType>(type);
  std::int64_t id = detail::parse_int(fields[2], path, line);
  if (id < 0) throw ParseError(path, line, "negative order id");
  m.order_id = static_cast<OrderId>(id);
  m.size = detail::parse_int(fields[3], path, line);
  if (m.size < 0) throw ParseError(path, line, "negative size");
  m.price = detail::parse_int(fields[4], path, line);
  m.direction = static_cast<int>(detail::parse_int(fields[5], path, line));
  if (m.direction != -1 && m.direction != 1)
    throw ParseError(path, line, "direction must be -1 or 1");
  return m;
}

inline std::vector<MarketMessage> read_message_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open message file: " + path);
  std::vector<MarketMessage> out;
  std::string row;
  std::size_t line = 0;
  TimeNs last = -1;
  while (std::getline(in, row)) {
    ++line;
    if (row.empty()) continue;
    MarketMessage m = parse_message_row(row, path, line);
    if (m.time < last)
      throw ParseError(path, line, "non-monotone timestamp");
    last = m.time;
    out.push_back(m);
  }
  return out;
}

inline std::string format_message_row(const MarketMessage& m) {
  std::string row = format_time_ns(m.time);
  row += ',';
  row += std::to_string(static_cast<int>(m.type));
  row += ',';
  row += std::to_string(m.order_id);
  row += ',';
  row += std::to_string(m.size);
  row += ',';
  row += std::to_string(m.price);
  row += ',';
  row += std::to_string(m.direction);
  return row;
}

// Depth-k orderbook row in LOBSTER column order.
inline std::vector<std::int64_t> snapshot_row(const BookSnapshot& snap, int depth,
                                              const LobsterSentinels& s = {}) {
  std::vector<std::int64_t> row;
  row.reserve(4 * depth);
  for (int i = 0; i < depth; ++i) {
    if (i < static_cast<int>(snap.asks.size())) {
      row.push_back(snap.asks[i].price);
      row.push_back(snap.asks[i].size);
    } else {
      row.push_back(s.missing_ask);
      row.push_back(0);
    }
    if (i < static_cast<int>(snap.bids.size())) {
      row.push_back(snap.bids[i].price);
      row.push_back(snap.bids[i].size);
    } else {
      row.push_back(s.missing_bid);
      row.push_back(0);
    }
  }
  return row;
}

inline std::string format_orderbook_row(const std::vector<std::int64_t>& row) {
  std::string out;
  for (std::size_t i = 0; i < row.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(row[i]);
  }
  return out;
}

inline std::vector<std::vector<std::int64_t>> read_orderbook_file(
    const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open orderbook file: " + path);
  std::vector<std::vector<std::int64_t>> rows;
  std::string row;
  std::size_t line = 0;
  std::size_t width = 0;
  while (std::getline(in, row)) {
    ++line;
    if (row.empty()) continue;
    auto fields = detail::split_csv(row);
    if (width == 0) {
      width = fields.size();
      if (width == 0 || width % 4 != 0)
        throw ParseError(path, line, "orderbook row width must be 4*depth");
    } else if (fields.size() != width) {
      throw ParseError(path, line, "ragged orderbook row");
    }
    std::vector<std::int64_t> values;
    values.reserve(fields.size());
    for (auto f : fields) values.push_back(detail::parse_int(f, path, line));
    rows.push_back(std::move(values));
  }
  return rows;
}

}  // namespace lobsim
