#pragma once

// Synthetic directional signal: a 3-class score vector on the simplex,
// exponentially smoothed Dirichlet noise centred on the realised smoothed
// forward mid return.
//
//   d_t   = phi * d_{t-1} + (1 - phi) * eps_t,   eps_t ~ Dirichlet(alpha)
//   alpha = (aH,aL,aL) / (aL,aH,aL) / (aL,aL,aH) for down / stable / up,
//   where the class is the smoothed h-second forward return against the
//   threshold k: down if r < -k, stable if -k <= r < k, up if k <= r.
//
// The signal for an episode is precomputed from the pure historical mid
// path, so agent impact never feeds back into the oracle.

#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "lobsim/book.hpp"
#include "lobsim/core.hpp"
#include "lobsim/lobster.hpp"
#include "lobsim/replay.hpp"
#include "lobsim/rng.hpp"

namespace lobsim {

enum class SignalClass : int { Down = 0, Stable = 1, Up = 2 };

struct SignalParams {
  int h_seconds = 10;
  double phi = 0.9;
  double k = 4e-5;
  double a_high = 1.6;
  double a_low = 1.0;
  std::uint64_t seed = 1;

  void validate() const {
    if (!(phi > 0.0 && phi < 1.0)) throw std::invalid_argument("phi not in (0,1)");
    if (!(a_low > 0.0 && a_high >= a_low))
      throw std::invalid_argument("need a_high >= a_low > 0");
    if (!(k > 0.0)) throw std::invalid_argument("k must be > 0");
    if (h_seconds < 1) throw std::invalid_argument("h must be >= 1 second");
  }
};

struct SignalState {
  std::array<double, 3> d{1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0};

  double down() const { return d[0]; }
  double stable() const { return d[1]; }
  double up() const { return d[2]; }

  bool on_simplex(double tol = 1e-12) const {
    double sum = d[0] + d[1] + d[2];
    return d[0] >= 0 && d[1] >= 0 && d[2] >= 0 && std::abs(sum - 1.0) <= tol;
  }
};

inline SignalClass predicted_class(const SignalState& s) {
  if (s.d[0] >= s.d[1] && s.d[0] >= s.d[2]) return SignalClass::Down;
  if (s.d[1] >= s.d[2]) return SignalClass::Stable;
  return SignalClass::Up;
}

// Smoothed forward return over `mids`, where mids[0] is the current mid
// and mids[1..] are future samples on the 1-second grid. Uses at most h
// future samples, fewer near the episode end (truncated mean); with no
// future samples at all the return is 0. NaN anywhere in the used window
// makes the result undefined.
inline std::optional<double> smoothed_forward_return(std::span<const double> mids,
                                                     int h) {
  if (mids.empty()) return std::nullopt;
  double p_t = mids[0];
  if (std::isnan(p_t) || p_t <= 0.0) return std::nullopt;
  std::size_t terms = std::min<std::size_t>(h, mids.size() - 1);
  if (terms == 0) return 0.0;
  double sum = 0.0;
  for (std::size_t i = 1; i <= terms; ++i) {
    if (std::isnan(mids[i])) return std::nullopt;
    sum += mids[i];
  }
  double mean = sum / static_cast<double>(terms);
  return (mean - p_t) / p_t;
}

struct Classification {
  SignalClass cls;
  std::array<double, 3> alpha;
};

inline Classification classify(double r_bar, const SignalParams& p) {
  if (r_bar < -p.k) return {SignalClass::Down, {p.a_high, p.a_low, p.a_low}};
  if (r_bar < p.k) return {SignalClass::Stable, {p.a_low, p.a_high, p.a_low}};
  return {SignalClass::Up, {p.a_low, p.a_low, p.a_high}};
}

inline SignalState blend(const SignalState& prev, const std::array<double, 3>& eps,
                         double phi) {
  SignalState next;
  for (int i = 0; i < 3; ++i) next.d[i] = phi * prev.d[i] + (1.0 - phi) * eps[i];
  return next;
}

inline SignalState step(const SignalState& prev, double r_bar,
                        const SignalParams& p, Rng& rng) {
  auto eps = rng.dirichlet(classify(r_bar, p).alpha);
  return blend(prev, eps, p.phi);
}

struct ConfusionMatrix {
  std::array<std::array<std::int64_t, 3>, 3> counts{};  // [realized][predicted]

  std::array<std::array<double, 3>, 3> row_normalized() const {
    std::array<std::array<double, 3>, 3> out{};
    for (int r = 0; r < 3; ++r) {
      double total = static_cast<double>(counts[r][0] + counts[r][1] + counts[r][2]);
      for (int c = 0; c < 3; ++c)
        out[r][c] = total > 0 ? counts[r][c] / total : 0.0;
    }
    return out;
  }

  double mean_diagonal() const {
    auto rows = row_normalized();
    int present = 0;
    double sum = 0.0;
    for (int r = 0; r < 3; ++r) {
      if (counts[r][0] + counts[r][1] + counts[r][2] > 0) {
        sum += rows[r][r];
        ++present;
      }
    }
    return present ? sum / present : 0.0;
  }
};

inline ConfusionMatrix confusion_matrix(std::span<const SignalState> signal,
                                        std::span<const SignalClass> realized) {
  if (signal.empty() || signal.size() != realized.size())
    throw std::invalid_argument("confusion_matrix needs aligned non-empty streams");
  ConfusionMatrix cm;
  for (std::size_t i = 0; i < signal.size(); ++i) {
    int r = static_cast<int>(realized[i]);
    int c = static_cast<int>(predicted_class(signal[i]));
    ++cm.counts[r][c];
  }
  return cm;
}

// Mid-quote path sampled on the decision grid from a pure historical
// replay. The last observed mid is carried forward between events; grid
// points before the first two-sided book are NaN.
inline std::vector<double> historical_mid_path(
    const std::vector<MarketMessage>& messages, TimeNs start, TimeNs end,
    TimeNs dt, Price tick = kDefaultTick) {
  OrderBook book(tick);
  ReplayStats stats;
  std::vector<double> mids;
  mids.reserve(static_cast<std::size_t>((end - start) / dt) + 1);
  std::size_t cursor = 0;
  double last = std::numeric_limits<double>::quiet_NaN();
  for (TimeNs t = start; t <= end; t += dt) {
    while (cursor < messages.size() && messages[cursor].time <= t)
      apply_historical(book, messages[cursor++], stats);
    if (auto m2 = book.mid_twice()) last = static_cast<double>(*m2) / 2.0;
    mids.push_back(last);
  }
  return mids;
}

// Per-episode signal track on the decision grid. Entries whose forward
// return is undefined hold the previous signal state.
struct SignalTrack {
  std::vector<SignalState> states;
  std::vector<SignalClass> realized;
  std::vector<double> r_bar;
  std::vector<std::uint8_t> defined;
  std::vector<double> mid;

  std::size_t size() const { return states.size(); }
};

inline SignalTrack build_signal_track(const std::vector<double>& mid_path,
                                      TimeNs dt, const SignalParams& params,
                                      std::uint64_t seed) {
  params.validate();
  if (dt <= 0 || kNsPerSec % dt != 0)
    throw std::invalid_argument("decision interval must divide one second");
  std::size_t steps_per_sec = static_cast<std::size_t>(kNsPerSec / dt);
  Rng rng(seed);
  SignalTrack track;
  track.states.reserve(mid_path.size());
  track.mid = mid_path;
  SignalState state;
  std::vector<double> window;
  for (std::size_t i = 0; i < mid_path.size(); ++i) {
    window.clear();
    window.push_back(mid_path[i]);
    for (int m = 1; m <= params.h_seconds; ++m) {
      std::size_t j = i + m * steps_per_sec;
      if (j >= mid_path.size()) break;
      window.push_back(mid_path[j]);
    }
    auto r = smoothed_forward_return(window, params.h_seconds);
    if (r) {
      state = step(state, *r, params, rng);
      track.realized.push_back(classify(*r, params).cls);
      track.r_bar.push_back(*r);
      track.defined.push_back(1);
    } else {
      track.realized.push_back(SignalClass::Stable);
      track.r_bar.push_back(0.0);
      track.defined.push_back(0);
    }
    track.states.push_back(state);
  }
  return track;
}

}  // namespace lobsim
