#include "lobsim/policies.hpp"

#include <gtest/gtest.h>

#include <array>
#include <cmath>
#include <cstdio>
#include <memory>
#include <vector>

#include "lobsim/datagen.hpp"

using namespace lobsim;

namespace {

EnvConfig small_config() {
  EnvConfig cfg;
  cfg.episode_start = seconds_to_ns(34200);
  cfg.episode_end = seconds_to_ns(34200 + 120);
  cfg.history_len = 20;
  cfg.pos_min = -3;
  cfg.pos_max = 3;
  return cfg;
}

const EpisodeData& pol_episode() {
  static EpisodeData data = [] {
    auto mp = std::string(::testing::TempDir()) + "pol_message.csv";
    auto bp = std::string(::testing::TempDir()) + "pol_book.csv";
    FlowModel model;
    model.seed = 555;
    model.session_end = model.session_start + 130 * kNsPerSec;
    generate_day(model, mp, bp);
    auto msgs = std::make_shared<std::vector<MarketMessage>>(
        read_message_file(mp));
    std::remove(mp.c_str());
    std::remove(bp.c_str());
    SignalParams sig;
    sig.seed = 4;
    return make_episode(msgs, small_config(), sig);
  }();
  return data;
}

Observation obs_with(std::array<double, 3> d, Qty inventory) {
  Observation obs;
  obs.d = d;
  obs.inventory = inventory;
  return obs;
}

TEST(Baseline, AggressiveEntryOnDirectionalSignal) {
  TradingEnv env(pol_episode(), small_config());
  env.reset();
  BaselinePolicy policy(-3, 3);
  EXPECT_EQ(policy.act(obs_with({0.1, 0.2, 0.7}, 0), env), AgentAction::BuyAsk);
  EXPECT_EQ(policy.act(obs_with({0.7, 0.2, 0.1}, 0), env), AgentAction::SellBid);
}

TEST(Baseline, RespectsInventoryBounds) {
  TradingEnv env(pol_episode(), small_config());
  env.reset();
  BaselinePolicy policy(-3, 3);
  EXPECT_EQ(policy.act(obs_with({0.1, 0.2, 0.7}, 3), env), AgentAction::Skip);
  EXPECT_EQ(policy.act(obs_with({0.7, 0.2, 0.1}, -3), env), AgentAction::Skip);
}

TEST(Baseline, PassiveReductionOnNeutralSignal) {
  TradingEnv env(pol_episode(), small_config());
  env.reset();
  BaselinePolicy policy(-3, 3);
  EXPECT_EQ(policy.act(obs_with({0.2, 0.6, 0.2}, 3), env), AgentAction::SellAsk);
  EXPECT_EQ(policy.act(obs_with({0.2, 0.6, 0.2}, -2), env), AgentAction::BuyBid);
  EXPECT_EQ(policy.act(obs_with({0.2, 0.6, 0.2}, 0), env), AgentAction::Skip);
}

// Full-episode properties: at most one live reduction order, and no
// action the env has to disallow.
TEST(Baseline, EpisodeInvariants) {
  TradingEnv env(pol_episode(), small_config());
  auto obs = env.reset();
  BaselinePolicy policy(-3, 3);
  int reductions_alive_max = 0;
  while (!env.done()) {
    AgentAction a = policy.act(obs, env);
    auto res = env.step(a);
    policy.on_step(res.info);
    EXPECT_FALSE(res.info.action_disallowed);
    // All baseline resting orders are reduction orders.
    reductions_alive_max = std::max<int>(reductions_alive_max,
                                         static_cast<int>(env.live_orders().size()));
    obs = std::move(res.obs);
  }
  EXPECT_LE(reductions_alive_max, 1);
}

TEST(Random, UniformFrequenciesAndReproducible) {
  RandomPolicy p1(33), p2(33);
  std::array<int, kActionCount> counts{};
  const int n = 70000;
  for (int i = 0; i < n; ++i) {
    auto a = p1.act();
    EXPECT_EQ(a, p2.act());
    ++counts[static_cast<int>(a)];
  }
  for (int c : counts)
    EXPECT_NEAR(static_cast<double>(c) / n, 1.0 / 7.0, 0.01);
}

TEST(BuyHold, FlatMidsGiveZeroReturn) {
  const TimeNs t0 = seconds_to_ns(34200);
  auto msgs = std::make_shared<std::vector<MarketMessage>>(
      std::vector<MarketMessage>{
          {t0, MsgType::Add, 1, 1000, 1000000, 1},
          {t0, MsgType::Add, 2, 1000, 1000200, -1},
      });
  EnvConfig cfg = small_config();
  cfg.history_len = 2;
  cfg.episode_end = t0 + 10 * kNsPerSec;
  SignalParams sig;
  auto data = make_episode(msgs, cfg, sig);
  auto result = buy_and_hold_curve(data, cfg);
  EXPECT_EQ(result.shares, cfg.pos_max);
  // Paid the half-spread once; mid never moves afterwards.
  double spread_cost = static_cast<double>(cfg.pos_max) * 100.0;
  EXPECT_NEAR(result.log_return, std::log1p(-spread_cost / cfg.cash0), 1e-12);
}

TEST(BuyHold, OnePercentMidMove) {
  const TimeNs t0 = seconds_to_ns(34200);
  const TimeNs later = t0 + 30 * kNsPerSec;
  auto msgs = std::make_shared<std::vector<MarketMessage>>(
      std::vector<MarketMessage>{
          {t0, MsgType::Add, 1, 10, 1000000, 1},
          {t0, MsgType::Add, 2, 20, 1000200, -1},
          {later, MsgType::ExecuteVisible, 2, 10, 1000200, -1},
          {later + 1, MsgType::ExecuteVisible, 1, 10, 1000000, 1},
          {later + 2, MsgType::Add, 3, 10, 1010200, -1},
          {later + 3, MsgType::Add, 4, 10, 1010000, 1},
      });
  EnvConfig cfg = small_config();
  cfg.history_len = 2;
  cfg.pos_max = 10;
  cfg.pos_min = -10;
  cfg.episode_end = t0 + 60 * kNsPerSec;
  SignalParams sig;
  auto data = make_episode(msgs, cfg, sig);
  auto result = buy_and_hold_curve(data, cfg);
  ASSERT_EQ(result.shares, 10);
  // Exact: 10 shares bought at 1000200, marked at 1010100 at the end.
  double exact = std::log1p((10.0 * (1010100.0 - 1000200.0)) / cfg.cash0);
  EXPECT_NEAR(result.log_return, exact, 1e-12);
  // The spec-style approximation ln(1 + 1% * X * p / M0) is close.
  double approx = std::log1p(0.01 * 10.0 * 1000100.0 / cfg.cash0);
  EXPECT_NEAR(result.log_return, approx, 2e-7);
}

TEST(BuyHold, OneSidedOpeningBookThrows) {
  const TimeNs t0 = seconds_to_ns(34200);
  auto msgs = std::make_shared<std::vector<MarketMessage>>(
      std::vector<MarketMessage>{
          {t0, MsgType::Add, 1, 1000, 1000000, 1},  // bid only
      });
  EnvConfig cfg = small_config();
  cfg.history_len = 2;
  cfg.episode_end = t0 + 10 * kNsPerSec;
  SignalParams sig;
  auto data = make_episode(msgs, cfg, sig);
  EXPECT_THROW(buy_and_hold_curve(data, cfg), std::runtime_error);
}

}  // namespace
