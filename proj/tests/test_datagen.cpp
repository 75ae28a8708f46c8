#include "lobsim/datagen.hpp"

#include <gtest/gtest.h>

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include "lobsim/replay.hpp"

using namespace lobsim;

namespace {

std::string temp_path(const std::string& name) {
  return std::string(::testing::TempDir()) + name;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

FlowModel short_model(std::uint64_t seed, double secs = 120.0) {
  FlowModel m;
  m.seed = seed;
  m.session_end = m.session_start + static_cast<TimeNs>(secs * kNsPerSec);
  return m;
}

TEST(Datagen, DeterministicUnderFixedSeed) {
  auto m1 = temp_path("gen_a_message.csv"), b1 = temp_path("gen_a_book.csv");
  auto m2 = temp_path("gen_b_message.csv"), b2 = temp_path("gen_b_book.csv");
  auto s1 = generate_day(short_model(42), m1, b1);
  auto s2 = generate_day(short_model(42), m2, b2);
  EXPECT_EQ(s1.rows, s2.rows);
  EXPECT_EQ(slurp(m1), slurp(m2));
  EXPECT_EQ(slurp(b1), slurp(b2));
  EXPECT_GT(s1.rows, 100u);
  for (auto p : {m1, b1, m2, b2}) std::remove(p.c_str());
}

TEST(Datagen, GeneratedPairPassesReplayFidelity) {
  auto mp = temp_path("gen_fid_message.csv"), bp = temp_path("gen_fid_book.csv");
  generate_day(short_model(7, 180.0), mp, bp);
  auto report = check_replay_fidelity(mp, bp);
  EXPECT_GT(report.rows, 0u);
  EXPECT_EQ(report.mismatched_rows, 0u);
  EXPECT_EQ(report.anomalies, 0u);
  std::remove(mp.c_str());
  std::remove(bp.c_str());
}

TEST(Datagen, LoadableAsSession) {
  auto mp = temp_path("gen_sess_message.csv"), bp = temp_path("gen_sess_book.csv");
  generate_day(short_model(3, 60.0), mp, bp);
  auto session = ReplaySession::load_day(mp, bp);
  EXPECT_EQ(session.cursor(), 0u);
  session.advance_until(session.messages().back().time);
  EXPECT_TRUE(session.exhausted());
  EXPECT_EQ(session.stats().anomalies, 0u);
  EXPECT_TRUE(session.book().check_invariants());
  std::remove(mp.c_str());
  std::remove(bp.c_str());
}

TEST(Datagen, DoublingRatesRoughlyDoublesMessages) {
  auto mp1 = temp_path("gen_r1_message.csv"), bp1 = temp_path("gen_r1_book.csv");
  auto mp2 = temp_path("gen_r2_message.csv"), bp2 = temp_path("gen_r2_book.csv");
  FlowModel base = short_model(11, 300.0);
  FlowModel twice = base;
  twice.add_rate *= 2;
  twice.cancel_rate *= 2;
  twice.delete_rate *= 2;
  twice.execute_rate *= 2;
  auto s1 = generate_day(base, mp1, bp1);
  auto s2 = generate_day(twice, mp2, bp2);
  double ratio = static_cast<double>(s2.rows) / static_cast<double>(s1.rows);
  // Poisson event count plus per-maker expansion; allow a generous band
  // around the x2 target.
  EXPECT_GT(ratio, 1.6);
  EXPECT_LT(ratio, 2.4);
  for (auto p : {mp1, bp1, mp2, bp2}) std::remove(p.c_str());
}

TEST(Datagen, MidMovesOverTheDay) {
  auto mp = temp_path("gen_mid_message.csv"), bp = temp_path("gen_mid_book.csv");
  auto stats = generate_day(short_model(5, 300.0), mp, bp);
  // The bounded walk should move the mid by at least a few ticks.
  EXPECT_GT(stats.max_mid2 - stats.min_mid2, 2 * 5 * kDefaultTick);
  std::remove(mp.c_str());
  std::remove(bp.c_str());
}

}  // namespace
