#include "lobsim/signal.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "lobsim/datagen.hpp"

using namespace lobsim;

namespace {

TEST(Signal, ForwardReturnConstantPathIsZero) {
  std::vector<double> mids(11, 100.0);
  auto r = smoothed_forward_return(mids, 10);
  ASSERT_TRUE(r.has_value());
  EXPECT_DOUBLE_EQ(*r, 0.0);
}

TEST(Signal, ForwardReturnOnePercent) {
  std::vector<double> mids{100.0};
  for (int i = 0; i < 10; ++i) mids.push_back(101.0);
  auto r = smoothed_forward_return(mids, 10);
  ASSERT_TRUE(r.has_value());
  EXPECT_NEAR(*r, 0.01, 1e-15);
}

TEST(Signal, ForwardReturnSymmetricAlternationIsZero) {
  std::vector<double> mids{100.0};
  for (int i = 0; i < 5; ++i) {
    mids.push_back(101.0);
    mids.push_back(99.0);
  }
  auto r = smoothed_forward_return(mids, 10);
  ASSERT_TRUE(r.has_value());
  EXPECT_NEAR(*r, 0.0, 1e-15);
}

TEST(Signal, ForwardReturnTruncatesAtEpisodeEnd) {
  std::vector<double> mids{100.0, 102.0, 104.0};  // only 2 future samples
  auto r = smoothed_forward_return(mids, 10);
  ASSERT_TRUE(r.has_value());
  EXPECT_NEAR(*r, 0.03, 1e-15);
  std::vector<double> only_now{100.0};
  EXPECT_EQ(smoothed_forward_return(only_now, 10).value(), 0.0);
}

TEST(Signal, ForwardReturnUndefinedOnNan) {
  std::vector<double> mids{100.0, std::nan(""), 101.0};
  EXPECT_FALSE(smoothed_forward_return(mids, 10).has_value());
  std::vector<double> bad_now{std::nan(""), 100.0};
  EXPECT_FALSE(smoothed_forward_return(bad_now, 10).has_value());
}

TEST(Signal, ClassifyCases) {
  SignalParams p;
  p.k = 4e-5;
  p.a_high = 1.6;
  p.a_low = 1.0;
  auto up = classify(5e-5, p);
  EXPECT_EQ(up.cls, SignalClass::Up);
  EXPECT_DOUBLE_EQ(up.alpha[0], 1.0);
  EXPECT_DOUBLE_EQ(up.alpha[1], 1.0);
  EXPECT_DOUBLE_EQ(up.alpha[2], 1.6);

  auto down = classify(-5e-5, p);
  EXPECT_EQ(down.cls, SignalClass::Down);
  EXPECT_DOUBLE_EQ(down.alpha[0], 1.6);

  // Boundaries: -k is stable, +k is up.
  EXPECT_EQ(classify(-4e-5, p).cls, SignalClass::Stable);
  EXPECT_EQ(classify(4e-5, p).cls, SignalClass::Up);
  EXPECT_EQ(classify(0.0, p).cls, SignalClass::Stable);
}

TEST(Signal, BlendFixedPointAndPhiOneLimit) {
  SignalState s;
  s.d = {0.5, 0.3, 0.2};
  auto fixed = blend(SignalState{}, {1.0 / 3, 1.0 / 3, 1.0 / 3}, 0.9);
  EXPECT_NEAR(fixed.d[0], 1.0 / 3, 1e-15);
  EXPECT_NEAR(fixed.d[1], 1.0 / 3, 1e-15);
  auto unchanged = blend(s, {0.9, 0.05, 0.05}, 1.0);
  EXPECT_DOUBLE_EQ(unchanged.d[0], 0.5);
  EXPECT_DOUBLE_EQ(unchanged.d[1], 0.3);
  EXPECT_DOUBLE_EQ(unchanged.d[2], 0.2);
}

TEST(Signal, DirichletSampleMeanMatchesAlphaRatio) {
  Rng rng(99);
  std::array<double, 3> alpha{1.0, 1.0, 1.6};
  const int n = 100000;
  std::array<double, 3> mean{};
  for (int i = 0; i < n; ++i) {
    auto x = rng.dirichlet(alpha);
    for (int j = 0; j < 3; ++j) mean[j] += x[j];
  }
  double a0 = alpha[0] + alpha[1] + alpha[2];
  for (int j = 0; j < 3; ++j) {
    mean[j] /= n;
    double expect = alpha[j] / a0;
    double var = alpha[j] * (a0 - alpha[j]) / (a0 * a0 * (a0 + 1.0));
    double tol = 3.0 * std::sqrt(var / n);
    EXPECT_NEAR(mean[j], expect, tol) << "component " << j;
  }
}

TEST(Signal, SimplexPreservedOverLongRun) {
  SignalParams p;
  Rng rng(5);
  SignalState s;
  for (int i = 0; i < 50000; ++i) {
    double r = (rng.uniform() - 0.5) * 4e-4;
    s = step(s, r, p, rng);
    ASSERT_TRUE(s.on_simplex(1e-12)) << "step " << i;
  }
}

// On a stationary stretch (constant class) the signal is an AR(1) with
// iid Dirichlet innovations, so the lag-1 autocorrelation equals phi.
TEST(Signal, Lag1AutocorrelationMatchesPhi) {
  SignalParams p;
  p.phi = 0.9;
  Rng rng(17);
  SignalState s;
  const int n = 100000;
  std::vector<double> xs;
  xs.reserve(n);
  for (int i = 0; i < n; ++i) {
    s = step(s, 1e-3, p, rng);  // always "up"
    xs.push_back(s.d[2]);
  }
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= n;
  double num = 0.0, den = 0.0;
  for (int i = 0; i + 1 < n; ++i) {
    num += (xs[i] - mean) * (xs[i + 1] - mean);
  }
  for (double x : xs) den += (x - mean) * (x - mean);
  double rho = num / den;
  EXPECT_NEAR(rho, p.phi, 0.05);
}

TEST(Signal, ConfusionMatrixPerfectSignalIsIdentity) {
  std::vector<SignalState> sig(3);
  sig[0].d = {1.0, 0.0, 0.0};
  sig[1].d = {0.0, 1.0, 0.0};
  sig[2].d = {0.0, 0.0, 1.0};
  std::vector<SignalClass> real{SignalClass::Down, SignalClass::Stable,
                                SignalClass::Up};
  auto cm = confusion_matrix(sig, real);
  auto rows = cm.row_normalized();
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c)
      EXPECT_DOUBLE_EQ(rows[r][c], r == c ? 1.0 : 0.0);
  EXPECT_DOUBLE_EQ(cm.mean_diagonal(), 1.0);
}

TEST(Signal, PureNoiseConfusionRowsAreUniform) {
  SignalParams p;
  p.a_high = 1.0;  // no information
  p.a_low = 1.0;
  p.phi = 0.01;    // nearly memoryless
  Rng rng(23);
  SignalState s;
  std::vector<SignalState> sig;
  std::vector<SignalClass> real;
  const int n = 60000;
  for (int i = 0; i < n; ++i) {
    double r = (i % 3 == 0) ? 1e-3 : (i % 3 == 1 ? -1e-3 : 0.0);
    s = step(s, r, p, rng);
    sig.push_back(s);
    real.push_back(classify(r, p).cls);
  }
  auto rows = confusion_matrix(sig, real).row_normalized();
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c)
      EXPECT_NEAR(rows[r][c], 1.0 / 3.0, 0.025) << r << "," << c;
}

TEST(Signal, ConfusionMatrixRejectsEmptyOrMisaligned) {
  std::vector<SignalState> sig(2);
  std::vector<SignalClass> real(1, SignalClass::Up);
  EXPECT_THROW(confusion_matrix({}, {}), std::invalid_argument);
  EXPECT_THROW(confusion_matrix(sig, real), std::invalid_argument);
}

TEST(Signal, TrackHoldsPreviousStateWhenMidUndefined) {
  SignalParams p;
  std::vector<double> mids(40, std::nan(""));
  for (std::size_t i = 20; i < mids.size(); ++i) mids[i] = 100.0;
  auto track = build_signal_track(mids, kNsPerSec / 10, p, 3);
  ASSERT_EQ(track.size(), mids.size());
  for (std::size_t i = 0; i < 10; ++i) {
    EXPECT_EQ(track.defined[i], 0);
    EXPECT_NEAR(track.states[i].d[0], 1.0 / 3.0, 1e-15);  // initial state held
  }
  EXPECT_EQ(track.defined[25], 1);
}

TEST(Signal, MeanDiagonalIncreasesWithInformativeness) {
  // Same realized-class path, increasing a_high: the confusion diagonal
  // must be ordered. Uses a synthetic day's mid path.
  auto mp = std::string(::testing::TempDir()) + "sig_message.csv";
  auto bp = std::string(::testing::TempDir()) + "sig_book.csv";
  FlowModel model;
  model.seed = 31;
  model.session_end = model.session_start + 600 * kNsPerSec;
  generate_day(model, mp, bp);
  auto msgs = read_message_file(mp);
  auto mids = historical_mid_path(msgs, model.session_start, model.session_end,
                                  kNsPerSec / 10);
  double prev = -1.0;
  for (double a : {1.1, 1.3, 1.6}) {
    SignalParams p;
    p.a_high = a;
    auto track = build_signal_track(mids, kNsPerSec / 10, p, 77);
    auto cm = confusion_matrix(track.states, track.realized);
    EXPECT_GT(cm.mean_diagonal(), prev) << "a=" << a;
    prev = cm.mean_diagonal();
  }
  std::remove(mp.c_str());
  std::remove(bp.c_str());
}

TEST(Signal, UpDownShareNearCalibrationTarget) {
  auto mp = std::string(::testing::TempDir()) + "cal_message.csv";
  auto bp = std::string(::testing::TempDir()) + "cal_book.csv";
  FlowModel model;
  model.seed = 13;
  model.session_end = model.session_start + 900 * kNsPerSec;
  generate_day(model, mp, bp);
  auto msgs = read_message_file(mp);
  auto mids = historical_mid_path(msgs, model.session_start, model.session_end,
                                  kNsPerSec / 10);
  SignalParams p;  // k = 4e-5
  auto track = build_signal_track(mids, kNsPerSec / 10, p, 7);
  std::int64_t updown = 0, total = 0;
  for (std::size_t i = 0; i < track.size(); ++i) {
    if (!track.defined[i]) continue;
    ++total;
    if (track.realized[i] != SignalClass::Stable) ++updown;
  }
  ASSERT_GT(total, 0);
  double share = static_cast<double>(updown) / total;
  EXPECT_NEAR(share, 0.85, 0.10);
  std::remove(mp.c_str());
  std::remove(bp.c_str());
}

}  // namespace
