#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "bscca/error.hpp"
#include "bscca/postprocess.hpp"
#include "oracles.hpp"

using namespace bscca;

namespace {

ChainState make_state(Support delta, std::vector<double> theta, int level = 0) {
  ChainState s;
  s.delta = std::move(delta);
  s.theta = Eigen::Map<Vector>(theta.data(), static_cast<Index>(theta.size()));
  s.level = level;
  return s;
}

ChainTrace trace_with_levels(const std::vector<int>& levels) {
  ChainTrace trace;
  for (int k : levels) trace.states.push_back(make_state({1, 1}, {1.0, 1.0}, k));
  trace.stats.resize(levels.size() - 1);
  return trace;
}

}  // namespace

TEST(BurnIn, AllColdKeepsLastQuarter) {
  for (Index n : {4, 8, 10, 13, 100}) {
    auto trace = trace_with_levels(std::vector<int>(static_cast<std::size_t>(n + 1), 0));
    auto idx = extract_posterior_samples(trace, n);
    EXPECT_EQ(static_cast<Index>(idx.size()), n / 4 + 1) << n;
    EXPECT_EQ(idx.back(), n);
    EXPECT_GE(4 * idx.front(), 3 * n);
    EXPECT_LT(4 * (idx.front() - 1), 3 * n);
  }
}

TEST(BurnIn, NoColdVisitsIsAnError) {
  std::vector<int> levels(101, 0);
  for (int t = 75; t <= 100; ++t) levels[static_cast<std::size_t>(t)] = 1;
  auto trace = trace_with_levels(levels);
  try {
    extract_posterior_samples(trace, 100);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kEmptySample);
  }
}

TEST(BurnIn, AlternatingLevels) {
  const Index n = 101;
  std::vector<int> levels(static_cast<std::size_t>(n + 1));
  for (Index t = 0; t <= n; ++t) levels[static_cast<std::size_t>(t)] = static_cast<int>(t % 2);
  auto idx = extract_posterior_samples(trace_with_levels(levels), n);
  // direct filter
  std::vector<Index> expect;
  for (Index t = 0; t <= n; ++t)
    if (4 * t >= 3 * n && t % 2 == 0) expect.push_back(t);
  EXPECT_EQ(idx, expect);
}

TEST(BurnIn, WrongTraceLength) {
  EXPECT_THROW(extract_posterior_samples(trace_with_levels({0, 0, 0}), 5), Error);
}

TEST(PerSample, AllOnes) {
  std::vector<ChainState> s{make_state({1, 1, 1, 1}, {1, 1, 1, 1})};
  auto est = per_sample_estimates(s, 2);
  ASSERT_EQ(est.vx.size(), 1u);
  const double r = 1 / std::sqrt(2.0);
  EXPECT_NEAR(est.vx[0][0], r, 1e-15);
  EXPECT_NEAR(est.vx[0][1], r, 1e-15);
  EXPECT_NEAR(est.vy[0][0], r, 1e-15);
  EXPECT_NEAR(est.vy[0][1], r, 1e-15);
}

TEST(PerSample, SignFlipAndUnitNorm) {
  std::mt19937_64 gen(1);
  for (int i = 0; i < 50; ++i) {
    auto s = oracle::random_state(8, gen);
    s.delta[5] = 1;
    auto neg = s;
    neg.theta = -s.theta;
    std::vector<ChainState> v{s, neg};
    auto est = per_sample_estimates(v, 4);
    ASSERT_EQ(est.vx.size(), 2u);
    EXPECT_NEAR(est.vx[0].norm(), 1.0, 1e-12);
    EXPECT_NEAR(est.vy[0].norm(), 1.0, 1e-12);
    EXPECT_EQ(est.vx[1], (-est.vx[0]).eval());
    EXPECT_EQ(est.vy[1], (-est.vy[0]).eval());
  }
}

TEST(PerSample, EmptyBlockIsSkipped) {
  std::vector<ChainState> s{make_state({1, 0, 0, 0}, {1, 1, 1, 1}),
                            make_state({1, 0, 1, 0}, {1, 1, 1, 1})};
  auto est = per_sample_estimates(s, 2);
  EXPECT_EQ(est.skipped, 1);
  EXPECT_EQ(est.kept, (std::vector<Index>{1}));
}

TEST(SupportMode, Cases) {
  auto a = make_state({1, 0, 1}, {1, 1, 1});
  auto b = make_state({0, 1, 1}, {1, 1, 1});
  std::vector<ChainState> same(5, a);
  EXPECT_EQ(support_mode(same), a.delta);
  std::vector<ChainState> maj;
  for (int i = 0; i < 40; ++i) maj.push_back(b);
  for (int i = 0; i < 60; ++i) maj.push_back(a);
  EXPECT_EQ(support_mode(maj), a.delta);
  // 50/50: b seen first
  std::vector<ChainState> tie{b, a, a, b};
  EXPECT_EQ(support_mode(tie), b.delta);
  std::vector<ChainState> tie2{a, b, b, a};
  EXPECT_EQ(support_mode(tie2), a.delta);
  EXPECT_THROW(support_mode(std::vector<ChainState>{}), Error);
}

TEST(SupportMode, SubsetOfSampledSupports) {
  std::mt19937_64 gen(2);
  for (int rep = 0; rep < 20; ++rep) {
    std::vector<ChainState> s;
    for (int i = 0; i < 7; ++i) s.push_back(oracle::random_state(6, gen));
    auto mode = support_mode(s);
    bool found = false;
    for (const auto& x : s) found = found || x.delta == mode;
    EXPECT_TRUE(found);
  }
}

TEST(PointEstimate, EqualSamples) {
  auto s = make_state({1, 1, 0, 1, 1, 0}, {3, 4, 9, 1, 0, 9});
  s.theta[4] = 2;
  std::vector<ChainState> v(4, s);
  auto [x, y] = point_estimate(v, s.delta, 3);
  EXPECT_NEAR(x[0], 0.6, 1e-15);
  EXPECT_NEAR(x[1], 0.8, 1e-15);
  EXPECT_EQ(x[2], 0.0);
  EXPECT_NEAR(y[0], 1 / std::sqrt(5.0), 1e-15);
  EXPECT_NEAR(y[1], 2 / std::sqrt(5.0), 1e-15);
}

TEST(PointEstimate, SignAlignment) {
  auto s = make_state({1, 1, 1, 1}, {1, 2, 3, 4});
  auto n = s;
  n.theta = -s.theta;
  std::vector<ChainState> v{s, n};
  auto [x, y] = point_estimate(v, s.delta, 2);
  EXPECT_NEAR(x[0], 1 / std::sqrt(5.0), 1e-15);
  EXPECT_NEAR(y[1], 4 / 5.0, 1e-15);
}

TEST(PointEstimate, HandComputedMaskedMean) {
  // px = 2, py = 2; mask drops coordinate 1
  std::vector<ChainState> v{make_state({1, 1, 1, 0}, {3, 4, 1, 0}),
                            make_state({1, 0, 1, 1}, {1, 0, 0, 2}),
                            make_state({1, 1, 1, 1}, {0.6, 0.8, -0.6, -0.8})};
  Support bar{1, 0, 1, 1};
  // per-sample unit blocks: (0.6,0.8 | 1,0), (1,0 | 0,1), (0.6,0.8 | -0.6,-0.8)
  // masked: (0.6,0 | 1,0), (1,0 | 0,1), (0.6,0 | -0.6,-0.8)
  // signs vs first (0.6,0,1,0): +0.6, +0.36-0.6<0 -> flip third to (-0.6,0 | 0.6,0.8)
  // sum: (1.0, 0 | 1.6, 1.8)
  auto [x, y] = point_estimate(v, bar, 2);
  EXPECT_NEAR(x[0], 1.0, 1e-15);
  EXPECT_EQ(x[1], 0.0);
  const double ny = std::hypot(1.6, 1.8);
  EXPECT_NEAR(y[0], 1.6 / ny, 1e-15);
  EXPECT_NEAR(y[1], 1.8 / ny, 1e-15);
}

TEST(PointEstimate, DegenerateBlock) {
  std::vector<ChainState> v{make_state({1, 1, 1, 1}, {1, 1, 1, 1})};
  try {
    point_estimate(v, Support{0, 0, 1, 1}, 2);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kDegenerateEstimate);
  }
}

TEST(Mse, Examples) {
  Vector v(3), w(3);
  v << 1, 0, 0;
  w << 0, 1, 0;
  EXPECT_EQ(mse(v, v), 0.0);
  EXPECT_EQ(mse(-v, v), 0.0);
  EXPECT_DOUBLE_EQ(mse(v, w), 2.0);
}

TEST(Mse, SignInvariantAndBounded) {
  std::mt19937_64 gen(3);
  std::normal_distribution<double> nd;
  for (int i = 0; i < 200; ++i) {
    Vector a(5), b(5);
    for (Index j = 0; j < 5; ++j) { a[j] = nd(gen); b[j] = nd(gen); }
    a.normalize();
    b.normalize();
    const double m = mse(a, b);
    EXPECT_GE(m, 0.0);
    EXPECT_LE(m, 2.0 + 1e-12);
    EXPECT_EQ(mse(-a, b), m);
    EXPECT_EQ(mse(a, -b), m);
  }
}

TEST(Rates, Examples) {
  Vector star = Vector::Zero(10);
  star[0] = star[5] = star[9] = 1;
  EXPECT_EQ(tpr_tnr(star, star).tpr, 1.0);
  EXPECT_EQ(tpr_tnr(star, star).tnr, 1.0);
  Vector all = Vector::Ones(10);
  EXPECT_EQ(tpr_tnr(all, star).tpr, 1.0);
  EXPECT_EQ(tpr_tnr(all, star).tnr, 0.0);
  Vector v = star;
  v[9] = 0;
  v[2] = 0.1;
  auto r = tpr_tnr(v, star);
  EXPECT_DOUBLE_EQ(r.tpr, 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(r.tnr, 6.0 / 7.0);
  try {
    tpr_tnr(v, Vector::Zero(10));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kUndefinedRate);
  }
  EXPECT_THROW(tpr_tnr(v, Vector::Ones(10)), Error);
}

TEST(Inclusion, Examples) {
  std::vector<ChainState> ones(3, make_state({1, 1}, {1, 1}));
  EXPECT_EQ(inclusion_probabilities(ones), Vector::Ones(2));
  std::vector<ChainState> alt;
  for (int i = 0; i < 10; ++i) alt.push_back(make_state({1, static_cast<std::uint8_t>(i % 2)}, {1, 1}));
  EXPECT_DOUBLE_EQ(inclusion_probabilities(alt)[1], 0.5);
  std::vector<ChainState> five{make_state({1, 0, 1}, {1, 1, 1}), make_state({1, 1, 0}, {1, 1, 1}),
                               make_state({0, 1, 1}, {1, 1, 1}), make_state({1, 0, 0}, {1, 1, 1}),
                               make_state({1, 0, 1}, {1, 1, 1})};
  auto p = inclusion_probabilities(five);
  EXPECT_DOUBLE_EQ(p[0], 0.8);
  EXPECT_DOUBLE_EQ(p[1], 0.4);
  EXPECT_DOUBLE_EQ(p[2], 0.6);
}

TEST(Inclusion, ConsensusAgreesWithMode) {
  auto a = make_state({1, 0, 1, 1}, {1, 1, 1, 1});
  std::vector<ChainState> v(6, a);
  auto p = inclusion_probabilities(v);
  auto mode = support_mode(v);
  for (Index j = 0; j < 4; ++j) EXPECT_EQ(p[j] == 1.0, mode[static_cast<std::size_t>(j)] == 1);
}

TEST(Report, FieldsAndInvariants) {
  std::mt19937_64 gen(4);
  std::vector<ChainState> s;
  for (int i = 0; i < 30; ++i) {
    auto x = oracle::random_state(8, gen);
    x.delta[0] = x.delta[4] = 1;
    s.push_back(x);
  }
  s.push_back(make_state({0, 0, 0, 0, 1, 1, 1, 1}, {1, 1, 1, 1, 1, 1, 1, 1}));  // skipped
  Truth truth{Vector::Zero(4), Vector::Zero(4)};
  truth.vx[0] = 1;
  truth.vy[0] = 1;
  auto r = build_report(s, 4, truth);
  EXPECT_EQ(r.samples, 31);
  EXPECT_EQ(r.skipped, 1);
  EXPECT_NEAR(r.vx_bar.norm(), 1.0, 1e-12);
  EXPECT_NEAR(r.vy_bar.norm(), 1.0, 1e-12);
  EXPECT_TRUE((r.inclusion_probs.array() >= 0).all() && (r.inclusion_probs.array() <= 1).all());
  ASSERT_TRUE(r.mse_x && r.tpr_y && r.point_tnr_x);
  EXPECT_EQ(*r.tpr_x, 1.0);  // coordinate 0 always selected
  EXPECT_EQ(*r.point_mse_x, mse(r.vx_bar, truth.vx));
  auto nt = build_report(s, 4);
  EXPECT_FALSE(nt.mse_x.has_value());
  EXPECT_EQ(nt.delta_bar, r.delta_bar);
}
