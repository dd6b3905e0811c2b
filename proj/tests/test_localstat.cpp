#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "mnm/error.hpp"
#include "mnm/localstat.hpp"
#include "mnm/specfun.hpp"
#include "support/stats.hpp"

using namespace mnm;
using mnm::testing::band;
using mnm::testing::ks_one_sample;
using mnm::testing::ks_two_sample;
using mnm::testing::mean;
using mnm::testing::variance;

namespace {

Scenario make(int d, int n, int m, double rho, SignalLaw law = SignalLaw::rademacher_scaled) {
  Scenario s;
  s.d = d;
  s.n = n;
  s.m = m;
  s.rho = rho;
  s.law = law;
  return s;
}

TrialSet draw(const Scenario& sc, std::uint64_t seed) {
  RandomStream s(seed);
  return gen_trials(draw_signal(sc, s), sc, s);
}

TrialSet with_rows(TrialMatrix x, int n) {
  TrialSet t;
  t.scenario = make(static_cast<int>(x.cols()), n, static_cast<int>(x.rows()), 0.0,
                    SignalLaw::null);
  t.x = std::move(x);
  return t;
}

}  // namespace

TEST(ChisqNormStats, ZeroRowGivesZero) {
  const TrialSet t = with_rows(TrialMatrix::Zero(3, 4), 10);
  const StatisticVector s = chisq_norm_stats(t);
  EXPECT_EQ(s.kind, StatisticKind::raw);
  for (double v : s.values) EXPECT_EQ(v, 0.0);
}

TEST(ChisqNormStats, NullAndAlternativeMeans) {
  const int d = 5;
  const TrialSet t0 = draw(make(d, 30, 100000, 0.0, SignalLaw::null), 1);
  const double m0 = mean(chisq_norm_stats(t0).values);
  EXPECT_NEAR(m0, d, 3.0 * std::sqrt(2.0 * d / 1e5));

  Scenario alt = make(d, 30, 100000, 0.4, SignalLaw::first_axis);
  const TrialSet t1 = draw(alt, 2);
  const double nc = alt.n * alt.rho * alt.rho;
  EXPECT_NEAR(mean(chisq_norm_stats(t1).values), d + nc,
              3.0 * std::sqrt((2.0 * d + 4.0 * nc) / 1e5));
}

TEST(ChisqPvalues, Examples) {
  StatisticVector s{{0.0, 2.0 * std::numbers::ln2}, StatisticKind::raw, ""};
  const StatisticVector p = chisq_pvalues(s, DegreesOfFreedom(2));
  EXPECT_EQ(p.kind, StatisticKind::pvalue);
  EXPECT_EQ(p.values[0], 1.0);
  EXPECT_NEAR(p.values[1], 0.5, 1e-15);
  StatisticVector wrong{{0.5}, StatisticKind::pvalue, ""};
  EXPECT_THROW(chisq_pvalues(wrong, DegreesOfFreedom(2)), std::invalid_argument);
}

TEST(ChisqPvalues, UniformUnderNull) {
  const TrialSet t = draw(make(3, 30, 100000, 0.0, SignalLaw::null), 3);
  const StatisticVector p = chisq_pvalues(chisq_norm_stats(t), DegreesOfFreedom(3));
  for (double v : p.values) ASSERT_TRUE(v >= 0.0 && v <= 1.0);
  EXPECT_GT(ks_one_sample(p.values, [](double x) { return x; }).pvalue, 1e-3);
  EXPECT_NEAR(mean(p.values), 0.5, band(0.5, 1e5));
}

TEST(Partition, RoundRobin) {
  const Partition p = make_partition(4, 2);
  EXPECT_EQ(p.coordinate(0), 0);
  EXPECT_EQ(p.coordinate(1), 1);
  EXPECT_EQ(p.coordinate(2), 0);
  EXPECT_EQ(p.coordinate(3), 1);
  EXPECT_TRUE(p.balanced());

  const Partition s = make_partition(20, 20);
  for (int b : s.block_sizes()) EXPECT_EQ(b, 1);

  const Partition u = make_partition(7, 3);
  EXPECT_EQ(u.block_sizes(), (std::vector<int>{3, 2, 2}));
  EXPECT_FALSE(u.balanced());

  EXPECT_THROW(make_partition(3, 5), UnsupportedRegimeError);
}

TEST(Partition, BlockSizesDifferByAtMostOne) {
  for (int d = 1; d <= 12; ++d) {
    for (int m = d; m <= 60; ++m) {
      const std::vector<int> b = make_partition(m, d).block_sizes();
      const auto [lo, hi] = std::minmax_element(b.begin(), b.end());
      ASSERT_LE(*hi - *lo, 1);
    }
  }
}

TEST(DirectionalStats, NullVariance) {
  const Scenario sc = make(4, 30, 250000, 0.0, SignalLaw::null);
  const TrialSet t = draw(sc, 5);
  const StatisticVector s = directional_stats(t, make_partition(sc.m, sc.d));
  EXPECT_NEAR(variance(s.values), 1.0, 0.01);
  EXPECT_GT(ks_one_sample(s.values, std_normal_cdf).pvalue, 1e-3);
}

TEST(DirectionalStats, SignalShiftsOwnBlockOnly) {
  const Scenario sc = make(2, 30, 100000, 0.3, SignalLaw::first_axis);
  const TrialSet t = draw(sc, 6);
  const Partition p = make_partition(sc.m, sc.d);
  const StatisticVector s = directional_stats(t, p);
  std::vector<double> b0, b1;
  for (int j = 0; j < sc.m; ++j) (p.coordinate(j) == 0 ? b0 : b1).push_back(s.values[j]);
  const double se = 3.0 / std::sqrt(static_cast<double>(b0.size()));
  EXPECT_NEAR(mean(b0), std::sqrt(30.0) * 0.3, se);
  EXPECT_NEAR(mean(b1), 0.0, se);

  const StatisticVector again = directional_stats(draw(sc, 6), p);
  EXPECT_EQ(s.values, again.values);
}

TEST(ProjectedStats, IdentityMatchesCoordinateOne) {
  const Scenario sc = make(3, 30, 50, 0.4, SignalLaw::first_axis);
  const TrialSet t = draw(sc, 7);
  const StatisticVector s = projected_stats(t, OrthogonalMatrix::identity(3), "eye");
  EXPECT_EQ(s.shared_randomness, "eye");
  for (int j = 0; j < sc.m; ++j) {
    EXPECT_DOUBLE_EQ(s.values[j], std::sqrt(30.0) * t.x(j, 0));
  }
}

TEST(ProjectedStats, NullIsStandardNormal) {
  const Scenario sc = make(5, 30, 100000, 0.0, SignalLaw::null);
  const TrialSet t = draw(sc, 8);
  RandomStream u(9);
  const StatisticVector s = projected_stats(t, sample_haar_orthogonal(sc.d, u));
  EXPECT_GT(ks_one_sample(s.values, std_normal_cdf).pvalue, 1e-3);
}

TEST(ProjectedStats, HaarAveragedLawIsRotationInvariant) {
  // One trial per replicate, a fresh Haar U each time: the law of the
  // projection depends on f only through ||f||.
  const int d = 3;
  Scenario a = make(d, 30, 1, 0.5, SignalLaw::fixed);
  a.fixed_signal = {0.5, 0.0, 0.0};
  Scenario b = a;
  b.fixed_signal = {0.3, 0.0, -0.4};
  const RandomStream root(10);
  std::vector<double> sa, sb;
  for (int r = 0; r < 100000; ++r) {
    RandomStream s = root.derive("rep:" + std::to_string(r));
    RandomStream ua = s.derive("u"), ub = s.derive("u");
    RandomStream da = s.derive("data"), db = s.derive("data");
    sa.push_back(projected_stats(gen_trials(draw_signal(a, da), a, da),
                                 sample_haar_orthogonal(d, ua)).values[0]);
    sb.push_back(projected_stats(gen_trials(draw_signal(b, db), b, db),
                                 sample_haar_orthogonal(d, ub)).values[0]);
  }
  EXPECT_GT(ks_two_sample(sa, sb).pvalue, 1e-3);
}

TEST(LrEvalues, ZeroDirectionGivesOnes) {
  const TrialSet t = draw(make(3, 30, 10, 0.0, SignalLaw::null), 11);
  const StatisticVector e = lr_evalues(t, Eigen::VectorXd::Zero(3));
  EXPECT_EQ(e.kind, StatisticKind::evalue);
  for (double v : e.values) EXPECT_EQ(v, 1.0);
}

TEST(LrEvalues, NullMeanIsOne) {
  const int n = 25;
  const TrialSet t = draw(make(2, n, 1000000, 0.0, SignalLaw::null), 12);
  Eigen::VectorXd g(2);
  g << 0.2, 0.0;  // n ||g||^2 = 1
  const StatisticVector e = lr_evalues(t, g);
  for (double v : e.values) ASSERT_GE(v, 0.0);
  EXPECT_NEAR(mean(e.values), 1.0, 3.0 * std::sqrt((std::exp(1.0) - 1.0) / 1e6));
}

TEST(LrEvalues, AtTheAlternativePoint) {
  const int n = 4;
  Eigen::VectorXd g(2);
  g << 0.5, -0.25;
  TrialMatrix x(1, 2);
  x.row(0) = g.transpose();
  const StatisticVector e = lr_evalues(with_rows(x, n), g);
  EXPECT_NEAR(e.values[0], std::exp(n * g.squaredNorm() / 2.0), 1e-12);
  EXPECT_GE(e.values[0], 1.0);
  EXPECT_NEAR(lr_log_evalues(with_rows(x, n), g).values[0], n * g.squaredNorm() / 2.0, 1e-14);
}

TEST(LrEvalues, OverflowIsClampedAndCounted) {
  TrialMatrix x(2, 1);
  x << 1000.0, 0.0;
  Eigen::VectorXd g(1);
  g << 1.0;
  std::uint64_t overflow = 0;
  const StatisticVector e = lr_evalues(with_rows(x, 10), g, &overflow);
  EXPECT_EQ(e.values[0], kMaxEvalue);
  EXPECT_EQ(overflow, 1u);
}

TEST(MomentBounds, NullAbsoluteMeans) {
  const Scenario sc = make(4, 30, 100000, 0.0, SignalLaw::null);
  const TrialSet t = draw(sc, 13);
  std::vector<double> dir = directional_stats(t, make_partition(sc.m, sc.d)).values;
  for (double& v : dir) v = std::abs(v);
  EXPECT_NEAR(mean(dir), std::sqrt(2.0 / std::numbers::pi), 0.01);
  const auto chi = chisq_norm_stats(t);
  EXPECT_NEAR(mean(chi.values), sc.d, 0.05);
  const auto p = chisq_pvalues(chi, DegreesOfFreedom(sc.d));
  EXPECT_LE(mean(p.values), 1.0);
}

TEST(ChisqNormStats, RotationInvariantInLaw) {
  const int d = 3;
  Scenario a = make(d, 30, 100000, 0.4, SignalLaw::fixed);
  a.fixed_signal = {0.4, 0.0, 0.0};
  Scenario b = a;
  RandomStream q(14);
  const Eigen::VectorXd f = Eigen::Vector3d(0.4, 0.0, 0.0);
  const Eigen::VectorXd qf = sample_haar_orthogonal(d, q).matrix() * f;
  b.fixed_signal = {qf[0], qf[1], qf[2]};
  const auto sa = chisq_norm_stats(draw(a, 15)).values;
  const auto sb = chisq_norm_stats(draw(b, 16)).values;
  EXPECT_GT(ks_two_sample(sa, sb).pvalue, 1e-3);
}
