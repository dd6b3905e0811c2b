#include <cmath>
#include <set>
#include <thread>
#include <vector>

#include <gtest/gtest.h>

#include "mnm/rng.hpp"
#include "mnm/specfun.hpp"
#include "support/stats.hpp"

using namespace mnm;
using mnm::testing::ks_one_sample;
using mnm::testing::ks_two_sample;

// Known-answer vectors from the Random123 distribution (kat_vectors).
TEST(Philox, KnownAnswers) {
  using A4 = std::array<std::uint32_t, 4>;
  using A2 = std::array<std::uint32_t, 2>;
  EXPECT_EQ(philox4x32_10(A4{0, 0, 0, 0}, A2{0, 0}),
            (A4{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8}));
  EXPECT_EQ(philox4x32_10(A4{0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff},
                          A2{0xffffffff, 0xffffffff}),
            (A4{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd}));
  EXPECT_EQ(philox4x32_10(A4{0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344},
                          A2{0xa4093822, 0x299f31d0}),
            (A4{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1}));
}

TEST(RandomStream, DeriveIsDeterministic) {
  const RandomStream s(42);
  RandomStream a = s.derive("a");
  RandomStream b = derive_stream(s, "a");
  for (int i = 0; i < 1000; ++i) ASSERT_EQ(a(), b());
  EXPECT_EQ(s.derive("a").path_string(), "a");
  EXPECT_EQ(s.derive("a").derive("rep:3").path_string(), "a/rep:3");
}

TEST(RandomStream, EmptyLabelRejected) {
  EXPECT_THROW(RandomStream(1).derive(""), std::invalid_argument);
}

TEST(RandomStream, SiblingStreamsLookIndependent) {
  const RandomStream s(7);
  RandomStream a = s.derive("a"), b = s.derive("b");
  std::vector<double> xa, xb;
  for (int i = 0; i < 10000; ++i) {
    xa.push_back(a.uniform());
    xb.push_back(b.uniform());
  }
  EXPECT_GT(ks_two_sample(xa, xb).pvalue, 1e-3);
  EXPECT_NE(xa, xb);
}

TEST(RandomStream, PathOrderMatters) {
  const RandomStream s(7);
  RandomStream ab = s.derive("a").derive("b"), ba = s.derive("b").derive("a");
  bool differ = false;
  for (int i = 0; i < 16; ++i) differ |= ab() != ba();
  EXPECT_TRUE(differ);
}

TEST(RandomStream, DistinctLabelsGiveDistinctKeys) {
  const RandomStream s(99);
  std::set<std::uint64_t> keys;
  for (int i = 0; i < 100000; ++i) keys.insert(s.derive("rep:" + std::to_string(i)).key());
  EXPECT_EQ(keys.size(), 100000u);
  EXPECT_NE(RandomStream(1).key(), RandomStream(2).key());
}

TEST(RandomStream, UniformIsOpenUnitInterval) {
  RandomStream s(3);
  std::vector<double> u;
  for (int i = 0; i < 100000; ++i) {
    const double v = s.uniform();
    ASSERT_GT(v, 0.0);
    ASSERT_LT(v, 1.0);
    u.push_back(v);
  }
  EXPECT_GT(ks_one_sample(u, [](double x) { return x; }).pvalue, 1e-3);
}

TEST(RandomStream, StreamsAreIndependentOfThreads) {
  const RandomStream root(5);
  std::vector<double> serial(64), parallel(64);
  for (int i = 0; i < 64; ++i) {
    RandomStream r = root.derive("rep:" + std::to_string(i));
    serial[i] = r.gaussian();
  }
  std::vector<std::thread> ws;
  for (int w = 0; w < 4; ++w) {
    ws.emplace_back([&, w] {
      for (int i = w; i < 64; i += 4) {
        RandomStream r = root.derive("rep:" + std::to_string(i));
        parallel[i] = r.gaussian();
      }
    });
  }
  for (auto& t : ws) t.join();
  EXPECT_EQ(serial, parallel);
}

TEST(Gaussian, MomentsAndReplay) {
  RandomStream s(11);
  const int d = 4, draws = 250000;  // 10^6 coordinates
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(d), sq = Eigen::VectorXd::Zero(d);
  for (int i = 0; i < draws; ++i) {
    const Eigen::VectorXd z = sample_gaussian_vector(d, s);
    sum += z;
    sq += z.cwiseProduct(z);
  }
  std::vector<double> all;
  for (int i = 0; i < d; ++i) {
    const double mu = sum[i] / draws;
    EXPECT_NEAR(mu, 0.0, 0.01);
    EXPECT_NEAR(sq[i] / draws - mu * mu, 1.0, 0.01);
  }
  RandomStream a(12), b(12);
  EXPECT_EQ(sample_gaussian_vector(10, a), sample_gaussian_vector(10, b));
}

TEST(Gaussian, MatchesNormalLaw) {
  RandomStream s(13);
  std::vector<double> z(100000);
  for (double& v : z) v = s.gaussian();
  EXPECT_GT(ks_one_sample(z, std_normal_cdf).pvalue, 1e-3);
}

TEST(Rademacher, Frequency) {
  RandomStream s(17);
  int plus = 0;
  for (int i = 0; i < 100000; ++i) {
    const int r = sample_rademacher(s);
    ASSERT_TRUE(r == 1 || r == -1);
    plus += r == 1;
  }
  EXPECT_NEAR(plus / 1e5, 0.5, 0.005);
}

TEST(Rademacher, CltScaledMeanBounded) {
  const RandomStream root(19);
  for (int run = 0; run < 10; ++run) {
    RandomStream s = root.derive("run:" + std::to_string(run));
    long sum = 0;
    for (int i = 0; i < 100000; ++i) sum += sample_rademacher(s);
    EXPECT_LE(std::abs(static_cast<double>(sum) / 1e5 * std::sqrt(1e5)), 3.0);
  }
  RandomStream a(20), b(20);
  for (int i = 0; i < 100; ++i) ASSERT_EQ(sample_rademacher(a), sample_rademacher(b));
}

TEST(OrthogonalMatrix, Validation) {
  EXPECT_NO_THROW(OrthogonalMatrix::identity(3));
  Eigen::MatrixXd m = Eigen::MatrixXd::Identity(2, 2);
  m(0, 1) = 0.1;
  EXPECT_THROW(OrthogonalMatrix{m}, std::invalid_argument);
  EXPECT_THROW(OrthogonalMatrix{Eigen::MatrixXd::Ones(2, 3)}, std::invalid_argument);
}

TEST(Haar, OrthogonalAcrossDimensions) {
  RandomStream s(23);
  for (int d : {1, 2, 3, 10, 50}) {
    const OrthogonalMatrix u = sample_haar_orthogonal(d, s);
    const Eigen::MatrixXd e =
        u.matrix().transpose() * u.matrix() - Eigen::MatrixXd::Identity(d, d);
    EXPECT_LE(e.cwiseAbs().maxCoeff(), 1e-10) << d;
  }
}

TEST(Haar, OneDimensionalSigns) {
  RandomStream s(29);
  int plus = 0;
  for (int i = 0; i < 10000; ++i) {
    const double u = sample_haar_orthogonal(1, s).matrix()(0, 0);
    ASSERT_EQ(std::abs(u), 1.0);
    plus += u > 0;
  }
  EXPECT_NEAR(plus / 1e4, 0.5, 0.02);
}

TEST(Haar, ProjectionMatchesSphericalLaw) {
  const int d = 3;
  RandomStream s(31), ref(37);
  Eigen::VectorXd f = Eigen::VectorXd::Zero(d);
  f << 0.6, 0.0, 0.8;
  std::vector<double> proj, sphere;
  for (int i = 0; i < 100000; ++i) {
    proj.push_back((sample_haar_orthogonal(d, s).matrix() * f)(0));
    const Eigen::VectorXd z = sample_gaussian_vector(d, ref);
    sphere.push_back(z(0) / z.norm());
  }
  EXPECT_GT(ks_two_sample(proj, sphere).pvalue, 1e-3);
  // In d = 3 the first coordinate of a uniform unit vector is U(-1, 1).
  EXPECT_GT(ks_one_sample(proj, [](double x) { return 0.5 * (x + 1.0); }).pvalue, 1e-3);
}

TEST(Haar, NoSignCorrectionWouldBias) {
  // With the sign fix, the diagonal of U is symmetric about zero.
  RandomStream s(41);
  double diag = 0.0;
  for (int i = 0; i < 20000; ++i) diag += sample_haar_orthogonal(2, s).matrix()(0, 0);
  EXPECT_NEAR(diag / 20000, 0.0, 0.02);
}
