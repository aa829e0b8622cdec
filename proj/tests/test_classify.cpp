#include <gtest/gtest.h>

#include <numeric>

#include "helpers.hpp"
#include "videc/classify.hpp"

using namespace videc;

namespace {

/// Element-wise transcription of the analytic intensity.
double gamma_by_hand(const Eigen::MatrixXd &x) {
  const auto n = static_cast<std::size_t>(x.rows());
  const auto d = static_cast<std::size_t>(x.cols());
  std::vector<double> mu(d, 0.0);
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t i = 0; i < d; ++i)
      mu[i] += x(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(i)) / static_cast<double>(n);
  auto z = [&](std::size_t k, std::size_t i) {
    return x(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(i)) - mu[i];
  };
  const double nn = static_cast<double>(n);
  std::vector<std::vector<double>> s(d, std::vector<double>(d, 0.0));
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) {
      for (std::size_t k = 0; k < n; ++k)
        s[i][j] += z(k, i) * z(k, j);
      s[i][j] /= nn - 1.0;
    }
  double nu = 0.0;
  for (std::size_t i = 0; i < d; ++i)
    nu += s[i][i] / static_cast<double>(d);
  double var_sum = 0.0, target = 0.0;
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) {
      double wbar = 0.0;
      for (std::size_t k = 0; k < n; ++k)
        wbar += z(k, i) * z(k, j) / nn;
      double v = 0.0;
      for (std::size_t k = 0; k < n; ++k)
        v += (z(k, i) * z(k, j) - wbar) * (z(k, i) * z(k, j) - wbar);
      var_sum += nn / ((nn - 1.0) * (nn - 1.0) * (nn - 1.0)) * v;
      const double t = s[i][j] - (i == j ? nu : 0.0);
      target += t * t;
    }
  return target > 0.0 ? std::clamp(var_sum / target, 0.0, 1.0) : 0.0;
}

Eigen::MatrixXd gaussian(Eigen::Index n, Eigen::Index d, std::mt19937_64 &rng) {
  std::normal_distribution<double> normal;
  Eigen::MatrixXd x(n, d);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < d; ++j)
      x(i, j) = normal(rng);
  return x;
}

Eigen::VectorXd column_mean(const Eigen::MatrixXd &x) { return x.colwise().mean().transpose(); }

struct Blobs {
  Eigen::MatrixXd x;
  std::vector<std::size_t> y;
  std::vector<std::string> classes;
};

Blobs blobs(std::size_t K, Eigen::Index d, std::size_t per_class, double spread, std::uint64_t seed) {
  auto rng = make_rng(seed, {3});
  std::normal_distribution<double> normal;
  Blobs b;
  b.x.resize(static_cast<Eigen::Index>(K * per_class), d);
  const Eigen::MatrixXd centers = spread * gaussian(static_cast<Eigen::Index>(K), d, rng);
  const Eigen::MatrixXd mix = Eigen::MatrixXd::Identity(d, d) + 0.3 * gaussian(d, d, rng);
  for (std::size_t k = 0; k < K; ++k)
    b.classes.push_back("k" + std::to_string(k));
  for (std::size_t i = 0; i < K * per_class; ++i) {
    const std::size_t k = i % K;
    b.y.push_back(k);
    Eigen::VectorXd noise(d);
    for (auto &v : noise)
      v = normal(rng);
    b.x.row(static_cast<Eigen::Index>(i)) = centers.row(static_cast<Eigen::Index>(k)) + (mix * noise).transpose();
  }
  return b;
}

} // namespace

// ---- shrinkage ------------------------------------------------------------------

TEST(Shrinkage, FixedIntegerFixture) {
  Eigen::MatrixXd x(5, 3);
  x << 1, 2, 3, 4, 0, 2, 2, 5, 1, 7, 1, 0, 3, 3, 6;
  const auto sh = shrinkage_gamma(x, column_mean(x));
  EXPECT_NEAR(sh.gamma, gamma_by_hand(x), 1e-10);
  const Eigen::MatrixXd z = x.rowwise() - x.colwise().mean();
  EXPECT_NEAR(sh.nu, (z.transpose() * z / 4.0).trace() / 3.0, 1e-12);
}

TEST(Shrinkage, RandomFixturesMatchTranscription) {
  auto rng = make_rng(4, {});
  std::uniform_int_distribution<int> dn(2, 30), dd(1, 12);
  for (int rep = 0; rep < 100; ++rep) {
    const auto x = gaussian(dn(rng), dd(rng), rng);
    const auto sh = shrinkage_gamma(x, column_mean(x));
    EXPECT_NEAR(sh.gamma, gamma_by_hand(x), 1e-10);
    EXPECT_GE(sh.gamma, 0.0);
    EXPECT_LE(sh.gamma, 1.0);
  }
}

TEST(Shrinkage, LargeSampleShrinksLittle) {
  auto rng = make_rng(5, {});
  Eigen::MatrixXd scale = Eigen::MatrixXd::Zero(4, 4);
  scale.diagonal() << 3.0, 1.0, 0.5, 0.2;
  scale(0, 1) = 0.8;
  const Eigen::MatrixXd x = gaussian(10000, 4, rng) * scale;
  EXPECT_LT(shrinkage_gamma(x, column_mean(x)).gamma, 0.05);
}

TEST(Shrinkage, SphericalAndOneDimensionalAreZero) {
  Eigen::MatrixXd x(4, 2);
  x << 1, 0, -1, 0, 0, 1, 0, -1;
  EXPECT_EQ(shrinkage_gamma(x, column_mean(x)).gamma, 0.0);
  Eigen::MatrixXd y(3, 1);
  y << 1, 2, 4;
  EXPECT_EQ(shrinkage_gamma(y, column_mean(y)).gamma, 0.0);
}

TEST(Shrinkage, NeedsTwoSamples) {
  EXPECT_THROW(shrinkage_gamma(Eigen::MatrixXd::Ones(1, 3), Eigen::VectorXd::Zero(3)), ConfigError);
}

// ---- RLDA -------------------------------------------------------------------------

TEST(Rlda, SeparableBlobs) {
  auto rng = make_rng(6, {});
  std::normal_distribution<double> normal(0.0, 0.01);
  Eigen::MatrixXd x(40, 5);
  std::vector<std::size_t> y;
  for (Eigen::Index i = 0; i < 40; ++i) {
    for (Eigen::Index j = 0; j < 5; ++j)
      x(i, j) = normal(rng);
    x(i, 0) += i % 2 ? -10.0 : 10.0;
    y.push_back(static_cast<std::size_t>(i % 2));
  }
  const auto m = fit_rlda(x, y, {"pos", "neg"});
  EXPECT_EQ(predict_batch(m, x), y);
}

TEST(Rlda, SolveResidualAndInvariants) {
  const auto b = blobs(6, 36, 90, 1.0, 7);
  const auto m = fit_rlda(b.x, b.y, b.classes);
  for (Eigen::Index k = 0; k < 6; ++k)
    EXPECT_LT((m.covariance * m.weights.row(k).transpose() - m.class_means.row(k).transpose()).norm(), 1e-8);
  EXPECT_GE(m.gamma, 0.0);
  EXPECT_LE(m.gamma, 1.0);
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m.covariance);
  EXPECT_GT(es.eigenvalues().minCoeff(), 0.0);
  EXPECT_LT((m.covariance - m.covariance.transpose()).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_NEAR(m.priors.sum(), 1.0, 1e-15);
}

TEST(Rlda, PooledCovarianceDividesByNMinusK) {
  const auto b = blobs(3, 4, 10, 2.0, 8);
  RldaOptions opt;
  opt.fixed_gamma = 0.0;
  const auto m = fit_rlda(b.x, b.y, b.classes, opt);
  Eigen::MatrixXd pooled = Eigen::MatrixXd::Zero(4, 4);
  for (Eigen::Index i = 0; i < b.x.rows(); ++i) {
    const Eigen::VectorXd r = b.x.row(i) - m.class_means.row(static_cast<Eigen::Index>(b.y[static_cast<std::size_t>(i)]));
    pooled += r * r.transpose();
  }
  pooled /= 27.0;
  EXPECT_LT((m.covariance - pooled).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Rlda, OwnMeanClassifiedAsOwnClass) {
  const auto b = blobs(4, 6, 30, 8.0, 9);
  const auto m = fit_rlda(b.x, b.y, b.classes);
  for (Eigen::Index k = 0; k < 4; ++k)
    EXPECT_EQ(predict(m, m.class_means.row(k).transpose()).label_index, static_cast<std::size_t>(k));
}

TEST(Rlda, TieGoesToEarlierClass) {
  Eigen::MatrixXd x(4, 1);
  x << 1.0, 1.5, -1.0, -1.5;
  const std::vector<std::size_t> y{0, 0, 1, 1};
  // Symmetric means +-1.25 with equal priors: x = 0 scores equal.
  const auto m = fit_rlda(x, y, {"first", "second"});
  const auto p = predict(m, Eigen::VectorXd::Zero(1));
  EXPECT_EQ(p.scores(0), p.scores(1));
  EXPECT_EQ(p.label, "first");
  const auto swapped = fit_rlda(x, std::vector<std::size_t>{1, 1, 0, 0}, {"first", "second"});
  EXPECT_EQ(predict(swapped, Eigen::VectorXd::Zero(1)).label, "first");
}

TEST(Rlda, MatchesIndependentDiscriminant) {
  const auto train = blobs(6, 12, 40, 1.0, 10);
  const auto test = blobs(6, 12, 20, 1.0, 10);
  const auto m = fit_rlda(train.x, train.y, train.classes);
  // Max over k of -(x - mu_k)^T S^-1 (x - mu_k)/2 + log pi_k; the x^T S^-1 x term is shared.
  const Eigen::MatrixXd sinv = m.covariance.inverse();
  const auto got = predict_batch(m, test.x);
  for (Eigen::Index i = 0; i < test.x.rows(); ++i) {
    std::size_t best = 0;
    double best_q = -std::numeric_limits<double>::infinity();
    for (Eigen::Index k = 0; k < 6; ++k) {
      const Eigen::VectorXd r = test.x.row(i) - m.class_means.row(k);
      const double q = -0.5 * r.dot(sinv * r) + std::log(m.priors(k));
      if (q > best_q) {
        best_q = q;
        best = static_cast<std::size_t>(k);
      }
    }
    EXPECT_EQ(got[static_cast<std::size_t>(i)], best) << "sample " << i;
  }
}

TEST(Rlda, UniformScalingKeepsLabels) {
  const auto b = blobs(5, 8, 30, 1.0, 11);
  const auto test = blobs(5, 8, 20, 1.0, 12);
  const auto base = predict_batch(fit_rlda(b.x, b.y, b.classes), test.x);
  for (double s : {1e-3, 0.5, 42.0}) {
    const Eigen::MatrixXd xs = s * b.x, ts = s * test.x;
    EXPECT_EQ(predict_batch(fit_rlda(xs, b.y, b.classes), ts), base) << s;
  }
}

TEST(Rlda, AffineInvarianceAtZeroGamma) {
  const auto b = blobs(4, 5, 40, 1.0, 13);
  const auto test = blobs(4, 5, 20, 1.0, 14);
  RldaOptions opt;
  opt.fixed_gamma = 0.0;
  auto rng = make_rng(15, {});
  const Eigen::MatrixXd a = Eigen::MatrixXd::Identity(5, 5) + 0.5 * gaussian(5, 5, rng);
  const Eigen::RowVectorXd off = gaussian(1, 5, rng);
  const Eigen::MatrixXd xa = (b.x * a.transpose()).rowwise() + off;
  const Eigen::MatrixXd ta = (test.x * a.transpose()).rowwise() + off;
  EXPECT_EQ(predict_batch(fit_rlda(xa, b.y, b.classes, opt), ta),
            predict_batch(fit_rlda(b.x, b.y, b.classes, opt), test.x));
}

TEST(Rlda, FullShrinkageAlignsWeightsWithMeans) {
  const auto b = blobs(3, 6, 30, 1.0, 16);
  double prev = 1.0;
  for (double g : {0.0, 0.5, 0.9, 0.99, 1.0}) {
    RldaOptions opt;
    opt.fixed_gamma = g;
    const auto m = fit_rlda(b.x, b.y, b.classes, opt);
    double worst = 0.0;
    for (Eigen::Index k = 0; k < 3; ++k) {
      const double cos = m.weights.row(k).normalized().dot(m.class_means.row(k).normalized());
      worst = std::max(worst, 1.0 - cos);
    }
    EXPECT_LE(worst, prev + 1e-12) << g;
    prev = worst;
  }
  EXPECT_LT(prev, 1e-12);
}

TEST(Rlda, OrderIndependent) {
  const auto b = blobs(3, 4, 20, 1.0, 17);
  std::vector<Eigen::Index> perm(static_cast<std::size_t>(b.x.rows()));
  std::iota(perm.begin(), perm.end(), 0);
  std::reverse(perm.begin(), perm.end());
  Eigen::MatrixXd xr(b.x.rows(), b.x.cols());
  std::vector<std::size_t> yr;
  for (std::size_t i = 0; i < perm.size(); ++i) {
    xr.row(static_cast<Eigen::Index>(i)) = b.x.row(perm[i]);
    yr.push_back(b.y[static_cast<std::size_t>(perm[i])]);
  }
  const auto m1 = fit_rlda(b.x, b.y, b.classes), m2 = fit_rlda(xr, yr, b.classes);
  EXPECT_EQ(predict_batch(m1, b.x), predict_batch(m2, b.x));
  EXPECT_NEAR(m1.gamma, m2.gamma, 1e-12);
}

TEST(Rlda, Errors) {
  EXPECT_THROW(fit_rlda(Eigen::MatrixXd::Ones(4, 2), std::vector<std::size_t>{0, 0, 1, 1}, {"a", "b"}),
               NumericalError);
  EXPECT_THROW(fit_rlda(Eigen::MatrixXd::Random(3, 2), std::vector<std::size_t>{0, 0, 1}, {"a", "b"}), ConfigError);
  const auto b = blobs(2, 3, 5, 1.0, 18);
  const auto m = fit_rlda(b.x, b.y, b.classes);
  EXPECT_THROW(predict(m, Eigen::VectorXd::Zero(4)), ConfigError);
}
