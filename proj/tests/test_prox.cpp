#include <cmath>
#include <random>

#include <doctest.h>
#include <Eigen/Dense>
#include <Eigen/SVD>

#include "dgm/prox.hpp"

using dgm::MatrixX;
using dgm::VectorX;

namespace {

Eigen::MatrixXd random_matrix(std::mt19937& rng, Eigen::Index rows, Eigen::Index cols) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index c = 0; c < cols; ++c) {
    for (Eigen::Index r = 0; r < rows; ++r) m(r, c) = gauss(rng);
  }
  return m;
}

// Valid weight vector: entries in [0,1], nondecreasing.
Eigen::VectorXd random_weights(std::mt19937& rng, Eigen::Index size) {
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  Eigen::VectorXd w(size);
  for (Eigen::Index i = 0; i < size; ++i) w(i) = uni(rng);
  std::sort(w.begin(), w.end());
  return w;
}

// Objective of the weighted SVT prox problem, evaluated with Eigen's own SVD
// so it is independent of thin_svd.
double prox_objective(const Eigen::MatrixXd& candidate, const Eigen::MatrixXd& target,
                      const Eigen::VectorXd& weights, double tau) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(candidate);
  const double wnn = svd.singularValues().dot(weights);
  return tau * wnn + 0.5 * (candidate - target).squaredNorm();
}

}  // namespace

TEST_CASE("shrink applies the soft threshold formula") {
  Eigen::MatrixXd a(2, 2);
  a << 0.5, -0.1, 0.2, 0.0;
  const Eigen::MatrixXd out = dgm::shrink(a, 0.2);
  Eigen::MatrixXd expected(2, 2);
  expected << 0.3, 0.0, 0.0, 0.0;
  CHECK((out - expected).norm() == doctest::Approx(0.0));
}

TEST_CASE("shrink with zero threshold is the identity") {
  std::mt19937 rng(7);
  const Eigen::MatrixXd a = random_matrix(rng, 4, 3);
  CHECK((dgm::shrink(a, 0.0) - a).norm() == 0.0);
}

TEST_CASE("shrink past the largest magnitude zeroes everything") {
  std::mt19937 rng(8);
  const Eigen::MatrixXd a = random_matrix(rng, 5, 5);
  const double mu = a.array().abs().maxCoeff();
  CHECK(dgm::shrink(a, mu).norm() == 0.0);
}

TEST_CASE("shrink rejects negative thresholds") {
  CHECK_THROWS_AS(dgm::shrink(Eigen::MatrixXd::Zero(2, 2), -0.1),
                  std::invalid_argument);
}

TEST_CASE("shrink is a contraction in Frobenius norm") {
  std::mt19937 rng(9);
  for (int trial = 0; trial < 50; ++trial) {
    const Eigen::MatrixXd a = random_matrix(rng, 6, 4);
    const Eigen::MatrixXd b = random_matrix(rng, 6, 4);
    const double mu = 0.3;
    CHECK((dgm::shrink(a, mu) - dgm::shrink(b, mu)).norm() <=
          (a - b).norm() + 1e-12);
  }
}

TEST_CASE("thin_svd agrees with JacobiSVD on random shapes") {
  std::mt19937 rng(10);
  for (auto [rows, cols] : {std::pair<int, int>{8, 3}, {3, 8}, {5, 5}, {12, 2}}) {
    const Eigen::MatrixXd m = random_matrix(rng, rows, cols);
    const auto svd = dgm::thin_svd(m);
    Eigen::JacobiSVD<Eigen::MatrixXd> reference(m);

    REQUIRE(svd.values.size() == std::min(rows, cols));
    CHECK((svd.values - reference.singularValues()).norm() ==
          doctest::Approx(0.0).epsilon(1e-10));

    const Eigen::MatrixXd rebuilt = svd.left * svd.values.asDiagonal() * svd.right;
    CHECK((rebuilt - m).norm() / m.norm() < 1e-10);

    const Eigen::Index k = svd.values.size();
    CHECK((svd.left.transpose() * svd.left - Eigen::MatrixXd::Identity(k, k)).norm() <
          1e-10);
    CHECK((svd.right * svd.right.transpose() - Eigen::MatrixXd::Identity(k, k)).norm() <
          1e-10);
  }
}

TEST_CASE("thin_svd handles rank deficiency and the zero matrix") {
  std::mt19937 rng(11);
  const Eigen::VectorXd u = random_matrix(rng, 6, 1);
  const Eigen::VectorXd v = random_matrix(rng, 4, 1);
  const Eigen::MatrixXd rank1 = u * v.transpose();
  const auto svd = dgm::thin_svd(rank1);
  CHECK(svd.values(0) == doctest::Approx(u.norm() * v.norm()));
  CHECK(svd.values.tail(3).norm() == 0.0);
  CHECK((svd.left * svd.values.asDiagonal() * svd.right - rank1).norm() /
            rank1.norm() <
        1e-10);
  CHECK((svd.left.transpose() * svd.left - Eigen::MatrixXd::Identity(4, 4)).norm() <
        1e-8);

  const auto zero = dgm::thin_svd(Eigen::MatrixXd::Zero(3, 5));
  CHECK(zero.values.norm() == 0.0);
  CHECK((zero.left.transpose() * zero.left - Eigen::MatrixXd::Identity(3, 3)).norm() <
        1e-12);
  CHECK((zero.right * zero.right.transpose() - Eigen::MatrixXd::Identity(3, 3)).norm() <
        1e-12);
}

TEST_CASE("thin_svd rejects non-finite input") {
  Eigen::MatrixXd bad = Eigen::MatrixXd::Zero(2, 2);
  bad(0, 0) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(dgm::thin_svd(bad), std::runtime_error);
}

TEST_CASE("weighted_svt thresholds a diagonal matrix by hand") {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(2, 2);
  m(0, 0) = 3.0;
  m(1, 1) = 1.0;
  const Eigen::VectorXd w = Eigen::VectorXd::Ones(2);
  const Eigen::MatrixXd out = dgm::weighted_svt(m, w, 0.5);
  Eigen::MatrixXd expected = Eigen::MatrixXd::Zero(2, 2);
  expected(0, 0) = 2.5;
  expected(1, 1) = 0.5;
  CHECK((out - expected).norm() < 1e-12);
}

TEST_CASE("weighted_svt with zero weights leaves the matrix unchanged") {
  std::mt19937 rng(12);
  const Eigen::MatrixXd m = random_matrix(rng, 5, 4);
  const Eigen::VectorXd w = Eigen::VectorXd::Zero(4);
  CHECK((dgm::weighted_svt(m, w, 2.0) - m).norm() < 1e-10);
}

TEST_CASE("weighted_svt maps zero to zero") {
  const Eigen::VectorXd w = Eigen::VectorXd::Ones(3);
  CHECK(dgm::weighted_svt(Eigen::MatrixXd::Zero(5, 3), w, 1.0).norm() == 0.0);
}

TEST_CASE("weighted_svt validates arguments") {
  const Eigen::MatrixXd m = Eigen::MatrixXd::Identity(3, 3);
  CHECK_THROWS_AS(dgm::weighted_svt(m, Eigen::VectorXd::Ones(2), 1.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(dgm::weighted_svt(m, Eigen::VectorXd::Ones(3), 0.0),
                  std::invalid_argument);
  Eigen::VectorXd decreasing(3);
  decreasing << 1.0, 0.5, 0.4;
  CHECK_THROWS_AS(dgm::weighted_svt(m, decreasing, 1.0), std::invalid_argument);
  Eigen::MatrixXd bad = m;
  bad(0, 0) = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(dgm::weighted_svt(bad, Eigen::VectorXd::Ones(3), 1.0),
                  std::runtime_error);
}

TEST_CASE("weighted_svt with equal weights reproduces classical SVT") {
  std::mt19937 rng(13);
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::MatrixXd m = random_matrix(rng, 5, 5);
    const double tau = 0.7;
    const Eigen::VectorXd w = Eigen::VectorXd::Constant(5, 0.6);

    // Independent classical SVT via Eigen's SVD.
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Eigen::VectorXd s =
        (svd.singularValues().array() - 0.6 * tau).cwiseMax(0.0).matrix();
    const Eigen::MatrixXd expected =
        svd.matrixU() * s.asDiagonal() * svd.matrixV().transpose();

    CHECK((dgm::weighted_svt(m, w, tau) - expected).norm() < 1e-8);
  }
}

TEST_CASE("weighted_svt minimizes the prox objective against a grid oracle") {
  std::mt19937 rng(14);
  std::uniform_real_distribution<double> tau_dist(0.1, 1.0);
  for (int trial = 0; trial < 25; ++trial) {
    const Eigen::MatrixXd m = random_matrix(rng, 3, 3);
    const Eigen::VectorXd w = random_weights(rng, 3);
    const double tau = tau_dist(rng);

    // Brute force: grid over replacement singular values with the original
    // singular vectors (step 1e-3), independently per index.
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
    Eigen::VectorXd best(3);
    for (int i = 0; i < 3; ++i) {
      const double sigma = svd.singularValues()(i);
      double best_value = std::numeric_limits<double>::infinity();
      double best_s = 0;
      for (double s = 0.0; s <= sigma + 1e-3; s += 1e-3) {
        const double value = tau * w(i) * s + 0.5 * (s - sigma) * (s - sigma);
        if (value < best_value) {
          best_value = value;
          best_s = s;
        }
      }
      best(i) = best_s;
    }
    const Eigen::MatrixXd oracle =
        svd.matrixU() * best.asDiagonal() * svd.matrixV().transpose();

    const Eigen::MatrixXd ours = dgm::weighted_svt(m, w, tau);
    const double f_ours = prox_objective(ours, m, w, tau);
    const double f_oracle = prox_objective(oracle, m, w, tau);
    CHECK(f_ours <= f_oracle + 1e-3);
    CHECK(std::abs(f_ours - f_oracle) < 1e-3);
  }
}

TEST_CASE("erf_weights evaluates the Gaussian weight rule") {
  Eigen::VectorXd sigmas(3);
  sigmas << 4.0, 2.0, 0.0;
  const Eigen::VectorXd w = dgm::erf_weights(sigmas, 2.0);
  CHECK(w(0) == doctest::Approx(std::exp(-4.0)));
  CHECK(w(1) == doctest::Approx(std::exp(-1.0)));
  CHECK(w(2) == doctest::Approx(1.0));
  CHECK(w(0) <= w(1));
  CHECK(w(1) <= w(2));
}

TEST_CASE("erf_weights rejects a nonpositive scale") {
  const Eigen::VectorXd sigmas = Eigen::VectorXd::Ones(2);
  CHECK_THROWS_AS(dgm::erf_weights(sigmas, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(dgm::erf_weights(sigmas, -1.0), std::invalid_argument);
}

TEST_CASE("erf_weights stays in [0,1] and nondecreasing for sorted spectra") {
  std::mt19937 rng(15);
  std::uniform_real_distribution<double> uni(0.0, 10.0);
  for (int trial = 0; trial < 50; ++trial) {
    Eigen::VectorXd sigmas(6);
    for (int i = 0; i < 6; ++i) sigmas(i) = uni(rng);
    std::sort(sigmas.begin(), sigmas.end(), std::greater<double>());
    const Eigen::VectorXd w = dgm::erf_weights(sigmas, uni(rng) + 0.1);
    for (int i = 0; i < 6; ++i) {
      CHECK(w(i) >= 0.0);
      CHECK(w(i) <= 1.0);
      if (i > 0) CHECK(w(i) >= w(i - 1));
    }
  }
}

TEST_CASE("weighted_nuclear_norm with unit weights is the nuclear norm") {
  std::mt19937 rng(16);
  const Eigen::MatrixXd m = random_matrix(rng, 6, 4);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  const double expected = svd.singularValues().sum();
  const double ours = dgm::weighted_nuclear_norm(m, Eigen::VectorXd::Ones(4));
  CHECK(std::abs(ours - expected) / expected < 1e-8);
}

TEST_CASE("weighted_nuclear_norm handles hand cases") {
  CHECK(dgm::weighted_nuclear_norm(Eigen::MatrixXd::Zero(3, 3),
                                   Eigen::VectorXd::Ones(3)) == 0.0);
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(2, 2);
  m(0, 0) = 3.0;
  m(1, 1) = 1.0;
  Eigen::VectorXd w(2);
  w << 0.5, 1.0;
  CHECK(dgm::weighted_nuclear_norm(m, w) == doctest::Approx(2.5));
}
