#include <random>

#include <doctest.h>
#include <Eigen/Dense>

#include "dgm/metrics.hpp"

TEST_CASE("relative_error matches hand values") {
  const Eigen::MatrixXd truth = Eigen::MatrixXd::Constant(3, 4, 0.5);
  CHECK(dgm::relative_error(truth, truth) == 0.0);
  CHECK(dgm::relative_error(Eigen::MatrixXd(2.0 * truth), truth) ==
        doctest::Approx(1.0));
  CHECK(dgm::relative_error(Eigen::MatrixXd(Eigen::MatrixXd::Zero(3, 4)), truth) ==
        doctest::Approx(1.0));
  CHECK_THROWS_AS(dgm::relative_error(truth, Eigen::MatrixXd::Zero(3, 4)),
                  std::invalid_argument);
}

TEST_CASE("psnr matches the analytic values for uniform differences") {
  const Eigen::MatrixXd truth = Eigen::MatrixXd::Constant(10, 10, 0.3);
  const Eigen::MatrixXd est1 = truth.array() + 0.1;
  const Eigen::MatrixXd est2 = truth.array() + 0.01;
  CHECK(dgm::psnr(est1, truth) == doctest::Approx(20.0).epsilon(1e-12));
  CHECK(dgm::psnr(est2, truth) == doctest::Approx(40.0).epsilon(1e-12));
  CHECK(dgm::psnr(truth, truth) == 99.0);
}

TEST_CASE("psnr decreases as the relative error grows") {
  std::mt19937 rng(41);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const Eigen::MatrixXd truth = Eigen::MatrixXd::Constant(8, 8, 0.4);
  Eigen::MatrixXd direction(8, 8);
  for (Eigen::Index c = 0; c < 8; ++c) {
    for (Eigen::Index r = 0; r < 8; ++r) direction(r, c) = gauss(rng);
  }
  double last_psnr = 1e9;
  double last_re = -1.0;
  for (double scale : {0.01, 0.05, 0.1, 0.5, 1.0}) {
    const Eigen::MatrixXd estimate = truth + scale * direction;
    const double re = dgm::relative_error(estimate, truth);
    const double db = dgm::psnr(estimate, truth);
    CHECK(re > last_re);
    CHECK(db < last_psnr);
    last_re = re;
    last_psnr = db;
  }
}

TEST_CASE("threshold_foreground uses strict magnitude comparison") {
  Eigen::MatrixXd s(1, 3);
  s << -0.2, 0.05, 0.3;
  const dgm::MaskMatrix mask = dgm::threshold_foreground(s, 0.1);
  CHECK(mask(0, 0));
  CHECK_FALSE(mask(0, 1));
  CHECK(mask(0, 2));

  const dgm::MaskMatrix all_nonzero = dgm::threshold_foreground(s, 0.0);
  CHECK(all_nonzero.count() == 3);
  const dgm::MaskMatrix none = dgm::threshold_foreground(s, 0.3);
  CHECK(none.count() == 0);
  CHECK_THROWS_AS(dgm::threshold_foreground(s, -0.5), std::invalid_argument);
}

TEST_CASE("threshold_foreground is monotone in the threshold") {
  std::mt19937 rng(42);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::MatrixXd s(6, 6);
  for (Eigen::Index c = 0; c < 6; ++c) {
    for (Eigen::Index r = 0; r < 6; ++r) s(r, c) = gauss(rng);
  }
  Eigen::Index last = s.size() + 1;
  for (double t : {0.0, 0.2, 0.5, 1.0, 2.0}) {
    const auto count = dgm::threshold_foreground(s, t).count();
    CHECK(count <= last);
    last = count;
  }
}

TEST_CASE("pr_re_fm on the 8/2/2 fixture") {
  // 12 pixels: 8 TP, 2 FP, 2 FN.
  dgm::MaskMatrix predicted(12, 1), truth(12, 1);
  predicted.setConstant(false);
  truth.setConstant(false);
  for (int i = 0; i < 8; ++i) {  // TP
    predicted(i, 0) = true;
    truth(i, 0) = true;
  }
  predicted(8, 0) = predicted(9, 0) = true;  // FP
  truth(10, 0) = truth(11, 0) = true;        // FN
  const auto scores = dgm::pr_re_fm(predicted, truth);
  CHECK(scores.precision == 0.8);
  CHECK(scores.recall == 0.8);
  CHECK(scores.f_measure == doctest::Approx(0.8).epsilon(1e-15));
  CHECK_FALSE(scores.degenerate);
}

TEST_CASE("pr_re_fm is perfect on identical nonempty masks") {
  dgm::MaskMatrix mask(5, 2);
  mask.setConstant(false);
  mask(1, 0) = mask(3, 1) = true;
  const auto scores = dgm::pr_re_fm(mask, mask);
  CHECK(scores.precision == 1.0);
  CHECK(scores.recall == 1.0);
  CHECK(scores.f_measure == 1.0);
}

TEST_CASE("pr_re_fm flags degenerate empty predictions") {
  dgm::MaskMatrix predicted(4, 1), truth(4, 1);
  predicted.setConstant(false);
  truth.setConstant(false);
  truth(0, 0) = true;
  const auto scores = dgm::pr_re_fm(predicted, truth);
  CHECK(scores.precision == 0.0);
  CHECK(scores.recall == 0.0);
  CHECK(scores.f_measure == 0.0);
  CHECK(scores.degenerate);
}

TEST_CASE("swapping predicted and truth swaps precision and recall") {
  std::mt19937 rng(43);
  std::bernoulli_distribution coin(0.3);
  dgm::MaskMatrix a(20, 3), b(20, 3);
  for (Eigen::Index c = 0; c < 3; ++c) {
    for (Eigen::Index r = 0; r < 20; ++r) {
      a(r, c) = coin(rng);
      b(r, c) = coin(rng);
    }
  }
  const auto ab = dgm::pr_re_fm(a, b);
  const auto ba = dgm::pr_re_fm(b, a);
  CHECK(ab.precision == ba.recall);
  CHECK(ab.recall == ba.precision);
  CHECK(ab.f_measure == doctest::Approx(ba.f_measure).epsilon(1e-15));
}

TEST_CASE("f_measure never exceeds the larger of precision and recall") {
  std::mt19937 rng(44);
  std::bernoulli_distribution coin(0.4);
  for (int trial = 0; trial < 20; ++trial) {
    dgm::MaskMatrix a(30, 1), b(30, 1);
    for (Eigen::Index r = 0; r < 30; ++r) {
      a(r, 0) = coin(rng);
      b(r, 0) = coin(rng);
    }
    const auto scores = dgm::pr_re_fm(a, b);
    CHECK(scores.f_measure <= std::max(scores.precision, scores.recall) + 1e-15);
  }
}
