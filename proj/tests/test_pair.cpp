#include <cmath>

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include "doctest.h"
#include "hfw/error.hpp"
#include "hfw/pair.hpp"

using namespace hfw;

namespace {

// Composite Simpson on [0,h] of a matrix-valued integrand.
template <class F>
Eigen::Matrix2d simpson(F f, double h, int n = 400) {
  Eigen::Matrix2d s = f(0.0) + f(h);
  for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * f(h * i / n);
  return s * h / (3.0 * n);
}

}  // namespace

TEST_SUITE("pair") {

TEST_CASE("propagator equals the matrix exponential") {
  for (const PairCoeffs pc : {PairCoeffs{1, 1, 1, 1}, PairCoeffs{0.25, 4, 0.25, 4}, PairCoeffs{0.01, 1e-3, 500, 1}}) {
    for (double h : {1e-3, 0.1, 2.0}) {
      const PairPropagator pp(pc, h);
      const Eigen::Matrix2d ref = (pc.drift() * h).exp();
      CHECK((pp.phi() - ref).norm() < 1e-10 * std::max(1.0, ref.norm()));
      CHECK(pp.slow_rate() <= pp.fast_rate());
      CHECK(pp.slow_rate() > 0);
    }
  }
  CHECK_THROWS_AS(PairPropagator(PairCoeffs{1, 0, 1, 1}, 0.1), ParameterError);
  CHECK_THROWS_AS(PairPropagator(PairCoeffs{1, 1, 1, 1}, 0), ParameterError);
}

TEST_CASE("one-step noise covariance") {
  const PairCoeffs pc{0.5, 2, 3, 0.7};
  const double h = 0.3;
  const PairPropagator pp(pc, h);
  const Eigen::Matrix2d M = pc.drift();
  Eigen::Vector2d b(pc.E, 0);
  const Eigen::Matrix2d ref = simpson([&](double s) {
    const Eigen::Vector2d v = (M * s).exp() * b;
    return Eigen::Matrix2d(v * v.transpose());
  }, h);
  CHECK((pp.noise_cov() - ref).norm() < 1e-9);

  // empirical covariance of the sampled increments
  Stream rng = make_stream(1, "pair-noise");
  const int n = 200000;
  Eigen::Matrix2d emp = Eigen::Matrix2d::Zero();
  for (int i = 0; i < n; ++i) {
    const Eigen::Vector2d w = pp.noise(2.0, rng);
    emp += w * w.transpose();
  }
  emp /= n;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      const double var = 2.0 * 2.0 * (ref(i, i) * ref(j, j) + ref(i, j) * ref(i, j));
      CHECK(std::abs(emp(i, j) - 2.0 * ref(i, j)) < 4 * std::sqrt(var / n));
    }
}

TEST_CASE("integrated step moments match quadrature") {
  const PairCoeffs pc{0.5, 2, 3, 0.7};
  const double h = 0.4, theta = 0.3, q = 0.8;
  const PairPropagator pp(pc, h);
  const Eigen::Vector2d z(0.7, 0.1);
  const Eigen::Vector2d u = z - Eigen::Vector2d(theta, theta);
  const Eigen::Matrix2d M = pc.drift();
  const Eigen::Vector2d b(pc.E, 0);
  const auto m = pp.integrated(z, theta, q);
  const Eigen::Matrix2d first = simpson([&](double s) {
    Eigen::Matrix2d r = Eigen::Matrix2d::Zero();
    r.col(0) = (M * s).exp() * u;
    return r;
  }, h);
  CHECK((m.first - first.col(0)).norm() < 1e-10);
  // E[u(s)u(s)^T] = e^{Ms} u u^T e^{M^T s} + q int_0^s e^{Mr} b b^T e^{M^T r} dr
  const Eigen::Matrix2d second = simpson([&](double s) {
    const Eigen::Vector2d a = (M * s).exp() * u;
    const Eigen::Matrix2d cov = s > 0 ? Eigen::Matrix2d(PairPropagator(pc, s).noise_cov()) : Eigen::Matrix2d::Zero();
    return Eigen::Matrix2d(a * a.transpose() + q * cov);
  }, h);
  CHECK((m.second - second).norm() < 1e-9);
}

TEST_CASE("relaxation and exponential forcing") {
  const PairCoeffs pc{1, 1, 2, 0.5};
  const PairPropagator pp(pc, 0.2);
  const Eigen::Vector2d t(0.4, 0.4);
  CHECK((pp.relax(t, 0.4) - t).norm() == 0.0);
  // forcing integral against quadrature of e^{M(h-s)} b e^{-lambda (t0+s)}
  const Eigen::Vector2d b(0.3, 0.0);
  const double lambda = 1.5, t0 = 0.7;
  const Eigen::Matrix2d ref = simpson([&](double s) {
    Eigen::Matrix2d r = Eigen::Matrix2d::Zero();
    r.col(0) = (pc.drift() * (0.2 - s)).exp() * b * std::exp(-lambda * (t0 + s));
    return r;
  }, 0.2);
  CHECK((pp.forced(b, lambda, t0) - ref.col(0)).norm() < 1e-12);
}

}
