#include "hfw/pair.hpp"

#include <algorithm>
#include <cmath>

#include "hfw/error.hpp"

namespace hfw {

namespace {

// (e^{s h} - 1)/s
double phi1(double s, double h) { return s == 0 ? h : std::expm1(s * h) / s; }

// ((e^{s h} - 1)/s - h)/s = int_0^h phi1(s, u) du
double phi2(double s, double h) {
  const double x = s * h;
  if (std::abs(x) < 1e-3) return h * h * (0.5 + x / 6 + x * x / 24);
  return (phi1(s, h) - h) / s;
}

}  // namespace

Eigen::Matrix2d PairCoeffs::drift() const {
  Eigen::Matrix2d M;
  M << -E * (c + K * e), E * K * e, e, -e;
  return M;
}

PairPropagator::PairPropagator(const PairCoeffs& pc, double h) : pc_(pc), h_(h) {
  require(pc.E > 0 && pc.c > 0 && pc.K >= 0 && pc.e > 0, "pair coefficients must be positive");
  require(h > 0, "step must be positive");
  const Eigen::Matrix2d M = pc.drift();
  // closed-form eigenpairs; the discriminant is strictly positive
  const double tr = M.trace(), det = M.determinant();
  const double disc = std::sqrt(std::max(0.0, tr * tr / 4 - det));
  const double m1 = tr / 2 - disc;  // fast
  // m2 = det / m1 avoids cancellation when the rates are widely separated
  const double m2 = det / m1;
  mu_ << m1, m2;
  fast_ = -m1;
  slow_ = -m2;
  for (int i = 0; i < 2; ++i) {
    // (M - mu I) v = 0; pick the better-conditioned row
    const double a = M(0, 0) - mu_(i), b = M(0, 1);
    const double c = M(1, 0), d = M(1, 1) - mu_(i);
    Eigen::Vector2d v;
    if (std::abs(a) + std::abs(b) >= std::abs(c) + std::abs(d))
      v << b, -a;
    else
      v << d, -c;
    V_.col(i) = v.normalized();
  }
  Vi_ = V_.inverse();
  phi_ = V_ * Eigen::Vector2d(std::exp(mu_(0) * h), std::exp(mu_(1) * h)).asDiagonal() * Vi_;

  // noise enters x with amplitude E
  const Eigen::Vector2d w = Vi_.col(0) * pc.E;
  cov_.setZero();
  int_cov_.setZero();
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      const double s = mu_(i) + mu_(j);
      const Eigen::Matrix2d vv = V_.col(i) * V_.col(j).transpose();
      G_(i, j) = phi1(s, h);
      cov_ += w(i) * w(j) * G_(i, j) * vv;
      int_cov_ += w(i) * w(j) * phi2(s, h) * vv;
    }
  cov_ = 0.5 * (cov_ + cov_.transpose());
  int_cov_ = 0.5 * (int_cov_ + int_cov_.transpose());
  int_phi_ = V_ * Eigen::Vector2d(phi1(mu_(0), h), phi1(mu_(1), h)).asDiagonal() * Vi_;
  const double l00 = std::sqrt(std::max(0.0, cov_(0, 0)));
  const double l10 = l00 > 0 ? cov_(1, 0) / l00 : 0.0;
  const double l11 = std::sqrt(std::max(0.0, cov_(1, 1) - l10 * l10));
  chol_ << l00, 0, l10, l11;
}

Eigen::Vector2d PairPropagator::relax(const Eigen::Vector2d& z, double theta) const {
  const Eigen::Vector2d t(theta, theta);
  return t + phi_ * (z - t);
}

Eigen::Vector2d PairPropagator::forced(const Eigen::Vector2d& b, double lambda, double t0) const {
  Eigen::Vector2d f;
  for (int i = 0; i < 2; ++i) {
    const double s = mu_(i) + lambda;
    f(i) = (std::exp(mu_(i) * h_) - std::exp(-lambda * h_)) / s;
  }
  return std::exp(-lambda * t0) * (V_ * f.asDiagonal() * Vi_ * b);
}

PairPropagator::StepMoments PairPropagator::integrated(const Eigen::Vector2d& z, double theta,
                                                       double q) const {
  const Eigen::Vector2d u = z - Eigen::Vector2d(theta, theta);
  const Eigen::Vector2d a = Vi_ * u;
  StepMoments m;
  m.first = int_phi_ * u;
  m.second = q * int_cov_;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) m.second += a(i) * a(j) * G_(i, j) * V_.col(i) * V_.col(j).transpose();
  return m;
}

Eigen::Vector2d PairPropagator::noise(double q, Stream& rng) const {
  if (q <= 0) return Eigen::Vector2d::Zero();
  const double a = rng.normal(), b = rng.normal();
  const double s = std::sqrt(q);
  return Eigen::Vector2d(s * chol_(0, 0) * a, s * (chol_(1, 0) * a + chol_(1, 1) * b));
}

}  // namespace hfw
