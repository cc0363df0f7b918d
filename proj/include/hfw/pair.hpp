#pragma once

#include <Eigen/Dense>

#include "hfw/rng.hpp"

namespace hfw {

// Linear part of the two-component process (x, y):
//   dx = E[c(theta - x) + K e (y - x)] dt + E sqrt(q) dw,   dy = e (x - y) dt.
struct PairCoeffs {
  double E = 1, c = 1, K = 1, e = 1;
  Eigen::Matrix2d drift() const;
};

// Exact one-step propagator for step h via the eigen-decomposition of the
// drift matrix (real, distinct, negative eigenvalues).
class PairPropagator {
 public:
  PairPropagator(const PairCoeffs& pc, double h);

  double h() const { return h_; }
  double slow_rate() const { return slow_; }  // smallest |eigenvalue|
  double fast_rate() const { return fast_; }
  const Eigen::Matrix2d& phi() const { return phi_; }
  // Covariance over one step per unit of q (noise E sqrt(q) on x).
  const Eigen::Matrix2d& noise_cov() const { return cov_; }

  // theta + Phi (z - theta)
  Eigen::Vector2d relax(const Eigen::Vector2d& z, double theta) const;
  // Integral over one step of the response to forcing b e^{-lambda (t0 + s)}.
  Eigen::Vector2d forced(const Eigen::Vector2d& b, double lambda, double t0) const;
  // Gaussian increment with covariance q * noise_cov().
  Eigen::Vector2d noise(double q, Stream& rng) const;

  // Integrals over one step of E[u(s)] and E[u(s) u(s)^T], u = z - theta,
  // for the process started at z with q frozen.
  struct StepMoments {
    Eigen::Vector2d first;
    Eigen::Matrix2d second;
  };
  StepMoments integrated(const Eigen::Vector2d& z, double theta, double q) const;

 private:
  PairCoeffs pc_;
  double h_;
  double slow_ = 0, fast_ = 0;
  Eigen::Matrix2d V_, Vi_, phi_, cov_, chol_;
  Eigen::Matrix2d int_phi_, int_cov_, G_;
  Eigen::Vector2d mu_;
};

}  // namespace hfw
