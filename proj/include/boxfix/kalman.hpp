#pragma once

#include <span>
#include <utility>

#include <Eigen/Core>

namespace boxfix {

using Vec4 = Eigen::Matrix<double, 4, 1>;
using Mat4 = Eigen::Matrix<double, 4, 4>;

/// Belief over the four box boundaries (left, top, right, bottom) of a
/// static object: mean in pixels, covariance in pixels^2.
struct KalmanState {
  Vec4 mean = Vec4::Zero();
  Mat4 cov = Mat4::Identity();
};

struct Measurement {
  Vec4 mean = Vec4::Zero();
  Mat4 cov = Mat4::Identity();
};

/// Ridge added to a matrix before inversion when its condition number
/// exceeds kMaxCondition.
inline constexpr double kRegularization = 1e-12;
inline constexpr double kMaxCondition = 1e12;
inline constexpr double kPsdTolerance = 1e-9;

/// Throws Error(kNumeric) unless `m` is symmetric and positive semidefinite
/// within kPsdTolerance. `what` names the matrix in the message.
void require_psd(const Mat4& m, const char* what);

/// One measurement update of a static system (no process model):
///   K = P (P + R)^-1,  m' = m + K (z - m),  P' = (I - K) P.
/// The returned covariance is symmetrized.
KalmanState kalman_update(const KalmanState& state, const Vec4& measurement_mean,
                          const Mat4& measurement_cov);

/// Closed-form posterior after all measurements, in information form:
///   P^-1 = P0^-1 + sum R_i^-1,  m = P (P0^-1 m0 + sum R_i^-1 z_i).
/// Independent of measurement order. An empty list returns the prior as-is.
KalmanState posterior_batch(const Vec4& prior_mean, const Mat4& prior_cov,
                            std::span<const Measurement> measurements);

}  // namespace boxfix
