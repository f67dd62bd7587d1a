#include "boxfix/kalman.hpp"

#include <cmath>
#include <sstream>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include "boxfix/error.hpp"

namespace boxfix {

namespace {

Mat4 symmetrize(const Mat4& m) { return 0.5 * (m + m.transpose()); }

// Adds the ridge when `m` (symmetric) is too badly conditioned to invert.
Mat4 regularized(const Mat4& m) {
  Eigen::SelfAdjointEigenSolver<Mat4> es(m, Eigen::EigenvaluesOnly);
  const auto abs_ev = es.eigenvalues().cwiseAbs();
  const double hi = abs_ev.maxCoeff();
  const double lo = abs_ev.minCoeff();
  if (lo == 0.0 || hi / lo > kMaxCondition) {
    return m + kRegularization * Mat4::Identity();
  }
  return m;
}

Mat4 checked_inverse(const Mat4& m, const char* what) {
  const Mat4 reg = regularized(m);
  Eigen::FullPivLU<Mat4> lu(reg);
  if (!lu.isInvertible()) {
    throw Error(ErrorCode::kNumeric, std::string(what) + " is singular");
  }
  return lu.inverse();
}

}  // namespace

void require_psd(const Mat4& m, const char* what) {
  if (!m.allFinite()) {
    throw Error(ErrorCode::kNumeric, std::string(what) + " has non-finite entries");
  }
  const double asym = (m - m.transpose()).cwiseAbs().maxCoeff();
  if (asym > kPsdTolerance) {
    std::ostringstream os;
    os << what << " is not symmetric (max asymmetry " << asym << ")";
    throw Error(ErrorCode::kNumeric, os.str());
  }
  Eigen::SelfAdjointEigenSolver<Mat4> es(symmetrize(m), Eigen::EigenvaluesOnly);
  const double min_ev = es.eigenvalues().minCoeff();
  if (min_ev < -kPsdTolerance) {
    std::ostringstream os;
    os << what << " is not positive semidefinite (min eigenvalue " << min_ev << ")";
    throw Error(ErrorCode::kNumeric, os.str());
  }
}

KalmanState kalman_update(const KalmanState& state, const Vec4& measurement_mean,
                          const Mat4& measurement_cov) {
  require_psd(state.cov, "state covariance");
  require_psd(measurement_cov, "measurement covariance");

  const Mat4 innovation_cov = regularized(symmetrize(state.cov + measurement_cov));
  Eigen::FullPivLU<Mat4> lu(innovation_cov);
  if (!lu.isInvertible()) {
    throw Error(ErrorCode::kNumeric, "innovation covariance P + R is singular");
  }
  // K = P S^-1; with P and S symmetric, K^T = S^-1 P.
  const Mat4 gain = lu.solve(state.cov).transpose();

  KalmanState next;
  next.mean = state.mean + gain * (measurement_mean - state.mean);
  next.cov = symmetrize((Mat4::Identity() - gain) * state.cov);
  return next;
}

KalmanState posterior_batch(const Vec4& prior_mean, const Mat4& prior_cov,
                            std::span<const Measurement> measurements) {
  require_psd(prior_cov, "prior covariance");
  if (measurements.empty()) return {prior_mean, prior_cov};

  const Mat4 prior_info = checked_inverse(prior_cov, "prior covariance");
  Mat4 precision = prior_info;
  Vec4 info = prior_info * prior_mean;
  for (const Measurement& m : measurements) {
    require_psd(m.cov, "measurement covariance");
    const Mat4 r_inv = checked_inverse(m.cov, "measurement covariance");
    precision += r_inv;
    info += r_inv * m.mean;
  }
  precision = symmetrize(precision);

  Eigen::LLT<Mat4> llt(precision);
  if (llt.info() != Eigen::Success) {
    throw Error(ErrorCode::kNumeric, "accumulated precision is singular or indefinite");
  }
  KalmanState out;
  out.cov = symmetrize(llt.solve(Mat4::Identity()));
  out.mean = llt.solve(info);
  return out;
}

}  // namespace boxfix
