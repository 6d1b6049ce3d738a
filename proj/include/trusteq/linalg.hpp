#pragma once

#include <cmath>
#include <optional>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "trusteq/error.hpp"

namespace trusteq {

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

/// Binary feature-presence masks, one row per perturbation.
using MaskMatrix = Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

template <typename Scalar>
struct RidgeFit {
  Vector<Scalar> coef;
  Scalar intercept = 0;
  Scalar lambda = 0;     // penalty actually used
  int ladder_steps = 0;  // how many times the penalty was raised
};

/// Additions tried on top of the requested penalty when the normal equations
/// cannot be factorized.
inline constexpr double kRidgeLadder[] = {0.0, 1e-6, 1e-5, 1e-4, 1e-3, 1e-2, 1e-1, 1.0};

/// Solves (A + lambda I) x = b for symmetric positive semi-definite A, raising
/// lambda along kRidgeLadder until a Cholesky factorization succeeds and the
/// solution is finite. Throws kSingularSystem when the ladder is exhausted.
template <typename DerivedA, typename DerivedB>
RidgeFit<typename DerivedA::Scalar> solve_regularized(const Eigen::MatrixBase<DerivedA>& normal,
                                                      const Eigen::MatrixBase<DerivedB>& rhs,
                                                      typename DerivedA::Scalar lambda) {
  using Scalar = typename DerivedA::Scalar;
  const Eigen::Index p = normal.rows();
  RidgeFit<Scalar> fit;
  if (p == 0) {
    fit.coef.resize(0);
    fit.lambda = lambda;
    return fit;
  }
  int step = 0;
  for (double extra : kRidgeLadder) {
    const Scalar penalty = lambda + static_cast<Scalar>(extra);
    Matrix<Scalar> a = normal;
    a.diagonal().array() += penalty;
    Eigen::LLT<Matrix<Scalar>> llt(a);
    if (llt.info() == Eigen::Success) {
      Vector<Scalar> x = llt.solve(rhs);
      if (x.allFinite()) {
        fit.coef = std::move(x);
        fit.lambda = penalty;
        fit.ladder_steps = step;
        return fit;
      }
    }
    ++step;
  }
  throw Error(ErrorCode::kSingularSystem, "normal equations stayed singular after ridge ladder");
}

/// Weighted ridge regression of y on the columns of X with sample weights w.
/// When fit_intercept is set the data are centered on their weighted means,
/// so the intercept is not penalized.
template <typename DerivedX, typename DerivedY, typename DerivedW>
RidgeFit<typename DerivedX::Scalar> weighted_ridge(const Eigen::MatrixBase<DerivedX>& x,
                                                   const Eigen::MatrixBase<DerivedY>& y,
                                                   const Eigen::MatrixBase<DerivedW>& w,
                                                   typename DerivedX::Scalar lambda,
                                                   bool fit_intercept = true) {
  using Scalar = typename DerivedX::Scalar;
  const Scalar total = w.sum();
  if (!(total > 0)) throw Error(ErrorCode::kSingularSystem, "sample weights sum to zero");

  Vector<Scalar> x_mean = Vector<Scalar>::Zero(x.cols());
  Scalar y_mean = 0;
  if (fit_intercept) {
    x_mean = (x.transpose() * w) / total;
    y_mean = y.dot(w) / total;
  }
  const Matrix<Scalar> xc = x.rowwise() - x_mean.transpose();
  const Vector<Scalar> yc = y.array() - y_mean;
  const Matrix<Scalar> xw = xc.array().colwise() * w.array();

  const Matrix<Scalar> normal = xw.transpose() * xc;
  const Vector<Scalar> rhs = xw.transpose() * yc;
  RidgeFit<Scalar> fit = solve_regularized(normal, rhs, lambda);
  fit.intercept = fit_intercept ? y_mean - x_mean.dot(fit.coef) : Scalar(0);
  return fit;
}

/// Weighted coefficient of determination of a prediction.
template <typename DerivedY, typename DerivedP, typename DerivedW>
typename DerivedY::Scalar weighted_r2(const Eigen::MatrixBase<DerivedY>& y,
                                      const Eigen::MatrixBase<DerivedP>& predicted,
                                      const Eigen::MatrixBase<DerivedW>& w) {
  using Scalar = typename DerivedY::Scalar;
  const Scalar y_mean = y.dot(w) / w.sum();
  const Scalar ss_res = ((y - predicted).array().square() * w.array()).sum();
  const Scalar ss_tot = ((y.array() - y_mean).square() * w.array()).sum();
  if (ss_tot <= 0) return ss_res <= 0 ? Scalar(1) : Scalar(0);
  return Scalar(1) - ss_res / ss_tot;
}

}  // namespace trusteq
