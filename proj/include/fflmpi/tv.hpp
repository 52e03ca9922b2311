#pragma once

#include <Eigen/Dense>

#include <cmath>

namespace fflmpi {

/// Two-channel image gradient; x differences run along columns, y along rows.
template <typename Scalar>
struct GradientField {
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> x;
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> y;
};

/// Forward differences with Neumann boundary: the last column of x and the
/// last row of y are zero.
template <typename Derived>
GradientField<typename Derived::Scalar> grad_image(const Eigen::MatrixBase<Derived>& c) {
  using Scalar = typename Derived::Scalar;
  const Eigen::Index rows = c.rows(), cols = c.cols();
  GradientField<Scalar> g;
  g.x.setZero(rows, cols);
  g.y.setZero(rows, cols);
  if (cols > 1) g.x.leftCols(cols - 1) = c.rightCols(cols - 1) - c.leftCols(cols - 1);
  if (rows > 1) g.y.topRows(rows - 1) = c.bottomRows(rows - 1) - c.topRows(rows - 1);
  return g;
}

/// Divergence, the negative adjoint of grad_image.
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> div_field(const GradientField<Scalar>& g) {
  const Eigen::Index rows = g.x.rows(), cols = g.x.cols();
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> d(rows, cols);
  d.setZero();
  if (cols > 1) {
    d.leftCols(cols - 1) += g.x.leftCols(cols - 1);
    d.rightCols(cols - 1) -= g.x.leftCols(cols - 1);
  }
  if (rows > 1) {
    d.topRows(rows - 1) += g.y.topRows(rows - 1);
    d.bottomRows(rows - 1) -= g.y.topRows(rows - 1);
  }
  return d;
}

/// Isotropic total variation, sum over pixels of |grad c|_2.
template <typename Derived>
typename Derived::Scalar tv_isotropic(const Eigen::MatrixBase<Derived>& c) {
  const auto g = grad_image(c);
  return (g.x.array().square() + g.y.array().square()).sqrt().sum();
}

}  // namespace fflmpi
