#pragma once

#include <Eigen/Dense>

namespace primer {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Cosine similarity of two vector expressions. Caller guarantees nonzero norms.
template <typename DerivedA, typename DerivedB>
double cosine_similarity(const Eigen::MatrixBase<DerivedA>& a,
                         const Eigen::MatrixBase<DerivedB>& b) {
  const double c = a.dot(b) / (a.norm() * b.norm());
  return c < -1.0 ? -1.0 : (c > 1.0 ? 1.0 : c);
}

template <typename DerivedA, typename DerivedB>
double euclidean_distance(const Eigen::MatrixBase<DerivedA>& a,
                          const Eigen::MatrixBase<DerivedB>& b) {
  return (a - b).norm();
}

/// Softmax of a logit vector, stabilized by max-logit subtraction.
template <typename Derived>
Vector softmax(const Eigen::MatrixBase<Derived>& logits) {
  Vector z = logits;
  z.array() -= z.maxCoeff();
  z = z.array().exp();
  return z / z.sum();
}

}  // namespace primer
