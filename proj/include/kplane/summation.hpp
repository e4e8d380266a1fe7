#pragma once

#include <cmath>

#include <Eigen/Core>

namespace kplane {

/// Neumaier's compensated summation.
template <typename Scalar>
class CompensatedSum {
 public:
  void add(Scalar x) {
    const Scalar t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  CompensatedSum& operator+=(Scalar x) {
    add(x);
    return *this;
  }
  Scalar value() const { return sum_ + comp_; }

 private:
  Scalar sum_{0};
  Scalar comp_{0};
};

/// Componentwise compensated summation of fixed-length vectors.
template <typename Scalar>
class CompensatedVectorSum {
 public:
  using VectorType = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  explicit CompensatedVectorSum(Eigen::Index n) : sum_(VectorType::Zero(n)), comp_(VectorType::Zero(n)) {}

  template <typename Derived>
  void add(const Eigen::MatrixBase<Derived>& x) {
    for (Eigen::Index i = 0; i < sum_.size(); ++i) {
      const Scalar xi = x(i);
      const Scalar t = sum_(i) + xi;
      if (std::abs(sum_(i)) >= std::abs(xi)) {
        comp_(i) += (sum_(i) - t) + xi;
      } else {
        comp_(i) += (xi - t) + sum_(i);
      }
      sum_(i) = t;
    }
  }
  VectorType value() const { return sum_ + comp_; }

 private:
  VectorType sum_;
  VectorType comp_;
};

template <typename Derived>
typename Derived::Scalar compensated_sum(const Eigen::DenseBase<Derived>& values) {
  CompensatedSum<typename Derived::Scalar> acc;
  for (Eigen::Index i = 0; i < values.size(); ++i) acc.add(values(i));
  return acc.value();
}

}  // namespace kplane
