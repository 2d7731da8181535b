#pragma once

#include <Eigen/Dense>

#include <sstream>
#include <stdexcept>
#include <string>

namespace delaycert {

template <class Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <class Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using Mat = Matrix<double>;
using Vec = Vector<double>;
using Index = Eigen::Index;

class dimension_error : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

inline void require(bool cond, const std::string& msg) {
  if (!cond) throw std::invalid_argument(msg);
}

template <class Derived>
typename Derived::Scalar symmetry_defect(
    const Eigen::MatrixBase<Derived>& expr) {
  using Scalar = typename Derived::Scalar;
  const Matrix<Scalar> m = expr.eval();
  if (m.rows() != m.cols()) return std::numeric_limits<Scalar>::infinity();
  return (m - m.transpose()).cwiseAbs().maxCoeff();
}

template <class Derived>
Matrix<typename Derived::Scalar> symmetrize(
    const Eigen::MatrixBase<Derived>& expr) {
  using Scalar = typename Derived::Scalar;
  const Matrix<Scalar> m = expr.eval();
  return (m + m.transpose()) / Scalar(2);
}

/// Real symmetric matrix with strictly positive smallest eigenvalue.
/// Symmetry is enforced to 1e-12 entrywise; positivity to 1e-10 on the
/// smallest eigenvalue, both checked at construction.
template <class Scalar>
class SymmetricPositive {
 public:
  explicit SymmetricPositive(Matrix<Scalar> m) : m_(std::move(m)) {
    require(m_.rows() == m_.cols(), "SymmetricPositive: matrix must be square");
    require(m_.rows() >= 1, "SymmetricPositive: dimension must be >= 1");
    const Scalar defect = symmetry_defect(m_);
    if (!(defect <= Scalar(1e-12))) {
      std::ostringstream os;
      os << "SymmetricPositive: symmetry defect " << double(defect)
         << " exceeds 1e-12";
      throw std::invalid_argument(os.str());
    }
    m_ = symmetrize(m_);
    Eigen::SelfAdjointEigenSolver<Matrix<Scalar>> es(m_,
                                                     Eigen::EigenvaluesOnly);
    min_eig_ = es.eigenvalues().minCoeff();
    if (!(min_eig_ > Scalar(1e-10))) {
      std::ostringstream os;
      os << "SymmetricPositive: smallest eigenvalue " << double(min_eig_)
         << " is not > 1e-10";
      throw std::invalid_argument(os.str());
    }
  }

  const Matrix<Scalar>& mat() const { return m_; }
  Index dim() const { return m_.rows(); }
  Scalar min_eigenvalue() const { return min_eig_; }

 private:
  Matrix<Scalar> m_;
  Scalar min_eig_;
};

using Spd = SymmetricPositive<double>;

}  // namespace delaycert
