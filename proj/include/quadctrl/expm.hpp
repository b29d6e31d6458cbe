#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <vector>

#include "quadctrl/rational_linalg.hpp"

namespace quadctrl {

/// exp(A) by scaling and squaring with a diagonal (6,6) Pade approximant.
inline Eigen::MatrixXd expm(const Eigen::MatrixXd& A) {
  const Eigen::Index n = A.rows();
  if (n == 0) return A;
  // Pade (6,6) coefficients c_k = (12-k)! 6! / (12! k! (6-k)!)
  static const double c[7] = {1.0, 0.5, 5.0 / 44.0, 1.0 / 66.0, 1.0 / 792.0, 1.0 / 15840.0, 1.0 / 665280.0};
  double norm = A.cwiseAbs().colwise().sum().maxCoeff();
  int s = 0;
  if (norm > 0.5) s = std::max(0, static_cast<int>(std::ceil(std::log2(norm / 0.5))));
  Eigen::MatrixXd X = A / std::ldexp(1.0, s);
  Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n, n);
  Eigen::MatrixXd X2 = X * X;
  Eigen::MatrixXd X4 = X2 * X2;
  Eigen::MatrixXd X6 = X4 * X2;
  Eigen::MatrixXd U = X * (c[1] * I + c[3] * X2 + c[5] * X4);
  Eigen::MatrixXd V = c[0] * I + c[2] * X2 + c[4] * X4 + c[6] * X6;
  Eigen::MatrixXd E = (V - U).partialPivLu().solve(V + U);
  for (int i = 0; i < s; ++i) E = E * E;
  return E;
}

/// t -> exp(tH) for a fixed rational H. Nilpotent matrices use the finite
/// power series, which is exact up to rounding.
class MatrixExponential {
 public:
  MatrixExponential() = default;
  explicit MatrixExponential(const RatMatrix& H) : A_(H.to_eigen()) {
    int n = H.rows();
    RatMatrix P = RatMatrix::identity(n);
    for (int k = 1; k <= n; ++k) {
      P = P * H;
      if (P.is_zero()) {
        nilpotent_ = true;
        index_ = k;
        break;
      }
    }
    if (nilpotent_) {
      Eigen::MatrixXd Pk = Eigen::MatrixXd::Identity(n, n);
      powers_.push_back(Pk);
      for (int k = 1; k < index_; ++k) {
        Pk = Pk * A_;
        powers_.push_back(Pk);
      }
    }
  }

  bool nilpotent() const { return nilpotent_; }

  Eigen::MatrixXd operator()(double t) const {
    if (!nilpotent_) return expm(t * A_);
    Eigen::MatrixXd E = Eigen::MatrixXd::Zero(A_.rows(), A_.cols());
    double coef = 1.0;
    for (std::size_t k = 0; k < powers_.size(); ++k) {
      if (k > 0) coef *= t / static_cast<double>(k);
      E += coef * powers_[k];
    }
    return E;
  }

 private:
  Eigen::MatrixXd A_;
  bool nilpotent_ = false;
  int index_ = 0;
  std::vector<Eigen::MatrixXd> powers_;
};

}  // namespace quadctrl
