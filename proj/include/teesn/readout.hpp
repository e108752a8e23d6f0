#pragma once
#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>

#include "teesn/errors.hpp"

namespace teesn {

struct DesignMatrices {
  Eigen::MatrixXd states;   // state dim x samples
  Eigen::MatrixXd te_mat;   // same shape; zeros when the te term is disabled
  Eigen::MatrixXd targets;  // output dim x samples

  void validate() const {
    if (states.rows() != te_mat.rows() || states.cols() != te_mat.cols())
      throw std::invalid_argument("readout: states and te matrix must share shape");
    if (states.cols() != targets.cols())
      throw std::invalid_argument("readout: design and target sample counts differ");
    if (states.cols() < 1) throw std::invalid_argument("readout: need at least one sample");
    if (!states.allFinite() || !te_mat.allFinite() || !targets.allFinite())
      throw numeric_error("readout: non-finite design entries");
  }
};

struct Readout {
  Eigen::MatrixXd w_out;  // output dim x state dim
  double ridge = 0.0;
};

// Regularized normal equations on Z = states - te. LDLT solve; an
// ill-conditioned or indefinite Gram falls back to the SVD pseudo-inverse.
inline Readout fit(const DesignMatrices& d, double lambda) {
  d.validate();
  if (lambda < 0.0) throw std::invalid_argument("readout: lambda must be >= 0");
  const Eigen::MatrixXd z = d.states - d.te_mat;
  const long dim = z.rows();
  Eigen::MatrixXd gram = z * z.transpose();
  gram.diagonal().array() += lambda;
  const Eigen::MatrixXd rhs = z * d.targets.transpose();  // dim x M

  Eigen::LDLT<Eigen::MatrixXd> ldlt(gram);
  bool direct_ok = ldlt.info() == Eigen::Success;
  if (direct_ok) {
    const auto dv = ldlt.vectorD();
    const double mx = dv.cwiseAbs().maxCoeff();
    const double mn = dv.cwiseAbs().minCoeff();
    direct_ok = mn > 0.0 && dv.minCoeff() > 0.0 && mx / mn < 1e12;
  }

  Readout r;
  r.ridge = lambda;
  if (direct_ok) {
    r.w_out = ldlt.solve(rhs).transpose();
    return r;
  }

  Eigen::BDCSVD<Eigen::MatrixXd> svd(z, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  const double smax = sv.size() ? sv(0) : 0.0;
  if (lambda == 0.0) {
    const double tol = smax * static_cast<double>(std::max(z.rows(), z.cols())) * 1e-15;
    long rank = 0;
    for (long i = 0; i < sv.size(); ++i)
      if (sv(i) > tol) ++rank;
    if (rank < dim)
      throw numeric_error("readout: singular design with lambda=0; use lambda > 0");
  }
  Eigen::VectorXd coef(sv.size());
  for (long i = 0; i < sv.size(); ++i) {
    const double s = sv(i);
    coef(i) = (s > 0.0 || lambda > 0.0) ? s / (s * s + lambda) : 0.0;
  }
  r.w_out = d.targets * svd.matrixV() * coef.asDiagonal() * svd.matrixU().transpose();
  return r;
}

// y(t_pre) = W_out (state - te_pre)
inline Eigen::VectorXd decode(const Readout& r, const Eigen::VectorXd& state,
                              const Eigen::VectorXd& te_pre) {
  if (state.size() != te_pre.size() || state.size() != r.w_out.cols())
    throw std::invalid_argument("readout: decode dimension mismatch");
  return r.w_out * (state - te_pre);
}

}  // namespace teesn
