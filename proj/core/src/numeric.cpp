#include "descest/numeric.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace descest {

namespace {

RankDecision rank_from_singular_values(Eigen::VectorXd sv, double threshold) {
  RankDecision d;
  d.threshold = threshold;
  d.singular_values = std::move(sv);
  for (int i = 0; i < d.singular_values.size(); ++i) {
    const double s = d.singular_values(i);
    if (s > threshold) ++d.rank;
    if (threshold > 0.0 && s > threshold / 10.0 && s < threshold * 10.0) {
      d.ambiguous = true;
    }
  }
  return d;
}

}  // namespace

RankDecision decide_rank(const Eigen::MatrixXd& m, double tol) {
  if (m.rows() == 0 || m.cols() == 0) return {};
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  const double smax = svd.singularValues()(0);
  if (smax == 0.0) {
    RankDecision d;
    d.singular_values = svd.singularValues();
    return d;
  }
  const double threshold =
      tol * smax * static_cast<double>(std::max(m.rows(), m.cols()));
  return rank_from_singular_values(svd.singularValues(), threshold);
}

RankDecision decide_rank_abs(const Eigen::MatrixXd& m, double threshold) {
  if (m.rows() == 0 || m.cols() == 0) return {};
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  return rank_from_singular_values(svd.singularValues(), threshold);
}

int rank_of(const Eigen::MatrixXd& m, double tol) {
  return decide_rank(m, tol).rank;
}

bool is_nonsingular(const Eigen::MatrixXd& m, double tol) {
  if (m.rows() != m.cols() || m.rows() == 0) return false;
  return rank_of(m, tol) == m.rows();
}

double condition_number(const Eigen::MatrixXd& m) {
  if (m.rows() == 0 || m.cols() == 0) {
    return std::numeric_limits<double>::infinity();
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  const auto& s = svd.singularValues();
  const double smin = s(s.size() - 1);
  if (smin <= 0.0) return std::numeric_limits<double>::infinity();
  return s(0) / smin;
}

Eigen::MatrixXd null_space_basis(const Eigen::MatrixXd& m, double tol) {
  if (m.cols() == 0) return Eigen::MatrixXd(0, 0);
  if (m.rows() == 0) return Eigen::MatrixXd::Identity(m.cols(), m.cols());
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeFullV);
  const RankDecision d = decide_rank(m, tol);
  return svd.matrixV().rightCols(m.cols() - d.rank);
}

Eigen::MatrixXd psd_sqrt_factor(const Eigen::MatrixXd& w, double tol) {
  if (w.rows() != w.cols()) {
    throw std::invalid_argument("psd_sqrt_factor: matrix must be square");
  }
  if (w.rows() == 0) return Eigen::MatrixXd(0, 0);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(0.5 * (w + w.transpose()));
  Eigen::VectorXd lam = eig.eigenvalues();
  const double scale = std::max(lam.cwiseAbs().maxCoeff(), 1.0);
  for (int i = 0; i < lam.size(); ++i) {
    if (lam(i) < -tol * scale * w.rows()) {
      throw std::invalid_argument("psd_sqrt_factor: matrix is not PSD");
    }
    lam(i) = std::max(lam(i), 0.0);
  }
  return eig.eigenvectors() * lam.cwiseSqrt().asDiagonal();
}

CovarianceWeight::CovarianceWeight(const Eigen::MatrixXd& w, double tol) {
  if (w.rows() != w.cols()) {
    throw std::invalid_argument("CovarianceWeight: matrix must be square");
  }
  dim_ = static_cast<int>(w.rows());
  if (dim_ == 0) {
    whitener_.resize(0, 0);
    pinv_.resize(0, 0);
    positive_definite_ = true;
    return;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(0.5 * (w + w.transpose()));
  const Eigen::VectorXd lam = eig.eigenvalues();
  const Eigen::MatrixXd& v = eig.eigenvectors();
  const double lmax = std::max(lam.cwiseAbs().maxCoeff(), 0.0);
  const double thresh = tol * std::max(lmax, 1e-300) * dim_;
  for (int i = 0; i < dim_; ++i) {
    if (lam(i) < -thresh) {
      throw std::invalid_argument("CovarianceWeight: matrix is not PSD");
    }
  }
  rank_ = 0;
  for (int i = 0; i < dim_; ++i) {
    if (lam(i) > thresh) ++rank_;
  }
  positive_definite_ = (rank_ == dim_) && lmax > 0.0;
  whitener_.resize(rank_, dim_);
  pinv_ = Eigen::MatrixXd::Zero(dim_, dim_);
  int r = 0;
  for (int i = 0; i < dim_; ++i) {
    if (lam(i) > thresh) {
      whitener_.row(r++) = v.col(i).transpose() / std::sqrt(lam(i));
      pinv_ += v.col(i) * v.col(i).transpose() / lam(i);
    }
  }
}

double CovarianceWeight::quad(const Eigen::VectorXd& z) const {
  return (whitener_ * z).squaredNorm();
}

Eigen::VectorXd CovarianceWeight::apply_pinv(const Eigen::VectorXd& z) const {
  return pinv_ * z;
}

Eigen::MatrixXd CovarianceWeight::apply_pinv(const Eigen::MatrixXd& z) const {
  return pinv_ * z;
}

}  // namespace descest
