#pragma once

// Plain data for the five worked models. Header-only so that the oracle library can
// share these types without linking any coefficient code.

#include "vbr/error.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <string>

namespace vbr {

/// One observation y with black-box component likelihood values p_a(y), p_b(y).
struct SimpleMixtureData {
  double pi0 = 0.5;
  double pa = 1.0;
  double pb = 1.0;

  void validate() const {
    if (!(pi0 > 0.0 && pi0 < 1.0)) {
      throw DomainError("simple mixture requires pi0 in (0, 1)");
    }
    if (!(pa > 0.0 && pb > 0.0) || !std::isfinite(pa) || !std::isfinite(pb)) {
      throw DomainError("simple mixture requires finite pa, pb > 0");
    }
  }
};

/// N observations given as component log-likelihoods, with a Beta(alpha0, beta0) prior on pi0.
struct TwoLevelMixtureData {
  Eigen::VectorXd log_pa;
  Eigen::VectorXd log_pb;
  double alpha0 = 1.0;
  double beta0 = 1.0;

  [[nodiscard]] Eigen::Index size() const { return log_pa.size(); }

  void validate() const {
    if (log_pa.size() < 1 || log_pa.size() != log_pb.size()) {
      throw DomainError("two-level mixture needs N >= 1 matching log_pa/log_pb entries");
    }
    if (!log_pa.allFinite() || !log_pb.allFinite()) {
      throw DomainError("two-level mixture log-likelihoods must be finite");
    }
    if (!(alpha0 > 0.0 && beta0 > 0.0)) {
      throw DomainError("two-level mixture requires alpha0, beta0 > 0");
    }
  }
};

/// Two-component Gaussian mixture with a shared Gaussian-Wishart prior (mean fixed at 0).
struct GMMData {
  Eigen::MatrixXd Y; // N x D
  double alpha0 = 1.0;
  double beta0 = 1.0;
  double gamma0 = 1.0;
  double nu0 = 1.0;
  Eigen::MatrixXd W0;

  [[nodiscard]] int dim() const { return static_cast<int>(Y.cols()); }

  void validate() const {
    const auto d = Y.cols();
    if (Y.rows() < 2 || d < 1 || !Y.allFinite()) {
      throw DomainError("GMM needs a finite N x D observation matrix with N >= 2");
    }
    if (!(alpha0 > 0.0 && beta0 > 0.0 && gamma0 > 0.0)) {
      throw DomainError("GMM requires alpha0, beta0, gamma0 > 0");
    }
    if (!(nu0 > static_cast<double>(d) - 1.0)) {
      throw DomainError("GMM requires nu0 > D - 1");
    }
    if (W0.rows() != d || W0.cols() != d) {
      throw DomainError("GMM W0 must be D x D");
    }
    Eigen::LLT<Eigen::MatrixXd> llt(0.5 * (W0 + W0.transpose()));
    if (llt.info() != Eigen::Success) {
      throw DomainError("GMM W0 must be symmetric positive-definite");
    }
  }
};

/// Fully observed N x D matrix factorized as U V^T with K factors.
struct MatrixFactorizationData {
  Eigen::MatrixXd Y;
  int K = 1;
  double delta_u = 1.0;
  double delta_v = 1.0;

  void validate() const {
    if (Y.rows() < 1 || Y.cols() < 1 || !Y.allFinite()) {
      throw DomainError("matrix factorization needs a finite non-empty Y");
    }
    if (K < 1) {
      throw DomainError("matrix factorization requires K >= 1");
    }
    if (!(delta_u > 0.0 && delta_v > 0.0)) {
      throw DomainError("matrix factorization requires delta_u, delta_v > 0");
    }
  }
};

/// Two-level mixture whose pi0 prior is logit-normal with location m.
struct LogitNormalMixtureData {
  Eigen::VectorXd log_pa;
  Eigen::VectorXd log_pb;
  double m = 0.0;

  void validate() const {
    if (log_pa.size() < 1 || log_pa.size() != log_pb.size()) {
      throw DomainError("logit-normal mixture needs N >= 1 matching log_pa/log_pb entries");
    }
    if (!log_pa.allFinite() || !log_pb.allFinite() || !std::isfinite(m)) {
      throw DomainError("logit-normal mixture inputs must be finite");
    }
  }
};

} // namespace vbr
