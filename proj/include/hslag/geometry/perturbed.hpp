#pragma once

// Compatible almost Kähler structures from perturbed metrics. Given the
// fixed symplectic form Omega of a base backend and a perturbed Riemannian
// metric H, the polar retraction produces the unique compatible pair
// (J, g_J = Omega J) with J the orthogonal factor of H^{-1} Omega; when H is
// already compatible the base structure is returned unchanged. Conformal
// perturbations on surfaces normalize away for the same reason.

#include <memory>
#include <utility>

#include "hslag/geometry/manifold.hpp"

namespace hslag {

namespace detail {

inline MatrixXd invSqrtSym(const MatrixXd& S) {
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(S);
  if (es.eigenvalues().minCoeff() <= 0)
    throw DegenerateMetric("polar retraction");
  return es.operatorInverseSqrt();
}

/// Compatible (J, g_J) from an arbitrary metric H and symplectic Omega.
inline std::pair<MatrixXd, MatrixXd> polarCompatible(const MatrixXd& Omega,
                                                     const MatrixXd& H) {
  MatrixXd Hs = 0.5 * (H + H.transpose());
  MatrixXd S = invSqrtSym(Hs);              // H^{-1/2}
  MatrixXd K = -S * Omega * S;              // antisymmetric
  MatrixXd P = invSqrtSym(K.transpose() * K);
  MatrixXd J = S * (K * P) * S.inverse();   // J^2 = -I
  MatrixXd gJ = Omega * J;
  gJ = 0.5 * (gJ + gJ.transpose()).eval();
  return {J, gJ};
}

}  // namespace detail

class PerturbedManifold : public ChartedManifold {
public:
  PerturbedManifold(std::shared_ptr<const ChartedManifold> base,
                    std::function<MatrixXd(const VectorXd&)> delta,
                    std::string label = "Perturbed")
      : base_(std::move(base)),
        delta_(std::move(delta)),
        label_(std::move(label)) {}

  int dim() const override { return base_->dim(); }
  std::string name() const override { return label_; }
  const ChartedManifold& base() const { return *base_; }

  MatrixXd omega(const VectorXd& p) const override { return base_->omega(p); }

  MatrixXd metric(const VectorXd& p) const override {
    return compatible(p).second;
  }

  MatrixXd acs(const VectorXd& p) const override {
    return compatible(p).first;
  }

  VectorXd periods() const override { return base_->periods(); }

  bool contains(const VectorXd& p, double margin) const override {
    return base_->contains(p, margin);
  }

  bool integrable() const override { return dim() == 2; }

  /// Reference isometry group of the unperturbed structure.
  std::vector<ScalarField> killingPotentials() const override {
    return base_->killingPotentials();
  }

private:
  std::pair<MatrixXd, MatrixXd> compatible(const VectorXd& p) const {
    MatrixXd H = base_->metric(p) + delta_(p);
    return detail::polarCompatible(base_->omega(p), H);
  }

  std::shared_ptr<const ChartedManifold> base_;
  std::function<MatrixXd(const VectorXd&)> delta_;
  std::string label_;
};

}  // namespace hslag
