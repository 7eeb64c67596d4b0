#pragma once

// Toric Kähler manifold in action-angle coordinates (x, theta) over the
// interior of a Delzant polytope, with the Guillemin metric
//   g = G_ij dx_i dx_j + G^ij dtheta_i dtheta_j,   G = Hess(u),
// and omega = sum dx_i ^ dtheta_i. Moment fibers {x = x0} are Lagrangian.

#include <memory>

#include "hslag/geometry/manifold.hpp"
#include "hslag/lagrangian/immersion.hpp"
#include "hslag/toric/polytope.hpp"

namespace hslag {

class ToricManifold : public ChartedManifold {
public:
  explicit ToricManifold(LabelledPolytope P) : P_(std::move(P)) {
    validate_delzant(P_, /*throw_on_fail=*/true);
  }

  int dim() const override { return 2 * P_.n; }
  std::string name() const override { return "Toric"; }
  const LabelledPolytope& polytope() const { return P_; }

  MatrixXd metric(const VectorXd& p) const override {
    const int n = P_.n;
    GuilleminData gd = guillemin_metric(P_, p.head(n));
    MatrixXd g = MatrixXd::Zero(2 * n, 2 * n);
    g.topLeftCorner(n, n) = gd.G;
    g.bottomRightCorner(n, n) = gd.Ginv;
    return g;
  }

  MatrixXd omega(const VectorXd&) const override {
    const int n = P_.n;
    MatrixXd om = MatrixXd::Zero(2 * n, 2 * n);
    om.topRightCorner(n, n) = MatrixXd::Identity(n, n);
    om.bottomLeftCorner(n, n) = -MatrixXd::Identity(n, n);
    return om;
  }

  MatrixXd metricDeriv(const VectorXd& p, int a) const override {
    const int n = P_.n;
    MatrixXd dg = MatrixXd::Zero(2 * n, 2 * n);
    if (a < n) {
      GuilleminData gd = guillemin_metric(P_, p.head(n));
      MatrixXd dG = guillemin_metric_deriv(P_, p.head(n), a);
      dg.topLeftCorner(n, n) = dG;
      dg.bottomRightCorner(n, n) = -gd.Ginv * dG * gd.Ginv;
    }
    return dg;
  }

  VectorXd periods() const override {
    VectorXd per = VectorXd::Zero(2 * P_.n);
    per.tail(P_.n).setConstant(2 * M_PI);
    return per;
  }

  bool contains(const VectorXd& p, double margin) const override {
    if (p.size() != 2 * P_.n) return false;
    VectorXd l = P_.ell(p.head(P_.n));
    for (int k = 0; k < P_.facets(); ++k)
      if (l[k] <= 1e-9 + margin * P_.nu.row(k).norm()) return false;
    return true;
  }

  std::vector<ScalarField> killingPotentials() const override {
    const int n = P_.n;
    std::vector<ScalarField> out;
    ScalarField one;
    one.value = [](const VectorXd&) { return 1.0; };
    one.grad = [n](const VectorXd&) { return VectorXd::Zero(2 * n); };
    one.name = "1";
    out.push_back(one);
    for (int i = 0; i < n; ++i) {
      ScalarField xi;
      xi.value = [i](const VectorXd& p) { return p[i]; };
      xi.grad = [i, n](const VectorXd&) {
        VectorXd g = VectorXd::Zero(2 * n);
        g[i] = 1.0;
        return g;
      };
      xi.name = "x" + std::to_string(i + 1);
      out.push_back(xi);
    }
    return out;
  }

private:
  LabelledPolytope P_;
};

/// The Lagrangian moment fiber theta -> (x0, theta).
inline TorusImmersion moment_fiber(std::shared_ptr<const ToricManifold> M,
                                   const VectorXd& x0, int N = 32) {
  const int n = int(x0.size());
  VectorXd l = M->polytope().ell(x0);
  if ((l.array() <= 1e-9).any()) throw BoundaryPoint("moment_fiber");
  auto grid = std::make_shared<PeriodicGrid>(n, N);
  MatrixXd W = MatrixXd::Zero(2 * n, n);
  W.bottomRows(n) = MatrixXd::Identity(n, n);
  MatrixXd P = MatrixXd::Zero(grid->size(), 2 * n);
  P.leftCols(n).rowwise() = x0.transpose();
  return TorusImmersion(std::move(M), std::move(grid), W, P);
}

}  // namespace hslag
