#pragma once

// Discretized Lagrangian torus immersions ell : T^n -> M. Chart images are
// stored as an integer winding part W*theta plus a periodic part sampled on
// the tensor grid, so immersions whose chart coordinates wind (moment fibers,
// equators, product tori) interpolate exactly.

#include <memory>

#include "hslag/fourier.hpp"
#include "hslag/geometry/manifold.hpp"

namespace hslag {

class TorusImmersion {
public:
  TorusImmersion(std::shared_ptr<const ChartedManifold> M,
                 std::shared_ptr<const PeriodicGrid> grid, MatrixXd winding,
                 MatrixXd periodic_part)
      : M_(std::move(M)),
        grid_(std::move(grid)),
        W_(std::move(winding)),
        P_(std::move(periodic_part)) {
    series_.reserve(chartDim());
    for (int c = 0; c < chartDim(); ++c)
      series_.emplace_back(*grid_, P_.col(c));
  }

  /// Sample theta -> map(theta), subtracting the winding part.
  static TorusImmersion fromFunction(
      std::shared_ptr<const ChartedManifold> M,
      std::shared_ptr<const PeriodicGrid> grid, const MatrixXd& winding,
      const std::function<VectorXd(const VectorXd&)>& map) {
    MatrixXd P(grid->size(), winding.rows());
    for (int j = 0; j < grid->size(); ++j) {
      VectorXd th = grid->node(j);
      P.row(j) = (map(th) - winding * th).transpose();
    }
    return TorusImmersion(std::move(M), std::move(grid), winding, P);
  }

  int fiberDim() const { return grid_->dim(); }
  int chartDim() const { return int(W_.rows()); }
  const ChartedManifold& manifold() const { return *M_; }
  std::shared_ptr<const ChartedManifold> manifoldPtr() const { return M_; }
  const PeriodicGrid& grid() const { return *grid_; }
  std::shared_ptr<const PeriodicGrid> gridPtr() const { return grid_; }
  const MatrixXd& winding() const { return W_; }
  const MatrixXd& periodicPart() const { return P_; }

  VectorXd value(const VectorXd& theta) const {
    VectorXd p = W_ * theta;
    for (int c = 0; c < chartDim(); ++c) p[c] += series_[c].value(theta);
    return p;
  }

  VectorXd nodeValue(int j) const {
    return W_ * grid_->node(j) + P_.row(j).transpose();
  }

  /// d ell, chartDim x n, at an arbitrary point of T^n.
  MatrixXd jacobian(const VectorXd& theta) const {
    MatrixXd d = W_;
    for (int c = 0; c < chartDim(); ++c)
      for (int a = 0; a < fiberDim(); ++a)
        d(c, a) += series_[c].deriv(theta, a);
    return d;
  }

  /// Spectral d ell at every grid node (chartDim x n per node).
  std::vector<MatrixXd> nodeJacobians() const {
    const int n = fiberDim(), cd = chartDim(), sz = grid_->size();
    std::vector<MatrixXd> out(sz, W_);
    for (int c = 0; c < cd; ++c)
      for (int a = 0; a < n; ++a) {
        VectorXd d = grid_->diff(P_.col(c), a);
        for (int j = 0; j < sz; ++j) out[j](c, a) += d[j];
      }
    return out;
  }

  /// Spectral Hessians of each chart coordinate at every node: out[j][c](a,b).
  std::vector<std::vector<MatrixXd>> nodeHessians() const {
    const int n = fiberDim(), cd = chartDim(), sz = grid_->size();
    std::vector<std::vector<MatrixXd>> out(
        sz, std::vector<MatrixXd>(cd, MatrixXd::Zero(n, n)));
    for (int c = 0; c < cd; ++c)
      for (int a = 0; a < n; ++a) {
        VectorXd da = grid_->diff(P_.col(c), a);
        for (int b = a; b < n; ++b) {
          VectorXd dab = grid_->diff(da, b);
          for (int j = 0; j < sz; ++j) {
            out[j][c](a, b) = dab[j];
            out[j][c](b, a) = dab[j];
          }
        }
      }
    return out;
  }

  /// sup over nodes of the pulled-back symplectic form.
  double lagrangianDefect() const {
    auto dls = nodeJacobians();
    double worst = 0.0;
    for (int j = 0; j < grid_->size(); ++j) {
      MatrixXd pull = dls[j].transpose() * M_->omega(nodeValue(j)) * dls[j];
      worst = std::max(worst, pull.cwiseAbs().maxCoeff());
    }
    return worst;
  }

  /// Pullback of an ambient scalar field to grid samples.
  VectorXd pullback(const ScalarField& v) const {
    VectorXd out(grid_->size());
    for (int j = 0; j < grid_->size(); ++j) out[j] = v.value(nodeValue(j));
    return out;
  }

private:
  std::shared_ptr<const ChartedManifold> M_;
  std::shared_ptr<const PeriodicGrid> grid_;
  MatrixXd W_;  // chartDim x n integer winding
  MatrixXd P_;  // grid.size() x chartDim periodic part
  std::vector<TrigSeries> series_;
};

struct InducedGeometry {
  std::vector<MatrixXd> dl;     // chartDim x n per node
  std::vector<MatrixXd> gL;     // n x n per node
  std::vector<MatrixXd> gLinv;  // n x n per node
  VectorXd sqrtdet;             // per node
  double volume = 0.0;
};

inline InducedGeometry induced_geometry(const TorusImmersion& ell,
                                        double min_eig = 1e-10) {
  InducedGeometry geo;
  geo.dl = ell.nodeJacobians();
  const int sz = ell.grid().size();
  geo.gL.resize(sz);
  geo.gLinv.resize(sz);
  geo.sqrtdet.resize(sz);
  for (int j = 0; j < sz; ++j) {
    MatrixXd g = ell.manifold().metric(ell.nodeValue(j));
    geo.gL[j] = geo.dl[j].transpose() * g * geo.dl[j];
    geo.gL[j] = 0.5 * (geo.gL[j] + geo.gL[j].transpose()).eval();
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(geo.gL[j]);
    if (es.eigenvalues().minCoeff() < min_eig)
      throw DegenerateInducedMetric("node " + std::to_string(j));
    geo.gLinv[j] = geo.gL[j].inverse();
    geo.sqrtdet[j] = std::sqrt(geo.gL[j].determinant());
  }
  geo.volume = ell.grid().integrate(geo.sqrtdet);
  return geo;
}

/// Christoffel symbols of the induced metric at every node, by spectral
/// differentiation of the sampled g_L components.
inline std::vector<Christoffel> induced_christoffel(const TorusImmersion& ell,
                                                    const InducedGeometry& geo) {
  const int n = ell.fiberDim(), sz = ell.grid().size();
  // dgl[a](j, b*n+c) = d_a gL_bc at node j
  std::vector<MatrixXd> dgl(n, MatrixXd(sz, n * n));
  for (int b = 0; b < n; ++b)
    for (int c = 0; c < n; ++c) {
      VectorXd comp(sz);
      for (int j = 0; j < sz; ++j) comp[j] = geo.gL[j](b, c);
      for (int a = 0; a < n; ++a) dgl[a].col(b * n + c) = ell.grid().diff(comp, a);
    }
  std::vector<Christoffel> out(sz, Christoffel(n, MatrixXd::Zero(n, n)));
  for (int j = 0; j < sz; ++j)
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b)
        for (int c = b; c < n; ++c) {
          double s = 0.0;
          for (int e = 0; e < n; ++e)
            s += geo.gLinv[j](a, e) * (dgl[b](j, e * n + c) +
                                       dgl[c](j, e * n + b) -
                                       dgl[e](j, b * n + c));
          out[j][a](b, c) = 0.5 * s;
          out[j][a](c, b) = out[j][a](b, c);
        }
  return out;
}

/// Codifferential d*alpha = -(1/sqrt g) d_a (sqrt g g^{ab} alpha_b) of a
/// 1-form given by node samples (size x n), spectrally.
inline VectorXd codifferential(const TorusImmersion& ell,
                               const InducedGeometry& geo,
                               const MatrixXd& alpha) {
  const int n = ell.fiberDim(), sz = ell.grid().size();
  VectorXd out = VectorXd::Zero(sz);
  for (int a = 0; a < n; ++a) {
    VectorXd flux(sz);
    for (int j = 0; j < sz; ++j) {
      double va = 0.0;
      for (int b = 0; b < n; ++b) va += geo.gLinv[j](a, b) * alpha(j, b);
      flux[j] = geo.sqrtdet[j] * va;
    }
    out -= ell.grid().diff(flux, a);
  }
  return out.cwiseQuotient(geo.sqrtdet);
}

struct MaslovData {
  MatrixXd H;        // size x chartDim, ambient mean-curvature components
  MatrixXd alpha;    // size x n, Maslov form alpha_H = ell*omega(H, .)
  VectorXd residual; // size, d*alpha_H
  double volume = 0.0;
  double sup_residual = 0.0;
  double l2_residual = 0.0;
  InducedGeometry geom;
};

inline MaslovData mean_curvature(const TorusImmersion& ell) {
  MaslovData md;
  md.geom = induced_geometry(ell);
  const auto& geo = md.geom;
  auto hess = ell.nodeHessians();
  const int n = ell.fiberDim(), cd = ell.chartDim(), sz = ell.grid().size();
  md.H.resize(sz, cd);
  md.alpha.resize(sz, n);
  const ChartedManifold& M = ell.manifold();
  for (int j = 0; j < sz; ++j) {
    VectorXd p = ell.nodeValue(j);
    MatrixXd g = M.metric(p);
    MatrixXd Om = M.omega(p);
    Christoffel gamma = M.christoffel(p);
    const MatrixXd& dl = geo.dl[j];
    // H = g_L^{ab} PiN( d^2 ell_{ab} + Gamma(dl_a, dl_b) )
    VectorXd Hj = VectorXd::Zero(cd);
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) {
        double w = geo.gLinv[j](a, b);
        for (int c = 0; c < cd; ++c) {
          double gam = 0.0;
          for (int d = 0; d < cd; ++d)
            for (int e = 0; e < cd; ++e)
              gam += gamma[c](d, e) * dl(d, a) * dl(e, b);
          Hj[c] += w * (hess[j][c](a, b) + gam);
        }
      }
    // normal projection: v - dl gL^{-1} dl^T g v
    Hj -= dl * (geo.gLinv[j] * (dl.transpose() * (g * Hj)));
    md.H.row(j) = Hj.transpose();
    // alpha_a = omega(H, dl_a) = H^T Om dl_a
    md.alpha.row(j) = (Hj.transpose() * Om * dl);
  }
  md.residual = codifferential(ell, geo, md.alpha);
  md.volume = geo.volume;
  md.sup_residual = md.residual.cwiseAbs().maxCoeff();
  VectorXd r2 = md.residual.array().square() * geo.sqrtdet.array();
  md.l2_residual = std::sqrt(ell.grid().integrate(r2));
  return md;
}

inline MaslovData hslag_residual(const TorusImmersion& ell) {
  return mean_curvature(ell);
}

/// Validate the immersion invariants; throws on failure.
inline void validate_immersion(const TorusImmersion& ell,
                               double lagrangian_tol = 1e-8) {
  if (ell.lagrangianDefect() >= lagrangian_tol)
    throw Error("LagrangianDefect", "ell*omega exceeds tolerance");
  induced_geometry(ell);  // throws DegenerateInducedMetric
}

}  // namespace hslag
