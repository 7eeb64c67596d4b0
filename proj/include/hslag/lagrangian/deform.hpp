#pragma once

// Hamiltonian deformations of Lagrangian immersions. A potential f on L is
// extended to the ambient chart by pulling back through nearest-point
// projection onto ell(L) and cutting off with a quintic profile inside a
// tube of radius rho; the nodes are then transported by the time-1 flow of
// the Hamiltonian field of the extension. The flow is symplectic, so the
// result is Lagrangian up to integrator error.

#include <limits>

#include "hslag/lagrangian/immersion.hpp"

namespace hslag {

struct HamiltonianDeformation {
  VectorXd f;          // grid samples of the potential on L
  double rho = 0.0;    // tube radius; 0 = separation heuristic
  int flow_steps = 24;
};

namespace detail {

/// Quintic cutoff: 1 at s=0, 0 at s>=1, C^2 at both ends.
inline double quintic_cut(double s) {
  if (s <= 0) return 1.0;
  if (s >= 1) return 0.0;
  return 1.0 - s * s * s * (10.0 - 15.0 * s + 6.0 * s * s);
}

/// Half the minimal chart distance between non-neighboring sheets of the
/// sampled image (focal-radius proxy for the embedded tube).
inline double tube_radius_estimate(const TorusImmersion& ell) {
  const auto& grid = ell.grid();
  const int sz = grid.size(), n = grid.dim(), N = grid.pointsPerAxis();
  const ChartedManifold& M = ell.manifold();
  std::vector<VectorXd> pts(sz);
  for (int j = 0; j < sz; ++j) pts[j] = ell.nodeValue(j);
  double dmin = std::numeric_limits<double>::infinity();
  for (int j = 0; j < sz; ++j) {
    VectorXi kj = grid.multiIndex(j);
    for (int k = j + 1; k < sz; ++k) {
      VectorXi kk = grid.multiIndex(k);
      int sep = 0;
      for (int a = 0; a < n; ++a) {
        int d = std::abs(kj[a] - kk[a]);
        sep = std::max(sep, std::min(d, N - d));
      }
      if (sep <= 2) continue;  // same sheet, grid neighbors
      VectorXd diff = M.wrapDisplacement(pts[j] - pts[k]);
      // compare against the traversed parameter distance to skip points
      // that are merely far along the same sheet
      double param = double(sep) * kTwoPi / N;
      double d = diff.norm();
      if (d < dmin && d < param) dmin = d;
    }
  }
  if (!std::isfinite(dmin)) {
    // no competing sheet found; fall back to the coarse image scale
    double scale = 0.0;
    for (int j = 1; j < sz; ++j)
      scale = std::max(scale, M.wrapDisplacement(pts[j] - pts[0]).norm());
    dmin = std::max(scale, 1.0);
  }
  return 0.5 * dmin;
}

/// Nearest point theta* on the sampled torus (Gauss-Newton with warm start).
inline VectorXd nearest_parameter(const TorusImmersion& ell, const VectorXd& p,
                                  const VectorXd& warm) {
  const ChartedManifold& M = ell.manifold();
  VectorXd th = warm;
  for (int it = 0; it < 6; ++it) {
    VectorXd r = M.wrapDisplacement(p - ell.value(th));
    MatrixXd dl = ell.jacobian(th);
    MatrixXd A = dl.transpose() * dl;
    VectorXd step = A.ldlt().solve(dl.transpose() * r);
    th += step;
    if (step.norm() < 1e-12) break;
  }
  return th;
}

}  // namespace detail

/// Ambient extension f~ of a potential on L, evaluable near the image.
class TubePotential {
public:
  TubePotential(const TorusImmersion& ell, const VectorXd& f, double rho)
      : ell_(ell), F_(ell.grid(), f), rho_(rho) {}

  double rho() const { return rho_; }

  double value(const VectorXd& p, VectorXd& warm_theta) const {
    warm_theta = detail::nearest_parameter(ell_, p, warm_theta);
    VectorXd d =
        ell_.manifold().wrapDisplacement(p - ell_.value(warm_theta));
    double s = d.squaredNorm() / (rho_ * rho_);
    if (s >= 1.0) return 0.0;
    return F_.value(warm_theta) * detail::quintic_cut(s);
  }

  /// Hamiltonian field X = -Omega^{-1} grad f~, gradient by central FD.
  VectorXd field(const VectorXd& p, VectorXd& warm_theta) const {
    const int d = ell_.manifold().dim();
    const double h = 1e-5;
    VectorXd grad(d);
    VectorXd q = p;
    for (int a = 0; a < d; ++a) {
      VectorXd th = warm_theta;
      q[a] = p[a] + h;
      double fp = value(q, th);
      th = warm_theta;
      q[a] = p[a] - h;
      double fm = value(q, th);
      q[a] = p[a];
      grad[a] = (fp - fm) / (2 * h);
    }
    // keep the warm start in sync with the base point
    warm_theta = detail::nearest_parameter(ell_, p, warm_theta);
    return -ell_.manifold().omega(p).inverse() * grad;
  }

private:
  const TorusImmersion& ell_;
  TrigSeries F_;
  double rho_;
};

inline TorusImmersion deform(const TorusImmersion& ell,
                             const HamiltonianDeformation& d) {
  const auto& grid = ell.grid();
  const int sz = grid.size();
  if (d.f.cwiseAbs().maxCoeff() == 0.0) return ell;

  double rho = d.rho > 0 ? d.rho : detail::tube_radius_estimate(ell);
  if (rho < 1e-8) throw TubeTooSmall("estimated tube radius < 1e-8");
  TubePotential pot(ell, d.f, rho);

  const ChartedManifold& M = ell.manifold();
  MatrixXd newP(sz, ell.chartDim());
  const double dt = 1.0 / d.flow_steps;
  for (int j = 0; j < sz; ++j) {
    VectorXd x = ell.nodeValue(j);
    VectorXd th = grid.node(j);
    for (int s = 0; s < d.flow_steps; ++s) {
      if (!M.contains(x, 0.0)) throw FlowLeftAtlas(M.name());
      VectorXd th1 = th, th2 = th, th3 = th, th4 = th;
      VectorXd k1 = pot.field(x, th1);
      VectorXd k2 = pot.field(x + 0.5 * dt * k1, th2);
      VectorXd k3 = pot.field(x + 0.5 * dt * k2, th3);
      VectorXd k4 = pot.field(x + dt * k3, th4);
      VectorXd move = dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
      if (move.norm() > 0.5 * rho)
        throw TubeTooSmall("flow step exceeds half the tube radius");
      x += move;
      th = th1;
    }
    if (!M.contains(x, 0.0)) throw FlowLeftAtlas(M.name());
    newP.row(j) = (x - ell.winding() * grid.node(j)).transpose();
  }
  return TorusImmersion(ell.manifoldPtr(), ell.gridPtr(), ell.winding(), newP);
}

struct FirstVariationReport {
  double fd = 0.0;        // central difference of vol(deform(ell, t f))
  double analytic = 0.0;  // -int <d*alpha_H, f> vol
  double abs_mismatch = 0.0;
  double rel_mismatch = 0.0;
};

/// First-variation identity dvol = -int d*alpha_H . ell*v.
inline FirstVariationReport variation_check_first(const TorusImmersion& ell,
                                                  const ScalarField& v,
                                                  double h) {
  VectorXd f = ell.pullback(v);
  MaslovData md = mean_curvature(ell);

  HamiltonianDeformation dp{h * f, 0.0, 24};
  HamiltonianDeformation dm{-h * f, 0.0, 24};
  double vp = induced_geometry(deform(ell, dp)).volume;
  double vm = induced_geometry(deform(ell, dm)).volume;

  FirstVariationReport rep;
  rep.fd = (vp - vm) / (2 * h);
  VectorXd integrand =
      md.residual.array() * f.array() * md.geom.sqrtdet.array();
  rep.analytic = -ell.grid().integrate(integrand);
  rep.abs_mismatch = std::abs(rep.fd - rep.analytic);
  rep.rel_mismatch =
      rep.abs_mismatch / std::max({std::abs(rep.fd), std::abs(rep.analytic),
                                   1e-12});
  return rep;
}

}  // namespace hslag
