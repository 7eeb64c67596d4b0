#pragma once

// Harmonic 1-forms of the induced metric and the Lagrangian families they
// seed: each generator of H^1(T^n) gets the representative dtheta_i + dphi_i
// with the correction solved spectrally in a Galerkin Fourier basis.

#include "hslag/lagrangian/immersion.hpp"

namespace hslag {

struct HarmonicForms {
  std::vector<MatrixXd> forms;  // per generator: grid.size() x n samples
  double min_norm = 0.0;        // min over grid and generators of |h|_{g_L}
  bool nonvanishing = false;
};

inline HarmonicForms harmonic_one_forms(const TorusImmersion& ell) {
  const auto& grid = ell.grid();
  const int n = ell.fiberDim(), sz = grid.size();
  InducedGeometry geo = induced_geometry(ell);
  FourierBasis basis(grid, grid.pointsPerAxis() / 2 - 1);
  const int B = basis.size();

  // gradients of the basis fields at the nodes
  std::vector<MatrixXd> dbasis(n);
  for (int a = 0; a < n; ++a) {
    dbasis[a].resize(sz, B);
    for (int b = 0; b < B; ++b)
      dbasis[a].col(b) = grid.diff(basis.samples.col(b), a);
  }

  // stiffness A_bc = int g^{ab} d_a e_b d_b e_c sqrtdet and load per generator
  MatrixXd A = MatrixXd::Zero(B, B);
  MatrixXd rhs = MatrixXd::Zero(B, n);
  for (int j = 0; j < sz; ++j) {
    MatrixXd dj(n, B);
    for (int a = 0; a < n; ++a) dj.row(a) = dbasis[a].row(j);
    MatrixXd w = geo.gLinv[j] * geo.sqrtdet[j];
    A += dj.transpose() * w * dj;
    // load: -int <dtheta_i, d e_b>, dtheta_i the constant form e_i
    rhs -= dj.transpose() * w;
  }

  // solve on the complement of constants (A has a constant null direction)
  Eigen::CompleteOrthogonalDecomposition<MatrixXd> cod(A);
  MatrixXd coef = cod.solve(rhs);

  HarmonicForms out;
  out.forms.assign(n, MatrixXd::Zero(sz, n));
  for (int i = 0; i < n; ++i) {
    for (int a = 0; a < n; ++a)
      out.forms[i].col(a) = dbasis[a] * coef.col(i);
    out.forms[i].col(i).array() += 1.0;  // dtheta_i
    VectorXd check = codifferential(ell, geo, out.forms[i]);
    if (check.cwiseAbs().maxCoeff() > 1e-6)
      throw SolverDiverged("harmonic correction residual " +
                           std::to_string(check.cwiseAbs().maxCoeff()));
  }
  out.min_norm = std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < sz; ++j) {
      VectorXd h = out.forms[i].row(j).transpose();
      out.min_norm =
          std::min(out.min_norm, std::sqrt(h.dot(geo.gLinv[j] * h)));
    }
  out.nonvanishing = out.min_norm > 1e-10;
  return out;
}

/// A Lagrangian family over a ball of harmonic-form coordinates.
struct LagrangianFamily {
  std::function<TorusImmersion(const VectorXd&)> at;
  double radius = 0.0;
  int parameters = 0;
};

/// Seed fibration around a translation-invariant fiber: the deformation
/// field V_a with iota_{V_a} omega = dtheta_a must be constant along L
/// (moment fibers in action-angle or flat coordinates), which makes every
/// member exactly Lagrangian.
inline LagrangianFamily fibration_seed(const TorusImmersion& ell, double K,
                                       double lagrangian_tol = 1e-8) {
  const auto& grid = ell.grid();
  const int n = ell.fiberDim(), sz = grid.size();
  InducedGeometry geo = induced_geometry(ell);
  const ChartedManifold& M = ell.manifold();

  // V_a = -J dl gL^{-1} e_a, checked constant over the nodes
  MatrixXd V0;
  for (int j = 0; j < sz; ++j) {
    VectorXd p = ell.nodeValue(j);
    MatrixXd V = -M.acs(p) * geo.dl[j] * geo.gLinv[j];
    if (j == 0) V0 = V;
    else if ((V - V0).cwiseAbs().maxCoeff() > 1e-8)
      throw UnsupportedBackend("fibration_seed needs a translation fiber");
  }

  // overlap guard: translations beyond half a chart period wrap onto
  // other members
  VectorXd per = M.periods();
  for (int c = 0; c < M.dim(); ++c)
    if (per[c] > 0 && V0.row(c).norm() > 0 &&
        K * V0.row(c).norm() > 0.5 * per[c])
      throw FamilyOverlap("K exceeds half the chart period");

  auto Mptr = ell.manifoldPtr();
  auto gptr = ell.gridPtr();
  MatrixXd W = ell.winding(), P = ell.periodicPart();
  LagrangianFamily fam;
  fam.radius = K;
  fam.parameters = n;
  fam.at = [Mptr, gptr, W, P, V0, K, lagrangian_tol](const VectorXd& t) {
    if (t.norm() > K) throw FamilyOverlap("parameter outside the seed ball");
    MatrixXd Pt = P;
    VectorXd shift = V0 * t;
    Pt.rowwise() += shift.transpose();
    TorusImmersion m(Mptr, gptr, W, Pt);
    for (int j = 0; j < gptr->size(); ++j)
      if (!Mptr->contains(m.nodeValue(j), 0.0))
        throw BoundaryPoint("family member leaves the chart");
    if (m.lagrangianDefect() >= lagrangian_tol)
      throw Error("LagrangianDefect", "family member not Lagrangian");
    return m;
  };
  return fam;
}

}  // namespace hslag
